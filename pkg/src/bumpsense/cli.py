"""Command-line entry points.

Subcommands: ``simulate`` (synthetic corpora), ``extract`` (detection),
``train`` (template models), ``classify`` (batch classification), ``serve``
(live UDP analysis), and ``eval`` / ``eval compare`` (reports).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import evaluate as ev
from . import io as bio
from . import live, synth
from .classify import classify
from .core import DEFAULT_RATE_HZ, SEGMENT_IDS
from .detect import DetectorConfig, detect_events
from .filtering import FilterSpec, apply_filter, design_lowpass
from .templates import APPROACHES, build_model, load_model, save_model

logger = logging.getLogger(__name__)


def _filter_flag(parser: argparse.ArgumentParser, default: str = "off") -> None:
    parser.add_argument(
        "--filter",
        choices=("on", "off"),
        default=default,
        help="low-pass the stream before processing (default %(default)s)",
    )


def _detector_config(args: argparse.Namespace, rate_hz: float) -> DetectorConfig:
    frame_len = int(round(args.frame_ms / 1000.0 * rate_hz))
    padding = int(round(args.padding_ms / 1000.0 * rate_hz))
    return DetectorConfig(
        pos_thresh=args.threshold,
        neg_thresh=-args.threshold,
        frame_len=frame_len,
        padding=padding,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    segments = SEGMENT_IDS if args.segments == "all" else tuple(args.segments.split(","))
    unknown = [s for s in segments if s not in SEGMENT_IDS]
    if unknown:
        raise SystemExit(f"unknown segments: {unknown}")
    for k, seg in enumerate(segments):
        stream, labels = synth.segment_recording(
            seg, args.per_segment, args.seed + k, rate_hz=args.rate
        )
        rec_path = out / f"{seg}.csv"
        bio.write_recording(stream, rec_path)
        bio.write_labels(labels, bio.labels_path_for(rec_path))
        print(f"wrote {rec_path} ({len(stream)} samples, {len(labels)} impacts)")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    stream = bio.read_recording(args.input, rate_hz=args.rate)
    if args.filter == "on":
        coeffs = design_lowpass(FilterSpec(sample_rate_hz=stream.rate_hz))
        stream = apply_filter(coeffs, stream)
    cfg = _detector_config(args, stream.rate_hz)
    events = detect_events(stream, cfg)
    labels_file = Path(args.labels) if args.labels else bio.labels_path_for(args.input)
    if labels_file.exists():
        truth = bio.read_labels(labels_file)
        events, n_detected, n_false = ev.match_events(events, truth, rate_hz=stream.rate_hz)
        print(f"matched {n_detected}/{len(truth)} planted impacts, {n_false} unmatched events")
    bio.write_events(events, args.out, stream.rate_hz, args.filter, cfg.padding)
    print(f"wrote {len(events)} events to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    events, header = bio.read_events(args.input)
    if header.get("filter") != args.filter:
        logger.warning(
            "events were extracted with filter=%s but training as filter=%s",
            header.get("filter"),
            args.filter,
        )
    model = build_model(
        [e.frame for e in events],
        approach=args.approach,
        filter_variant=args.filter,
        seed=args.seed,
    )
    save_model(model, args.out)
    print(f"wrote {args.approach} model ({args.filter}) to {args.out}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    events, header = bio.read_events(args.input)
    rate_hz = float(header.get("rate_hz", DEFAULT_RATE_HZ))
    records = []
    for i, event in enumerate(events):
        result = classify(event.frame, model)
        records.append(
            bio.result_record(i, event, result, with_timings=args.with_timings, rate_hz=rate_hz)
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        bio.write_results(records, fh, bio.results_header(model.approach, model.filter_variant))
    print(f"classified {len(records)} events into {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    out = open(args.results, "a", encoding="utf-8") if args.results else sys.stdout

    def sink(emitted: live.EmittedResult) -> None:
        rec = bio.result_record(emitted.index, emitted.event, emitted.result)
        out.write(json.dumps(rec, separators=(",", ":")) + "\n")
        out.flush()

    pipeline = live.StreamPipeline(
        model=model, filter_on=args.filter == "on", rate_hz=args.rate, sink=sink
    )
    port = args.port if args.port is not None else live.default_port()
    listener = live.UdpListener(pipeline, port=port, workers=args.workers)
    print(f"listening on udp://127.0.0.1:{listener.port} (ctrl-c to stop)", file=sys.stderr)
    try:
        listener.serve()
    except KeyboardInterrupt:
        pass
    finally:
        listener.close()
        if out is not sys.stdout:
            out.close()
        print(json.dumps(pipeline.counters.as_dict()), file=sys.stderr)
    return 0


def _load_corpus_dir(corpus: Path) -> list[tuple]:
    recordings = []
    for rec_path in sorted(corpus.glob("*.csv")):
        if rec_path.name.endswith(".labels.csv"):
            continue
        labels_file = bio.labels_path_for(rec_path)
        if not labels_file.exists():
            raise SystemExit(f"missing label sidecar for {rec_path}")
        recordings.append((bio.read_recording(rec_path), bio.read_labels(labels_file)))
    if not recordings:
        raise SystemExit(f"no recordings in {corpus}")
    return recordings


def cmd_eval(args: argparse.Namespace) -> int:
    if args.eval_cmd == "compare":
        train = _load_corpus_dir(Path(args.corpus) / "train")
        test = _load_corpus_dir(Path(args.corpus) / "test")
        report = ev.compare_arms(train, test)
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        for key, arm in sorted(report.reports.items()):
            print(f"{key[0]:>6} filter={key[1]}: accuracy {arm.overall_accuracy:.3f}")
        print(f"wrote comparison report to {args.out}")
        return 0
    if not (args.model and args.test and args.out):
        raise SystemExit("eval requires --model, --test and --out (or the compare subcommand)")
    model = load_model(args.model)
    events, _ = bio.read_events(args.test)
    report = ev.evaluate(model, [e.frame for e in events])
    Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.render_table())
    print(f"wrote report to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bumpsense",
        description="Detect and localize low-force impacts on a parked vehicle "
        "from 6-axis inertial data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate labeled synthetic recordings")
    p.add_argument("--segments", default="all", help="'all' or comma-separated ids")
    p.add_argument("--per-segment", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", help="detect events in a recording")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default=None, help="label sidecar (default: <stem>.labels.csv)")
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--frame-ms", type=float, default=500.0)
    p.add_argument("--padding-ms", type=float, default=50.0)
    p.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    _filter_flag(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="build a template model from events")
    p.add_argument("--approach", choices=APPROACHES, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    _filter_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify extracted events")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--with-timings", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("serve", help="live UDP analysis")
    p.add_argument("--port", type=int, default=None, help=f"default ${live.PORT_ENV_VAR} or {live.DEFAULT_PORT}")
    p.add_argument("--model", required=True)
    p.add_argument("--results", default=None, help="append results here (default stdout)")
    p.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument("--workers", type=int, default=0, choices=(0, 1))
    _filter_flag(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="evaluate a model, or compare all arms")
    eval_sub = p.add_subparsers(dest="eval_cmd")
    p.add_argument("--model")
    p.add_argument("--test")
    p.add_argument("--out")
    pc = eval_sub.add_parser("compare", help="3 approaches x filtered/unfiltered")
    pc.add_argument("--corpus", required=True, help="directory with train/ and test/")
    pc.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Live ingestion: a transport-agnostic sample pipeline plus a UDP listener.

Wire format: one ASCII line per datagram, ``t_ms,ax,ay,az,rx,ry,rz``,
newline-terminated, decimal floats.  Lossy transport is expected: malformed
datagrams are counted and skipped, out-of-order timestamps dropped, and a
timestamp gap beyond 50% of the nominal spacing is treated as missing data
(running peak extrema reset; a partially buffered frame is abandoned).

The same pipeline drives offline file processing, so identical samples
yield identical events and classifications regardless of transport.
"""

from __future__ import annotations

import logging
import os
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from .classify import ClassificationResult, classify
from .core import DEFAULT_RATE_HZ, SampleStream, SensorSample
from .detect import DetectionEvent, DetectorConfig, EventDetector
from .filtering import FilterCoefficients, FilterSpec, StreamingFilter, design_lowpass
from .io import result_record
from .templates import SegmentModel

logger = logging.getLogger(__name__)

DEFAULT_PORT = 47330
PORT_ENV_VAR = "BUMPSENSE_PORT"


def default_port() -> int:
    return int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))


def parse_wire_line(line: str) -> SensorSample:
    """Parse one ``t_ms,ax,ay,az,rx,ry,rz`` datagram line."""
    parts = line.strip().split(",")
    if len(parts) != 7:
        raise ValueError(f"expected 7 fields, got {len(parts)}")
    values = [float(p) for p in parts]
    return SensorSample(*values)


def wire_line(sample: SensorSample) -> str:
    fields = [sample.t, *sample.channel_values()]
    return ",".join(repr(float(v)) for v in fields) + "\n"


@dataclass
class PipelineCounters:
    samples: int = 0
    malformed: int = 0
    out_of_order: int = 0
    gaps: int = 0
    gap_samples: int = 0
    aborted_frames: int = 0
    events: int = 0
    dropped_queue: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class EmittedResult:
    index: int
    event: DetectionEvent
    result: ClassificationResult
    emit_latency_ms: float = field(default=0.0)


class StreamPipeline:
    """Incremental filter -> detector -> classifier chain for one stream.

    Samples go in via :meth:`feed_sample` (or :meth:`feed_line` for wire
    text); completed classifications come out through the ``sink``
    callback.  Single-threaded use is the reference behavior.
    """

    def __init__(
        self,
        model: SegmentModel | None = None,
        detector_config: DetectorConfig | None = None,
        filter_on: bool = False,
        rate_hz: float = DEFAULT_RATE_HZ,
        sink: Callable[[EmittedResult], None] | None = None,
        filter_coeffs: FilterCoefficients | None = None,
        with_timings: bool = False,
    ) -> None:
        self.model = model
        self.rate_hz = rate_hz
        self.counters = PipelineCounters()
        self.sink = sink
        self.with_timings = with_timings
        self._detector = EventDetector(detector_config, rate_hz=rate_hz)
        self._filter = None
        if filter_on:
            coeffs = filter_coeffs or design_lowpass(FilterSpec(sample_rate_hz=rate_hz))
            self._filter = StreamingFilter(coeffs)
        self._last_t: float | None = None
        self._records: list[dict] = []

    @property
    def records(self) -> list[dict]:
        """Result records accumulated so far (also pushed to the sink)."""
        return self._records

    def feed_line(self, line: str) -> None:
        try:
            sample = parse_wire_line(line)
        except (ValueError, TypeError):
            self.counters.malformed += 1
            return
        self.feed_sample(sample)

    def feed_sample(self, sample: SensorSample) -> None:
        if self._last_t is not None:
            dt = sample.t - self._last_t
            if dt <= 0:
                self.counters.out_of_order += 1
                return
            nominal = 1000.0 / self.rate_hz
            if dt > nominal * 1.5:
                self.counters.gaps += 1
                self.counters.gap_samples += int(round(dt / nominal)) - 1
                self._detector.reset_peaks()
                if self._detector.has_pending:
                    self._detector.abort_pending()
                    self.counters.aborted_frames += 1
        self._last_t = sample.t
        self.counters.samples += 1
        if self._filter is not None:
            sample = self._filter.push(sample)
        event = self._detector.push(sample)
        if event is not None:
            self._emit(event)

    def finish(self) -> None:
        """Flush a tail-padded frame at end of input."""
        event = self._detector.flush()
        if event is not None:
            self._emit(event)

    def _emit(self, event: DetectionEvent) -> None:
        t0 = time.perf_counter()
        self.counters.events += 1
        if self.model is None:
            return
        result = classify(event.frame, self.model)
        index = len(self._records)
        record = result_record(
            index, event, result, with_timings=self.with_timings, rate_hz=self.rate_hz
        )
        self._records.append(record)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        if self.sink is not None:
            self.sink(EmittedResult(index, event, result, emit_latency_ms=latency_ms))


def run_pipeline_on_stream(
    stream: SampleStream,
    model: SegmentModel | None = None,
    detector_config: DetectorConfig | None = None,
    filter_on: bool = False,
    with_timings: bool = False,
) -> tuple[list[dict], PipelineCounters]:
    """Offline reference processing of a whole stream through the live path."""
    pipe = StreamPipeline(
        model=model,
        detector_config=detector_config,
        filter_on=filter_on,
        rate_hz=stream.rate_hz,
        with_timings=with_timings,
    )
    for s in stream.iter_samples():
        pipe.feed_sample(s)
    pipe.finish()
    return pipe.records, pipe.counters


class UdpListener:
    """Bind a UDP socket and drive a :class:`StreamPipeline`.

    ``workers=0`` (reference) parses and processes inline on the receive
    thread.  ``workers=1`` decouples the socket from processing with a
    bounded queue; on overflow the oldest datagram is dropped and counted,
    so ingestion never stalls the socket.
    """

    def __init__(
        self,
        pipeline: StreamPipeline,
        port: int | None = None,
        host: str = "127.0.0.1",
        workers: int = 0,
        queue_size: int = 4096,
    ) -> None:
        if workers not in (0, 1):
            raise ValueError("workers must be 0 (inline) or 1 (queued)")
        self.pipeline = pipeline
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, 1 << 22)
        self.sock.bind((host, DEFAULT_PORT if port is None else port))
        self.sock.settimeout(0.1)
        self.port = self.sock.getsockname()[1]
        self._workers = workers
        self._queue: queue.Queue[bytes] | None = (
            queue.Queue(maxsize=queue_size) if workers else None
        )
        self._stop = threading.Event()
        self._worker_thread: threading.Thread | None = None

    def stop(self) -> None:
        self._stop.set()

    def close(self) -> None:
        self.stop()
        if self._worker_thread is not None:
            self._worker_thread.join(timeout=5)
        self.sock.close()

    def _process(self, data: bytes) -> None:
        for raw in data.decode("ascii", errors="replace").splitlines():
            if raw:
                self.pipeline.feed_line(raw)

    def _worker(self) -> None:
        assert self._queue is not None
        while not (self._stop.is_set() and self._queue.empty()):
            try:
                data = self._queue.get(timeout=0.05)
            except queue.Empty:
                continue
            self._process(data)

    def serve(self, idle_timeout_s: float | None = None) -> None:
        """Receive until :meth:`stop` is called (or the socket has been idle
        for ``idle_timeout_s`` seconds, when given)."""
        if self._workers:
            self._worker_thread = threading.Thread(target=self._worker, daemon=True)
            self._worker_thread.start()
        last_rx = time.monotonic()
        while not self._stop.is_set():
            try:
                data, _ = self.sock.recvfrom(65536)
            except socket.timeout:
                if idle_timeout_s is not None and time.monotonic() - last_rx > idle_timeout_s:
                    break
                continue
            except OSError:
                break
            last_rx = time.monotonic()
            if self._queue is not None:
                while True:
                    try:
                        self._queue.put_nowait(data)
                        break
                    except queue.Full:
                        try:
                            self._queue.get_nowait()
                            self.pipeline.counters.dropped_queue += 1
                        except queue.Empty:
                            pass
            else:
                self._process(data)


def replay_stream_udp(
    stream: SampleStream,
    port: int,
    host: str = "127.0.0.1",
    pace_hz: float | None = None,
    drop: Callable[[int], bool] | None = None,
) -> int:
    """Send a stream as wire datagrams; returns the number sent.

    ``pace_hz`` throttles to a target sample rate (None sends flat out);
    ``drop`` is a fault-injection hook deciding per index whether to skip.
    """
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sent = 0
    try:
        for i, sample in enumerate(stream.iter_samples()):
            if drop is not None and drop(i):
                continue
            sock.sendto(wire_line(sample).encode("ascii"), (host, port))
            sent += 1
            if pace_hz:
                time.sleep(1.0 / pace_hz)
    finally:
        sock.close()
    return sent

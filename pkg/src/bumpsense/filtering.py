"""Butterworth low-pass design and causal, zero-state application to streams.

Collision content sits around 2-10 Hz, so the default 20 Hz cutoff passes
it while attenuating higher-frequency noise.  Filtering is causal (the live
path processes a continuous stream); the group delay applies identically to
training and test data, so template comparisons stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .core import CHANNELS, SampleStream, SensorSample, stream_from_arrays


class FilterDesignError(ValueError):
    """Requested response cannot be realized (e.g. cutoff at/above Nyquist)."""


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass design parameters."""

    cutoff_hz: float = 20.0
    sample_rate_hz: float = 100.0
    order: int = 2

    def __post_init__(self) -> None:
        if self.cutoff_hz <= 0 or self.sample_rate_hz <= 0:
            raise FilterDesignError("cutoff and sample rate must be positive")
        if self.order < 1:
            raise FilterDesignError(f"order must be >= 1, got {self.order}")
        if self.cutoff_hz >= self.sample_rate_hz / 2:
            raise FilterDesignError(
                f"cutoff {self.cutoff_hz:g} Hz is not below the Nyquist "
                f"frequency {self.sample_rate_hz / 2:g} Hz"
            )


@dataclass(frozen=True)
class FilterCoefficients:
    """Cascade of second-order sections ``(b0, b1, b2, a1, a2)`` plus gain.

    Validated at construction: unity DC gain within 1e-6 and every pole
    strictly inside the unit circle.
    """

    sections: np.ndarray
    gain: float = 1.0

    def __post_init__(self) -> None:
        sec = np.asarray(self.sections, dtype=np.float64)
        if sec.ndim != 2 or sec.shape[1] != 5 or sec.shape[0] == 0:
            raise ValueError(f"sections must have shape (n, 5), got {sec.shape}")
        sec = sec.copy()
        sec.flags.writeable = False
        object.__setattr__(self, "sections", sec)
        dc = self.magnitude_at(np.array([0.0]), 1.0)[0]
        if abs(dc - 1.0) > 1e-6:
            raise ValueError(f"DC gain {dc!r} deviates from unity by more than 1e-6")
        for b0, b1, b2, a1, a2 in sec:
            poles = np.roots([1.0, a1, a2])
            if np.any(np.abs(poles) >= 1.0):
                raise ValueError(f"unstable section with poles {poles}")

    def magnitude_at(self, freqs_hz, sample_rate_hz: float) -> np.ndarray:
        """|H| evaluated on the unit circle at the given frequencies."""
        w = 2.0 * np.pi * np.asarray(freqs_hz, dtype=np.float64) / sample_rate_hz
        z1 = np.exp(-1j * w)
        z2 = z1 * z1
        h = np.full(w.shape, self.gain, dtype=np.complex128)
        for b0, b1, b2, a1, a2 in self.sections:
            h *= (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2)
        return np.abs(h)

    def as_sos(self) -> np.ndarray:
        """scipy-style (n, 6) second-order-section array with gain folded in."""
        n = self.sections.shape[0]
        sos = np.empty((n, 6))
        sos[:, 0:3] = self.sections[:, 0:3]
        sos[:, 3] = 1.0
        sos[:, 4:6] = self.sections[:, 3:5]
        sos[0, 0:3] *= self.gain
        return sos


def design_lowpass(spec: FilterSpec) -> FilterCoefficients:
    """Digital Butterworth low-pass via the analog prototype and bilinear
    transform with frequency pre-warping (scipy's butter)."""
    sos = signal.butter(
        spec.order, spec.cutoff_hz, btype="low", fs=spec.sample_rate_hz, output="sos"
    )
    sections = np.column_stack([sos[:, 0:3], sos[:, 4:6]])
    return FilterCoefficients(sections=sections, gain=1.0)


def apply_filter(
    coeffs: FilterCoefficients,
    stream: SampleStream,
    channels: tuple[str, ...] = CHANNELS,
) -> SampleStream:
    """Replace the selected channels with causally filtered values.

    The filter starts from zero state; timestamps, stream length, and the
    unselected channels are unchanged.
    """
    unknown = [c for c in channels if c not in CHANNELS]
    if unknown:
        raise ValueError(f"unknown channels: {unknown}")
    sos = coeffs.as_sos()
    cols = {}
    for c in CHANNELS:
        if c in channels:
            cols[c] = signal.sosfilt(sos, stream.channels[c])
        else:
            cols[c] = stream.channels[c]
    return stream_from_arrays(stream.t_ms, cols, stream.rate_hz)


class StreamingFilter:
    """Per-sample causal filter bank carrying state across pushes.

    Chunked application is bit-identical to :func:`apply_filter` on the
    concatenated input.  One instance serves a single stream (single
    writer); independent instances may run concurrently.
    """

    def __init__(
        self, coeffs: FilterCoefficients, channels: tuple[str, ...] = CHANNELS
    ) -> None:
        self._sos = coeffs.as_sos()
        self._channels = tuple(channels)
        zi_shape = (self._sos.shape[0], 2)
        self._zi = {c: np.zeros(zi_shape) for c in self._channels}

    def push(self, sample: SensorSample) -> SensorSample:
        values = {c: getattr(sample, c) for c in CHANNELS}
        for c in self._channels:
            out, self._zi[c] = signal.sosfilt(
                self._sos, np.array([values[c]]), zi=self._zi[c]
            )
            values[c] = float(out[0])
        return SensorSample(sample.t, **values)

    def reset(self) -> None:
        for zi in self._zi.values():
            zi[:] = 0.0

"""Marker-stream processing: finger-marker filtering, rigid-body validity,
and finger height calibration.

Marker frames come from recorded JSON-lines streams or the simulator, one
frame per line: {"t": <seconds>, "markers": [[x, y, z], ...]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .geometry import vec3

AMBIGUITY_TOL = 1e-6
MIN_CALIBRATION_SAMPLES = 10
MIN_RIGID_BODY_MARKERS = 3


class TrackingError(ValueError):
    pass


@dataclass(frozen=True)
class MarkerFrame:
    """One timestamped set of tracked 3D points (tracker frame, meters)."""

    timestamp: float
    markers: tuple

    def __post_init__(self):
        object.__setattr__(self, "markers", tuple(vec3(m) for m in self.markers))


@dataclass(frozen=True)
class FingerFilterConfig:
    """Axis-aligned working volume plus a per-frame jump gate."""

    roi_min: np.ndarray
    roi_max: np.ndarray
    max_jump: float

    def __post_init__(self):
        object.__setattr__(self, "roi_min", vec3(self.roi_min))
        object.__setattr__(self, "roi_max", vec3(self.roi_max))
        if not np.all(self.roi_min < self.roi_max):
            raise TrackingError("roi_min must be strictly below roi_max componentwise")
        if not self.max_jump > 0:
            raise TrackingError("max_jump must be positive")


@dataclass(frozen=True)
class HeightCalibration:
    """Per-user finger height range above the input surface."""

    h_min: float
    h_max: float

    def __post_init__(self):
        if not (self.h_max > self.h_min >= 0):
            raise TrackingError(
                f"need h_max > h_min >= 0, got ({self.h_min}, {self.h_max})"
            )


def filter_finger_marker(
    frame: MarkerFrame, prev, cfg: FingerFilterConfig
):
    """Pick the finger marker out of a frame, or None when ambiguous/empty.

    Candidates are the markers inside the ROI. With a previous position the
    nearest candidate within max_jump wins; without one, a single candidate
    is accepted. Ties (two candidates equidistant within 1e-6) and empty or
    over-full candidate sets yield None; the caller holds the last known
    position.
    """
    candidates = [
        m
        for m in frame.markers
        if np.all(m >= cfg.roi_min) and np.all(m <= cfg.roi_max)
    ]
    if not candidates:
        return None
    if prev is None:
        if len(candidates) == 1:
            return candidates[0]
        return None
    prev = vec3(prev)
    dists = [float(np.linalg.norm(m - prev)) for m in candidates]
    order = np.argsort(dists)
    best = order[0]
    if dists[best] > cfg.max_jump:
        return None
    if len(candidates) > 1 and dists[order[1]] - dists[best] < AMBIGUITY_TOL:
        return None
    return candidates[best]


def validate_rigid_body(frame: MarkerFrame, expected_count: int) -> bool:
    """True iff enough of the body's markers are visible to track it (>= 3)."""
    if expected_count < MIN_RIGID_BODY_MARKERS:
        raise TrackingError(
            f"a rigid body needs at least {MIN_RIGID_BODY_MARKERS} markers, "
            f"got expected_count={expected_count}"
        )
    return len(frame.markers) >= MIN_RIGID_BODY_MARKERS


def calibrate_height(low_samples: Iterable[float], high_samples: Iterable[float]) -> HeightCalibration:
    """Derive the finger height range from the two calibration pose segments.

    Each segment is the recorded finger heights while the user holds the
    lowest / highest reachable pose. Per-segment medians are used so single
    tracker glitches cannot skew the range.
    """
    low = np.asarray(list(low_samples), dtype=float)
    high = np.asarray(list(high_samples), dtype=float)
    if len(low) < MIN_CALIBRATION_SAMPLES or len(high) < MIN_CALIBRATION_SAMPLES:
        raise TrackingError(
            f"need at least {MIN_CALIBRATION_SAMPLES} samples per pose segment "
            f"(got {len(low)} low, {len(high)} high)"
        )
    h_min = float(np.median(low))
    h_max = float(np.median(high))
    if h_max <= h_min:
        raise TrackingError(
            f"calibration failed: high-pose median {h_max} not above low-pose median {h_min}"
        )
    return HeightCalibration(h_min=h_min, h_max=h_max)


def read_marker_stream(lines: Iterable[str]) -> Iterator[MarkerFrame]:
    """Parse a JSON-lines marker stream, enforcing strictly increasing timestamps."""
    last_t = None
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            frame = MarkerFrame(timestamp=float(obj["t"]), markers=obj["markers"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TrackingError(f"malformed marker frame at line {lineno}: {exc}") from exc
        if last_t is not None and frame.timestamp <= last_t:
            raise TrackingError(
                f"non-increasing timestamp at line {lineno}: {frame.timestamp} <= {last_t}"
            )
        last_t = frame.timestamp
        yield frame


def write_marker_stream(frames: Iterable[MarkerFrame]) -> str:
    """Serialize frames to the JSON-lines stream format."""
    out = []
    for frame in frames:
        out.append(
            json.dumps(
                {"t": frame.timestamp, "markers": [list(m) for m in frame.markers]}
            )
        )
    return "\n".join(out) + ("\n" if out else "")

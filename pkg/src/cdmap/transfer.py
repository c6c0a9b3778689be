"""Per-frame control-display transfer functions.

Four mapping methods:

* direct: motor position passed through 1:1
* scaled: uniform gain (display displacement = gain * motor displacement)
* height-mapped: relative mapping whose gain grows with finger height
  above the input surface
* zoom-scaling: uniform environment rescale about the point under the
  finger, keeping that point fixed on the display

The height-mapped gain has two variants. ``endpoint_normalized`` (default)
satisfies the endpoint conditions G(h_min) = 1 and G(h_max) = s_l/s_s, so a
full-span motor stroke at maximum height covers the full output span.
``literal`` implements H(z) = 1 + z*N/M with N = h_max - h_min and
M = s_l/s_s; it is kept selectable because it is the other defensible
reading of the gain definition, though it does not meet the endpoint
conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Plane, perpendicular_foot, vec2, vec3


class TransferError(ValueError):
    pass


@dataclass(frozen=True)
class CdRatio:
    """Control-display ratio: motor distance divided by display distance."""

    value: float

    def __post_init__(self):
        if not (self.value > 0 and np.isfinite(self.value)):
            raise TransferError(f"C-D ratio must be positive and finite, got {self.value}")


def cd_ratio(delta_motor: float, delta_display: float) -> CdRatio:
    """Ratio of motor-space displacement to display-space displacement."""
    if delta_display == 0:
        raise TransferError("C-D ratio undefined for zero display displacement")
    return CdRatio(delta_motor / delta_display)


def map_direct(p) -> np.ndarray:
    """1:1 mapping: the motor position is the display position."""
    return vec2(p)


def map_scaled(p, gain: float) -> np.ndarray:
    """Uniform-gain mapping: display = gain * motor.

    gain = 1/N corresponds to a constant C-D ratio of N.
    """
    if not (gain > 0):
        raise TransferError(f"gain must be positive, got {gain}")
    return vec2(p) * gain


VARIANT_ENDPOINT = "endpoint_normalized"
VARIANT_LITERAL = "literal"


@dataclass(frozen=True)
class ZMappingParams:
    """Height-mapped gain parameters.

    h_min/h_max: finger height range from calibration, meters.
    input_span: usable motor span s_s, meters.
    output_span: display span s_l to be covered at maximum height, meters.
    """

    h_min: float
    h_max: float
    input_span: float
    output_span: float
    variant: str = VARIANT_ENDPOINT

    def __post_init__(self):
        if not self.h_max > self.h_min:
            raise TransferError("h_max must exceed h_min")
        if not (self.input_span > 0 and self.output_span >= self.input_span):
            raise TransferError("need output_span >= input_span > 0")
        if self.variant not in (VARIANT_ENDPOINT, VARIANT_LITERAL):
            raise TransferError(f"unknown gain variant {self.variant!r}")

    @property
    def span_ratio(self) -> float:
        return self.output_span / self.input_span


def zmap_gain(z: float, params: ZMappingParams) -> float:
    """Gain applied to lateral motion at finger height z (clamped to the span)."""
    z = min(max(z, params.h_min), params.h_max)
    if params.variant == VARIANT_ENDPOINT:
        frac = (z - params.h_min) / (params.h_max - params.h_min)
        return 1.0 + (params.span_ratio - 1.0) * frac
    # literal reading: 1 + z*N/M with N = height span, M = span ratio
    n = params.h_max - params.h_min
    m = params.span_ratio
    return 1.0 + z * n / m


@dataclass(frozen=True)
class MapperState:
    """Per-session state of the relative height-mapped transfer function."""

    f_prev: np.ndarray
    p_prev: np.ndarray | None = None
    initialized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "f_prev", vec2(self.f_prev))
        if self.p_prev is not None:
            object.__setattr__(self, "p_prev", vec3(self.p_prev))

    @staticmethod
    def at(f0=(0.0, 0.0)) -> "MapperState":
        return MapperState(f_prev=vec2(f0))


def zmap_step(
    state: MapperState,
    p_t,
    params: ZMappingParams,
    display_bounds: tuple | None = None,
) -> tuple[MapperState, np.ndarray]:
    """Advance the height-mapped transfer function by one input sample.

    The first call primes the state with p_t and emits f_prev unchanged.
    Afterwards f_t = f_{t-1} + delta_xy * G(z_t) where delta is the motor
    displacement since the previous sample and z_t the current sample's
    height. Pure vertical motion leaves the output bitwise unchanged.

    display_bounds, if given, is ((x_lo, y_lo), (x_hi, y_hi)); the output is
    clamped after the update.
    """
    p_t = vec3(p_t)
    if not state.initialized:
        new = MapperState(f_prev=state.f_prev, p_prev=p_t, initialized=True)
        return new, new.f_prev
    if state.p_prev is None:
        raise TransferError("mapper state marked initialized but has no previous sample")
    delta_xy = p_t[:2] - state.p_prev[:2]
    if delta_xy[0] == 0.0 and delta_xy[1] == 0.0:
        f_t = state.f_prev  # skip the update entirely: exact invariance
    else:
        f_t = state.f_prev + delta_xy * zmap_gain(p_t[2], params)
        if display_bounds is not None:
            (x_lo, y_lo), (x_hi, y_hi) = display_bounds
            f_t = np.array([min(max(f_t[0], x_lo), x_hi), min(max(f_t[1], y_lo), y_hi)])
    return MapperState(f_prev=f_t, p_prev=p_t, initialized=True), f_t


DEFAULT_SCALE_BOUNDS = (0.05, 1.0)


@dataclass(frozen=True)
class ZScaleState:
    """State of the focus-preserving environment rescale.

    The environment is rendered by display = scale * (p - center) + center
    + translation; ``translation`` accumulates the center displacement that
    keeps the focused point fixed across scale changes.
    """

    scale: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    bounds: tuple = DEFAULT_SCALE_BOUNDS

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "translation", vec3(self.translation))
        lo, hi = self.bounds
        if not (0 < lo <= hi):
            raise TransferError(f"invalid scale bounds {self.bounds}")
        if not (lo <= self.scale <= hi):
            raise TransferError(f"scale {self.scale} outside bounds {self.bounds}")


def env_point_after(state: ZScaleState, p_env) -> np.ndarray:
    """Display-space location of environment point p_env under the current state."""
    p_env = vec3(p_env)
    return state.scale * (p_env - state.center) + state.center + state.translation


def zscale_step(state: ZScaleState, s_new: float, p_i, screen: Plane) -> ZScaleState:
    """Rescale the environment to s_new, keeping the point under the finger fixed.

    The finger position p_i is projected to its perpendicular foot on the
    screen plane; the environment point currently rendered at the foot stays
    at the foot after the rescale. Applies symmetrically to zoom-in and
    zoom-out.
    """
    if not (s_new > 0):
        raise TransferError(f"scale must be positive, got {s_new}")
    lo, hi = state.bounds
    if not (lo <= s_new <= hi):
        raise TransferError(f"scale {s_new} outside bounds {state.bounds}")
    if s_new == state.scale:
        return state
    p_f = perpendicular_foot(vec3(p_i), screen)
    # environment point currently rendered at the foot
    q = (p_f - state.center - state.translation) / state.scale + state.center
    # where that point would land at the new scale with the old translation
    p_fs = s_new * (q - state.center) + state.center + state.translation
    # move the environment opposite to the focus point's displacement
    translation = state.translation - (p_fs - p_f)
    return replace(state, scale=s_new, translation=translation)

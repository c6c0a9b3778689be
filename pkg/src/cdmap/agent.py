"""Synthetic user: executes planned sessions through the task state machine.

The agent models movement time as an affine function of the index of
difficulty computed in motor space: MT = a + b * ID_motor, plus clutching
and correction costs. It exists to exercise the full pipeline end to end;
it makes no claim of predicting human movement times.

Motor-space distances per method:

* PT (large-display touch): the display distance itself.
* ST (small-display drag at 1:1): the display distance, clutched into
  strokes bounded by the small display's width.
* ZM (height-mapped): the display distance divided by the gain at the
  chosen arc height; the final tap still needs display-width precision.

Trajectories are minimum-jerk profiles (zero endpoint velocity and
acceleration), the standard smooth model for aimed human movement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .experiment import (
    BLOCK_SIZE,
    DisplayConfig,
    SessionPlan,
    Target,
    TaskEvent,
    TaskState,
    TrialRecord,
    fitts_id,
    step_task,
)
from .tracking import HeightCalibration
from .transfer import ZMappingParams, zmap_gain


class AgentError(ValueError):
    pass


@dataclass(frozen=True)
class AgentParams:
    """Synthetic-user movement model parameters."""

    fitts_a: float = 0.15  # seconds, affine intercept
    fitts_b: float = 0.25  # seconds per bit of motor-space ID
    endpoint_noise_sigma: float = 0.12  # endpoint scatter, fraction of target width
    clutch_penalty: float = 0.35  # seconds per re-stroke when dragging
    arc_height_frac: float = 1.0  # fraction of the calibrated height span used for ZM strokes
    reaction_time: float = 0.20  # seconds before the red target is released

    def __post_init__(self):
        if not self.fitts_b > 0:
            raise AgentError("fitts_b must be positive")
        if self.endpoint_noise_sigma < 0:
            raise AgentError("endpoint noise sigma must be non-negative")


@dataclass(frozen=True)
class SimulatedTrialOutcome:
    """Result of one simulated acquisition attempt."""

    movement_time: float
    misses: int
    trajectory: tuple  # (time, x, y, z) motor-space samples
    touch_points: tuple  # display-space touch-up positions; last one hits


def minimum_jerk(start, goal, duration: float, dt: float) -> np.ndarray:
    """Minimum-jerk positions from start to goal, shape (n_steps, n_dims).

    Uses the closed-form fifth-order polynomial s(tau) = 10 tau^3 - 15 tau^4
    + 6 tau^5, which has zero velocity and acceleration at both endpoints.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != goal.shape:
        raise AgentError("start and goal must have the same shape")
    if duration <= 0 or dt <= 0:
        raise AgentError("duration and dt must be positive")
    n = max(2, int(round(duration / dt)) + 1)
    tau = np.linspace(0.0, 1.0, n)
    s = 10 * tau**3 - 15 * tau**4 + 6 * tau**5
    return start[None, :] + s[:, None] * (goal - start)[None, :]


def motor_distance(
    method: str,
    target: Target,
    cal: HeightCalibration | None,
    params: AgentParams,
    cfg: DisplayConfig,
    zparams: ZMappingParams | None = None,
) -> tuple[float, float, int]:
    """(motor distance, gain, clutch count) the method needs for this target."""
    d = target.distance
    if method == "PT":
        return d, 1.0, 0
    if method == "ST":
        stroke = 0.8 * cfg.phone_rect.width  # usable drag span per stroke
        clutches = max(0, math.ceil(d / stroke) - 1)
        return d, 1.0, clutches
    if method == "ZM":
        if cal is None:
            raise AgentError("ZM simulation needs a height calibration")
        if zparams is None:
            zparams = ZMappingParams(
                h_min=cal.h_min,
                h_max=cal.h_max,
                input_span=cfg.phone_rect.width,
                output_span=cfg.width,
            )
        z_arc = cal.h_min + params.arc_height_frac * (cal.h_max - cal.h_min)
        gain = zmap_gain(z_arc, zparams)
        return d / gain, gain, 0
    raise AgentError(f"unknown method {method!r}")


TRAJECTORY_DT = 1.0 / 60.0


def simulate_trial(
    method: str,
    target: Target,
    cal: HeightCalibration | None,
    params: AgentParams,
    cfg: DisplayConfig,
    seed,
    zparams: ZMappingParams | None = None,
) -> SimulatedTrialOutcome:
    """Simulate one acquisition: primary movement, then corrective
    sub-movements after misses. Deterministic in the seed."""
    hw, hh = cfg.width / 2, cfg.height / 2
    if abs(target.center[0]) > hw or abs(target.center[1]) > hh:
        raise AgentError("target lies outside the display")
    rng = np.random.default_rng(seed)
    d_motor, gain, clutches = motor_distance(method, target, cal, params, cfg, zparams)
    w = target.width
    id_motor = fitts_id(d_motor, w)
    mt = params.fitts_a + params.fitts_b * id_motor
    mt += params.clutch_penalty * clutches
    if params.endpoint_noise_sigma > 0:
        mt += abs(rng.normal(0.0, params.endpoint_noise_sigma * params.fitts_b))

    # endpoint scatter: retry with a corrective sub-movement after each miss
    touch_points = []
    misses = 0
    while True:
        scatter = rng.normal(0.0, params.endpoint_noise_sigma * w, size=2)
        point = target.center + scatter
        touch_points.append(tuple(point))
        err = float(np.linalg.norm(scatter))
        if err <= w / 2:
            break
        misses += 1
        mt += params.fitts_a + params.fitts_b * fitts_id(err, w)

    # motor-space trajectory: ZM rises to the arc height, strokes laterally
    # at constant height, then descends for the tap
    direction = (target.center - cfg.start_point) / max(target.distance, 1e-12)
    lateral_goal = direction * d_motor
    samples = []
    t = 0.0
    if method == "ZM":
        z_arc = cal.h_min + params.arc_height_frac * (cal.h_max - cal.h_min)
        phases = [
            (np.array([0.0, 0.0, cal.h_min]), np.array([0.0, 0.0, z_arc]), 0.15 * mt),
            (
                np.array([0.0, 0.0, z_arc]),
                np.array([lateral_goal[0], lateral_goal[1], z_arc]),
                0.7 * mt,
            ),
            (
                np.array([lateral_goal[0], lateral_goal[1], z_arc]),
                np.array([lateral_goal[0], lateral_goal[1], cal.h_min]),
                0.15 * mt,
            ),
        ]
    else:
        phases = [
            (np.zeros(3), np.array([lateral_goal[0], lateral_goal[1], 0.0]), mt)
        ]
    for start, goal, dur in phases:
        pts = minimum_jerk(start, goal, dur, TRAJECTORY_DT)
        times = t + np.linspace(0.0, dur, len(pts))
        samples.extend((float(ti), *map(float, p)) for ti, p in zip(times, pts))
        t += dur
    return SimulatedTrialOutcome(
        movement_time=mt,
        misses=misses,
        trajectory=tuple(samples),
        touch_points=tuple(touch_points),
    )


INTER_TRIAL_GAP = 0.5


def simulate_session(
    plan: SessionPlan,
    params: AgentParams,
    cfg: DisplayConfig,
    cal: HeightCalibration,
    seed: int,
    zparams: ZMappingParams | None = None,
    include_training: bool = False,
) -> list[TrialRecord]:
    """Run every planned trial through the task state machine.

    The agent only emits touch events; the records come from step_task, so
    the logged MT/accuracy semantics are identical to a live session.
    """
    records = []
    t = 0.0
    for mi, method in enumerate(plan.method_order):
        runs = []
        if include_training:
            runs.append(plan.training[method])
        runs.append(plan.main[method])
        for targets in runs:
            is_main = targets is plan.main[method]
            state = TaskState(
                method=method,
                targets=targets,
                cfg=cfg,
                seed=plan.seed,
                subject=plan.subject_index,
            )
            display = state.active_display
            for ti, target in enumerate(targets):
                outcome = simulate_trial(
                    method,
                    target,
                    cal,
                    params,
                    cfg,
                    seed=[seed, plan.subject_index, mi, int(is_main), ti],
                    zparams=zparams,
                )
                t += params.reaction_time
                events = [
                    TaskEvent("touch_down", cfg.start_point, display, t),
                    TaskEvent("touch_up", cfg.start_point, display, t + 1e-3),
                ]
                t_red_up = t + 1e-3
                n_touch = len(outcome.touch_points)
                for k, point in enumerate(outcome.touch_points):
                    # misses land at fractions of MT; the hit exactly at MT
                    frac = (k + 1) / n_touch
                    events.append(
                        TaskEvent(
                            "touch_up",
                            point,
                            display,
                            t_red_up + frac * outcome.movement_time,
                        )
                    )
                record = None
                for ev in events:
                    state, rec = step_task(state, ev)
                    if rec is not None:
                        record = rec
                if record is None:
                    raise AgentError(
                        f"trial {ti} of method {method} produced no record"
                    )
                if is_main:
                    records.append(record)
                t = t_red_up + outcome.movement_time + INTER_TRIAL_GAP
    return records

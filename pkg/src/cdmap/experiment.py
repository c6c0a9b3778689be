"""Target generation, session planning, and the acquisition state machine.

Targets are circular, laid out along 8 directions around the large-display
center (45 degrees apart nominally; the four diagonal directions aim at the
display corners, which is what makes the corner difficulties reachable on a
16:9 panel). Difficulty is the Shannon index of difficulty
ID = log2(D/W + 1) with D the distance from the start point and W the
target diameter.

For each target the nominal ID fixes the geometry: the target sits at the
direction's maximum reach for its width (a margin of one diameter is kept
to the display edge), and the width is solved from the reach equation.
Widths below the 1 cm minimum are clamped, which produces the per-direction
ceiling IDs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .geometry import vec2

METHODS = ("PT", "ST", "ZM")  # large-display touch, small-display touch, height-mapped
MIN_TARGET_WIDTH = 0.01
BLOCK_SIZE = 30
MAIN_TRIALS = 120
TRAINING_TRIALS = 60
DIRECTIONS = 8
TARGETS_PER_DIRECTION = 15
# per-direction split over ID categories 2..5
CATEGORY_COUNTS = {2: 4, 3: 4, 4: 4, 5: 3}


class ExperimentError(ValueError):
    pass


def fitts_id(distance: float, width: float) -> float:
    """Shannon index of difficulty, bits."""
    if width <= 0:
        raise ExperimentError(f"target width must be positive, got {width}")
    if distance < 0:
        raise ExperimentError(f"distance must be non-negative, got {distance}")
    return math.log2(distance / width + 1.0)


def id_category(id_value: float) -> int:
    """Integer difficulty bucket k covering (k-0.5, k+0.5], k in 2..5."""
    if not (1.5 < id_value <= 5.5):
        raise ExperimentError(f"ID {id_value} outside the categorized range (1.5, 5.5]")
    return math.ceil(id_value - 0.5)


def accuracy(n_hits: int, n_misses: int) -> float:
    """Fraction of attempts that hit: n_h / (n_h + n_m)."""
    total = n_hits + n_misses
    if total <= 0:
        raise ExperimentError("accuracy undefined with zero attempts")
    return n_hits / total


@dataclass(frozen=True)
class PhoneRect:
    """Footprint of the small display, centered on the large display."""

    center: np.ndarray
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "center", vec2(self.center))
        if not (self.width > 0 and self.height > 0):
            raise ExperimentError("phone rect must have positive extent")


# 23-inch 16:9 touch panel active area
REFERENCE_DISPLAY_WIDTH = 0.509
REFERENCE_DISPLAY_HEIGHT = 0.286


@dataclass(frozen=True)
class DisplayConfig:
    """Large-display geometry, origin at the display center."""

    width: float = REFERENCE_DISPLAY_WIDTH
    height: float = REFERENCE_DISPLAY_HEIGHT
    phone_rect: PhoneRect = field(
        default_factory=lambda: PhoneRect(np.zeros(2), 0.110, 0.062)
    )
    start_point: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "start_point", vec2(self.start_point))
        hw, hh = self.width / 2, self.height / 2
        pr = self.phone_rect
        if (
            abs(pr.center[0]) + pr.width / 2 > hw
            or abs(pr.center[1]) + pr.height / 2 > hh
        ):
            raise ExperimentError("phone rect must lie inside the display")
        if abs(self.start_point[0]) > hw or abs(self.start_point[1]) > hh:
            raise ExperimentError("start point must lie inside the display")


@dataclass(frozen=True, eq=False)
class Target:
    """A circular goal: center, diameter, direction index, distance, difficulty."""

    center: np.ndarray
    width: float
    direction: int
    distance: float
    id_value: float

    def __eq__(self, other):
        if not isinstance(other, Target):
            return NotImplemented
        return (
            np.array_equal(self.center, other.center)
            and self.width == other.width
            and self.direction == other.direction
            and self.distance == other.distance
            and self.id_value == other.id_value
        )

    def __hash__(self):
        return hash((tuple(self.center), self.width, self.direction, self.distance, self.id_value))

    def __post_init__(self):
        object.__setattr__(self, "center", vec2(self.center))
        if self.width < MIN_TARGET_WIDTH - 1e-12:
            raise ExperimentError(f"target width {self.width} below {MIN_TARGET_WIDTH} m minimum")
        if not 0 <= self.direction < DIRECTIONS:
            raise ExperimentError(f"direction index {self.direction} out of range")
        recomputed = fitts_id(self.distance, self.width)
        if abs(recomputed - self.id_value) > 1e-9:
            raise ExperimentError(
                f"inconsistent ID: stored {self.id_value}, recomputed {recomputed}"
            )

    def contains(self, point) -> bool:
        return float(np.linalg.norm(vec2(point) - self.center)) <= self.width / 2

    @property
    def category(self) -> int:
        return id_category(self.id_value)


def _direction_reach(cfg: DisplayConfig, direction: int, width: float):
    """Max center distance along a direction keeping a one-diameter edge margin.

    Returns (reach, unit_vector). Even directions run along the axes; odd
    directions aim at the margin-shrunk display corners.
    """
    hw = cfg.width / 2 - width
    hh = cfg.height / 2 - width
    if hw <= 0 or hh <= 0:
        raise ExperimentError("display too small for this target width")
    if direction % 2 == 0:
        axis = direction // 2  # 0:+x, 1:+y, 2:-x, 3:-y
        u = [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
             np.array([-1.0, 0.0]), np.array([0.0, -1.0])][axis]
        reach = hw if axis % 2 == 0 else hh
        return reach, u
    sx = 1.0 if direction in (1, 7) else -1.0
    sy = 1.0 if direction in (1, 3) else -1.0
    corner = np.array([sx * hw, sy * hh])
    reach = float(np.linalg.norm(corner))
    return reach, corner / reach


def direction_ceiling_id(cfg: DisplayConfig, direction: int) -> float:
    """Highest ID reachable in a direction at the minimum target width."""
    reach, _ = _direction_reach(cfg, direction, MIN_TARGET_WIDTH)
    return fitts_id(reach, MIN_TARGET_WIDTH)


def _solve_target(cfg: DisplayConfig, direction: int, nominal_id: float) -> Target:
    """Place a target at full reach for its width, width solved from the ID.

    Solves reach(W) = W * (2^ID - 1); if the solution is below the width
    minimum, the width clamps to the minimum and the ID drops to the
    direction's ceiling.
    """
    k = 2.0**nominal_id - 1.0
    hw, hh = cfg.width / 2, cfg.height / 2
    if direction % 2 == 0:
        # reach(W) = half - W, so half - W = W*k gives W = half/(k+1)
        half = hw if direction in (0, 4) else hh
        w = half / (k + 1.0)
    else:
        def gap(w):
            reach, _ = _direction_reach(cfg, direction, w)
            return reach - w * k

        w = brentq(gap, 1e-6, min(hw, hh) - 1e-6, xtol=1e-14)
    clamped = w < MIN_TARGET_WIDTH
    if clamped:
        w = MIN_TARGET_WIDTH
    reach, u = _direction_reach(cfg, direction, w)
    distance = reach if clamped else w * k
    center = cfg.start_point + u * distance
    return Target(
        center=center,
        width=w,
        direction=direction,
        distance=distance,
        id_value=fitts_id(distance, w),
    )


def generate_target_set(cfg: DisplayConfig, seed: int) -> list[Target]:
    """The canonical 120-target set: 15 per direction, categories 2-5.

    Per direction the first target of each category is pinned at the
    category's reachable upper bound (so the ceiling IDs appear
    deterministically); the rest draw their nominal ID uniformly from the
    reachable part of the category interval. Categories entirely above the
    direction's ceiling fall back to the highest reachable category.
    """
    rng = np.random.default_rng(seed)
    targets = []
    for direction in range(DIRECTIONS):
        ceiling = direction_ceiling_id(cfg, direction)
        for cat, count in CATEGORY_COUNTS.items():
            lo, hi = cat - 0.5, cat + 0.5
            while lo >= ceiling and cat > 2:
                cat -= 1
                lo, hi = cat - 0.5, cat + 0.5
            hi = min(hi, ceiling)
            if hi <= lo:
                raise ExperimentError("display too small for the lowest ID category")
            for i in range(count):
                nominal = hi if i == 0 else float(rng.uniform(lo, hi))
                targets.append(_solve_target(cfg, direction, nominal))
    assert len(targets) == MAIN_TRIALS
    return targets


@dataclass(frozen=True)
class SessionPlan:
    """Counterbalanced per-subject schedule: method order plus target orders."""

    subject_index: int
    seed: int
    method_order: tuple
    training: dict  # method -> list[Target], 60 each
    main: dict  # method -> list[Target], 120 each, 4 blocks of 30


def method_order_for_subject(subject_index: int) -> tuple:
    orders = sorted(itertools.permutations(METHODS))
    return orders[subject_index % len(orders)]


def plan_session(subject_index: int, cfg: DisplayConfig, seed: int) -> SessionPlan:
    """Build a subject's full schedule from the canonical target set.

    The method order is the subject's slot in the 6 counterbalanced
    permutations; each method's main run is a seeded shuffle of the
    canonical set (selection without replacement), split into 4 blocks of
    30, preceded by 60 training trials (2 blocks of 30).
    """
    if subject_index < 0:
        raise ExperimentError("subject_index must be non-negative")
    canonical = generate_target_set(cfg, seed)
    order = method_order_for_subject(subject_index)
    training, main = {}, {}
    for mi, method in enumerate(order):
        rng = np.random.default_rng([seed, subject_index, mi])
        main[method] = [canonical[i] for i in rng.permutation(MAIN_TRIALS)]
        training[method] = [
            canonical[i] for i in rng.permutation(MAIN_TRIALS)[:TRAINING_TRIALS]
        ]
    return SessionPlan(
        subject_index=subject_index,
        seed=seed,
        method_order=order,
        training=training,
        main=main,
    )


@dataclass(frozen=True)
class TrialRecord:
    """One timed acquisition attempt, flattened to the log schema."""

    method: str
    block: int
    trial: int
    dir: int
    D_m: float
    W_m: float
    id: float
    id_cat: int
    mt_s: float
    misses: int
    hit: bool
    seed: int = 0
    subject: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ExperimentError(f"unknown method {self.method!r}")
        if self.hit and not self.mt_s > 0:
            raise ExperimentError("completed trials must have positive movement time")
        if self.id_cat != id_category(self.id):
            raise ExperimentError(
                f"id_cat {self.id_cat} inconsistent with ID {self.id}"
            )


@dataclass(frozen=True)
class TaskEvent:
    """A touch or tracking sample driving the state machine."""

    kind: str  # touch_down | touch_up | sample
    position: np.ndarray
    display: str  # large | phone
    time: float

    def __post_init__(self):
        object.__setattr__(self, "position", vec2(self.position))
        if self.kind not in ("touch_down", "touch_up", "sample"):
            raise ExperimentError(f"unknown event kind {self.kind!r}")
        if self.display not in ("large", "phone"):
            raise ExperimentError(f"unknown display {self.display!r}")


RED_TARGET_WIDTH = 0.02


@dataclass(frozen=True)
class TaskState:
    """Acquisition task state: red start target, then the green goal.

    The movement-time clock runs from the red target's touch-up to the
    green target's touch-up. Misses are touch-ups on the active display
    that land outside the green circle; touches on the disabled display
    are ignored by default.
    """

    method: str
    targets: tuple
    cfg: DisplayConfig
    seed: int = 0
    subject: int = 0
    trial_index: int = 0
    phase: str = "red"  # red | green | done
    red_up_time: float | None = None
    misses: int = 0
    last_time: float = -math.inf
    count_inactive_as_miss: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    @property
    def active_display(self) -> str:
        return "large" if self.method == "PT" else "phone"

    @property
    def current_target(self) -> Target | None:
        if self.trial_index < len(self.targets):
            return self.targets[self.trial_index]
        return None


def step_task(state: TaskState, event: TaskEvent) -> tuple[TaskState, TrialRecord | None]:
    """Advance the task by one event; emits a TrialRecord on green acquisition."""
    if event.time < state.last_time:
        raise ExperimentError(
            f"out-of-order event time {event.time} after {state.last_time}"
        )
    state = replace(state, last_time=event.time)
    if state.phase == "done" or event.kind != "touch_up":
        return state, None
    if event.display != state.active_display:
        if not (state.count_inactive_as_miss and state.phase == "green"):
            return state, None
        return replace(state, misses=state.misses + 1), None

    if state.phase == "red":
        start = state.cfg.start_point
        if float(np.linalg.norm(event.position - start)) <= RED_TARGET_WIDTH / 2:
            return replace(state, phase="green", red_up_time=event.time, misses=0), None
        return state, None

    # green phase
    target = state.current_target
    if target is None:
        return replace(state, phase="done"), None
    if target.contains(event.position):
        record = TrialRecord(
            method=state.method,
            block=state.trial_index // BLOCK_SIZE + 1,
            trial=state.trial_index,
            dir=target.direction,
            D_m=target.distance,
            W_m=target.width,
            id=target.id_value,
            id_cat=target.category,
            mt_s=event.time - state.red_up_time,
            misses=state.misses,
            hit=True,
            seed=state.seed,
            subject=state.subject,
        )
        next_index = state.trial_index + 1
        # environment resets to the start location; next trial shows red again
        state = replace(
            state,
            trial_index=next_index,
            phase="red" if next_index < len(state.targets) else "done",
            red_up_time=None,
            misses=0,
        )
        return state, record
    return replace(state, misses=state.misses + 1), None

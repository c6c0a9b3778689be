"""Repeated-measures analysis pipeline.

Per grouping (overall, by block, by ID category) the trial records are
first averaged per user, then gated through a normality test per method:
all methods normal -> one-way repeated-measures ANOVA, otherwise Friedman.
A passing omnibus test unlocks the three pairwise post-hoc tests (paired t
on the parametric branch, Wilcoxon signed-rank otherwise) at the
Bonferroni-corrected alpha.

The normality test is the Shapiro-Wilk W with Royston's approximation
(Applied Statistics algorithm R94), implemented here so that outputs are
reproducible; coefficients are from the published algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import f as f_dist
from scipy.stats import norm, rankdata
from scipy.stats import t as t_dist

from .experiment import METHODS, TrialRecord, accuracy, id_category

DEFAULT_ALPHA = 0.05
WILCOXON_EXACT_MAX_N = 25


class StatsError(ValueError):
    pass


class TestInapplicableError(StatsError):
    """The requested test cannot be computed on this data (e.g. zero variance)."""


@dataclass(frozen=True)
class TestResult:
    test_name: str
    statistic: float
    p_value: float
    alpha_used: float

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise StatsError(f"p-value {self.p_value} outside [0, 1]")

    @property
    def passed(self) -> bool:
        return self.p_value < self.alpha_used


@dataclass(frozen=True)
class SampleGroup:
    """Per-user means for one grouping: matrix of n_users x n_methods."""

    grouping: str
    methods: tuple
    users: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.users), len(self.methods)):
            raise StatsError(
                f"values shape {v.shape} does not match "
                f"{len(self.users)} users x {len(self.methods)} methods"
            )
        if not np.all(np.isfinite(v)):
            raise StatsError("sample group contains non-finite cells")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "users", tuple(self.users))


GROUPINGS = (
    ("overall", None),
    *((f"block {k}", ("block", k)) for k in range(1, 5)),
    *((f"id_cat {k}", ("id_cat", k)) for k in range(2, 6)),
)


def _in_grouping(record: TrialRecord, grouping) -> bool:
    if grouping is None:
        return True
    kind, k = grouping
    if kind == "block":
        return record.block == k
    if kind == "id_cat":
        return record.id_cat == k
    raise StatsError(f"unknown grouping {grouping!r}")


def aggregate_per_user(
    records: list[TrialRecord], grouping=None, metric: str = "mt", label: str | None = None,
    methods=None,
) -> SampleGroup:
    """Average the metric per (user, method) cell for one grouping.

    metric "mt": mean movement time of the cell's trials; metric
    "accuracy": hits / (hits + misses) over the cell. Every cell must be
    populated. By default only the methods present in the records are
    aggregated, so partial logs (e.g. one method) still produce a group.
    """
    if metric not in ("mt", "accuracy"):
        raise StatsError(f"unknown metric {metric!r}")
    users = sorted({r.subject for r in records})
    if methods is None:
        present = {r.method for r in records}
        methods = tuple(m for m in METHODS if m in present)
    if not methods:
        raise StatsError("no records to aggregate")
    cells: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        if _in_grouping(r, grouping):
            cells.setdefault((r.subject, r.method), []).append(r)
    values = np.empty((len(users), len(methods)))
    for i, user in enumerate(users):
        for j, method in enumerate(methods):
            cell = cells.get((user, method))
            if not cell:
                raise StatsError(
                    f"no records for user {user}, method {method} in grouping {grouping}"
                )
            if metric == "mt":
                values[i, j] = float(np.mean([r.mt_s for r in cell]))
            else:
                hits = sum(1 for r in cell if r.hit)
                misses = sum(r.misses for r in cell)
                values[i, j] = accuracy(hits, misses)
    if label is None:
        label = "overall" if grouping is None else f"{grouping[0]} {grouping[1]}"
    return SampleGroup(grouping=label, methods=methods, users=tuple(users), values=values)


# --- Shapiro-Wilk (Royston's approximation) ---------------------------------

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SMALL_G = (-2.273, 0.459)
_SMALL_MU = (0.5440, -0.39978, 0.025054, -0.0006714)
_SMALL_SIG = (1.3822, -0.77857, 0.062767, -0.0020322)
_LARGE_MU = (-1.5861, -0.31082, -0.083751, 0.0038915)
_LARGE_SIG = (-0.4803, -0.082676, 0.0030302)


def _poly(coeffs, x):
    return sum(c * x**i for i, c in enumerate(coeffs))


def shapiro_wilk(x, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Shapiro-Wilk normality test (W statistic, Royston p-value)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    if not 3 <= n <= 5000:
        raise TestInapplicableError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    ss = float(np.sum((x - x.mean()) ** 2))
    if ss <= 0:
        raise TestInapplicableError("Shapiro-Wilk inapplicable to zero-variance data")

    # expected normal order statistics (Blom scores)
    m = norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    mm = float(np.dot(m, m))
    c = m / math.sqrt(mm)
    a = np.empty(n)
    u = 1.0 / math.sqrt(n)
    if n == 3:
        a[:] = [-math.sqrt(0.5), 0.0, math.sqrt(0.5)]
    else:
        a_n = _poly(_C1, u) + c[-1]
        if n <= 5:
            phi = (mm - 2 * m[-1] ** 2) / (1 - 2 * a_n**2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
            a[-1] = a_n
            a[0] = -a_n
        else:
            a_n1 = _poly(_C2, u) + c[-2]
            phi = (mm - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * a_n**2 - 2 * a_n1**2)
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[-1], a[-2] = a_n, a_n1
            a[0], a[1] = -a_n, -a_n1

    w = float(np.dot(a, x) ** 2 / ss)
    w = min(w, 1.0)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
    elif n <= 11:
        g = _poly(_SMALL_G, n)
        mu = _poly(_SMALL_MU, n)
        sigma = math.exp(_poly(_SMALL_SIG, n))
        z = (-math.log(g - math.log1p(-w)) - mu) / sigma
        p = float(norm.sf(z))
    else:
        ln = math.log(n)
        mu = _poly(_LARGE_MU, ln)
        sigma = math.exp(_poly(_LARGE_SIG, ln))
        z = (math.log1p(-w) - mu) / sigma
        p = float(norm.sf(z))
    return TestResult("shapiro_wilk", w, p, alpha)


# --- omnibus tests ----------------------------------------------------------


def anova_rm(group: SampleGroup, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """One-way repeated-measures ANOVA (subjects as blocking factor)."""
    v = group.values
    n, k = v.shape
    if n < 2 or k < 2:
        raise TestInapplicableError("need at least 2 users and 2 methods")
    grand = v.mean()
    ss_subj = k * float(np.sum((v.mean(axis=1) - grand) ** 2))
    ss_treat = n * float(np.sum((v.mean(axis=0) - grand) ** 2))
    ss_total = float(np.sum((v - grand) ** 2))
    ss_err = ss_total - ss_subj - ss_treat
    df_treat = k - 1
    df_err = (n - 1) * (k - 1)
    if ss_err <= 1e-300:
        if ss_treat <= 1e-300:
            return TestResult("anova_rm", 0.0, 1.0, alpha)
        raise TestInapplicableError("zero residual variance")
    f = (ss_treat / df_treat) / (ss_err / df_err)
    p = float(f_dist.sf(f, df_treat, df_err))
    return TestResult("anova_rm", f, p, alpha)


FRIEDMAN_EXACT_MAX_CONFIGS = 50_000


def _friedman_statistic(ranks: np.ndarray) -> float:
    n, k = ranks.shape
    col_sums = ranks.sum(axis=0)
    return 12.0 / (n * k * (k + 1)) * float(np.sum(col_sums**2)) - 3.0 * n * (k + 1)


def friedman(group: SampleGroup, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Friedman rank test with tie correction.

    The p-value comes from the chi-square distribution on k-1 df, except
    for small untied samples, where the full permutation distribution over
    per-user rankings is enumerated and the p is exact.
    """
    v = group.values
    n, k = v.shape
    if n < 2 or k < 2:
        raise TestInapplicableError("need at least 2 users and 2 methods")
    ranks = np.apply_along_axis(rankdata, 1, v)
    stat = _friedman_statistic(ranks)
    tie_term = 0.0
    for row in v:
        _, counts = np.unique(row, return_counts=True)
        tie_term += float(np.sum(counts**3 - counts))
    untied = tie_term == 0.0
    n_configs = math.factorial(k) ** n
    if untied and n_configs <= FRIEDMAN_EXACT_MAX_CONFIGS:
        from itertools import permutations, product

        perms = [np.array(p, dtype=float) for p in permutations(range(1, k + 1))]
        hits = sum(
            1
            for config in product(perms, repeat=n)
            if _friedman_statistic(np.array(config)) >= stat - 1e-12
        )
        return TestResult("friedman", stat, hits / n_configs, alpha)
    correction = 1.0 - tie_term / (n * k * (k**2 - 1))
    if correction <= 0:
        return TestResult("friedman", 0.0, 1.0, alpha)  # all rows fully tied
    stat = max(stat / correction, 0.0)
    p = float(chi2_dist.sf(stat, k - 1))
    return TestResult("friedman", stat, p, alpha)


def bonferroni(alpha: float, m: int) -> float:
    """Bonferroni-corrected per-comparison alpha."""
    if m < 1:
        raise StatsError("need at least one comparison")
    return alpha / m


# --- pairwise post-hoc tests ------------------------------------------------


def paired_t(x, y, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Two-sided paired Student's t-test on the differences."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("paired samples must be 1-d and of equal length")
    n = len(x)
    if n < 2:
        raise TestInapplicableError("need at least 2 pairs")
    d = x - y
    sd = float(np.std(d, ddof=1))
    if sd == 0:
        raise TestInapplicableError("zero variance of the differences")
    t = float(np.mean(d)) / (sd / math.sqrt(n))
    p = 2.0 * float(t_dist.sf(abs(t), n - 1))
    return TestResult("paired_t", t, min(p, 1.0), alpha)


def _exact_signed_rank_p(ranks: np.ndarray, w_plus: float) -> float:
    """Exact two-sided p by enumerating all sign assignments over the ranks.

    Midranks are multiples of 0.5, so doubling gives an integer-weight
    subset-sum distribution computed by dynamic programming.
    """
    doubled = np.rint(ranks * 2).astype(int)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    n_patterns = 2 ** len(doubled)
    w2 = int(round(w_plus * 2))
    p_le = sum(counts[: w2 + 1]) / n_patterns
    p_ge = sum(counts[w2:]) / n_patterns
    return min(1.0, 2.0 * min(p_le, p_ge))


def wilcoxon_signed_rank(
    x, y, alpha: float = DEFAULT_ALPHA, mode: str = "auto"
) -> TestResult:
    """Two-sided Wilcoxon signed-rank test.

    Zero differences are dropped; ties in |d| get midranks. Exact p by sign
    enumeration for n <= 25 (or mode="exact"); otherwise the normal
    approximation with tie-corrected variance and continuity correction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("paired samples must be 1-d and of equal length")
    d = x - y
    d = d[d != 0]
    n = len(d)
    if n < 5:
        raise TestInapplicableError(
            f"need at least 5 nonzero differences, got {n}"
        )
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if mode == "exact" or (mode == "auto" and n <= WILCOXON_EXACT_MAX_N):
        p = _exact_signed_rank_p(ranks, w_plus)
    elif mode in ("auto", "approx"):
        mu = n * (n + 1) / 4.0
        _, counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(counts**3 - counts)) / 48.0
        if var <= 0:
            raise TestInapplicableError("degenerate rank variance")
        diff = w_plus - mu
        cc = min(0.5, abs(diff))  # continuity correction toward the mean
        z = (diff - math.copysign(cc, diff)) / math.sqrt(var)
        p = min(1.0, 2.0 * float(norm.sf(abs(z))))
    else:
        raise StatsError(f"unknown mode {mode!r}")
    return TestResult("wilcoxon_signed_rank", w_plus, p, alpha)


# --- pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    """One grouping's full test chain plus descriptive statistics."""

    grouping: str
    methods: tuple
    means: tuple
    sds: tuple
    normality: dict  # method -> TestResult
    omnibus: TestResult
    parametric: bool
    posthoc: dict | None  # (method_a, method_b) -> TestResult; None unless omnibus passed
    alpha: float
    alpha_posthoc: float


def run_pipeline(group: SampleGroup, alpha: float = DEFAULT_ALPHA) -> AnalysisReport:
    """Normality gate -> omnibus -> Bonferroni-corrected post-hoc chain.

    Groups too small to test (fewer than 2 users or 2 methods) produce a
    descriptive-only report with an inapplicable omnibus result.
    """
    v = group.values
    if v.shape[0] < 2 or v.shape[1] < 2:
        return AnalysisReport(
            grouping=group.grouping,
            methods=group.methods,
            means=tuple(float(m) for m in v.mean(axis=0)),
            sds=tuple(
                float(s) for s in (v.std(axis=0, ddof=1) if v.shape[0] > 1 else np.zeros(v.shape[1]))
            ),
            normality={},
            omnibus=TestResult("inapplicable", 0.0, 1.0, alpha),
            parametric=False,
            posthoc=None,
            alpha=alpha,
            alpha_posthoc=alpha,
        )
    normality = {}
    parametric = True
    for j, method in enumerate(group.methods):
        try:
            res = shapiro_wilk(v[:, j], alpha=alpha)
        except TestInapplicableError:
            # constant column: treat as non-normal rather than fail the grouping
            res = TestResult("shapiro_wilk", 1.0, 0.0, alpha)
        normality[method] = res
        if res.passed:  # p < alpha: normality rejected
            parametric = False
    omnibus = anova_rm(group, alpha) if parametric else friedman(group, alpha)
    posthoc = None
    n_pairs = len(list(combinations(group.methods, 2)))
    alpha_b = bonferroni(alpha, n_pairs)
    if omnibus.passed:
        posthoc = {}
        for a, b in combinations(range(len(group.methods)), 2):
            pair = (group.methods[a], group.methods[b])
            test = paired_t if parametric else wilcoxon_signed_rank
            try:
                posthoc[pair] = test(v[:, a], v[:, b], alpha=alpha_b)
            except TestInapplicableError:
                posthoc[pair] = TestResult("inapplicable", 0.0, 1.0, alpha_b)
    return AnalysisReport(
        grouping=group.grouping,
        methods=group.methods,
        means=tuple(float(m) for m in v.mean(axis=0)),
        sds=tuple(float(s) for s in v.std(axis=0, ddof=1)),
        normality=normality,
        omnibus=omnibus,
        parametric=parametric,
        posthoc=posthoc,
        alpha=alpha,
        alpha_posthoc=alpha_b,
    )


def preference_analysis(
    ranks, methods=METHODS, alpha: float = DEFAULT_ALPHA, allow_ties: bool = False
) -> AnalysisReport:
    """Analyze per-user preference rankings (1 = best .. k = worst).

    Means/SDs per method, Friedman omnibus on the ranks, Wilcoxon post-hoc
    at the Bonferroni-corrected alpha when the omnibus passes.
    """
    ranks = np.asarray(ranks, dtype=float)
    if ranks.ndim != 2 or ranks.shape[1] != len(methods):
        raise StatsError(f"expected an n x {len(methods)} rank matrix")
    k = len(methods)
    valid = set(range(1, k + 1))
    for i, row in enumerate(ranks):
        if not set(row.astype(int)) <= valid or np.any(row != np.rint(row)):
            raise StatsError(f"invalid rank values in row {i}: {row}")
        if not allow_ties and len(set(row)) != k:
            raise StatsError(f"tied ranks in row {i}: {row}")
    group = SampleGroup(
        grouping="preference",
        methods=methods,
        users=tuple(range(len(ranks))),
        values=ranks,
    )
    omnibus = friedman(group, alpha)
    alpha_b = bonferroni(alpha, len(list(combinations(methods, 2))))
    posthoc = None
    if omnibus.passed:
        posthoc = {}
        for a, b in combinations(range(k), 2):
            try:
                posthoc[(methods[a], methods[b])] = wilcoxon_signed_rank(
                    ranks[:, a], ranks[:, b], alpha=alpha_b
                )
            except TestInapplicableError:
                posthoc[(methods[a], methods[b])] = TestResult(
                    "inapplicable", 0.0, 1.0, alpha_b
                )
    return AnalysisReport(
        grouping="preference",
        methods=tuple(methods),
        means=tuple(float(m) for m in ranks.mean(axis=0)),
        sds=tuple(float(s) for s in ranks.std(axis=0, ddof=1)),
        normality={},
        omnibus=omnibus,
        parametric=False,
        posthoc=posthoc,
        alpha=alpha,
        alpha_posthoc=alpha_b,
    )


def analyze_records(records: list[TrialRecord], alpha: float = DEFAULT_ALPHA) -> dict:
    """Run the full pipeline for every grouping and both metrics.

    Groupings without full (user, method) coverage, such as partial logs
    that only span some blocks or categories, are skipped.
    """
    out = {}
    for metric in ("mt", "accuracy"):
        out[metric] = {}
        for label, grouping in GROUPINGS:
            try:
                group = aggregate_per_user(records, grouping, metric=metric, label=label)
            except StatsError:
                continue
            out[metric][label] = run_pipeline(group, alpha)
        if not out[metric]:
            raise StatsError(f"no grouping has full coverage for metric {metric!r}")
    return out

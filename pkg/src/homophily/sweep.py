"""HighCut/LowCut attribute filters and the accuracy-maximising threshold sweep."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .attributes import ATTRIBUTE_LABELS, ATTRIBUTES
from .errors import NotFoundError
from .estimator import EvalResult, predict, target_mask
from .significance import DEFAULT_ALPHA, ProportionSample, compare_accuracy

log = logging.getLogger(__name__)

HIGHCUT = "HighCut"
LOWCUT = "LowCut"
NONE = "none"
DIRECTIONS = (HIGHCUT, LOWCUT, NONE)
GRID_STEPS = 100
DEFAULT_COVERAGE_FLOOR = 0.3

# (attribute, direction) rows of the experiment report, in output order
EXPERIMENT_ROWS = (
    ("friends", HIGHCUT),
    ("followers", HIGHCUT),
    ("ratio", HIGHCUT),
    ("ratio", LOWCUT),
    (None, NONE),
)


def normalize_direction(direction):
    if direction is None:
        return NONE
    d = str(direction).lower()
    for name in DIRECTIONS:
        if d == name.lower():
            return name
    raise ValueError(f"unknown filter direction {direction!r}; expected one of {DIRECTIONS}")


@dataclass(frozen=True)
class FilterSpec:
    attribute: Optional[str]
    direction: str = NONE
    threshold: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "direction", normalize_direction(self.direction))
        if self.direction == NONE:
            if self.threshold is not None:
                raise ValueError("an unfiltered spec carries no threshold")
            return
        if self.attribute not in ATTRIBUTES:
            raise ValueError(f"unknown attribute {self.attribute!r}")
        if self.threshold is None or not math.isfinite(self.threshold):
            raise ValueError(f"threshold must be finite, got {self.threshold!r}")

    def keep(self, values):
        """Boolean mask of values passing the filter (strict inequalities)."""
        values = np.asarray(values)
        if self.direction == HIGHCUT:
            return values < self.threshold
        if self.direction == LOWCUT:
            return values > self.threshold
        return np.ones(values.shape, dtype=bool)


def apply_filter(universe, t, f):
    """Subset of ``universe`` kept by filter ``f``."""
    ids = np.unique(np.fromiter(universe, dtype=np.int64))
    if f.direction == NONE:
        return set(ids.tolist())
    values = t.lookup(f.attribute, ids)
    return set(ids[f.keep(values)].tolist())


def threshold_grid(values, steps=GRID_STEPS):
    """``steps + 1`` log-spaced thresholds from the smallest positive value to the max.

    Zeros are ignored when choosing the lower end because the log scale is
    undefined there.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("threshold_grid needs at least one value")
    pos = v[v > 0]
    if pos.size == 0:
        raise ValueError("threshold_grid needs at least one positive value")
    lo, hi = float(pos.min()), float(pos.max())
    if lo == hi:
        return np.full(steps + 1, lo)
    k = np.arange(steps + 1) / steps
    grid = lo * (hi / lo) ** k
    grid[0], grid[-1] = lo, hi
    return np.maximum.accumulate(grid)


@dataclass(frozen=True)
class SweepPoint:
    threshold: Optional[float]
    result: EvalResult


@dataclass
class SweepResult:
    attribute: Optional[str]
    direction: str
    baseline: EvalResult
    curve: List[SweepPoint] = field(default_factory=list)
    best: Optional[SweepPoint] = None
    coverage_floor: float = DEFAULT_COVERAGE_FLOOR

    @property
    def selected(self):
        """The best point, or the unfiltered baseline when no threshold qualifies."""
        return self.best.result if self.best is not None else self.baseline

    def to_dict(self):
        best = None
        if self.best is not None:
            best = {"threshold": self.best.threshold, **self.best.result.to_dict()}
        return {
            "attribute": self.attribute,
            "direction": self.direction,
            "coverage_floor": self.coverage_floor,
            "baseline": self.baseline.to_dict(),
            "best": best,
            "selected_accuracy": self.selected.accuracy,
            "curve": [{"threshold": p.threshold, **p.result.to_dict()} for p in self.curve],
        }


def _exact(x):
    # decimal reading of the float, so a floor of 0.3 means exactly 3/10
    return Fraction(repr(float(x)))


def select_best(curve, coverage_floor=DEFAULT_COVERAGE_FLOOR):
    """Highest-accuracy point with coverage strictly above the floor.

    Ties go to the larger coverage, then to the smaller threshold.  All
    comparisons are exact rational comparisons of the underlying counts.
    """
    floor = _exact(coverage_floor)
    best, best_key = None, None
    for p in curve:
        acc = p.result.exact_accuracy()
        cov = p.result.exact_coverage()
        if acc is None or not cov > floor:
            continue
        key = (acc, cov, 0 if p.threshold is None else -_exact(p.threshold))
        if best_key is None or key > best_key:
            best, best_key = p, key
    return best


def _aligned_values(g, t, attribute):
    try:
        return t.lookup(attribute, g.ids)
    except NotFoundError as exc:
        raise NotFoundError(f"attribute table does not cover the graph: {exc}", exc.missing) from None


def sweep(g, labels, t, attribute, direction, coverage_floor=DEFAULT_COVERAGE_FLOOR,
          workers=1, predictions=None, grid=None):
    """Evaluate the filter at every grid threshold and pick the best point.

    Filtering only selects which users are scored; every user keeps voting
    for its neighbours, so one set of leave-one-out predictions serves all
    thresholds.
    """
    direction = normalize_direction(direction)
    mask_all = target_mask(g, labels, None)
    if predictions is None:
        predictions = predict(g, labels, workers=workers)
    n_correct, n_estimable = predictions.counts(mask_all)
    baseline = EvalResult(n_correct, n_estimable, g.n_users)
    if direction == NONE:
        point = SweepPoint(None, baseline)
        return SweepResult(attribute, direction, baseline, [point],
                           select_best([point], coverage_floor), coverage_floor)
    values = _aligned_values(g, t, attribute).astype(np.float64)
    if grid is None:
        grid = threshold_grid(values)
    curve = []
    grid = np.asarray(grid, dtype=np.float64).tolist()
    for k, theta in enumerate(grid, start=1):
        spec = FilterSpec(attribute, direction, theta)
        c, e = predictions.counts(spec.keep(values))
        curve.append(SweepPoint(theta, EvalResult(c, e, g.n_users)))
        if k == len(grid) // 2 or k == len(grid):
            log.info("sweep %s/%s: %d/%d thresholds", attribute, direction, k, len(grid))
    return SweepResult(attribute, direction, baseline, curve,
                       select_best(curve, coverage_floor), coverage_floor)


@dataclass
class ExperimentRow:
    attribute: Optional[str]
    direction: str
    threshold: Optional[float]
    result: Optional[EvalResult]
    significance: Optional[object] = None

    @property
    def significant(self):
        return bool(self.significance is not None and self.significance.significant)

    def to_dict(self):
        return {
            "attribute": self.attribute,
            "direction": self.direction,
            "threshold": self.threshold,
            "n_correct": None if self.result is None else self.result.n_correct,
            "n_estimable": None if self.result is None else self.result.n_estimable,
            "accuracy": None if self.result is None else self.result.accuracy,
            "coverage": None if self.result is None else self.result.coverage,
            "significant": self.significant,
            "test": None if self.significance is None else self.significance.to_dict(),
        }


@dataclass
class ExperimentReport:
    dataset: str
    rows: List[ExperimentRow]
    baseline: EvalResult
    coverage_floor: float
    alpha: float
    sweeps: List[SweepResult] = field(default_factory=list)

    def row(self, attribute, direction):
        for r in self.rows:
            if r.attribute == attribute and r.direction == direction:
                return r
        raise KeyError((attribute, direction))

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "coverage_floor": self.coverage_floor,
            "alpha": self.alpha,
            "baseline": self.baseline.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
        }


def run_experiment(g, labels, t, dataset="dataset", coverage_floor=DEFAULT_COVERAGE_FLOOR,
                   alpha=DEFAULT_ALPHA, workers=1, predictions=None):
    """The five filter rows of one dataset, each tested against the unfiltered baseline."""
    if predictions is None:
        predictions = predict(g, labels, workers=workers)
    rows, sweeps = [], []
    baseline = None
    for attribute, direction in EXPERIMENT_ROWS:
        res = sweep(g, labels, t, attribute, direction, coverage_floor=coverage_floor,
                    predictions=predictions)
        baseline = res.baseline
        sweeps.append(res)
        if direction == NONE:
            rows.append(ExperimentRow(None, NONE, None, res.baseline))
            continue
        if res.best is None:
            # no threshold keeps enough users: the filter is inert
            rows.append(ExperimentRow(attribute, direction, None, res.baseline))
            continue
        sig = None
        if baseline.n_estimable > 0:
            sig = compare_accuracy(ProportionSample(baseline.n_correct, baseline.n_estimable),
                                   ProportionSample(res.best.result.n_correct, res.best.result.n_estimable),
                                   alpha)
        rows.append(ExperimentRow(attribute, direction, res.best.threshold, res.best.result, sig))
    return ExperimentReport(dataset, rows, baseline, coverage_floor, alpha, sweeps)


def format_threshold(attribute, theta):
    if theta is None:
        return "-"
    if attribute in ("friends", "followers"):
        return f"{theta:.0f}"
    return f"{theta:.3f}"


def table_cells(report):
    """Rows of display cells: dataset, attribute, filter, threshold, accuracy, coverage."""
    out = []
    for k, r in enumerate(report.rows):
        name = report.dataset if k == 0 else ""
        attr = ATTRIBUTE_LABELS.get(r.attribute, "") if r.attribute else ""
        if r.result is None or r.result.accuracy is None:
            acc = "-"
        else:
            acc = f"{r.result.accuracy:.3f}" + ("*" if r.significant else "")
        cov = "-" if r.result is None else f"{r.result.coverage:.3f}"
        thr = "" if r.direction == NONE else format_threshold(r.attribute, r.threshold)
        out.append([name, attr, r.direction, thr, acc, cov])
    return out


TABLE_HEADER = ["Dataset", "Attribute", "Filter", "Threshold", "Accuracy", "Coverage"]


def format_table(reports):
    """Aligned plain-text table; ``*`` marks a significant improvement."""
    body = []
    for rep in reports:
        body.extend(table_cells(rep))
    widths = [max(len(TABLE_HEADER[i]), *(len(row[i]) for row in body)) for i in range(len(TABLE_HEADER))]
    right = {3, 4, 5}

    def fmt(row):
        cells = [c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))]
        return "  ".join(cells).rstrip()

    rule = "-" * len(fmt(TABLE_HEADER))
    lines = [fmt(TABLE_HEADER), rule]
    for rep_i, rep in enumerate(reports):
        if rep_i:
            lines.append(rule)
        for row in table_cells(rep):
            lines.append(fmt(row))
    lines.append(rule)
    return "\n".join(lines) + "\n"


CURVE_COLUMNS = ("threshold", "accuracy", "coverage", "n_correct", "n_estimable")


def curve_rows(res: SweepResult) -> List[Tuple]:
    """Baseline row (empty threshold) followed by one row per grid threshold."""
    def cells(theta, r):
        acc = "" if r.accuracy is None else repr(r.accuracy)
        return (theta, acc, repr(r.coverage), r.n_correct, r.n_estimable)

    rows = [cells("baseline", res.baseline)]
    if res.direction != NONE:
        rows.extend(cells(repr(p.threshold), p.result) for p in res.curve)
    return rows

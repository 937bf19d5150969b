"""One-sided two-proportion test: does filtering raise accuracy?

The difference of two sample proportions is approximated as normal with
variance ``p1(1-p1)/n1 + p2(1-p2)/n2`` (samples treated as independent).
The improvement is significant when the lower end of ``diff ± z·se`` lies
strictly above zero, with ``z`` the upper-``alpha`` standard normal quantile.
"""

import math
from dataclasses import dataclass
from statistics import NormalDist

DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class ProportionSample:
    successes: int
    trials: int

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes {self.successes} outside [0, {self.trials}]")

    @property
    def proportion(self):
        return self.successes / self.trials


@dataclass(frozen=True)
class SignificanceResult:
    diff: float
    ci_low: float
    ci_high: float
    z_alpha: float
    alpha: float
    significant: bool

    def to_dict(self):
        return {"diff": self.diff, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "z_alpha": self.z_alpha, "alpha": self.alpha, "significant": self.significant}


def upper_quantile(alpha):
    """z such that P(Z > z) = alpha for a standard normal Z."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return NormalDist().inv_cdf(1.0 - alpha)


def compare_accuracy(baseline, filtered, alpha=DEFAULT_ALPHA):
    """Test H1: filtered accuracy > baseline accuracy at level ``alpha``."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must be in (0, 0.5], got {alpha}")
    p1 = baseline.proportion
    p2 = filtered.proportion
    se = math.sqrt(p1 * (1.0 - p1) / baseline.trials + p2 * (1.0 - p2) / filtered.trials)
    z = upper_quantile(alpha)
    diff = p2 - p1
    half = z * se
    lo, hi = diff - half, diff + half
    return SignificanceResult(diff=diff, ci_low=lo, ci_high=hi, z_alpha=z,
                              alpha=alpha, significant=lo > 0.0)

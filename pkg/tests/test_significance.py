import math

import mpmath
import pytest

from homophily.significance import ProportionSample, compare_accuracy, upper_quantile


def mp_upper_quantile(alpha):
    """High-precision Phi^-1(1 - alpha) via the inverse error function."""
    with mpmath.workdps(40):
        return float(mpmath.sqrt(2) * mpmath.erfinv(1 - 2 * mpmath.mpf(alpha)))


def test_z_alpha():
    assert abs(upper_quantile(0.05) - 1.644854) <= 1e-6
    for a in (0.5, 0.25, 0.1, 0.05, 0.025, 0.01, 1e-4):
        assert abs(upper_quantile(a) - mp_upper_quantile(a)) <= 1e-12


def test_not_significant_small_sample():
    r = compare_accuracy(ProportionSample(50, 100), ProportionSample(60, 100))
    # se = sqrt(0.25/100 + 0.24/100) = 0.07
    assert r.diff == pytest.approx(0.1, abs=1e-15)
    assert r.ci_low == pytest.approx(0.1 - 1.6448536269514722 * 0.07, abs=1e-12)
    assert r.ci_low == pytest.approx(-0.0151398, abs=1e-7)
    assert not r.significant


def test_significant_large_sample():
    r = compare_accuracy(ProportionSample(5000, 10000), ProportionSample(5500, 10000))
    se = math.sqrt(0.25 / 1e4 + 0.2475 / 1e4)
    assert se == pytest.approx(0.0070534, abs=1e-7)
    assert r.ci_low == pytest.approx(0.0384, abs=1e-4)
    assert r.significant


def test_equal_and_degenerate():
    r = compare_accuracy(ProportionSample(30, 60), ProportionSample(30, 60))
    assert r.diff == 0 and not r.significant
    r = compare_accuracy(ProportionSample(10, 10), ProportionSample(10, 10))
    assert r.ci_low == r.ci_high == 0 and not r.significant
    r = compare_accuracy(ProportionSample(0, 10), ProportionSample(10, 10))
    assert r.significant


@pytest.mark.parametrize("bad", [(0, 0), (5, 4), (-1, 3)])
def test_invalid_samples(bad):
    with pytest.raises(ValueError):
        ProportionSample(*bad)


@pytest.mark.parametrize("alpha", [0.0, 0.6, -0.1])
def test_invalid_alpha(alpha):
    with pytest.raises(ValueError):
        compare_accuracy(ProportionSample(1, 2), ProportionSample(1, 2), alpha)


def test_interval_symmetry_and_direction():
    for x1, n1, x2, n2 in [(1, 7, 5, 9), (300, 1000, 290, 800), (7, 13, 1, 2), (99, 100, 1, 100)]:
        r = compare_accuracy(ProportionSample(x1, n1), ProportionSample(x2, n2))
        assert r.ci_low <= r.diff <= r.ci_high
        assert math.isclose(r.ci_high - r.diff, r.diff - r.ci_low, rel_tol=0, abs_tol=4e-16)
        assert r.significant == (r.ci_low > 0)
        if r.significant:
            assert r.diff > 0


def test_significance_monotone_in_sample_size():
    for i in range(1, 10):
        for j in range(1, 10):
            p1, p2 = i / 10, j / 10
            if p2 - p1 < 0.01:
                continue
            seen = False
            for n in (10, 20, 50, 100, 200, 500, 1000, 5000):
                sig = compare_accuracy(ProportionSample(round(p1 * n), n), ProportionSample(round(p2 * n), n)).significant
                assert not (seen and not sig)
                seen = seen or sig

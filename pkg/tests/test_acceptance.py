"""Acceptance suite: one test per criterion at its stated tolerance.

Each test records a one-line verdict in ``RESULTS``; ``conftest.py`` prints
them after the run.  Run with ``pytest tests/test_acceptance.py`` or
``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from tiltgibbs import (build_chain, conditional_density_mc, doubling_discrepancy,
                       growth_condition, log_mgf_laplace, log_mgf_quadrature, make_builtin,
                       moments_asymptotic, moments_exact, parseval_sides, sample_tilted,
                       sup_error_scan, tilt_solve, z_smallness_check)
from tiltgibbs.model import growth_schedule
from tiltgibbs.tilt import skewness

import oracles

RESULTS = {}
T_GRID = (10.0, 30.0, 100.0, 300.0)
ZERO_SKEW = 1e-8  # |mu3| / s**3 below this is quadrature roundoff


def record(criterion, checks):
    """Store ``checks`` (name -> (passed, value)) and assert they all passed."""
    failed = [f"{name}={value:.4g}" for name, (ok, value) in checks.items() if not ok]
    line = "PASS" if not failed else "FAIL (" + ", ".join(failed) + ")"
    RESULTS[criterion] = line
    assert not failed, f"criterion {criterion}: {line}"


def strictly_decreasing(v):
    return all(b < a for a, b in zip(v, v[1:]))


def non_increasing(v):
    return all(b <= a for a, b in zip(v, v[1:]))


@pytest.fixture(scope="module")
def families():
    return {"weibull(2)": make_builtin("weibull", k=2), "exp_exp": make_builtin("exp_exp"),
            "power(1)": make_builtin("power", beta=1)}


def test_criterion_1_abelian_moments(families):
    start = time.perf_counter()
    checks = {}
    for name in ("weibull(2)", "exp_exp"):
        model = families[name]
        em, es, e3 = [], [], []
        for t in T_GRID:
            exact = moments_exact(model, t)
            psi, dpsi, mu3_asym = moments_asymptotic(model, t)
            d2psi = mu3_asym / ((15.0 - 9.0) / 6.0)
            em.append(abs(exact.m - psi) / psi)
            es.append(abs(exact.s2 - dpsi) / dpsi)
            e3.append(abs(exact.mu3 - mu3_asym) / abs(d2psi))
        checks[f"{name} mean decreasing"] = (strictly_decreasing(em), em[-1])
        checks[f"{name} mean <2%"] = (em[-1] < 0.02, em[-1])
        checks[f"{name} var decreasing"] = (strictly_decreasing(es), es[-1])
        checks[f"{name} var <2%"] = (es[-1] < 0.02, es[-1])
        checks[f"{name} mu3 decreasing"] = (strictly_decreasing(e3), e3[-1])
        checks[f"{name} mu3 <10%"] = (e3[-1] < 0.10, e3[-1])
    elapsed = time.perf_counter() - start
    checks["runtime <30s"] = (elapsed < 30.0, elapsed)
    record(1, checks)


def test_criterion_2_laplace_mgf(families):
    checks = {}
    for name in ("weibull(2)", "exp_exp"):
        model = families[name]
        gap = [abs(log_mgf_laplace(model, t) - log_mgf_quadrature(model, t)) for t in T_GRID]
        checks[f"{name} gap decreasing"] = (strictly_decreasing(gap), gap[-1])
        checks[f"{name} gap <0.05"] = (gap[-1] < 0.05, gap[-1])
    record(2, checks)


def test_criterion_3_skewness(families):
    checks = {}
    for name in ("weibull(2)", "exp_exp"):
        skew = [abs(skewness(families[name], t)) for t in T_GRID]
        checks[f"{name} |skew| decreasing"] = (strictly_decreasing(skew), skew[-1])
        checks[f"{name} |skew| <0.05"] = (skew[-1] < 0.05, skew[-1])
    flat = max(abs(skewness(families["power(1)"], t)) for t in T_GRID)
    checks["power(1) |skew| <1e-3"] = (flat < 1e-3, flat)
    record(3, checks)


def test_criterion_4_edgeworth(families):
    start = time.perf_counter()
    model = families["weibull(2)"]
    n_grid = (8, 16, 32, 64)
    a_grid = growth_schedule(model, n_grid, 2.0, 0.05)
    scaled = [sup_error_scan(model, a, n).scaled_err for a, n in zip(a_grid, n_grid)]
    doubling = max(doubling_discrepancy(model, a, n) for a, n in zip(a_grid, n_grid))
    elapsed = time.perf_counter() - start
    ratio = scaled[-1] / scaled[0]
    record(4, {"scaled error non-increasing": (non_increasing(scaled), scaled[-1]),
               "n=64 / n=8 <0.6": (ratio < 0.6, ratio),
               "doubling identity <1e-6": (doubling < 1e-6, doubling),
               "runtime <300s": (elapsed < 300.0, elapsed)})


def test_criterion_5_parseval(families):
    checks = {}
    for a in (3.0, 5.0, 10.0):
        lhs, rhs = parseval_sides(families["weibull(2)"], a)
        rel = abs(lhs - rhs) / rhs
        checks[f"a_n={a:g} within 0.1%"] = (rel < 1e-3, rel)
    record(5, checks)


@pytest.mark.slow
def test_criterion_6_gibbs_principle(families):
    start = time.perf_counter()
    a, offsets, checks = 3.0, np.array([0.25, -0.25]), {}
    for name in ("weibull(2)", "power(1)"):
        model = families[name]
        s = math.sqrt(moments_exact(model, tilt_solve(model, a)).s2)
        for k in (1, 2):
            y = a + s * offsets[:k]
            gaps = []
            for n in (100, 400):
                chain = build_chain(model, a, n, y)
                gaps.append(abs(chain.log_g_m - chain.log_g_an))
                est = conditional_density_mc(model, a, n, y, n_samples=200_000, seed=0)
                theory = math.exp(chain.log_g_m)
                z = (est.value / theory - 1.0) / (est.stderr / theory)
                checks[f"{name} k={k} n={n} |z|<=3"] = (abs(z) <= 3.0, z)
            # k = 1: the chain is the single tilt, so the gap is identically zero
            shrinks = gaps[1] < gaps[0] if k > 1 else gaps[1] <= gaps[0]
            checks[f"{name} k={k} product gap decreasing"] = (shrinks, gaps[1])
    elapsed = time.perf_counter() - start
    checks["runtime <600s"] = (elapsed < 600.0, elapsed)
    record(6, checks)


def test_criterion_7_z_shrinks(families):
    model = families["weibull(2)"]
    n_grid = (10**4, 10**5, 10**6, 10**7)
    checks, max_z, sq = {}, [], []
    for n in n_grid:
        a = 0.5 * n**0.15
        growth = growth_condition(model, a, n)
        checks[f"growth n={n:.0e}"] = (growth.passed, growth.value)
        rep = z_smallness_check(build_chain(model, a, n, [1.0, 1.5]))
        max_z.append(rep.max_abs_z)
        sq.append(rep.sqrt_n_max_z2)
    checks["max|z| decreasing"] = (strictly_decreasing(max_z[-3:]), max_z[-1])
    checks["sqrt(n) max z^2 decreasing"] = (strictly_decreasing(sq[-3:]), sq[-1])
    record(7, checks)


def test_criterion_8_oracle_cross_checks(families):
    checks = {}
    for name, model in families.items():
        for t in (1.0, 5.0, 10.0):
            exact = moments_exact(model, t)
            s3 = exact.s2**1.5
            h = 0.02 / math.sqrt(exact.s2)
            d1, d2, d3 = oracles.fd_derivatives(lambda u: log_mgf_quadrature(model, u), t, h)
            checks[f"{name} t={t:g} fd mean"] = (abs(d1 - exact.m) <= 1e-4 * exact.m,
                                                 d1 / exact.m - 1)
            checks[f"{name} t={t:g} fd var"] = (abs(d2 - exact.s2) <= 1e-4 * exact.s2,
                                                d2 / exact.s2 - 1)
            # a numerically symmetric law has no relative scale; measure on s**3
            scale = abs(exact.mu3) if abs(exact.mu3) > ZERO_SKEW * s3 else s3
            rel3 = abs(d3 - exact.mu3) / scale
            checks[f"{name} t={t:g} fd mu3"] = (rel3 <= 1e-4, rel3)

            x = sample_tilted(model, t, 100_000, seed=17)
            d = x - exact.m
            for j, target in ((1, 0.0), (2, exact.s2), (3, exact.mu3)):
                stat = d**j
                z = (stat.mean() - target) / (stat.std(ddof=1) / math.sqrt(x.size))
                checks[f"{name} t={t:g} sample moment {j}"] = (abs(z) <= 4.0, z)
    record(8, checks)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))

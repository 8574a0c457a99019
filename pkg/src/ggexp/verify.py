"""Verification checks behind ``ggexp verify``.

Every check returns a :class:`VerificationReport` whose ``result`` holds the
measured quantities and whose ``series`` is a list of ``(x, ratio)`` pairs
for plotting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .expansion import (
    TestFunction,
    forward_transform,
    lp_norm,
    partial_sum_eval,
    sup_abs,
    sup_norm_estimate,
)
from .inequalities import (
    PARSEVAL_TOL,
    Theorem,
    conjugate_exponent,
    connection_check,
    converse_reconstruction,
    forward_inequality_scans,
    hl_functional,
    hy_functional,
    trial_seeds,
    unified_functional,
)
from .quadrature import gen_rule_for_exactness
from .special_poly import BasisParams, gen_gegenbauer_eval, orthonormal_gg_table

ORTHONORMALITY_TOL = 1e-10
PARSEVAL_GAP_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10
SPREAD_LIMIT = 10.0
SLOPE_LIMIT = 0.1
STABILITY_LIMIT = 2.0
CONVERSE_TOL = 1e-10
CONNECTION_TOL = 1e-9
CONNECTION_N1_TOL = 1e-11
COLLAPSE_TOL = 1e-12


@dataclass
class VerificationReport:
    check: str
    params: BasisParams
    result: dict
    passed: bool
    series: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": {"lambda": self.params.lam, "mu": self.params.mu},
            "result": self.result,
            "pass": self.passed,
        }


def random_chebyshev_polynomial(rng: np.random.Generator, degree: int) -> TestFunction:
    """A random Chebyshev series of exact ``degree``, independent of the C~ basis."""
    c = rng.standard_normal(degree + 1)
    return TestFunction.from_callable(lambda t: cheb.chebval(t, c), degree=degree, label="chebyshev")


def gram_deviation(bp: BasisParams, nmax: int) -> float:
    """Max entrywise ``|G - I|`` for the Gram matrix of ``C~_0..C~_nmax``."""
    rule = gen_rule_for_exactness(bp, 2 * nmax)
    table = orthonormal_gg_table(bp, nmax, rule.nodes)
    gram = (table * rule.weights) @ table.T
    return float(np.max(np.abs(gram - np.eye(nmax + 1))))


def check_orthonormality(bp: BasisParams, nmax: int) -> VerificationReport:
    rule = gen_rule_for_exactness(bp, 2 * nmax)
    table = orthonormal_gg_table(bp, nmax, rule.nodes)
    dev = np.abs((table * rule.weights) @ table.T - np.eye(nmax + 1))
    worst = float(dev.max())
    series = [(n, float(dev[n].max())) for n in range(nmax + 1)]
    return VerificationReport(
        "orthonormality", bp, {"nmax": nmax, "max_deviation": worst, "tolerance": ORTHONORMALITY_TOL},
        worst < ORTHONORMALITY_TOL, series,
    )


def supnorm_ratios(bp: BasisParams, nmin: int, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    ns = np.arange(nmin, nmax + 1)
    r = np.array([sup_norm_estimate(bp, int(n)) / n**bp.sigma for n in ns])
    return ns, r


def check_supnorm(bp: BasisParams, nmax: int, nmin: int = 16) -> VerificationReport:
    ns, r = supnorm_ratios(bp, nmin, nmax)
    spread = float(r.max() / r.min())
    slope = float(np.polyfit(np.log(ns), np.log(r), 1)[0])
    asserted = bp.mu > 0
    ok = (spread < SPREAD_LIMIT and abs(slope) < SLOPE_LIMIT) if asserted else True
    return VerificationReport(
        "supnorm", bp,
        {
            "nmin": nmin, "nmax": nmax, "sigma": bp.sigma, "spread": spread, "slope": slope,
            "spread_limit": SPREAD_LIMIT, "slope_limit": SLOPE_LIMIT, "asserted": asserted,
        },
        ok, [(int(n), float(v)) for n, v in zip(ns, r)],
    )


def check_parseval(bp: BasisParams, nmax: int, trials: int, seed: int) -> VerificationReport:
    series, worst = [], 0.0
    for i, sub in enumerate(trial_seeds(seed, trials)):
        rng = np.random.default_rng(sub)
        f = random_chebyshev_polynomial(rng, int(rng.integers(0, nmax + 1)))
        lhs = lp_norm(bp, f, 2.0)
        rhs = float(np.linalg.norm(forward_transform(bp, f, nmax).coeffs))
        gap = abs(lhs - rhs) / rhs
        worst = max(worst, gap)
        series.append((i, lhs / rhs))
    return VerificationReport(
        "parseval", bp, {"nmax": nmax, "trials": trials, "seed": seed, "max_relative_gap": worst,
                         "tolerance": PARSEVAL_GAP_TOL},
        worst < PARSEVAL_GAP_TOL, series,
    )


def roundtrip_error(bp: BasisParams, f: TestFunction, degree: int, grid: np.ndarray) -> tuple[float, float]:
    """``(max |p - partial_sum(transform(p))|, max |p|)`` on ``grid``."""
    cv = forward_transform(bp, f, degree)
    exact = f(grid)
    return float(np.max(np.abs(partial_sum_eval(cv, grid) - exact))), float(np.max(np.abs(exact)))


def check_roundtrip(bp: BasisParams, nmax: int, trials: int, seed: int, grid_points: int = 512) -> VerificationReport:
    grid = np.linspace(-1.0, 1.0, grid_points)
    series, worst = [], 0.0
    for i, sub in enumerate(trial_seeds(seed, trials)):
        rng = np.random.default_rng(sub)
        f = random_chebyshev_polynomial(rng, int(rng.integers(0, nmax + 1)))
        err, size = roundtrip_error(bp, f, nmax, grid)
        scaled = err / (1.0 + size)
        worst = max(worst, scaled)
        series.append((i, scaled))
    return VerificationReport(
        "roundtrip", bp, {"nmax": nmax, "trials": trials, "seed": seed, "grid_points": grid_points,
                          "max_scaled_error": worst, "tolerance": ROUNDTRIP_TOL},
        worst < ROUNDTRIP_TOL, series,
    )


def check_endpoint_collapse(bp: BasisParams, p: float, nmax: int, trials: int, seed: int) -> VerificationReport:
    """unified at s = p and s = p' against the HL and HY functionals on random vectors."""
    pc = conjugate_exponent(p)
    series, worst = [], 0.0
    for i, sub in enumerate(trial_seeds(seed, trials)):
        c = np.random.default_rng(sub).standard_normal(nmax + 1)
        gaps = []
        for s, ref in ((p, hl_functional(bp, p, c)), (pc, hy_functional(bp, p, c))):
            gaps.append(abs(unified_functional(bp, p, s, c) - ref) / ref)
        worst = max(worst, *gaps)
        series.append((i, max(gaps)))
    return VerificationReport(
        "endpoint-collapse", bp, {"p": p, "nmax": nmax, "trials": trials, "seed": seed,
                                  "max_relative_gap": worst, "tolerance": COLLAPSE_TOL},
        worst < COLLAPSE_TOL, series,
    )


def check_forward(
    theorem: Theorem, bp: BasisParams, p: float, s: float | None, nmax: int, trials: int, seed: int,
    family: str = "mixed",
) -> VerificationReport:
    """Forward scan at ``nmax`` and ``nmax // 2``; passes when both pass and the constant is stable."""
    theorem = Theorem(theorem)
    half = max(nmax // 2, 1)
    small = forward_inequality_scans(bp, p, [(theorem, s)], family, trials, seed, half)[0]
    big = forward_inequality_scans(bp, p, [(theorem, s)], family, trials, seed, nmax)[0]
    growth = big.empirical_constant / small.empirical_constant
    ok = small.passed and big.passed and growth < STABILITY_LIMIT
    return VerificationReport(
        {Theorem.HL: "hardy-littlewood", Theorem.HY: "hausdorff-young", Theorem.UNIFIED: "unified"}[theorem],
        bp,
        {
            "report": big.to_dict(),
            "half_degree_report": small.to_dict(),
            "degree": nmax, "half_degree": half,
            "constant_growth": growth, "growth_limit": STABILITY_LIMIT,
        },
        ok, [(i, t.ratio) for i, t in enumerate(big.trials)],
    )


def check_converse(
    theorem: Theorem, bp: BasisParams, q: float, r: float | None, length: int, trials: int, seed: int
) -> VerificationReport:
    theorem = Theorem(theorem)
    checkpoints = [length // 2, length, length + 8, length + 16]
    rows, series = [], []
    ok = True
    for i, sub in enumerate(trial_seeds(seed, trials)):
        phi = np.random.default_rng(sub).standard_normal(length)
        res = converse_reconstruction(theorem, bp, q, phi, checkpoints, r=r)
        good = (
            res.limit_check < CONVERSE_TOL
            and res.coeff_recovery_error < CONVERSE_TOL
            and math.isfinite(res.norm_bound_ratio)
        )
        if q == 2:
            good = good and abs(res.norm_bound_ratio - 1.0) < PARSEVAL_TOL
        ok = ok and good
        rows.append({"seed": sub, **res.to_dict()})
        series.append((i, res.norm_bound_ratio))
    return VerificationReport(
        "converse", bp,
        {"theorem_id": theorem.value, "q": q, "r": r, "length": length, "checkpoints": checkpoints,
         "trials": rows, "tolerance": CONVERSE_TOL},
        ok, series,
    )


def check_connection(bp: BasisParams, nmax: int, grid_points: int = 64) -> VerificationReport:
    bp.require_positive_mu("the connection check")
    grid = np.linspace(-1.0, 1.0, grid_points)
    errors = [connection_check(bp, n, grid) for n in range(nmax + 1)]
    # degree 1 against the closed form (lam + mu)/(mu + 1/2) t
    n1 = float(np.max(np.abs(gen_gegenbauer_eval(bp, 1, grid) - (bp.lam + bp.mu) / (bp.mu + 0.5) * grid)))
    worst = max(errors)
    return VerificationReport(
        "connection", bp,
        {"nmax": nmax, "grid_points": grid_points, "max_error": worst, "degree_one_error": n1,
         "tolerance": CONNECTION_TOL, "degree_one_tolerance": CONNECTION_N1_TOL},
        worst < CONNECTION_TOL and n1 < CONNECTION_N1_TOL,
        [(n, e) for n, e in enumerate(errors)],
    )


def midpoint_s(p: float) -> float:
    return 0.5 * (p + conjugate_exponent(p))


def sup_of(f: TestFunction, grid_size: int = 4096) -> float:
    return sup_abs(f, -1.0, 1.0, grid_size)

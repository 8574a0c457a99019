"""Weighted coefficient functionals and the checks built on them.

Three power-weighted sequence norms of the coefficients ``f^_n`` are bounded
by ``||f||_{L_p(v)}`` for ``1 < p <= 2`` (``sigma = max(lam, mu)``):

* Hardy-Littlewood type: weight ``(n+1)^((1/p' - 1/p)(sigma+1))``, l_p norm;
* Hausdorff-Young type: weight ``(n+1)^((1/p' - 1/p) sigma)``, l_p' norm;
* the family joining them for ``p <= s <= p'``, l_s norm.

The bounding constants are not known, so the scans here report the largest
observed ratio and never compare against a theoretical value.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConvergenceError, DomainError, QuadratureEvaluationError
from .expansion import (
    CoefficientVector,
    TestFunction,
    forward_transform,
    lp_norm,
    partial_sum_eval,
)
from .quadrature import gauss_jacobi_rule
from .special_poly import BasisParams, JacobiParams, gegenbauer_eval, gen_gegenbauer_eval

__all__ = [
    "Theorem",
    "Direction",
    "SeqNormSpec",
    "TrialRecord",
    "InequalityReport",
    "ConverseResult",
    "conjugate_exponent",
    "seq_functional",
    "hl_functional",
    "hy_functional",
    "unified_functional",
    "hl_spec",
    "hy_spec",
    "unified_spec",
    "converse_spec",
    "FAMILIES",
    "draw_coefficients",
    "forward_inequality_scan",
    "forward_inequality_scans",
    "converse_reconstruction",
    "connection_check",
    "PARSEVAL_TOL",
]

PARSEVAL_TOL = 1e-8


class Theorem(str, enum.Enum):
    HL = "HL"
    HY = "HY"
    UNIFIED = "UNIFIED"


class Direction(str, enum.Enum):
    FORWARD = "forward"
    CONVERSE = "converse"


def conjugate_exponent(p: float) -> float:
    """``p'`` with ``1/p + 1/p' = 1``."""
    if not (1 < p < math.inf):
        raise DomainError(f"conjugate exponent needs 1 < p < inf, got {p}")
    return p / (p - 1.0)


@dataclass(frozen=True)
class SeqNormSpec:
    """``( sum ((n+1)^weight_power |c_n|)^outer_exponent )^(1/outer_exponent)``."""

    outer_exponent: float
    weight_power: float

    def __post_init__(self):
        if not self.outer_exponent >= 1:
            raise DomainError(f"outer exponent must be >= 1, got {self.outer_exponent}")


def _coeff_array(cv) -> np.ndarray:
    if isinstance(cv, CoefficientVector):
        return cv.coeffs
    return np.asarray(cv, dtype=float).reshape(-1)


def seq_functional(spec: SeqNormSpec, cv) -> float:
    c = np.abs(_coeff_array(cv))
    if c.size == 0:
        return 0.0
    terms = (np.arange(1, c.size + 1, dtype=float) ** spec.weight_power) * c
    top = terms.max()
    if top == 0.0:
        return 0.0
    # factor out the largest term so large exponents cannot overflow
    q = spec.outer_exponent
    return float(top * math.fsum((terms / top) ** q) ** (1.0 / q))


def _check_p(p: float) -> None:
    if not (1 < p <= 2):
        raise DomainError(f"p must lie in (1, 2], got {p}")


def hl_spec(bp: BasisParams, p: float) -> SeqNormSpec:
    _check_p(p)
    pc = conjugate_exponent(p)
    return SeqNormSpec(p, (1 / pc - 1 / p) * (bp.sigma + 1))


def hy_spec(bp: BasisParams, p: float) -> SeqNormSpec:
    _check_p(p)
    pc = conjugate_exponent(p)
    return SeqNormSpec(pc, (1 / pc - 1 / p) * bp.sigma)


def unified_spec(bp: BasisParams, p: float, s: float) -> SeqNormSpec:
    _check_p(p)
    pc = conjugate_exponent(p)
    if not (p <= s <= pc):
        raise DomainError(f"s must lie in [p, p'] = [{p}, {pc}], got {s}")
    sig = bp.sigma
    return SeqNormSpec(s, (1 / s - 1 / p) * sig + (1 / pc - 1 / s) * (sig + 1))


def hl_functional(bp: BasisParams, p: float, cv) -> float:
    return seq_functional(hl_spec(bp, p), cv)


def hy_functional(bp: BasisParams, p: float, cv) -> float:
    return seq_functional(hy_spec(bp, p), cv)


def unified_functional(bp: BasisParams, p: float, s: float, cv) -> float:
    return seq_functional(unified_spec(bp, p, s), cv)


def converse_spec(theorem: Theorem, bp: BasisParams, q: float, r: Optional[float] = None) -> SeqNormSpec:
    """Right-hand functional bounding ``||Phi||_{L_q(v)}`` for ``q >= 2``."""
    if not (2 <= q < math.inf):
        raise DomainError(f"q must lie in [2, inf), got {q}")
    theorem = Theorem(theorem)
    qc = conjugate_exponent(q)
    sig = bp.sigma
    if theorem is Theorem.HL:
        return SeqNormSpec(q, (1 / qc - 1 / q) * (sig + 1))
    if theorem is Theorem.HY:
        return SeqNormSpec(qc, (1 / qc - 1 / q) * sig)
    if r is None or not (qc <= r <= q):
        raise DomainError(f"r must lie in [q', q] = [{qc}, {q}], got {r}")
    rc = conjugate_exponent(r)
    return SeqNormSpec(rc, (1 / qc - 1 / r) * sig + (1 / r - 1 / q) * (sig + 1))


# -- test-function families -------------------------------------------------


def _profile(kind: str) -> Callable[[np.random.Generator, int], np.ndarray]:
    def draw(rng: np.random.Generator, degree: int) -> np.ndarray:
        n = np.arange(degree + 1, dtype=float)
        if kind == "single":
            c = np.zeros(degree + 1)
            c[rng.integers(0, degree + 1)] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
            return c
        g = rng.standard_normal(degree + 1)
        if kind == "flat":
            return g
        if kind == "harmonic":
            return g / (n + 1)
        if kind == "quadratic":
            return g / (n + 1) ** 2
        if kind == "lacunary":
            mask = np.zeros(degree + 1)
            mask[(2 ** np.arange(int(math.log2(degree + 1)) + 1)) - 1] = 1.0
            return g * mask
        raise ValueError(kind)

    return draw


FAMILIES = {k: _profile(k) for k in ("flat", "harmonic", "quadratic", "single", "lacunary")}
MIXED = ("flat", "harmonic", "quadratic", "single")


def draw_coefficients(family: str, trial: int, rng: np.random.Generator, degree: int) -> np.ndarray:
    """Coefficients for one trial; ``mixed`` cycles flat/harmonic/quadratic/single by trial index."""
    if family == "mixed":
        family = MIXED[trial % len(MIXED)]
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from mixed, {', '.join(FAMILIES)}")
    return FAMILIES[family](rng, degree)


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Per-trial seeds, fixed by ``(seed, trial index)`` alone."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _threads() -> int:
    raw = os.environ.get("GGEXP_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def _ordered_map(fn, items):
    workers = min(_threads(), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- forward scans ----------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    lhs: float
    rhs: float
    ratio: float

    def to_dict(self) -> dict:
        return {"seed": self.seed, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio}


@dataclass(frozen=True)
class InequalityReport:
    theorem_id: Theorem
    direction: Direction
    params: BasisParams
    exponents: dict
    trials: tuple
    empirical_constant: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "theorem_id": Theorem(self.theorem_id).value,
            "direction": Direction(self.direction).value,
            "params": {"lambda": self.params.lam, "mu": self.params.mu},
            "exponents": dict(self.exponents),
            "trials": [t.to_dict() for t in self.trials],
            "empirical_constant": self.empirical_constant,
            "pass": self.passed,
        }

    def to_csv(self) -> str:
        from ._io import fmt

        rows = ["seed,lhs,rhs,ratio"]
        rows += [f"{t.seed},{fmt(t.lhs)},{fmt(t.rhs)},{fmt(t.ratio)}" for t in self.trials]
        return "\n".join(rows) + "\n"


def _build_report(theorem, direction, bp, exponents, records, p) -> InequalityReport:
    ratios = np.array([r.ratio for r in records])
    constant = float(ratios.max()) if ratios.size else float("nan")
    ok = bool(ratios.size) and bool(np.all(np.isfinite(ratios)))
    if ok and p == 2:
        ok = bool(np.all(np.abs(ratios - 1.0) < PARSEVAL_TOL))
    return InequalityReport(
        Theorem(theorem), Direction(direction), bp, exponents, tuple(records), constant, ok
    )


@dataclass(frozen=True)
class _Sample:
    seed: int
    coeffs: np.ndarray  # transform of f
    norm: float         # ||f||_{L_p(v)}


def _sample_trials(bp, p, family, trials, seed, degree, rel_tol, scale=1.0) -> list[_Sample]:
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    seeds = trial_seeds(seed, trials)

    def run(item):
        index, sub = item
        rng = np.random.default_rng(sub)
        c = scale * draw_coefficients(family, index, rng, degree)
        f = TestFunction.from_coefficients(CoefficientVector(bp, c), label=f"trial{index}")
        try:
            fhat = forward_transform(bp, f, degree).coeffs
            norm = lp_norm(bp, f, p, rel_tol)
        except ConvergenceError as exc:
            raise ConvergenceError(
                exc.previous, exc.last, exc.points, f"trial {index} (seed {sub}): {exc}"
            ) from exc
        except QuadratureEvaluationError as exc:
            raise QuadratureEvaluationError(
                exc.node, exc.value, f"trial {index} (seed {sub}): {exc}"
            ) from exc
        return _Sample(sub, fhat, norm)

    return _ordered_map(run, list(enumerate(seeds)))


def _functional_for(theorem: Theorem, bp: BasisParams, p: float, s: Optional[float]) -> SeqNormSpec:
    theorem = Theorem(theorem)
    if theorem is Theorem.HL:
        return hl_spec(bp, p)
    if theorem is Theorem.HY:
        return hy_spec(bp, p)
    if s is None:
        raise DomainError("the unified functional needs s")
    return unified_spec(bp, p, s)


def _exponent_dict(theorem: Theorem, p: float, s: Optional[float]) -> dict:
    out = {"p": p}
    if Theorem(theorem) is Theorem.UNIFIED:
        out["s"] = s
    return out


def forward_inequality_scans(
    bp: BasisParams,
    p: float,
    cases: Sequence[tuple],
    family: str = "mixed",
    trials: int = 200,
    seed: int = 0,
    degree: int = 64,
    rel_tol: float = 1e-11,
    scale: float = 1.0,
) -> list[InequalityReport]:
    """Forward scans for several ``(theorem, s)`` cases that share one set of trials.

    Each trial draws ``f`` from ``family`` as a C~-series of degree ``degree``,
    then records ``functional(f^) / ||f||_{L_p(v)}``.
    """
    _check_p(p)
    specs = [(Theorem(th), s, _functional_for(th, bp, p, s)) for th, s in cases]
    samples = _sample_trials(bp, p, family, trials, seed, degree, rel_tol, scale)
    reports = []
    for theorem, s, spec in specs:
        records = []
        for smp in samples:
            lhs = seq_functional(spec, smp.coeffs)
            rhs = smp.norm
            ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
            records.append(TrialRecord(smp.seed, lhs, rhs, ratio))
        reports.append(
            _build_report(theorem, Direction.FORWARD, bp, _exponent_dict(theorem, p, s), records, p)
        )
    return reports


def forward_inequality_scan(
    theorem_id: Union[Theorem, str],
    bp: BasisParams,
    p: float,
    s: Optional[float] = None,
    family: str = "mixed",
    trials: int = 200,
    seed: int = 0,
    degree: int = 64,
    rel_tol: float = 1e-11,
    scale: float = 1.0,
) -> InequalityReport:
    """Scan one inequality in the forward direction; see ``forward_inequality_scans``."""
    return forward_inequality_scans(
        bp, p, [(theorem_id, s)], family, trials, seed, degree, rel_tol, scale
    )[0]


# -- converse direction -----------------------------------------------------


@dataclass(frozen=True)
class ConverseResult:
    limit_check: float
    coeff_recovery_error: float
    norm_bound_ratio: float
    differences: tuple = field(default=())  # (N, N', ||Phi_N - Phi_N'||) for every consecutive pair

    def to_dict(self) -> dict:
        return {
            "limit_check": self.limit_check,
            "coeff_recovery_error": self.coeff_recovery_error,
            "norm_bound_ratio": self.norm_bound_ratio,
            "differences": [list(d) for d in self.differences],
        }


def converse_reconstruction(
    theorem_id: Union[Theorem, str],
    bp: BasisParams,
    q: float,
    phi,
    checkpoints: Sequence[int],
    r: Optional[float] = None,
    rel_tol: float = 1e-11,
) -> ConverseResult:
    """Build ``Phi_N = sum_{n<=N} phi(n) C~_n`` at each checkpoint and test the converse claims."""
    spec = converse_spec(theorem_id, bp, q, r)
    phi = _coeff_array(phi)
    cps = [int(c) for c in checkpoints]
    if not cps or any(b <= a for a, b in zip(cps[:-1], cps[1:])) or cps[0] < 0:
        raise DomainError("checkpoints must be increasing non-negative integers")
    length = phi.size
    final = cps[-1]
    full = np.zeros(max(final + 1, length))
    full[:length] = phi

    def partial(n: int) -> CoefficientVector:
        return CoefficientVector(bp, full[: n + 1])

    diffs = []
    for a, b in zip(cps[:-1], cps[1:]):
        pa, pb = partial(a), partial(b)
        diff = TestFunction.from_callable(
            lambda t, pa=pa, pb=pb: partial_sum_eval(pb, t) - partial_sum_eval(pa, t), degree=b
        )
        diffs.append((a, b, lp_norm(bp, diff, q, rel_tol)))
    tail = [d for a, _, d in diffs if a >= length]
    if not tail:
        raise DomainError("need two checkpoints at or beyond len(phi) for the limit check")

    phi_final = partial(final)
    f = TestFunction.from_callable(lambda t: partial_sum_eval(phi_final, t), degree=final)
    recovered = forward_transform(bp, f, final).coeffs
    recovery = float(np.max(np.abs(recovered - full[: final + 1])))
    rhs = seq_functional(spec, full[: final + 1])
    norm = lp_norm(bp, f, q, rel_tol)
    ratio = norm / rhs if rhs > 0 else (0.0 if norm == 0 else math.inf)
    return ConverseResult(max(tail), recovery, ratio, tuple(diffs))


# -- connection with Gegenbauer polynomials ---------------------------------


def connection_check(bp: BasisParams, n: int, t_grid) -> float:
    """Max ``|C_n^(lam,mu)(t) - c_mu int C_n^(lam+mu)(t x)(1+x)(1-x^2)^(mu-1) dx|`` over ``t_grid``.

    The x-integral uses the Gauss-Jacobi rule for ``(1-x^2)^(mu-1)``; the
    integrand is a polynomial of degree n+1 so the rule is exact.
    """
    bp.require_positive_mu("the connection formula")
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    rule = gauss_jacobi_rule(JacobiParams(bp.mu - 1.0, bp.mu - 1.0), n // 2 + 2)
    x, w = rule.nodes, rule.weights
    # 1 / c_mu = B(1/2, mu)
    inv_c = math.exp(math.lgamma(0.5) + math.lgamma(bp.mu) - math.lgamma(bp.mu + 0.5))
    tx = np.clip(np.outer(t, x), -1.0, 1.0)
    inner = gegenbauer_eval(bp.lam + bp.mu, n, tx)
    integral = inner @ (w * (1.0 + x)) / inv_c
    direct = gen_gegenbauer_eval(bp, n, t)
    return float(np.max(np.abs(integral - direct)))

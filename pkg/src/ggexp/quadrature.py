"""Gaussian quadrature for Jacobi weights and the generalized Gegenbauer weight."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Union

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .errors import ConvergenceError, DomainError, QuadratureEvaluationError
from .special_poly import BasisParams, JacobiParams, jacobi_squared_norm

__all__ = [
    "GaussJacobiRule",
    "GenGegenbauerRule",
    "gauss_jacobi_rule",
    "gen_gegenbauer_rule",
    "gen_rule_for_exactness",
    "integrate",
    "integrate_converged",
    "certify_rule",
    "weight_total_mass",
    "CERTIFY_TOL",
    "MAX_POINTS",
]

CERTIFY_TOL = 1e-12
MAX_POINTS = 2**16


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussJacobiRule:
    params: JacobiParams
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    # low word of each node, so 1 +- node can be formed without cancellation
    nodes_lo: np.ndarray | None = field(default=None, repr=False)

    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """``(1 + x, 1 - x)`` for every node, using the low word when present."""
        lo = self.nodes_lo if self.nodes_lo is not None else 0.0
        return (1.0 + self.nodes) + lo, (1.0 - self.nodes) - lo

    @property
    def size(self) -> int:
        return self.nodes.size

    def to_csv(self) -> str:
        return _rule_csv(self.nodes, self.weights)


@dataclass(frozen=True, eq=False)
class GenGegenbauerRule:
    params: BasisParams
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def size(self) -> int:
        return self.nodes.size

    def to_csv(self) -> str:
        return _rule_csv(self.nodes, self.weights)


Rule = Union[GaussJacobiRule, GenGegenbauerRule]


def _rule_csv(nodes, weights) -> str:
    rows = ["node,weight"]
    rows += [f"{x:.17g},{w:.17g}" for x, w in zip(nodes, weights)]
    return "\n".join(rows) + "\n"


def weight_total_mass(bp: BasisParams) -> float:
    """``int v = B(mu + 1/2, lam + 1/2)``."""
    return math.exp(
        math.lgamma(bp.mu + 0.5) + math.lgamma(bp.lam + 0.5) - math.lgamma(bp.lam + bp.mu + 1.0)
    )


def _recurrence(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal Jacobi recurrence: diagonal a_0..a_{n-1}, off-diagonal b_1..b_n."""
    dh, _, oh, _ = _kernels.recurrence_dd(float(alpha), float(beta), n)
    return dh, oh


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def _cached(key, build):
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    rule = build()
    with _CACHE_LOCK:
        return _CACHE.setdefault(key, rule)


def gauss_jacobi_rule(p: JacobiParams, n_points: int, certify: bool = False) -> GaussJacobiRule:
    """N-point Gauss rule for ``(1-t)^alpha (1+t)^beta`` (Golub-Welsch).

    Nodes are eigenvalues of the recurrence matrix, polished by one Newton
    step; weights are Christoffel numbers ``1 / sum_k p_k(x)^2``.
    """
    if int(n_points) != n_points or n_points < 1:
        raise DomainError(f"n_points must be a positive integer, got {n_points}")
    n_points = int(n_points)

    def build():
        mass = jacobi_squared_norm(p, 0)
        dh, dl, oh, ol = _kernels.recurrence_dd(float(p.alpha), float(p.beta), n_points)
        if n_points == 1:
            return GaussJacobiRule(p, _frozen([dh[0]]), _frozen([mass]), 1)
        x = eigh_tridiagonal(dh, oh[:-1], eigvals_only=True, lapack_driver="sterf")
        nodes, lows, weights = _kernels.polish_and_weights(np.sort(x), dh, dl, oh, ol, mass)
        order = np.argsort(nodes, kind="stable")
        return GaussJacobiRule(
            p, _frozen(nodes[order]), _frozen(weights[order]), 2 * n_points - 1, _frozen(lows[order])
        )

    rule = _cached(("jacobi", p.alpha, p.beta, n_points), build)
    if certify:
        _certify_or_raise(rule)
    return rule


def gen_gegenbauer_rule(bp: BasisParams, n_points: int, certify: bool = False) -> GenGegenbauerRule:
    """Rule for ``v`` with ``2 n_points`` signed nodes, exact through degree ``4 n_points - 1``."""
    if int(n_points) != n_points or n_points < 1:
        raise DomainError(f"n_points must be a positive integer, got {n_points}")
    n_points = int(n_points)

    def build():
        base = gauss_jacobi_rule(bp.even_jacobi, n_points)
        # s = 2t^2 - 1; 1 + s carries the low word so small t keep full accuracy
        t = np.sqrt(base.offsets()[0] / 2.0)
        w = base.weights * (2.0 ** (-(bp.lam + bp.mu)) / 2.0)
        nodes = np.concatenate([-t[::-1], t])
        weights = np.concatenate([w[::-1], w])
        return GenGegenbauerRule(bp, _frozen(nodes), _frozen(weights), 4 * n_points - 1)

    rule = _cached(("gg", bp.lam, bp.mu, n_points), build)
    if certify:
        _certify_or_raise(rule)
    return rule


def gen_rule_for_exactness(bp: BasisParams, degree: int) -> GenGegenbauerRule:
    """Smallest generalized Gegenbauer rule exact for polynomials of ``degree``."""
    return gen_gegenbauer_rule(bp, max(1, -(-(degree + 1) // 4)))


def _exact_moments(rule: Rule) -> list:
    """Weight moments ``int t^k w`` for k <= exactness degree, in extended precision."""
    kmax = rule.exactness_degree
    with mpmath.workdps(40):
        if isinstance(rule, GaussJacobiRule):
            a = mpmath.mpf(rule.params.alpha)
            b = mpmath.mpf(rule.params.beta)
            m = [2 ** (a + b + 1) * mpmath.beta(a + 1, b + 1)]
            if kmax >= 1:
                m.append((b - a) / (a + b + 2) * m[0])
            for k in range(1, kmax):
                m.append((k * m[k - 1] + (b - a) * m[k]) / (k + a + b + 2))
        else:
            lam = mpmath.mpf(rule.params.lam)
            mu = mpmath.mpf(rule.params.mu)
            m = [
                mpmath.beta(k // 2 + mu + mpmath.mpf(1) / 2, lam + mpmath.mpf(1) / 2)
                if k % 2 == 0
                else mpmath.mpf(0)
                for k in range(kmax + 1)
            ]
        return [float(v) for v in m]


def certify_rule(rule: Rule) -> float:
    """Largest monomial residual up to the declared exactness degree.

    Each residual ``|Q(t^k) - int t^k w|`` is scaled by ``Q(|t|^k)``, which
    equals the moment for even k and stays meaningful when odd moments vanish.
    """
    exact = np.array(_exact_moments(rule))
    signed, scale = _kernels.monomial_sums(rule.nodes, rule.weights, rule.exactness_degree)
    keep = scale > 0
    return float(np.max(np.abs(signed[keep] - exact[keep]) / scale[keep], initial=0.0))


def _certify_or_raise(rule: Rule) -> None:
    worst = certify_rule(rule)
    if not worst <= CERTIFY_TOL:
        raise ArithmeticError(
            f"rule with {rule.size} nodes fails exactness certification: residual {worst:.3e}"
        )


def _evaluate(f: Callable, nodes: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(nodes), dtype=float)
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureEvaluationError(float(nodes[i]), float(vals[i]))
    return vals


def integrate(rule: Rule, f: Callable) -> float:
    """``sum_i w_i f(x_i)``; ``f`` is called once with the full node array."""
    return float(np.dot(rule.weights, _evaluate(f, rule.nodes)))


def _half_range_rule(bp: BasisParams, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric rule for ``v`` from a Gauss-Jacobi rule on [0, 1].

    On [0, 1], ``v(t) = t^(2 mu) (1 - t)^(lam - 1/2) (1 + t)^(lam - 1/2)``. With
    ``t = (1 + x)/2`` the first two factors become the Jacobi weight
    ``(1 - x)^(lam - 1/2) (1 + x)^(2 mu)`` and the last one is analytic, so
    integrands that are smooth on each half-line (|t|, |t|^k) converge fast.
    """

    def build():
        base = gauss_jacobi_rule(JacobiParams(bp.lam - 0.5, 2.0 * bp.mu), n_points)
        t = base.offsets()[0] / 2.0
        w = base.weights * 2.0 ** (-(2.0 * bp.mu + bp.lam + 0.5)) * (1.0 + t) ** (bp.lam - 0.5)
        return _frozen(np.concatenate([-t[::-1], t])), _frozen(np.concatenate([w[::-1], w]))

    return _cached(("half", bp.lam, bp.mu, n_points), build)


def integrate_converged(
    bp: BasisParams,
    f: Callable,
    rel_tol: float = 1e-11,
    n_start: int = 64,
    max_points: int = MAX_POINTS,
) -> tuple[float, int]:
    """Integrate ``f v`` with rules of N, 2N, 4N, ... points until two agree.

    The rules fold [-1, 1] onto [0, 1] (see ``_half_range_rule``), so ``f`` may
    have a kink or an algebraic singularity at the origin. Returns
    ``(value, points)``; ``points`` counts the Jacobi nodes per half.
    """
    if not rel_tol >= 1e-13:
        raise DomainError(f"rel_tol must be at least 1e-13, got {rel_tol}")

    def value(n: int) -> float:
        nodes, weights = _half_range_rule(bp, n)
        return float(np.dot(weights, _evaluate(f, nodes)))

    n = max(int(n_start), 1)
    values = [value(n)]
    while 2 * n <= max_points:
        n *= 2
        cur = value(n)
        if abs(cur - values[-1]) <= max(rel_tol * abs(cur), 1e-14):
            return cur, n
        values.append(cur)
    previous = values[-2] if len(values) > 1 else float("nan")
    raise ConvergenceError(previous, values[-1], n)

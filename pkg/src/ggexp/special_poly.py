"""Jacobi, Gegenbauer and generalized Gegenbauer polynomials on [-1, 1].

Conventions
-----------
The generalized Gegenbauer weight is ``v(t) = |t|^(2 mu) (1 - t^2)^(lam - 1/2)``.
Even and odd degrees are built from Jacobi polynomials in ``s = 2t^2 - 1``::

    C_{2m}(t)   = a_{2m}   P_m^(lam-1/2, mu-1/2)(s)
    C_{2m+1}(t) = a_{2m+1} t P_m^(lam-1/2, mu+1/2)(s)

The orthonormal family ``C~_n`` replaces ``a_n`` by the positive constant
``a~_n`` so that ``int C~_n C~_m v = delta_nm``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import DomainError

__all__ = [
    "BasisParams",
    "JacobiParams",
    "pochhammer",
    "log_gamma_ratio",
    "jacobi_eval",
    "jacobi_squared_norm",
    "gegenbauer_eval",
    "gen_gegenbauer_coefficient",
    "gen_gegenbauer_eval",
    "orthonormal_coefficient",
    "orthonormal_coefficients",
    "orthonormal_gg_eval",
    "orthonormal_gg_table",
]


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the Jacobi weight ``(1 - t)^alpha (1 + t)^beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(
                f"Jacobi parameters need alpha, beta > -1, got ({self.alpha}, {self.beta})"
            )


@dataclass(frozen=True)
class BasisParams:
    """The pair (lambda, mu) fixing the weight ``v`` and the polynomial basis."""

    lam: float
    mu: float

    def __post_init__(self):
        if not self.lam > -0.5:
            raise DomainError(f"lambda must exceed -1/2, got {self.lam}")
        if not self.mu >= 0:
            raise DomainError(f"mu must be non-negative, got {self.mu}")

    @property
    def sigma(self) -> float:
        return max(self.lam, self.mu)

    @property
    def even_jacobi(self) -> JacobiParams:
        return JacobiParams(self.lam - 0.5, self.mu - 0.5)

    @property
    def odd_jacobi(self) -> JacobiParams:
        return JacobiParams(self.lam - 0.5, self.mu + 0.5)

    def require_positive_mu(self, what: str = "this operation") -> None:
        if not self.mu > 0:
            raise DomainError(f"{what} requires mu > 0, got mu = {self.mu}")


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``x (x+1) ... (x+n-1)``; ``(x)_0 = 1``."""
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


def log_gamma_ratio(numerators: Iterable[float], denominators: Iterable[float]) -> float:
    """Return ``sum log Gamma(num) - sum log Gamma(den)``; all arguments must be positive."""
    nums = [float(v) for v in numerators]
    dens = [float(v) for v in denominators]
    for v in nums + dens:
        if not v > 0:
            raise DomainError(f"log_gamma_ratio needs positive arguments, got {v}")
    return math.fsum([*gammaln(nums), *(-gammaln(dens))]) if nums or dens else 0.0


def _as_grid(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    flat = np.ascontiguousarray(arr.reshape(-1))
    if flat.size and not np.all(np.abs(flat) <= 1.0):
        bad = flat[~(np.abs(flat) <= 1.0)][0]
        raise DomainError(f"argument must lie in [-1, 1], got {bad}")
    return flat, scalar


def _shape_like(values: np.ndarray, t, scalar: bool):
    if scalar:
        return float(values[0])
    return values.reshape(np.shape(t))


def _check_degree(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n}")
    return int(n)


def jacobi_eval(p: JacobiParams, n: int, t):
    """``P_n^(alpha,beta)(t)`` by the forward three-term recurrence."""
    n = _check_degree(n)
    flat, scalar = _as_grid(t)
    return _shape_like(_kernels.jacobi_values(p.alpha, p.beta, n, flat), t, scalar)


def jacobi_table(p: JacobiParams, n: int, t) -> np.ndarray:
    """Rows ``P_0 .. P_n`` at the points ``t`` (shape ``(n+1, len(t))``)."""
    n = _check_degree(n)
    flat, _ = _as_grid(t)
    return _kernels.jacobi_table(p.alpha, p.beta, n, flat)


def jacobi_squared_norm(p: JacobiParams, n: int) -> float:
    """``int P_n^2 w_{alpha,beta}`` in closed form."""
    n = _check_degree(n)
    a, b = p.alpha, p.beta
    if n == 0:
        # (a+b+1) Gamma(a+b+1) = Gamma(a+b+2), also when a+b+1 <= 0
        log_den_extra = 0.0
        dens = [a + b + 2.0]
    else:
        log_den_extra = math.log(2 * n + a + b + 1)
        dens = [n + 1.0, n + a + b + 1.0]
    lg = log_gamma_ratio([n + a + 1.0, n + b + 1.0], dens)
    return math.exp((a + b + 1.0) * math.log(2.0) + lg - log_den_extra)


def _rising_ratio(x: float, y: float, n: int) -> float:
    # (x)_n / (y)_n as a running product of ratios; avoids overflow for large n
    out = 1.0
    for k in range(n):
        out *= (x + k) / (y + k)
    return out


def gegenbauer_eval(lam: float, n: int, t):
    """``C_n^lam(t) = (2 lam)_n / (lam + 1/2)_n * P_n^(lam-1/2, lam-1/2)(t)``."""
    if not lam > -0.5:
        raise DomainError(f"lambda must exceed -1/2, got {lam}")
    n = _check_degree(n)
    flat, scalar = _as_grid(t)
    vals = _kernels.jacobi_values(lam - 0.5, lam - 0.5, n, flat)
    return _shape_like(_rising_ratio(2.0 * lam, lam + 0.5, n) * vals, t, scalar)


def gen_gegenbauer_coefficient(bp: BasisParams, n: int) -> float:
    """The raw normalization ``a_n`` (may be negative when lam + mu < 0)."""
    n = _check_degree(n)
    m, odd = divmod(n, 2)
    return _rising_ratio(bp.lam + bp.mu, bp.mu + 0.5, m + odd)


def gen_gegenbauer_eval(bp: BasisParams, n: int, t):
    """Raw generalized Gegenbauer polynomial ``C_n^(lam,mu)(t)``."""
    n = _check_degree(n)
    flat, scalar = _as_grid(t)
    return _shape_like(
        _gg_values(bp, n, flat, gen_gegenbauer_coefficient(bp, n)), t, scalar
    )


def orthonormal_coefficient(bp: BasisParams, n: int) -> float:
    """The positive constant ``a~_n`` making ``C~_n`` orthonormal against ``v``."""
    n = _check_degree(n)
    m, odd = divmod(n, 2)
    lam, mu = bp.lam, bp.mu
    if odd:
        log_sq = math.log(2 * m + lam + mu + 1.0) + log_gamma_ratio(
            [m + 1.0, m + lam + mu + 1.0], [m + lam + 0.5, m + mu + 1.5]
        )
    else:
        if m == 0:
            # (lam+mu) Gamma(lam+mu) -> Gamma(lam+mu+1); lam+mu may be <= 0
            head, nums = 0.0, [1.0, lam + mu + 1.0]
        else:
            head, nums = math.log(2 * m + lam + mu), [m + 1.0, m + lam + mu]
        log_sq = head + log_gamma_ratio(nums, [m + lam + 0.5, m + mu + 0.5])
    return math.exp(0.5 * log_sq)


@lru_cache(maxsize=256)
def _orthonormal_coefficients(lam: float, mu: float, n: int) -> np.ndarray:
    bp = BasisParams(lam, mu)
    out = np.array([orthonormal_coefficient(bp, k) for k in range(n + 1)])
    out.setflags(write=False)
    return out


def orthonormal_coefficients(bp: BasisParams, n: int) -> np.ndarray:
    """``a~_0 .. a~_n`` as a read-only array (cached)."""
    return _orthonormal_coefficients(bp.lam, bp.mu, _check_degree(n))


def _gg_values(bp: BasisParams, n: int, flat: np.ndarray, coef: float) -> np.ndarray:
    m, odd = divmod(n, 2)
    jp = bp.odd_jacobi if odd else bp.even_jacobi
    s = 2.0 * flat * flat - 1.0
    vals = _kernels.jacobi_values(jp.alpha, jp.beta, m, s)
    if odd:
        return flat * (coef * vals)
    return coef * vals


def orthonormal_gg_eval(bp: BasisParams, n: int, t):
    """Orthonormal generalized Gegenbauer polynomial ``C~_n(t)``."""
    n = _check_degree(n)
    flat, scalar = _as_grid(t)
    return _shape_like(
        _gg_values(bp, n, flat, orthonormal_coefficient(bp, n)), t, scalar
    )


def orthonormal_gg_table(bp: BasisParams, n: int, t) -> np.ndarray:
    """Rows ``C~_0 .. C~_n`` at the points ``t`` from one recurrence pass per parity."""
    n = _check_degree(n)
    flat, _ = _as_grid(t)
    s = 2.0 * flat * flat - 1.0
    out = np.empty((n + 1, flat.size))
    ev, od = bp.even_jacobi, bp.odd_jacobi
    even = _kernels.jacobi_table(ev.alpha, ev.beta, n // 2, s)
    coefs = orthonormal_coefficients(bp, n)
    out[0::2] = coefs[0::2, None] * even
    if n >= 1:
        odd = _kernels.jacobi_table(od.alpha, od.beta, (n - 1) // 2, s)
        out[1::2] = flat[None, :] * (coefs[1::2, None] * odd)
    return out

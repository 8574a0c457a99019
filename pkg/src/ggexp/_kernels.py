"""Compiled inner loops shared by every evaluator.

All polynomial evaluation funnels through ``_step`` so that batched and
single-degree paths perform the same floating-point operations.
"""
import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(inline="always", **_JIT)
def _first(alpha, beta, x):
    return 0.5 * ((alpha - beta) + (alpha + beta + 2.0) * x)


@njit(inline="always", **_JIT)
def _step(k, alpha, beta, x, p_prev, p_cur):
    # P_{k+1} from P_{k-1}, P_k; valid for k >= 1 whenever alpha, beta > -1.
    c = 2.0 * k + alpha + beta
    a1 = 2.0 * (k + 1) * (k + alpha + beta + 1.0) * c
    a2 = (c + 1.0) * ((c + 2.0) * c * x + (alpha - beta) * (alpha + beta))
    a3 = 2.0 * (k + alpha) * (k + beta) * (c + 2.0)
    return (a2 * p_cur - a3 * p_prev) / a1


@njit(**_JIT)
def jacobi_values(alpha, beta, n, x):
    out = np.empty(x.size)
    for i in range(x.size):
        xi = x[i]
        if n == 0:
            out[i] = 1.0
            continue
        p0 = 1.0
        p1 = _first(alpha, beta, xi)
        for k in range(1, n):
            p0, p1 = p1, _step(k, alpha, beta, xi, p0, p1)
        out[i] = p1
    return out


@njit(**_JIT)
def jacobi_table(alpha, beta, n, x):
    out = np.empty((n + 1, x.size))
    for i in range(x.size):
        xi = x[i]
        out[0, i] = 1.0
        if n == 0:
            continue
        p0 = 1.0
        p1 = _first(alpha, beta, xi)
        out[1, i] = p1
        for k in range(1, n):
            p0, p1 = p1, _step(k, alpha, beta, xi, p0, p1)
            out[k + 1, i] = p1
    return out


@njit(**_JIT)
def _series(alpha, beta, c, x):
    total = 0.0
    if c.size == 0:
        return total
    total += c[0]
    if c.size == 1:
        return total
    p0 = 1.0
    p1 = _first(alpha, beta, x)
    total += c[1] * p1
    for k in range(1, c.size - 1):
        p0, p1 = p1, _step(k, alpha, beta, x, p0, p1)
        total += c[k + 1] * p1
    return total


@njit(**_JIT)
def gg_series(alpha, beta_even, beta_odd, c_even, c_odd, t):
    """sum_m c_even[m] P_m^(alpha,beta_even)(s) + t * sum_m c_odd[m] P_m^(alpha,beta_odd)(s), s = 2t^2-1."""
    out = np.empty(t.size)
    for i in range(t.size):
        ti = t[i]
        s = 2.0 * ti * ti - 1.0
        out[i] = _series(alpha, beta_even, c_even, s) + ti * _series(
            alpha, beta_odd, c_odd, s
        )
    return out


# -- double-double helpers (Dekker/Knuth error-free transforms) -------------


@njit(inline="always", **_JIT)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(inline="always", **_JIT)
def _fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(inline="always", **_JIT)
def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


@njit(inline="always", **_JIT)
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(inline="always", **_JIT)
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    return _fast_two_sum(s, e + (al + bl))


@njit(inline="always", **_JIT)
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    return _fast_two_sum(p, e + (ah * bl + al * bh))


@njit(inline="always", **_JIT)
def _dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul(q1, 0.0, bh, bl)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _dd_mul(q2, 0.0, bh, bl)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    h, l = _fast_two_sum(q1, q2)
    return _dd_add(h, l, rh / bh, 0.0)


@njit(inline="always", **_JIT)
def _dd_sqrt(ah, al):
    if ah <= 0.0:
        return 0.0, 0.0
    x = np.sqrt(ah)
    ph, pl = _two_prod(x, x)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    return _fast_two_sum(x, rh / (2.0 * x))


@njit(**_JIT)
def recurrence_dd(alpha, beta, n):
    """Orthonormal Jacobi recurrence a_0..a_{n-1}, b_1..b_n as (hi, lo) pairs.

    Plain double coefficients carry relative errors that the Christoffel sum
    amplifies near the endpoints for large n, hence the extra word.
    """
    dh, dl = np.empty(n), np.empty(n)
    oh, ol = np.empty(n), np.empty(n)
    abh, abl = _two_sum(alpha, beta)
    dfh, dfl = _two_sum(beta, -alpha)
    # a_0 is 0/0 in the generic form when alpha + beta = 0
    th, tl = _dd_add(abh, abl, 2.0, 0.0)
    dh[0], dl[0] = _dd_div(dfh, dfl, th, tl)
    nh, nl = _dd_mul(dfh, dfl, abh, abl)
    for k in range(1, n):
        c1h, c1l = _dd_add(abh, abl, 2.0 * k, 0.0)
        c2h, c2l = _dd_add(c1h, c1l, 2.0, 0.0)
        den_h, den_l = _dd_mul(c1h, c1l, c2h, c2l)
        dh[k], dl[k] = _dd_div(nh, nl, den_h, den_l)
    # b_1 with the (1 + alpha + beta) factor cancelled by hand
    ah1, al1 = _two_sum(1.0, alpha)
    bh1, bl1 = _two_sum(1.0, beta)
    numh, numl = _dd_mul(ah1, al1, bh1, bl1)
    numh, numl = 4.0 * numh, 4.0 * numl
    sh, sl = _dd_add(abh, abl, 2.0, 0.0)
    uh, ul = _dd_add(abh, abl, 3.0, 0.0)
    den_h, den_l = _dd_mul(sh, sl, sh, sl)
    den_h, den_l = _dd_mul(den_h, den_l, uh, ul)
    qh, ql = _dd_div(numh, numl, den_h, den_l)
    oh[0], ol[0] = _dd_sqrt(qh, ql)
    for j in range(2, n + 1):
        jh, jl = _two_sum(j, alpha)
        kh, kl = _two_sum(j, beta)
        mh, ml = _dd_add(abh, abl, float(j), 0.0)
        numh, numl = _dd_mul(jh, jl, kh, kl)
        numh, numl = _dd_mul(numh, numl, mh, ml)
        numh, numl = 4.0 * j * numh, 4.0 * j * numl
        ch, cl = _dd_add(abh, abl, 2.0 * j, 0.0)
        cph, cpl = _dd_add(ch, cl, 1.0, 0.0)
        cmh, cml = _dd_add(ch, cl, -1.0, 0.0)
        den_h, den_l = _dd_mul(ch, cl, ch, cl)
        den_h, den_l = _dd_mul(den_h, den_l, cph, cpl)
        den_h, den_l = _dd_mul(den_h, den_l, cmh, cml)
        qh, ql = _dd_div(numh, numl, den_h, den_l)
        oh[j - 1], ol[j - 1] = _dd_sqrt(qh, ql)
    return dh, dl, oh, ol


@njit(**_JIT)
def _weights_double(x, dh, oh, p0):
    n = dh.size
    nodes = x.copy()
    weights = np.empty(n)
    for i in range(n):
        xi = x[i]
        # Newton correction from p_N and its derivative.
        pm, pc = 0.0, p0
        dm, dc = 0.0, 0.0
        for k in range(n):
            bk = oh[k - 1] if k > 0 else 0.0
            pn = ((xi - dh[k]) * pc - bk * pm) / oh[k]
            dn = (pc + (xi - dh[k]) * dc - bk * dm) / oh[k]
            pm, pc = pc, pn
            dm, dc = dc, dn
        if dc != 0.0:
            dx = pc / dc
            if abs(dx) < 1e-8:
                xi = xi - dx
        nodes[i] = xi
        pm, pc = 0.0, p0
        acc = pc * pc
        for k in range(n - 1):
            bk = oh[k - 1] if k > 0 else 0.0
            pn = ((xi - dh[k]) * pc - bk * pm) / oh[k]
            pm, pc = pc, pn
            acc += pc * pc
        weights[i] = 1.0 / acc
    return nodes, np.zeros(n), weights


@njit(**_JIT)
def _weights_extended(x, dh, dl, oh, ol, p0h, p0l):
    n = dh.size
    nodes = x.copy()
    lows = np.zeros(n)
    weights = np.empty(n)
    rh, rl = np.empty(n), np.empty(n)
    for k in range(n):
        rh[k], rl[k] = _dd_div(1.0, 0.0, oh[k], ol[k])
    for i in range(n):
        xi = x[i]
        # Newton in double-double keeps the sub-ulp part of the root in xl
        pmh, pml, pch, pcl = 0.0, 0.0, p0h, p0l
        dmh, dml, dch, dcl = 0.0, 0.0, 0.0, 0.0
        for k in range(n):
            th, tl = _dd_add(xi, 0.0, -dh[k], -dl[k])
            ah, al = _dd_mul(th, tl, pch, pcl)
            bh, bl = _dd_mul(th, tl, dch, dcl)
            bh, bl = _dd_add(bh, bl, pch, pcl)
            if k > 0:
                uh, ul = _dd_mul(oh[k - 1], ol[k - 1], pmh, pml)
                ah, al = _dd_add(ah, al, -uh, -ul)
                uh, ul = _dd_mul(oh[k - 1], ol[k - 1], dmh, dml)
                bh, bl = _dd_add(bh, bl, -uh, -ul)
            pmh, pml = pch, pcl
            dmh, dml = dch, dcl
            pch, pcl = _dd_mul(ah, al, rh[k], rl[k])
            dch, dcl = _dd_mul(bh, bl, rh[k], rl[k])
        xh, xl = xi, 0.0
        if dch != 0.0:
            qh, ql = _dd_div(pch, pcl, dch, dcl)
            if abs(qh) < 1e-8:
                xh, xl = _dd_add(xi, 0.0, -qh, -ql)
        nodes[i] = xh
        lows[i] = xl
        pmh, pml, pch, pcl = 0.0, 0.0, p0h, p0l
        acch, accl = _dd_mul(pch, pcl, pch, pcl)
        for k in range(n - 1):
            th, tl = _dd_add(xh, xl, -dh[k], -dl[k])
            th, tl = _dd_mul(th, tl, pch, pcl)
            if k > 0:
                uh, ul = _dd_mul(oh[k - 1], ol[k - 1], pmh, pml)
                th, tl = _dd_add(th, tl, -uh, -ul)
            pmh, pml = pch, pcl
            pch, pcl = _dd_mul(th, tl, rh[k], rl[k])
            sqh, sql = _dd_mul(pch, pcl, pch, pcl)
            acch, accl = _dd_add(acch, accl, sqh, sql)
        weights[i] = 1.0 / acch - accl / (acch * acch)
    return nodes, lows, weights


EXTENDED_MAX = 4096


def polish_and_weights(x, dh, dl, oh, ol, mass):
    """One guarded Newton step on p_N, then Christoffel weights 1/sum p_k^2.

    ``dh + dl`` holds a_0..a_{N-1} and ``oh + ol`` holds b_1..b_N of the
    orthonormal recurrence x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}.
    Up to ``EXTENDED_MAX`` points both passes run in double-double and the
    weight is taken at the unrounded Newton root; near t = +-1 the weight is
    sensitive enough to the last ulp of the node for this to matter.
    Larger rules use plain double. Returns ``(nodes, lows, weights)`` where
    ``nodes + lows`` is the root to about twice double precision.
    """
    if dh.size <= EXTENDED_MAX:
        sh, sl = _dd_sqrt(mass, 0.0)
        p0h, p0l = _dd_div(1.0, 0.0, sh, sl)
        return _weights_extended(x, dh, dl, oh, ol, p0h, p0l)
    return _weights_double(x, dh, oh, 1.0 / np.sqrt(mass))


@njit(inline="always", **_JIT)
def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit(**_JIT)
def monomial_sums(nodes, weights, kmax):
    """Compensated ``sum w x^k`` and ``sum w |x|^k`` for k = 0..kmax."""
    signed = np.zeros(kmax + 1)
    signed_c = np.zeros(kmax + 1)
    absolute = np.zeros(kmax + 1)
    absolute_c = np.zeros(kmax + 1)
    for i in range(nodes.size):
        x = abs(nodes[i])
        neg = nodes[i] < 0.0
        term = weights[i]
        for k in range(kmax + 1):
            absolute[k], absolute_c[k] = _neumaier(absolute[k], absolute_c[k], term)
            v = -term if (neg and k % 2 == 1) else term
            signed[k], signed_c[k] = _neumaier(signed[k], signed_c[k], v)
            term = term * x
    return signed + signed_c, absolute + absolute_c

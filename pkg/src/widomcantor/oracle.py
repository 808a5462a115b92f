"""Independent quadrature oracle for L2 minimality claims.

The closed-form L2 Widom identities are cross-checked against direct
least-squares computations: build a quadrature rule for the equilibrium
measure, form the Hankel moment matrix, and solve the normal equations for
the minimal monic polynomial.  Two rules are provided: Gauss-Chebyshev for
the arcsine measure of an interval (exact for polynomial integrands below
twice the node count), and its pullback through the cascade, which samples
the equilibrium measure of a level set E_s with equal mass 2^{-s} per
branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from mpmath import mp, mpf, workprec

from .cantor import CantorModel
from .numerics import LogScalar, PrecisionExhausted

__all__ = [
    "QuadMeasure",
    "arcsine_measure",
    "pullback_quadrature",
    "moments",
    "MonicFit",
    "monic_min_norm",
    "widom_l2_oracle",
    "quad_norm",
]


@dataclass(frozen=True)
class QuadMeasure:
    nodes: tuple
    weights: tuple
    prec: int


def _pairwise_sum(vals: List[mpf]) -> mpf:
    if not vals:
        return mpf(0)
    work = list(vals)
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def arcsine_measure(m: int, prec: int, interval=(0, 1)) -> QuadMeasure:
    """Gauss-Chebyshev rule: m nodes, equal weights 1/m, exact for
    polynomials of degree < 2m against the arcsine measure of the interval."""
    if m < 1:
        raise ValueError("need at least one node")
    a, b = interval
    with workprec(prec + 32):
        a, b = mpf(a), mpf(b)
        mid, half = (a + b) / 2, (b - a) / 2
        w = mpf(1) / m
        nodes = tuple(
            mid + half * mp.cos((2 * k - 1) * mp.pi / (2 * m))
            for k in range(1, m + 1)
        )
        return QuadMeasure(nodes, tuple(w for _ in nodes), prec)


def pullback_quadrature(model: CantorModel, s: int, m: int,
                        prec: int) -> QuadMeasure:
    """Pull the interval rule back through F_s: every reference node gets
    2^s preimages, one per branch, each carrying weight 1/(m 2^s).  This
    samples the equilibrium measure of E_s."""
    ref = arcsine_measure(m, prec, (-1, 1))
    solve_prec = prec + 3 * s + 64
    with workprec(solve_prec):
        r_s = model._r(s, solve_prec)
        nodes = []
        for j in range(1 << s):
            for y in ref.nodes:
                target_p = r_s * (y - 1) / 2
                x = model._preimage(s, j, target_p, solve_prec)
                x = model._polish(s, x, +y, solve_prec)
                nodes.append(x)
        w = mpf(1) / (m * (1 << s))
        return QuadMeasure(tuple(nodes), tuple(w for _ in nodes), prec)


def moments(quad: QuadMeasure, up_to: int, prec: int) -> List[mpf]:
    """Power moments 0..up_to, pairwise-summed in fixed node order."""
    with workprec(prec + 32):
        powers = [mpf(1)] * len(quad.nodes)
        out = [_pairwise_sum([w * p for w, p in zip(quad.weights, powers)])]
        for _ in range(up_to):
            powers = [p * x for p, x in zip(powers, quad.nodes)]
            out.append(_pairwise_sum(
                [w * p for w, p in zip(quad.weights, powers)]))
        return out


@dataclass(frozen=True)
class MonicFit:
    n: int
    log_norm: mpf
    min_sq: mpf
    coeffs: tuple  # low to high, without the leading 1
    cond: mpf  # 1-norm condition proxy of the moment matrix


def monic_min_norm(quad: QuadMeasure, n: int, prec: int) -> MonicFit:
    """Least-squares minimal monic polynomial of degree n for the rule:
    normal equations G a = -h with Hankel G_ij = m_{i+j}, h_i = m_{n+i},
    minimal squared norm m_{2n} + h^T a."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    with workprec(prec + 32):
        if n == 0:
            m0 = moments(quad, 0, prec)[0]
            return MonicFit(0, mp.log(m0) / 2, m0, (), mpf(1))
        mom = moments(quad, 2 * n, prec)
        G = mp.matrix(n, n)
        h = mp.matrix(n, 1)
        for i in range(n):
            h[i] = mom[n + i]
            for j in range(n):
                G[i, j] = mom[i + j]
        a = mp.lu_solve(G, -h)
        min_sq = mom[2 * n] + _pairwise_sum([h[i] * a[i] for i in range(n)])
        if min_sq <= 0:
            raise PrecisionExhausted(
                f"normal equations lost positivity at degree {n}; raise the "
                "working precision"
            )
        cond = mp.mnorm(G, 1) * mp.mnorm(mp.inverse(G), 1)
        return MonicFit(n, mp.log(min_sq) / 2, +min_sq,
                        tuple(+a[i] for i in range(n)), +cond)


def widom_l2_oracle(quad: QuadMeasure, n: int, log_cap_ref,
                    prec: int = 0) -> LogScalar:
    """Discrete L2 Widom ratio from the quadrature route: the minimal monic
    L2 norm divided by the n-th power of the reference capacity, as a signed
    log scalar."""
    p = prec or quad.prec
    fit = monic_min_norm(quad, n, p)
    with workprec(p):
        return LogScalar.from_log(1, fit.log_norm - n * mpf(log_cap_ref), p)


def quad_norm(quad: QuadMeasure, coeffs: Sequence, prec: int) -> mpf:
    """L2 norm of the monic polynomial x^n + sum coeffs[i] x^i under the
    rule (coeffs low to high, degree inferred)."""
    n = len(coeffs)
    with workprec(prec + 32):
        poly = [mpf(1)] + [mpf(c) for c in reversed(list(coeffs))]
        vals = [w * mp.polyval(poly, x) ** 2
                for w, x in zip(quad.weights, quad.nodes)]
        return mp.sqrt(_pairwise_sum(vals))

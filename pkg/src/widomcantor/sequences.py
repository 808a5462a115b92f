"""Subexponential scale sequences and their regularization.

A scale sequence c = (c_n) with c_n >= 1 and (ln c_n)/n -> 0 drives the
whole construction: the derived gap-ratio parameters are
gamma_n = c(2^{n+1}) / (6 c(2^n)^2).  The closed-form lower-bound machinery
additionally needs c to be *regular*: c_n >= e, nondecreasing, and
(ln c_n)/n nonincreasing.

regularize() builds the standard monotone envelope: with u_n = sup_{k<=n} c_k,
alpha_n = (ln u_n)/n and alpha*_n = sup_{k>=n} alpha_k, the output is
s_n = sup_{k<=n} exp(k alpha*_k).  It dominates c, is nondecreasing, has
(ln s_n)/n nonincreasing, and is the identity on already-regular input.
alpha*_n is a sup over an infinite index range; it is evaluated over the
window [n, M], M = max(4N, 2^16), and accepted as exact when the family's
analytic monotonicity bound shows alpha cannot grow past the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

from mpmath import mp, mpf, workprec

__all__ = [
    "SequenceSpec",
    "SequenceError",
    "HorizonExceeded",
    "RegularityReport",
    "RegularizedSequence",
    "evaluate",
    "log_evaluate",
    "check_regular",
    "regularize",
    "tail_decay",
]

SEQ_PREC = 128  # default working precision for alpha/t bookkeeping

Raw = Union[int, float, str, mpf]


class SequenceError(ValueError):
    """Invalid sequence specification or evaluation outside the domain."""


class HorizonExceeded(SequenceError):
    """A regularized table value was requested beyond the computed prefix."""


@lru_cache(maxsize=4096)
def _param(raw: Raw, prec: int) -> mpf:
    """Parse a parameter: numbers pass through, strings may be decimal
    literals, fractions 'p/q', or the constants 'e', 'pi', 'e^k'.  Raws are
    immutable and the result depends only on (raw, prec), so parses are
    memoized."""
    with workprec(prec):
        if isinstance(raw, str):
            s = raw.strip().lower()
            if s == "e":
                return +mp.e
            if s == "pi":
                return +mp.pi
            for prefix in ("e**", "e^"):
                if s.startswith(prefix):
                    return mp.e ** mpf(s[len(prefix):])
            if "/" in s:
                num, den = s.split("/", 1)
                return mpf(num.strip()) / mpf(den.strip())
            return mpf(s)
        return +mpf(raw)


@dataclass(frozen=True)
class SequenceSpec:
    """Immutable description of a scale sequence.

    Families: constant(a), power(a, p) = a*n^p, logarithmic(a, b) = a + b ln n,
    table(values, extension) with extension 'hold' (repeat the last entry) or
    'none' (finite domain).
    """

    family: str
    params: tuple

    @staticmethod
    def constant(a: Raw) -> "SequenceSpec":
        return SequenceSpec("constant", (("a", a),))

    @staticmethod
    def power(a: Raw, p: Raw) -> "SequenceSpec":
        return SequenceSpec("power", (("a", a), ("p", p)))

    @staticmethod
    def logarithmic(a: Raw, b: Raw) -> "SequenceSpec":
        return SequenceSpec("logarithmic", (("a", a), ("b", b)))

    @staticmethod
    def table(values: Sequence[Raw], extension: str = "hold") -> "SequenceSpec":
        if extension not in ("hold", "none"):
            raise SequenceError(f"unknown table extension {extension!r}")
        if len(values) == 0:
            raise SequenceError("table requires at least one value")
        return SequenceSpec("table", (("values", tuple(values)), ("extension", extension)))

    @staticmethod
    def from_dict(d: dict) -> "SequenceSpec":
        fam = d.get("family")
        if fam == "constant":
            return SequenceSpec.constant(d["a"])
        if fam == "power":
            return SequenceSpec.power(d["a"], d["p"])
        if fam == "logarithmic":
            return SequenceSpec.logarithmic(d["a"], d["b"])
        if fam == "table":
            return SequenceSpec.table(d["values"], d.get("extension", "hold"))
        raise SequenceError(f"unknown sequence family {fam!r}")

    def to_dict(self) -> dict:
        d: dict = {"family": self.family}
        for key, raw in self.params:
            if key == "values":
                d[key] = [str(v) for v in raw]
            elif key == "extension":
                d[key] = raw
            else:
                d[key] = str(raw)
        return d

    def param(self, key: str):
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(key)

    @property
    def domain_end(self) -> Optional[int]:
        """Last valid index for finite-domain specs, else None."""
        if self.family == "table" and self.param("extension") == "none":
            return len(self.param("values"))
        return None


def evaluate(spec: SequenceSpec, n: int, prec: int = SEQ_PREC) -> mpf:
    """c_n as an mpf at the requested precision.  n is 1-based."""
    if n < 1:
        raise SequenceError("sequence index must be >= 1")
    with workprec(prec):
        if spec.family == "constant":
            v = _param(spec.param("a"), prec)
        elif spec.family == "power":
            a = _param(spec.param("a"), prec)
            p = _param(spec.param("p"), prec)
            v = a * mpf(n) ** p
        elif spec.family == "logarithmic":
            a = _param(spec.param("a"), prec)
            b = _param(spec.param("b"), prec)
            v = a + b * mp.log(n)
        elif spec.family == "table":
            values = spec.param("values")
            if n <= len(values):
                v = _param(values[n - 1], prec)
            elif spec.param("extension") == "hold":
                v = _param(values[-1], prec)
            else:
                raise SequenceError(
                    f"index {n} beyond finite table of length {len(values)}"
                )
        else:
            raise SequenceError(f"unknown family {spec.family!r}")
        if v < 1:
            raise SequenceError(f"c_{n} = {v} violates c_n >= 1")
        return v


def log_evaluate(spec: SequenceSpec, n: int, prec: int = SEQ_PREC) -> mpf:
    """ln c_n, computed directly where that is better conditioned."""
    with workprec(prec):
        if spec.family == "power":
            a = _param(spec.param("a"), prec)
            p = _param(spec.param("p"), prec)
            return mp.log(a) + p * mp.log(n)
        return mp.log(evaluate(spec, n, prec))


@dataclass(frozen=True)
class RegularityReport:
    ok: bool
    first_violation: Optional[int]  # 1-based index, None when ok
    condition: Optional[str]  # 'min' (c_n >= e), 'monotone', 'subexp'


def check_regular(spec: SequenceSpec, N: int, prec: int = SEQ_PREC) -> RegularityReport:
    """Check the three regularity conditions on the prefix 1..N:
    c_n >= e, c nondecreasing, (ln c_n)/n nonincreasing.

    Comparisons allow a guard of a few ulps so that exact-equality families
    (constant(e)) are not rejected by rounding.
    """
    if N < 1:
        raise SequenceError("prefix length must be >= 1")
    end = spec.domain_end
    if end is not None:
        N = min(N, end)
    with workprec(prec):
        guard = mpf(2) ** (-(prec - 8))
        prev_c = None
        prev_a = None
        for n in range(1, N + 1):
            c = evaluate(spec, n, prec)
            if c < mp.e * (1 - guard):
                return RegularityReport(False, n, "min")
            if prev_c is not None and c < prev_c * (1 - guard):
                return RegularityReport(False, n, "monotone")
            a = mp.log(c) / n
            if prev_a is not None and a > prev_a + guard:
                return RegularityReport(False, n, "subexp")
            prev_c, prev_a = c, a
    return RegularityReport(True, None, None)


def _alpha_decreasing_from(spec: SequenceSpec, prec: int) -> Optional[int]:
    """Index D past which alpha_n = ln(u_n)/n is analytically nonincreasing,
    or None when no such bound is available (finite tables)."""
    with workprec(prec):
        if spec.family == "constant":
            return 1
        if spec.family == "power":
            a = _param(spec.param("a"), prec)
            p = _param(spec.param("p"), prec)
            if p <= 0 or mp.log(a) >= p:
                return 1
            # alpha(x) = (ln a + p ln x)/x peaks at x* = exp(1 - ln(a)/p)
            return max(1, int(mp.ceil(mp.exp(1 - mp.log(a) / p))))
        if spec.family == "logarithmic":
            a = _param(spec.param("a"), prec)
            b = _param(spec.param("b"), prec)
            if b <= 0 or b <= a * mp.log(a):
                return 1
            # alpha decreasing once y ln y >= b for y = a + b ln x;
            # y ln y is increasing, so scan by doubling then bisect
            def ok(k: int) -> bool:
                y = a + b * mp.log(k)
                return y * mp.log(y) >= b
            hi = 1
            while not ok(hi):
                hi *= 2
                if hi > 1 << 62:  # pragma: no cover - absurd parameters
                    return None
            lo = max(1, hi // 2)
            while lo < hi:
                mid = (lo + hi) // 2
                if ok(mid):
                    hi = mid
                else:
                    lo = mid + 1
            return hi
        if spec.family == "table":
            if spec.param("extension") == "hold":
                # u is frozen past the table, so alpha ~ const/n decreases
                return len(spec.param("values"))
            return None
    return None


def _certified_regular(spec: SequenceSpec, prec: int) -> bool:
    """True iff the sequence is regular on its whole domain: discrete prefix
    check through the analytic stabilization index, continuity beyond."""
    D = _alpha_decreasing_from(spec, prec)
    if D is None:
        end = spec.domain_end
        if end is None:
            return False
        return check_regular(spec, end, prec).ok
    horizon = max(D + 1, 8)
    end = spec.domain_end
    if end is not None:
        horizon = min(horizon, end)
    return check_regular(spec, horizon, prec).ok


class RegularizedSequence:
    """Monotone envelope s of a subexponential sequence, with tail exponents
    t_n = (ln s_n)/n.

    For already-regular input, s_n == c_n and values are available at every
    index via the closed form.  Otherwise values exist on the computed prefix
    (plus the frozen tail of 'hold' tables).
    """

    def __init__(self, spec: SequenceSpec, N: int, prec: int = SEQ_PREC):
        if N < 1:
            raise SequenceError("prefix length must be >= 1")
        end = spec.domain_end
        if end is not None:
            N = min(N, end)
        self.spec = spec
        self.N = N
        self.base_prec = prec
        self.already_regular = _certified_regular(spec, prec)
        self._cache: dict[int, tuple] = {}
        s_log, cert = self._construct(prec)
        self.certificate = cert  # 'analytic' or 'prefix'
        self._cache[prec] = s_log
        if self.already_regular:
            # the envelope of a regular sequence is the sequence itself
            with workprec(prec):
                tol = mpf(2) ** (-(prec - 16))
                for n in (1, min(2, N), min(N, 7), N):
                    diff = abs(s_log[n - 1] - log_evaluate(spec, n, prec))
                    if diff > tol * (1 + abs(s_log[n - 1])):
                        raise SequenceError(
                            "regular sequence failed the envelope identity"
                        )

    # -- construction -------------------------------------------------------

    def _construct(self, prec: int):
        spec, N = self.spec, self.N
        with workprec(prec):
            M = max(4 * N, 1 << 16)
            end = spec.domain_end
            if end is not None:
                M = min(M, end)
            D = _alpha_decreasing_from(spec, prec)
            if D is not None:
                # alpha cannot rise past max(N, D); no need to scan further
                M = min(M, max(N, D))
            # forward pass: u_n = running max of c, alpha_n = ln(u_n)/n
            alphas = []
            log_u = None
            for n in range(1, M + 1):
                lc = log_evaluate(spec, n, prec)
                log_u = lc if log_u is None else max(log_u, lc)
                alphas.append(log_u / n)
            # suffix max: alpha*_n over the window [n, M]
            astar = [mpf(0)] * N
            running = mpf("-inf")
            for n in range(M, 0, -1):
                if alphas[n - 1] >= running:
                    running = alphas[n - 1]
                if n <= N:
                    astar[n - 1] = running
            if D is not None and D > M:
                # the alpha peak sits past the window; by unimodality the
                # integers around it dominate the omitted range (c is
                # increasing there, so u == c and alpha = ln(c_k)/k)
                peak = max(
                    log_evaluate(spec, j, prec) / j
                    for j in (max(1, D - 1), D, D + 1)
                )
                for i in range(N):
                    if peak > astar[i]:
                        astar[i] = peak
            cert = "analytic" if D is not None else "prefix"
            # s_n = sup_{k<=n} exp(k alpha*_k), tracked in log form
            s_log = []
            best = mpf("-inf")
            for n in range(1, N + 1):
                best = max(best, n * astar[n - 1])
                s_log.append(best)
            return s_log, cert

    def _s_log(self, prec: int):
        if prec not in self._cache:
            self._cache[prec], _ = self._construct(prec)
        return self._cache[prec]

    # -- accessors ----------------------------------------------------------

    def log_value(self, n: int, prec: Optional[int] = None) -> mpf:
        """ln s_n."""
        prec = prec or self.base_prec
        if n < 1:
            raise SequenceError("sequence index must be >= 1")
        end = self.spec.domain_end
        if end is not None and n > end:
            raise HorizonExceeded(
                f"regularized value at {n} beyond finite domain {end}"
            )
        if self.already_regular:
            return log_evaluate(self.spec, n, prec)
        if n <= self.N:
            return self._s_log(prec)[n - 1]
        if self.spec.family == "table" and self.spec.param("extension") == "hold" \
                and self.N >= len(self.spec.param("values")):
            # u is frozen past the table, k alpha*_k is bounded by ln s_N
            return self._s_log(prec)[self.N - 1]
        raise HorizonExceeded(
            f"regularized value at {n} beyond computed prefix {self.N}"
        )

    def value(self, n: int, prec: Optional[int] = None) -> mpf:
        prec = prec or self.base_prec
        with workprec(prec):
            return mp.exp(self.log_value(n, prec))


def regularize(spec: SequenceSpec, N: int, prec: int = SEQ_PREC) -> RegularizedSequence:
    """Build the monotone envelope on the prefix 1..N.

    Requires c_n >= e on the evaluated prefix (lift the input first if it is
    not; see check_regular for the diagnosis).
    """
    end = spec.domain_end
    limit = N if end is None else min(N, end)
    with workprec(prec):
        guard = mpf(2) ** (-(prec - 8))
        floor = mp.e * (1 - guard)
        for n in range(1, limit + 1):
            if evaluate(spec, n, prec) < floor:
                raise SequenceError(
                    f"c_{n} < e; lift the sequence before regularizing"
                )
    return RegularizedSequence(spec, N, prec)


def tail_decay(reg: RegularizedSequence, n: int, prec: Optional[int] = None) -> mpf:
    """t_n = (ln s_n)/n; nonincreasing and -> 0 for subexponential input."""
    prec = prec or reg.base_prec
    with workprec(prec):
        return reg.log_value(n, prec) / n

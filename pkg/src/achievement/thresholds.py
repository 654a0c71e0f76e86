"""Classification thresholds in ``x`` and the per-``x`` region verdict.

All five cut-offs are r-th roots of ratios built from the coefficients and the
envelope constants.  With exact inputs (ints/Fractions, integer ``r``) every
radicand is exact and the root stays exact whenever it is rational.

    d_I   interval above this (up to epsilon)
    d_IM  coarse interval bound, independent of the coefficients
    d_NI  not a finite union of intervals below this
    d_CI  contains an interval above this, from an arithmetic progression
          of length s+1 inside the subsum alphabet
    d_C   Cantor set below this (only meaningful when positive)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import CapExceededError, DomainError
from .function_model import FunctionSpec, PowerEnvelope, Real
from .sequence import Coefficients, is_exact

DEFAULT_ALPHABET_CAP = 20
DEFAULT_AP_CAP = 12
FLOAT_KEY_TOL = 2.0**-30


@dataclass(frozen=True)
class SubsumAlphabet:
    """Sorted distinct values of ``sum c_i k_i`` over ``c_i in {0, 1}``."""

    values: tuple
    exact: bool = True

    def __len__(self):
        return len(self.values)

    def __contains__(self, v):
        return v in self.values


@dataclass(frozen=True)
class APResult:
    """A longest progression ``mu, mu + lam, ..., mu + s*lam`` in the alphabet.

    ``mu_zero_allowed`` records which convention produced it.  When no two-term
    progression exists, ``s = 0`` and ``lam`` is set to the largest alphabet
    value so that it stays positive.
    """

    mu: Real
    lam: Real
    s: int
    mu_zero_allowed: bool = True

    def members(self) -> list:
        return [self.mu + j * self.lam for j in range(self.s + 1)]


@dataclass(frozen=True)
class ThresholdSet:
    d_I: Real
    d_IM: Real
    d_NI: Real
    d_C: Real
    d_CI: Optional[Real]
    ap: Optional[APResult]
    cantorval_window: Optional[tuple]
    epsilon: Real = 1

    def as_dict(self) -> dict:
        return {
            "d_I": self.d_I,
            "d_IM": self.d_IM,
            "d_NI": self.d_NI,
            "d_C": self.d_C,
            "d_CI": self.d_CI,
            "ap": None
            if self.ap is None
            else {
                "mu": self.ap.mu,
                "lambda": self.ap.lam,
                "s": self.ap.s,
                "mu_zero_allowed": self.ap.mu_zero_allowed,
            },
            "cantorval_window": None if self.cantorval_window is None else list(self.cantorval_window),
            "epsilon": self.epsilon,
        }


class Label(str, enum.Enum):
    INTERVAL = "Interval"
    CANTORVAL = "Cantorval"
    CANTOR = "Cantor"
    NOT_FINITE_UNION = "NotFiniteUnion"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class RegionVerdict:
    label: Label
    justification: tuple = field(default_factory=tuple)
    x: Real = 0

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "label": self.label.value,
            "justification": [{"rule": rule, "detail": detail} for rule, detail in self.justification],
        }


# --- helpers ------------------------------------------------------------------


def _int_root(n: int, r: int) -> Optional[int]:
    if n < 0:
        return None
    if r == 2:
        c = math.isqrt(n)
    else:
        c = int(round(n ** (1.0 / r))) if n.bit_length() < 1000 else None
        if c is None:
            lo, hi = 0, 1 << (n.bit_length() // r + 1)
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if mid**r <= n:
                    lo = mid
                else:
                    hi = mid - 1
            c = lo
    for cand in (c - 1, c, c + 1):
        if cand >= 0 and cand**r == n:
            return cand
    return None


def rth_root(value: Real, r: Real) -> Real:
    """``value ** (1/r)``, kept exact when the root of an exact value is rational."""
    if value == 0:
        return value
    if r == 1:
        return value
    if is_exact(value) and is_exact(r) and int(r) == r:
        q = Fraction(value)
        num, den = _int_root(q.numerator, int(r)), _int_root(q.denominator, int(r))
        if num is not None and den is not None:
            return Fraction(num, den)
    return float(value) ** (1.0 / float(r))


def _ratio(num: Real, den: Real) -> Real:
    # int / int would silently become a float
    if is_exact(num) and is_exact(den):
        return Fraction(num) / Fraction(den)
    return num / den


def _clamp0(v: Real) -> Real:
    return v if v > 0 else v - v


def _envelope_of(fn: Union[FunctionSpec, PowerEnvelope]) -> PowerEnvelope:
    return fn.envelope if isinstance(fn, FunctionSpec) else fn


# --- operations -----------------------------------------------------------------


def subsum_alphabet(
    coeffs: Coefficients, cap: int = DEFAULT_ALPHABET_CAP, tol: Optional[float] = None
) -> SubsumAlphabet:
    """All subsums of the coefficients, sorted and deduplicated.

    Exact coefficients are deduplicated exactly; float coefficients merge
    values closer than ``tol`` (default ``2**-30 * K``).
    """
    if coeffs.m > cap:
        raise CapExceededError(f"m={coeffs.m} exceeds the alphabet cap {cap}")
    sums = {0 * coeffs.K}
    for k in coeffs.k:
        sums |= {s + k for s in sums}
    ordered = sorted(sums)
    if coeffs.exact:
        return SubsumAlphabet(tuple(ordered), exact=True)
    tol = FLOAT_KEY_TOL * float(coeffs.K) if tol is None else tol
    kept = [ordered[0]]
    for v in ordered[1:]:
        if v - kept[-1] > tol:
            kept.append(v)
    # keep K itself as the top representative
    kept[-1] = ordered[-1]
    return SubsumAlphabet(tuple(float(v) for v in kept), exact=False)


class _Lookup:
    """Membership test on alphabet values; quantized for floats."""

    def __init__(self, values, exact: bool, tol: float):
        self.exact = exact
        if exact:
            self.table = {v: v for v in values}
        else:
            self.tol = tol
            self.table = {}
            for v in values:
                self.table.setdefault(round(v / tol), v)

    def find(self, v):
        if self.exact:
            return self.table.get(v)
        key = round(v / self.tol)
        for k in (key, key - 1, key + 1):
            hit = self.table.get(k)
            if hit is not None and abs(hit - v) <= self.tol:
                return hit
        return None


def ap_search(
    alphabet: SubsumAlphabet,
    allow_mu_zero: bool = True,
    tol: Optional[float] = None,
    cap_bits: int = DEFAULT_AP_CAP,
) -> APResult:
    """Longest arithmetic progression contained in the alphabet.

    Each pair ``(u, v)`` with ``u < v`` fixes a start and a step; pairs whose
    predecessor ``u - (v - u)`` is also present are skipped, since the
    progression through them is counted from its true start.  Every pair is
    therefore walked at most once per step, giving quadratic work with
    memory linear in the alphabet.  Ties prefer the smaller step, then the
    smaller start.
    """
    values = list(alphabet.values)
    if not values:
        raise DomainError("alphabet is empty")
    if len(values) > 2**cap_bits:
        raise CapExceededError(f"alphabet of size {len(values)} exceeds 2**{cap_bits}")
    if not allow_mu_zero:
        values = [v for v in values if v > 0]
    if not values:
        raise DomainError("alphabet has no positive value")
    top = max(values)
    if tol is None:
        tol = FLOAT_KEY_TOL * float(top)
    look = _Lookup(values, alphabet.exact, tol)

    best = None  # (s, lam, mu)
    for i, u in enumerate(values):
        for v in values[i + 1 :]:
            lam = v - u
            if look.find(u - lam) is not None:
                continue
            s, cur = 1, v
            while True:
                nxt = look.find(cur + lam)
                if nxt is None:
                    break
                s, cur = s + 1, nxt
            if best is None or s > best[0] or (s == best[0] and (lam, u) < best[1:]):
                best = (s, lam, u)
    s, lam, mu = best if best is not None else (0, top, values[0])
    return APResult(mu=mu, lam=lam, s=s, mu_zero_allowed=allow_mu_zero)


def compute_thresholds(
    coeffs: Coefficients,
    envelope: Union[PowerEnvelope, FunctionSpec],
    allow_mu_zero: bool = True,
    alphabet_cap: int = DEFAULT_ALPHABET_CAP,
) -> ThresholdSet:
    """All five thresholds plus the progression behind ``d_CI``.

    Negative radicands are clamped to 0 before taking roots; ``d_C = 0``
    therefore means the Cantor criterion never applies.  ``d_CI`` and ``ap``
    are ``None`` when the coefficient count exceeds ``alphabet_cap``.
    """
    env = _envelope_of(envelope)
    a, b, r = env.a, env.b, env.r
    k, U, L, K = coeffs.k, coeffs.U, coeffs.L, coeffs.K
    km = k[-1]
    upper_ratio = max(_clamp0(_ratio(b * kj - a * Uj, b * kj + a * Lj)) for kj, Uj, Lj in zip(k, U, L))
    lower_ratio = min(_clamp0(_ratio(a * kj - b * Uj, a * kj + b * Lj)) for kj, Uj, Lj in zip(k, U, L))
    d_I = rth_root(upper_ratio, r)
    d_IM = rth_root(_ratio(b, a + b), r)
    d_NI = rth_root(_ratio(a * km, b * K + a * km), r)
    d_C = rth_root(lower_ratio, r)

    ap = d_CI = window = None
    if coeffs.m <= alphabet_cap:
        ap = ap_search(subsum_alphabet(coeffs, cap=alphabet_cap), allow_mu_zero=allow_mu_zero)
        d_CI = rth_root(_ratio(b, ap.s * a + b), r)
        if d_CI < d_NI:
            window = (d_CI, d_NI)
    if not (coeffs.exact and all(is_exact(c) for c in (a, b, r))):
        d_I, d_IM, d_NI, d_C = (float(d) for d in (d_I, d_IM, d_NI, d_C))
        if d_CI is not None:
            d_CI = float(d_CI)
            window = None if window is None else (d_CI, d_NI)
    return ThresholdSet(d_I, d_IM, d_NI, d_C, d_CI, ap, window, env.epsilon)


def cantorval_necessary_check(
    coeffs: Coefficients, envelope: Union[PowerEnvelope, FunctionSpec], s: int
) -> bool:
    """``b < a * sqrt(s * k_m / K)``, compared in squared form.

    Squaring both sides of ``d_CI < d_NI`` gives exactly this inequality, so
    a failed check means an empty Cantorval window.
    """
    if s < 0:
        raise DomainError(f"s must be non-negative, got {s}")
    env = _envelope_of(envelope)
    return env.b * env.b * coeffs.K < env.a * env.a * s * coeffs.k[-1]


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return f"{float(v):.12g}"


def classify(
    coeffs: Coefficients,
    fn: Union[FunctionSpec, PowerEnvelope],
    x: Real,
    thresholds: Optional[ThresholdSet] = None,
    allow_mu_zero: bool = True,
) -> RegionVerdict:
    """Region verdict for ``x`` in ``(0, 1)``.

    Precedence: Interval, Cantorval, Cantor, NotFiniteUnion, Indeterminate.
    The justification lists every criterion whose hypothesis holds at ``x``,
    not only the one that decided the label.
    """
    if not 0 < x < 1:
        raise DomainError(f"classification requires 0 < x < 1, got {x}")
    env = _envelope_of(fn)
    th = thresholds if thresholds is not None else compute_thresholds(coeffs, env, allow_mu_zero)
    eps = env.epsilon
    X = _fmt(x)
    held = []

    interval = th.d_I <= x <= eps
    if interval:
        note = " (closed endpoint x = epsilon)" if x == eps else ""
        held.append(("interval", f"d_I={_fmt(th.d_I)} <= x={X} <= epsilon={_fmt(eps)}{note}"))
    if th.d_IM <= x <= eps:
        held.append(("interval-coarse", f"d_IM={_fmt(th.d_IM)} <= x={X} <= epsilon={_fmt(eps)}"))
    if th.d_CI is not None and th.d_CI <= x < eps:
        held.append(
            ("contains-interval", f"d_CI={_fmt(th.d_CI)} <= x={X} < epsilon={_fmt(eps)} (s={th.ap.s})")
        )
    cantorval = th.cantorval_window is not None and th.d_CI <= x < th.d_NI and x < eps
    if cantorval:
        held.append(("cantorval", f"d_CI={_fmt(th.d_CI)} <= x={X} < d_NI={_fmt(th.d_NI)}"))
    cantor = th.d_C > 0 and x < min(eps, th.d_C)
    if cantor:
        held.append(("cantor", f"0 < x={X} < min(epsilon, d_C={_fmt(th.d_C)})"))
    not_finite = x < min(eps, th.d_NI)
    if not_finite:
        held.append(("not-finite-union", f"0 < x={X} < min(epsilon, d_NI={_fmt(th.d_NI)})"))

    if interval:
        label = Label.INTERVAL
    elif cantorval:
        label = Label.CANTORVAL
    elif cantor:
        label = Label.CANTOR
    elif not_finite:
        label = Label.NOT_FINITE_UNION
    else:
        label = Label.INDETERMINATE
    return RegionVerdict(label, tuple(held), x)

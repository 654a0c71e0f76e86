"""Term-versus-tail comparisons for non-increasing positive series.

For such a series the subsum set is a compact interval exactly when every term
is at most the tail after it, is a finite union of intervals exactly when that
holds for all but finitely many terms, and is a Cantor set when every term
beyond some index exceeds its tail.  This module certifies those comparisons in
two ways:

* per index, with the certified tail bracket from :mod:`achievement.sequence`;
* uniformly over each residue class ``n = j (mod m)``, using the power
  envelope.  A residue verdict covers infinitely many indices at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DomainError
from .function_model import FunctionSpec, PowerEnvelope, Real
from .sequence import (
    Coefficients,
    TailBracket,
    coefficient_index,
    round_down,
    round_up,
    tail_bracket,
    term,
)

MAX_TRUNCATION = 2**14


class Verdict(str, enum.Enum):
    LE = "LE"
    GT = "GT"
    UNDECIDED = "Undecided"


class ResidueVerdict(str, enum.Enum):
    LE_ALL = "LE-all-n"
    GT_ALL = "GT-all-n"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class TermComparison:
    n: int
    w_n: Real
    tail: TailBracket
    verdict: Verdict

    @property
    def margin(self) -> Real:
        """Certified distance to the undecided zone (0 for an exact tie)."""
        if self.verdict is Verdict.LE:
            return self.tail.lower - self.w_n
        if self.verdict is Verdict.GT:
            return self.w_n - self.tail.upper
        return 0 * self.w_n

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "w_n": self.w_n,
            "tail_lower": self.tail.lower,
            "tail_upper": self.tail.upper,
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class ResidueCertificate:
    x: Real
    per_j: tuple

    @property
    def all_le(self) -> bool:
        return all(v is ResidueVerdict.LE_ALL for v in self.per_j)

    @property
    def all_gt(self) -> bool:
        return all(v is ResidueVerdict.GT_ALL for v in self.per_j)

    def verdict_for(self, n: int) -> ResidueVerdict:
        return self.per_j[coefficient_index(n, len(self.per_j))]

    def as_dict(self) -> dict:
        return {"x": self.x, "per_j": [v.value for v in self.per_j]}


@dataclass(frozen=True)
class KakeyaScan:
    """Summary of a finite scan plus the residue certificate.

    ``certified`` names what holds for every index (``"compact-interval"``,
    ``"cantor"`` or ``"not-finite-union"``) and is ``None`` when the residue
    certificate is silent; ``evidence`` describes the finite scan only.
    """

    x: Real
    n_max: int
    comparisons: tuple
    certificate: ResidueCertificate
    all_le: bool
    all_gt: bool
    first_gt: Optional[int]
    gt_classes: tuple
    le_classes: tuple
    certified: Optional[str]
    evidence: str

    def as_dict(self) -> dict:
        counts = {v.value: 0 for v in Verdict}
        for c in self.comparisons:
            counts[c.verdict.value] += 1
        return {
            "x": self.x,
            "n_max": self.n_max,
            "all_le": self.all_le,
            "all_gt": self.all_gt,
            "first_gt": self.first_gt,
            "gt_classes": list(self.gt_classes),
            "le_classes": list(self.le_classes),
            "verdict_counts": counts,
            "certificate": self.certificate.as_dict(),
            "certified": self.certified,
            "evidence": self.evidence,
            "comparisons": [c.as_dict() for c in self.comparisons],
        }


def compare_term(
    coeffs: Coefficients,
    spec: FunctionSpec,
    n: int,
    x: Real,
    truncation: Optional[int] = None,
) -> TermComparison:
    """Compare ``w_n(x)`` with the certified bracket of ``W_n(x)``.

    LE needs ``w_n <= lower`` and GT needs ``w_n > upper``; anything in
    between is Undecided.  Float rounding lives in the bracket, not in the
    comparison, so exact ties certify LE only in exact arithmetic.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not x > 0:
        raise DomainError(f"comparison requires x > 0, got {x}")
    w = term(coeffs, spec, n, x)
    tail = tail_bracket(coeffs, spec, n, x, truncation)
    if w <= tail.lower:
        verdict = Verdict.LE
    elif w > tail.upper:
        verdict = Verdict.GT
    else:
        verdict = Verdict.UNDECIDED
    return TermComparison(n, w, tail, verdict)


def compare_term_escalating(
    coeffs: Coefficients,
    spec: FunctionSpec,
    n: int,
    x: Real,
    truncation: Optional[int] = None,
    max_truncation: int = MAX_TRUNCATION,
) -> TermComparison:
    """:func:`compare_term`, doubling the truncation while Undecided."""
    t = truncation if truncation is not None else n + 8 * coeffs.m
    result = compare_term(coeffs, spec, n, x, t)
    while result.verdict is Verdict.UNDECIDED and t < max_truncation:
        t = min(2 * t, max_truncation)
        result = compare_term(coeffs, spec, n, x, t)
    return result


def residue_certificate(
    coeffs: Coefficients, envelope: Union[PowerEnvelope, FunctionSpec], x: Real
) -> ResidueCertificate:
    """Uniform verdict for each residue class of the index.

    With ``q = x**r / (1 - x**r)``, every ``n`` with ``g(n) = j`` satisfies
    ``w_n <= W_n`` once ``b*k_j <= a*(U_j + K*q)``, and ``w_n > W_n`` once
    ``a*k_j > b*(U_j + K*q)``.  Outside ``(0, epsilon]`` the envelope says
    nothing and every class is Undecided.
    """
    if not 0 < x < 1:
        raise DomainError(f"residue certificate requires 0 < x < 1, got {x}")
    env = envelope.envelope if isinstance(envelope, FunctionSpec) else envelope
    if x > env.epsilon:
        return ResidueCertificate(x, (ResidueVerdict.UNDECIDED,) * coeffs.m)
    xr = x**env.r
    q = xr / (1 - xr)
    out = []
    for kj, Uj in zip(coeffs.k, coeffs.U):
        rest = Uj + coeffs.K * q
        if round_up(env.b * kj) <= round_down(env.a * rest):
            out.append(ResidueVerdict.LE_ALL)
        elif round_down(env.a * kj) > round_up(env.b * rest):
            out.append(ResidueVerdict.GT_ALL)
        else:
            out.append(ResidueVerdict.UNDECIDED)
    return ResidueCertificate(x, tuple(out))


def khm_scan(
    coeffs: Coefficients,
    spec: FunctionSpec,
    x: Real,
    n_max: int = 64,
    truncation: Optional[int] = None,
) -> KakeyaScan:
    """Scan ``n = 1..n_max`` and combine it with the residue certificate.

    Statements about all (or all but finitely many) indices come only from
    the residue certificate; the scan itself is reported as evidence.
    """
    m = coeffs.m
    if n_max < m:
        raise DomainError(f"n_max must be at least m={m}")
    comps = []
    for n in range(1, n_max + 1):
        t = truncation if truncation is not None else n_max + 8 * m
        comps.append(compare_term_escalating(coeffs, spec, n, x, max(t, n)))
    cert = residue_certificate(coeffs, spec, x)

    verdicts = [c.verdict for c in comps]
    all_le = all(v is Verdict.LE for v in verdicts)
    all_gt = all(v is Verdict.GT for v in verdicts)
    first_gt = next((c.n for c in comps if c.verdict is Verdict.GT), None)
    by_class = {j: {c.verdict for c in comps if coefficient_index(c.n, m) == j - 1} for j in range(1, m + 1)}
    gt_classes = tuple(j for j, vs in by_class.items() if vs == {Verdict.GT})
    le_classes = tuple(j for j, vs in by_class.items() if vs == {Verdict.LE})

    if cert.all_le:
        certified = "compact-interval"
    elif cert.all_gt:
        certified = "cantor"
    elif ResidueVerdict.GT_ALL in cert.per_j:
        certified = "not-finite-union"
    else:
        certified = None

    if all_le:
        evidence = "LE at every scanned n"
    elif all_gt:
        evidence = "GT at every scanned n"
    elif len(gt_classes) + len(le_classes) == m:
        evidence = f"mixed: GT exactly at n = {list(gt_classes)} (mod {m}), LE elsewhere"
    else:
        evidence = "mixed or undecided pattern"
    return KakeyaScan(
        x, n_max, tuple(comps), cert, all_le, all_gt, first_gt, gt_classes, le_classes, certified, evidence
    )

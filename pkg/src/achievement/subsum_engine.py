"""Finite-depth enumeration of subsums, certified covers and gaps.

A depth-``N`` cloud holds every sum ``c_1 w_1 + ... + c_N w_N`` with
``c_n in {0, 1}``.  Any subsum of the whole series lies within the tail
``W_N`` above one of those points, so fattening every point by a certified
upper bound ``T >= W_N`` gives an outer cover of the achievement set.  Gaps in
that cover are certified to be free of subsums; the cover components are only
"no gap found at this depth", never certified intervals.

Clouds are built by iterated sorted merge of ``S`` and ``S + w_n`` with
deduplication, so memory follows the number of distinct points, not ``2**N``.

Two modes:

* ``float``: points are float64, merged at ``merge_tol``; ``point_error``
  bounds how far a true depth-``N`` subsum can sit from its nearest point.
* ``exact``: ``f`` is the identity and ``x``, ``k_i`` are rationals.  Points
  are stored as integer numerators over one common denominator and the tail
  is the exact geometric remainder.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapExceededError, DomainError
from .function_model import BUILTINS, FunctionSpec, Real
from .sequence import Coefficients, block_of, tail_bracket, terms

DEPTH_CAP_ENV = "ACHIEVEMENT_DEPTH_CAP"
FLOAT_DEPTH_CAP = 24
EXACT_DEPTH_CAP = 20
DEFAULT_MERGE_REL = 2.0**-40
_INT64_SAFE = 2**62
_OUTER_CHUNK = 2**22
_MASK_WORK = 4 * 10**8
_FFT_FROM = 5 * 10**7
_FFT_MAX = 2**24


def depth_cap(mode: str) -> int:
    override = os.environ.get(DEPTH_CAP_ENV)
    if override:
        return int(override)
    return EXACT_DEPTH_CAP if mode == "exact" else FLOAT_DEPTH_CAP


@dataclass(frozen=True, eq=False)
class SubsumCloud:
    """Sorted distinct depth-``N`` subsums plus a certified tail radius.

    In exact mode ``values`` holds integer numerators over ``denominator``;
    use :attr:`points` for the rational values.
    """

    x: Real
    depth: int
    mode: str
    values: np.ndarray
    tail_radius: Real
    merge_tol: float = 0.0
    point_error: float = 0.0
    denominator: int = 1

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self):
        return len(self.values)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def points(self) -> Sequence[Real]:
        if self.exact:
            d = self.denominator
            return [Fraction(int(v), d) for v in self.values]
        return self.values

    def point(self, i: int) -> Real:
        v = self.values[i]
        return Fraction(int(v), self.denominator) if self.exact else float(v)

    @property
    def max_point(self) -> Real:
        return self.point(-1)

    @property
    def extent(self) -> Real:
        """Upper end of the cover: largest point plus the tail radius."""
        return self.max_point + self.tail_radius


@dataclass(frozen=True)
class IntervalCover:
    components: tuple
    total_length: Real

    @property
    def count(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class GapReport:
    """Open intervals ``(start, start + length)`` free of subsums."""

    gaps: tuple

    @property
    def count(self) -> int:
        return len(self.gaps)

    @property
    def largest_gap(self) -> Optional[tuple]:
        if not self.gaps:
            return None
        return max(self.gaps, key=lambda g: g[1])


# --- enumeration -----------------------------------------------------------------


def _dedup_sorted(a: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Collapse runs closer than ``tol``; returns (representatives, widest run)."""
    if len(a) < 2:
        return a, 0.0
    if tol <= 0:
        keep = np.empty(len(a), dtype=bool)
        keep[0] = True
        np.not_equal(a[1:], a[:-1], out=keep[1:])
        return a[keep], 0.0
    cut = np.flatnonzero(np.diff(a) > tol) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut - 1, [len(a) - 1]))
    reps = a[starts]
    # the top run keeps its largest member so the maximum subsum survives
    reps[-1] = a[-1]
    width = float(np.max(a[ends] - a[starts]))
    return reps, width


def _merge_step(S: np.ndarray, w, tol: float) -> tuple[np.ndarray, float]:
    merged = np.concatenate((S, S + w))
    merged.sort(kind="stable")
    return _dedup_sorted(merged, tol)


def enumerate_subsums(
    coeffs: Coefficients,
    spec: FunctionSpec,
    x: Real,
    N: int,
    merge_tol: Optional[float] = None,
    mode: str = "float",
    cap: Optional[int] = None,
) -> SubsumCloud:
    """Depth-``N`` subsum cloud of ``w_1(x), ..., w_N(x)``.

    ``merge_tol`` defaults to ``2**-40`` times the partial sum.  ``mode="exact"``
    delegates to :func:`exact_enumerate` and requires the identity.
    """
    if mode == "exact":
        if not spec.is_identity:
            raise DomainError("exact mode supports only the identity function")
        return exact_enumerate(coeffs, x, N, cap=cap)
    if mode != "float":
        raise DomainError(f"unknown mode {mode!r}")
    cap = depth_cap("float") if cap is None else cap
    if N < 0:
        raise DomainError(f"depth must be >= 0, got {N}")
    if N > cap:
        raise CapExceededError(f"depth {N} exceeds the float cap {cap}")
    if spec.envelope_only:
        raise DomainError(f"function {spec.name!r} is envelope-only; enumeration needs an evaluator")
    if not 0 < x < 1:
        raise DomainError(f"enumeration requires 0 < x < 1, got {x}")
    ws = [float(w) for w in terms(coeffs, spec, 1, N, x)]
    total = 0.0
    for w in ws:
        total += w
    tol = DEFAULT_MERGE_REL * total if merge_tol is None else float(merge_tol)
    S = np.zeros(1)
    err = 0.0
    for w in ws:
        S, width = _merge_step(S, w, tol)
        err += width
    # each point is a chain of at most N roundings, each below 2**-53 * total
    err += N * 2.0**-52 * total
    T = float(tail_bracket(coeffs, spec, N, float(x)).upper)
    return SubsumCloud(float(x), N, "float", S, T, tol, err, 1)


def _as_exact_coeffs(coeffs) -> Coefficients:
    if isinstance(coeffs, Coefficients):
        values = coeffs.k
    else:
        values = tuple(coeffs)
    try:
        values = tuple(Fraction(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"exact mode needs rational coefficients: {exc}") from None
    return Coefficients.from_values(values)


def _rescale(values: np.ndarray, factor: int, bound: int) -> np.ndarray:
    """Numerators times ``factor``; stays int64 while ``bound`` allows."""
    if values.dtype != object and bound < _INT64_SAFE:
        return values * np.int64(factor)
    return np.array([int(v) * factor for v in values], dtype=object)


def _int_array(values: Iterable[int], bound: int) -> np.ndarray:
    if bound < _INT64_SAFE:
        return np.array(list(values), dtype=np.int64)
    return np.array(list(values), dtype=object)


def exact_enumerate(coeffs, x: Real, N: int, cap: Optional[int] = None) -> SubsumCloud:
    """Exact depth-``N`` cloud for ``f(x) = x`` with rational ``x`` and coefficients.

    The tail radius is the exact remainder ``W_N``, so every reported gap
    is certified with no numerical slack.
    """
    cap = depth_cap("exact") if cap is None else cap
    if N < 0:
        raise DomainError(f"depth must be >= 0, got {N}")
    if N > cap:
        raise CapExceededError(f"depth {N} exceeds the exact cap {cap}")
    if isinstance(x, float):
        raise DomainError("exact mode needs a rational x, not a float")
    x = Fraction(x)
    if not 0 < x < 1:
        raise DomainError(f"enumeration requires 0 < x < 1, got {x}")
    co = _as_exact_coeffs(coeffs)
    m = co.m
    blocks = block_of(N, m) if N else 0
    denom = math.lcm(*(k.denominator for k in co.k)) * x.denominator**blocks
    nums = []
    for n in range(1, N + 1):
        w = co.k[(n - 1) % m] * x ** block_of(n, m) * denom
        assert w.denominator == 1
        nums.append(int(w))
    bound = sum(nums)
    S = _int_array([0], bound)
    for w in nums:
        S, _ = _merge_step(S, w, 0)
    T = tail_bracket(co, BUILTINS["identity"], N, x, truncation=N).upper
    return SubsumCloud(x, N, "exact", S, T, 0.0, 0.0, denom)


# --- covers and gaps ------------------------------------------------------------


def _gap_mask(cloud: SubsumCloud) -> np.ndarray:
    v = cloud.values
    if len(v) < 2:
        return np.zeros(0, dtype=bool)
    d = np.diff(v)
    if not cloud.exact:
        return d > cloud.tail_radius + 2 * cloud.point_error
    t = Fraction(cloud.tail_radius) * cloud.denominator
    u, q = t.numerator, t.denominator
    if d.dtype != object and int(d.max()) * q < _INT64_SAFE and u < _INT64_SAFE:
        return d * q > u
    return np.array([int(di) * q > u for di in d], dtype=bool)


def cover(cloud: SubsumCloud) -> IntervalCover:
    """Union of ``[p, p + T]`` over the cloud, merged into disjoint components.

    Float clouds are additionally fattened by ``point_error`` on both sides.
    """
    v = cloud.values
    gaps = np.flatnonzero(_gap_mask(cloud))
    starts = np.concatenate(([0], gaps + 1)).astype(np.int64)
    ends = np.concatenate((gaps, [len(v) - 1])).astype(np.int64)
    T = cloud.tail_radius
    if cloud.exact:
        D = cloud.denominator
        comps = tuple(
            (Fraction(int(v[s]), D), Fraction(int(v[e]), D) + T) for s, e in zip(starts, ends)
        )
        spread = sum(int(v[e]) - int(v[s]) for s, e in zip(starts, ends))
        total = Fraction(spread, D) + len(comps) * T
        return IntervalCover(comps, total)
    e = cloud.point_error
    lo = np.maximum(v[starts] - e, 0.0)
    hi = v[ends] + T + e
    comps = tuple(zip(lo.tolist(), hi.tolist()))
    return IntervalCover(comps, float(np.sum(hi - lo)))


def gap_report(cloud: SubsumCloud, cov: Optional[IntervalCover] = None) -> GapReport:
    cov = cover(cloud) if cov is None else cov
    c = cov.components
    return GapReport(tuple((c[i][1], c[i + 1][0] - c[i][1]) for i in range(len(c) - 1)))


# --- Minkowski sums ------------------------------------------------------------


def _sumset_fft(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    # support of the convolution of two indicator vectors; counts are small
    # integers, so rounding error stays far below the 0.5 cut
    size = 1 << (n - 1).bit_length()
    ia = np.zeros(size)
    ia[a] = 1.0
    ib = np.zeros(size)
    ib[b] = 1.0
    conv = np.fft.irfft(np.fft.rfft(ia) * np.fft.rfft(ib), size)[:n]
    return np.flatnonzero(conv > 0.5).astype(np.int64)


def _sumset_int(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    a_top, b_top = int(a[-1]), int(b[-1])
    native = a.dtype != object and b.dtype != object
    mask_work = len(b) * (a_top + 1)
    if native and mask_work > _FFT_FROM and a_top + b_top < _FFT_MAX:
        return _sumset_fft(a, b, a_top + b_top + 1)
    if native and mask_work <= _MASK_WORK:
        ind = np.zeros(a_top + 1, dtype=bool)
        ind[a] = True
        mask = np.zeros(a_top + b_top + 1, dtype=bool)
        for shift in b.tolist():
            mask[shift : shift + a_top + 1] |= ind
        return np.flatnonzero(mask).astype(np.int64)
    step = max(1, _OUTER_CHUNK // len(a))
    parts = [np.unique(np.add.outer(b[i : i + step], a).ravel()) for i in range(0, len(b), step)]
    return np.unique(np.concatenate(parts))


def minkowski_sum(A: SubsumCloud, B: SubsumCloud) -> SubsumCloud:
    """``{a + b}`` over both clouds; the tail radii add."""
    if A.mode != B.mode:
        raise DomainError(f"cannot add clouds of modes {A.mode!r} and {B.mode!r}")
    if A.x != B.x:
        raise DomainError(f"cannot add clouds at different x ({A.x} vs {B.x})")
    T = A.tail_radius + B.tail_radius
    if A.exact:
        D = math.lcm(A.denominator, B.denominator)
        fa, fb = D // A.denominator, D // B.denominator
        bound = (int(A.values[-1]) * fa) + (int(B.values[-1]) * fb)
        a = _rescale(A.values, fa, bound)
        b = _rescale(B.values, fb, bound)
        return SubsumCloud(A.x, A.depth + B.depth, "exact", _sumset_int(a, b), T, 0.0, 0.0, D)
    tol = max(A.merge_tol, B.merge_tol)
    a, b = (A.values, B.values) if len(A) >= len(B) else (B.values, A.values)
    step = max(1, _OUTER_CHUNK // len(a))
    merged = np.concatenate([np.add.outer(b[i : i + step], a).ravel() for i in range(0, len(b), step)])
    merged.sort()
    S, width = _dedup_sorted(merged, tol)
    err = A.point_error + B.point_error + width + 2.0**-52 * float(S[-1])
    return SubsumCloud(A.x, A.depth + B.depth, "float", S, T, tol, err, 1)


def singleton_cloud(x: Real, mode: str = "float") -> SubsumCloud:
    """The cloud ``{0}`` with zero radius: the neutral element of :func:`minkowski_sum`."""
    if mode == "exact":
        return SubsumCloud(Fraction(x), 0, "exact", np.zeros(1, dtype=np.int64), Fraction(0), denominator=1)
    return SubsumCloud(float(x), 0, "float", np.zeros(1), 0.0)


# --- heuristic trichotomy evidence ---------------------------------------------


@dataclass(frozen=True)
class EvidenceRow:
    depth: int
    points: int
    components: int
    total_length: float
    normalized_length: float
    largest_gap: float


@dataclass(frozen=True)
class EvidenceReport:
    """Finite-depth trend of the cover.  Always HEURISTIC: no finite data
    decides the topology of the limit set."""

    x: Real
    rows: tuple
    trend: str
    heuristic: bool = True

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "heuristic": self.heuristic,
            "label": "HEURISTIC",
            "trend": self.trend,
            "rows": [r.__dict__ for r in self.rows],
        }


# trend thresholds; see _trend
CANTORVAL_MIN_FRACTION = 0.1
DECAY_PER_TERM = 0.97


def _trend(rows: Sequence[EvidenceRow]) -> str:
    counts = [r.components for r in rows]
    fractions = [r.normalized_length for r in rows]
    if all(c == 1 for c in counts):
        return "interval-like"
    if len(rows) < 2 or counts[-1] <= counts[0]:
        return "inconclusive"
    span = rows[-1].depth - rows[0].depth
    rate = (fractions[-1] / fractions[0]) ** (1 / span) if fractions[0] > 0 else 0.0
    # late-depth rate isolates the limit behaviour from early transients
    half = len(rows) // 2
    late_span = rows[-1].depth - rows[half].depth
    late_rate = (fractions[-1] / fractions[half]) ** (1 / late_span) if late_span else rate
    if min(fractions) > CANTORVAL_MIN_FRACTION and late_rate >= DECAY_PER_TERM:
        return "cantorval-like"
    if late_rate < DECAY_PER_TERM and all(f2 <= f1 for f1, f2 in zip(fractions, fractions[1:])):
        return "cantor-like"
    return "inconclusive"


def trichotomy_evidence(
    coeffs: Coefficients,
    spec: FunctionSpec,
    x: Real,
    depths: Sequence[int],
    mode: str = "float",
    cap: Optional[int] = None,
) -> EvidenceReport:
    """Cover statistics across increasing depths and a heuristic trend label.

    Labels: ``interval-like`` (one component throughout), ``cantor-like``
    (components multiply while the covered fraction decays geometrically),
    ``cantorval-like`` (components multiply while more than a tenth of the
    hull stays covered without decaying), otherwise ``inconclusive``.
    """
    depths = list(depths)
    if any(d2 <= d1 for d1, d2 in zip(depths, depths[1:])):
        raise DomainError("depths must be strictly increasing")
    rows = []
    for N in depths:
        cloud = enumerate_subsums(coeffs, spec, x, N, mode=mode, cap=cap)
        cov = cover(cloud)
        gaps = gap_report(cloud, cov)
        extent = cloud.extent
        largest = gaps.largest_gap
        rows.append(
            EvidenceRow(
                depth=N,
                points=len(cloud),
                components=cov.count,
                total_length=float(cov.total_length),
                normalized_length=float(cov.total_length / extent),
                largest_gap=0.0 if largest is None else float(largest[1]),
            )
        )
    return EvidenceReport(x, tuple(rows), _trend(rows))


# --- export --------------------------------------------------------------------


def render_number(v, float_format: str = "repr"):
    """Exact values become ``"p/q"`` strings; floats stay floats (or ``.17g`` text)."""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if float_format == "text" else float(v)
    return v


def cloud_to_dict(cloud: SubsumCloud, include_points: bool = True) -> dict:
    cov = cover(cloud)
    gaps = gap_report(cloud, cov)
    largest = gaps.largest_gap
    out = {
        "x": render_number(cloud.x),
        "depth": cloud.depth,
        "mode": cloud.mode,
        "point_count": len(cloud),
        "max_point": render_number(cloud.max_point),
        "tail_radius": render_number(cloud.tail_radius),
        "merge_tol": cloud.merge_tol,
        "point_error": cloud.point_error,
        "cover": {
            "count": cov.count,
            "total_length": render_number(cov.total_length),
            "components": [[render_number(lo), render_number(hi)] for lo, hi in cov.components],
        },
        "gaps": {
            "count": gaps.count,
            "largest": None if largest is None else [render_number(largest[0]), render_number(largest[1])],
            "gaps": [[render_number(s), render_number(g)] for s, g in gaps.gaps],
        },
    }
    if include_points:
        out["points"] = [render_number(p) for p in cloud.points]
    return out


def cloud_csv_rows(cloud: SubsumCloud) -> list[list[str]]:
    rows = [["index", "point"]]
    for i, p in enumerate(cloud.points):
        rows.append([str(i), str(render_number(p, "text"))])
    return rows


# --- partition identity --------------------------------------------------------


@dataclass(frozen=True)
class PartitionCheck:
    part1: tuple
    part2: tuple
    full_points: int
    sum_points: int
    equal: bool
    tails_equal: bool


def bipartitions(k: Sequence[Real]) -> list[tuple[tuple, tuple]]:
    """Splits of the coefficient positions into two non-empty parts (each split once)."""
    m = len(k)
    out = []
    for mask in range(1, 2**m - 1):
        if not mask & 1:
            continue
        p1 = tuple(k[i] for i in range(m) if mask >> i & 1)
        p2 = tuple(k[i] for i in range(m) if not mask >> i & 1)
        out.append((p1, p2))
    return out


def _same_cloud(A: SubsumCloud, B: SubsumCloud) -> bool:
    if len(A) != len(B):
        return False
    if A.exact:
        D = math.lcm(A.denominator, B.denominator)
        fa, fb = D // A.denominator, D // B.denominator
        bound = max(int(A.values[-1]) * fa, int(B.values[-1]) * fb)
        return bool(np.array_equal(_rescale(A.values, fa, bound), _rescale(B.values, fb, bound)))
    return bool(np.all(np.abs(A.values - B.values) <= A.point_error + B.point_error))


def partition_identity(
    coeffs: Coefficients,
    spec: FunctionSpec,
    x: Real,
    blocks: int,
    mode: str = "exact",
    cap: Optional[int] = None,
) -> list[PartitionCheck]:
    """Check ``E_N(all) = E_N1(part1) + E_N2(part2)`` for every bipartition.

    Depths are block aligned: ``blocks`` full blocks for every series.
    """
    if coeffs.m < 2:
        raise DomainError("a bipartition needs at least two coefficients")
    k = coeffs.k
    full = enumerate_subsums(coeffs, spec, x, blocks * coeffs.m, mode=mode, cap=cap)
    out = []
    for p1, p2 in bipartitions(k):
        c1, c2 = Coefficients.from_values(p1), Coefficients.from_values(p2)
        A = enumerate_subsums(c1, spec, x, blocks * c1.m, mode=mode, cap=cap)
        B = enumerate_subsums(c2, spec, x, blocks * c2.m, mode=mode, cap=cap)
        S = minkowski_sum(A, B)
        if full.exact:
            tails = S.tail_radius == full.tail_radius
        else:
            tails = math.isclose(S.tail_radius, full.tail_radius, rel_tol=1e-9)
        out.append(PartitionCheck(p1, p2, len(full), len(S), _same_cloud(full, S), tails))
    return out

"""The generalized multigeometric sequence and certified bounds on its tails.

For coefficients ``k_1 >= ... >= k_m > 0`` and a function ``f`` the sequence is

    w_n(x) = k_{g(n)} * f(x**p(n)),   g(n) = 1 + (n-1) mod m,   p(n) = floor((m+n-1)/m),

i.e. the coefficients cycle while the power of ``x`` goes up once per block of
``m`` terms.  Indices are 1-based throughout, as in the mathematics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import DomainError
from .function_model import FunctionSpec, Real, evaluate

FLOAT_SLACK = 2.0**-40
DEFAULT_EXTRA_BLOCKS = 8


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def round_down(value: Real) -> Real:
    if isinstance(value, float):
        return value * (1 - FLOAT_SLACK)
    return value


def round_up(value: Real) -> Real:
    if isinstance(value, float):
        return value * (1 + FLOAT_SLACK)
    return value


@dataclass(frozen=True)
class Coefficients:
    """Non-increasing positive scalars ``k_1 >= ... >= k_m > 0``.

    ``U[j-1]`` holds ``U_j = k_{j+1} + ... + k_m`` and ``L[j-1]`` holds
    ``L_j = k_1 + ... + k_j`` so that ``L_j + U_j = K``.
    """

    k: tuple

    def __post_init__(self):
        k = tuple(self.k)
        if not k:
            raise DomainError("at least one coefficient is required")
        if any(not v > 0 for v in k):
            raise DomainError(f"coefficients must be positive, got {k}")
        if any(u < v for u, v in zip(k, k[1:])):
            raise DomainError(f"coefficients must be non-increasing, got {k}")
        object.__setattr__(self, "k", k)
        total = sum(k)
        lows, acc = [], 0
        for v in k:
            acc += v
            lows.append(acc)
        object.__setattr__(self, "K", total)
        object.__setattr__(self, "L", tuple(lows))
        object.__setattr__(self, "U", tuple(total - lo for lo in lows))

    @classmethod
    def from_values(cls, values: Iterable[Real]) -> "Coefficients":
        """Build from values in any order (sorted into non-increasing order)."""
        return cls(tuple(sorted(values, reverse=True)))

    @property
    def m(self) -> int:
        return len(self.k)

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.k)

    def remaining(self, consumed: int) -> Real:
        """Sum of the coefficients left in a block after ``consumed`` of them."""
        return self.K if consumed == 0 else self.U[consumed - 1]


@dataclass(frozen=True)
class TailBracket:
    lower: Real
    upper: Real

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    @property
    def width(self) -> Real:
        return self.upper - self.lower

    def contains(self, value: Real) -> bool:
        return self.lower <= value <= self.upper


def block_of(n: int, m: int) -> int:
    return (n - 1) // m + 1


def coefficient_index(n: int, m: int) -> int:
    """0-based position of ``k_{g(n)}`` in the coefficient tuple."""
    return (n - 1) % m


def _check_x(spec: FunctionSpec, x: Real) -> None:
    if x < 0 or x > spec.envelope.epsilon:
        raise DomainError(f"x={x} outside [0, {spec.envelope.epsilon}]")


def _block_values(spec: FunctionSpec, x: Real, first: int, last: int) -> dict[int, Real]:
    return {p: evaluate(spec, x**p) for p in range(first, last + 1)}


def term(coeffs: Coefficients, spec: FunctionSpec, n: int, x: Real) -> Real:
    """The ``n``-th term ``w_n(x)``."""
    if n < 1:
        raise DomainError(f"term index must be >= 1, got {n}")
    _check_x(spec, x)
    m = coeffs.m
    return coeffs.k[coefficient_index(n, m)] * evaluate(spec, x ** block_of(n, m))


def terms(coeffs: Coefficients, spec: FunctionSpec, first: int, last: int, x: Real) -> list:
    """Terms ``w_first .. w_last`` (inclusive), sharing one ``f`` call per block."""
    if first < 1:
        raise DomainError(f"term index must be >= 1, got {first}")
    _check_x(spec, x)
    if last < first:
        return []
    m = coeffs.m
    fv = _block_values(spec, x, block_of(first, m), block_of(last, m))
    return [coeffs.k[coefficient_index(n, m)] * fv[block_of(n, m)] for n in range(first, last + 1)]


def partial_sum(coeffs: Coefficients, spec: FunctionSpec, N: int, x: Real) -> Real:
    """``w_1 + ... + w_N``, summed left to right."""
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    total = 0 * x
    for w in terms(coeffs, spec, 1, N, x):
        total += w
    return total


def envelope_remainder(coeffs: Coefficients, consumed_terms: int, x: Real, r: Real) -> Real:
    """``sum_{n > t} k_{g(n)} * x**(p(n)*r)`` in closed form, ``t = consumed_terms``.

    Multiplying by ``a`` (resp. ``b``) bounds the true remainder from below
    (resp. above).  The partially consumed block contributes the leftover
    coefficients, every later block contributes ``K``.
    """
    m = coeffs.m
    p0 = consumed_terms // m + 1
    xr = x**r
    head = xr**p0
    return coeffs.remaining(consumed_terms % m) * head + coeffs.K * head * xr / (1 - xr)


def tail_bracket(
    coeffs: Coefficients,
    spec: FunctionSpec,
    ell: int,
    x: Real,
    truncation: int | None = None,
) -> TailBracket:
    """Certified bracket of the tail ``W_ell(x) = sum_{n > ell} w_n(x)``.

    Terms ``ell < n <= truncation`` are summed explicitly; everything past
    ``truncation`` is bounded by the power envelope.  With exact inputs and
    ``f`` the identity the bracket is exact; in floating point the bounds
    are widened by a relative ``2**-40``.
    """
    env = spec.envelope
    if x >= 1:
        raise DomainError(f"tail requires x < 1, got {x}")
    _check_x(spec, x)
    if ell < 0:
        raise DomainError(f"tail index must be >= 0, got {ell}")
    if truncation is None:
        truncation = ell + DEFAULT_EXTRA_BLOCKS * coeffs.m
    if truncation < ell:
        raise DomainError(f"truncation {truncation} is below the tail index {ell}")
    if x == 0:
        return TailBracket(0 * x, 0 * x)
    explicit = 0 * x
    if truncation > ell and spec.evaluate is not None:
        for w in terms(coeffs, spec, ell + 1, truncation, x):
            explicit += w
    elif truncation > ell:
        raise DomainError(f"function {spec.name!r} is envelope-only; use truncation=ell")
    rest = envelope_remainder(coeffs, truncation, x, env.r)
    return TailBracket(round_down(explicit + env.a * rest), round_up(explicit + env.b * rest))


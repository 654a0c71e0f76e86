"""Locally increasing, power-bounded functions.

A function ``f`` belongs to the class handled here when there are constants
``a <= b``, ``r > 0`` and a radius ``epsilon`` such that ``f`` is increasing on
``[0, epsilon]`` and

    a * x**r <= f(x) <= b * x**r      for every x in [0, epsilon].

The four constants are bundled in :class:`PowerEnvelope`; a
:class:`FunctionSpec` pairs an evaluator with its envelope.  Only the envelope
is needed for threshold computations, so envelope-only specs (no evaluator)
are allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .errors import DomainError, HypothesisViolation

Real = Union[int, float, Fraction]

DEFAULT_GRID_POINTS = 10_000
DEFAULT_SLACK = 1e-12


@dataclass(frozen=True)
class PowerEnvelope:
    """Constants certifying ``a*x**r <= f(x) <= b*x**r`` on ``[0, epsilon]``.

    An ``epsilon`` above 1 is capped at 1: series arguments are powers of
    ``x < 1`` so nothing beyond 1 is ever evaluated.
    """

    a: Real
    b: Real
    r: Real
    epsilon: Real = 1

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"envelope coefficient a must be positive, got {self.a}")
        if not self.b >= self.a:
            raise DomainError(f"envelope requires a <= b, got a={self.a}, b={self.b}")
        if not self.r > 0:
            raise DomainError(f"envelope exponent r must be positive, got {self.r}")
        if not self.epsilon > 0:
            raise DomainError(f"envelope radius must be positive, got {self.epsilon}")
        if self.epsilon > 1:
            object.__setattr__(self, "epsilon", 1)

    def lower(self, x: Real) -> Real:
        return self.a * x**self.r

    def upper(self, x: Real) -> Real:
        return self.b * x**self.r

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "r": self.r, "epsilon": self.epsilon}


@dataclass(frozen=True)
class FunctionSpec:
    """A named function of the class together with its power envelope.

    ``evaluate`` may be ``None`` (envelope-only mode): thresholds still work,
    enumeration and term evaluation do not.  ``derivative`` optionally holds
    the derivative of order ``envelope.r`` used by :func:`derive_power_bounds`.
    """

    name: str
    evaluate: Optional[Callable[[Real], Real]]
    envelope: PowerEnvelope
    derivative: Optional[Callable[[Real], float]] = field(default=None, compare=False)

    @property
    def is_identity(self) -> bool:
        return self.name == "identity"

    @property
    def envelope_only(self) -> bool:
        return self.evaluate is None


@dataclass(frozen=True)
class EnvelopeReport:
    """Outcome of a sampled envelope/monotonicity check.

    ``worst_margin`` is the smallest of ``f(x) - a*x**r``, ``b*x**r - f(x)``
    and the increments ``f(x_{i+1}) - f(x_i)`` over the grid; ``worst_x``
    and ``worst_kind`` locate it.  The check is sampled, not symbolic.
    """

    passed: bool
    worst_margin: float
    worst_x: float
    worst_kind: str
    grid_points: int
    slack: float


def envelope_only(a: Real, b: Real, r: Real, epsilon: Real = 1, name: str = "custom") -> FunctionSpec:
    return FunctionSpec(name=name, evaluate=None, envelope=PowerEnvelope(a, b, r, epsilon))


def evaluate(spec: FunctionSpec, x: Real) -> Real:
    """Evaluate ``spec`` at ``x`` in ``[0, epsilon]``."""
    if spec.evaluate is None:
        raise DomainError(f"function {spec.name!r} is envelope-only and cannot be evaluated")
    if x < 0 or x > spec.envelope.epsilon:
        raise DomainError(f"x={x} outside [0, {spec.envelope.epsilon}] for {spec.name!r}")
    return spec.evaluate(x)


def _grid(epsilon: Real, grid_points: int) -> list[float]:
    eps = float(epsilon)
    n = grid_points - 1
    return [eps * i / n for i in range(grid_points)]


def verify_envelope(
    spec: FunctionSpec, grid_points: int = DEFAULT_GRID_POINTS, slack: float = DEFAULT_SLACK
) -> EnvelopeReport:
    """Check the envelope inequalities and monotonicity on a uniform grid.

    ``grid_points`` includes both endpoints of ``[0, epsilon]``.  Each
    inequality may be violated by at most ``slack`` times the magnitude of
    the values compared, which absorbs rounding in equality cases such as
    the identity.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be at least 2")
    env = spec.envelope
    a, b, r = float(env.a), float(env.b), float(env.r)
    worst = (math.inf, 0.0, "none")
    ok = True
    prev = None
    for x in _grid(env.epsilon, grid_points):
        fx = float(evaluate(spec, x))
        lo, hi = a * x**r, b * x**r
        scale = slack * max(abs(fx), hi)
        for margin, kind in ((fx - lo, "lower"), (hi - fx, "upper")):
            if margin < worst[0]:
                worst = (margin, x, kind)
            if margin < -scale:
                ok = False
        if prev is not None:
            step = fx - prev
            if step < worst[0]:
                worst = (step, x, "monotone")
            if step < -slack * max(abs(fx), abs(prev)):
                ok = False
        prev = fx
    return EnvelopeReport(ok, worst[0], worst[1], worst[2], grid_points, slack)


def derive_power_bounds(
    rth_derivative: Callable[[float], float],
    r: int,
    epsilon: Real = 1,
    grid_points: int = DEFAULT_GRID_POINTS,
    lipschitz: Optional[float] = None,
) -> PowerEnvelope:
    """Envelope constants for ``f`` with ``f(0) = ... = f^(r-1)(0) = 0``.

    By Taylor's theorem with the Lagrange remainder, ``f(x) = f^(r)(z)/r! * x**r``
    for some ``z`` in ``[0, x)``, so the extremes of ``f^(r)/r!`` over
    ``[0, epsilon]`` are valid ``a`` and ``b``.

    The extremes are sampled on a grid and widened per cell.  A function
    with Lipschitz constant ``L`` on a cell of width ``h`` with endpoint
    values ``u, v`` stays within ``[(u+v-L*h)/2, (u+v+L*h)/2]``.  When
    ``lipschitz`` is given it is used for every cell; otherwise ``L`` is the
    largest sampled slope over the cell and its two neighbours, which is a
    local estimate rather than a proof.

    Raises :class:`HypothesisViolation` if the sampled derivative is not
    strictly positive.
    """
    if int(r) != r or r < 1:
        raise DomainError(f"r must be a positive integer, got {r}")
    if grid_points < 2:
        raise DomainError("grid_points must be at least 2")
    r = int(r)
    eps = min(float(epsilon), 1.0)
    xs = _grid(eps, grid_points)
    vals = [float(rth_derivative(x)) for x in xs]
    bad = [x for x, v in zip(xs, vals) if not v > 0]
    if bad:
        raise HypothesisViolation(
            f"derivative of order {r} is not positive on [0, {eps}] (first at x={bad[0]})"
        )
    h = xs[1] - xs[0]
    slopes = [abs(v - u) / h for u, v in zip(vals, vals[1:])]
    lo, hi = min(vals), max(vals)
    for i, (u, v) in enumerate(zip(vals, vals[1:])):
        if lipschitz is None:
            lip = max(slopes[max(i - 1, 0) : i + 2])
        else:
            lip = lipschitz
        lo = min(lo, (u + v - lip * h) / 2)
        hi = max(hi, (u + v + lip * h) / 2)
    if not lo > 0:
        raise HypothesisViolation("derivative lower bound is not positive after widening")
    fact = math.factorial(r)
    return PowerEnvelope(lo / fact, hi / fact, r, eps)


# --- built-in registry -------------------------------------------------------


def _identity(x):
    return x


def _xln1p(x):
    return x * math.log1p(x)


def _expm1m(x):
    # expm1(x) - x cancels catastrophically for tiny x
    x = float(x)
    if x < 1e-3:
        return x * x * (0.5 + x * (1 / 6 + x * (1 / 24 + x * (1 / 120 + x / 720))))
    return math.expm1(x) - x


BUILTINS: dict[str, FunctionSpec] = {
    "identity": FunctionSpec("identity", _identity, PowerEnvelope(1, 1, 1, 1), lambda x: 1.0),
    # Jordan's inequality 2x/pi <= sin x <= x, radius pi/2 capped at 1
    "sin": FunctionSpec(
        "sin", lambda x: math.sin(x), PowerEnvelope(2 / math.pi, 1, 1, 1), lambda x: math.cos(x)
    ),
    "tan": FunctionSpec(
        "tan",
        lambda x: math.tan(x),
        PowerEnvelope(1, 1 / math.cos(1) ** 2, 1, 1),
        lambda x: 1 / math.cos(x) ** 2,
    ),
    "xln1p": FunctionSpec(
        "xln1p", _xln1p, PowerEnvelope(Fraction(3, 8), 1, 2, 1), lambda x: (x + 2) / (x + 1) ** 2
    ),
    "expm1m": FunctionSpec(
        "expm1m", _expm1m, PowerEnvelope(Fraction(1, 2), math.e / 2, 2, 1), lambda x: math.exp(x)
    ),
}


def get_function(name: str) -> FunctionSpec:
    try:
        return BUILTINS[name]
    except KeyError:
        raise DomainError(
            f"unknown function {name!r}; choose one of {', '.join(sorted(BUILTINS))}"
        ) from None

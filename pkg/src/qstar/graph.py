"""Star graphs, bond-length ensembles and observables."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadRange,
    BondOutOfRange,
    ConfigError,
    EmptyGraph,
    NonPositiveLength,
    RationalLengthWarning,
)

DEFAULT_L_MIN = 0.5
RATIO_MAX_DENOMINATOR = 20
RATIO_TOL = 1e-9


def near_rational(x: float, max_den: int = RATIO_MAX_DENOMINATOR, tol: float = RATIO_TOL):
    """Return p/q (q <= max_den) within ``tol`` of ``x``, or None."""
    f = Fraction(x).limit_denominator(max_den)
    if abs(x - f.numerator / f.denominator) <= tol:
        return f
    return None


def rational_pairs(lengths, max_den: int = RATIO_MAX_DENOMINATOR, tol: float = RATIO_TOL):
    """All pairs (i, j, p/q) of 1-based bonds whose length ratio is nearly rational."""
    out = []
    L = np.asarray(lengths, dtype=float)
    # Sorting keeps every ratio >= 1, so the tolerance is applied on a consistent scale.
    for a in range(len(L)):
        for b in range(a + 1, len(L)):
            i, j = (a, b) if L[a] >= L[b] else (b, a)
            f = near_rational(L[i] / L[j], max_den, tol)
            if f is not None:
                out.append((i + 1, j + 1, f))
    return out


@dataclass(frozen=True)
class StarGraph:
    """A star graph with ``b`` bonds of the given lengths, Neumann at every vertex."""

    lengths: np.ndarray
    l_min: float = DEFAULT_L_MIN
    rational_ratios: tuple = field(default=(), compare=False)

    def __post_init__(self):
        arr = np.array(self.lengths, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "lengths", arr)

    @property
    def b(self) -> int:
        return int(self.lengths.shape[0])

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    @property
    def independent(self) -> bool:
        return not self.rational_ratios

    def length(self, bond: int) -> float:
        check_bond(bond, self.b)
        return float(self.lengths[bond - 1])

    def weyl_count(self, K: float) -> float:
        """Smooth eigenvalue count K * sum(L) / pi."""
        return K * self.total_length / math.pi

    def __hash__(self):
        return hash((self.lengths.tobytes(), self.l_min))

    def __eq__(self, other):
        return (
            isinstance(other, StarGraph)
            and np.array_equal(self.lengths, other.lengths)
            and self.l_min == other.l_min
        )


def check_bond(bond: int, b: int) -> None:
    if not (1 <= int(bond) <= b):
        raise BondOutOfRange(f"bond {bond} outside 1..{b}")


def make_graph(lengths: Sequence[float], l_min: float = DEFAULT_L_MIN, warn: bool = True) -> StarGraph:
    """Validate ``lengths`` and build a :class:`StarGraph`.

    Lengths must be finite, positive and at least ``l_min``. Pairs of lengths
    whose ratio lies within 1e-9 of a fraction with denominator <= 20 are
    recorded on the graph and reported with a :class:`RationalLengthWarning`;
    such pairs can produce coincident poles of the secular function.
    """
    arr = np.asarray(lengths, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyGraph("a star graph needs at least one bond")
    if not np.all(np.isfinite(arr)):
        raise BadRange("bond lengths must be finite")
    if np.any(arr <= 0):
        raise NonPositiveLength(f"non-positive bond length {arr[arr <= 0][0]!r}")
    if not l_min > 0:
        raise BadRange("l_min must be positive")
    if np.any(arr < l_min):
        raise BadRange(f"bond length {arr.min()!r} below l_min={l_min}")
    pairs = tuple(rational_pairs(arr))
    if pairs and warn:
        i, j, f = pairs[0]
        warnings.warn(
            f"L_{i}/L_{j} is within {RATIO_TOL:g} of {f}; "
            f"{len(pairs)} nearly rational length pair(s) in total",
            RationalLengthWarning,
            stacklevel=2,
        )
    return StarGraph(arr, l_min=l_min, rational_ratios=pairs)


def sample_lengths(v: int, alpha: int, l_bar: float, delta_l: float, seed: int) -> np.ndarray:
    """Draw ``alpha * v`` lengths i.i.d. uniform on ``[l_bar, l_bar + delta_l]``.

    The draw is deterministic in ``seed``. See :func:`scaled_delta_l` and
    :func:`ergodic_delta_l` for ways to pick ``delta_l``.
    """
    if v < 1 or alpha < 1:
        raise BadRange("v and alpha must be positive integers")
    if not l_bar > 0:
        raise BadRange("l_bar must be positive")
    if delta_l < 0 or not math.isfinite(delta_l):
        raise BadRange(f"delta_l must be finite and >= 0, got {delta_l}")
    rng = np.random.default_rng(seed)
    u = rng.random(int(alpha) * int(v))
    out = l_bar + delta_l * u
    return np.minimum(out, l_bar + delta_l)


def scaled_delta_l(v: int, c: float = 1.0) -> float:
    """Shrinking window ``c / v**2``, so that ``v * delta_l -> 0`` as v grows."""
    return c / float(v) ** 2


def ergodic_delta_l(v: int, alpha: int, count: int, l_bar: float = 1.0, phase: float = 100.0) -> float:
    """Window wide enough that the bond phases decorrelate over ``count`` eigenvalues.

    The n-th eigenvalue sits near ``n * pi / (alpha * v * l_bar)``, so across the
    first ``count`` of them the phases ``k * L_j`` of two bonds drift apart by up
    to ``k_count * delta_l``. This returns the ``delta_l`` that makes that drift
    equal to ``phase`` radians.
    """
    k_top = count * math.pi / (alpha * v * l_bar)
    return phase / k_top


def resolve_delta_l(v: int, alpha: int, count: int | None, l_bar: float,
                    delta_l: float | str | None) -> float:
    """Turn ``'auto'`` (phase-spread rule), ``'scaled'`` (1/v^2) or a number into a width."""
    if delta_l is None or delta_l == "auto":
        if count is None:
            raise ConfigError("delta_l='auto' needs the eigenvalue count")
        return ergodic_delta_l(v, alpha, count, l_bar)
    if delta_l == "scaled":
        return scaled_delta_l(v)
    try:
        return float(delta_l)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"delta_l must be a number, 'auto' or 'scaled', got {delta_l!r}") from exc


def ensemble_graph(v: int, alpha: int, count: int | None = None, l_bar: float = 1.0,
                   delta_l: float | str | None = "auto", seed: int = 0,
                   l_min: float = DEFAULT_L_MIN) -> StarGraph:
    """Sample an ensemble graph; ``delta_l='auto'`` picks :func:`ergodic_delta_l`."""
    delta_l = resolve_delta_l(v, alpha, count, l_bar, delta_l)
    lengths = sample_lengths(v, alpha, l_bar, delta_l, seed)
    return make_graph(lengths, l_min=min(l_min, l_bar), warn=False)


def load_graph(path: str | Path, count: int | None = None) -> StarGraph:
    """Read a JSON graph file: ``{"lengths": [...]}`` or ensemble parameters."""
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    return graph_from_spec(spec, count=count)


def graph_from_spec(spec: dict, count: int | None = None) -> StarGraph:
    if not isinstance(spec, dict):
        raise ConfigError("graph spec must be a JSON object")
    l_min = float(spec.get("l_min", DEFAULT_L_MIN))
    if "lengths" in spec:
        return make_graph(spec["lengths"], l_min=l_min)
    missing = [k for k in ("v", "alpha", "seed") if k not in spec]
    if missing:
        raise ConfigError(f"graph spec needs 'lengths' or v/alpha/seed (missing {missing})")
    return ensemble_graph(
        int(spec["v"]), int(spec["alpha"]), count=count,
        l_bar=float(spec.get("l_bar", 1.0)), delta_l=spec.get("delta_l", "auto"),
        seed=int(spec["seed"]), l_min=l_min,
    )


# ------------------------------------------------------------------ observables

@dataclass(frozen=True)
class SplitObservable:
    """Indicator of the first ``v`` bonds of a graph with ``b = alpha * v`` bonds."""

    v: int
    alpha: int

    def __post_init__(self):
        if self.v < 1:
            raise BadRange("v must be >= 1")
        if self.alpha < 1:
            raise BadRange("alpha must be >= 1")

    @property
    def b(self) -> int:
        return self.v * self.alpha

    def mask(self) -> np.ndarray:
        m = np.zeros(self.b, dtype=bool)
        m[: self.v] = True
        return m

    def compatible(self, graph: StarGraph) -> bool:
        return graph.b == self.b

    def classical_average(self, graph: StarGraph) -> float:
        L = graph.lengths
        return float(L[: self.v].sum() / L.sum())


def indicator_value(obs: SplitObservable, bond: int) -> float:
    """1 on bonds 1..v, 0 on the rest."""
    check_bond(bond, obs.b)
    return 1.0 if bond <= obs.v else 0.0


class BondFunction:
    """A real function on one bond, evaluated on arrays of positions."""

    def __call__(self, x):
        raise NotImplementedError

    def integral(self, length: float) -> float | None:
        """Closed-form integral over [0, length] when known, else None."""
        return None

    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, c):
        return Scaled(self, float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Constant(BondFunction):
    value: float

    def __call__(self, x):
        return np.full(np.shape(x), self.value, dtype=float)

    def integral(self, length):
        return self.value * length


@dataclass(frozen=True)
class Polynomial(BondFunction):
    """sum_j coeffs[j] * x**j."""

    coeffs: tuple

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    def integral(self, length):
        c = np.polynomial.polynomial.polyint(self.coeffs)
        return float(np.polynomial.polynomial.polyval(length, c))


@dataclass(frozen=True)
class CosinePacket(BondFunction):
    """amplitude * cos(frequency * x + phase) * exp(-(x - center)**2 / (2 width**2))."""

    amplitude: float
    frequency: float
    center: float
    width: float
    phase: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        env = np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))
        return self.amplitude * np.cos(self.frequency * x + self.phase) * env


class Tabulated(BondFunction):
    """Cubic spline through samples (x_j, y_j) spanning the whole bond."""

    def __init__(self, x, y):
        from scipy.interpolate import CubicSpline

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 4:
            raise BadRange("tabulated function needs >= 4 matching samples")
        if not np.all(np.isfinite(y)):
            raise BadRange("tabulated samples must be finite")
        self.x = x
        self.y = y
        self._spline = CubicSpline(x, y)

    def __call__(self, x):
        return self._spline(np.asarray(x, dtype=float))

    def integral(self, length):
        return float(self._spline.integrate(0.0, length))


@dataclass(frozen=True)
class Scaled(BondFunction):
    inner: BondFunction
    factor: float

    def __call__(self, x):
        return self.factor * self.inner(x)

    def integral(self, length):
        i = self.inner.integral(length)
        return None if i is None else self.factor * i


@dataclass(frozen=True)
class Sum(BondFunction):
    left: BondFunction
    right: BondFunction

    def __call__(self, x):
        return self.left(x) + self.right(x)

    def integral(self, length):
        a = self.left.integral(length)
        b = self.right.integral(length)
        return None if a is None or b is None else a + b


@dataclass(frozen=True)
class SmoothObservable:
    """One :class:`BondFunction` per bond; closed under scale, add and restrict."""

    functions: tuple

    @classmethod
    def constant(cls, b: int, value: float = 1.0):
        return cls(tuple(Constant(value) for _ in range(b)))

    @classmethod
    def indicator(cls, b: int, bonds: Sequence[int]):
        chosen = set(int(i) for i in bonds)
        for i in chosen:
            check_bond(i, b)
        return cls(tuple(Constant(1.0 if i + 1 in chosen else 0.0) for i in range(b)))

    @classmethod
    def from_callables(cls, funcs: Sequence[Callable]):
        return cls(tuple(f if isinstance(f, BondFunction) else _Wrapped(f) for f in funcs))

    @property
    def b(self) -> int:
        return len(self.functions)

    def scale(self, c: float) -> "SmoothObservable":
        return SmoothObservable(tuple(f * c for f in self.functions))

    def __add__(self, other: "SmoothObservable") -> "SmoothObservable":
        if other.b != self.b:
            raise BadRange("observables live on graphs with different bond counts")
        return SmoothObservable(tuple(f + g for f, g in zip(self.functions, other.functions)))

    def restrict(self, bonds: Sequence[int]) -> "SmoothObservable":
        keep = set(int(i) for i in bonds)
        for i in keep:
            check_bond(i, self.b)
        return SmoothObservable(
            tuple(f if i + 1 in keep else Constant(0.0) for i, f in enumerate(self.functions))
        )

    def check(self, graph: StarGraph, samples: int = 65) -> None:
        """Raise unless there is one finite-valued function per bond of ``graph``."""
        if self.b != graph.b:
            raise BadRange(f"observable has {self.b} bonds, graph has {graph.b}")
        for f, L in zip(self.functions, graph.lengths):
            y = f(np.linspace(0.0, L, samples))
            if not np.all(np.isfinite(y)):
                raise BadRange("observable is not finite on its bond")


class _Wrapped(BondFunction):
    def __init__(self, f):
        self.f = f

    def __call__(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float) * np.ones(np.shape(x))

"""Shared value types for bipartite two-setting, d-outcome Bell scenarios.

A behavior is stored as a ``(2, 2, d, d)`` array indexed
``[i - 1, j - 1, v1, v2]`` = P(v1 for setting i of party 1, v2 for setting j
of party 2).  Kernels use the same layout, so a Bell expression is the
elementwise dot product of a kernel with a behavior.

Integer and ``object`` (``fractions.Fraction``) arrays are treated as exact;
float arrays are approximate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAIRS: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))
PAIR_KEYS = {pair: f"{pair[0]}{pair[1]}" for pair in PAIRS}

PROBABILITY_TOL = 1e-12
NORMALIZATION_TOL = 1e-9


class BellError(Exception):
    """Base class for errors raised by this package."""


class InvalidModulusError(BellError, ValueError):
    pass


class DimensionMismatchError(BellError, ValueError):
    pass


class InvalidBehaviorError(BellError, ValueError):
    pass


class ComputationRefused(BellError):
    """A computation was declined (enumeration cap, singular formula, ...)."""


def nmod(x: int, d: int) -> int:
    """Representative of ``x`` modulo ``d`` in ``[0, d - 1]``."""
    if d <= 0:
        raise InvalidModulusError(f"modulus must be positive, got {d}")
    return x % d


def is_exact(array: np.ndarray) -> bool:
    return array.dtype == object or np.issubdtype(array.dtype, np.integer)


def _to_scalar(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def _as_table_array(tables, d: int | None) -> np.ndarray:
    array = np.asarray(tables)
    if array.ndim != 4 or array.shape[:2] != (2, 2) or array.shape[2] != array.shape[3]:
        raise DimensionMismatchError(f"tables must have shape (2, 2, d, d), got {array.shape}")
    if d is not None and array.shape[2] != d:
        raise DimensionMismatchError(f"tables are {array.shape[2]}x{array.shape[3]}, expected d={d}")
    if array.dtype.kind == "c":
        raise InvalidBehaviorError("tables must be real")
    if array.dtype.kind in "biu":
        array = array.astype(np.int64)
    elif array.dtype != object:
        array = array.astype(float)
    return array


# ---------------------------------------------------------------------------
# settings


def _fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


@dataclass(frozen=True)
class MeasurementSettings:
    """Local phase parameters; ``n1[q]`` and ``n2[q]`` belong to setting q + 1."""

    n1: tuple[Fraction, Fraction]
    n2: tuple[Fraction, Fraction]

    def __post_init__(self):
        if len(self.n1) != 2 or len(self.n2) != 2:
            raise ValueError("need exactly two settings per party")
        object.__setattr__(self, "n1", tuple(_fraction(x) for x in self.n1))
        object.__setattr__(self, "n2", tuple(_fraction(x) for x in self.n2))

    def phase(self, party: int, setting: int) -> Fraction:
        if setting not in (1, 2):
            raise ValueError(f"setting must be 1 or 2, got {setting}")
        if party == 1:
            return self.n1[setting - 1]
        if party == 2:
            return self.n2[setting - 1]
        raise ValueError(f"party must be 1 or 2, got {party}")

    def to_json(self) -> dict[str, str]:
        return {
            "n11": str(self.n1[0]),
            "n21": str(self.n2[0]),
            "n12": str(self.n1[1]),
            "n22": str(self.n2[1]),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MeasurementSettings":
        missing = [key for key in ("n11", "n21", "n12", "n22") if key not in obj]
        if missing:
            raise ValueError(f"settings missing field(s): {', '.join(missing)}")
        try:
            return cls(
                n1=(Fraction(obj["n11"]), Fraction(obj["n12"])),
                n2=(Fraction(obj["n21"]), Fraction(obj["n22"])),
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed settings value: {exc}") from None


CANONICAL_SETTINGS = MeasurementSettings(
    n1=(Fraction(0), Fraction(1, 2)),
    n2=(Fraction(1, 4), Fraction(-1, 4)),
)
SETTINGS_PRESETS = {"canonical": CANONICAL_SETTINGS, "paper-eq9": CANONICAL_SETTINGS}


def load_settings(source: str | Path) -> MeasurementSettings:
    """Load settings from a preset name or a JSON file."""
    if str(source) in SETTINGS_PRESETS:
        return SETTINGS_PRESETS[str(source)]
    with open(source) as fh:
        return MeasurementSettings.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# behaviors and kernels


@dataclass(frozen=True, eq=False)
class Behavior:
    d: int
    tables: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")
        tables = _as_table_array(self.tables, self.d)
        if is_exact(tables):
            if any(x < 0 or x > 1 for x in tables.flat):
                raise InvalidBehaviorError("probabilities must lie in [0, 1]")
            for i, j in PAIRS:
                if tables[i - 1, j - 1].sum() != 1:
                    raise InvalidBehaviorError(f"table {i}{j} does not sum to 1")
        else:
            if not np.all(np.isfinite(tables)):
                raise InvalidBehaviorError("probabilities must be finite")
            if tables.min() < -PROBABILITY_TOL or tables.max() > 1 + PROBABILITY_TOL:
                raise InvalidBehaviorError("probabilities must lie in [0, 1]")
            sums = tables.sum(axis=(2, 3))
            if np.max(np.abs(sums - 1)) > NORMALIZATION_TOL:
                raise InvalidBehaviorError(f"tables do not sum to 1: {sums.ravel().tolist()}")
        object.__setattr__(self, "tables", _frozen(tables))

    @property
    def exact(self) -> bool:
        return is_exact(self.tables)

    def table(self, i: int, j: int) -> np.ndarray:
        return self.tables[i - 1, j - 1]

    def __repr__(self):
        return f"Behavior(d={self.d}, exact={self.exact})"


@dataclass(frozen=True, eq=False)
class Kernel:
    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")
        coeffs = _as_table_array(self.coeffs, self.d)
        if coeffs.dtype == float and not np.all(np.isfinite(coeffs)):
            raise ValueError("kernel coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @classmethod
    def zeros(cls, d: int) -> "Kernel":
        return cls(d, np.zeros((2, 2, d, d), dtype=np.int64))

    @property
    def exact(self) -> bool:
        return is_exact(self.coeffs)

    def table(self, i: int, j: int) -> np.ndarray:
        return self.coeffs[i - 1, j - 1]

    def __add__(self, other: "Kernel") -> "Kernel":
        _check_same_d(self.d, other.d)
        return Kernel(self.d, self.coeffs + other.coeffs)

    def __neg__(self) -> "Kernel":
        return Kernel(self.d, -self.coeffs)

    def __mul__(self, scalar) -> "Kernel":
        return Kernel(self.d, self.coeffs * scalar)

    __rmul__ = __mul__

    def as_float(self) -> "Kernel":
        return Kernel(self.d, self.coeffs.astype(float))

    def __repr__(self):
        return f"Kernel(d={self.d}, exact={self.exact})"


@dataclass(frozen=True, order=True)
class DeterministicStrategy:
    """Predetermined outcomes ``v1 = (v1 for setting 1, setting 2)``, likewise ``v2``.

    Ordering (and :meth:`key`) is lexicographic on
    ``(v1[0], v1[1], v2[0], v2[1])``.
    """

    v1: tuple[int, int]
    v2: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "v1", tuple(int(x) for x in self.v1))
        object.__setattr__(self, "v2", tuple(int(x) for x in self.v2))
        if len(self.v1) != 2 or len(self.v2) != 2:
            raise ValueError("a strategy fixes exactly two outcomes per party")
        if min(self.v1 + self.v2) < 0:
            raise ValueError("outcomes must be non-negative")

    @classmethod
    def from_tuple(cls, t: Sequence[int]) -> "DeterministicStrategy":
        a, e, b, c = t
        return cls((a, e), (b, c))

    def key(self) -> tuple[int, int, int, int]:
        return self.v1 + self.v2

    def check(self, d: int) -> None:
        if max(self.key()) >= d:
            raise ValueError(f"strategy {self.key()} has an outcome outside [0, {d - 1}]")


@dataclass(frozen=True)
class CorrelatorSpec:
    """One correlator ``P(v1 = sigma*m + alpha, v2 = m) - P(v1 = sigma*m + beta, v2 = m)``.

    With ``dual=True`` the parties swap roles:
    ``P(v1 = m, v2 = sigma*m + alpha) - P(v1 = m, v2 = sigma*m + beta)``.
    """

    pair: tuple[int, int]
    sigma: int
    alpha: int
    beta: int
    dual: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(self.pair))
        if self.pair not in PAIRS:
            raise ValueError(f"unknown setting pair {self.pair}")
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")

    def cells(self, m: int, d: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """(v1, v2) cells of the positive and the negative term."""
        plus = nmod(self.sigma * m + self.alpha, d)
        minus = nmod(self.sigma * m + self.beta, d)
        if self.dual:
            return (m, plus), (m, minus)
        return (plus, m), (minus, m)


def _check_same_d(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionMismatchError(f"dimension mismatch: {d1} vs {d2}")


# ---------------------------------------------------------------------------
# operations


def strategy_behavior(s: DeterministicStrategy, d: int) -> Behavior:
    s.check(d)
    tables = np.zeros((2, 2, d, d), dtype=np.int64)
    for i, j in PAIRS:
        tables[i - 1, j - 1, s.v1[i - 1], s.v2[j - 1]] = 1
    return Behavior(d, tables)


def uniform_behavior(d: int, exact: bool = False) -> Behavior:
    if exact:
        tables = np.full((2, 2, d, d), Fraction(1, d * d), dtype=object)
    else:
        tables = np.full((2, 2, d, d), 1.0 / (d * d))
    return Behavior(d, tables)


def random_product_behavior(d: int, rng: np.random.Generator) -> Behavior:
    """Uncorrelated behavior ``P(v1, v2 | i, j) = p_i(v1) q_j(v2)`` with Dirichlet marginals."""
    p = rng.dirichlet(np.ones(d), size=2)
    q = rng.dirichlet(np.ones(d), size=2)
    tables = p[:, None, :, None] * q[None, :, None, :]
    return Behavior(d, tables)


def evaluate_kernel(k: Kernel, b: Behavior):
    _check_same_d(k.d, b.d)
    return _to_scalar((k.coeffs * b.tables).sum())


def strategy_kernel_value(k: Kernel, s: DeterministicStrategy):
    """Kernel value of a deterministic strategy.

    Terms are added in pair order (1,1), (1,2), (2,1), (2,2); the enumeration
    engines reproduce this order so float results agree bit for bit.
    """
    s.check(k.d)
    c = k.coeffs
    a, e = s.v1
    b, cc = s.v2
    return _to_scalar(((c[0, 0, a, b] + c[0, 1, a, cc]) + c[1, 0, e, b]) + c[1, 1, e, cc])


def convex_combination(behaviors: Sequence[Behavior], weights: Iterable) -> Behavior:
    weights = list(weights)
    if len(weights) != len(behaviors) or not behaviors:
        raise ValueError("need one weight per behavior")
    d = behaviors[0].d
    for b in behaviors:
        _check_same_d(d, b.d)
    tables = sum(w * b.tables for w, b in zip(weights, behaviors))
    return Behavior(d, tables)


# ---------------------------------------------------------------------------
# serialization


def _encode_entry(x):
    x = _to_scalar(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return float(x)


def _decode_entry(x):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"malformed rational entry {x!r}") from None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"malformed table entry {x!r}")
    return x


def tables_to_json(d: int, array: np.ndarray) -> dict:
    return {
        "d": d,
        "tables": {
            PAIR_KEYS[(i, j)]: [[_encode_entry(x) for x in row] for row in array[i - 1, j - 1]]
            for i, j in PAIRS
        },
    }


def tables_from_json(obj: dict) -> tuple[int, np.ndarray]:
    try:
        d = obj["d"]
        raw = obj["tables"]
    except (KeyError, TypeError):
        raise ValueError("expected an object with 'd' and 'tables'") from None
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"field 'd' must be an integer >= 2, got {d!r}")
    entries = []
    for pair in PAIRS:
        key = PAIR_KEYS[pair]
        if key not in raw:
            raise ValueError(f"missing table {key!r}")
        rows = raw[key]
        if len(rows) != d or any(len(row) != d for row in rows):
            raise ValueError(f"table {key!r} is not {d}x{d}")
        entries.append([[_decode_entry(x) for x in row] for row in rows])
    flat = [x for table in entries for row in table for x in row]
    if all(isinstance(x, Fraction) for x in flat):
        if all(x.denominator == 1 for x in flat):
            array = np.array([int(x) for x in flat], dtype=np.int64)
        else:
            array = np.array(flat, dtype=object)
    else:
        array = np.array([float(x) for x in flat])
    return d, array.reshape(2, 2, d, d)


def behavior_to_json(b: Behavior) -> dict:
    return tables_to_json(b.d, b.tables)


def behavior_from_json(obj: dict) -> Behavior:
    return Behavior(*tables_from_json(obj))


def kernel_to_json(k: Kernel) -> dict:
    return tables_to_json(k.d, k.coeffs)


def kernel_from_json(obj: dict) -> Kernel:
    return Kernel(*tables_from_json(obj))

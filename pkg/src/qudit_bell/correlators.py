"""Correlator families: per-outcome differences of joint probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .core import PAIR_KEYS, Behavior, CorrelatorSpec, DimensionMismatchError, nmod

STRICT_TOL = 1e-10


class Verdict(str, Enum):
    ALL_POSITIVE = "AllPositive"
    ALL_NEGATIVE = "AllNegative"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class ConditionVerdict:
    per_m_values: tuple[float, ...]
    classification: Verdict


@dataclass(frozen=True)
class CorrelatorFamily:
    """``d`` correlators, one per ``m``, sharing a setting pair and sign."""

    d: int
    specs: tuple[CorrelatorSpec, ...]
    name: str = "general"

    def __post_init__(self):
        specs = tuple(self.specs)
        if len(specs) != self.d:
            raise ValueError(f"a family needs exactly d={self.d} specs, got {len(specs)}")
        if len({(s.pair, s.sigma, s.dual) for s in specs}) != 1:
            raise ValueError("family members must share pair, sigma and orientation")
        specs = tuple(
            CorrelatorSpec(s.pair, s.sigma, nmod(s.alpha, self.d), nmod(s.beta, self.d), s.dual) for s in specs
        )
        object.__setattr__(self, "specs", specs)

    @property
    def pair(self) -> tuple[int, int]:
        return self.specs[0].pair

    @property
    def sigma(self) -> int:
        return self.specs[0].sigma

    @property
    def labeling(self) -> str:
        """Quantum outcome labeling under which this family is m-independent."""
        return "sum" if self.sigma == -1 else "difference"

    def to_json(self) -> dict:
        s = self.specs[0]
        if any(t != s for t in self.specs):
            raise ValueError("only uniform families have a descriptor")
        out = {"pair": PAIR_KEYS[s.pair], "sigma": s.sigma, "alpha": s.alpha, "beta": s.beta, "d": self.d}
        if s.dual:
            out["dual"] = True
        return out


def general_family(
    d: int, pair: tuple[int, int], alpha: int, beta: int, sigma: int = 1, dual: bool = False, name: str = "general"
) -> CorrelatorFamily:
    spec = CorrelatorSpec(tuple(pair), sigma, alpha, beta, dual)
    return CorrelatorFamily(d, (spec,) * d, name)


def family_from_json(obj: dict) -> CorrelatorFamily:
    try:
        key = str(obj["pair"])
        pair = (int(key[0]), int(key[1]))
        d = int(obj["d"])
        return general_family(
            d,
            pair,
            int(obj["alpha"]),
            int(obj["beta"]),
            sigma=int(obj.get("sigma", 1)),
            dual=bool(obj.get("dual", False)),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed family descriptor: {exc}") from None


# Residue-sum families: C_m = P(v1 = -m + alpha, v2 = m) - P(v1 = -m + beta, v2 = m).
_CD_OFFSETS = {
    (1, 2): (0, 1),
    (2, 1): (-1, 0),
    (1, 1): (0, -1),
    (2, 2): (0, -1),
}


def cd_family(d: int, pair: tuple[int, int]) -> CorrelatorFamily:
    """The ``sigma = -1`` family whose sum over pairs is the C_d kernel."""
    alpha, beta = _CD_OFFSETS[tuple(pair)]
    return general_family(d, pair, alpha, beta, sigma=-1, name=f"C{PAIR_KEYS[tuple(pair)]}")


def eq3_family(d: int) -> CorrelatorFamily:
    return cd_family(d, (1, 2))


def eq4_family(d: int) -> CorrelatorFamily:
    return cd_family(d, (2, 1))


def eq5_family(d: int, i: int) -> CorrelatorFamily:
    return cd_family(d, (i, i))


def cglmp_offsets(pair: tuple[int, int], k: int) -> tuple[int, int]:
    i, j = pair
    if i == j:
        return k, -k - 1
    if pair == (1, 2):
        return -k, k + 1
    return -k - 1, k


def cglmp_family(d: int, pair: tuple[int, int], k: int) -> CorrelatorFamily:
    """``C_mk`` family (``sigma = +1``), ``0 <= k <= d // 2``."""
    if not 0 <= k <= d // 2:
        raise ValueError(f"k must lie in [0, {d // 2}], got {k}")
    alpha, beta = cglmp_offsets(tuple(pair), k)
    return general_family(d, pair, alpha, beta, sigma=1, name=f"C_k{k}^{PAIR_KEYS[tuple(pair)]}")


def two_level_family(pair: tuple[int, int]) -> CorrelatorFamily:
    """``C0 = P(0,0) - P(1,0)``, ``C1 = P(1,1) - P(0,1)``."""
    return general_family(2, pair, 0, 1, sigma=1, name="C")


def two_level_dual_family(pair: tuple[int, int]) -> CorrelatorFamily:
    """``C0 = P(0,0) - P(0,1)``, ``C1 = P(1,1) - P(1,0)``."""
    return general_family(2, pair, 0, 1, sigma=1, dual=True, name="C_dual")


def correlator_value(b: Behavior, spec: CorrelatorSpec, m: int):
    if not 0 <= m < b.d:
        raise ValueError(f"m must lie in [0, {b.d - 1}], got {m}")
    (p1, p2), (q1, q2) = spec.cells(m, b.d)
    t = b.table(*spec.pair)
    value = t[p1, p2] - t[q1, q2]
    return value.item() if hasattr(value, "item") else value


def family_values(b: Behavior, fam: CorrelatorFamily) -> list:
    if fam.d != b.d:
        raise DimensionMismatchError(f"family has d={fam.d}, behavior has d={b.d}")
    return [correlator_value(b, spec, m) for m, spec in enumerate(fam.specs)]


def family_sum(b: Behavior, fam: CorrelatorFamily):
    return sum(family_values(b, fam))


def condition_check(values: Sequence[float], tol: float = STRICT_TOL) -> ConditionVerdict:
    values = tuple(values)
    if not values:
        raise ValueError("need at least one correlator value")
    if all(v > tol for v in values):
        verdict = Verdict.ALL_POSITIVE
    elif all(v < -tol for v in values):
        verdict = Verdict.ALL_NEGATIVE
    else:
        verdict = Verdict.INDEFINITE
    return ConditionVerdict(values, verdict)


def _csc2(x: float) -> float:
    return 1.0 / math.sin(x) ** 2


def closed_form_correlator(d: int, k: int = 0) -> float:
    """Per-``m`` value of the ``C_mk`` families on the Bell state (canonical settings)."""
    if not 0 <= k <= d // 2:
        raise ValueError(f"k must lie in [0, {d // 2}], got {k}")
    return (_csc2((1 + 4 * k) * math.pi / (4 * d)) - _csc2((3 + 4 * k) * math.pi / (4 * d))) / (2 * d**3)

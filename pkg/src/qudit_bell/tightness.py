"""Facet test for the C_d inequality ``C_d <= 2``.

A valid inequality of the local polytope is tight (defines a facet) when the
deterministic strategies saturating it span a space of dimension
``4d(d-1)``, the dimension of the polytope in the ``4d**2`` probability
coordinates.  Strategies are described through signed residues ``chi``:

    chi_11 =  v1(1) + v2(1)        chi_12 = -v1(1) - v2(2)
    chi_22 =  v1(2) + v2(2)        chi_21 = -v1(2) - v2(1) - 1

reduced mod d.  A pair scores +1 when its residue is 0, -1 when it is
``d - 1`` (reported as -1), and 0 otherwise ("inactive").
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import DeterministicStrategy, nmod, strategy_behavior
from .kernels import build_cd_kernel
from .lhv import ENUMERATION_CAP, EnumerationCapError, lhv_oracle

# generator layout (components in pair order 11, 12, 21, 22); slot = which chi is -1
SLOTS = ("11", "12", "21", "22")


@dataclass(frozen=True)
class ChiProfile:
    """``None`` marks an inactive pair."""

    chi11: int | None
    chi12: int | None
    chi22: int | None
    chi21: int | None

    def values(self) -> tuple:
        return self.chi11, self.chi12, self.chi22, self.chi21

    @property
    def all_active(self) -> bool:
        return None not in self.values()

    @property
    def kernel_value(self) -> int:
        vals = self.values()
        return vals.count(0) - vals.count(-1)


@dataclass(frozen=True)
class TightnessReport:
    d: int
    lhv_max: int
    hyperplane_count: int
    independent_count: int
    required: int
    condition1: bool
    condition2: bool
    tight: bool
    class_i_count: int
    class_i_rank: int

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "lhv_max": self.lhv_max,
            "hyperplane_count": self.hyperplane_count,
            "rank": self.independent_count,
            "required": self.required,
            "condition1": self.condition1,
            "condition2": self.condition2,
            "tight": self.tight,
            "class_i_count": self.class_i_count,
            "class_i_rank": self.class_i_rank,
        }


def _chi(residue: int, d: int) -> int | None:
    if residue == 0:
        return 0
    if residue == d - 1:
        return -1
    return None


def chi_profile(s: DeterministicStrategy, d: int) -> ChiProfile:
    s.check(d)
    (a, e), (b, c) = s.v1, s.v2
    return ChiProfile(
        chi11=_chi(nmod(a + b, d), d),
        chi12=_chi(nmod(-a - c, d), d),
        chi22=_chi(nmod(e + c, d), d),
        chi21=_chi(nmod(-e - b - 1, d), d),
    )


def all_strategies(d: int, cap: int = ENUMERATION_CAP):
    if d**4 > cap:
        raise EnumerationCapError(f"d**4 = {d**4} strategies exceeds the cap {cap}")
    for t in itertools.product(range(d), repeat=4):
        yield DeterministicStrategy.from_tuple(t)


def _cd_values(d: int) -> np.ndarray:
    """C_d value of every strategy, indexed ``[a, e, b, c]``."""
    k = build_cd_kernel(d).coeffs
    return (
        k[0, 0][:, None, :, None]
        + k[0, 1][:, None, None, :]
        + k[1, 0][None, :, :, None]
        + k[1, 1][None, :, None, :]
    )


def hyperplane_generators(d: int, cap: int = ENUMERATION_CAP) -> list[DeterministicStrategy]:
    """Every deterministic strategy attaining the maximal C_d value, lexicographic order."""
    if d**4 > cap:
        raise EnumerationCapError(f"d**4 = {d**4} strategies exceeds the cap {cap}")
    values = _cd_values(d)
    return [DeterministicStrategy.from_tuple(t) for t in zip(*np.nonzero(values == values.max()))]


def class_i_generators(d: int, cap: int = ENUMERATION_CAP) -> list[DeterministicStrategy]:
    """Strategies with all four pairs active, exactly one ``chi = -1`` and three ``chi = 0``."""
    out = []
    for s in all_strategies(d, cap):
        p = chi_profile(s, d)
        if p.all_active and p.values().count(-1) == 1:
            out.append(s)
    return out


def generator_vector(s: DeterministicStrategy, d: int) -> list[int]:
    return [int(x) for x in strategy_behavior(s, d).tables.ravel()]


def integer_rank(rows: list[list[int]]) -> int:
    """Exact rank by fraction-free (Bareiss) elimination with full pivot search."""
    m = [list(map(int, r)) for r in rows if any(r)]
    if not m:
        return 0
    n_cols = len(m[0])
    rank = 0
    prev = 1
    active = list(range(n_cols))
    while m and active:
        # smallest-magnitude nonzero pivot keeps intermediate integers small
        pivot = None
        for r, row in enumerate(m):
            for col in active:
                v = row[col]
                if v and (pivot is None or abs(v) < abs(pivot[2])):
                    pivot = (r, col, v)
                    if abs(v) == 1:
                        break
            if pivot is not None and abs(pivot[2]) == 1:
                break
        if pivot is None:
            break
        r, col, p = pivot
        prow = m.pop(r)
        active.remove(col)
        new = []
        for row in m:
            f = row[col]
            if f:
                row = [(p * x - f * y) // prev for x, y in zip(row, prow)]
            else:
                row = [p * x // prev for x in row]
            if any(row[c] for c in active):
                new.append(row)
        m = new
        prev = p
        rank += 1
    return rank


def generator_rank(gens: list[DeterministicStrategy], d: int) -> int:
    if not gens:
        raise ValueError("need at least one generator")
    return integer_rank([generator_vector(s, d) for s in gens])


def tightness_report(d: int, cap: int = ENUMERATION_CAP) -> TightnessReport:
    lhv = lhv_oracle(build_cd_kernel(d), cap=cap)
    gens = hyperplane_generators(d, cap)
    rank = generator_rank(gens, d)
    class_i = class_i_generators(d, cap)
    required = 4 * d * (d - 1)
    condition1 = lhv.max_value <= 2
    condition2 = rank >= required
    return TightnessReport(
        d=d,
        lhv_max=int(lhv.max_value),
        hyperplane_count=len(gens),
        independent_count=rank,
        required=required,
        condition1=condition1,
        condition2=condition2,
        tight=condition1 and condition2,
        class_i_count=len(class_i),
        class_i_rank=generator_rank(class_i, d),
    )


# ---------------------------------------------------------------------------
# chi-coordinates of class-(i) generators


def transform_generator(s: DeterministicStrategy, d: int) -> tuple[tuple[int, int], ...]:
    """Relabel a generator into chi coordinates.

    ``|a, b> + |a, c> + |e, b> + |e, c>`` becomes
    ``|a, chi11> + |a, chi12> + |a - chi11, chi21> + |a + chi12, chi22>``
    (first entries mod d, chi entries as signed residues in ``(-d, 0]``).
    """
    (a, e), (b, c) = s.v1, s.v2
    chi11 = nmod(a + b, d)
    chi12 = nmod(-a - c, d)
    chi22 = nmod(e + c, d)
    chi21 = nmod(-e - b - 1, d)

    def signed(r):
        return r - d if r else 0

    x11, x12, x21, x22 = signed(chi11), signed(chi12), signed(chi21), signed(chi22)
    return ((a, x11), (a, x12), (nmod(a - x11, d), x21), (nmod(a + x12, d), x22))


def generator_template(v: int, slot: str, d: int) -> tuple[tuple[int, int], ...]:
    """Transformed generator with free outcome ``v`` and ``chi = -1`` in ``slot``."""
    chi = {key: 0 for key in SLOTS}
    chi[slot] = -1
    return (
        (v, chi["11"]),
        (v, chi["12"]),
        (nmod(v - chi["11"], d), chi["21"]),
        (nmod(v + chi["12"], d), chi["22"]),
    )


def transformed_generators(d: int, cap: int = ENUMERATION_CAP) -> list[tuple[int, int]]:
    """``(v, slot index)`` of every class-(i) generator; a bijection onto ``range(d) x range(4)``."""
    templates = {generator_template(v, slot, d): (v, n) for v in range(d) for n, slot in enumerate(SLOTS)}
    out = []
    for s in class_i_generators(d, cap):
        form = transform_generator(s, d)
        if form not in templates:
            raise RuntimeError(f"generator {s.key()} matches no template: {form}")
        out.append(templates[form])
    if len(set(out)) != len(out):
        raise RuntimeError("two generators share a template")
    return out

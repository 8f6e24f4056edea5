"""Bell kernels built from correlator families: C_d, CGLMP and SLK."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import PAIRS, Behavior, BellError, ComputationRefused, Kernel
from .correlators import cglmp_family, family_sum, general_family

KERNEL_NAMES = ("cd", "cglmp", "cglmp-paper-range", "slk")

# Quantum outcome labeling in which each kernel is stated (see quantum.py).
KERNEL_LABELING = {
    "cd": "sum",
    "cglmp": "difference",
    "cglmp-paper-range": "difference",
    "slk": "difference",
}


class SingularCoefficientError(ComputationRefused, ValueError):
    pass


class NotDecomposableError(BellError, ValueError):
    pass


# ---------------------------------------------------------------------------
# C_d


def build_cd_kernel(d: int) -> Kernel:
    """+1/-1 on residue classes of ``v1 + v2``; integer (exact) coefficients."""
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    s = (np.arange(d)[:, None] + np.arange(d)[None, :]) % d
    zero, minus_one, one = s == 0, s == d - 1, s == 1 % d
    coeffs = np.zeros((2, 2, d, d), dtype=np.int64)
    coeffs[0, 0] = zero.astype(int) - minus_one
    coeffs[1, 1] = zero.astype(int) - minus_one
    coeffs[0, 1] = zero.astype(int) - one
    coeffs[1, 0] = minus_one.astype(int) - zero
    return Kernel(d, coeffs)


def _csc2(x: float) -> float:
    return 1.0 / math.sin(x) ** 2


def cd_quantum_closed_form(d: int) -> float:
    return 2.0 / d**2 * (_csc2(math.pi / (4 * d)) - _csc2(3 * math.pi / (4 * d)))


def noise_threshold(d: int) -> float:
    """Largest white-noise fraction for which the C_d value stays above 2."""
    return 1.0 - 2.0 / cd_quantum_closed_form(d)


# ---------------------------------------------------------------------------
# CGLMP


def cglmp_coefficient(d: int, k: int) -> Fraction:
    return 1 - Fraction(2 * k, d - 1)


def cglmp_k_max(d: int, preset: str = "conventional") -> int:
    """Upper summation limit: ``"full"`` uses ``d // 2``; ``"conventional"``
    drops the wrapped ``k = d/2`` term at even ``d``."""
    if preset == "full":
        return d // 2
    if preset == "conventional":
        return d // 2 - 1 if d % 2 == 0 else d // 2
    raise ValueError(f"unknown CGLMP range preset {preset!r}")


def kernel_from_families(d: int, weighted: Sequence[tuple], dtype=object) -> Kernel:
    """Sum ``weight * C_m`` over ``(weight, family)`` entries into a kernel."""
    coeffs = np.zeros((2, 2, d, d), dtype=dtype)
    if dtype == object:
        coeffs[...] = 0
    for weight, fam in weighted:
        i, j = fam.pair
        for m, spec in enumerate(fam.specs):
            (p1, p2), (q1, q2) = spec.cells(m, d)
            coeffs[i - 1, j - 1, p1, p2] += weight
            coeffs[i - 1, j - 1, q1, q2] -= weight
    return Kernel(d, coeffs)


def build_cglmp_kernel(d: int, k_max: int | None = None) -> Kernel:
    """CGLMP kernel with exact rational coefficients ``1 - 2k/(d-1)``."""
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if k_max is None:
        k_max = cglmp_k_max(d)
    if not 0 <= k_max <= d // 2:
        raise ValueError(f"k_max must lie in [0, {d // 2}], got {k_max}")
    weighted = [
        (cglmp_coefficient(d, k), cglmp_family(d, pair, k)) for k in range(k_max + 1) for pair in PAIRS
    ]
    kernel = kernel_from_families(d, weighted)
    if all(x.denominator == 1 for x in map(Fraction, kernel.coeffs.flat)):
        return Kernel(d, kernel.coeffs.astype(np.int64))
    return kernel


# ---------------------------------------------------------------------------
# SLK


@dataclass(frozen=True)
class SlkParams:
    nu: Fraction
    nu_l: dict

    def __post_init__(self):
        object.__setattr__(self, "nu", Fraction(self.nu))
        nu_l = {tuple(pair): Fraction(value) for pair, value in dict(self.nu_l).items()}
        if set(nu_l) != set(PAIRS):
            raise ValueError("nu_l needs one entry per setting pair")
        object.__setattr__(self, "nu_l", nu_l)

    def __hash__(self):
        return hash((self.nu, tuple(sorted(self.nu_l.items()))))

    def alpha_l(self, pair: tuple[int, int], alpha: int) -> Fraction:
        return self.nu + alpha + self.nu_l[tuple(pair)]

    def check(self, d: int) -> None:
        for pair in PAIRS:
            for alpha in range(d):
                if self.alpha_l(pair, alpha).denominator == 1:
                    raise SingularCoefficientError(
                        f"alpha_l = {self.alpha_l(pair, alpha)} is an integer for pair {pair}, alpha={alpha}"
                    )

    def to_json(self) -> dict[str, str]:
        out = {"nu": str(self.nu)}
        for (i, j), value in sorted(self.nu_l.items()):
            out[f"nu{i}{j}"] = str(value)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SlkParams":
        keys = ("nu", "nu11", "nu12", "nu21", "nu22")
        missing = [key for key in keys if key not in obj]
        if missing:
            raise ValueError(f"SLK parameters missing field(s): {', '.join(missing)}")
        try:
            return cls(
                Fraction(obj["nu"]),
                {(i, j): Fraction(obj[f"nu{i}{j}"]) for i, j in PAIRS},
            )
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed SLK parameter: {exc}") from None


# nu_12 = -1/2 is the value that matches the canonical measurement settings;
# the "printed" preset keeps +1/2 for comparison.
SLK_PRESETS = {
    "canonical": SlkParams(Fraction(1, 4), {(1, 1): 0, (2, 2): 0, (2, 1): Fraction(1, 2), (1, 2): Fraction(-1, 2)}),
    "printed": SlkParams(Fraction(1, 4), {(1, 1): 0, (2, 2): 0, (2, 1): Fraction(1, 2), (1, 2): Fraction(1, 2)}),
}
CANONICAL_SLK_PARAMS = SLK_PRESETS["canonical"]


def slk_coefficient(d: int, params: SlkParams, pair: tuple[int, int], alpha: int) -> float:
    """``sin(2 pi a) [cot(pi a / d) - cot(pi a)] / 4`` with ``a = nu + alpha + nu_l``."""
    if not 0 <= alpha < d:
        raise ValueError(f"alpha must lie in [0, {d - 1}], got {alpha}")
    a = params.alpha_l(pair, alpha)
    if a.denominator == 1:
        raise SingularCoefficientError(f"alpha_l = {a} is an integer; cot(pi * alpha_l) is singular")
    x = float(a)
    return math.sin(2 * math.pi * x) * (1 / math.tan(math.pi * x / d) - 1 / math.tan(math.pi * x)) / 4


def slk_coefficients(d: int, params: SlkParams, pair: tuple[int, int]) -> list[float]:
    return [slk_coefficient(d, params, pair, alpha) for alpha in range(d)]


def build_slk_kernel(d: int, params: SlkParams | None = None) -> Kernel:
    """Coefficient ``f_l(alpha)`` on every cell with ``v1 - v2 = alpha (mod d)``."""
    params = CANONICAL_SLK_PARAMS if params is None else params
    params.check(d)
    diff = (np.arange(d)[:, None] - np.arange(d)[None, :]) % d
    coeffs = np.zeros((2, 2, d, d))
    for i, j in PAIRS:
        f = np.array(slk_coefficients(d, params, (i, j)))
        coeffs[i - 1, j - 1] = f[diff]
    return Kernel(d, coeffs)


def slk_lhv_formula(d: int) -> float:
    """Local bound ``[3 cot(pi/4d) - cot(3 pi/4d)] / 4 - 1`` of the SLK kernel."""
    return (3 / math.tan(math.pi / (4 * d)) - 1 / math.tan(3 * math.pi / (4 * d))) / 4 - 1


def slk_lhv_formula_printed(d: int) -> float:
    """Variant with ``cot(pi/3d)`` in the second term (kept for comparison)."""
    return (3 / math.tan(math.pi / (4 * d)) - 1 / math.tan(math.pi / (3 * d))) / 4 - 1


@dataclass(frozen=True)
class SignedDecomposition:
    """Terms ``(alpha, beta, weight)`` with ``coeffs = sum w * (e_alpha - e_beta)``."""

    terms: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(t) for t in self.terms))
        if any(w < 0 for _, _, w in self.terms):
            raise ValueError("decomposition weights must be non-negative")

    def reconstruct(self, d: int) -> list[float]:
        out = [0.0] * d
        for alpha, beta, w in self.terms:
            out[alpha] += w
            out[beta] -= w
        return out


def decompose_zero_sum(coeffs: Sequence[float], tol: float = 1e-10) -> SignedDecomposition:
    """Greedy transport from positive entries to negative entries.

    At each step the largest remaining source is paired with the
    largest-magnitude remaining sink (ties go to the smaller index) and the
    smaller residual is moved.
    """
    coeffs = [float(c) for c in coeffs]
    if abs(sum(coeffs)) > tol:
        raise NotDecomposableError(f"coefficients sum to {sum(coeffs)!r}, not zero")
    scale = max([abs(c) for c in coeffs] + [1.0])
    eps = 1e-12 * scale
    residual = list(coeffs)
    terms = []
    while True:
        sources = [(r, -i) for i, r in enumerate(residual) if r > eps]
        sinks = [(-r, -i) for i, r in enumerate(residual) if r < -eps]
        if not sources or not sinks:
            break
        alpha = -max(sources)[1]
        beta = -max(sinks)[1]
        w = min(residual[alpha], -residual[beta])
        terms.append((alpha, beta, w))
        residual[alpha] -= w
        residual[beta] += w
        # absorb rounding so the exhausted side leaves the pool
        if residual[alpha] <= eps:
            residual[alpha] = 0.0
        if residual[beta] >= -eps:
            residual[beta] = 0.0
    return SignedDecomposition(tuple(terms))


def slk_value_via_decomposition(b: Behavior, params: SlkParams | None = None) -> float:
    """SLK kernel value computed as weighted correlator differences."""
    params = CANONICAL_SLK_PARAMS if params is None else params
    d = b.d
    total = 0.0
    for pair in PAIRS:
        dec = decompose_zero_sum(slk_coefficients(d, params, pair))
        for alpha, beta, w in dec.terms:
            total += w * family_sum(b, general_family(d, pair, alpha, beta, sigma=1))
    return total


# ---------------------------------------------------------------------------
# registry


def build_kernel(name: str, d: int, k_max: int | None = None, slk_params: SlkParams | None = None) -> Kernel:
    if name == "cd":
        return build_cd_kernel(d)
    if name == "cglmp":
        return build_cglmp_kernel(d, cglmp_k_max(d, "conventional") if k_max is None else k_max)
    if name == "cglmp-paper-range":
        return build_cglmp_kernel(d, cglmp_k_max(d, "full") if k_max is None else k_max)
    if name == "slk":
        return build_slk_kernel(d, slk_params)
    raise ValueError(f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}")

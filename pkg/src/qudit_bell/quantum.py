"""Quantum behaviors of the maximally entangled two-qudit state.

Two outcome labelings are supported for party 2:

``"sum"``
    Both parties measure in the Fourier-type basis
    ``|l> = d^{-1/2} sum_m exp(2 pi i m (l + n) / d) |m>``.  Joint
    probabilities then depend on ``v1 + v2``; correlators with
    ``sigma = -1`` (residue classes of ``v1 + v2``) are the natural ones.

``"difference"``
    Party 2 reports the label ``-l mod d`` for basis vector ``|l>``.  This is a
    local relabeling (it maps local models onto local models), under which
    probabilities depend on ``v1 - v2``; correlators with ``sigma = +1``,
    including the CGLMP and SLK families, are the natural ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    PAIRS,
    CANONICAL_SETTINGS,
    Behavior,
    ComputationRefused,
    MeasurementSettings,
    uniform_behavior,
)

LABELINGS = ("sum", "difference")


class SingularFormulaError(ComputationRefused, ValueError):
    pass


def _check_labeling(labeling: str) -> None:
    if labeling not in LABELINGS:
        raise ValueError(f"labeling must be one of {LABELINGS}, got {labeling!r}")


@dataclass(frozen=True)
class BellState:
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")

    def amplitudes(self) -> np.ndarray:
        """``psi[m1, m2]`` in the computational basis."""
        return np.eye(self.d, dtype=complex) / math.sqrt(self.d)

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes().ravel()


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal basis; ``vectors[l]`` is the state reported as outcome ``l``."""

    d: int
    n: Fraction
    vectors: np.ndarray

    @classmethod
    def build(cls, d: int, n, negate_labels: bool = False) -> "MeasurementBasis":
        n = Fraction(n)
        labels = np.arange(d)
        if negate_labels:
            labels = (-labels) % d
        m = np.arange(d)
        phase = 2 * np.pi * np.outer(labels + float(n), m) / d
        vectors = np.exp(1j * phase) / math.sqrt(d)
        vectors.setflags(write=False)
        return cls(d, n, vectors)

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


@dataclass(frozen=True)
class NoisyState:
    """White-noise mixture ``p/d^2 * 1 + (1 - p) |psi_d><psi_d|``."""

    d: int
    p_noise: float

    def __post_init__(self):
        if not 0.0 <= self.p_noise <= 1.0:
            raise ValueError(f"p_noise must lie in [0, 1], got {self.p_noise}")

    @property
    def base(self) -> BellState:
        return BellState(self.d)

    def behavior(self, settings: MeasurementSettings = CANONICAL_SETTINGS, labeling: str = "sum") -> Behavior:
        return noisy_behavior(self.d, settings, self.p_noise, labeling)


def _phase_offset(settings: MeasurementSettings, pair: tuple[int, int]) -> Fraction:
    i, j = pair
    return settings.phase(1, i) + settings.phase(2, j)


def closed_form_probability(
    d: int,
    settings: MeasurementSettings,
    pair: tuple[int, int],
    v1: int,
    v2: int,
    labeling: str = "sum",
) -> float:
    """``1 / (2 d^3 sin^2(pi x / d))`` with ``x = v1 +/- v2 + n1 + n2``.

    The formula assumes ``n1 + n2`` is an odd multiple of 1/4 (true for the
    canonical settings); other offsets, and arguments where the sine
    vanishes, raise :class:`SingularFormulaError`.  Use
    :func:`oracle_behavior` in those cases.
    """
    _check_labeling(labeling)
    if not (0 <= v1 < d and 0 <= v2 < d):
        raise ValueError(f"outcomes ({v1}, {v2}) out of range for d={d}")
    offset = _phase_offset(settings, pair)
    if (4 * offset).denominator != 1 or (4 * offset).numerator % 2 == 0:
        raise SingularFormulaError(
            f"closed form needs n1 + n2 to be an odd multiple of 1/4 (got {offset}); use oracle_behavior"
        )
    x = v1 + (v2 if labeling == "sum" else -v2) + offset
    if (x / d).denominator == 1:
        raise SingularFormulaError(f"sine argument vanishes at pair {pair}, outcomes ({v1}, {v2}); use oracle_behavior")
    return 1.0 / (2 * d**3 * math.sin(math.pi * float(x) / d) ** 2)


def closed_form_behavior(d: int, settings: MeasurementSettings = CANONICAL_SETTINGS, labeling: str = "sum") -> Behavior:
    """Vectorized closed form, convenient for large ``d``."""
    _check_labeling(labeling)
    tables = np.empty((2, 2, d, d))
    v = np.arange(d)
    sign = 1 if labeling == "sum" else -1
    for pair in PAIRS:
        # validates the offset and one representative cell
        closed_form_probability(d, settings, pair, 0, 0, labeling)
        x = v[:, None] + sign * v[None, :] + float(_phase_offset(settings, pair))
        tables[pair[0] - 1, pair[1] - 1] = 1.0 / (2 * d**3 * np.sin(np.pi * x / d) ** 2)
    return Behavior(d, tables)


def oracle_behavior(d: int, settings: MeasurementSettings = CANONICAL_SETTINGS, labeling: str = "sum") -> Behavior:
    """Joint probabilities from explicit inner products with the Bell state."""
    _check_labeling(labeling)
    psi = BellState(d).amplitudes()
    tables = np.empty((2, 2, d, d))
    for i, j in PAIRS:
        b1 = MeasurementBasis.build(d, settings.phase(1, i)).vectors
        b2 = MeasurementBasis.build(d, settings.phase(2, j), negate_labels=labeling == "difference").vectors
        # <l1| <l2| psi> = sum_{m1,m2} conj(b1[l1,m1]) conj(b2[l2,m2]) psi[m1,m2]
        amp = b1.conj() @ psi @ b2.conj().T
        tables[i - 1, j - 1] = np.abs(amp) ** 2
    return Behavior(d, tables)


def noisy_behavior(
    d: int,
    settings: MeasurementSettings = CANONICAL_SETTINGS,
    p_noise: float = 0.0,
    labeling: str = "sum",
) -> Behavior:
    if not 0.0 <= p_noise <= 1.0:
        raise ValueError(f"p_noise must lie in [0, 1], got {p_noise}")
    pure = oracle_behavior(d, settings, labeling).tables
    noise = uniform_behavior(d).tables
    return Behavior(d, (1.0 - p_noise) * pure + p_noise * noise)


# ---------------------------------------------------------------------------
# two-qubit example: setting 1 measures sigma_x, setting 2 measures sigma_z


def _qubit_eigenvectors() -> dict[str, np.ndarray]:
    s = 1 / math.sqrt(2)
    return {
        # |v>_x = (|0> + (-1)^v |1>) / sqrt(2)
        "x": np.array([[s, s], [s, -s]], dtype=complex),
        "z": np.eye(2, dtype=complex),
    }


def qubit_state(xi: float, dephased: bool = False) -> np.ndarray:
    """Density matrix of ``sin(xi)|00> + cos(xi)|11>`` or its dephased mixture."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.sin(xi)
    psi[3] = math.cos(xi)
    rho = np.outer(psi, psi.conj())
    if dephased:
        rho = np.diag(np.diag(rho))
    return rho


def qubit_demo_behavior(xi: float, dephased: bool = False) -> Behavior:
    rho = qubit_state(xi, dephased)
    eig = _qubit_eigenvectors()
    axes = {1: "x", 2: "z"}
    tables = np.empty((2, 2, 2, 2))
    for i, j in PAIRS:
        for v1 in range(2):
            for v2 in range(2):
                e = np.kron(eig[axes[i]][v1], eig[axes[j]][v2])
                tables[i - 1, j - 1, v1, v2] = np.real(e.conj() @ rho @ e)
    return Behavior(2, tables)


def qubit_pure_vs_mixed_demo(xi: float) -> tuple[float, float]:
    """``C^(x) + C^(z)`` for the pure state and for its dephased mixture."""
    from .correlators import family_sum, two_level_family

    if not 0.0 <= xi <= math.pi / 2:
        raise ValueError(f"xi must lie in [0, pi/2], got {xi}")
    values = []
    for dephased in (False, True):
        b = qubit_demo_behavior(xi, dephased)
        values.append(family_sum(b, two_level_family((1, 1))) + family_sum(b, two_level_family((2, 2))))
    return values[0], values[1]

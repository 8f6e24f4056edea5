"""Local-hidden-variable extrema of kernels by enumerating deterministic strategies.

Two engines:

* :func:`lhv_oracle` evaluates all ``d**4`` strategies.
* :func:`lhv_fast` uses the separable structure
  ``sum_ij K_ij[v1_i, v2_j]``: once party 2's outcomes ``(b, c)`` are fixed,
  the two outcomes of party 1 are independent ``d``-way maximizations, so the
  work is ``O(d**3)``.

Both report the lexicographically smallest maximizer/minimizer on
``(v1(1), v1(2), v2(1), v2(2))`` and values computed with the same
summation order as :func:`~qudit_bell.core.strategy_kernel_value`, so they
agree bit for bit.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CANONICAL_SETTINGS,
    ComputationRefused,
    DeterministicStrategy,
    Kernel,
    MeasurementSettings,
    evaluate_kernel,
)
from .kernels import KERNEL_LABELING, SlkParams, build_kernel, slk_lhv_formula
from .quantum import noisy_behavior

log = logging.getLogger(__name__)

ENUMERATION_CAP = 10**8
VIOLATION_TOL = 1e-9


class EnumerationCapError(ComputationRefused):
    pass


@dataclass(frozen=True)
class LhvResult:
    max_value: float
    argmax: DeterministicStrategy
    min_value: float
    argmin: DeterministicStrategy
    strategy_count: int


def default_workers() -> int:
    return os.cpu_count() or 1


def _scalar(x):
    return x.item() if isinstance(x, np.generic) else x


def _better(candidate, incumbent, maximize: bool) -> bool:
    """Prefer the larger (smaller) value, then the lexicographically smaller strategy."""
    if incumbent is None:
        return True
    (v1, s1), (v2, s2) = candidate, incumbent
    if v1 != v2:
        return v1 > v2 if maximize else v1 < v2
    return s1 < s2


def merge_partials(partials) -> tuple:
    """Merge per-range ``(max, argmax, min, argmin)`` tuples deterministically."""
    best_max = best_min = None
    for max_v, argmax, min_v, argmin in partials:
        if _better((max_v, argmax), best_max, True):
            best_max = (max_v, argmax)
        if _better((min_v, argmin), best_min, False):
            best_min = (min_v, argmin)
    return best_max[0], best_max[1], best_min[0], best_min[1]


def _oracle_block(c: np.ndarray, a: int):
    """All strategies with ``v1(1) = a``; values indexed ``[e, b, cc]``."""
    # ((K11 + K12) + K21) + K22, matching strategy_kernel_value
    first = c[0, 0, a][:, None] + c[0, 1, a][None, :]  # [b, cc]
    values = (first[None, :, :] + c[1, 0][:, :, None]) + c[1, 1][:, None, :]
    shape = values.shape
    imax = int(np.argmax(values))
    imin = int(np.argmin(values))
    smax = DeterministicStrategy.from_tuple((a,) + np.unravel_index(imax, shape))
    smin = DeterministicStrategy.from_tuple((a,) + np.unravel_index(imin, shape))
    return _scalar(values.flat[imax]), smax, _scalar(values.flat[imin]), smin


def lhv_oracle(k: Kernel, cap: int = ENUMERATION_CAP, workers: int = 1) -> LhvResult:
    """Exhaustive enumeration over every deterministic strategy."""
    d = k.d
    count = d**4
    if count > cap:
        raise EnumerationCapError(f"d**4 = {count} strategies exceeds the cap {cap}; use lhv_fast")
    c = k.coeffs
    if workers <= 1:
        partials = [_oracle_block(c, a) for a in range(d)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda a: _oracle_block(c, a), range(d)))
    max_v, argmax, min_v, argmin = merge_partials(partials)
    return LhvResult(max_v, argmax, min_v, argmin, count)


def _fast_max(c: np.ndarray):
    d = c.shape[2]
    exact = c.dtype == object or np.issubdtype(c.dtype, np.integer)
    s1 = c[0, 0][:, :, None] + c[0, 1][:, None, :]  # [a, b, cc]
    s2 = c[1, 0][:, :, None] + c[1, 1][:, None, :]  # [e, b, cc]
    m1 = s1.max(axis=0)
    m2 = s2.max(axis=0)
    separable = m1 + m2  # [b, cc]
    if exact:
        eps = 0
    else:
        # bound on the gap between separable and canonical summation orders
        eps = 64 * np.finfo(float).eps * (4 * float(np.abs(c).max()) + 1e-300)
    top = separable.max()
    best = None
    for b, cc in zip(*np.nonzero(np.asarray(separable >= top - 2 * eps, dtype=bool))):
        rows = np.nonzero(np.asarray(s1[:, b, cc] >= m1[b, cc] - eps, dtype=bool))[0]
        cols = np.nonzero(np.asarray(s2[:, b, cc] >= m2[b, cc] - eps, dtype=bool))[0]
        values = (s1[rows, b, cc][:, None] + c[1, 0, cols, b][None, :]) + c[1, 1, cols, cc][None, :]
        flat = int(np.argmax(values))
        r, q = np.unravel_index(flat, values.shape)
        candidate = (_scalar(values.flat[flat]), (int(rows[r]), int(cols[q]), int(b), int(cc)))
        if _better(candidate, best, True):
            best = candidate
    return best[0], DeterministicStrategy.from_tuple(best[1]), d


def lhv_fast(k: Kernel) -> LhvResult:
    """Best-response enumeration, ``O(d**3)``."""
    max_v, argmax, d = _fast_max(k.coeffs)
    neg_max, argmin, _ = _fast_max(-k.coeffs)
    return LhvResult(max_v, argmax, -neg_max, argmin, d**4)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ViolationReport:
    """``ratio`` is ``quantum_value / lhv_max`` for every kernel."""

    d: int
    kernel_name: str
    quantum_value: float
    lhv_max: float
    ratio: float
    violated: bool
    lhv_argmax: DeterministicStrategy
    p_noise: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "kernel": self.kernel_name,
            "d": self.d,
            "quantum": self.quantum_value,
            "lhv_max": float(self.lhv_max),
            "lhv_argmax": list(self.lhv_argmax.key()),
            "violated": self.violated,
            "ratio": self.ratio,
        }
        if self.p_noise:
            out["p_noise"] = self.p_noise
        out.update(self.extras)
        return out


def violation_report(
    kernel_name: str,
    d: int,
    p_noise: float = 0.0,
    settings: MeasurementSettings = CANONICAL_SETTINGS,
    k_max: int | None = None,
    slk_params: SlkParams | None = None,
) -> ViolationReport:
    kernel = build_kernel(kernel_name, d, k_max=k_max, slk_params=slk_params)
    behavior = noisy_behavior(d, settings, p_noise, KERNEL_LABELING[kernel_name])
    quantum = float(evaluate_kernel(kernel, behavior))
    lhv = lhv_fast(kernel)
    lhv_max = lhv.max_value
    extras = {}
    if kernel_name == "slk":
        formula = slk_lhv_formula(d)
        extras = {"lhv_formula": formula, "lhv_formula_gap": float(lhv_max) - formula}
    log.debug("violation report %s d=%d: quantum=%r lhv=%r", kernel_name, d, quantum, lhv_max)
    return ViolationReport(
        d=d,
        kernel_name=kernel_name,
        quantum_value=quantum,
        lhv_max=lhv_max,
        ratio=quantum / float(lhv_max) if lhv_max else float("inf"),
        violated=quantum > lhv_max + VIOLATION_TOL,
        lhv_argmax=lhv.argmax,
        p_noise=p_noise,
        extras=extras,
    )


def noise_tolerance_scan(
    kernel_name: str,
    d: int,
    steps: int,
    settings: MeasurementSettings = CANONICAL_SETTINGS,
    k_max: int | None = None,
    slk_params: SlkParams | None = None,
) -> list[tuple[float, float, bool]]:
    """Kernel value on the noisy Bell state over ``steps`` evenly spaced noise levels in [0, 1]."""
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    kernel = build_kernel(kernel_name, d, k_max=k_max, slk_params=slk_params)
    if kernel.exact:
        kernel = kernel.as_float()
    lhv_max = float(lhv_fast(kernel).max_value)
    labeling = KERNEL_LABELING[kernel_name]
    rows = []
    for p in np.linspace(0.0, 1.0, steps):
        value = float(evaluate_kernel(kernel, noisy_behavior(d, settings, float(p), labeling)))
        rows.append((float(p), value, value > lhv_max + VIOLATION_TOL))
    return rows


def noise_crossover(rows) -> tuple[float, float] | None:
    """Bracket ``(last violated p, first non-violated p)`` of a scan, if any."""
    for (p0, _, v0), (p1, _, v1) in zip(rows, rows[1:]):
        if v0 and not v1:
            return p0, p1
    return None

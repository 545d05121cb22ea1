"""Unruh-detector example on two truncated modes.

The inertial vacuum restricted to one frequency is a two-mode squeezed
state pairing a mode in each Rindler wedge, with ``tanh r = exp(-pi w / a)``.
Its reduction to one wedge is thermal at ``T = a / (2 pi)``. A detector for
the accelerated observer is the two-outcome POVM
``{alpha a(chi)^dag a(chi), I - alpha a(chi)^dag a(chi)}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import (
    DensityMatrix,
    FockSpace,
    Operator,
    annihilation_op,
    creation_op,
    default_tol,
    expm_antihermitian,
    identity,
    ket,
    mode_op,
    normalize_mode,
    partial_trace,
    pure_state,
    trace_distance,
)
from .povm import POVM, POVMError, probabilities, validate_povm

__all__ = [
    "AlphaTooLargeError",
    "SqueezingParams",
    "DetectorPOVM",
    "ComparisonRow",
    "RepresentationComparison",
    "squeezing_generator",
    "squeezing_unitary",
    "two_mode_squeezed_state",
    "truncation_tail",
    "rindler_thermal_state",
    "detector_povm",
    "conjugate_povm",
    "compare_representations",
]


class AlphaTooLargeError(POVMError):
    def __init__(self, alpha: float, cutoff: int):
        self.alpha = alpha
        self.cutoff = cutoff
        super().__init__(
            f"alpha={alpha} exceeds 1/n_max={1 / cutoff:.6g}; the no-click effect would be negative"
        )


@dataclass(frozen=True)
class SqueezingParams:
    """Acceleration ``a`` and mode frequency ``omega`` in natural units."""

    a: float
    omega: float

    def __post_init__(self):
        if not (self.a > 0 and self.omega > 0):
            raise ValueError("acceleration and frequency must be positive")

    @property
    def temperature(self) -> float:
        return self.a / (2 * math.pi)

    @property
    def tanh_r(self) -> float:
        return math.exp(-math.pi * self.omega / self.a)

    @property
    def r(self) -> float:
        return math.atanh(self.tanh_r)

    @property
    def x(self) -> float:
        """Boltzmann ratio ``tanh^2 r = exp(-omega / T)``."""
        return math.exp(-2 * math.pi * self.omega / self.a)

    def mean_occupation(self) -> float:
        """Untruncated Bose-Einstein occupation ``1 / (exp(omega/T) - 1)``."""
        return 1.0 / math.expm1(2 * math.pi * self.omega / self.a)


def truncation_tail(x: float, cutoff: int) -> float:
    """Weight of the untruncated thermal series above the cutoff."""
    return x ** (cutoff + 1)


def _require_modes(space: FockSpace, modes: int):
    if len(space.dims) != modes:
        raise ValueError(f"expected a {modes}-mode space, got {len(space.dims)} modes")


def squeezing_generator(space: FockSpace, r: float) -> Operator:
    """``r (a_1^dag a_2^dag - a_1 a_2)`` on a two-mode space."""
    _require_modes(space, 2)
    a1, a2 = annihilation_op(space, 0), annihilation_op(space, 1)
    c1, c2 = creation_op(space, 0), creation_op(space, 1)
    return (c1 @ c2 - a1 @ a2) * r


def squeezing_unitary(space: FockSpace, r: float) -> Operator:
    return expm_antihermitian(squeezing_generator(space, r))


def two_mode_squeezed_state(
    space: FockSpace, params: SqueezingParams, method: str = "series"
) -> DensityMatrix:
    """Pure two-mode squeezed vacuum.

    ``method="series"`` sums ``tanh^n r |n, n>`` up to the cutoff and
    renormalizes; ``method="generator"`` exponentiates the truncated
    squeezing generator and applies it to the vacuum.
    """
    _require_modes(space, 2)
    if method == "series":
        t = params.tanh_r
        psi = np.zeros(space.dim, dtype=complex)
        for n in range(space.cutoff + 1):
            psi[space.index((n, n))] = t**n
    elif method == "generator":
        u = squeezing_unitary(space, params.r)
        psi = u.entries @ ket(space, (0, 0))
    else:
        raise ValueError(f"unknown method {method!r}")
    return pure_state(space, psi)


def rindler_thermal_state(space: FockSpace, params: SqueezingParams) -> DensityMatrix:
    """Truncated, renormalized Gibbs state ``(1-x) x^n / (1 - x^(cutoff+1))``."""
    _require_modes(space, 1)
    x = params.x
    n = np.arange(space.cutoff + 1)
    w = (1 - x) * x**n / (1 - x ** (space.cutoff + 1))
    return DensityMatrix(space, np.diag(w / w.sum()).astype(complex))


@dataclass(frozen=True, eq=False)
class DetectorPOVM:
    alpha: float
    chi: np.ndarray = field(repr=False)
    povm: POVM = field(repr=False)

    @property
    def click(self) -> Operator:
        return self.povm.effects[0]


def detector_povm(
    space: FockSpace, alpha: float, chi=None, tol: float | None = None
) -> DetectorPOVM:
    """Two-outcome detector ``{"click": E1, "no_click": I - E1}``.

    ``alpha * n_max <= 1`` is required; the resulting effects are still
    checked in full, since a multimode ``chi`` can push ``a(chi)^dag a(chi)``
    above ``n_max`` on the truncated space.
    """
    if chi is None:
        chi = np.zeros(len(space.dims))
        chi[0] = 1.0
    unit, _ = normalize_mode(chi)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if alpha * space.cutoff > 1 + 1e-12:
        raise AlphaTooLargeError(alpha, space.cutoff)
    am = mode_op(space, unit)
    e1 = (am.adjoint() @ am) * alpha
    e2 = identity(space) - e1
    povm = validate_povm({"click": e1, "no_click": e2}, tol=tol)
    return DetectorPOVM(float(alpha), unit, povm)


def conjugate_povm(u: Operator, povm: POVM, tol: float | None = None) -> POVM:
    """Effects mapped to ``U E U^dag``."""
    tol = default_tol() if tol is None else tol
    if not u.is_unitary(tol):
        raise ValueError("conjugating operator is not unitary")
    ud = u.adjoint()
    effects = [u @ e @ ud for e in povm.effects]
    return validate_povm(effects, povm.outcomes, tol=tol)


@dataclass(frozen=True)
class ComparisonRow:
    cutoff: int
    p_thermal: float
    p_series: float
    p_generator: float
    tail: float

    @property
    def d12(self) -> float:
        return abs(self.p_thermal - self.p_series)

    @property
    def d13(self) -> float:
        return abs(self.p_thermal - self.p_generator)


@dataclass(frozen=True)
class RepresentationComparison:
    params: SqueezingParams
    alpha: float
    rows: tuple[ComparisonRow, ...]
    series_tol: float = 1e-9
    generator_tol: float = 1e-6

    @property
    def series_agree(self) -> bool:
        return all(r.d12 < self.series_tol for r in self.rows)

    @property
    def generator_converges(self) -> bool:
        d = [r.d13 for r in self.rows]
        shrinking = all(b < a for a, b in zip(d, d[1:]))
        return shrinking and d[-1] < self.generator_tol

    @property
    def ok(self) -> bool:
        return self.series_agree and self.generator_converges

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cutoff", "p_thermal", "p_series", "p_generator", "d12", "d13", "tail"])
        for r in self.rows:
            w.writerow(
                [r.cutoff]
                + [f"{v:.17g}" for v in (r.p_thermal, r.p_series, r.p_generator, r.d12, r.d13, r.tail)]
            )
        return buf.getvalue()


def compare_representations(
    params: SqueezingParams,
    alpha: float,
    chi=(1.0,),
    cutoffs: Sequence[int] = (5, 10, 20, 30),
) -> RepresentationComparison:
    """Click probability of the accelerated detector computed three ways.

    For each cutoff: (i) on the truncated Gibbs state, (ii) on the wedge
    reduction of the series squeezed state, (iii) on the wedge reduction of
    the generator squeezed state. ``chi`` is a mode function over the single
    accelerated mode.
    """
    cutoffs = list(cutoffs)
    if not cutoffs:
        raise ValueError("at least one cutoff is required")
    rows = []
    for n in cutoffs:
        one = FockSpace(1, n)
        two = FockSpace(2, n)
        det = detector_povm(one, alpha, chi)
        thermal = rindler_thermal_state(one, params)
        series = partial_trace(two_mode_squeezed_state(two, params, "series"), keep=[0])
        gen = partial_trace(two_mode_squeezed_state(two, params, "generator"), keep=[0])
        p = [float(probabilities(det.povm, s)[0]) for s in (thermal, series, gen)]
        rows.append(ComparisonRow(n, p[0], p[1], p[2], truncation_tail(params.x, n)))
    return RepresentationComparison(params, float(alpha), tuple(rows))


def reduced_state_distance(space: FockSpace, params: SqueezingParams, method: str = "series") -> float:
    """Trace distance between the wedge reduction and the truncated Gibbs state."""
    _require_modes(space, 2)
    reduced = partial_trace(two_mode_squeezed_state(space, params, method), keep=[0])
    return trace_distance(reduced, rindler_thermal_state(FockSpace(1, space.cutoff), params))

"""Generalized measurements on finite spaces.

Outcome sets are finite and discrete; the events are all subsets of the
labels, so additivity over disjoint events holds by summing effects.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hilbert import (
    NotHermitianError,
    Operator,
    ProductSpace,
    Space,
    _hermitian_part,
    _require_same,
    default_tol,
    expectation,
)

__all__ = [
    "POVMError",
    "NotPositiveError",
    "IncompletenessError",
    "Violation",
    "POVM",
    "PVM",
    "NeumarkDilation",
    "FrequencyReport",
    "check_povm",
    "validate_povm",
    "probabilities",
    "spectral_pvm",
    "neumark_dilate",
    "psd_sqrt",
    "simulate_frequencies",
    "random_povm",
]


class POVMError(ValueError):
    pass


class NotPositiveError(POVMError):
    def __init__(self, label: str, min_eigenvalue: float):
        self.label = label
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"effect {label!r} has eigenvalue {min_eigenvalue:.3e} < 0")


class IncompletenessError(POVMError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"effects do not sum to the identity (residual {residual:.3e})")


@dataclass(frozen=True)
class Violation:
    """One failed axiom, as reported by :func:`check_povm`."""

    axiom: str  # "hermitian" | "positivity" | "completeness"
    label: str | None
    magnitude: float

    def to_error(self) -> POVMError:
        if self.axiom == "completeness":
            return IncompletenessError(self.magnitude)
        if self.axiom == "positivity":
            return NotPositiveError(self.label, -self.magnitude)
        return POVMError(f"effect {self.label!r} is not Hermitian (deviation {self.magnitude:.3e})")


@dataclass(frozen=True, eq=False)
class POVM:
    space: Space
    outcomes: tuple[str, ...]
    effects: tuple[Operator, ...] = field(repr=False)

    def __len__(self):
        return len(self.outcomes)

    def effect(self, labels: str | Iterable[str]) -> Operator:
        """Effect of an event: a single label or any subset of labels."""
        if isinstance(labels, str):
            labels = [labels]
        labels = set(labels)
        unknown = labels - set(self.outcomes)
        if unknown:
            raise KeyError(f"unknown outcomes {sorted(unknown)}")
        total = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for lab, e in zip(self.outcomes, self.effects):
            if lab in labels:
                total = total + e.entries
        return Operator(self.space, total)

    def coarse_grain(self, groups: Mapping[str, Sequence[str]]) -> POVM:
        """Merge outcomes; ``groups`` maps each new label to old labels."""
        used = [lab for g in groups.values() for lab in g]
        if sorted(used) != sorted(self.outcomes):
            raise ValueError("groups must partition the outcome set")
        return POVM(
            self.space,
            tuple(groups),
            tuple(self.effect(members) for members in groups.values()),
        )


class PVM(POVM):
    """POVM with mutually orthogonal projective effects."""


def _as_items(effects, labels):
    if isinstance(effects, Mapping):
        labels = list(effects.keys())
        effects = list(effects.values())
    else:
        effects = list(effects)
        if labels is None:
            labels = [str(k) for k in range(len(effects))]
    labels = [str(lab) for lab in labels]
    if len(labels) != len(effects):
        raise ValueError("one label per effect is required")
    if len(set(labels)) != len(labels):
        raise ValueError("outcome labels must be unique")
    if not effects:
        raise ValueError("a POVM needs at least one effect")
    return labels, effects


def check_povm(effects, labels=None, tol: float | None = None) -> list[Violation]:
    """List every axiom violation of an effect collection (empty if valid)."""
    tol = default_tol() if tol is None else tol
    labels, effects = _as_items(effects, labels)
    space = effects[0].space
    for e in effects[1:]:
        _require_same(space, e.space, "effects")
    out = []
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for lab, e in zip(labels, effects):
        m = e.entries
        herm_dev = float(np.max(np.abs(m - m.conj().T)))
        if herm_dev > tol:
            out.append(Violation("hermitian", lab, herm_dev))
        lam = float(np.linalg.eigvalsh(_hermitian_part(m))[0])
        if lam < -tol:
            out.append(Violation("positivity", lab, -lam))
        total += m
    resid = float(np.linalg.norm(total - np.eye(space.dim), 2))
    if resid > tol:
        out.append(Violation("completeness", None, resid))
    return out


def validate_povm(effects, labels=None, tol: float | None = None) -> POVM:
    """Build a :class:`POVM`, raising on the first violated axiom.

    ``effects`` is a sequence of operators (labelled ``"0"``, ``"1"``, ...
    unless ``labels`` is given) or a mapping from label to operator.
    """
    labels, effects = _as_items(effects, labels)
    violations = check_povm(effects, labels, tol)
    if violations:
        raise violations[0].to_error()
    return POVM(effects[0].space, tuple(labels), tuple(effects))


def probabilities(povm: POVM, rho: Operator, tol: float | None = None) -> np.ndarray:
    """Outcome probabilities ``tr(rho E_k)``.

    Negative values no larger than ``tol`` in magnitude are rounding noise
    and are set to zero.
    """
    tol = default_tol() if tol is None else tol
    _require_same(povm.space, rho.space, "POVM and state")
    p = np.array([expectation(rho, e).real for e in povm.effects])
    p[(p < 0) & (p >= -tol)] = 0.0
    return p


def spectral_pvm(
    a: Operator, cluster_tol: float | None = None, tol: float | None = None
) -> tuple[PVM, np.ndarray]:
    """Projection valued measure of a Hermitian operator.

    Eigenvalues within ``cluster_tol`` of the first member of their cluster
    share one projector. Outcomes are in ascending eigenvalue order and the
    returned eigenvalues are the cluster means.
    """
    tol = default_tol() if tol is None else tol
    if not a.is_hermitian(tol):
        raise NotHermitianError("spectral_pvm requires a Hermitian operator")
    lam, vec = np.linalg.eigh(_hermitian_part(a.entries))
    if cluster_tol is None:
        cluster_tol = 1e-8 * float(np.max(np.abs(lam), initial=0))
    groups = [[0]]
    for k in range(1, len(lam)):
        if lam[k] - lam[groups[-1][0]] <= cluster_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    effects = []
    values = []
    for g in groups:
        v = vec[:, g]
        effects.append(Operator(a.space, v @ v.conj().T))
        values.append(float(np.mean(lam[g])))
    labels = tuple(str(k) for k in range(len(groups)))
    return PVM(a.space, labels, tuple(effects)), np.array(values)


def psd_sqrt(e: Operator, tol: float | None = None, label: str = "?") -> np.ndarray:
    """Principal square root of a positive semidefinite operator."""
    tol = default_tol() if tol is None else tol
    lam, vec = np.linalg.eigh(_hermitian_part(e.entries))
    if lam[0] < -tol:
        raise NotPositiveError(label, float(lam[0]))
    return (vec * np.sqrt(np.clip(lam, 0, None))) @ vec.conj().T


@dataclass(frozen=True, eq=False)
class NeumarkDilation:
    """Projective dilation ``E_k = V^dag P_k V`` of a POVM.

    The dilation space is the outcome register tensored with the original
    space (register index slowest), and ``isometry`` is the ``(m d) x d``
    matrix ``V = sum_k |k> (x) sqrt(E_k)``.
    """

    original: POVM
    dilation_space: ProductSpace
    isometry: np.ndarray = field(repr=False)
    pvm: PVM = field(repr=False)

    def embed(self, rho: Operator) -> Operator:
        """``V rho V^dag`` on the dilation space."""
        _require_same(self.original.space, rho.space, "dilation and state")
        v = self.isometry
        return Operator(self.dilation_space, v @ rho.entries @ v.conj().T)

    def compress(self, op: Operator) -> Operator:
        """``V^dag X V`` back on the original space."""
        v = self.isometry
        return Operator(self.original.space, v.conj().T @ op.entries @ v)

    def probabilities(self, rho: Operator) -> np.ndarray:
        big = self.embed(rho)
        return np.array([expectation(big, p).real for p in self.pvm.effects])

    def isometry_residual(self) -> float:
        v = self.isometry
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))

    def compression_residual(self) -> float:
        return max(
            float(np.max(np.abs(self.compress(p).entries - e.entries)))
            for p, e in zip(self.pvm.effects, self.original.effects)
        )


def neumark_dilate(povm: POVM, tol: float | None = None) -> NeumarkDilation:
    """Square-root (minimal register) Neumark dilation of ``povm``."""
    m = len(povm)
    d = povm.space.dim
    roots = [psd_sqrt(e, tol, lab) for lab, e in zip(povm.outcomes, povm.effects)]
    v = np.vstack(roots)
    space = ProductSpace((m,) + tuple(povm.space.dims))
    projectors = []
    for k in range(m):
        reg = np.zeros((m, m), dtype=complex)
        reg[k, k] = 1.0
        projectors.append(Operator(space, np.kron(reg, np.eye(d))))
    pvm = PVM(space, povm.outcomes, tuple(projectors))
    return NeumarkDilation(povm, space, v, pvm)


@dataclass(frozen=True)
class FrequencyReport:
    """Outcome frequencies from a finite number of shots.

    ``epsilon`` is the five-sigma binomial bound ``5 sqrt(p (1-p) / N)``; an
    outcome is flagged when ``|w - p|`` exceeds it.
    """

    labels: tuple[str, ...]
    probabilities: np.ndarray
    counts: np.ndarray
    shots: int
    frequencies: np.ndarray
    epsilon: np.ndarray

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(self.frequencies - self.probabilities)

    @property
    def violated(self) -> np.ndarray:
        return self.deviations > self.epsilon

    @property
    def ok(self) -> bool:
        return not bool(np.any(self.violated))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "p", "count", "w", "epsilon", "violated"])
        for row in zip(
            self.labels, self.probabilities, self.counts, self.frequencies,
            self.epsilon, self.violated,
        ):
            lab, p, n, freq, eps, bad = row
            w.writerow([lab, f"{p:.17g}", int(n), f"{freq:.17g}", f"{eps:.17g}", str(bool(bad)).lower()])
        return buf.getvalue()


def simulate_frequencies(
    povm: POVM, rho: Operator, shots: int, seed=None, n_sigma: float = 5.0
) -> FrequencyReport:
    """Sample ``shots`` i.i.d. outcomes and compare frequencies to probabilities."""
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots}")
    p = probabilities(povm, rho)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), np.clip(p, 0, None) / np.clip(p, 0, None).sum())
    w = counts / shots
    eps = n_sigma * np.sqrt(np.clip(p * (1 - p), 0, None) / shots)
    return FrequencyReport(povm.outcomes, p, counts, int(shots), w, eps)


def random_povm(space: Space, n_outcomes: int, rng: np.random.Generator) -> POVM:
    """Random POVM from normalized random positive operators.

    Draws ``G_k = Z_k Z_k^dag`` and sets ``E_k = S^{-1/2} G_k S^{-1/2}`` with
    ``S = sum_k G_k``.
    """
    d = space.dim
    gs = []
    for _ in range(n_outcomes):
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        gs.append(z @ z.conj().T)
    s = sum(gs)
    lam, vec = np.linalg.eigh(s)
    s_inv_half = (vec / np.sqrt(lam)) @ vec.conj().T
    effects = [_hermitian_part(s_inv_half @ g @ s_inv_half) for g in gs]
    return validate_povm([Operator(space, e) for e in effects])

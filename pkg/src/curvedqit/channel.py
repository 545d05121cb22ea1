"""Completely positive state transformations in Kraus form.

Ordering convention
-------------------
Throughout this module a channel with Kraus operators ``A_n`` acts as

    T[rho] = sum_n A_n^dag rho A_n

i.e. the adjoint sits on the *left*. This is the mirror image of the more
common ``sum K rho K^dag``; the two are related by ``A_n = K_n^dag``. The
dual (Heisenberg) map carries the mirrored ordering,

    T^dag[B] = sum_n A_n B A_n^dag,

so that ``tr(rho T^dag[B]) = tr(T[rho] B)``. Trace preservation is
``T^dag[I] = sum_n A_n A_n^dag = I``; a selective (trace-decreasing)
operation has ``sum_n A_n A_n^dag <= I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    DensityMatrix,
    Operator,
    Space,
    _hermitian_part,
    _require_same,
    default_tol,
    expectation,
    identity,
)

__all__ = [
    "ChannelError",
    "NotCompletelyPositiveError",
    "VanishingOutcomeError",
    "RepresentationMismatchError",
    "KrausChannel",
    "ChoiMatrix",
    "DualMap",
    "Representation",
    "AlgebraicState",
    "ExpectationRow",
    "apply",
    "choi_from_kraus",
    "choi_from_map",
    "kraus_from_choi",
    "choi_distance",
    "compose",
    "adjoint_channel",
    "pushforward",
    "identity_channel",
    "unitary_channel",
    "replacement_channel",
    "superscattering_channel",
    "random_channel",
]


class ChannelError(ValueError):
    pass


class NotCompletelyPositiveError(ChannelError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"Choi matrix has eigenvalue {min_eigenvalue:.3e} < 0")


class VanishingOutcomeError(ChannelError):
    """A selective operation produced (numerically) zero trace."""


class RepresentationMismatchError(ChannelError):
    pass


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """``T[rho] = sum_n A_n^dag rho A_n`` with the normalization check.

    Construction verifies ``sum_n A_n A_n^dag <= I`` (equality when
    ``selective`` is False) within ``tol``.
    """

    space: Space
    kraus_ops: tuple[Operator, ...] = field(repr=False)
    selective: bool = False
    tol: float | None = field(default=None, repr=False)

    def __post_init__(self):
        ops = tuple(self.kraus_ops)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        for a in ops:
            _require_same(self.space, a.space, "channel and Kraus operator")
        object.__setattr__(self, "kraus_ops", ops)
        tol = default_tol() if self.tol is None else self.tol
        gap = np.eye(self.space.dim) - self.completeness()
        if self.selective:
            lam = float(np.linalg.eigvalsh(_hermitian_part(gap))[0])
            if lam < -tol:
                raise ChannelError(f"sum A A^dag exceeds the identity by {-lam:.3e}")
        else:
            resid = float(np.linalg.norm(gap, 2))
            if resid > tol:
                raise ChannelError(
                    f"non-selective channel is not trace preserving (residual {resid:.3e})"
                )

    def completeness(self) -> np.ndarray:
        """``sum_n A_n A_n^dag``, i.e. the dual map applied to the identity."""
        return sum(a.entries @ a.entries.conj().T for a in self.kraus_ops)

    def __call__(self, rho):
        return apply(self, rho)


def _apply_matrix(ops: Sequence[Operator], m: np.ndarray) -> np.ndarray:
    return sum(a.entries.conj().T @ m @ a.entries for a in ops)


def apply(t: KrausChannel, rho: Operator, tol: float | None = None) -> Operator:
    """Image of ``rho`` under ``t``.

    Non-selective channels return a :class:`DensityMatrix`. Selective ones
    return the unnormalized operator (trace = outcome probability) and
    raise :class:`VanishingOutcomeError` when that trace is below ``tol``.
    """
    tol = default_tol() if tol is None else tol
    _require_same(t.space, rho.space, "channel and state")
    out = _apply_matrix(t.kraus_ops, rho.entries)
    if t.selective:
        p = float(np.trace(out).real)
        if p < tol:
            raise VanishingOutcomeError(f"selective operation has probability {p:.3e}")
        return Operator(t.space, out)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(t.space, _hermitian_part(out))
    return Operator(t.space, out)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_ij T(|i><j|) (x) |i><j|`` on the doubled space."""

    space: Space
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.space.dim
        if m.shape != (d * d, d * d):
            raise ChannelError(f"Choi matrix shape {m.shape} does not match dim {d}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(_hermitian_part(self.entries))

    def min_eigenvalue(self) -> float:
        return float(self.eigvalsh()[0])

    def is_hermitian(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)

    def is_completely_positive(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        return self.is_hermitian(tol) and self.min_eigenvalue() >= -tol


def choi_from_kraus(t: KrausChannel) -> ChoiMatrix:
    # (A^dag (x) I)|Omega> reshaped row-major is A^dag itself
    vecs = [a.entries.conj().T.reshape(-1) for a in t.kraus_ops]
    c = sum(np.outer(v, v.conj()) for v in vecs)
    return ChoiMatrix(t.space, c)


def choi_from_map(space: Space, fn: Callable[[np.ndarray], np.ndarray]) -> ChoiMatrix:
    """Choi matrix of an arbitrary linear map on ``dim x dim`` matrices."""
    d = space.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(np.asarray(fn(e), dtype=complex), e)
    return ChoiMatrix(space, c)


def kraus_from_choi(
    c: ChoiMatrix,
    rank_tol: float | None = None,
    selective: bool | None = None,
    tol: float | None = None,
) -> KrausChannel:
    """Canonical (orthogonal) Kraus list from a Choi matrix.

    Eigenvalues above ``rank_tol`` (default ``1e-10`` times the largest)
    contribute one operator each; an eigenvalue below ``-rank_tol`` raises
    :class:`NotCompletelyPositiveError`. ``selective`` is inferred from
    trace preservation when not given.
    """
    tol = default_tol() if tol is None else tol
    if not c.is_hermitian(tol):
        raise ChannelError("Choi matrix is not Hermitian")
    lam, vec = np.linalg.eigh(_hermitian_part(c.entries))
    if rank_tol is None:
        rank_tol = 1e-10 * max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    if lam[0] < -rank_tol:
        raise NotCompletelyPositiveError(float(lam[0]))
    d = c.space.dim
    ops = []
    for k in np.nonzero(lam > rank_tol)[0]:
        adag = np.sqrt(lam[k]) * vec[:, k].reshape(d, d)
        ops.append(Operator(c.space, adag.conj().T))
    if not ops:
        ops = [Operator(c.space, np.zeros((d, d)))]
    if selective is None:
        comp = sum(a.entries @ a.entries.conj().T for a in ops)
        selective = bool(np.linalg.norm(comp - np.eye(d), 2) > tol)
    return KrausChannel(c.space, tuple(ops), selective=selective, tol=tol)


def choi_distance(c1: ChoiMatrix, c2: ChoiMatrix) -> float:
    """Largest entrywise difference between two Choi matrices."""
    _require_same(c1.space, c2.space)
    return float(np.max(np.abs(c1.entries - c2.entries)))


def compose(t2: KrausChannel, t1: KrausChannel) -> KrausChannel:
    """``t2`` after ``t1``; Kraus operators are the products ``A_n B_m``.

    With ``t1 = {A_n}``, ``t2 = {B_m}``:
    ``T2[T1[rho]] = sum (A_n B_m)^dag rho (A_n B_m)``.
    """
    _require_same(t1.space, t2.space, "composed channels")
    ops = tuple(a @ b for a in t1.kraus_ops for b in t2.kraus_ops)
    tol = max(default_tol() if t.tol is None else t.tol for t in (t1, t2))
    return KrausChannel(t1.space, ops, selective=t1.selective or t2.selective, tol=tol)


@dataclass(frozen=True, eq=False)
class DualMap:
    """Heisenberg-picture action ``B -> sum_n A_n B A_n^dag``."""

    channel: KrausChannel

    def __call__(self, b: Operator) -> Operator:
        _require_same(self.channel.space, b.space, "dual map and operator")
        m = sum(a.entries @ b.entries @ a.entries.conj().T for a in self.channel.kraus_ops)
        return Operator(b.space, m)

    def is_unital(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        img = self(identity(self.channel.space)).entries
        return bool(np.linalg.norm(img - np.eye(img.shape[0]), 2) <= tol)


def adjoint_channel(t: KrausChannel) -> DualMap:
    return DualMap(t)


@dataclass(frozen=True)
class Representation:
    """A named finite space standing in for one Hilbert-space representation."""

    tag: str
    space: Space


@dataclass(frozen=True, eq=False)
class AlgebraicState:
    """State given by a density matrix in a tagged representation.

    ``probability`` records the outcome probability of the selective
    operation that produced it (1 otherwise).
    """

    representation: Representation
    rho: DensityMatrix = field(repr=False)
    probability: float = 1.0

    def __post_init__(self):
        _require_same(self.representation.space, self.rho.space, "representation and state")
        if not isinstance(self.rho, DensityMatrix):
            object.__setattr__(self, "rho", DensityMatrix.from_operator(self.rho))

    def __call__(self, a: Operator) -> complex:
        """Value of the state on an element, ``tr(rho A)``."""
        return expectation(self.rho, a)


@dataclass(frozen=True)
class ExpectationRow:
    index: int
    dual_value: complex  # tr(rho T^dag[A]) / p
    direct_value: complex  # tr(rho' A)
    residual: float


def pushforward(
    omega: AlgebraicState,
    t: KrausChannel,
    algebra_elems: Sequence[Operator],
    atol: float = 1e-10,
) -> tuple[AlgebraicState, list[ExpectationRow]]:
    """Transform ``omega`` by ``t`` and tabulate the transformed expectations.

    Each element is evaluated twice: through the dual map on the original
    state and directly on the transformed state. For selective operations
    the new state is renormalized and the dual value divided by the outcome
    probability. Disagreement beyond ``atol * max(1, |value|)`` raises
    :class:`ChannelError`.
    """
    space = omega.representation.space
    if not (t.space == space or tuple(t.space.dims) == tuple(space.dims)):
        raise RepresentationMismatchError(
            f"channel space {t.space} is not representation {omega.representation.tag!r}"
        )
    for a in algebra_elems:
        if tuple(a.space.dims) != tuple(space.dims):
            raise RepresentationMismatchError(
                f"element lives on {a.space}, not on representation {omega.representation.tag!r}"
            )
    out = apply(t, omega.rho)
    p = float(out.trace().real)
    rho_new = DensityMatrix(space, _hermitian_part(out.entries) / p)
    dual = adjoint_channel(t)
    rows = []
    for k, a in enumerate(algebra_elems):
        lhs = expectation(omega.rho, dual(a)) / p
        rhs = expectation(rho_new, a)
        resid = abs(lhs - rhs)
        if resid > atol * max(1.0, abs(rhs)):
            raise ChannelError(f"dual and direct expectations disagree for element {k}: {resid:.3e}")
        rows.append(ExpectationRow(k, lhs, rhs, resid))
    new_state = AlgebraicState(omega.representation, rho_new, omega.probability * p)
    return new_state, rows


def identity_channel(space: Space) -> KrausChannel:
    return KrausChannel(space, (identity(space),))


def unitary_channel(u: Operator, tol: float | None = None) -> KrausChannel:
    """``rho -> U^dag rho U``."""
    if not u.is_unitary(default_tol() if tol is None else tol):
        raise ChannelError("operator is not unitary")
    return KrausChannel(u.space, (u,), tol=tol)


def replacement_channel(sigma: DensityMatrix, tol: float | None = None) -> KrausChannel:
    """Trace-preserving map sending every state to the fixed state ``sigma``.

    With ``sigma = sum_k s_k |psi_k><psi_k|`` the operators are
    ``A_kl = sqrt(s_k) |l><psi_k|``; zero eigenvalues are dropped.
    """
    d = sigma.dim
    s, vec = np.linalg.eigh(_hermitian_part(sigma.entries))
    ops = []
    cut = 1e-15 * max(float(s.max()), 1.0)
    for k in np.nonzero(s > cut)[0]:
        for l in range(d):
            m = np.zeros((d, d), dtype=complex)
            m[l, :] = np.sqrt(s[k]) * vec[:, k].conj()
            ops.append(Operator(sigma.space, m))
    # renormalize so the dropped weight does not spoil trace preservation
    scale = 1.0 / np.sqrt(s[s > cut].sum())
    ops = [a * scale for a in ops]
    return KrausChannel(sigma.space, tuple(ops), tol=tol)


superscattering_channel = replacement_channel


def random_channel(
    space: Space,
    n_kraus: int,
    rng: np.random.Generator,
    selective: bool = False,
) -> KrausChannel:
    """Channel from a random isometry ``C^d -> C^{n d}``.

    Selective channels are scaled by a random factor in ``[0.3, 0.9]``.
    """
    d = space.dim
    z = rng.normal(size=(n_kraus * d, d)) + 1j * rng.normal(size=(n_kraus * d, d))
    w, _ = np.linalg.qr(z)
    blocks = w.reshape(n_kraus, d, d)
    scale = np.sqrt(rng.uniform(0.3, 0.9)) if selective else 1.0
    # blocks K satisfy sum K^dag K = I; the left-adjoint ordering uses A = K^dag
    ops = tuple(Operator(space, scale * k.conj().T) for k in blocks)
    return KrausChannel(space, ops, selective=selective)

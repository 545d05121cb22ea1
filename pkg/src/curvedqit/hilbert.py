"""Truncated bosonic Fock spaces and dense operators on them.

Basis ordering is lexicographic in the occupation numbers ``|n_1, ..., n_M>``
with ``n_1`` varying slowest, so matrices built here are bit-comparable with
``numpy.kron`` products taken in mode order.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "NotHermitianError",
    "InvalidStateError",
    "FockSpace",
    "ProductSpace",
    "Operator",
    "DensityMatrix",
    "default_tol",
    "identity",
    "annihilation_op",
    "creation_op",
    "number_op",
    "mode_op",
    "normalize_mode",
    "basis_state",
    "ket",
    "pure_state",
    "maximally_mixed",
    "tensor_product",
    "partial_trace",
    "expm_antihermitian",
    "expectation",
    "trace_distance",
    "random_hermitian",
    "random_unitary",
    "random_density_matrix",
]

DEFAULT_TOL = 1e-9


class DimensionMismatchError(ValueError):
    """Operands live on spaces of different shape."""


class NotHermitianError(ValueError):
    pass


class InvalidStateError(ValueError):
    """Matrix fails the density-matrix conditions."""


def default_tol() -> float:
    """Structural tolerance, overridable through ``CURVEDQIT_TOL``."""
    value = os.environ.get("CURVEDQIT_TOL")
    if value is None:
        return DEFAULT_TOL
    tol = float(value)
    if not tol > 0:
        raise ValueError(f"CURVEDQIT_TOL must be positive, got {value!r}")
    return tol


@dataclass(frozen=True)
class FockSpace:
    """Multimode bosonic space with a hard occupation cutoff per mode.

    Parameters
    ----------
    modes : int
        Number of bosonic modes.
    cutoff : int
        Maximum occupation ``n_max`` of each mode.
    """

    modes: int
    cutoff: int

    def __post_init__(self):
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValueError(f"modes must be a positive integer, got {self.modes}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.cutoff + 1,) * self.modes

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.modes

    def basis(self) -> list[tuple[int, ...]]:
        """Occupation tuples in basis order."""
        return list(itertools.product(range(self.cutoff + 1), repeat=self.modes))

    def index(self, occupations: Sequence[int]) -> int:
        if len(occupations) != self.modes:
            raise ValueError(f"expected {self.modes} occupations, got {len(occupations)}")
        idx = 0
        for n in occupations:
            if not 0 <= n <= self.cutoff:
                raise ValueError(f"occupation {n} outside [0, {self.cutoff}]")
            idx = idx * (self.cutoff + 1) + int(n)
        return idx


@dataclass(frozen=True)
class ProductSpace:
    """Tensor product of finite factors with arbitrary local dimensions.

    Used where a result is not itself a Fock space, e.g. the outcome
    register adjoined by a Neumark dilation.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise ValueError(f"invalid factor dimensions {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def modes(self) -> int:
        return len(self.dims)


Space = FockSpace | ProductSpace


def _same_space(s1: Space, s2: Space) -> bool:
    return s1 == s2 or tuple(s1.dims) == tuple(s2.dims)


def _require_same(s1: Space, s2: Space, what: str = "operands"):
    if not _same_space(s1, s2):
        raise DimensionMismatchError(f"{what} live on different spaces: {s1} vs {s2}")


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix acting on ``space``.

    ``entries`` is stored as a read-only array; arithmetic returns new
    operators.
    """

    space: Space
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise DimensionMismatchError(
                f"entries have shape {m.shape}, space requires ({d}, {d})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.space.dim

    def adjoint(self) -> Operator:
        return Operator(self.space, self.entries.conj().T)

    dag = adjoint

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def norm(self, ord=2) -> float:
        return float(np.linalg.norm(self.entries, ord))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(_hermitian_part(self.entries))

    def is_hermitian(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0) <= tol)

    def is_positive_semidefinite(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        return self.is_hermitian(tol) and bool(self.eigvalsh()[0] >= -tol)

    def is_unitary(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        gram = self.entries.conj().T @ self.entries
        return bool(np.max(np.abs(gram - np.eye(self.dim))) <= tol)

    def is_projection(self, tol: float | None = None) -> bool:
        tol = default_tol() if tol is None else tol
        sq = self.entries @ self.entries
        return self.is_hermitian(tol) and bool(np.max(np.abs(sq - self.entries)) <= tol)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            _require_same(self.space, other.space)
            return other.entries
        return NotImplemented

    def __add__(self, other):
        m = self._coerce(other)
        if m is NotImplemented:
            return m
        return Operator(self.space, self.entries + m)

    def __sub__(self, other):
        m = self._coerce(other)
        if m is NotImplemented:
            return m
        return Operator(self.space, self.entries - m)

    def __neg__(self):
        return Operator(self.space, -self.entries)

    def __matmul__(self, other):
        m = self._coerce(other)
        if m is NotImplemented:
            return m
        return Operator(self.space, self.entries @ m)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return Operator(self.space, self.entries * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return Operator(self.space, self.entries / scalar)
        return NotImplemented

    def allclose(self, other: Operator, atol: float = 1e-12) -> bool:
        return _same_space(self.space, other.space) and bool(
            np.allclose(self.entries, other.entries, rtol=0, atol=atol)
        )


class DensityMatrix(Operator):
    """Hermitian, positive semidefinite, unit-trace operator.

    Validation uses ``tol`` (default :func:`default_tol`); pass
    ``tol=np.inf`` only for deliberately unchecked construction.
    """

    def __init__(self, space: Space, entries, tol: float | None = None):
        super().__init__(space, entries)
        tol = default_tol() if tol is None else tol
        if not self.is_hermitian(tol):
            raise InvalidStateError("density matrix is not Hermitian")
        tr = self.trace()
        if abs(tr - 1) > tol:
            raise InvalidStateError(f"density matrix trace is {tr.real:.3e}, expected 1")
        lam = self.eigvalsh()[0]
        if lam < -tol:
            raise InvalidStateError(f"density matrix has negative eigenvalue {lam:.3e}")

    @classmethod
    def from_operator(cls, op: Operator, tol: float | None = None) -> DensityMatrix:
        return cls(op.space, op.entries, tol=tol)


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def _embed(space: Space, local: np.ndarray, mode: int) -> np.ndarray:
    factors = [np.eye(d, dtype=complex) for d in space.dims]
    factors[mode] = local
    return reduce(np.kron, factors)


def _check_mode(space: Space, mode: int):
    if not (isinstance(mode, (int, np.integer)) and 0 <= mode < len(space.dims)):
        raise IndexError(f"mode {mode} out of range for {len(space.dims)} modes")


def identity(space: Space) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def annihilation_op(space: FockSpace, mode: int = 0) -> Operator:
    """Truncated annihilation operator ``a`` on one mode.

    ``<.., n-1, ..| a |.., n, ..> = sqrt(n)``; the cutoff only removes the
    raising action of the adjoint out of the top level.
    """
    _check_mode(space, mode)
    return Operator(space, _embed(space, _ladder(space.dims[mode] - 1), mode))


def creation_op(space: FockSpace, mode: int = 0) -> Operator:
    return annihilation_op(space, mode).adjoint()


def number_op(space: FockSpace, mode: int | None = None) -> Operator:
    """Occupation of one mode, or total occupation when ``mode`` is None."""
    if mode is None:
        return reduce(
            lambda x, y: x + y, (number_op(space, m) for m in range(len(space.dims)))
        )
    _check_mode(space, mode)
    local = np.diag(np.arange(space.dims[mode], dtype=float)).astype(complex)
    return Operator(space, _embed(space, local, mode))


def normalize_mode(chi) -> tuple[np.ndarray, float]:
    """Return ``chi / ||chi||`` together with the original norm."""
    chi = np.atleast_1d(np.asarray(chi, dtype=complex))
    if chi.ndim != 1:
        raise ValueError("mode function must be a 1-d vector")
    nrm = float(np.linalg.norm(chi))
    if nrm == 0:
        raise ValueError("mode function is the zero vector")
    return chi / nrm, nrm


def mode_op(space: FockSpace, chi) -> Operator:
    """Smeared annihilation operator ``a(chi) = sum_m conj(chi_m) a_m``.

    ``chi`` is normalized first. The conjugate makes ``a(chi)`` antilinear in
    ``chi`` so that ``a(chi)^dag a(chi)`` is the occupation of the mode.
    """
    unit, _ = normalize_mode(chi)
    if unit.size != len(space.dims):
        raise DimensionMismatchError(
            f"mode function has {unit.size} components, space has {len(space.dims)} modes"
        )
    m = sum(np.conj(c) * annihilation_op(space, k).entries for k, c in enumerate(unit))
    return Operator(space, m)


def ket(space: Space, occupations: Sequence[int]) -> np.ndarray:
    """Basis vector for the given occupation numbers."""
    if isinstance(space, FockSpace):
        idx = space.index(occupations)
    else:
        idx = int(np.ravel_multi_index(tuple(occupations), space.dims))
    v = np.zeros(space.dim, dtype=complex)
    v[idx] = 1.0
    return v


def pure_state(space: Space, psi, normalize: bool = True) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (space.dim,):
        raise DimensionMismatchError(f"state vector shape {psi.shape} for dim {space.dim}")
    if normalize:
        psi = psi / np.linalg.norm(psi)
    return DensityMatrix(space, np.outer(psi, psi.conj()))


def basis_state(space: Space, occupations: Sequence[int]) -> DensityMatrix:
    return pure_state(space, ket(space, occupations), normalize=False)


def maximally_mixed(space: Space) -> DensityMatrix:
    return DensityMatrix(space, np.eye(space.dim, dtype=complex) / space.dim)


def _product_space(s1: Space, s2: Space) -> Space:
    if isinstance(s1, FockSpace) and isinstance(s2, FockSpace) and s1.cutoff == s2.cutoff:
        return FockSpace(s1.modes + s2.modes, s1.cutoff)
    return ProductSpace(tuple(s1.dims) + tuple(s2.dims))


def tensor_product(x: Operator, y: Operator) -> Operator:
    """Kronecker product in the fixed basis order (``x`` slowest).

    The product of two density matrices is again a :class:`DensityMatrix`.
    """
    space = _product_space(x.space, y.space)
    m = np.kron(x.entries, y.entries)
    if isinstance(x, DensityMatrix) and isinstance(y, DensityMatrix):
        return DensityMatrix(space, m)
    return Operator(space, m)


def partial_trace(rho: Operator, keep: Iterable[int]) -> Operator:
    """Trace out every mode not listed in ``keep``.

    Kept modes retain their original relative order. A density matrix in
    gives a density matrix out.
    """
    dims = tuple(rho.space.dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one mode")
    for k in keep:
        _check_mode(rho.space, k)
    n = len(dims)
    drop = [k for k in range(n) if k not in keep]
    t = rho.entries.reshape(dims + dims)
    # move kept row/column axes to the front, traced ones to the back
    perm = keep + drop + [n + k for k in keep] + [n + k for k in drop]
    t = t.transpose(perm)
    dk = math.prod(dims[k] for k in keep)
    dd = math.prod(dims[k] for k in drop)
    t = t.reshape(dk, dd, dk, dd)
    out = np.einsum("ajbj->ab", t)
    if isinstance(rho.space, FockSpace):
        space = FockSpace(len(keep), rho.space.cutoff)
    else:
        space = ProductSpace(tuple(dims[k] for k in keep))
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(space, out)
    return Operator(space, out)


def expm_antihermitian(g: Operator, tol: float | None = None) -> Operator:
    """Exponential of an anti-Hermitian generator via ``eigh(i g)``.

    The result is unitary to machine precision on the truncated space.
    """
    tol = default_tol() if tol is None else tol
    m = g.entries
    if np.max(np.abs(m + m.conj().T), initial=0) > tol * max(1.0, np.max(np.abs(m), initial=0)):
        raise NotHermitianError("generator is not anti-Hermitian")
    h = _hermitian_part(1j * m)
    lam, vec = np.linalg.eigh(h)
    # g = -i h  =>  exp(g) = V exp(-i lam) V^dag
    u = (vec * np.exp(-1j * lam)) @ vec.conj().T
    return Operator(g.space, u)


def expectation(rho: Operator, a: Operator) -> complex:
    """``tr(rho A)``."""
    _require_same(rho.space, a.space, "state and observable")
    return complex(np.einsum("ij,ji->", rho.entries, a.entries))


def trace_distance(rho: Operator, sigma: Operator) -> float:
    """Half the trace norm of ``rho - sigma``."""
    _require_same(rho.space, sigma.space)
    s = np.linalg.svd(rho.entries - sigma.entries, compute_uv=False)
    return 0.5 * float(np.sum(s))


def random_hermitian(space: Space, rng: np.random.Generator) -> Operator:
    d = space.dim
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(space, (z + z.conj().T) / 2)


def random_unitary(space: Space, rng: np.random.Generator) -> Operator:
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    d = space.dim
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return Operator(space, q * ph)


def random_density_matrix(
    space: Space, rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    """Hilbert-Schmidt random state of the given rank (full rank by default)."""
    d = space.dim
    k = d if rank is None else rank
    z = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = z @ z.conj().T
    return DensityMatrix(space, m / np.trace(m).real)

"""Expectation matching across truncated representations.

Given finitely many observables ``A_i`` with target values ``c_i`` (read off
a state on one space) and tolerances ``eps_i``, look for a density matrix
``rho`` on another space with ``|tr(rho A_i) - c_i| < eps_i`` for all ``i``.

The search minimizes ``f(rho) = sum_i (tr(rho A_i) - c_i)^2 / eps_i^2`` by
projected gradient descent over the set of density matrices, with a
backtracking line search and a monotone momentum term. Steps are measured in units of ``1 / L`` where
``L = 2 sum_i ||A_i||_F^2 / eps_i^2`` bounds the curvature of ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .hilbert import (
    DensityMatrix,
    FockSpace,
    NotHermitianError,
    Operator,
    Space,
    _hermitian_part,
    annihilation_op,
    default_tol,
    expectation,
    identity,
    maximally_mixed,
    number_op,
)

__all__ = [
    "ProvablyInfeasibleError",
    "ObservableConstraint",
    "FellProblem",
    "FellSolution",
    "RepresentationPair",
    "CertificateRow",
    "Certificate",
    "FEASIBLE",
    "TOLERANCE_NOT_MET",
    "standard_elements",
    "fock_pair",
    "make_constraints",
    "project_simplex",
    "project_density",
    "objective",
    "solve_fell",
    "certify",
]

FEASIBLE = "Feasible"
TOLERANCE_NOT_MET = "ToleranceNotMet"


class ProvablyInfeasibleError(ValueError):
    def __init__(self, index: int, target: float, lo: float, hi: float):
        self.index = index
        super().__init__(
            f"constraint {index}: target {target:.6g} lies outside the spectrum [{lo:.6g}, {hi:.6g}]"
        )


@dataclass(frozen=True, eq=False)
class ObservableConstraint:
    a: Operator = field(repr=False)
    target: float
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.a.is_hermitian(default_tol()):
            raise NotHermitianError("constraint observable is not Hermitian")
        object.__setattr__(self, "target", float(self.target))
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True, eq=False)
class FellProblem:
    """Constraints on ``target_space`` plus solver settings.

    ``feas_tol`` is the fraction of each ``epsilon`` the solver aims for
    before stopping, leaving headroom for independent re-evaluation.
    """

    target_space: Space
    constraints: tuple[ObservableConstraint, ...] = ()
    max_iters: int = 10_000
    step: float = 1.0
    seed: int = 0
    feas_tol: float = 0.5
    max_restarts: int = 3

    def __post_init__(self):
        cs = tuple(self.constraints)
        for c in cs:
            if tuple(c.a.space.dims) != tuple(self.target_space.dims):
                raise ValueError("constraint observable is not on the target space")
        object.__setattr__(self, "constraints", cs)

    def with_config(self, **kw) -> FellProblem:
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class FellSolution:
    rho2: DensityMatrix = field(repr=False)
    residuals: np.ndarray
    iterations: int
    status: str
    objective_history: tuple[float, ...] = field(default=(), repr=False)
    restarts: tuple[int, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass(frozen=True, eq=False)
class RepresentationPair:
    """Source state plus named elements realized on both spaces.

    ``elements`` maps a name to ``(source_operator, target_operator)``.
    """

    source_space: Space
    source_state: DensityMatrix = field(repr=False)
    target_space: Space
    elements: Mapping[str, tuple[Operator, Operator]] = field(repr=False)

    def __post_init__(self):
        tol = default_tol()
        for name, (s, t) in self.elements.items():
            if tuple(s.space.dims) != tuple(self.source_space.dims):
                raise ValueError(f"element {name!r}: source operator on the wrong space")
            if tuple(t.space.dims) != tuple(self.target_space.dims):
                raise ValueError(f"element {name!r}: target operator on the wrong space")
            if not (s.is_hermitian(tol) and t.is_hermitian(tol)):
                raise NotHermitianError(f"element {name!r} is not Hermitian")


def standard_elements(space: FockSpace, mode: int = 0) -> dict[str, Operator]:
    """Common single-mode observables, keyed by name."""
    a = annihilation_op(space, mode)
    n = number_op(space, mode)
    return {
        "identity": identity(space),
        "number": n,
        "number2": n @ n,
        "quadrature": (a + a.adjoint()) / np.sqrt(2),
        "momentum": (a - a.adjoint()) * (-1j / np.sqrt(2)),
    }


def fock_pair(source_state: DensityMatrix, target_space: FockSpace, mode: int = 0) -> RepresentationPair:
    src = standard_elements(source_state.space, mode)
    tgt = standard_elements(target_space, mode)
    elements = {k: (src[k], tgt[k]) for k in src}
    return RepresentationPair(source_state.space, source_state, target_space, elements)


def make_constraints(
    pair: RepresentationPair,
    element_names: Sequence[str],
    epsilons,
    **config,
) -> FellProblem:
    """Targets ``c_i = tr(rho_1 pi_1(A_i))`` constraining ``pi_2(A_i)``."""
    names = list(element_names)
    eps = np.broadcast_to(np.asarray(epsilons, dtype=float), (len(names),))
    constraints = []
    for name, e in zip(names, eps):
        if name not in pair.elements:
            raise KeyError(f"element {name!r} is not defined in this representation pair")
        src, tgt = pair.elements[name]
        c = expectation(pair.source_state, src).real
        constraints.append(ObservableConstraint(tgt, c, float(e)))
    return FellProblem(pair.target_space, tuple(constraints), **config)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_density(m: np.ndarray) -> np.ndarray:
    """Nearest density matrix (Frobenius norm) to the Hermitian part of ``m``."""
    lam, vec = np.linalg.eigh(_hermitian_part(m))
    p = project_simplex(lam)
    return (vec * p) @ vec.conj().T


def _stack(problem: FellProblem):
    a = np.array([c.a.entries for c in problem.constraints])
    c = np.array([c.target for c in problem.constraints])
    eps = np.array([c.epsilon for c in problem.constraints])
    return a, c, eps


def _values(rho: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("ij,kji->k", rho, a).real


def objective(problem: FellProblem, rho: Operator) -> float:
    if not problem.constraints:
        return 0.0
    a, c, eps = _stack(problem)
    return float(np.sum(((_values(rho.entries, a) - c) / eps) ** 2))


def _precheck(problem: FellProblem):
    for i, con in enumerate(problem.constraints):
        lam = con.a.eigvalsh()
        lo, hi = float(lam[0]), float(lam[-1])
        if con.target < lo - con.epsilon or con.target > hi + con.epsilon:
            raise ProvablyInfeasibleError(i, con.target, lo, hi)


def solve_fell(problem: FellProblem) -> FellSolution:
    """Projected-gradient search for a state meeting every constraint.

    Each step is a gradient step from an extrapolated point followed by
    projection onto the density matrices, with backtracking on the step
    length. The iterate only moves when the objective does not increase, so
    ``objective_history`` is non-increasing between restarts.

    Raises :class:`ProvablyInfeasibleError` when a single target lies
    outside its observable's spectrum by more than its tolerance. Running
    out of iterations is not an error: the best iterate is returned with
    status ``ToleranceNotMet``.
    """
    space = problem.target_space
    d = space.dim
    if not problem.constraints:
        return FellSolution(maximally_mixed(space), np.zeros(0), 0, FEASIBLE, (0.0,))
    _precheck(problem)
    a, c, eps = _stack(problem)
    w = 1.0 / eps**2
    lip = 2.0 * float(np.sum(w * np.sum(np.abs(a) ** 2, axis=(1, 2))))
    rng = np.random.default_rng(problem.seed)

    def f_and_resid(rho):
        r = _values(rho, a) - c
        return float(np.sum(w * r**2)), r

    def done(r):
        return bool(np.all(np.abs(r) < problem.feas_tol * eps))

    x = np.eye(d, dtype=complex) / d
    fx, rx = f_and_resid(x)
    y, fy, ry = x, fx, rx
    momentum = 1.0
    history = [fx]
    restarts = []
    t = problem.step
    it = 0
    while it < problem.max_iters and not done(rx):
        it += 1
        grad = np.einsum("k,kij->ij", 2.0 * w * ry, a)
        found = False
        for _ in range(31):
            eta = t / lip
            z = project_density(y - eta * grad)
            dz = z - y
            fz, rz = f_and_resid(z)
            bound = fy + float(np.vdot(grad, dz).real) + float(np.vdot(dz, dz).real) / (2 * eta)
            if fz <= bound:
                found = True
                break
            t *= 0.5
        if not found:
            if len(restarts) >= problem.max_restarts:
                break
            # line search exhausted: nudge toward a random state and resume
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            sigma = g @ g.conj().T
            x = 0.999 * x + 0.001 * sigma / np.trace(sigma).real
            fx, rx = f_and_resid(x)
            y, fy, ry = x, fx, rx
            restarts.append(len(history))
            history.append(fx)
            momentum, t = 1.0, problem.step
            continue
        t = min(2.0 * t, 1e8)
        nxt = (1.0 + np.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
        x_prev = x
        if fz <= fx:
            x, fx, rx = z, fz, rz
        # extrapolate from the kept iterate; z may have been rejected
        y = x + (momentum / nxt) * (z - x) + ((momentum - 1.0) / nxt) * (x - x_prev)
        y = _hermitian_part(y)
        fy, ry = f_and_resid(y)
        momentum = nxt
        history.append(fx)
    rho2 = DensityMatrix(space, _hermitian_part(x))
    resid = np.abs(_values(rho2.entries, a) - c)
    status = FEASIBLE if bool(np.all(resid < eps)) else TOLERANCE_NOT_MET
    return FellSolution(rho2, resid, it, status, tuple(history), tuple(restarts))


@dataclass(frozen=True)
class CertificateRow:
    index: int
    target: float
    value: float
    residual: float
    reported: float
    epsilon: float

    @property
    def within_tolerance(self) -> bool:
        return self.residual < self.epsilon

    @property
    def disagrees(self) -> bool:
        return not abs(self.residual - self.reported) <= 1e-12


@dataclass(frozen=True)
class Certificate:
    rows: tuple[CertificateRow, ...]
    state_valid: bool
    state_message: str = ""

    @property
    def passed(self) -> bool:
        return self.state_valid and all(
            r.within_tolerance and not r.disagrees for r in self.rows
        )

    def table(self) -> str:
        lines = ["index,target,value,residual,reported,epsilon,pass,flagged"]
        for r in self.rows:
            lines.append(
                f"{r.index},{r.target:.17g},{r.value:.17g},{r.residual:.17g},"
                f"{r.reported:.17g},{r.epsilon:.17g},"
                f"{str(r.within_tolerance).lower()},{str(r.disagrees).lower()}"
            )
        return "\n".join(lines) + "\n"


def certify(problem: FellProblem, solution: FellSolution, tol: float | None = None) -> Certificate:
    """Re-evaluate a solution from scratch.

    Only the problem data and the returned matrix are used. Residuals that
    differ from the solver's report by more than ``1e-12`` are flagged.
    """
    tol = default_tol() if tol is None else tol
    m = np.array(solution.rho2.entries)
    ok, msg = True, ""
    herm = float(np.max(np.abs(m - m.conj().T)))
    tr = complex(np.trace(m))
    lam_min = float(np.linalg.eigvalsh(_hermitian_part(m))[0])
    if herm > tol:
        ok, msg = False, f"not Hermitian ({herm:.3e})"
    elif abs(tr - 1) > tol:
        ok, msg = False, f"trace {tr.real:.12g}"
    elif lam_min < -tol:
        ok, msg = False, f"negative eigenvalue {lam_min:.3e}"
    rows = []
    reported = np.asarray(solution.residuals, dtype=float)
    for i, con in enumerate(problem.constraints):
        value = float(np.trace(m @ con.a.entries).real)
        rep = float(reported[i]) if i < reported.size else float("nan")
        rows.append(
            CertificateRow(i, con.target, value, abs(value - con.target), rep, con.epsilon)
        )
    return Certificate(tuple(rows), ok, msg)

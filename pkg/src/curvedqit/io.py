"""JSON encodings shared by the library and the command line.

Operators are ``{"dim": d, "re": [[...]], "im": [[...]]}`` (row-major),
Fock spaces are ``{"modes": M, "cutoff": n_max}`` and complex scalars are
``[re, im]`` pairs. Floats are written with ``repr`` precision, so every
document round-trips exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .channel import KrausChannel
from .fell import FellProblem, FellSolution, ObservableConstraint
from .hilbert import DensityMatrix, FockSpace, Operator, ProductSpace, Space
from .povm import POVM, check_povm

__all__ = [
    "InputError",
    "load_json",
    "dump_json",
    "space_to_json",
    "space_from_json",
    "operator_to_json",
    "operator_from_json",
    "state_to_json",
    "state_from_json",
    "povm_to_json",
    "povm_effects_from_json",
    "channel_to_json",
    "channel_from_json",
    "problem_to_json",
    "problem_from_json",
    "solution_to_json",
    "solution_from_json",
    "complex_from_json",
]


class InputError(ValueError):
    """Malformed document; ``field`` names the offending key path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(str(path), f"invalid JSON ({exc})") from None


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _get(obj, key, where):
    if not isinstance(obj, dict):
        raise InputError(where, "expected an object")
    if key not in obj:
        raise InputError(f"{where}.{key}" if where else key, "missing field")
    return obj[key]


def space_to_json(space: Space) -> dict:
    if isinstance(space, FockSpace):
        return {"modes": space.modes, "cutoff": space.cutoff}
    return {"dims": list(space.dims)}


def space_from_json(obj, where: str = "space") -> Space:
    if not isinstance(obj, dict):
        raise InputError(where, "expected an object")
    try:
        if "dims" in obj:
            return ProductSpace(tuple(int(d) for d in obj["dims"]))
        return FockSpace(int(_get(obj, "modes", where)), int(_get(obj, "cutoff", where)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(where, str(exc)) from None


def operator_to_json(op: Operator) -> dict:
    m = op.entries
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def _matrix_from_json(obj, where: str) -> np.ndarray:
    dim = _get(obj, "dim", where)
    re = np.asarray(_get(obj, "re", where), dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise InputError(where, f"re/im must be {dim}x{dim} matrices")
    return re + 1j * im


def operator_from_json(obj, space: Space, where: str = "operator") -> Operator:
    m = _matrix_from_json(obj, where)
    if m.shape[0] != space.dim:
        raise InputError(f"{where}.dim", f"{m.shape[0]} does not match space dimension {space.dim}")
    return Operator(space, m)


def state_to_json(rho: Operator) -> dict:
    return {"space": space_to_json(rho.space), "rho": operator_to_json(rho)}


def state_from_json(obj, where: str = "state") -> DensityMatrix:
    space = space_from_json(_get(obj, "space", where), f"{where}.space")
    op = operator_from_json(_get(obj, "rho", where), space, f"{where}.rho")
    try:
        return DensityMatrix.from_operator(op)
    except ValueError as exc:
        raise InputError(f"{where}.rho", str(exc)) from None


def povm_to_json(povm: POVM) -> dict:
    return {
        "space": space_to_json(povm.space),
        "outcomes": list(povm.outcomes),
        "effects": {lab: operator_to_json(e) for lab, e in zip(povm.outcomes, povm.effects)},
    }


def povm_effects_from_json(obj, where: str = "povm") -> tuple[list[str], list[Operator]]:
    """Labels and effect operators, not yet validated as a POVM."""
    space = space_from_json(_get(obj, "space", where), f"{where}.space")
    effects = _get(obj, "effects", where)
    if not isinstance(effects, dict):
        raise InputError(f"{where}.effects", "expected an object keyed by outcome label")
    labels = obj.get("outcomes", list(effects))
    missing = [lab for lab in labels if lab not in effects]
    if missing:
        raise InputError(f"{where}.effects", f"no effect for outcomes {missing}")
    ops = [operator_from_json(effects[lab], space, f"{where}.effects.{lab}") for lab in labels]
    if not ops:
        raise InputError(f"{where}.effects", "at least one effect is required")
    return [str(lab) for lab in labels], ops


def channel_to_json(t: KrausChannel) -> dict:
    return {
        "space": space_to_json(t.space),
        "kraus": [operator_to_json(a) for a in t.kraus_ops],
        "selective": bool(t.selective),
    }


def channel_from_json(obj, where: str = "channel") -> KrausChannel:
    space = space_from_json(_get(obj, "space", where), f"{where}.space")
    kraus = _get(obj, "kraus", where)
    if not isinstance(kraus, list) or not kraus:
        raise InputError(f"{where}.kraus", "expected a nonempty list of operators")
    ops = [operator_from_json(k, space, f"{where}.kraus[{i}]") for i, k in enumerate(kraus)]
    return KrausChannel(space, tuple(ops), selective=bool(obj.get("selective", False)))


def problem_to_json(problem: FellProblem) -> dict:
    return {
        "space": space_to_json(problem.target_space),
        "constraints": [
            {"A": operator_to_json(c.a), "c": c.target, "eps": c.epsilon}
            for c in problem.constraints
        ],
        "max_iters": problem.max_iters,
        "seed": problem.seed,
    }


def problem_from_json(obj, where: str = "problem") -> FellProblem:
    space = space_from_json(_get(obj, "space", where), f"{where}.space")
    raw = obj.get("constraints", [])
    if not isinstance(raw, list):
        raise InputError(f"{where}.constraints", "expected a list")
    cons = []
    for i, c in enumerate(raw):
        w = f"{where}.constraints[{i}]"
        a = operator_from_json(_get(c, "A", w), space, f"{w}.A")
        try:
            cons.append(ObservableConstraint(a, float(_get(c, "c", w)), float(_get(c, "eps", w))))
        except InputError:
            raise
        except ValueError as exc:
            raise InputError(w, str(exc)) from None
    return FellProblem(
        space,
        tuple(cons),
        max_iters=int(obj.get("max_iters", 10_000)),
        seed=int(obj.get("seed", 0)),
    )


def solution_to_json(sol: FellSolution) -> dict:
    return {
        "rho": operator_to_json(sol.rho2),
        "residuals": [float(r) for r in sol.residuals],
        "status": sol.status,
        "iterations": int(sol.iterations),
    }


def solution_from_json(obj, space: Space, where: str = "solution") -> FellSolution:
    rho = operator_from_json(_get(obj, "rho", where), space, f"{where}.rho")
    return FellSolution(
        DensityMatrix.from_operator(rho),
        np.asarray(_get(obj, "residuals", where), dtype=float),
        int(_get(obj, "iterations", where)),
        str(_get(obj, "status", where)),
    )


def complex_from_json(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise InputError(where, "expected a number or an [re, im] pair")


def validation_report(labels, effects, tol=None) -> dict:
    violations = check_povm(effects, labels, tol)
    return {
        "valid": not violations,
        "violations": [
            {"axiom": v.axiom, "outcome": v.label, "magnitude": v.magnitude} for v in violations
        ],
    }

"""``curvedqit`` command line.

Exit status: 0 on success, 2 when a check fails (invalid POVM, non-CP map,
disagreement in a sweep, solver tolerance not met), 1 on unusable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    ChannelError,
    ChoiMatrix,
    NotCompletelyPositiveError,
    adjoint_channel,
    apply,
    choi_from_kraus,
    compose,
    kraus_from_choi,
)
from .fell import ObservableConstraint, ProvablyInfeasibleError, certify, solve_fell
from .hilbert import (
    DimensionMismatchError,
    FockSpace,
    Operator,
    ProductSpace,
    expectation,
    maximally_mixed,
    number_op,
    partial_trace,
)
from .io import (
    InputError,
    channel_from_json,
    channel_to_json,
    complex_from_json,
    dump_json,
    load_json,
    operator_from_json,
    operator_to_json,
    povm_effects_from_json,
    problem_from_json,
    solution_to_json,
    space_from_json,
    space_to_json,
    state_from_json,
    state_to_json,
    validation_report,
)
from .povm import POVMError, neumark_dilate, probabilities, simulate_frequencies, validate_povm
from .unruh import SqueezingParams, compare_representations, two_mode_squeezed_state

OK, CHECK_FAILED, BAD_INPUT = 0, 2, 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _povm(path):
    labels, effects = povm_effects_from_json(load_json(path))
    return labels, effects


def cmd_validate(args) -> tuple[str, bool]:
    labels, effects = _povm(args.input)
    report = validation_report(labels, effects)
    if args.format == "csv":
        rows = [[v["axiom"], v["outcome"] or "", _fmt(v["magnitude"])] for v in report["violations"]]
        text = _csv(["axiom", "outcome", "magnitude"], rows)
    else:
        text = dump_json({"status": "valid" if report["valid"] else "invalid", **report})
    return text, report["valid"]


def cmd_dilate(args) -> tuple[str, bool]:
    labels, effects = _povm(args.input)
    povm = validate_povm(effects, labels)
    dil = neumark_dilate(povm)
    rho = state_from_json(load_json(args.state)) if args.state else maximally_mixed(povm.space)
    p_direct = probabilities(povm, rho)
    p_dilated = dil.probabilities(rho)
    iso = dil.isometry_residual()
    comp = dil.compression_residual()
    disc = float(np.max(np.abs(p_direct - p_dilated)))
    ok = iso < 1e-12 and comp < 1e-10 and disc < 1e-10
    if args.format == "csv":
        rows = [
            [lab, _fmt(a), _fmt(b), _fmt(abs(a - b))]
            for lab, a, b in zip(povm.outcomes, p_direct, p_dilated)
        ]
        text = _csv(["label", "p_direct", "p_dilated", "difference"], rows)
    else:
        text = dump_json(
            {
                "status": "ok" if ok else "failed",
                "outcomes": list(povm.outcomes),
                "dilation_dims": list(dil.dilation_space.dims),
                "isometry_residual": iso,
                "compression_residual": comp,
                "max_probability_discrepancy": disc,
            }
        )
    return text, ok


def cmd_measure(args) -> tuple[str, bool]:
    labels, effects = _povm(args.input)
    povm = validate_povm(effects, labels)
    if not args.state:
        raise InputError("--state", "measure requires a state file")
    rho = state_from_json(load_json(args.state))
    if args.shots:
        rep = simulate_frequencies(povm, rho, args.shots, seed=args.seed)
        if args.format == "csv":
            return rep.to_csv(), rep.ok
        return dump_json(
            {
                "labels": list(rep.labels),
                "p": rep.probabilities.tolist(),
                "counts": rep.counts.tolist(),
                "shots": rep.shots,
                "w": rep.frequencies.tolist(),
                "epsilon": rep.epsilon.tolist(),
                "violated": rep.violated.tolist(),
            }
        ), rep.ok
    p = probabilities(povm, rho)
    if args.format == "csv":
        return _csv(["label", "p"], [[lab, _fmt(v)] for lab, v in zip(povm.outcomes, p)]), True
    return dump_json({"labels": list(povm.outcomes), "p": p.tolist()}), True


def _choi_from_doc(doc):
    space = space_from_json(doc["space"])
    m = operator_from_json(doc["choi"], _doubled(space), "choi")
    return ChoiMatrix(space, m.entries)


def _doubled(space):
    return ProductSpace(tuple(space.dims) * 2)


def cmd_channel(args) -> tuple[str, bool]:
    doc = load_json(args.input)
    if args.action == "cp-check":
        choi = _choi_from_doc(doc) if "choi" in doc else choi_from_kraus(channel_from_json(doc))
        lam = choi.min_eigenvalue()
        cp = choi.is_completely_positive()
        out = {"completely_positive": cp, "min_eigenvalue": lam}
        if cp:
            t = kraus_from_choi(choi)
            out["trace_preserving"] = adjoint_channel(t).is_unital()
            out["kraus_rank"] = len(t.kraus_ops)
        return dump_json(out), cp
    t = channel_from_json(doc)
    if args.action == "apply":
        if not args.state:
            raise InputError("--state", "apply requires a state file")
        rho = state_from_json(load_json(args.state))
        out = apply(t, rho)
        body = state_to_json(out)
        body["probability"] = float(out.trace().real)
        return dump_json(body), True
    if args.action == "compose":
        if not args.second:
            raise InputError("--second", "compose requires a second channel file")
        t2 = channel_from_json(load_json(args.second), "second")
        return dump_json(channel_to_json(compose(t2, t))), True
    if args.action == "choi":
        c = choi_from_kraus(t)
        return dump_json(
            {"space": space_to_json(t.space), "choi": operator_to_json(Operator(_doubled(t.space), c.entries))}
        ), True
    raise InputError("--action", f"unknown action {args.action!r}")


def _scenario(args):
    cfg = load_json(args.input)
    try:
        a = float(_req(cfg, "a"))
        omega = float(_req(cfg, "omega"))
        alpha = float(args.alpha if args.alpha is not None else _req(cfg, "alpha"))
        chi = [complex_from_json(v, f"chi[{i}]") for i, v in enumerate(cfg.get("chi", [[1.0, 0.0]]))]
        cutoffs = [args.cutoff] if args.cutoff is not None else [int(c) for c in _req(cfg, "cutoffs")]
        method = cfg.get("method", "series")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError("scenario", str(exc)) from None
    if method not in ("series", "generator"):
        raise InputError("method", f"expected 'series' or 'generator', got {method!r}")
    if len(chi) != 1:
        raise InputError("chi", "the detector couples to the single accelerated mode; give one component")
    if not cutoffs:
        raise InputError("cutoffs", "at least one cutoff is required")
    try:
        params = SqueezingParams(a, omega)
    except ValueError as exc:
        raise InputError("a/omega", str(exc)) from None
    return params, alpha, chi, cutoffs, method


def _req(cfg, key):
    if key not in cfg:
        raise InputError(key, "missing field")
    return cfg[key]


def cmd_unruh(args) -> tuple[str, bool]:
    params, alpha, chi, cutoffs, method = _scenario(args)
    cmp = compare_representations(params, alpha, chi, cutoffs)
    if args.format == "csv":
        return cmp.to_csv(), cmp.ok
    top = cutoffs[-1]
    reduced = partial_trace(two_mode_squeezed_state(FockSpace(2, top), params, method), keep=[0])
    return dump_json(
        {
            "a": params.a,
            "omega": params.omega,
            "temperature": params.temperature,
            "r": params.r,
            "alpha": alpha,
            "method": method,
            "mean_occupation": expectation(reduced, number_op(reduced.space)).real,
            "mean_occupation_exact": params.mean_occupation(),
            "series_agree": cmp.series_agree,
            "generator_converges": cmp.generator_converges,
            "rows": [
                {
                    "cutoff": r.cutoff,
                    "p_thermal": r.p_thermal,
                    "p_series": r.p_series,
                    "p_generator": r.p_generator,
                    "d12": r.d12,
                    "d13": r.d13,
                    "tail": r.tail,
                }
                for r in cmp.rows
            ],
        }
    ), cmp.ok


def cmd_fell(args) -> tuple[str, bool]:
    problem = problem_from_json(load_json(args.input))
    overrides = {}
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.eps is not None:
        overrides["constraints"] = tuple(
            ObservableConstraint(c.a, c.target, args.eps) for c in problem.constraints
        )
    problem = problem.with_config(**overrides)
    sol = solve_fell(problem)
    cert = certify(problem, sol)
    ok = sol.feasible and cert.passed
    if args.format == "csv":
        return cert.table(), ok
    body = solution_to_json(sol)
    body["certified"] = cert.passed
    return dump_json(body), ok


COMMANDS = {
    "validate": cmd_validate,
    "dilate": cmd_dilate,
    "measure": cmd_measure,
    "channel": cmd_channel,
    "unruh": cmd_unruh,
    "fell": cmd_fell,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvedqit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, type=Path)
        p.add_argument("--output", type=Path)
        p.add_argument("--format", choices=("csv", "json"), default="csv" if name == "unruh" else "json")
        p.add_argument("--cutoff", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--max-iters", type=int, dest="max_iters")
        p.add_argument("--eps", type=float)
        if name in ("dilate", "measure", "channel"):
            p.add_argument("--state", type=Path)
        if name == "measure":
            p.add_argument("--shots", type=int)
        if name == "channel":
            p.add_argument("--action", choices=("apply", "compose", "choi", "cp-check"), default="cp-check")
            p.add_argument("--second", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, ok = COMMANDS[args.command](args)
    except (InputError, DimensionMismatchError, KeyError) as exc:
        print(f"curvedqit {args.command}: input error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (POVMError, NotCompletelyPositiveError, ProvablyInfeasibleError, ChannelError) as exc:
        print(f"curvedqit {args.command}: check failed: {exc}", file=sys.stderr)
        return CHECK_FAILED
    except ValueError as exc:
        print(f"curvedqit {args.command}: input error: {exc}", file=sys.stderr)
        return BAD_INPUT
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return OK if ok else CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

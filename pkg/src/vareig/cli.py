"""Command-line entry point.

Exit status: 0 converged (or verification passed), 2 finished without
converging, 1 on any error (a JSON error object is printed to stderr).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

import numpy as np

from . import __version__
from .ansatz import AnsatzSpec, ENTANGLERS
from .drivers import (
    EigResult,
    QpcaComponent,
    QpcaResult,
    find_eigenvector,
    find_eigenvector_normal,
    qpca,
    solve_generalized,
    verify,
)
from .errors import ValidationError
from .fileio import (
    RESULT_SCHEMA,
    parse_matrix_file,
    parse_state_file,
    result_path,
    write_result,
)
from .objectives import DEFAULT_PENALTY, EXACT, EvalMode, Generalized, NormalEig, Qpca, UnitaryEig
from .optimizer import METHODS, OptimizationTrace, OptimizerConfig
from .simulator import n_qubits_of, zero_state
from .swaptest import (
    destructive_swap_test,
    exact_pass_probability,
    full_swap_test,
)
from .objectives import trial_state

COMMANDS = ("find-eig", "gen-eig", "normal-eig", "qpca", "swap-test", "verify")
EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


def _add_common(p, needs_input=True):
    p.add_argument("--input", required=needs_input, help="matrix JSON file")
    p.add_argument("--qubits", type=int, help="ansatz qubits (default: from the matrix size)")
    p.add_argument("--layers", type=int, help="ansatz layers (default: qubits + 1)")
    p.add_argument("--entangler", choices=ENTANGLERS, default="linear")
    p.add_argument("--optimizer", choices=METHODS, default=None,
                   help="default: nelder-mead for --exact, spsa for --shots")
    p.add_argument("--max-evals", type=int, default=20000, help="evaluations per restart")
    p.add_argument("--restarts", type=int, default=5)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--shots", type=int, help="sampled SWAP tests with this many shots")
    mode.add_argument("--exact", action="store_true", help="exact simulation (default)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="results", help="result file (*.json) or run directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vareig", description="Variational eigenvector finder (simulated)."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in [
        ("find-eig", "eigenvector of a unitary U"),
        ("normal-eig", "eigenvector of a normal matrix A"),
    ]:
        _add_common(sub.add_parser(name, help=help_))

    p = sub.add_parser("gen-eig", help="generalized problem U|e> = lambda V|e>")
    _add_common(p)
    p.add_argument("--input-v", required=True, help="matrix JSON file for V")

    p = sub.add_parser("qpca", help="principal components of a density matrix")
    _add_common(p)
    p.add_argument("--components", type=int, default=1)
    p.add_argument("--penalty-c", type=float, default=DEFAULT_PENALTY)

    p = sub.add_parser("swap-test", help="run the bare SWAP tests on two states")
    p.add_argument("--state-a", help="state JSON file")
    p.add_argument("--state-b", help="state JSON file")
    p.add_argument("--theta-a", help="comma-separated ansatz angles preparing state a")
    p.add_argument("--theta-b", help="comma-separated ansatz angles preparing state b")
    p.add_argument("--input", help="optional unitary applied to state a")
    p.add_argument("--qubits", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--entangler", choices=ENTANGLERS, default="linear")
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="results")

    p = sub.add_parser("verify", help="re-check a result file")
    p.add_argument("--result", required=True, help="result JSON written by another command")
    p.add_argument("--input", help="override the matrix path recorded in the result")
    p.add_argument("--input-v", help="override the V path recorded in the result")
    p.add_argument("--out", default=None, help="optional report file")
    return parser


def _mode(args) -> EvalMode:
    return EvalMode.sampled(args.shots) if getattr(args, "shots", None) else EXACT


def _spec(args, dim) -> AnsatzSpec:
    n = args.qubits if args.qubits is not None else n_qubits_of(dim)
    return AnsatzSpec(n, args.layers, args.entangler)


def _opt_config(args, mode) -> OptimizerConfig:
    method = args.optimizer or ("nelder-mead" if mode.exact else "spsa")
    return OptimizerConfig(
        method=method, max_evals=args.max_evals, restarts=args.restarts, seed=args.seed
    )


def _config_echo(args, spec=None, opt=None, mode=None) -> dict:
    echo = {k: v for k, v in vars(args).items() if k != "func"}
    if spec is not None:
        echo["ansatz"] = {"n_qubits": spec.n_qubits, "n_layers": spec.n_layers,
                          "entangler": spec.entangler}
    if opt is not None:
        echo["optimizer_config"] = opt.to_dict()
    if mode is not None:
        echo["mode"] = {"exact": mode.exact, "shots": mode.shots}
    return echo


def _payload(command, config, result: dict) -> dict:
    out = {
        "schema": RESULT_SCHEMA,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": config,
    }
    out.update(result)
    return out


def _run_solver(args):
    mode = _mode(args)
    u = parse_matrix_file(args.input)
    spec = _spec(args, len(u))
    opt = _opt_config(args, mode)
    if args.command == "find-eig":
        result = find_eigenvector(u, spec, opt, mode)
    elif args.command == "normal-eig":
        result = find_eigenvector_normal(u, spec, opt, mode)
    elif args.command == "gen-eig":
        result = solve_generalized(u, parse_matrix_file(args.input_v), spec, opt, mode)
    else:
        result = qpca(u, args.components, spec, opt, mode, args.penalty_c)
    return result, _config_echo(args, spec, opt, mode)


def _parse_angles(text):
    return np.array([float(x) for x in text.split(",") if x.strip()])


def _swap_test(args):
    rng = np.random.default_rng(args.seed)

    def load(path, angles):
        if path:
            return parse_state_file(path)
        if angles:
            theta = _parse_angles(angles)
            if args.qubits is None:
                raise ValidationError("--qubits is required with --theta-a/--theta-b")
            return trial_state(AnsatzSpec(args.qubits, args.layers, args.entangler), theta)
        if args.qubits is None:
            raise ValidationError("give --state-a/--state-b, --theta-a/--theta-b or --qubits")
        return zero_state(args.qubits)

    a = load(args.state_a, args.theta_a)
    b = load(args.state_b, args.theta_b)
    if args.input:
        from .numerics import require_unitary

        u = require_unitary(parse_matrix_file(args.input), name="U")
        a = u @ a
    if a.shape != b.shape:
        raise ValidationError("states have different dimensions", kind="dimension")
    destructive = destructive_swap_test(a, b, args.shots, rng)
    full = full_swap_test(a, b, args.shots, rng)
    result = {
        "exact_pass_probability": exact_pass_probability(a, b),
        "destructive": destructive.to_dict(),
        "full": full.to_dict(),
        "seed": args.seed,
    }
    return result, _config_echo(args)


# ---------------------------------------------------------------------------
# verify


def _load_result(path):
    with open(path) as fh:
        return json.load(fh)


def _rebuild(doc, args):
    cfg = doc["config"]
    spec = AnsatzSpec(**cfg["ansatz"])
    mode = EvalMode(cfg["mode"]["shots"])
    u = parse_matrix_file(args.input or cfg["input"])
    command = doc["command"]
    if command == "qpca":
        comps = [
            QpcaComponent(
                theta=np.array(c["theta"]),
                eigenvalue_estimate=c["eigenvalue_estimate"],
                oracle_eigenvalue=c["oracle_eigenvalue"],
                oracle_fidelity=c["oracle_fidelity"],
                saturated=c["saturated"],
                max_prior_overlap=c["max_prior_overlap"],
                orthogonal=c["orthogonal"],
            )
            for c in doc["components"]
        ]
        result = QpcaResult(spec, mode, doc["penalty"], comps, [], doc["seed"])
        return result, Qpca(u)
    if command == "find-eig":
        problem = UnitaryEig(u)
    elif command == "normal-eig":
        problem = NormalEig(u)
    elif command == "gen-eig":
        problem = Generalized(u, parse_matrix_file(args.input_v or cfg["input_v"]))
    else:
        raise ValidationError(f"cannot verify a {command!r} result", kind="unsupported_kind")
    rayleigh = doc.get("rayleigh")
    result = EigResult(
        kind=doc["kind"],
        spec=spec,
        mode=mode,
        theta_star=np.array(doc["theta_star"]),
        objective_final=doc["objective_final"],
        objective_exact=doc["objective_exact"],
        rayleigh=None if rayleigh is None else complex(*rayleigh),
        residual=doc["residual"],
        oracle_fidelity=doc["oracle_fidelity"],
        converged=doc["converged"],
        trace=OptimizationTrace(),
        seed=doc["seed"],
    )
    return result, problem


def _verify(args):
    doc = _load_result(args.result)
    result, problem = _rebuild(doc, args)
    report = verify(result, problem)
    return report


# ---------------------------------------------------------------------------


def _error(exc, kind=None):
    kind = kind or getattr(exc, "kind", type(exc).__name__)
    json.dump({"error": {"kind": kind, "message": str(exc)}}, sys.stderr)
    sys.stderr.write("\n")
    return EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            report = _verify(args)
            for check in report.checks:
                print(check.line())
            if args.out:
                write_result(args.out, {"schema": RESULT_SCHEMA, **report.to_dict()})
            return EXIT_OK if report.passed else EXIT_NOT_CONVERGED
        if args.command == "swap-test":
            result, config = _swap_test(args)
            converged = True
        else:
            res, config = _run_solver(args)
            result, converged = res.to_dict(), res.converged
        path = result_path(args.out, args.command, args.seed)
        write_result(path, _payload(args.command, config, result))
        print(path)
        return EXIT_OK if converged else EXIT_NOT_CONVERGED
    except (ValidationError, ValueError) as exc:
        return _error(exc)
    except OSError as exc:
        return _error(exc, "io_error")


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every command prints one report to stdout (JSON by default) and signals
its outcome through the exit code:

    0  success
    1  input error (unreadable file, malformed JSON, invalid parameters)
    2  mathematical precondition violated (e.g. non-commuting operators)
    3  verdict disagrees with the input's declared expectation
    4  search budget exhausted

Diagnostics go to stderr. Reports carry no timestamps, so re-running a
command with the same inputs, seed and version reproduces it byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import bell_model as bm
from . import convex_linear as cl
from . import expectation_nogo as en
from . import spekkens_nogo as sp
from . import value_maps as vm
from .operator_core import NonCommutingError, joint_spectrum, parse_complex_matrix

EXIT_OK, EXIT_INPUT, EXIT_MATH, EXIT_MISMATCH, EXIT_BUDGET = 0, 1, 2, 3, 4

BUNDLED_FILES = {
    "jspec-three": "jspec_three_projections.json",
    "jspec-pair": "jspec_orthogonal_pair.json",
    "jspec-diag": "jspec_degenerate_diagonals.json",
    "candidate": "candidate_single_point.json",
    "points-one": "points_constant_one.json",
    "points-affine": "points_affine_example.json",
    **vm.BUNDLED_CATALOGS,
}

OBSERVABLES = {
    "sx": (0.0, (1.0, 0.0, 0.0)),
    "sy": (0.0, (0.0, 1.0, 0.0)),
    "sz": (0.0, (0.0, 0.0, 1.0)),
    "id": (1.0, (0.0, 0.0, 0.0)),
}


class InputError(Exception):
    pass


class MathError(Exception):
    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


def _read_input(source: str) -> tuple[bytes, str]:
    """Bytes of a file path, or of a bundled fixture given as ``bundled:NAME``."""
    if source.startswith("bundled:"):
        name = source.split(":", 1)[1]
        if name not in BUNDLED_FILES:
            raise InputError(f"unknown bundled input {name!r}; choose from {sorted(BUNDLED_FILES)}")
        return resources.files("nogo.data").joinpath(BUNDLED_FILES[name]).read_bytes(), source
    try:
        return Path(source).read_bytes(), source
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from None


def _load_json(source: str):
    raw, _ = _read_input(source)
    try:
        return json.loads(raw), raw
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _vector(text: str, n: int, name: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InputError(f"{name}: expected {n} comma-separated numbers, got {text!r}") from None
    if v.shape != (n,):
        raise InputError(f"{name}: expected {n} comma-separated numbers, got {text!r}")
    return v


def _unit_vector(text: str, name: str) -> np.ndarray:
    v = _vector(text, 3, name)
    if abs(np.linalg.norm(v) - 1) > 1e-9:
        raise InputError(f"{name} must be a unit vector (norm {np.linalg.norm(v):.6g})")
    return v


def _observable(text: str) -> bm.Observable2D:
    if text in OBSERVABLES:
        a0, a = OBSERVABLES[text]
        return bm.Observable2D(a0, a)
    v = _vector(text, 4, "--obs")
    return bm.Observable2D(v[0], tuple(v[1:]))


def _mixture(text: str):
    """``w:x,y,z;w:x,y,z`` into ``[(w, (x, y, z)), ...]``."""
    out = []
    for part in text.split(";"):
        try:
            w, vec = part.split(":")
            out.append((float(w), tuple(_unit_vector(vec, "mixture direction"))))
        except ValueError:
            raise InputError(f"bad mixture component {part!r}; expected weight:x,y,z") from None
    if any(w < 0 for w, _ in out) or abs(sum(w for w, _ in out) - 1) > 1e-12:
        raise InputError("mixture weights must be nonnegative and sum to 1")
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag] if x.imag else x.real
    return x


def _matrix_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    if np.abs(M.imag).max(initial=0) == 0:
        return M.real.tolist()
    return [[[z.real, z.imag] for z in row] for row in M]


def _digest(params: dict, blobs: list[bytes]) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(_jsonable(params), sort_keys=True).encode())
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return h.hexdigest()


def _report(command: str, params: dict, blobs: list[bytes], verdict: dict, seed: int) -> dict:
    return {
        "command": command,
        "inputs": {"params": params, "digest": _digest(params, blobs)},
        "verdict": verdict,
        "seed": seed,
        "tool_version": __version__,
    }


def _render(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2)
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        else:
            lines.append(f"{prefix}: {json.dumps(obj)}")

    walk("", report)
    return "\n".join(lines)


def cmd_joint_spectrum(args) -> tuple[dict, int]:
    data, raw = _load_json(args.file)
    ops = data.get("operators") if isinstance(data, dict) else data
    if not isinstance(ops, list) or not ops:
        raise InputError("expected a non-empty list of operators under 'operators'")
    try:
        mats = [parse_complex_matrix(M) for M in ops]
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad operator entry: {exc}") from None
    dims = {M.shape for M in mats}
    if len(dims) != 1 or any(M.ndim != 2 or M.shape[0] != M.shape[1] for M in mats):
        raise InputError(f"operators must be square matrices of one size, got shapes {sorted(dims)}")
    for k, M in enumerate(mats):
        if not np.allclose(M, M.conj().T, atol=args.tol):
            raise InputError(f"operator {k} is not Hermitian")
    try:
        js = joint_spectrum(mats, tol=args.tol)
    except NonCommutingError as exc:
        raise MathError(str(exc), {"pair": list(exc.pair)}) from None
    verdict = {"arity": js.arity, "points": [list(p) for p in js.points]}
    return _report("joint-spectrum", {"file": args.file, "tol": args.tol}, [raw], verdict, args.seed), EXIT_OK


def _verdict_for(rs, vcs, method, budget):
    if method == "both":
        a = vm.find_value_map(vcs, "backtracking", budget)
        b = vm.find_value_map(vcs, "exhaustive", budget)
        if a != b:
            raise AssertionError("backtracking and exhaustive search disagree")
        return a
    return vm.find_value_map(vcs, method, budget)


def _catalog_summary(rs, vcs) -> dict:
    return {
        "name": rs.name,
        "dim": rs.dim,
        "rays": len(rs),
        "clauses": {k: len(vcs.of_kind(k)) for k in (vm.PAIR, vm.EXACTLY_ONE, vm.AT_MOST_ONE)},
    }


def _load_rayset(source: str):
    data, raw = _load_json(source)
    try:
        return vm.catalog_from_dict(data), raw
    except (ValueError, TypeError) as exc:
        raise InputError(f"{source}: {exc}") from None


def cmd_ks_check(args) -> tuple[dict, int]:
    rs, raw = _load_rayset(args.catalog)
    try:
        vcs = vm.compile_constraints(rs)
    except vm.DuplicateRayError as exc:
        raise InputError(str(exc)) from None
    params = {"catalog": args.catalog, "method": args.method, "budget": args.budget}
    verdict = _catalog_summary(rs, vcs) | {"method": args.method, "expect": rs.expect}
    try:
        found = _verdict_for(rs, vcs, args.method, args.budget)
    except vm.BudgetExceeded:
        verdict["result"] = "BUDGET"
        return _report("ks-check", params, [raw], verdict, args.seed), EXIT_BUDGET
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if found is None:
        verdict["result"] = "NONE"
    else:
        ok, _ = vm.verify_value_map(vcs, found)
        assert ok
        verdict["result"] = "assignment"
        verdict["assignment"] = list(found)
    observed = "uncolorable" if found is None else "colorable"
    verdict["expect_ok"] = rs.expect in ("unknown", observed)
    code = EXIT_OK if verdict["expect_ok"] else EXIT_MISMATCH
    return _report("ks-check", params, [raw], verdict, args.seed), code


def cmd_ks_lift(args) -> tuple[dict, int]:
    rs, raw = _load_rayset(args.catalog)
    params = {"catalog": args.catalog, "target_dim": args.target_dim, "budget": args.budget}
    try:
        lifted, steps = vm.lift_dimension(rs, args.target_dim, budget=args.budget)
    except vm.BudgetExceeded:
        return _report("ks-lift", params, [raw], {"result": "BUDGET"}, args.seed), EXIT_BUDGET
    except vm.NotCertifiedError as exc:
        raise MathError(str(exc)) from None
    except vm.DuplicateRayError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    catalog = lifted.to_dict()
    sizes = [len(rs)] + [s["union"] for s in steps]
    verdict = {"result": "NONE", "dim": lifted.dim, "rays": len(lifted), "steps": steps,
               "size_bound_ok": all(b <= 2 * (a + 1) for a, b in zip(sizes, sizes[1:]))}
    if args.output:
        Path(args.output).write_text(json.dumps(catalog, indent=1) + "\n")
        verdict["catalog_file"] = args.output
    else:
        verdict["catalog"] = catalog
    return _report("ks-lift", params, [raw], verdict, args.seed), EXIT_OK


def cmd_bell(args) -> tuple[dict, int]:
    n = _unit_vector(args.n, "--n")
    obs = _observable(args.obs)
    if args.samples < 1:
        raise InputError("--samples must be positive")
    mc = bm.monte_carlo(n, obs, args.samples, args.seed)
    exact = bm.expectation_exact(n, obs)
    verdict = {
        "exact": exact,
        "plus_probability": bm.plus_probability(n, obs),
        "monte_carlo": mc,
        "z_score": 0.0 if mc["std_error"] == 0 else (mc["mean"] - exact) / mc["std_error"],
    }
    params = {"n": n.tolist(), "obs": {"a0": obs.a0, "a": list(obs.a)}, "samples": args.samples}
    return _report("bell", params, [], verdict, args.seed), EXIT_OK


def cmd_bell_moments(args) -> tuple[dict, int]:
    if args.mixture:
        mixtures = {"custom": _mixture(args.mixture)}
    else:
        mixtures = {"pm_x": [(0.5, (1, 0, 0)), (0.5, (-1, 0, 0))],
                    "pm_z": [(0.5, (0, 0, 1)), (0.5, (0, 0, -1))]}
    verdict = {}
    for name, mix in mixtures.items():
        entry = {"state": _matrix_json(bm.mixture_state(mix)),
                 "exact": bm.second_moment_matrix(mix)}
        if args.samples:
            entry["monte_carlo"] = bm.second_moment_monte_carlo(mix, args.samples, args.seed, args.sampler)
        verdict[name] = entry
    if len(mixtures) == 2:
        diff = verdict["pm_x"]["exact"] - verdict["pm_z"]["exact"]
        verdict["same_state"] = bool(np.allclose(verdict["pm_x"]["state"], verdict["pm_z"]["state"]))
        verdict["moment_gap_norm"] = float(np.linalg.norm(diff, 2))
    params = {"mixture": args.mixture or "default", "samples": args.samples, "sampler": args.sampler}
    return _report("bell-moments", params, [], verdict, args.seed), EXIT_OK


def _projector_from_bloch(v):
    return bm.Observable2D(0.5, tuple(np.asarray(v) / 2)).operator()


def cmd_coexist(args) -> tuple[dict, int]:
    if args.pair == "default":
        A, B = en.DEFAULT_A, en.DEFAULT_B
    else:
        if not (args.a and args.b):
            raise InputError("--pair custom needs --a and --b Bloch unit vectors")
        A = _projector_from_bloch(_unit_vector(args.a, "--a"))
        B = _projector_from_bloch(_unit_vector(args.b, "--b"))
    res = en.coexistence_margin(A, B)
    q0 = en.quadruple(A, B, np.zeros((2, 2)))
    verdict = {
        "margin": res.value,
        "argmax_H": _matrix_json(res.argmax_H),
        "coexist": res.value >= -args.tol,
        "at_H_zero": {"min_eigenvalues": list(q0.min_eigenvalues)},
    }
    if args.pair == "default":
        value, vec = en.witness_min_eigenvalue()
        verdict["witness"] = {"ket0_expectation": en.witness_value(), "min_eigenvalue": value,
                              "min_eigenvector": _matrix_json(vec[:, None])}
        verdict["kernel_at_zero"] = en.forced_kernel_check(np.zeros((2, 2))).to_dict()
        verdict["kernel_at_argmax"] = en.forced_kernel_check(res.argmax_H).to_dict()
    params = {"pair": args.pair, "a": args.a, "b": args.b}
    return _report("coexist", params, [], verdict, args.seed), EXIT_OK


def cmd_spekkens_refute(args) -> tuple[dict, int]:
    blobs = []
    if args.quantum:
        cand = sp.quantum_candidate(args.quantum, args.seed)
        source = {"quantum_points": args.quantum}
    else:
        if not args.candidate:
            raise InputError("give a candidate file or --quantum N")
        data, raw = _load_json(args.candidate)
        blobs.append(raw)
        try:
            cand = sp.FiniteRepresentationCandidate.from_dict(data)
        except sp.MalformedCandidate as exc:
            raise InputError(str(exc)) from None
        source = {"candidate": args.candidate}
    tol = args.tol if args.tol_given else sp.DEFAULT_TOL
    first = sp.verify_candidate(cand, tol)
    verdict = {"npoints": cand.npoints, "satisfied": sorted(sp.satisfied_families(cand, tol))}
    if first is None:
        verdict["verify"] = "PASS"
        return _report("spekkens-refute", source | {"tol": tol}, blobs, verdict, args.seed), EXIT_MISMATCH
    if not sp.confirms(cand, first, tol):
        raise AssertionError("verification report failed re-check")
    verdict["verify"] = first.to_dict()
    try:
        chain = sp.refute_by_chain(cand, tol)
        if not sp.confirms(cand, chain, tol):
            raise AssertionError("chain report failed re-check")
        verdict["chain"] = chain.to_dict()
    except sp.PreconditionError as exc:
        verdict["chain"] = {"precondition_failed": exc.report.to_dict()}
    verdict["confirmed"] = True
    return _report("spekkens-refute", source | {"tol": tol}, blobs, verdict, args.seed), EXIT_OK


def cmd_extend(args) -> tuple[dict, int]:
    data, raw = _load_json(args.file)
    try:
        ps = cl.PointSample.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{args.file}: {exc}") from None
    result = cl.extend_translated_linear(ps)
    if isinstance(result, cl.NotConvexLinear):
        verdict = {"result": "NOT_CONVEX_LINEAR", "witness": result.to_dict()}
    else:
        verdict = {
            "result": "translated_linear",
            "u0": result.u0,
            "w0": result.w0,
            "h": result.h,
            "hull_dim": int(result.basis.shape[0]),
            "offset": result.offset,
            "linear_completion_canonical": bool(result.basis.shape[0] == ps.points.shape[1]),
        }
    return _report("extend", {"file": args.file}, [raw], verdict, args.seed), EXIT_OK


def _default_seed() -> int:
    env = os.environ.get("NOGO_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"NOGO_SEED must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="comparison tolerance")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default $NOGO_SEED or 0)")
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="search node budget")
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="nogo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nogo {__version__}")
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--budget", type=int, default=vm.DEFAULT_BUDGET)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("joint-spectrum", parents=[common], help="joint spectrum of commuting operators")
    p.add_argument("file", help="JSON file with an 'operators' list (or bundled:NAME)")
    p.set_defaults(func=cmd_joint_spectrum)

    p = sub.add_parser("ks-check", parents=[common], help="search for a value map on a ray catalog")
    p.add_argument("catalog", help="ray catalog JSON (or bundled:cabello18, bundled:peres33, ...)")
    p.add_argument("--method", choices=("backtracking", "exhaustive", "both"), default="backtracking")
    p.set_defaults(func=cmd_ks_check)

    p = sub.add_parser("ks-lift", parents=[common], help="lift an uncolorable catalog to a higher dimension")
    p.add_argument("catalog")
    p.add_argument("--target-dim", type=int, required=True)
    p.add_argument("--output", help="write the lifted catalog here instead of inlining it")
    p.set_defaults(func=cmd_ks_lift)

    p = sub.add_parser("bell", parents=[common], help="Bell model expectation: exact and Monte Carlo")
    p.add_argument("--n", default="0,0,1", help="state direction x,y,z")
    p.add_argument("--obs", default="sz", help="sx|sy|sz|id or a0,ax,ay,az")
    p.add_argument("--samples", type=int, default=100000)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("bell-moments", parents=[common], help="second moments of hidden variables for mixtures")
    p.add_argument("--mixture", help="w:x,y,z;w:x,y,z (default: the +-x and +-z mixtures)")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0 = exact only)")
    p.add_argument("--sampler", choices=("qmc", "iid"), default="qmc",
                   help="scrambled Sobol points (default) or i.i.d. Gaussian directions")
    p.set_defaults(func=cmd_bell_moments)

    p = sub.add_parser("coexist", parents=[common], help="coexistence margin of two qubit projections")
    p.add_argument("--pair", choices=("default", "custom"), default="default")
    p.add_argument("--a", help="Bloch vector of the first projection (custom pair)")
    p.add_argument("--b", help="Bloch vector of the second projection (custom pair)")
    p.set_defaults(func=cmd_coexist)

    p = sub.add_parser("spekkens-refute", parents=[common], help="refute a finite qubit representation")
    p.add_argument("candidate", nargs="?", help="candidate JSON (or bundled:candidate)")
    p.add_argument("--quantum", type=int, metavar="N", help="generate a candidate from N sampled pure states")
    p.set_defaults(func=cmd_spekkens_refute)

    p = sub.add_parser("extend", parents=[common], help="translated-linear extension of a point sample")
    p.add_argument("file", help="JSON with 'points' and 'values' (or bundled:points-one)")
    p.set_defaults(func=cmd_extend)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        args.tol_given = args.tol is not None
        if args.tol is None:
            args.tol = 1e-10
        if args.seed is None:
            args.seed = _default_seed()
        report, code = args.func(args)
    except (InputError, ValueError) as exc:
        print(f"nogo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MathError as exc:
        print(f"nogo: precondition violated: {exc}", file=sys.stderr)
        if exc.detail:
            print(json.dumps(_jsonable(exc.detail), sort_keys=True), file=sys.stderr)
        return EXIT_MATH
    print(_render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())

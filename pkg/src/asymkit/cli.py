"""Command line interface: scenario execution and artifact emission.

Subcommands mirror the scenario tasks.  Outputs are written atomically
(temp file + rename), JSON with stable key order and complex values as
[re, im] pairs, CSV with %.12g numbers, LF line endings and a provenance
header.  With a fixed seed the emitted bytes are identical across runs.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .depolarize import depol_sufficient, identity_mix_scan, minimal_depolarization
from .interconvert import (SurfaceSpec, choi_feasibility, generate_epsilon_net,
                           smoothed_check, surface_check)
from .minentropy import delta_h, phi_eta
from .modes import build_ito_basis, decompose_modes
from .qubit import state_from_bloch3
from .scenario import Scenario, ScenarioError, matrix_json, parse_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
THREADS_ENV = "ASYMKIT_THREADS"


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".asymkit-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(report, path):
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def _emit_csv(header_lines, columns, rows, path):
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join("%.12g" % v if isinstance(v, float) else str(v)
                              for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _report_feasibility(rep):
    out = {"verdict": rep.verdict, "margins": rep.margins}
    if rep.witness_choi is not None:
        out["witness_choi"] = matrix_json(rep.witness_choi)
    if rep.witness_eta is not None:
        out["witness_eta"] = matrix_json(rep.witness_eta)
        out["witness_delta_h"] = rep.witness_delta_h
    if rep.borderline_etas:
        out["borderline_count"] = len(rep.borderline_etas)
        out["borderline_delta_h"] = [d for _, d in rep.borderline_etas]
    return out


def _run_hmin(sc, args):
    ev = phi_eta(sc.reference_state, sc.input_state, sc.rep_ref, sc.rep_in,
                 method=sc.params.get("method", "auto"))
    return {"phi": ev.phi, "h_min": ev.h_min, "method": ev.method}, EXIT_OK


def _run_feasible(sc, args):
    surface = sc.params.get("surface")
    if surface:
        spec = SurfaceSpec(kind=surface.get("kind", "infinity_shell"),
                           radius=surface.get("radius", 1.0),
                           sampler=surface.get("sampler", "random"),
                           count=surface.get("count", 64),
                           epsilon=surface.get("epsilon", 0.2),
                           seed=surface.get("seed", sc.params.get("seed", 0)))
        rep = surface_check(sc.input_state, sc.target_state, sc.rep_in,
                            sc.rep_out, spec)
    else:
        rep = choi_feasibility(sc.input_state, sc.target_state, sc.rep_in,
                               sc.rep_out,
                               tol=sc.params.get("tolerances", {}).get("choi_tol", 1e-7))
    code = EXIT_INFEASIBLE if (rep.verdict == "infeasible"
                               and args.fail_on_infeasible) else EXIT_OK
    return _report_feasibility(rep), code


def _run_smoothed(sc, args):
    seed = args.seed if args.seed is not None else sc.params["seed"]
    rep = smoothed_check(sc.input_state, sc.target_state, sc.rep_in, sc.rep_out,
                         eps=sc.params.get("epsilon", 0.05), seed=seed)
    code = EXIT_INFEASIBLE if (rep.verdict == "infeasible"
                               and args.fail_on_infeasible) else EXIT_OK
    return _report_feasibility(rep), code


def _run_depol_threshold(sc, args):
    p_min = minimal_depolarization(sc.input_state, sc.target_state,
                                   sc.rep_in, sc.rep_out)
    rep = depol_sufficient(sc.input_state, sc.target_state, min(p_min, 1 - 1e-9),
                           sc.rep_in, sc.rep_out)
    rows = [{"lam": str(r["lam"]), "j": r["j"], "f": r["f"], "g": r["g"],
             "threshold": r["threshold"]} for r in rep.rows]
    return {"minimal_p": p_min, "verdict_at_minimal_p": rep.verdict,
            "lambda_min": rep.lambda_min, "n_irreps": rep.n_irreps,
            "modes": rows}, EXIT_OK


def _run_modes(sc, args):
    basis = build_ito_basis(sc.rep_in)
    dec = decompose_modes(sc.input_state, basis)
    coeffs = [{"lam": str(el.lam), "alpha": el.alpha, "j": el.j,
               "coefficient": [float(np.real(dec.coefficients[(el.lam, el.alpha, el.j)])),
                               float(np.imag(dec.coefficients[(el.lam, el.alpha, el.j)]))]}
              for el in basis.elements]
    modes = [{"lam": str(lam), "j": j, "matrix": matrix_json(m)}
             for lam, j, m in dec.mode_items()
             if np.abs(m).max() > 1e-12]
    return {"coefficients": coeffs, "modes": modes}, EXIT_OK


def _run_net(sc, args):
    seed = args.seed if args.seed is not None else sc.params["seed"]
    net = generate_epsilon_net(sc.rep_ref.dim, sc.params.get("epsilon", 0.2),
                               seed=seed)
    return {"states": [matrix_json(e) for e in net], "count": len(net)}, EXIT_OK


def _disk_grid(resolution):
    axis = np.linspace(-1.0, 1.0, resolution)
    pts = [(float(x), float(z)) for z in axis for x in axis
           if x * x + z * z <= 1.0 + 1e-12]
    return pts


def _run_region_scan(sc, args):
    grid = sc.params.get("grid")
    if not grid:
        raise ScenarioError("params.grid: required for task 'region-scan'")
    if sc.rep_out.dim != 2 or sc.rep_in.dim != 2:
        raise ScenarioError("region-scan currently targets qubit systems")
    scan = grid.get("scan", "targets")
    from .scenario import parse_state
    refs = [parse_state(r, f"params.grid.references[{i}]", sc.rep_ref.dim)
            for i, r in enumerate(grid.get("references", []))]
    want_sdp = bool(grid.get("sdp", False))
    want_sc = bool(grid.get("sc", False))
    p_level = float(grid.get("p", 0.0))
    pts = _disk_grid(grid["resolution"])

    def evaluate(point):
        x, z = point
        state = state_from_bloch3((x, 0.0, z))
        if scan == "targets":
            rho, sigma = sc.input_state, state
        else:
            rho, sigma = state, sc.target_state
        row = [x, z]
        for eta in refs:
            row.append(delta_h(eta, rho, sigma, sc.rep_in, sc.rep_out))
        if want_sdp:
            row.append(int(choi_feasibility(rho, sigma, sc.rep_in,
                                            sc.rep_out).feasible))
        if want_sc:
            row.append(int(identity_mix_scan(rho, sigma, p_level, sc.rep_in)))
        return row

    n_threads = _threads(args)
    if n_threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(evaluate, pts))
    else:
        rows = [evaluate(p) for p in pts]
    columns = ["x", "z"] + [f"delta_h_{i}" for i in range(len(refs))]
    if want_sdp:
        columns.append("sdp")
    if want_sc:
        columns.append("sc")
    header = [f"asymkit {__version__}", f"scenario sha256 {sc.source_hash}",
              f"task region-scan scan={scan} resolution={grid['resolution']} "
              f"p={p_level:g}"]
    return {"csv": (header, columns, rows)}, EXIT_OK


_RUNNERS = {"hmin": _run_hmin, "feasible": _run_feasible,
            "smoothed": _run_smoothed, "depol-threshold": _run_depol_threshold,
            "modes": _run_modes, "net": _run_net, "region-scan": _run_region_scan}


def run_scenario(sc, args):
    result, code = _RUNNERS[sc.task](sc, args)
    out_path = args.out or sc.output_path
    fmt = args.format or sc.output_format or \
        ("csv" if sc.task == "region-scan" else "json")
    if "csv" in result:
        header, columns, rows = result["csv"]
        if fmt != "csv":
            raise ScenarioError("region-scan emits CSV; use --format csv")
        _emit_csv(header, columns, rows, out_path)
    else:
        _emit_json(result, out_path)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="asymkit",
        description="State interconversion under symmetry-covariant channels")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in _RUNNERS:
        p = sub.add_parser(task, help=f"run a {task!r} scenario")
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default: {THREADS_ENV} or CPU count)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--fail-on-infeasible", action="store_true")
    args = parser.parse_args(argv)
    try:
        with open(args.scenario, "rb") as fh:
            sc = parse_scenario(fh.read())
        if sc.task != args.command:
            raise ScenarioError(
                f"scenario task {sc.task!r} does not match subcommand "
                f"{args.command!r}")
        return run_scenario(sc, args)
    except (ScenarioError, OSError) as exc:
        print(f"asymkit: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

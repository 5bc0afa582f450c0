"""Command line front end.

Subcommands: ml, fraccalc, kernel, lp-norm, simulate, verify.  Exit codes:
0 success / verification pass, 1 verification failure, 2 configuration
error.  All artifacts are written atomically and every simulate/verify run
emits a manifest with the config digest and the seeds used.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import config as cfg
from .errors import ConfigError, FracSpdeError, ParameterError
from .fieldio import read_field, write_field
from .fraccalc import GridFunction, TimeGrid, caputo_derivative, frac_integral, rl_derivative
from .kernels import KernelSymbol, TorusGrid, kernel_field
from .lpnorms import NormSpec, norm
from .solver import ProblemData, SemilinearMaps, solve_linear, solve_semilinear, solve_white_noise
from .specfun import MLParams, ml, ml_integral, ml_series, series_radius
from .levy import paths_to_csv, sample_jump_path, sample_wiener_on_nodes
from . import verify as ver

_FMT = "%.17g"


def _print_value(x):
    print(_FMT % x)


def cmd_ml(args):
    params = MLParams(args.a, args.b)
    if args.method == "series":
        val = float(ml_series(params, args.z))
        used = "series"
    elif args.method == "integral":
        val = float(ml_integral(params, -args.z))
        used = "integral"
    else:
        val = ml(params, args.z)
        used = (
            "series" if abs(args.z) <= series_radius(args.a, args.b)
            else "integral"
        )
    print((_FMT + "  method=%s") % (val, used))
    return 0


def cmd_fraccalc(args):
    data = np.loadtxt(args.input, delimiter=",", ndmin=2)
    t, vals = data[:, 0], data[:, 1]
    dt = np.diff(t)
    if t[0] != 0.0 or dt.size < 2 or not np.allclose(dt, dt[0], rtol=1e-10):
        raise ConfigError("input grid must be uniform and start at 0", "/input")
    grid = TimeGrid(float(t[-1]), t.size - 1)
    phi = GridFunction(grid, vals)
    op = {"integral": frac_integral, "rl": rl_derivative,
          "caputo": caputo_derivative}[args.op]
    out = op(phi, args.alpha)
    rows = np.column_stack([grid.nodes, out.values])
    _write_csv(args.output, rows, header="t,value")
    return 0


def _write_csv(path, rows, header):
    import tempfile

    dirname = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(header + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(_FMT % v for v in row) + "\n")
    os.replace(tmp, path)


def cmd_kernel(args):
    grid = TorusGrid(args.dim, args.modes, args.period)
    sym = KernelSymbol(
        args.kind, args.alpha, t=args.t,
        beta=args.beta if args.kind == "q" else None,
        frac_order=args.gamma,
    )
    fld = kernel_field(sym, grid, alias_tol=args.alias_tol)
    xs = grid.meshes()
    cols = [m.ravel() for m in xs] + [fld.ravel()]
    header = ",".join([f"x{i+1}" for i in range(grid.dim)] + ["value"])
    _write_csv(args.out, np.column_stack(cols), header)
    return 0


def cmd_lp_norm(args):
    fld, grid = read_field(args.input)
    spec = NormSpec(args.space, args.p, args.index)
    _print_value(norm(fld, spec, grid))
    return 0


def _load_config(path, overrides=()):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", "/")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", "/")
    for item in overrides or ():
        doc = _apply_override(doc, item)
    return doc


def _apply_override(doc, item):
    """Apply one --set /json/pointer=value override; value parsed as JSON."""
    if "=" not in item:
        raise ConfigError(f"--set needs POINTER=VALUE, got {item!r}", "/")
    pointer, raw = item.split("=", 1)
    keys = [k for k in pointer.split("/") if k]
    if not keys:
        raise ConfigError("--set pointer must name a key", "/")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set cannot descend into /{k}", pointer)
    node[keys[-1]] = value
    return doc


def cmd_simulate(args):
    doc = _load_config(args.config, args.set)
    t0 = cfg.timer()
    params = cfg.parse_params(doc.get("params", {}))
    grid = cfg.parse_grid(doc.get("grid", {}))
    mesh = cfg.parse_time(doc.get("time", {}))
    noise = doc.get("noise", {})
    levy = cfg.parse_levy(noise.get("levy"))
    wiener_k = int(noise.get("wiener", {}).get("K", 0))
    data_doc = doc.get("data", {})
    seeds = doc.get("seeds", [0])
    equation = doc.get("equation", "linear")

    u0 = cfg.build_field(data_doc.get("u0"), grid, "/data/u0")
    v0 = cfg.build_field(data_doc.get("v0"), grid, "/data/v0")

    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    runs = []
    for seed in seeds:
        jump_paths = None
        mesh_run = mesh
        if levy is not None:
            jump_paths = [
                sample_jump_path(levy, mesh.tmax, seed, k)
                for k in range(levy.copies)
            ]
            mesh_run = mesh.with_times(
                np.concatenate([p.times for p in jump_paths])
                if any(p.times.size for p in jump_paths) else []
            )
        wiener = (
            sample_wiener_on_nodes(mesh_run.nodes, wiener_k, seed)
            if wiener_k else None
        )
        nodes = mesh_run.nodes
        forcing = None
        fdoc = data_doc.get("f")
        if fdoc is not None and "map" not in fdoc:
            base = cfg.build_field(fdoc, grid, "/data/f")
            env = cfg.time_envelope(fdoc.get("envelope"), nodes, "/data/f")
            forcing = env.reshape((-1,) + (1,) * grid.dim) * base

        def steps_from(docpart, pointer, extra_axes):
            if docpart is None:
                return None
            base = cfg.build_field(docpart, grid, pointer)
            env = cfg.time_envelope(docpart.get("envelope"), nodes[:-1], pointer)
            arr = env.reshape((-1,) + (1,) * grid.dim) * base
            return arr.reshape((nodes.size - 1,) + extra_axes + grid.shape)

        gdoc, hdoc = data_doc.get("g"), data_doc.get("h")
        data = ProblemData(
            u0=u0, v0=v0, forcing=forcing,
            g_steps=steps_from(gdoc, "/data/g", (1,)) if wiener_k else None,
            h_steps=steps_from(hdoc, "/data/h", (1, 1)) if levy else None,
        )
        if equation == "linear":
            sol = solve_linear(data, params, grid, mesh_run, wiener,
                               jump_paths, seeds=(seed,))
        elif equation == "semilinear":
            fm = cfg.build_map(data_doc.get("f_map"), "/data/f_map")
            maps = SemilinearMaps(
                f_map=fm[0] if fm else None,
                lipschitz=fm[1] if fm else 0.0,
            )
            sol = solve_semilinear(maps, data, params, grid, mesh_run,
                                   wiener, jump_paths, seeds=(seed,))
        elif equation == "white_noise":
            hm = cfg.build_map(data_doc.get("h_map"), "/data/h_map")
            if hm is None or levy is None:
                raise ConfigError(
                    "white_noise needs /data/h_map and /noise/levy",
                    "/data/h_map",
                )
            sol = solve_white_noise(hm[0], data, params, grid, mesh,
                                    levy, levy.copies, seed)
        else:
            raise ConfigError(f"unknown equation {equation!r}", "/equation")

        final = os.path.join(args.out_dir, f"u_final_seed{seed}.field")
        write_field(final, sol.values[-1], grid)
        outputs.append(final)
        if jump_paths is not None:
            ppath = os.path.join(args.out_dir, f"paths_seed{seed}.csv")
            paths_to_csv(ppath, jump_paths)
            outputs.append(ppath)
        runs.append({"seed": seed, **{
            k: v for k, v in sol.provenance.items()
            if isinstance(v, (int, float, str))
        }})
    manifest = cfg.make_manifest(doc, seeds, params, outputs,
                                 cfg.timer() - t0,
                                 extra={"equation": equation, "runs": runs})
    mpath = os.path.join(args.out_dir, "manifest.json")
    cfg.write_json_atomic(mpath, manifest)
    print(mpath)
    return 0


_CLAIMS = ("band-envelope", "besov-conv", "max-reg", "scaling", "gronwall")


def run_verification(claim, doc):
    """Dispatch one verification claim from its config document."""
    seed = int(doc.get("seed", 0))
    if claim == "band-envelope":
        tspec = doc.get("t", {})
        tvals = np.geomspace(
            float(tspec.get("min", 1e-3)), float(tspec.get("max", 10.0)),
            int(tspec.get("count", 20)),
        )
        jspec = doc.get("j", [1, 6])
        rep = ver.verify_band_envelopes(
            doc.get("kind", "p"), float(doc["alpha"]),
            range(int(jspec[0]), int(jspec[1]) + 1), tvals,
            beta=doc.get("beta"), p=float(doc.get("p", 2.0)),
            eps=doc.get("eps"), delta=doc.get("delta"),
        )
        return rep.to_dict()
    if claim == "besov-conv":
        st = ver.verify_besov_convolution(
            doc.get("theorem", "q"), float(doc["alpha"]),
            p=float(doc.get("p", 2.0)), beta=doc.get("beta"),
            n_samples=int(doc.get("samples", 10)),
            levels=tuple(tuple(lv) for lv in doc.get("levels", [[64, 64], [128, 128]])),
            seed=seed,
        )
        return st.to_dict()
    if claim == "max-reg":
        params = cfg.parse_params(doc.get("params", {}))
        st = ver.verify_max_regularity(
            params,
            levels=tuple(tuple(lv) for lv in doc.get("levels", [[64, 64], [128, 128]])),
            n_samples=int(doc.get("samples", 100)),
            levy_spec=cfg.parse_levy(doc.get("levy")),
            seed=seed,
        )
        return st.to_dict()
    if claim == "scaling":
        params = cfg.parse_params(doc.get("params", {}))
        return ver.verify_scaling_criticality(
            params, modes=int(doc.get("modes", 64)),
            steps=int(doc.get("steps", 64)), seed=seed,
        )
    if claim == "gronwall":
        params = cfg.parse_params(doc.get("params", {}))
        rep = ver.verify_gronwall(
            params, n_samples=int(doc.get("samples", 50)), seed=seed,
        )
        return rep.to_dict()
    raise ConfigError(f"unknown claim {claim!r}", "/claim")


def _canonical_report(claim, doc, study):
    """Uniform report shape around the study-specific payload."""
    fitted = {}
    if "fitted_constant" in study:
        fitted["C"] = study["fitted_constant"]
    if "slopes" in study:
        fitted["slopes"] = study["slopes"]
    return {
        "claim": study.get("claim", claim),
        "params": doc.get("params", {
            k: doc[k] for k in ("kind", "theorem", "alpha", "beta", "p")
            if k in doc
        }),
        "fitted_constants": fitted,
        "violations": study.get("violations"),
        "ratios_by_level": study.get("ratios_by_level"),
        "verdict": study["verdict"],
        "detail": study,
    }


def cmd_verify(args):
    doc = _load_config(args.config, args.set)
    study = run_verification(args.claim, doc)
    report = _canonical_report(args.claim, doc, study)
    report["config_digest"] = cfg.config_digest(doc)
    # reports carry no wall time: repeated runs of one config digest must
    # be byte-identical
    manifest = cfg.make_manifest(doc, [int(doc.get("seed", 0))], None,
                                 [args.out], None)
    manifest.pop("wall_time_s", None)
    report["manifest"] = manifest
    cfg.write_json_atomic(args.out, report)
    print(f"{args.out}: {report['verdict']}")
    return 0 if report["verdict"] == "pass" else 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fracspde",
        description="kernels, norms, simulation and estimate checks for "
                    "time-fractional stochastic heat equations",
    )
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: FSPDE_THREADS or all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate the two-parameter Mittag-Leffler function")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--method", choices=("series", "integral", "auto"),
                   default="auto")
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("fraccalc", help="fractional integral/derivative of a CSV signal")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--op", choices=("integral", "rl", "caputo"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fraccalc)

    p = sub.add_parser("kernel", help="tabulate a fundamental-solution kernel")
    p.add_argument("--kind", choices=("p", "q", "P"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--modes", type=int, default=256)
    p.add_argument("--period", type=float, default=2.0 * math.pi)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alias-tol", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("lp-norm", help="norm of a binary field file")
    p.add_argument("--space", choices=("lp", "sobolev", "besov"), required=True)
    p.add_argument("--index", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_lp_norm)

    p = sub.add_parser("simulate", help="run one mild-solution simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--set", action="append", metavar="POINTER=VALUE",
                   help="override a config entry (repeatable)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run one verification study")
    p.add_argument("--claim", choices=_CLAIMS, required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="report.json")
    p.add_argument("--set", action="append", metavar="POINTER=VALUE",
                   help="override a config entry (repeatable)")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None:
        os.environ["FSPDE_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc.pointer}: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        # inadmissible exponent/grid combinations are configuration errors
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FracSpdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

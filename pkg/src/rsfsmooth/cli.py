"""Command-line front end.

Subcommands: gen-graph, exact, smooth, sweep-alpha, denoise, ssl.
Exit codes: 0 ok, 2 usage, 3 data error, 4 numerical failure.
All outputs are deterministic byte-for-byte given --seed.
"""

import argparse
import json
import math
import sys

import numpy as np

from .errors import DataError, NumericalError
from .estimators import AlphaStrategy, run_monte_carlo
from .experiments import denoise_table, sweep_alpha
from .graphs import gen_graph, load_graph, load_positions, save_graph
from .linalg import SmoothingProblem, solve_exact_cg
from .signals import load_signal, synthetic_signal
from .ssl import SSLProblem, accuracy_experiment, load_labels

SYNTHETIC_KINDS = ("gaussian", "smooth", "constant")


def _parse_kv(text, what):
    params = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"bad {what} parameter {part!r} (expected key=value)")
        key, val = part.split("=", 1)
        try:
            params[key.strip()] = float(val) if "." in val or "e" in val.lower() else int(val)
        except ValueError:
            raise DataError(f"bad {what} value {part!r}") from None
    return params


def _parse_gen_spec(spec):
    name, _, rest = spec.partition(":")
    return name.strip(), _parse_kv(rest, "generator")


def _parse_grid(text):
    """"lin:a,b,n", "log:a,b,n", or a comma-separated list of values."""
    if text.startswith("lin:") or text.startswith("log:"):
        kind, rest = text[:3], text[4:]
        parts = rest.split(",")
        if len(parts) != 3:
            raise DataError(f"grid spec {text!r} needs start,stop,count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise DataError(f"cannot parse grid spec {text!r}") from None
        if count < 1:
            raise DataError("grid count must be >= 1")
        if kind == "lin":
            return np.linspace(start, stop, count)
        if start <= 0 or stop <= 0:
            raise DataError("log grid endpoints must be positive")
        return np.logspace(math.log10(start), math.log10(stop), count)
    try:
        return np.array([float(v) for v in text.split(",") if v])
    except ValueError:
        raise DataError(f"cannot parse grid {text!r}") from None


def _resolve_graph(args):
    if getattr(args, "graph", None):
        return load_graph(args.graph)
    name, params = _parse_gen_spec(args.gen)
    if name == "knn":
        if not getattr(args, "coords", None):
            raise DataError("knn generator needs --coords")
        params["coords"] = load_positions(args.coords)
    return gen_graph(name, seed=args.seed, **params)


def _resolve_signal(args, graph):
    spec = args.signal
    name, _, rest = spec.partition(":")
    if name in SYNTHETIC_KINDS:
        params = _parse_kv(rest, "signal")
        return synthetic_signal(graph, name, seed=args.seed, **params)
    return load_signal(spec, graph.n)


def _pyify(obj):
    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    return obj


def _write_json(path, payload):
    payload = {"schema": "1", **_pyify(payload)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _csv_cell(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_rows_csv(path, header, rows, comment=None):
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row[h]) for h in header) + "\n")


def _write_estimate(args, estimate, alpha=None, diagnostics=None):
    if args.format == "csv":
        rows = [{"node": i, "value": float(v)} for i, v in enumerate(estimate)]
        _write_rows_csv(args.out, ["node", "value"], rows)
    else:
        _write_json(args.out, {
            "estimate": estimate,
            "alpha": alpha,
            "diagnostics": diagnostics or {},
        })


def cmd_gen_graph(args):
    g = _resolve_graph(args)
    save_graph(g, args.out)
    return 0


def cmd_exact(args):
    g = _resolve_graph(args)
    y = _resolve_signal(args, g)
    problem = SmoothingProblem(g, y, args.q)
    x, iterations = solve_exact_cg(problem, tol=args.tol)
    _write_estimate(args, x, alpha=None,
                    diagnostics={"method": "exact-cg", "iterations": iterations})
    return 0


def cmd_smooth(args):
    g = _resolve_graph(args)
    y = _resolve_signal(args, g)
    problem = SmoothingProblem(g, y, args.q)
    strategy = AlphaStrategy.parse(args.alpha)
    result = run_monte_carlo(problem, args.n_samples, strategy, seed=args.seed)
    _write_estimate(args, result.estimate, alpha=result.alpha,
                    diagnostics=result.diagnostics)
    return 0


def cmd_sweep_alpha(args):
    g = _resolve_graph(args)
    y = _resolve_signal(args, g)
    out = sweep_alpha(g, y, args.q, _parse_grid(args.alpha_grid),
                      args.n_samples, args.realizations, seed=args.seed)
    if args.format == "json":
        _write_json(args.out, out)
    else:
        rows = [{
            "alpha": a,
            "mse_zbar": mz,
            "mse_xbar": out["mse_xbar"],
            "alpha_safe": out["alpha_safe"],
            "alpha_hat_mean": out["alpha_hat_mean"],
            "mse_zbar_alpha_safe": out["mse_zbar_alpha_safe"],
            "mse_zbar_alpha_hat": out["mse_zbar_alpha_hat"],
            "alpha_star": out["alpha_star"],
        } for a, mz in zip(out["alphas"], out["mse_zbar"])]
        _write_rows_csv(args.out, ["alpha", "mse_zbar", "mse_xbar", "alpha_safe",
                                   "alpha_hat_mean", "mse_zbar_alpha_safe",
                                   "mse_zbar_alpha_hat", "alpha_star"], rows)
    return 0


PSNR_CONVENTION = "psnr = 10 log10(peak^2 / mse), peak = max|clean signal|, mse floor 1e-15"


def cmd_denoise(args):
    g = _resolve_graph(args)
    clean = _resolve_signal(args, g)
    rows = denoise_table(g, clean, args.noise_std, _parse_grid(args.q_grid),
                         args.n_samples, seed=args.seed)
    header = ["q", "psnr_noisy", "psnr_exact", "psnr_xbar",
              "psnr_zbar_safe", "psnr_zbar_empirical"]
    if args.format == "json":
        _write_json(args.out, {"psnr_convention": PSNR_CONVENTION, "rows": rows})
    else:
        _write_rows_csv(args.out, header, rows, comment=PSNR_CONVENTION)
    return 0


def cmd_ssl(args):
    g = _resolve_graph(args)
    labels = load_labels(args.labels, g.n)
    problem = SSLProblem(graph=g, labels=labels, mu=args.mu, sigma=args.sigma)
    rows = []
    for m in [int(v) for v in args.labels_per_class.split(",") if v]:
        rows.extend(accuracy_experiment(problem, m, args.repeats,
                                        n_samples=args.n_samples, seed=args.seed))
    if args.format == "json":
        _write_json(args.out, {"rows": rows})
    else:
        _write_rows_csv(args.out, ["m", "method", "mean_acc", "std_acc"], rows)
    return 0


def _add_graph_source(p, gen_only=False):
    if gen_only:
        p.add_argument("--gen", required=True,
                       help="generator spec, e.g. regular:n=1000,d=20 | "
                            "ba:n=1000,k=10 | grid:rows=4,cols=5 | knn:k=5")
    else:
        grp = p.add_mutually_exclusive_group(required=True)
        grp.add_argument("--graph", help="edge-list file")
        grp.add_argument("--gen", help="generator spec, e.g. regular:n=1000,d=20")
    p.add_argument("--coords", help="x,y coordinate file for the knn generator")


def _seed_value(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _add_common_out(p):
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=_seed_value, default=0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rsfsmooth",
        description="Graph signal smoothing via random spanning forests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a graph and write its edge list")
    _add_graph_source(p, gen_only=True)
    _add_common_out(p)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("exact", help="exact smoothing x_hat = K y")
    _add_graph_source(p)
    p.add_argument("--signal", required=True,
                   help="signal file, or gaussian | smooth[:modes=M] | constant[:value=V]")
    p.add_argument("--q", type=float, required=True, help="regularization weight")
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common_out(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("smooth", help="forest Monte Carlo smoothing")
    _add_graph_source(p)
    p.add_argument("--signal", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--n-samples", type=int, default=10)
    p.add_argument("--alpha", default="safe",
                   help="step size: safe | empirical | oracle | a float (0 disables)")
    _add_common_out(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("sweep-alpha", help="empirical MSE across a step-size grid")
    _add_graph_source(p)
    p.add_argument("--signal", default="gaussian")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--alpha-grid", required=True,
                   help="lin:a,b,n | log:a,b,n | comma-separated values")
    p.add_argument("--n-samples", type=int, default=10)
    p.add_argument("--realizations", type=int, default=200)
    _add_common_out(p)
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("denoise", help="PSNR of each estimator across a q grid")
    _add_graph_source(p)
    p.add_argument("--signal", required=True, help="clean signal (file or synthetic)")
    p.add_argument("--noise-std", type=float, required=True)
    p.add_argument("--q-grid", default="log:0.01,10,16")
    p.add_argument("--n-samples", type=int, default=2)
    _add_common_out(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("ssl", help="semi-supervised classification accuracy table")
    _add_graph_source(p)
    p.add_argument("--labels", required=True, help="node,class_id CSV")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--n-samples", type=int, default=50)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--labels-per-class", default="1",
                   help="comma-separated list of labeled-vertices-per-class counts")
    _add_common_out(p)
    p.set_defaults(func=cmd_ssl)

    return parser


def run(argv=None):
    """Parse arguments and execute; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 4


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

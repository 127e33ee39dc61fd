"""Command-line driver: ``qstar <subcommand> [options]``.

Every subcommand writes CSV (canonical) and, for ``figures``, SVG. Files are
written atomically and begin with a ``# qstar-schema: <kind> v1`` line.
Exit status: 0 ok, 1 numerical failure, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import _accel
from .errors import BudgetExhausted, ComputeError, ConfigError
from .graph import SplitObservable, ensemble_graph, graph_from_spec, resolve_delta_l
from .io import read_csv, write_atomic, write_csv, write_json
from .limit import CdfTable, cdf_table, qe_step_cdf
from .scars import scar_sequence
from .spectrum import DEFAULT_TOL, eigenvalues
from .statistics import ecdf_of, sup_distance, sup_distance_to
from .svg import Chart
from .wavefunction import indicator_elements

log = logging.getLogger("qstar")

FIG5_DEFAULTS = {"alpha": 3, "v": 30, "count": 100_000}
FIG6_DEFAULTS = {"alpha": 3, "v_list": [5, 10, 15, 20, 25, 30], "count": 50_000}
PLOT_POINTS = 2000  # ECDF jumps drawn per curve

COLUMNS_HELP = """\
output columns:
  spectrum         n, k, residual, left_pole_bond, right_pole_bond
  matrix-elements  n, k, me_exact, me_leading
  limit-cdf        R, F, err_estimate
  compare          report.json: D_v, D_qe, N, seed, v, alpha, element, runtime
  scars            r, epsilon, n, k, sec2_i1, sec2_i2, sec2_max_other, ratio, mass, residual
  figures fig5     me.csv (as matrix-elements), F.csv (as limit-cdf), fig5.svg, fig5_report.json
  figures fig6     fig6.csv (R, F, dev_v<v>...), fig6_report.json (D_v per v), fig6.svg
every CSV starts with a '# qstar-schema: <kind> v1' line; floats use 17 significant digits.
"""


# ----------------------------------------------------------------- parsing helpers

def _count(text) -> int:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not x.is_integer() or x < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(x)


def _num_list(value, cast):
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [s for s in str(value).split(",") if s.strip()]
    try:
        return [cast(float(s)) if cast is int else cast(s) for s in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad list {value!r}: {exc}") from exc


def parse_r_grid(text) -> np.ndarray:
    """``a:b:step`` (inclusive of b when it lies on the grid) or a list of values."""
    if isinstance(text, (list, tuple)):
        grid = np.asarray(text, dtype=float)
    else:
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ConfigError(f"--r-grid must look like a:b:step, got {text!r}")
        try:
            a, b, h = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad --r-grid {text!r}") from exc
        if h <= 0 or b < a:
            raise ConfigError(f"bad --r-grid {text!r}")
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        grid = np.round(a + h * np.arange(n), 12)
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid >= 1) or np.any(np.diff(grid) <= 0):
        raise ConfigError("R grid must be increasing and inside (0, 1)")
    return grid


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="seed for ensemble sampling (default 0)")
    g.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL, help="root tolerance, relative step")
    g.add_argument("--out-dir", default=".", help="directory for relative output paths")
    g.add_argument("--config", default=None,
                   help="JSON object whose keys override the command-line options")
    g.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="qstar", description="Quantum star graphs: spectra, matrix elements, limit law, scars.",
        epilog=COLUMNS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("spectrum", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="first N eigenvalues of a graph")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--count", type=_count, required=True)
    p.add_argument("--out", default="spectrum.csv")

    p = sub.add_parser("matrix-elements", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="indicator matrix elements on the first v bonds")
    p.add_argument("--graph", required=True)
    p.add_argument("--v", type=int, default=None, help="bonds in the observable (default from graph)")
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--count", type=_count, required=True)
    p.add_argument("--out", default="me.csv")

    p = sub.add_parser("limit-cdf", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="tabulate the limiting CDF F(R)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r-grid", default="0.01:0.99:0.01")
    p.add_argument("--out", default="F.csv")

    p = sub.add_parser("compare", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="sup-distance between the matrix-element ECDF and F")
    p.add_argument("--graph", required=True)
    p.add_argument("--v", type=int, default=None)
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--count", type=_count, required=True)
    p.add_argument("--cdf", default=None, help="F.csv from limit-cdf (computed if omitted)")
    p.add_argument("--exact", action="store_true", help="use exact instead of leading-term elements")
    p.add_argument("--out", default="report.json")

    p = sub.add_parser("scars", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="certified eigenfunctions localizing on two bonds")
    p.add_argument("--graph", required=True)
    p.add_argument("--bonds", default="1,2", help="two 1-based bond indices")
    p.add_argument("--eps", default="0.2,0.1,0.05,0.02", help="strictly decreasing schedule")
    p.add_argument("--budget", type=_count, default=10**7, help="torus steps per level")
    p.add_argument("--first-hit", action="store_true",
                   help="accept the first bunching hit per level even if the mass drops")
    p.add_argument("--out", default="scars.csv")

    p = sub.add_parser("figures", parents=[common], formatter_class=fmt, epilog=COLUMNS_HELP,
                       help="reproduce the ECDF-vs-F figures (fig5, fig6)")
    p.add_argument("--id", required=True, choices=["fig5", "fig6"])
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--v", type=int, default=None, help="fig5 only")
    p.add_argument("--v-list", default=None, help="fig6 only, comma separated")
    p.add_argument("--count", type=_count, default=None)
    p.add_argument("--delta-l", default="auto", help="'auto', 'scaled' (1/v^2) or a number")
    p.add_argument("--r-grid", default="0.005:0.995:0.005")
    p.add_argument("--cdf", default=None, help="reuse an F.csv instead of recomputing F")
    return parser


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Config-file keys (dashes or underscores) override parsed options."""
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "config") or not hasattr(args, dest):
            raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
        if dest in ("count", "budget"):
            value = _count(value)
        setattr(args, dest, value)
    return args


# ----------------------------------------------------------------- helpers

def _out_path(args, name) -> Path:
    p = Path(name)
    return p if p.is_absolute() else Path(args.out_dir) / p


def _seed(args) -> int:
    return 0 if args.seed is None else int(args.seed)


def _load_graph_spec(args, count=None):
    try:
        spec = json.loads(Path(args.graph).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read graph file {args.graph}: {exc}") from exc
    if not isinstance(spec, dict):
        raise ConfigError("graph spec must be a JSON object")
    if "lengths" not in spec and args.seed is not None:
        spec = dict(spec, seed=args.seed)
    return spec, graph_from_spec(spec, count=count)


def _observable(args, spec, graph) -> SplitObservable:
    v = args.v if args.v is not None else spec.get("v")
    alpha = args.alpha if args.alpha is not None else spec.get("alpha")
    if v is None or alpha is None:
        raise ConfigError("--v and --alpha are required when the graph file lists lengths")
    obs = SplitObservable(int(v), int(alpha))
    if not obs.compatible(graph):
        raise ConfigError(f"observable needs {obs.b} bonds, graph has {graph.b}")
    return obs


def _load_cdf(path, alpha=None) -> CdfTable:
    _, cols = read_csv(path, expect_kind="limit-cdf")
    for c in ("R", "F", "err_estimate"):
        if c not in cols:
            raise ConfigError(f"{path} lacks column {c}")
    return CdfTable(cols["R"], cols["F"], cols["err_estimate"],
                    float("nan") if alpha is None else float(alpha))


def _cdf_columns(table: CdfTable) -> dict:
    return {"R": table.R, "F": table.F, "err_estimate": table.err}


# ----------------------------------------------------------------- subcommands

def cmd_spectrum(args) -> None:
    spec, graph = _load_graph_spec(args, count=args.count)
    s = eigenvalues(graph, args.count, tol=args.tol)
    write_csv(_out_path(args, args.out), "spectrum", {
        "n": s.n, "k": s.k, "residual": s.residual,
        "left_pole_bond": s.left.bond, "right_pole_bond": s.right.bond,
    })
    log.info("spectrum: %d eigenvalues, max residual %.3g", len(s), float(s.residual.max()))


def _matrix_elements(graph, obs, count, tol):
    s = eigenvalues(graph, count, tol=tol)
    exact, leading = indicator_elements(s.k, graph, obs)
    return s, exact, leading


def _me_columns(s, exact, leading) -> dict:
    return {"n": s.n, "k": s.k, "me_exact": exact, "me_leading": leading}


def cmd_matrix_elements(args) -> None:
    spec, graph = _load_graph_spec(args, count=args.count)
    obs = _observable(args, spec, graph)
    s, exact, leading = _matrix_elements(graph, obs, args.count, args.tol)
    write_csv(_out_path(args, args.out), "matrix-elements", _me_columns(s, exact, leading))
    log.info("matrix-elements: %d states, mean leading %.6f", len(s), float(leading.mean()))


def cmd_limit_cdf(args) -> None:
    if args.alpha < 1:
        raise ConfigError("alpha must be >= 1")
    table = cdf_table(args.alpha, parse_r_grid(args.r_grid))
    write_csv(_out_path(args, args.out), "limit-cdf", _cdf_columns(table))
    log.info("limit-cdf: %d points, max error estimate %.2g", table.R.size, float(table.err.max()))


def cmd_compare(args) -> None:
    t0 = time.perf_counter()
    spec, graph = _load_graph_spec(args, count=args.count)
    obs = _observable(args, spec, graph)
    table = _load_cdf(args.cdf, obs.alpha) if args.cdf else cdf_table(obs.alpha)
    s, exact, leading = _matrix_elements(graph, obs, args.count, args.tol)
    emp = ecdf_of(exact if args.exact else leading)
    report = {
        "D_v": sup_distance(emp, table),
        "D_qe": sup_distance_to(emp, lambda r: qe_step_cdf(r, obs.alpha)),
        "N": int(args.count), "seed": spec.get("seed"), "v": obs.v, "alpha": obs.alpha,
        "element": "exact" if args.exact else "leading",
        "runtime": time.perf_counter() - t0,
    }
    write_json(_out_path(args, args.out), report)
    log.info("compare: D_v = %.4f, D_qe = %.4f (N=%d)", report["D_v"], report["D_qe"], args.count)


def cmd_scars(args) -> None:
    _, graph = _load_graph_spec(args)
    bonds = _num_list(args.bonds, int)
    if len(bonds) != 2:
        raise ConfigError("--bonds needs exactly two bond indices")
    eps = _num_list(args.eps, float)
    try:
        certs = scar_sequence(graph, bonds[0], bonds[1], eps, budget=args.budget, tol=args.tol,
                              increasing_mass=not args.first_hit)
        failure = None
    except BudgetExhausted as exc:
        certs, failure = exc.partial, exc
    cols = {c: [getattr(x, c) for x in certs] for c in
            ("r", "epsilon", "n_r", "k", "sec2_i1", "sec2_i2", "sec2_max_other", "ratio", "mass",
             "residual")}
    cols["n"] = cols.pop("n_r")
    order = ["r", "epsilon", "n", "k", "sec2_i1", "sec2_i2", "sec2_max_other", "ratio", "mass",
             "residual"]
    write_csv(_out_path(args, args.out), "scars", {c: np.asarray(cols[c]) for c in order})
    for c in certs:
        log.info("scar r=%d eps=%g n=%d k=%.6f mass=%.7f ratio=%.5f",
                 c.r, c.epsilon, c.n_r, c.k, c.mass, c.ratio)
    if failure is not None:
        raise failure


def _figure_cdf(args, alpha) -> CdfTable:
    if args.cdf:
        return _load_cdf(args.cdf, alpha)
    return cdf_table(alpha, parse_r_grid(args.r_grid))


def ecdf_steps(emp, max_points: int = PLOT_POINTS):
    """Staircase vertices of the ECDF, thinned to at most ``max_points`` jumps."""
    idx = np.unique(np.linspace(0, emp.n - 1, min(emp.n, max_points)).astype(int))
    return emp.samples[idx], (idx + 1) / emp.n


def _base_chart(title, ylabel, ylim):
    return Chart(title=title, xlabel="R", ylabel=ylabel, xlim=(0.0, 1.0), ylim=ylim)


def cmd_figures(args) -> None:
    defaults = FIG5_DEFAULTS if args.id == "fig5" else FIG6_DEFAULTS
    alpha = int(args.alpha if args.alpha is not None else defaults["alpha"])
    count = int(args.count if args.count is not None else defaults["count"])
    seed = _seed(args)
    if alpha < 1:
        raise ConfigError("alpha must be >= 1")
    if args.id == "fig5":
        if args.v_list is not None:
            raise ConfigError("fig5 takes a single --v, not --v-list")
        _figure5(args, alpha, int(args.v or defaults["v"]), count, seed)
    else:
        if args.v is not None:
            raise ConfigError("fig6 takes --v-list, not --v")
        v_list = _num_list(args.v_list, int) if args.v_list is not None else defaults["v_list"]
        if not v_list:
            raise ConfigError("--v-list must not be empty")
        _figure6(args, alpha, v_list, count, seed)


def fig5_svg(emp, table: CdfTable, alpha: float, title: str) -> str:
    """ECDF staircase, the limit law F and the ergodic step at 1/alpha."""
    if emp.n == 0:
        raise ConfigError("no samples to plot")
    chart = _base_chart(title, "cumulative", (0.0, 1.0))
    xs, ys = ecdf_steps(emp)
    chart.add(xs, ys, "ECDF of matrix elements", step=True)
    R = np.concatenate([[0.0], table.R, [1.0]])
    chart.add(R, table(R), "F(R), limit law")
    chart.add([0.0, 1.0 / alpha, 1.0 / alpha, 1.0], [0.0, 0.0, 1.0, 1.0],
              "ergodic step at 1/alpha", dashed=True, color="#7f7f7f")
    return chart.to_svg()


def _ensemble(v, alpha, count, delta_l, seed):
    dl = resolve_delta_l(v, alpha, count, 1.0, delta_l)
    return ensemble_graph(v, alpha, count=count, delta_l=dl, seed=seed), dl


def _figure5(args, alpha, v, count, seed) -> None:
    t0 = time.perf_counter()
    graph, dl = _ensemble(v, alpha, count, args.delta_l, seed)
    obs = SplitObservable(v, alpha)
    s, exact, leading = _matrix_elements(graph, obs, count, args.tol)
    emp = ecdf_of(leading)
    table = _figure_cdf(args, alpha)
    svg = fig5_svg(emp, table, alpha, f"Matrix elements, alpha={alpha}, v={v}, N={count}")
    write_csv(_out_path(args, "me.csv"), "matrix-elements", _me_columns(s, exact, leading))
    write_csv(_out_path(args, "F.csv"), "limit-cdf", _cdf_columns(table))
    write_atomic(_out_path(args, "fig5.svg"), svg)
    report = {"v": v, "alpha": alpha, "N": count, "seed": seed, "delta_l": dl,
              "D_v": sup_distance(emp, table),
              "D_qe": sup_distance_to(emp, lambda r: qe_step_cdf(r, alpha)),
              "runtime": time.perf_counter() - t0}
    write_json(_out_path(args, "fig5_report.json"), report)
    log.info("fig5: D(ECDF, F) = %.4f, D(ECDF, step) = %.4f", report["D_v"], report["D_qe"])


def _figure6(args, alpha, v_list, count, seed) -> None:
    t0 = time.perf_counter()
    table = _figure_cdf(args, alpha)
    R = table.R
    cols = {"R": R, "F": table.F}
    entries = []
    chart = _base_chart(f"ECDF_v - F, alpha={alpha}, N={count}", "ECDF - F", (-0.15, 0.15))
    for v in v_list:
        t1 = time.perf_counter()
        graph, dl = _ensemble(int(v), alpha, count, args.delta_l, seed)
        _, _, leading = _matrix_elements(graph, SplitObservable(int(v), alpha), count, args.tol)
        emp = ecdf_of(leading)
        dev = emp(R) - table.F
        cols[f"dev_v{v}"] = dev
        chart.add(R, dev, f"v={v}")
        entries.append({"v": int(v), "D_v": sup_distance(emp, table), "delta_l": dl,
                        "runtime": time.perf_counter() - t1})
        log.info("fig6: v=%d D_v=%.4f", v, entries[-1]["D_v"])
    write_csv(_out_path(args, "fig6.csv"), "fig6-deviation", cols)
    write_atomic(_out_path(args, "fig6.svg"), chart.to_svg())
    write_json(_out_path(args, "fig6_report.json"),
               {"alpha": alpha, "N": count, "seed": seed, "entries": entries,
                "runtime": time.perf_counter() - t0})


COMMANDS = {
    "spectrum": cmd_spectrum,
    "matrix-elements": cmd_matrix_elements,
    "limit-cdf": cmd_limit_cdf,
    "compare": cmd_compare,
    "scars": cmd_scars,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    t0 = time.perf_counter()
    try:
        args = apply_config(args)
        _accel.set_threads(args.threads)
        log.info("%s: seed=%s backend=%s", args.command, args.seed, _accel.get_backend())
        COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except ComputeError as exc:
        log.error("computation failed: %s", exc)
        return 1
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

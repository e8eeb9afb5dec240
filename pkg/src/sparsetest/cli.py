"""Reproducible experiment runner.

Subcommands
-----------
fig2      closed-form marginal risk curves (mFDR / FNR / mR) of thresholding
fig3      level-set lattice of the two-offset boundary function
fig4      Monte-Carlo risks of the BH and l-value procedures at (x, y) points
simulate  arbitrary (signal x procedure x reps) sweep from a config file
boundary  boundary functionals: lambda_n, minimax limit, t*, p_n / fbar_n

Every command is a pure function of (config, seed): outputs are byte-identical
for any --threads value.  CSVs start with '#' comment lines recording the tool
version, the resolved config, and the seed; report commands also render a
matplotlib figure next to the CSV unless --no-plot is given.

Config files are INI-style with one section per command; values given on the
command line override the file, which overrides built-in defaults.  Exit
codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import NonConvergenceError, lambda_n, pn_lower, fbar_n, tstar, two_signal_levels
from .model import oracle_threshold, single_strength, two_strength
from .procedures import ProcedureSpec
from .risk import marginal_risk_curve, monte_carlo_risk
from .subbotin import NoiseDist

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

RISK_COLUMNS = [
    "procedure", "params", "n", "s_n", "zeta", "fdr", "se_fdr", "fnr", "se_fnr",
    "combined", "hamming_mean", "reps", "seed", "mfdr", "se_mfdr",
]


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


# -- config plumbing ----------------------------------------------------------

DEFAULTS = {
    "fig2": {"zeta": 2.0, "n": 10**10, "s_n": 100, "t_max": None, "t_points": 400},
    "fig3": {"zeta": 2.0, "beta": 0.5, "grid_min": -4.0, "grid_max": 4.0,
             "grid_points": 81},
    "fig4": {"n": 10**5, "s_n": 20, "reps": 100, "bh_alpha": 0.1, "lvalue_t": 0.3,
             "points": None},
    "simulate": {"n": None, "s_n": None, "zeta": 2.0, "b": "0", "procedures": None,
                 "reps": 100, "signs": "all-positive", "placement": "first-s",
                 "data": None},
    "boundary": {"n": None, "s_n": None, "zeta": 2.0, "b": "0", "alpha": None,
                 "rho": None, "reps": 10**4},
}

_CONVERTERS = {
    "zeta": float, "beta": float, "t_max": float, "grid_min": float,
    "grid_max": float, "bh_alpha": float, "lvalue_t": float, "alpha": float,
    "n": lambda s: int(float(s)), "s_n": lambda s: int(float(s)),
    "t_points": int, "grid_points": int, "reps": int, "rho": int, "seed": int,
    "b": str, "procedures": str, "signs": str, "placement": str, "points": str,
    "data": str,
}


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """defaults < config-file section < command-line flags."""
    cfg = dict(DEFAULTS[command])
    cfg["seed"] = 0
    if args.config:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            with open(args.config) as fh:
                parser.read_file(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}")
        except configparser.Error as e:
            raise ConfigError(f"malformed config file: {e}")
        if parser.has_section(command):
            for key, raw in parser.items(command):
                key = key.replace("-", "_")
                if key not in cfg:
                    raise ConfigError(f"[{command}] unknown key {key!r}")
                try:
                    cfg[key] = _CONVERTERS.get(key, str)(raw)
                except ValueError as e:
                    raise ConfigError(f"[{command}] {key}: {e}")
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _parse_float_list(raw: str, field: str) -> list[float]:
    try:
        values = [float(tok) for tok in raw.replace(";", ",").split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigError(f"{field}: {e}")
    if not values:
        raise ConfigError(f"{field}: empty list")
    return values


def _parse_procedures(raw: str) -> list[ProcedureSpec]:
    """Comma list of kind[:param], e.g. 'bh:0.1, lvalue:0.3, oracle, none-reject'."""
    specs = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        kind, _, param = tok.partition(":")
        kind = kind.strip()
        try:
            if kind == "bh":
                specs.append(ProcedureSpec("bh", alpha=float(param)))
            elif kind in ("lvalue", "fixed"):
                specs.append(ProcedureSpec(kind, t=float(param)))
            elif param:
                raise ConfigError(f"procedures: {kind!r} takes no parameter")
            else:
                specs.append(ProcedureSpec(kind))
        except ValueError as e:
            raise ConfigError(f"procedures: {tok!r}: {e}")
    if not specs:
        raise ConfigError("procedures: empty list")
    return specs


# -- output -------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _write_csv(path, comments: list[str], columns: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _header(command: str, cfg: dict, extra: list[str] = ()) -> list[str]:
    shown = {k: v for k, v in cfg.items() if k != "seed" and v is not None}
    kv = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(shown.items()))
    return [f"sparsetest {__version__}", f"command: {command}", f"config: {kv}",
            f"seed: {cfg['seed']}", *extra]


def _risk_row(spec: ProcedureSpec, cfg: SignalConfig, report) -> list:
    param = spec.alpha if spec.kind == "bh" else spec.t
    return [
        spec.kind, "" if param is None else _fmt(param), cfg.n, cfg.s_n, cfg.zeta,
        report.fdr, report.se_fdr, report.fnr, report.se_fnr, report.combined,
        report.hamming_mean, report.reps, report.seed, report.mfdr, report.se_mfdr,
    ]


# -- fig2: marginal risk curves ------------------------------------------------


def run_fig2(cfg: dict, out: Path, plot: bool) -> int:
    noise = NoiseDist(cfg["zeta"])
    a_star = oracle_threshold(cfg["n"], cfg["s_n"], cfg["zeta"])
    t_max = cfg["t_max"] if cfg["t_max"] is not None else a_star + 5.0
    cfg = dict(cfg, t_max=t_max)  # header records the resolved grid
    if cfg["t_points"] < 1:
        raise ConfigError("t_points: need at least one grid point")
    grid = np.linspace(0.0, t_max, cfg["t_points"])
    rows = marginal_risk_curve(cfg["n"], cfg["s_n"], noise, grid)
    i = int(np.argmin(rows[:, 3]))
    extra = [
        "columns: t, mfdr, fnr, mr",
        "asymptotic_minimax: 0.5",
        f"argmin_mr_t: {_fmt(rows[i, 0])}",
        f"min_mr: {_fmt(rows[i, 3])}",
    ]
    _write_csv(out, _header("fig2", cfg, extra), ["t", "mfdr", "fnr", "mr"], rows)
    if plot:
        from .plotting import plot_marginal_curves

        plot_marginal_curves(
            rows, f"marginal risks, zeta={cfg['zeta']:g}, n={cfg['n']:g}, "
            f"s_n={cfg['s_n']:g}", out.with_suffix(".png"),
        )
    return EXIT_OK


# -- fig3: boundary level sets ---------------------------------------------------


def run_fig3(cfg: dict, out: Path, plot: bool) -> int:
    noise = NoiseDist(cfg["zeta"])
    if cfg["grid_points"] < 2:
        raise ConfigError("grid_points: need at least two lattice points")
    if not cfg["grid_min"] < cfg["grid_max"]:
        raise ConfigError("grid_min must be below grid_max")
    if not 0.0 < cfg["beta"] < 1.0:
        raise ConfigError(f"beta must lie in (0, 1), got {cfg['beta']}")
    grid = np.linspace(cfg["grid_min"], cfg["grid_max"], cfg["grid_points"])
    levels = two_signal_levels(cfg["beta"], noise, grid, grid)
    rows = [
        (x, y, levels[i, j]) for i, x in enumerate(grid) for j, y in enumerate(grid)
    ]
    _write_csv(out, _header("fig3", cfg, ["columns: x, y, lambda"]),
               ["x", "y", "lambda"], rows)
    if plot:
        from .plotting import plot_level_sets

        plot_level_sets(
            grid, grid, levels,
            f"boundary level sets, zeta={cfg['zeta']:g}, beta={cfg['beta']:g}",
            out.with_suffix(".png"),
        )
    return EXIT_OK


# -- fig4: finite-sample risks at two-offset points ------------------------------


def default_fig4_points(noise: NoiseDist) -> list[tuple[str, float, float]]:
    """Built-in point lists: three boundary level sets and two comparison
    lines of constant (x+y)/2 that are not level sets.

    Each level set L is parametrized by tail fractions f, giving points
    (q(f), q(2L - f)) with q the noise quantile.  The lists approximate dot
    placements by design and deliberately stay inside |offset| < ~1.7, where
    desk-scale runs have converged; far antidiagonal excursions such as
    (3, -3) drift noticeably at n = 1e5 and can be explored with --points.
    """
    q = noise.upper_tail_inv
    pts = []
    for frac in (0.95, 0.90, 0.80, 0.70):
        pts.append(("level-0.7", q(frac), q(1.4 - frac)))
    for frac in (0.50, 0.40, 0.30, 0.20):
        pts.append(("level-0.5", q(frac), q(1.0 - frac)))
    for frac in (0.35, 0.30, 0.25, 0.20):
        pts.append(("level-0.2", q(frac), q(0.4 - frac)))
    for mean in (1.5, 2.0):
        for d in (0.0, 1.0, 2.0, 3.0):
            pts.append((f"line-mean-{mean:g}", mean + d, mean - d))
    return pts


def load_points_file(path: str) -> list[tuple[str, float, float]]:
    pts = []
    try:
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if [c.strip().lower() for c in row[:3]] == ["set", "x", "y"]:
                    continue
                if len(row) < 3:
                    raise ConfigError(f"points file line {i + 1}: need set,x,y")
                pts.append((row[0].strip(), float(row[1]), float(row[2])))
    except OSError as e:
        raise ConfigError(f"cannot read points file: {e}")
    except ValueError as e:
        raise ConfigError(f"points file: {e}")
    if not pts:
        raise ConfigError("points file: no points")
    return pts


def run_fig4(cfg: dict, out: Path, plot: bool, threads: int) -> int:
    noise = NoiseDist(2.0)  # the l-value procedure requires Gaussian noise
    points = (load_points_file(cfg["points"]) if cfg["points"]
              else default_fig4_points(noise))
    specs = [
        ProcedureSpec("lvalue", t=cfg["lvalue_t"]),
        ProcedureSpec("bh", alpha=cfg["bh_alpha"]),
    ]
    jobs = []
    for label, x, y in points:  # validate everything before computing
        try:
            jobs.append((label, x, y, two_strength(cfg["n"], cfg["s_n"], x, y, beta=0.5)))
        except ValueError as e:
            raise ConfigError(f"point ({label}, {x:g}, {y:g}): {e}")
    rows, plot_rows = [], []
    for label, x, y, sig in jobs:
        lam = two_signal_levels(0.5, noise, [x], [y])[0, 0]
        for spec in specs:
            rep = monte_carlo_risk(sig, noise, spec, cfg["reps"], cfg["seed"],
                                   threads=threads)
            rows.append([label, x, y, lam] + _risk_row(spec, sig, rep))
            plot_rows.append({"set": label, "x": x, "y": y,
                              "procedure": spec.kind, "combined": rep.combined})
    _write_csv(
        out,
        _header("fig4", cfg, ["columns: set, x, y, lambda_inf, " + ", ".join(RISK_COLUMNS)]),
        ["set", "x", "y", "lambda_inf"] + RISK_COLUMNS,
        rows,
    )
    if plot:
        from .plotting import plot_point_risks

        plot_point_risks(
            plot_rows, f"finite-sample combined risks, n={cfg['n']:g}, "
            f"s_n={cfg['s_n']:g}, reps={cfg['reps']}", out.with_suffix(".png"),
        )
    return EXIT_OK


# -- simulate: config-driven sweep -----------------------------------------------


def run_simulate(cfg: dict, out: Path, threads: int) -> int:
    if cfg["procedures"] is None:
        raise ConfigError("[simulate] procedures: required")
    specs = _parse_procedures(cfg["procedures"])
    if cfg["data"] is not None:
        return _simulate_data_file(cfg, specs, out)
    for field in ("n", "s_n"):
        if cfg[field] is None:
            raise ConfigError(f"[simulate] {field}: required")
    offsets = _parse_float_list(cfg["b"], "[simulate] b")
    noise = NoiseDist(cfg["zeta"])
    jobs = []
    for b in offsets:  # validate all configs before any computation
        try:
            jobs.append((b, single_strength(
                cfg["n"], cfg["s_n"], b, zeta=cfg["zeta"],
                signs=cfg["signs"], placement=cfg["placement"],
            )))
        except ValueError as e:
            raise ConfigError(f"[simulate] b={b:g}: {e}")
    rows = []
    for b, sig in jobs:
        for spec in specs:
            rep = monte_carlo_risk(sig, noise, spec, cfg["reps"], cfg["seed"],
                                   threads=threads)
            rows.append([b] + _risk_row(spec, sig, rep))
    _write_csv(
        out,
        _header("simulate", cfg, ["columns: b, " + ", ".join(RISK_COLUMNS)]),
        ["b"] + RISK_COLUMNS,
        rows,
    )
    return EXIT_OK


def _simulate_data_file(cfg: dict, specs: list[ProcedureSpec], out: Path) -> int:
    """Apply procedures to an observation vector loaded from a file
    (one real per line); emits rejection summaries, since the truth is unknown."""
    from .procedures import apply_procedure, load_observations

    try:
        X = load_observations(cfg["data"])
    except (OSError, ValueError) as e:
        raise ConfigError(f"[simulate] data: {e}")
    noise = NoiseDist(cfg["zeta"])
    rows = []
    for spec in specs:
        if spec.kind == "oracle" and cfg["s_n"] is None:
            raise ConfigError("[simulate] s_n: required for the oracle procedure")
        dec = apply_procedure(spec, X, noise, s_n=cfg["s_n"])
        param = spec.alpha if spec.kind == "bh" else spec.t
        rows.append([
            spec.kind, "" if param is None else _fmt(param), len(X), cfg["zeta"],
            dec.n_rejections, dec.threshold, dec.weight,
        ])
    _write_csv(
        out,
        _header("simulate", cfg,
                ["columns: procedure, params, n, zeta, rejections, threshold, weight"]),
        ["procedure", "params", "n", "zeta", "rejections", "threshold", "weight"],
        rows,
    )
    return EXIT_OK


# -- boundary: functional evaluation ----------------------------------------------


def run_boundary(cfg: dict, out: Path, threads: int) -> int:
    for field in ("n", "s_n"):
        if cfg[field] is None:
            raise ConfigError(f"boundary: {field} is required")
    offsets = _parse_float_list(cfg["b"], "boundary: b")
    noise = NoiseDist(cfg["zeta"])
    n, s_n = cfg["n"], cfg["s_n"]
    if not 0 < s_n < n:
        raise ConfigError(f"boundary: need 0 < s_n < n, got s_n={s_n}, n={n}")
    a_star = oracle_threshold(n, s_n, cfg["zeta"])
    if not min(offsets) > -a_star:
        raise ConfigError(f"boundary: offsets must exceed -a*_n = {-a_star:.6g}")

    rows = [["lambda_n", None, lambda_n(offsets, noise), None, None]]
    for b in offsets:
        rows.append(["minimax_limit", b, float(noise.upper_tail(b)), None, None])
    if cfg["alpha"] is not None:
        t = tstar(n, s_n, cfg["alpha"], offsets, noise)
        lhs = (1 - s_n / n) * 2 * noise.upper_tail(t) + (s_n / n) * float(
            np.mean(noise.upper_tail(t - a_star - np.asarray(offsets)))
        )
        rhs = 3 * noise.upper_tail(t) / cfg["alpha"]
        rows.append(["tstar", cfg["alpha"], t, None, abs(lhs - rhs) / rhs])
    if cfg["rho"] is not None:
        reps = cfg["reps"]
        for b in offsets:
            p = pn_lower(b, cfg["rho"], n, s_n, noise, reps, cfg["seed"], threads)
            rows.append(["pn", b, p, math.sqrt(p * (1 - p) / reps), None])
        fb = fbar_n(offsets, cfg["rho"], n, s_n, noise, reps, cfg["seed"], threads)
        se = math.sqrt(fb * (1 - fb) / (reps * len(offsets)))
        rows.append(["fbar_n", cfg["rho"], fb, se, None])
    _write_csv(
        out,
        _header("boundary", cfg, ["columns: quantity, param, value, se, residual"]),
        ["quantity", "param", "value", "se", "residual"],
        rows,
    )
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetest",
        description="sparse-sequence multiple testing experiments",
    )
    parser.add_argument("--version", action="version", version=f"sparsetest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--config", help="INI config file with a section per command")
        p.add_argument("--out", type=Path, default=Path(default_out), help="output CSV")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker threads; results do not depend on this")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p = sub.add_parser("fig2", help="closed-form marginal risk curves")
    common(p, "fig2.csv")
    p.add_argument("--zeta", type=float)
    p.add_argument("--n", type=lambda s: int(float(s)))
    p.add_argument("--s-n", dest="s_n", type=lambda s: int(float(s)))
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-points", dest="t_points", type=int)

    p = sub.add_parser("fig3", help="two-offset boundary level sets")
    common(p, "fig3.csv")
    p.add_argument("--zeta", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--grid-min", dest="grid_min", type=float)
    p.add_argument("--grid-max", dest="grid_max", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)

    p = sub.add_parser("fig4", help="Monte-Carlo risks at two-offset points")
    common(p, "fig4.csv")
    p.add_argument("--n", type=lambda s: int(float(s)))
    p.add_argument("--s-n", dest="s_n", type=lambda s: int(float(s)))
    p.add_argument("--reps", type=int)
    p.add_argument("--bh-alpha", dest="bh_alpha", type=float)
    p.add_argument("--lvalue-t", dest="lvalue_t", type=float)
    p.add_argument("--points", help="CSV of set,x,y rows overriding the defaults")
    p.add_argument("--full-scale", action="store_true",
                   help="run the full n=1e6 setting instead of the 1e5 fast mode")

    p = sub.add_parser("simulate", help="config-driven risk sweep")
    common(p, "simulate.csv")

    p = sub.add_parser("boundary", help="boundary functional evaluation")
    common(p, "boundary.csv")
    p.add_argument("--n", type=lambda s: int(float(s)))
    p.add_argument("--s-n", dest="s_n", type=lambda s: int(float(s)))
    p.add_argument("--zeta", type=float)
    p.add_argument("--b", help="comma list of offsets (use --b=-1,0,1 for negatives)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=int)
    p.add_argument("--reps", type=int)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args, args.command)
        if args.command == "fig4" and getattr(args, "full_scale", False) and args.n is None:
            cfg["n"] = 10**6
        plot = not args.no_plot
        if args.command == "fig2":
            return run_fig2(cfg, args.out, plot)
        if args.command == "fig3":
            return run_fig3(cfg, args.out, plot)
        if args.command == "fig4":
            return run_fig4(cfg, args.out, plot, args.threads)
        if args.command == "simulate":
            return run_simulate(cfg, args.out, args.threads)
        return run_boundary(cfg, args.out, args.threads)
    except (ConfigError, ValueError) as e:
        print(f"sparsetest: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as e:
        print(f"sparsetest: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

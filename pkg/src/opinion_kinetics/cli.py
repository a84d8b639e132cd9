"""Command-line front end.

Subcommands: simulate-abm, simulate-mf, solve-pde, solve-spectral,
equilibrium, cantor, metrics, sweep, verify. Option precedence is
CLI flag > --config JSON file > built-in defaults; the built-in numerical
defaults are dt=0.01, dx=1e-4 (20001 grid points), uniform init, t_end=20,
and population 1e5 ("fast") or 5e6 ("paper") via --scale.

Exit codes: 0 success, 1 domain/numerics error, 2 verification failure,
64 usage error. Outputs are byte-identical across reruns and worker counts
for identical (command, config, seed); verify reports additionally carry
wall-clock runtimes, which are informational and excluded from that contract.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, abm, equilibrium as eq, io, kinetic, metrics
from . import meanfield as mf, verify as verify_mod
from .core import (InitSpec, ModelParams, OpinionKineticsError,
                   derive_seed, validate_params)
from .parallel import parallel_map

SCALE_AGENTS = {"fast": 100_000, "paper": 5_000_000}
DEFAULTS = {
    "t_end": 20.0,
    "dt": 0.01,
    "dx": 1e-4,
    "seed": 1,
    "scale": "fast",
    "init": "uniform",
    "eps": 1e-9,
    "m0": None,
    "mollify_width": 0.02,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want 64
        raise UsageError(message)


def parse_mu(text: str):
    """Parse an interaction strength: decimal, exact rational 'p/q', or the
    special token '1-1/sqrt2'."""
    text = text.strip()
    if text == "1-1/sqrt2":
        return eq.VOLCANO_MU
    if "/" in text:
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"cannot parse mu value {text!r}: {exc}") from exc
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse mu value {text!r}") from exc


def _parse_init(text: str) -> InitSpec:
    if text == "uniform":
        return InitSpec.uniform()
    if text.startswith("point:"):
        return InitSpec.point(float(text.split(":", 1)[1]))
    if text.startswith("sample:"):
        return InitSpec.from_sample(io.read_samples_csv(text.split(":", 1)[1]))
    raise UsageError(f"unknown init {text!r}; use uniform, point:X0 or sample:PATH")


def _parse_floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _resolve(args: argparse.Namespace, config: Dict, key: str, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    if key in DEFAULTS and DEFAULTS[key] is not None:
        return DEFAULTS[key]
    return default


def _load_config(args) -> Dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _params_from(args, config) -> ModelParams:
    mu = getattr(args, "mu", None)
    if mu is None and "mu" in config:
        mu = parse_mu(str(config["mu"]))
    mup = _resolve(args, config, "mu_plus")
    mum = _resolve(args, config, "mu_minus")
    if mu is not None:
        if mup is not None or mum is not None:
            raise UsageError("give either --mu or the --mu-plus/--mu-minus pair")
        return validate_params(float(mu), float(mu))
    if mup is None or mum is None:
        raise UsageError("parameters required: --mu MU or --mu-plus/--mu-minus")
    return validate_params(float(mum), float(mup))


def _meta(command_name: str, **kwargs) -> Dict:
    cfg = {k: v for k, v in kwargs.items() if v is not None}
    return {"version": __version__, "command": command_name, "config": cfg}


def _snapshot_path(out: str, t: float, multiple: bool) -> Path:
    p = Path(out)
    if not multiple:
        return p
    return p.with_name(f"{p.stem}_t{t:g}{p.suffix or '.csv'}")


def _write_sample_outputs(out: str, snaps, meta: Dict, bins: Optional[int]) -> None:
    multiple = len(snaps) > 1
    for t, sample in snaps:
        m = dict(meta, snapshot_time=t)
        path = _snapshot_path(out, t, multiple)
        if bins:
            h = metrics.histogram(sample, bins)
            io.write_density_csv(path, h.centers, h.densities, m)
        else:
            io.write_samples_csv(path, sample, m)


# ---------------------------------------------------------------------------
# subcommand drivers


def _cmd_simulate_abm(args) -> int:
    config = _load_config(args)
    params = _params_from(args, config)
    scale = _resolve(args, config, "scale")
    n = int(_resolve(args, config, "n", SCALE_AGENTS[scale]) or SCALE_AGENTS[scale])
    t_end = float(_resolve(args, config, "t_end"))
    seed = int(_resolve(args, config, "seed"))
    init = _parse_init(_resolve(args, config, "init"))
    snaps = tuple(_parse_floats(args.snapshots)) if args.snapshots else None
    cfg = abm.AbmConfig(n_agents=n, t_end=t_end, params=params, seed=seed,
                        init=init, snapshot_times=snaps,
                        clock_rate=_resolve(args, config, "clock_rate", "n"))
    out_snaps = abm.simulate_abm(cfg)
    meta = _meta("simulate-abm", n_agents=n, t_end=t_end, seed=seed,
                 mu_minus=params.mu_minus, mu_plus=params.mu_plus,
                 init=_resolve(args, config, "init"), clock_rate=cfg.clock_rate,
                 snapshots=list(cfg.snapshot_times or (t_end,)))
    _write_sample_outputs(args.out, out_snaps, meta, args.bins)
    return 0


def _cmd_simulate_mf(args) -> int:
    config = _load_config(args)
    params = _params_from(args, config)
    n = int(_resolve(args, config, "n", SCALE_AGENTS[_resolve(args, config, "scale")]))
    t_end = float(_resolve(args, config, "t_end"))
    seed = int(_resolve(args, config, "seed"))
    init = _parse_init(_resolve(args, config, "init"))
    m0 = _resolve(args, config, "m0")
    m0 = init.mean() if m0 is None else float(m0)
    snaps = tuple(_parse_floats(args.snapshots)) if args.snapshots else None
    out_snaps = mf.simulate_particles(n, t_end, m0, params, init, seed,
                                      snapshot_times=snaps)
    meta = _meta("simulate-mf", n=n, t_end=t_end, seed=seed, m0=m0,
                 mu_minus=params.mu_minus, mu_plus=params.mu_plus,
                 init=_resolve(args, config, "init"),
                 snapshots=[t for t, _ in out_snaps])
    _write_sample_outputs(args.out, out_snaps, meta, args.bins)
    return 0


def _density_init(kind: str, n_points: int, width: float) -> kinetic.GridDensity:
    if kind == "uniform":
        return kinetic.GridDensity.uniform(n_points)
    if kind.startswith("point:"):
        # atoms cannot live on a density grid; mollify with a truncated
        # Gaussian bump of the requested width
        x0 = float(kind.split(":", 1)[1])
        return kinetic.GridDensity.from_function(
            lambda x: np.exp(-0.5 * ((x - x0) / width) ** 2), n_points)
    raise UsageError(f"solve-pde init must be uniform or point:X0, got {kind!r}")


def _cmd_solve_pde(args) -> int:
    config = _load_config(args)
    params = _params_from(args, config)
    t_end = float(_resolve(args, config, "t_end"))
    dt = float(_resolve(args, config, "dt"))
    dx = float(_resolve(args, config, "dx"))
    n_points = int(round(2.0 / dx)) + 1
    init_kind = _resolve(args, config, "init")
    rho0 = _density_init(init_kind, n_points,
                         float(_resolve(args, config, "mollify_width")))
    m0 = _resolve(args, config, "m0")
    m0 = rho0.moments()[0] if m0 is None else float(m0)
    snaps = tuple(_parse_floats(args.snapshots)) if args.snapshots else None
    sols = kinetic.solve_pde(rho0, t_end, dt, params, m0, snapshot_times=snaps)
    meta = _meta("solve-pde", t_end=t_end, dt=dt, dx=dx, m0=m0,
                 mu_minus=params.mu_minus, mu_plus=params.mu_plus,
                 init=init_kind, snapshots=[t for t, _ in sols])
    multiple = len(sols) > 1
    for t, rho in sols:
        io.write_density_csv(_snapshot_path(args.out, t, multiple), rho.x,
                             rho.values, dict(meta, snapshot_time=t))
    return 0


def _cmd_solve_spectral(args) -> int:
    config = _load_config(args)
    mu = float(parse_mu(str(_resolve(args, config, "mu", args.mu))))
    m0 = float(_resolve(args, config, "m0") or 0.0)
    t_end = float(_resolve(args, config, "t_end"))
    dt = float(_resolve(args, config, "dt"))
    xi_top = float(_resolve(args, config, "xi_top", 5.0))
    depth = int(_resolve(args, config, "depth", 40))
    state = kinetic.solve_spectral(mu, m0, xi_top, depth, t_end, dt)
    meta = _meta("solve-spectral", mu=mu, m0=m0, xi_top=xi_top, depth=depth,
                 t_end=t_end, dt=dt)
    io.write_spectral_csv(args.out, state.xi, state.values, meta)
    return 0


def _cmd_equilibrium(args) -> int:
    config = _load_config(args)
    mu = float(parse_mu(str(_resolve(args, config, "mu", args.mu))))
    m0 = float(_resolve(args, config, "m0") or 0.0)
    n = int(_resolve(args, config, "n", 1_000_000))
    eps = float(_resolve(args, config, "eps"))
    seed = int(_resolve(args, config, "seed"))
    sample = eq.sample_equilibrium(mu, m0, eps, n, seed)
    meta = _meta("equilibrium", mu=mu, m0=m0, n=n, eps=eps, seed=seed)
    if args.bins:
        h = metrics.histogram(sample, args.bins)
        io.write_density_csv(args.out, h.centers, h.densities, meta)
    elif args.cdf:
        s = sample.sort().values
        io.write_xy_csv(args.out, "x,cdf", s, (np.arange(n) + 1.0) / n, meta)
    else:
        io.write_samples_csv(args.out, sample, meta)
    return 0


def _cmd_cantor(args) -> int:
    mu = parse_mu(args.mu)
    level = args.levels
    intervals = eq.cantor_level(mu, level)
    payload = io.cantor_payload(mu, level, intervals,
                                eq.cantor_total_length(mu, level),
                                eq.hausdorff_dimension(float(mu)))
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        head = {"command": "cantor", "mu": payload["mu"], "level": level}
        lines = [io.BANNER, f"# {json.dumps(head, sort_keys=True)}",
                 "a,b,length"]
        lines += [f"{a},{b},{b - a}" for a, b in intervals]
        text = "\n".join(str(ln) for ln in lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _char_input(path: str):
    data = io.read_table(path)
    if isinstance(data, tuple):
        x, rho = data
        vals = kinetic.GridDensity(rho / np.trapezoid(rho, x))
        return vals.char_fn
    return data


def _sample_input(path: str):
    data = io.read_table(path)
    if isinstance(data, tuple):
        x, rho = data
        return kinetic.GridDensity(rho / np.trapezoid(rho, x)).sample(100_000)
    return data


def _cmd_metrics(args) -> int:
    kind = args.metric
    result: Dict = {"metric": kind}
    if kind in ("w1", "w2", "toscani"):
        if not args.b:
            raise UsageError(f"metric {kind} needs two inputs (--b FILE)")
    if kind == "w1":
        result["value"] = metrics.wasserstein_1(_sample_input(args.a),
                                                _sample_input(args.b))
    elif kind == "w2":
        result["value"] = metrics.wasserstein_2(_sample_input(args.a),
                                                _sample_input(args.b))
    elif kind == "w1-to-point":
        result["point"] = args.point
        result["value"] = metrics.w1_to_point(_sample_input(args.a), args.point)
    elif kind == "ks-uniform":
        result["value"] = metrics.ks_distance(_sample_input(args.a),
                                              metrics.uniform_cdf)
    elif kind == "toscani":
        grid = np.array(_parse_floats(args.xi)) if args.xi else None
        result["s"] = args.s
        result["value"] = metrics.toscani_distance(_char_input(args.a),
                                                   _char_input(args.b),
                                                   args.s, grid)
    elif kind == "ecf":
        xi = _parse_floats(args.xi or "1,2,5")
        vals = metrics.empirical_char_fn(_sample_input(args.a), np.array(xi))
        result["xi"] = xi
        result["re"] = [v.real for v in vals]
        result["im"] = [v.imag for v in vals]
    else:
        raise UsageError(f"unknown metric {kind!r}")
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    mu_values = [parse_mu(v) for v in args.mu.split(",") if v.strip()]
    m0_values = _parse_floats(args.m0) if args.m0 else [0.0]
    if not mu_values or not m0_values:
        raise UsageError("sweep needs nonempty --mu and --m0 grids")
    command = args.command
    n = int(_resolve(args, config, "n", 100_000))
    t_end = float(_resolve(args, config, "t_end"))
    eps = float(_resolve(args, config, "eps"))
    seed = int(_resolve(args, config, "seed"))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [(i, mu, m0) for i, (mu, m0) in enumerate(
        (mu, m0) for mu in mu_values for m0 in m0_values)]

    def run_cell(cell):
        i, mu, m0 = cell
        cell_seed = derive_seed(seed, i)
        try:
            if command == "equilibrium":
                sample = eq.sample_equilibrium(float(mu), m0, eps, n, cell_seed)
            elif command == "simulate-mf":
                params = validate_params(float(mu), float(mu))
                init = InitSpec.uniform() if m0 == 0.0 else InitSpec.point(m0)
                sample = mf.simulate_particles(n, t_end, m0, params, init,
                                               cell_seed)[-1][1]
            elif command == "simulate-abm":
                params = validate_params(float(mu), float(mu))
                init = InitSpec.uniform() if m0 == 0.0 else InitSpec.point(m0)
                cfg = abm.AbmConfig(n_agents=n, t_end=t_end, params=params,
                                    seed=cell_seed, init=init)
                sample = abm.simulate_abm(cfg)[-1][1]
            else:
                raise UsageError(f"unknown sweep command {command!r}")
        except OpinionKineticsError as exc:
            return {"index": i, "mu": str(mu), "m0": m0, "status": "error",
                    "error": str(exc)}
        meta = _meta("sweep-cell", command=command, mu=str(mu), m0=m0, n=n,
                     seed=cell_seed, t_end=t_end if command != "equilibrium" else None)
        io.write_samples_csv(out_dir / f"cell_{i:03d}.csv", sample, meta)
        return {"index": i, "mu": str(mu), "m0": m0, "status": "ok",
                "mean": sample.mean(), "variance": sample.variance()}

    rows = parallel_map(run_cell, cells)
    lines = [io.BANNER,
             f"# {json.dumps(_meta('sweep', command=command, n=n, seed=seed), sort_keys=True)}",
             "index,mu,m0,status,mean,variance,error"]
    for r in rows:
        mean_s = repr(r["mean"]) if "mean" in r else ""
        var_s = repr(r["variance"]) if "variance" in r else ""
        err_s = r.get("error", "").replace('"', "'")
        lines.append(f"{r['index']},{r['mu']},{r['m0']!r},{r['status']},"
                     f"{mean_s},{var_s},\"{err_s}\"")
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")
    return 1 if any(r["status"] != "ok" for r in rows) else 0


def _cmd_verify(args) -> int:
    prefixes = [p.strip() for p in args.checks.split(",")] if args.checks else None
    report = verify_mod.run_suite(args.suite, seed=args.seed, check_prefixes=prefixes)
    sys.stdout.write(verify_mod.format_report(report) + "\n")
    if args.out:
        io.write_json(args.out, report)
    return 0 if report["overall_pass"] else 2


# ---------------------------------------------------------------------------
# parser assembly


def _add_params(p: _Parser) -> None:
    p.add_argument("--mu", type=parse_mu, default=None,
                   help="symmetric interaction strength (decimal, p/q, or 1-1/sqrt2)")
    p.add_argument("--mu-plus", type=float, default=None, dest="mu_plus")
    p.add_argument("--mu-minus", type=float, default=None, dest="mu_minus")


def _add_common(p: _Parser, with_snapshots: bool = True) -> None:
    p.add_argument("--config", default=None, help="JSON file with option defaults")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t-end", type=float, default=None, dest="t_end")
    if with_snapshots:
        p.add_argument("--snapshots", default=None,
                       help="comma-separated snapshot times (state after the "
                            "last event at or before each time)")


def build_parser() -> _Parser:
    parser = _Parser(prog="opk", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version",
                        version=f"opinion-kinetics {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate-abm", help="event-driven finite-N simulation")
    _add_params(p)
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="number of agents")
    p.add_argument("--init", default=None, help="uniform | point:X0 | sample:PATH")
    p.add_argument("--scale", choices=("fast", "paper"), default=None)
    p.add_argument("--clock-rate", choices=("n", "n-half"), default=None,
                   dest="clock_rate",
                   help="global event rate: N (matches the mean-field clock) "
                        "or the halved variant N/2")
    p.add_argument("--bins", type=int, default=None,
                   help="write binned density instead of raw samples")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate_abm)

    p = sub.add_parser("simulate-mf", help="mean-field particle simulation")
    _add_params(p)
    _add_common(p)
    p.add_argument("--n", type=int, default=None, help="number of particles")
    p.add_argument("--m0", type=float, default=None,
                   help="initial mean (defaults to the init's mean)")
    p.add_argument("--init", default=None, help="uniform | point:X0 | sample:PATH")
    p.add_argument("--scale", choices=("fast", "paper"), default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate_mf)

    p = sub.add_parser("solve-pde", help="grid RK4 solver for the kinetic equation")
    _add_params(p)
    _add_common(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--dx", type=float, default=None)
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--init", default=None, help="uniform | point:X0 (mollified)")
    p.add_argument("--mollify-width", type=float, default=None, dest="mollify_width")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_solve_pde)

    p = sub.add_parser("solve-spectral", help="spectral ladder solver (symmetric case)")
    p.add_argument("--mu", required=True)
    _add_common(p, with_snapshots=False)
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--xi-top", type=float, default=None, dest="xi_top")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_solve_spectral)

    p = sub.add_parser("equilibrium", help="equilibrium sampler (symmetric case)")
    p.add_argument("--mu", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eps", type=float, default=None,
                   help="deterministic truncation error bound")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bins", type=int, default=None,
                   help="write binned density instead of raw samples")
    p.add_argument("--cdf", action="store_true",
                   help="write the empirical CDF instead of raw samples")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_equilibrium)

    p = sub.add_parser("cantor", help="fractal support construction levels")
    p.add_argument("--mu", required=True,
                   help="strength in (1/2, 1); 'p/q' gives exact endpoints")
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_cantor)

    p = sub.add_parser("metrics", help="distances between stored distributions")
    p.add_argument("metric",
                   choices=("w1", "w2", "w1-to-point", "ks-uniform", "toscani", "ecf"))
    p.add_argument("a", help="sample or density CSV")
    p.add_argument("b", nargs="?", default=None, help="second input where needed")
    p.add_argument("--point", type=float, default=1.0)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--xi", default=None, help="comma-separated xi values")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("sweep", help="grid of runs with per-cell seeds and a summary table")
    p.add_argument("--command", required=True,
                   choices=("equilibrium", "simulate-mf", "simulate-abm"))
    p.add_argument("--mu", required=True, help="comma-separated mu grid")
    p.add_argument("--m0", default=None, help="comma-separated m0 grid (default 0)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t-end", type=float, default=None, dest="t_end")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance-check suite")
    p.add_argument("--suite", choices=tuple(verify_mod.SUITES), default="fast")
    p.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    p.add_argument("--checks", default=None,
                   help="comma-separated check-id prefixes to run (e.g. 08,11)")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 64
    except OpinionKineticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

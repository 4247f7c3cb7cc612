# -*- coding: utf-8 -*-
"""
Command-line entry point:

    python -m voldecomp.runner simulate  --noise gaussian --mrw --n 12000 --out runs/sim
    python -m voldecomp.runner decompose runs/sim/returns.csv --out runs/dec
    python -m voldecomp.runner analyze all --decomposition runs/dec/decomposition.csv --out runs/dec
    python -m voldecomp.runner battery --desk --out runs/battery
    python -m voldecomp.runner report runs/dec runs/other --out runs/table2.csv
"""

import argparse
import logging
import sys
from pathlib import Path

from voldecomp import DataError, UsageError, VoldecompError, __version__, settings
from voldecomp.decomposer import GaConfig, WindowAnchor
from voldecomp.distributions import DEFAULT_GRID, DEFAULT_SIGNIFICANCE, Grid
from voldecomp.fractal import DEFAULT_MONOFRACTAL_EPS, DEFAULT_Q_GRID
from voldecomp.generators import BATTERY_CASES, DEFAULT_HORIZON, DEFAULT_LAMBDA2, DEFAULT_N
from voldecomp.ingest import MarketCsvSchema
from voldecomp.noises import NoiseKind

logger = logging.getLogger("voldecomp.runner")

LOG_FORMAT = "[%(module)s] %(message)s"

# population, generations, n, realizations
DESK_SCALE = {"population": 100, "generations": 100, "n": 4000, "realizations": 10}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin-width", type=float, default=None,
                   help="histogram bin width in standard deviations (default √3/17 on ±59 bins)")
    p.add_argument("--grid-half-width", type=float, default=6.0,
                   help="grid covers ±this many standard deviations when --bin-width is given")
    p.add_argument("--significance", type=float, default=DEFAULT_SIGNIFICANCE, help="KS significance level")


def _add_ga_args(p: argparse.ArgumentParser) -> None:
    defaults = GaConfig()
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--population", type=int, default=defaults.population)
    g.add_argument("--generations", type=int, default=defaults.generations)
    g.add_argument("--crossover-fraction", type=float, default=defaults.crossover_fraction)
    g.add_argument("--mutation-rate", type=float, default=defaults.mutation_rate)
    g.add_argument("--mutation-step", type=float, default=defaults.mutation_step)
    g.add_argument("--init-spread", type=float, default=defaults.init_spread)
    g.add_argument("--gene-bound", type=float, default=defaults.gene_bound)
    g.add_argument("--cost-c", type=float, default=defaults.cost_c)
    g.add_argument("--window", type=int, default=defaults.window)
    g.add_argument("--window-anchor", choices=[a.value for a in WindowAnchor], default=defaults.window_anchor.value)
    g.add_argument("--plateau-generations", type=int, default=defaults.plateau_generations)
    g.add_argument("--plateau-tol", type=float, default=defaults.plateau_tol)
    g.add_argument("--log-every", type=int, default=defaults.log_every)
    g.add_argument("--seed", type=int, default=defaults.seed)
    _add_grid_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m voldecomp.runner",
        description="Decompose return series into local volatility and noise, and measure how Wiener-like both are.",
    )
    parser.add_argument("--version", action="version", version=f"voldecomp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker count (default: ${settings.WORKERS_ENV} or {settings.DEFAULT_WORKERS})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic return series and its ground truth")
    p.add_argument("--noise", choices=[k.value for k in NoiseKind], default=NoiseKind.Gaussian.value)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mrw", action="store_true", help="multiply the noise by a lognormal cascade volatility")
    p.add_argument("--lambda2", type=float, default=DEFAULT_LAMBDA2)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--method", choices=["auto", "circulant", "dense"], default="auto")
    p.add_argument("--s0", type=float, default=None, help="also write a price path starting at this price")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("decompose", help="GA decomposition of a returns file or a market CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--label", default=None)
    p.add_argument("--csv", action="store_true", help="input is a dated market price CSV")
    p.add_argument("--date-column", default="date")
    p.add_argument("--price-column", default="open")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--date-format", default=None, help="strptime pattern (default: ISO dates)")
    p.add_argument("--truth", type=Path, default=None,
                   help="simulate truth.csv; scores the fitted sigma against the known path")
    _add_ga_args(p)

    p = sub.add_parser("analyze", help="deviation, multifractal, autocorrelation and leverage analysis")
    p.add_argument("which", choices=["deviation", "mf", "acf", "leverage", "all"])
    p.add_argument("--decomposition", type=Path, required=True)
    p.add_argument("--report", type=Path, default=None, help="decompose report (supplies the removed mean)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--cost-c", type=float, default=GaConfig().cost_c)
    p.add_argument("--q-grid", type=_float_list, default=DEFAULT_Q_GRID)
    p.add_argument("--t-grid", type=_int_list, default=None)
    p.add_argument("--eps", type=float, default=DEFAULT_MONOFRACTAL_EPS, help="monofractal tolerance on f(q) - qH")
    p.add_argument("--acf-lags", type=int, default=100)
    p.add_argument("--leverage-lags", type=int, default=30)
    p.add_argument("--threshold", type=float, default=1.0, help="conditioning threshold in standard deviations")
    _add_grid_args(p)

    p = sub.add_parser("battery", help="simulated validation battery over the seven noise cases")
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--lambda2", type=float, default=DEFAULT_LAMBDA2)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--cases", type=lambda s: tuple(v.strip() for v in s.split(",") if v.strip()),
                   default=tuple(c.label for c in BATTERY_CASES))
    p.add_argument("--desk", action="store_true",
                   help="desk scale: 10 realizations, n=4000, population 100, generations 100")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--xlsx", action="store_true", help="also write the table as an Excel workbook")
    p.add_argument("--notify", action="store_true", help="post the table to Slack when done")
    _add_ga_args(p)

    p = sub.add_parser("report", help="summary table over decompose run directories")
    p.add_argument("runs", type=Path, nargs="+")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--xlsx", type=Path, default=None)

    return parser


def _grid(args: argparse.Namespace) -> Grid:
    if args.bin_width is None:
        return DEFAULT_GRID
    try:
        return Grid.regular(-args.grid_half_width, args.grid_half_width, args.bin_width)
    except DataError as exc:
        raise UsageError(str(exc)) from None


def _ga_config(args: argparse.Namespace) -> GaConfig:
    return GaConfig(
        population=args.population,
        generations=args.generations,
        crossover_fraction=args.crossover_fraction,
        mutation_rate=args.mutation_rate,
        cost_c=args.cost_c,
        window=args.window,
        seed=args.seed,
        mutation_step=args.mutation_step,
        init_spread=args.init_spread,
        gene_bound=args.gene_bound,
        plateau_generations=args.plateau_generations,
        plateau_tol=args.plateau_tol,
        window_anchor=WindowAnchor(args.window_anchor),
        log_every=args.log_every,
        grid=_grid(args),
        significance=args.significance,
    )


def _run(args: argparse.Namespace) -> None:
    workers = settings.worker_count(args.workers)

    if args.command == "simulate":
        from voldecomp.work_flows.simulate import run_simulate

        run_simulate(
            args.out,
            noise=NoiseKind(args.noise),
            n=args.n,
            seed=args.seed,
            mrw=args.mrw,
            lambda2=args.lambda2,
            horizon=args.horizon,
            method=args.method,
            s0=args.s0,
        )

    elif args.command == "decompose":
        from voldecomp.work_flows.decompose import run_decompose

        schema = None
        if args.csv:
            schema = MarketCsvSchema(
                date_column=args.date_column,
                price_column=args.price_column,
                delimiter=args.delimiter,
                date_format=args.date_format,
            )
        run_decompose(
            args.input,
            args.out,
            _ga_config(args),
            schema=schema,
            label=args.label,
            workers=workers,
            truth_path=args.truth,
        )

    elif args.command == "analyze":
        from voldecomp.work_flows.analyze import run_analyze

        run_analyze(
            args.which,
            args.decomposition,
            args.out,
            report_path=args.report,
            grid=_grid(args),
            c=args.cost_c,
            significance=args.significance,
            q_grid=args.q_grid,
            t_grid=args.t_grid,
            eps=args.eps,
            acf_lags=args.acf_lags,
            leverage_lags=args.leverage_lags,
            threshold=args.threshold,
        )

    elif args.command == "battery":
        from voldecomp.work_flows.battery import BatteryConfig, run_battery

        if args.desk:
            args.population = DESK_SCALE["population"]
            args.generations = DESK_SCALE["generations"]
            args.n = DESK_SCALE["n"]
            args.realizations = DESK_SCALE["realizations"]
        config = BatteryConfig(
            realizations=args.realizations,
            n=args.n,
            lambda2=args.lambda2,
            horizon=args.horizon,
            seed=args.seed,
            cases=args.cases,
            ga=_ga_config(args),
        )
        run_battery(config, args.out, workers=workers, xlsx=args.xlsx, notify=args.notify)

    elif args.command == "report":
        from voldecomp.work_flows.report import run_report

        run_report(args.runs, args.out, xlsx=args.xlsx)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        force=True,
    )
    try:
        _run(args)
    except VoldecompError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

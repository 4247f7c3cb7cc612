"""
Simulated validation battery.

For each case, generate realizations with known noise, measure the intrinsic
deviation of the true noise, decompose with the GA and measure the
reconstructed deviation; average per case into one table.
"""

import dataclasses
import logging
import pprint
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter
from traceback import format_exception_only

import numpy as np
import pandas as pd

from voldecomp import UsageError
from voldecomp.artifacts import RunManifest, write_manifest, write_report, write_table
from voldecomp.decomposer import Decomposition, GaConfig, deviation_metrics, ga_optimize
from voldecomp.generators import (
    BATTERY_CASES,
    DEFAULT_HORIZON,
    DEFAULT_LAMBDA2,
    DEFAULT_N,
    BatteryCase,
    MrwParams,
    gen_mrw,
    gen_noise,
    intrinsic_deviation,
)
from voldecomp.notif import Severity, send_notification_to_slack
from voldecomp.series import ReturnSeries, demean
from voldecomp.to_excel import convert_to_excel

logger = logging.getLogger(__name__)

CASE_SEED_STRIDE = 100_000


@dataclass(frozen=True)
class BatteryConfig:
    realizations: int = 100
    n: int = DEFAULT_N
    lambda2: float = DEFAULT_LAMBDA2
    horizon: int = DEFAULT_HORIZON
    seed: int = 0
    cases: tuple[str, ...] = tuple(case.label for case in BATTERY_CASES)
    ga: GaConfig = field(default_factory=GaConfig)

    def selected_cases(self) -> list[tuple[int, BatteryCase]]:
        known = {case.label: (i, case) for i, case in enumerate(BATTERY_CASES)}
        unknown = [label for label in self.cases if label not in known]
        if unknown:
            raise UsageError(f"unknown battery case(s) {unknown}; known: {list(known)}")
        return [known[label] for label in self.cases]

    def as_dict(self) -> dict:
        return {
            "realizations": self.realizations,
            "n": self.n,
            "lambda2": self.lambda2,
            "horizon": self.horizon,
            "seed": self.seed,
            "cases": list(self.cases),
            "ga": self.ga.as_dict(),
        }


def realization_seed(master: int, case_index: int, index: int) -> int:
    return master + CASE_SEED_STRIDE * case_index + index


def _truth(case: BatteryCase, config: BatteryConfig, seed: int) -> Decomposition:
    if case.mrw:
        params = MrwParams(n=config.n, lambda2=config.lambda2, horizon=config.horizon, noise=case.noise, seed=seed)
        return gen_mrw(params)[1]
    values = gen_noise(case.noise, config.n, seed).values
    return Decomposition(dln_s=values, sigma=np.ones(config.n), dW=values, mu=0.0)


def run_realization(case_index: int, case: BatteryCase, index: int, config: BatteryConfig) -> dict:
    """One sealed unit of work; failures are returned, not raised."""
    seed = realization_seed(config.seed, case_index, index)
    row = {"case": case.label, "index": index, "seed": seed, "error": None}
    try:
        truth = _truth(case, config, seed)
        ga = config.ga
        intrinsic = deviation_metrics(truth, c=ga.cost_c, grid=ga.grid, significance=ga.significance)
        returns = demean(ReturnSeries(values=truth.dln_s))
        _, rebuilt, history = ga_optimize(returns, dataclasses.replace(ga, seed=seed))
    except Exception as exc:
        row["error"] = "".join(format_exception_only(type(exc), exc)).strip()
        return row
    row.update(
        {
            "intrinsic": intrinsic.delta_w,
            "intrinsic_ks_reject": intrinsic.ks_dw.reject,
            "reconstructed": rebuilt.delta_w,
            "reconstructed_ks_reject": rebuilt.ks_dw.reject,
            "delta_dln_sigma": rebuilt.delta_dln_sigma,
            "final_cost": rebuilt.final_cost,
            "generations_run": int(history.size - 1),
        }
    )
    return row


def _majority_label(rejects: pd.Series) -> str:
    return "N" if rejects.sum() * 2 > len(rejects) else "T"


def summarize(rows: list[dict], config: BatteryConfig) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    table = []
    for _, case in config.selected_cases():
        subset = frame[frame["case"] == case.label]
        ok = subset[subset["error"].isna()] if "error" in subset else subset
        entry = {
            "case": case.label,
            "noise": str(case.noise),
            "mrw": case.mrw,
            "analytic_intrinsic_pct": 100 * intrinsic_deviation(case.noise),
            "realizations_ok": len(ok),
            "realizations_failed": len(subset) - len(ok),
        }
        if len(ok):
            entry.update(
                {
                    "intrinsic_pct": 100 * ok["intrinsic"].mean(),
                    "intrinsic_ks": _majority_label(ok["intrinsic_ks_reject"]),
                    "reconstructed_pct": 100 * ok["reconstructed"].mean(),
                    "reconstructed_ks": _majority_label(ok["reconstructed_ks_reject"]),
                }
            )
        table.append(entry)
    return pd.DataFrame(table)


def run_battery(
    config: BatteryConfig,
    out_dir: Path | None = None,
    *,
    workers: int = 1,
    xlsx: bool = False,
    notify: bool = False,
) -> pd.DataFrame:
    started = perf_counter()
    jobs = [
        (case_index, case, index)
        for case_index, case in config.selected_cases()
        for index in range(config.realizations)
    ]
    logger.info(
        "battery: %d case(s) x %d realization(s) of n=%d on %d worker(s)",
        len(config.cases),
        config.realizations,
        config.n,
        workers,
    )

    args = ([j[0] for j in jobs], [j[1] for j in jobs], [j[2] for j in jobs], [config] * len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_realization, *args))
    else:
        rows = list(map(run_realization, *args))

    failures = [row for row in rows if row["error"]]
    for row in failures:
        logger.warning("case %s realization %d (seed %d) failed: %s", row["case"], row["index"], row["seed"], row["error"])
    table = summarize(rows, config)

    print(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"), flush=True)

    if out_dir is not None:
        out_dir = Path(out_dir)
        manifest = RunManifest(command="battery", parameters=config.as_dict(), seeds={"master": config.seed})
        manifest.parameters["workers"] = workers
        payload = {
            "config": config.as_dict(),
            "table": table.to_dict(orient="records"),
            "realizations": rows,
            "failures": failures,
        }
        manifest.add_outputs(write_report(out_dir / "battery.json", payload))
        manifest.add_outputs(write_table(table, out_dir / "battery_table.csv"))
        if xlsx:
            manifest.add_outputs(
                convert_to_excel(table, out_dir / "battery_table.xlsx", "Battery", title="Reconstructed noise deviation by case")
            )
        manifest.timings["total_seconds"] = round(perf_counter() - started, 3)
        write_manifest(out_dir / "manifest.json", manifest)

    if notify:
        severity = Severity.Crit if failures else Severity.Info
        message = (
            f"Battery finished: {len(rows) - len(failures)} / {len(rows)} realizations ok "
            f"in {int(perf_counter() - started)}s\n\n{table.to_string(index=False)}"
        )
        if failures:
            message += "\n\nFailures\n========\n" + pprint.pformat(failures)
        send_notification_to_slack(severity, message)
    return table

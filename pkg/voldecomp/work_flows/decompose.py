"""Run the GA decomposition on a returns file or a market CSV."""

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path
from time import perf_counter

from voldecomp import DataError, NumericalError
from voldecomp.artifacts import (
    RunManifest,
    read_decomposition,
    read_returns,
    write_decomposition,
    write_manifest,
    write_report,
)
from voldecomp.decomposer import SIGMA_RECOVERY_MIN_R, GaConfig, ga_optimize, sigma_recovery
from voldecomp.ingest import MarketCsvSchema, load_csv
from voldecomp.series import demean, log_returns

logger = logging.getLogger(__name__)

DECOMPOSITION_FILE = "decomposition.csv"
REPORT_FILE = "decompose_report.json"


def _score_recovery(sigma, true_sigma) -> dict:
    try:
        r = sigma_recovery(sigma, true_sigma)
    except NumericalError as exc:
        logger.info("sigma recovery not scored: %s", exc)
        return {"pearson_r": None, "min_r": SIGMA_RECOVERY_MIN_R}
    if r < SIGMA_RECOVERY_MIN_R:
        logger.warning("sigma recovery r = %.3f is below the pilot level %.2f", r, SIGMA_RECOVERY_MIN_R)
    else:
        logger.info("sigma recovery r = %.3f", r)
    return {"pearson_r": r, "min_r": SIGMA_RECOVERY_MIN_R}


def run_decompose(
    input_path: Path,
    out_dir: Path,
    config: GaConfig,
    *,
    schema: MarketCsvSchema | None = None,
    label: str | None = None,
    workers: int = 1,
    truth_path: Path | None = None,
) -> dict:
    """With `truth_path` (a simulate truth.csv), the fitted σ is also scored against the known σ."""
    started = perf_counter()
    input_path = Path(input_path)
    out_dir = Path(out_dir)
    label = label or input_path.stem

    source: dict = {"input": input_path.name}
    if schema is not None:
        prices = load_csv(input_path, schema)
        returns = log_returns(prices)
        source.update(
            {
                "schema": schema.as_dict(),
                "skipped_rows": prices.skipped_rows,
                "first_date": str(prices.timestamps[0])[:10],
                "last_date": str(prices.timestamps[-1])[:10],
            }
        )
    else:
        returns = read_returns(input_path)
    returns = demean(returns)
    truth = None if truth_path is None else read_decomposition(truth_path, producer="simulate")
    if truth is not None and len(truth) != len(returns):
        raise DataError(f"{truth_path}: {len(truth)} steps, but the input has {len(returns)}")

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()
    with pool as executor:
        decomposition, report, history = ga_optimize(returns, config, executor=executor)
    fitted = perf_counter()

    payload = {
        "label": label,
        "source": source,
        "n": len(returns),
        "mu": returns.mu,
        "config": config.as_dict(),
        "deviation": report.as_dict(),
        "generations_run": int(history.size - 1),
        "history": history,
    }
    if truth is not None:
        payload["sigma_recovery"] = _score_recovery(decomposition.sigma, truth.sigma)
    manifest = RunManifest(
        command="decompose",
        parameters={
            "config": config.as_dict(),
            "label": label,
            "workers": workers,
            "sigma_recovery_min_r": SIGMA_RECOVERY_MIN_R,
            **source,
        },
        seeds={"ga": config.seed},
    )
    manifest.add_input(input_path)
    if truth_path is not None:
        manifest.add_input(truth_path)
    manifest.add_outputs(write_decomposition(out_dir / DECOMPOSITION_FILE, decomposition))
    manifest.add_outputs(write_report(out_dir / REPORT_FILE, payload))
    manifest.timings = {
        "fit_seconds": round(fitted - started, 3),
        "total_seconds": round(perf_counter() - started, 3),
    }
    write_manifest(out_dir / "manifest.json", manifest)

    dls = report.delta_dln_sigma
    print(
        f"{label}: dW_S deviation {report.delta_w:.2%} (KS {report.ks_dw.label}), "
        f"dln sigma deviation {'degenerate' if dls is None else f'{dls:.2%}'}"
        f"{'' if report.ks_dln_sigma is None else f' (KS {report.ks_dln_sigma.label})'}",
        flush=True,
    )
    return payload

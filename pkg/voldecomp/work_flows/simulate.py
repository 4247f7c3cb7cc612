"""Write a synthetic return series (and its ground truth) for the downstream commands."""

import logging
from pathlib import Path
from time import perf_counter

import numpy as np
import pandas as pd

from voldecomp.artifacts import RunManifest, write_decomposition, write_manifest, write_returns, write_table
from voldecomp.decomposer import Decomposition
from voldecomp.generators import MrwParams, SynthesisMethod, gen_mrw, gen_noise
from voldecomp.noises import NoiseKind
from voldecomp.series import reconstruct_prices

logger = logging.getLogger(__name__)


def run_simulate(
    out_dir: Path,
    *,
    noise: NoiseKind,
    n: int,
    seed: int,
    mrw: bool = False,
    lambda2: float = 0.03,
    horizon: int = 1000,
    method: SynthesisMethod = "auto",
    s0: float | None = None,
) -> RunManifest:
    started = perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    parameters = {"noise": str(noise), "n": n, "mrw": mrw}
    if mrw:
        params = MrwParams(n=n, lambda2=lambda2, horizon=horizon, noise=noise, seed=seed)
        returns, truth = gen_mrw(params, method=method)
        parameters.update({"lambda2": lambda2, "horizon": horizon, "method": method})
    else:
        returns = gen_noise(noise, n, seed)
        truth = Decomposition(dln_s=returns.values, sigma=np.ones(n), dW=returns.values, mu=0.0)

    manifest = RunManifest(command="simulate", parameters=parameters, seeds={"seed": seed})
    manifest.add_outputs(write_returns(out_dir / "returns.csv", returns))
    manifest.add_outputs(write_decomposition(out_dir / "truth.csv", truth))
    if s0 is not None:
        prices = reconstruct_prices(returns, s0)
        frame = pd.DataFrame({"step": np.arange(prices.size), "price": prices})
        manifest.add_outputs(write_table(frame, out_dir / "prices.csv"))
        parameters["s0"] = s0

    manifest.timings["total_seconds"] = round(perf_counter() - started, 3)
    write_manifest(out_dir / "manifest.json", manifest)
    logger.info("simulated %d steps of %s%s into %s", n, noise, " MRW" if mrw else "", out_dir)
    return manifest

"""
Post-decomposition analysis: deviation pdfs, multifractal spectra,
autocorrelations and leverage curves, written as plot-ready files plus
one JSON summary per analysis.
"""

import logging
from pathlib import Path
from time import perf_counter

import numpy as np

from voldecomp import DataError, NumericalError
from voldecomp.artifacts import (
    RunManifest,
    read_decomposition,
    read_report,
    write_curve,
    write_manifest,
    write_pdf,
    write_report,
    write_spectrum,
)
from voldecomp.correlations import Conditioning, abs_autocorr, autocorr, leverage
from voldecomp.decomposer import Decomposition, deviation_metrics
from voldecomp.distributions import (
    DEFAULT_GRID,
    DEFAULT_SIGNIFICANCE,
    Grid,
    estimate_pdf,
    gaussian_reference,
    ks_test,
    standardize,
)
from voldecomp.fractal import DEFAULT_MONOFRACTAL_EPS, DEFAULT_Q_GRID, analyze_scaling

logger = logging.getLogger(__name__)

ANALYSES = ("deviation", "mf", "acf", "leverage")


def load_decomposition(path: Path, report_path: Path | None = None) -> Decomposition:
    mu = None
    if report_path is not None:
        mu = float(read_report(report_path, "decompose")["mu"])
    return read_decomposition(path, mu=mu)


def deviation(d: Decomposition, out_dir: Path, *, grid: Grid = DEFAULT_GRID, c: float = 1.5, significance: float = DEFAULT_SIGNIFICANCE) -> tuple[dict, list[Path]]:
    report = deviation_metrics(d, c=c, grid=grid, significance=significance)
    files = [
        write_pdf(out_dir / "pdf_gaussian.csv", gaussian_reference(grid)),
        write_pdf(out_dir / "pdf_dW.csv", estimate_pdf(standardize(d.dW), grid)),
        write_pdf(out_dir / "pdf_dlnS.csv", estimate_pdf(standardize(d.dln_s), grid)),
    ]
    if not report.dln_sigma_degenerate:
        files.append(write_pdf(out_dir / "pdf_dln_sigma.csv", estimate_pdf(standardize(d.dln_sigma, center=False), grid)))
        files.append(write_pdf(out_dir / "pdf_log_sigma.csv", estimate_pdf(standardize(np.log(d.sigma)), grid)))
    return {"deviation": report.as_dict(), "grid": grid.as_dict()}, files


def _sigma_is_constant(sigma: np.ndarray) -> bool:
    return bool(np.ptp(sigma) <= 1e-12 * float(np.max(sigma)))


def multifractal(
    d: Decomposition,
    out_dir: Path,
    *,
    q_grid=DEFAULT_Q_GRID,
    t_grid=None,
    eps: float = DEFAULT_MONOFRACTAL_EPS,
    significance: float = DEFAULT_SIGNIFICANCE,
) -> tuple[dict, list[Path]]:
    """
    Spectra of the integrated noise and of the integrated returns, plus the
    basis spectrum: σ itself when dW passes the KS test (and σ varies),
    the integrated noise otherwise.
    """
    dw = standardize(d.dW)
    walk = np.cumsum(dw)
    noise_spec = analyze_scaling(walk, q_grid, t_grid, eps)
    returns_spec = analyze_scaling(np.cumsum(d.dln_s - d.mu), q_grid, t_grid, eps)
    files = write_spectrum(out_dir, "mf_dW", noise_spec) + write_spectrum(out_dir, "mf_dlnS", returns_spec)

    passes = not ks_test(dw, significance).reject
    if passes and not _sigma_is_constant(d.sigma):
        basis, basis_spec = "sigma", analyze_scaling(d.sigma, q_grid, t_grid, eps)
        files += write_spectrum(out_dir, "mf_sigma", basis_spec)
    else:
        basis, basis_spec = "dW", noise_spec
    logger.info("multifractal basis: %s (%s)", basis, basis_spec.classification)

    summary = {
        "hurst": noise_spec.hurst,
        "classification": str(noise_spec.classification),
        "basis": basis,
        "spectra": {
            "dW": noise_spec.as_dict(),
            "dlnS": returns_spec.as_dict(),
            "basis": basis_spec.as_dict(),
        },
    }
    return summary, files


def acf(d: Decomposition, out_dir: Path, *, max_lag: int = 100) -> tuple[dict, list[Path]]:
    series = {"dW": d.dW, "dln_sigma": d.dln_sigma, "sigma": d.sigma, "dlnS": d.dln_s}
    summary: dict = {}
    files: list[Path] = []
    for name, values in series.items():
        for kind, fn in (("acf", autocorr), ("abs_acf", abs_autocorr)):
            key = f"{kind}_{name}"
            try:
                curve = fn(values, max_lag)
            except (DataError, NumericalError) as exc:
                summary[key] = {"skipped": str(exc)}
                continue
            files.append(write_curve(out_dir / f"{key}.csv", curve))
            summary[key] = {
                "within_band": curve.fraction_within_band(),
                "confidence_band": curve.confidence_band,
                "values": curve.values,
            }
    return summary, files


def leverage_curves(
    d: Decomposition,
    out_dir: Path,
    *,
    max_lag: int = 30,
    threshold: float = 1.0,
) -> tuple[dict, list[Path]]:
    """dlnS and dW against dln σ in both time directions, for every conditioning."""
    b = d.dln_sigma
    pairs = {"dlnS": d.dln_s[:-1], "dW": d.dW[:-1]}
    summary: dict = {}
    files: list[Path] = []
    for name, a in pairs.items():
        for direction, (x, y) in (("forward", (a, b)), ("reversed", (b, a))):
            for conditioning in Conditioning:
                key = f"leverage_{name}_{direction}_{conditioning}"
                try:
                    curve = leverage(x, y, max_lag, conditioning, threshold)
                except (DataError, NumericalError) as exc:
                    summary[key] = {"skipped": str(exc)}
                    continue
                files.append(write_curve(out_dir / f"{key}.csv", curve))
                summary[key] = {"values": curve.values, "confidence_band": curve.confidence_band}
    return summary, files


def run_analyze(
    which: str,
    decomposition_path: Path,
    out_dir: Path,
    *,
    report_path: Path | None = None,
    grid: Grid = DEFAULT_GRID,
    c: float = 1.5,
    significance: float = DEFAULT_SIGNIFICANCE,
    q_grid=DEFAULT_Q_GRID,
    t_grid=None,
    eps: float = DEFAULT_MONOFRACTAL_EPS,
    acf_lags: int = 100,
    leverage_lags: int = 30,
    threshold: float = 1.0,
) -> dict:
    started = perf_counter()
    out_dir = Path(out_dir)
    d = load_decomposition(decomposition_path, report_path)
    selected = ANALYSES if which == "all" else (which,)

    summary: dict = {"input": Path(decomposition_path).name, "n": len(d)}
    files: list[Path] = []
    for name in selected:
        if name == "deviation":
            part, written = deviation(d, out_dir, grid=grid, c=c, significance=significance)
        elif name == "mf":
            part, written = multifractal(d, out_dir, q_grid=q_grid, t_grid=t_grid, eps=eps, significance=significance)
        elif name == "acf":
            part, written = acf(d, out_dir, max_lag=acf_lags)
        elif name == "leverage":
            part, written = leverage_curves(d, out_dir, max_lag=leverage_lags, threshold=threshold)
        else:
            raise ValueError(f"unknown analysis {name!r}")
        summary.update(part)
        files += written

    if which == "all":
        dev = summary["deviation"]
        summary["headline"] = {
            "delta_w": dev["delta_w"],
            "delta_dln_sigma": dev["delta_dln_sigma"],
            "ks_dw_reject": dev["ks_dw"]["reject"],
            "ks_dln_sigma_reject": None if dev["ks_dln_sigma"] is None else dev["ks_dln_sigma"]["reject"],
            "hurst": summary["hurst"],
            "classification": summary["classification"],
        }

    manifest = RunManifest(
        command=f"analyze {which}",
        parameters={
            "grid": grid.as_dict(),
            "cost_c": c,
            "significance": significance,
            "q_grid": list(q_grid),
            "t_grid": None if t_grid is None else list(t_grid),
            "monofractal_eps": eps,
            "acf_lags": acf_lags,
            "leverage_lags": leverage_lags,
            "threshold": threshold,
        },
    )
    manifest.add_input(decomposition_path)
    if report_path is not None:
        manifest.add_input(report_path)
    manifest.add_outputs(files)
    manifest.add_outputs(write_report(out_dir / f"analysis_{which}.json", summary))
    manifest.timings["total_seconds"] = round(perf_counter() - started, 3)
    write_manifest(out_dir / f"manifest_analyze_{which}.json", manifest)

    if "deviation" in summary:
        dev = summary["deviation"]
        dls = dev["delta_dln_sigma"]
        print(
            f"dW_S deviation {dev['delta_w']:.2%}, "
            f"dln sigma deviation {'degenerate' if dls is None else f'{dls:.2%}'}",
            flush=True,
        )
    if "hurst" in summary:
        print(f"H = {summary['hurst']:.3f} ({summary['classification']}, basis {summary['basis']})", flush=True)
    return summary

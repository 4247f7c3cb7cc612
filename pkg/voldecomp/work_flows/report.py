"""One summary row per decomposed series: deviations, KS labels and the Hurst exponent."""

import logging
from pathlib import Path
from time import perf_counter

import pandas as pd

from voldecomp.artifacts import RunManifest, read_report, write_manifest, write_table
from voldecomp.to_excel import convert_to_excel
from voldecomp.work_flows.decompose import REPORT_FILE

logger = logging.getLogger(__name__)

ANALYSIS_FILE = "analysis_all.json"


def _ks_label(ks: dict | None) -> str | None:
    if ks is None:
        return None
    return "N" if ks["reject"] else "T"


def _pct(value: float | None) -> float | None:
    return None if value is None else 100.0 * value


def collect_row(run_dir: Path) -> dict:
    """A run directory holds a decompose report and, optionally, an `analyze all` summary."""
    run_dir = Path(run_dir)
    decomposed = read_report(run_dir / REPORT_FILE, "decompose")
    dev = decomposed["deviation"]
    row = {
        "label": decomposed["label"],
        "n": decomposed["n"],
        "delta_w_pct": _pct(dev["delta_w"]),
        "ks_dw": _ks_label(dev["ks_dw"]),
        "delta_dln_sigma_pct": _pct(dev["delta_dln_sigma"]),
        "ks_dln_sigma": _ks_label(dev["ks_dln_sigma"]),
        "hurst": None,
        "classification": None,
    }
    analysis_path = run_dir / ANALYSIS_FILE
    if analysis_path.is_file():
        headline = read_report(analysis_path, "analyze all").get("headline", {})
        row["hurst"] = headline.get("hurst")
        row["classification"] = headline.get("classification")
    else:
        logger.info("%s has no %s; Hurst column left blank", run_dir, ANALYSIS_FILE)
    return row


def run_report(run_dirs: list[Path], output: Path, *, xlsx: Path | None = None) -> pd.DataFrame:
    started = perf_counter()
    table = pd.DataFrame([collect_row(d) for d in run_dirs])

    manifest = RunManifest(command="report", parameters={"runs": [Path(d).as_posix() for d in run_dirs]})
    for d in run_dirs:
        manifest.add_input(Path(d) / REPORT_FILE)
    output = Path(output)
    manifest.add_outputs(write_table(table, output))
    if xlsx is not None:
        manifest.add_outputs(convert_to_excel(table, xlsx, "Deviations", title="Wiener deviation of decomposed series"))
    manifest.timings["total_seconds"] = round(perf_counter() - started, 3)
    write_manifest(output.with_name(output.stem + "_manifest.json"), manifest)

    print(table.to_string(index=False, float_format=lambda v: f"{v:.2f}"), flush=True)
    return table

"""
On-disk formats: columnar text files, versioned JSON reports and the run manifest.

Reports are deterministic for identical inputs; wall-clock timings live only
in the manifest so report hashes can be compared across runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from voldecomp import DataError, __version__
from voldecomp.correlations import CorrelationCurve
from voldecomp.decomposer import Decomposition
from voldecomp.distributions import Pdf
from voldecomp.fractal import ScalingSpectrum
from voldecomp.series import ReturnSeries

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAX_EMBEDDED_ARRAY = 10_000
FLOAT_FORMAT = "%.17g"
DECOMPOSITION_COLUMNS = ("step", "dlnS", "sigma", "dW", "dln_sigma")


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def require_file(path: str | Path, producer: str) -> Path:
    """Missing upstream inputs name the command that writes them."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path} not found; create it with `python -m voldecomp.runner {producer}`")
    return path


def write_table(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return path


def write_returns(path: str | Path, returns: ReturnSeries) -> Path:
    frame = pd.DataFrame({"step": np.arange(len(returns)), "dlnS": returns.original})
    return write_table(frame, path)


def read_returns(path: str | Path, producer: str = "simulate") -> ReturnSeries:
    frame = pd.read_csv(require_file(path, producer))
    if "dlnS" not in frame.columns:
        raise DataError(f"{path}: expected a dlnS column, found {list(frame.columns)}")
    values = frame["dlnS"].to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"{path}: non-finite dlnS at step {int(bad[0])}", index=int(bad[0]), line=int(bad[0]) + 2)
    return ReturnSeries(values=values)


def write_decomposition(path: str | Path, d: Decomposition) -> Path:
    dln_sigma = np.append(d.dln_sigma, np.nan)
    frame = pd.DataFrame(
        {
            "step": np.arange(len(d)),
            "dlnS": d.dln_s,
            "sigma": d.sigma,
            "dW": d.dW,
            "dln_sigma": dln_sigma,
        },
        columns=list(DECOMPOSITION_COLUMNS),
    )
    return write_table(frame, path)


def read_decomposition(path: str | Path, *, mu: float | None = None, producer: str = "decompose") -> Decomposition:
    """
    Load a decomposition file. The removed mean is recovered from the rows
    unless given (dlnS - sigma·dW is the same for every step).
    """
    frame = pd.read_csv(require_file(path, producer))
    missing = [c for c in DECOMPOSITION_COLUMNS[1:4] if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    dln_s = frame["dlnS"].to_numpy(dtype=float)
    sigma = frame["sigma"].to_numpy(dtype=float)
    dw = frame["dW"].to_numpy(dtype=float)
    if mu is None:
        mu = float(np.mean(dln_s - sigma * dw))
    return Decomposition(dln_s=dln_s, sigma=sigma, dW=dw, mu=mu)


def write_pdf(path: str | Path, pdf: Pdf) -> Path:
    return write_table(pd.DataFrame({"center": pdf.centers, "density": pdf.densities}), path)


def write_curve(path: str | Path, curve: CorrelationCurve) -> Path:
    frame = pd.DataFrame(
        {
            "lag": curve.lags,
            "value": curve.values,
            "band": curve.lag_bands,
            "n_pairs": curve.n_pairs,
        }
    )
    return write_table(frame, path)


def write_spectrum(directory: str | Path, stem: str, spectrum: ScalingSpectrum) -> list[Path]:
    """Two files: M(q,T) against T (one column per q) and f(q) against q."""
    directory = Path(directory)
    moments = pd.DataFrame({"T": spectrum.t_grid})
    for i, q in enumerate(spectrum.q_grid):
        moments[f"q={q:g}"] = spectrum.moments[i]
    exponents = pd.DataFrame(
        {
            "q": spectrum.q_grid,
            "f": spectrum.f_of_q,
            "K": spectrum.prefactor_k,
            "r2": spectrum.fit_r2,
            "stderr": spectrum.stderr,
        }
    )
    return [
        write_table(moments, directory / f"{stem}_moments.csv"),
        write_table(exponents, directory / f"{stem}_fq.csv"),
    ]


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return value.as_posix()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _spill(value: Any, directory: Path, stem: str, key: str, sidecars: list[Path]) -> Any:
    if isinstance(value, dict):
        return {k: _spill(v, directory, stem, f"{key}.{k}" if key else str(k), sidecars) for k, v in value.items()}
    if isinstance(value, (list, tuple)) and len(value) > MAX_EMBEDDED_ARRAY:
        value = np.asarray(value)
    if isinstance(value, np.ndarray):
        if value.size <= MAX_EMBEDDED_ARRAY:
            return value.tolist()
        sidecar = directory / f"{stem}.{key}.csv"
        write_table(pd.DataFrame({key.rsplit(".", 1)[-1]: value.ravel()}), sidecar)
        sidecars.append(sidecar)
        return {"path": sidecar.name, "sha256": file_sha256(sidecar), "length": int(value.size)}
    if isinstance(value, (list, tuple)):
        return [_spill(v, directory, stem, f"{key}.{i}", sidecars) for i, v in enumerate(value)]
    return value


def write_report(path: str | Path, payload: dict) -> list[Path]:
    """Write a versioned JSON report; returns the report path followed by any sidecar files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sidecars: list[Path] = []
    body = {"schema_version": SCHEMA_VERSION, **_spill(payload, path.parent, path.stem, "", sidecars)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    return [path, *sidecars]


def read_report(path: str | Path, producer: str) -> dict:
    path = require_file(path, producer)
    try:
        body = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a JSON report ({exc})", line=exc.lineno) from exc
    version = body.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DataError(f"{path}: unsupported schema_version {version!r}")
    return body


@dataclass
class RunManifest:
    command: str
    parameters: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    version: str = __version__

    def add_input(self, path: str | Path) -> None:
        path = Path(path)
        self.inputs[path.name] = file_sha256(path)

    def add_outputs(self, paths: list[Path] | Path) -> None:
        for path in [paths] if isinstance(paths, Path) else paths:
            self.outputs[Path(path).name] = file_sha256(path)

    def as_dict(self) -> dict:
        return {
            "toolkit_version": self.version,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "command": self.command,
            "parameters": self.parameters,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "timings": self.timings,
            "outputs": dict(sorted(self.outputs.items())),
        }


def write_manifest(path: str | Path, manifest: RunManifest) -> Path:
    """Written last: every output listed must already exist."""
    path = Path(path)
    write_report(path, manifest.as_dict())
    logger.info("manifest %s lists %d output file(s)", path.name, len(manifest.outputs))
    return path


__all__ = [
    "SCHEMA_VERSION",
    "file_sha256",
    "require_file",
    "write_table",
    "write_returns",
    "read_returns",
    "write_decomposition",
    "read_decomposition",
    "write_pdf",
    "write_curve",
    "write_spectrum",
    "write_report",
    "read_report",
    "RunManifest",
    "write_manifest",
]

import json

import numpy as np
import pandas as pd
import pytest

from voldecomp import DataError
from voldecomp.artifacts import (
    RunManifest,
    file_sha256,
    read_decomposition,
    read_report,
    read_returns,
    write_decomposition,
    write_manifest,
    write_report,
    write_returns,
)
from voldecomp.decomposer import Decomposition
from voldecomp.series import ReturnSeries, demean


def _decomposition(rng, n=50):
    raw = ReturnSeries(rng.normal(0.002, 0.01, size=n))
    returns = demean(raw)
    return Decomposition.from_sigma(returns, np.exp(rng.normal(-4.6, 0.1, size=n)))


def test_decomposition_file_layout(tmp_path, rng):
    d = _decomposition(rng)
    path = write_decomposition(tmp_path / "decomposition.csv", d)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,dlnS,sigma,dW,dln_sigma"
    assert len(lines) == len(d) + 1
    assert lines[-1].endswith(",")

    frame = pd.read_csv(path)
    np.testing.assert_allclose(frame["sigma"].to_numpy(), d.sigma, rtol=1e-15)
    np.testing.assert_allclose(frame["dlnS"].to_numpy(), d.dln_s, rtol=1e-15)


def test_read_decomposition_recovers_the_mean(tmp_path, rng):
    d = _decomposition(rng)
    path = write_decomposition(tmp_path / "decomposition.csv", d)
    loaded = read_decomposition(path)
    assert loaded.mu == pytest.approx(d.mu, abs=1e-15)
    assert read_decomposition(path, mu=d.mu).mu == d.mu


def test_missing_inputs_name_their_producer(tmp_path):
    with pytest.raises(DataError, match="decompose"):
        read_decomposition(tmp_path / "nope.csv")
    with pytest.raises(DataError, match="simulate"):
        read_returns(tmp_path / "nope.csv")
    with pytest.raises(DataError, match="analyze all"):
        read_report(tmp_path / "nope.json", "analyze all")


def test_returns_file(tmp_path):
    path = write_returns(tmp_path / "returns.csv", ReturnSeries([0.1, -0.2, 0.3]))
    np.testing.assert_allclose(read_returns(path).values, [0.1, -0.2, 0.3], rtol=1e-15)
    bad = tmp_path / "bad.csv"
    bad.write_text("step,dlnS\n0,0.1\n1,nan\n")
    with pytest.raises(DataError) as err:
        read_returns(bad)
    assert err.value.index == 1


def test_report_embeds_small_arrays_and_spills_large_ones(tmp_path):
    payload = {"label": "x", "small": np.arange(3.0), "nested": {"big": np.arange(20_000.0)}}
    paths = write_report(tmp_path / "report.json", payload)
    assert [p.name for p in paths] == ["report.json", "report.nested.big.csv"]

    body = read_report(paths[0], "decompose")
    assert body["schema_version"] == 1
    assert body["small"] == [0.0, 1.0, 2.0]
    ref = body["nested"]["big"]
    assert ref["length"] == 20_000
    assert ref["sha256"] == file_sha256(paths[1])
    assert pd.read_csv(paths[1])["big"].iloc[-1] == 19_999.0


def test_reports_are_byte_identical(tmp_path):
    payload = {"b": np.float64(0.1), "a": [1, 2], "c": {"z": True, "y": None}}
    first = write_report(tmp_path / "one" / "r.json", payload)[0]
    second = write_report(tmp_path / "two" / "r.json", payload)[0]
    assert first.read_bytes() == second.read_bytes()


def test_report_schema_version_is_checked(tmp_path):
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"schema_version": 0}))
    with pytest.raises(DataError, match="schema_version"):
        read_report(path, "decompose")
    path.write_text("{not json")
    with pytest.raises(DataError):
        read_report(path, "decompose")


def test_manifest_hashes_outputs(tmp_path):
    out = tmp_path / "a.csv"
    out.write_text("x\n1\n")
    manifest = RunManifest(command="simulate", parameters={"n": 1}, seeds={"noise": 0})
    manifest.add_outputs([out])
    manifest.timings["total_seconds"] = 0.1
    path = write_manifest(tmp_path / "manifest.json", manifest)

    body = read_report(path, "simulate")
    assert body["command"] == "simulate"
    assert body["outputs"] == {"a.csv": file_sha256(out)}
    assert body["seeds"] == {"noise": 0}

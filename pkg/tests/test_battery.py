import pandas as pd
import pytest

from voldecomp import UsageError
from voldecomp.decomposer import GaConfig
from voldecomp.generators import BATTERY_CASES
from voldecomp.work_flows.battery import (
    BatteryConfig,
    realization_seed,
    run_battery,
    run_realization,
    summarize,
)

TINY_GA = GaConfig(population=6, generations=2, window=20, log_every=0)


def test_realization_seeds_are_disjoint_per_case():
    assert realization_seed(7, 0, 3) == 10
    assert realization_seed(7, 2, 3) == 200_010
    seeds = {realization_seed(0, c, i) for c in range(7) for i in range(100)}
    assert len(seeds) == 700


def test_unknown_case_is_a_usage_error():
    with pytest.raises(UsageError):
        BatteryConfig(cases=("i", "viii")).selected_cases()


def test_realization_reports_intrinsic_and_reconstructed_deviation():
    config = BatteryConfig(realizations=1, n=400, horizon=100, ga=TINY_GA)
    row = run_realization(3, BATTERY_CASES[3], 0, config)
    assert row["error"] is None
    assert row["seed"] == realization_seed(0, 3, 0)
    assert 0.0 <= row["intrinsic"] <= 1.0
    assert 0.0 <= row["reconstructed"] <= 1.0
    assert row["generations_run"] == 2


def test_failed_realization_is_recorded_not_raised():
    config = BatteryConfig(realizations=1, n=30, cases=("i",), ga=TINY_GA)
    row = run_realization(0, BATTERY_CASES[0], 0, config)
    assert "DataError" in row["error"]

    table = summarize([row], config)
    assert table["realizations_ok"].tolist() == [0]
    assert table["realizations_failed"].tolist() == [1]


def test_summary_uses_majority_ks_labels():
    config = BatteryConfig(cases=("ii",), ga=TINY_GA)
    rows = [
        {"case": "ii", "error": None, "intrinsic": 0.2, "intrinsic_ks_reject": True,
         "reconstructed": 0.1, "reconstructed_ks_reject": reject}
        for reject in (True, False, False)
    ]
    table = summarize(rows, config)
    entry = table.iloc[0]
    assert entry["intrinsic_pct"] == pytest.approx(20.0)
    assert entry["intrinsic_ks"] == "N"
    assert entry["reconstructed_ks"] == "T"
    assert entry["analytic_intrinsic_pct"] == pytest.approx(19.8, abs=0.2)


def test_battery_is_independent_of_worker_count(tmp_path):
    config = BatteryConfig(realizations=2, n=300, cases=("i", "iii"), ga=TINY_GA)
    serial = run_battery(config)
    parallel = run_battery(config, tmp_path, workers=2)
    pd.testing.assert_frame_equal(serial, parallel)
    assert (tmp_path / "battery.json").is_file()


@pytest.mark.slow
def test_desk_scale_battery_orders_the_noises():
    ga = GaConfig(population=100, generations=100, log_every=0)
    config = BatteryConfig(realizations=10, n=4000, cases=("i", "ii", "iii"), ga=ga)
    table = run_battery(config, workers=4).set_index("case")
    assert table.loc["i", "reconstructed_pct"] <= 3.0
    assert table.loc["ii", "reconstructed_pct"] == pytest.approx(17.8, abs=4.0)
    assert table.loc["ii", "reconstructed_ks"] == "N"
    assert table.loc["ii", "reconstructed_pct"] > table.loc["iii", "reconstructed_pct"] > table.loc["i", "reconstructed_pct"]

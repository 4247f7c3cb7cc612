import pandas as pd

from voldecomp.to_excel import convert_to_excel


def test_table_round_trips_below_the_title(tmp_path):
    table = pd.DataFrame({"case": ["i", "ii"], "reconstructed_pct": [1.2, 17.8]})
    path = convert_to_excel(table, tmp_path / "out" / "table.xlsx", "Battery", title="Deviation by case")
    assert path.is_file()

    raw = pd.read_excel(path, sheet_name="Battery", header=None)
    assert raw.iloc[0, 0] == "Deviation by case"
    loaded = pd.read_excel(path, sheet_name="Battery", skiprows=2)
    pd.testing.assert_frame_equal(loaded, table)


def test_untitled_table_starts_at_the_header(tmp_path):
    table = pd.DataFrame({"label": ["spx"], "hurst": [0.55]})
    path = convert_to_excel(table, tmp_path / "t.xlsx", "Deviations")
    pd.testing.assert_frame_equal(pd.read_excel(path, sheet_name="Deviations"), table)

import json

import pytest

from teichscan.artifacts import (
    dumps,
    load_json,
    load_scan_csv,
    load_surface,
    scan_svg,
    store_json,
    store_scan_csv,
    store_surface,
)
from teichscan.curves import torus_curve
from teichscan.errors import SchemaError
from teichscan.experiments import CSV_HEADER, scan
from teichscan.surface import validate


@pytest.fixture
def torus_scan(unit_torus):
    return scan(unit_torus, torus_curve(unit_torus, 1, 1), [-0.5, 0.0, 0.5])


def test_surface_round_trip(tmp_path, slit_tori):
    path = tmp_path / "slit.json"
    store_surface(slit_tori, path)

    again = load_surface(path)
    assert validate(again).ok
    assert again.triangles == slit_tori.triangles
    assert not list(tmp_path.glob(".slit.json.*"))


def test_unknown_schema(tmp_path):
    with pytest.raises(SchemaError):
        dumps({"schema": "teichscan-other/1"})

    path = tmp_path / "other.json"
    path.write_text(json.dumps({"schema": "teichscan-other/1"}))
    with pytest.raises(SchemaError):
        load_json(path)


def test_wrong_schema(tmp_path, unit_torus):
    path = tmp_path / "t.json"
    store_surface(unit_torus, path)
    with pytest.raises(SchemaError):
        load_json(path, "teichscan-curve/1")


def test_not_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(SchemaError):
        load_json(path)


def test_non_finite_values_are_written_as_text(tmp_path, torus_scan):
    payload = torus_scan.to_dict()
    payload["rows"][0]["ext_lb"] = float("nan")
    path = tmp_path / "scan.json"
    store_json(payload, path)

    assert load_json(path, "teichscan-scan/1")["rows"][0]["ext_lb"] == "nan"


def test_scan_csv(tmp_path, torus_scan):
    path = tmp_path / "scan.csv"
    store_scan_csv(torus_scan, path)

    assert path.read_text().splitlines()[0] == "# schema: teichscan-scan/1"
    rows = load_scan_csv(path)
    assert len(rows) == 3
    assert tuple(rows[0]) == CSV_HEADER
    assert [float(row["t"]) for row in rows] == [-0.5, 0.0, 0.5]
    assert float(rows[1]["ext"]) == pytest.approx(torus_scan.rows[1].ext)


def test_scan_csv_needs_schema_line(tmp_path):
    path = tmp_path / "scan.csv"
    path.write_text(",".join(CSV_HEADER) + "\n")
    with pytest.raises(SchemaError):
        load_scan_csv(path)


def test_scan_svg(torus_scan):
    svg = scan_svg(torus_scan, title="torus")
    assert "<svg" in svg
    assert svg == scan_svg(torus_scan, title="torus")

import json

import pytest

from teichscan.artifacts import load_scan_csv, load_surface
from teichscan.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main


@pytest.fixture
def torus_file(tmp_path):
    path = tmp_path / "t.json"
    assert main(["build", "torus", "--w", "1", "--h", "1", "-o", str(path)]) == EXIT_OK
    return path


def test_build_and_validate(torus_file, capsys):
    assert load_surface(torus_file).num_triangles() == 2

    assert main(["validate", str(torus_file)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_validate_broken_surface(tmp_path, torus_file):
    surface = load_surface(torus_file)
    payload = surface.to_dict()
    payload["triangles"][0][0] = {"h": 1.5, "v": 0.0}
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(payload))

    assert main(["validate", str(path)]) == EXIT_FAILED


def test_estimate(torus_file, capsys):
    assert main(["estimate", "--surface", str(torus_file), "--curve", "torus:1,0", "--kind", "ext"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == "teichscan-estimate/1"
    assert payload["total"] == pytest.approx(0.5)
    assert payload["class"]["direction"] == "horizontal"
    assert payload["class"]["case"] == 1


def test_decompose(torus_file, capsys):
    assert main(["decompose", "--surface", str(torus_file)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == "teichscan-thickthin/1"
    assert payload["shorts"] == []


def test_scan_csv(tmp_path, torus_file):
    out = tmp_path / "scan.csv"
    argv = ["scan", "--surface", str(torus_file), "--curve", "torus:1,1", "--jobs", "1"]
    argv += ["--t-min", "-0.5", "--t-max", "0.5", "--t-step", "0.5", "--format", "csv", "-o", str(out)]

    assert main(argv) == EXIT_OK
    assert len(load_scan_csv(out)) == 3


def test_quasiconvexity(torus_file, capsys):
    argv = ["quasiconvexity", "--surface", str(torus_file), "--curve", "torus:1,0", "--jobs", "1"]
    argv += ["--t-min", "-0.5", "--t-max", "0.5", "--t-step", "0.5"]

    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["K_ext"] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "argv, status",
    [
        (["decompose", "--surface", "{torus}", "--m0", "2"], EXIT_CONFIG),
        (["build", "torus", "--w", "1"], EXIT_CONFIG),
        (["estimate", "--surface", "{torus}", "--curve", "torus:x"], EXIT_CONFIG),
        (["scan", "--surface", "{torus}", "--curve", "torus:1,0", "--t-min", "1", "--t-max", "0"], EXIT_CONFIG),
        (["frobnicate"], EXIT_CONFIG),
        (["build", "slit-tori", "--a", "0.7"], EXIT_FAILED),
    ],
)
def test_bad_arguments(torus_file, argv, status):
    argv = [arg.replace("{torus}", str(torus_file)) for arg in argv]
    assert main(argv) == status


def test_unknown_artifact(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"schema": "teichscan-other/1"}))
    assert main(["validate", str(path)]) == EXIT_CONFIG


def test_budget(torus_file, monkeypatch):
    monkeypatch.setenv("TEICHSCAN_BUDGET", "1")
    assert main(["decompose", "--surface", str(torus_file)]) == EXIT_BUDGET


@pytest.fixture
def slit_file(tmp_path):
    path = tmp_path / "slit.json"
    assert main(["build", "slit-tori", "--a", "0.1", "-o", str(path)]) == EXIT_OK
    return path


def test_decompose_json(slit_file, capsys):
    assert main(["decompose", "--surface", str(slit_file), "--m0", "5", "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)

    assert payload["m0"] == 5.0
    assert len(payload["shorts"]) == 2
    for annulus in payload["shorts"]:
        assert {"e", "f", "g", "d", "mod_E", "mod_F", "mod_G", "ext_estimate", "cylinder"} <= set(annulus)
        assert annulus["f"] / annulus["length"] == pytest.approx(100.0)


def test_example_prints_series_and_report(capsys):
    argv = ["example", "slit-tori", "--a", "0.1", "--t-min", "0", "--t-max", "0.2", "--t-step", "0.1", "--jobs", "1"]
    assert main(argv) == EXIT_OK

    out = capsys.readouterr().out
    table, _, report = out.partition("\n{")
    lines = table.splitlines()
    assert lines[0].startswith("# schema:")
    assert len(lines) == 2 + 3

    payload = json.loads("{" + report)
    assert payload["schema"] == "teichscan-quasiconvexity/1"
    assert payload["a"] == 0.1

import json

import pytest

from vanet_safety.cli import main
from vanet_safety.config import RATE_TABLE, parse_config, read_config, scenario_snapshot
from vanet_safety.errors import ParseError, ValidationError
from vanet_safety.results import (CSV_COLUMNS, RunManifest, emit_results, load_results_csv,
                                  load_results_json)
from vanet_safety.safety import ChainScenario, SweepResult, SweepRow


@pytest.fixture
def cfg(tmp_path):
    def write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_empty_config_gives_highway_defaults(cfg):
    sc = parse_config(cfg(""))
    assert (sc.n, sc.spacing, sc.v0, sc.obstructions) == (25, 25.0, 20.0, 4)
    assert sc.packet_bits == 2000 and sc.rate == 6e6
    assert sc.beta == pytest.approx(6.309573444801933)
    assert sc == ChainScenario()


def test_beta_db(cfg):
    assert parse_config(cfg("beta_db = 8\n")).beta == pytest.approx(6.3096, abs=1e-4)
    assert parse_config(cfg("beta = 2.5\n")).beta == 2.5
    assert parse_config(cfg("rate_mbps = 12\n")).beta == pytest.approx(10 ** 1.5)


def test_comments_and_types(cfg):
    vals = read_config(cfg("# header\nn = 10   # ten cars\n\nscheme = CS\nr_cs = auto\napprox_async = yes\n"))
    assert vals == {"n": 10, "scheme": "cs", "r_cs": None, "approx_async": True}


def test_unknown_key_named(cfg):
    with pytest.raises(ParseError) as exc:
        parse_config(cfg("n = 25\nvelocty = 20\n"))
    assert exc.value.key == "velocty" and exc.value.line == 2
    assert "velocty" in str(exc.value)


@pytest.mark.parametrize("text", ["n 25\n", "n = 25\nn = 20\n", "n = 2.5\n", "fading = rician\n",
                                  "beta = 2\nbeta_db = 3\n"])
def test_parse_errors(cfg, text):
    with pytest.raises(ParseError):
        parse_config(cfg(text))


@pytest.mark.parametrize("text", ["obstructions = 25\n", "access = 1.2\n", "fading = none\n",
                                  "rate_mbps = 5\n", "fading = rayleigh\nm = 3\n", "decel_min = 10\n"])
def test_validation_errors(cfg, text):
    with pytest.raises(ValidationError):
        parse_config(cfg(text))


def test_rate_table():
    assert RATE_TABLE == {3: 5, 4.5: 6, 6: 8, 9: 11, 12: 15, 18: 20, 24: 25}


def test_cli_radius(capsys):
    assert main(["radius", "--r", "25", "--beta-db", "8", "--alpha", "2", "--fading", "none"]) == 0
    assert capsys.readouterr().out.strip() == "r_I = 62.80 m"


def test_cli_ps_zero_access(cfg, capsys):
    assert main(["ps", "--config", cfg("access = 0\n")]) == 0
    out = capsys.readouterr().out
    assert float(out.split("=")[1]) == 1.0


def test_cli_ps_interferer(capsys):
    assert main(["ps", "--r", "25", "--interferer", "50:0.1", "--slot-mode", "sync"]) == 0
    value = float(capsys.readouterr().out.split("=")[1])
    assert value == pytest.approx(1 - 0.1 + 0.1 / (1 + 10 ** 0.8 * 0.25), abs=1e-6)


def test_cli_ps_cs_and_mc(capsys):
    assert main(["ps", "--scheme", "cs", "--p", "0.05", "--rx", "2"]) == 0
    assert 0 < float(capsys.readouterr().out.split("=")[1]) < 1
    assert main(["ps", "--fading", "nakagami", "--m", "2", "--samples", "2000", "--seed", "1"]) == 0
    assert "+/-" in capsys.readouterr().out


def test_cli_usage_errors(cfg, capsys):
    assert main(["ps", "--interferer", "oops"]) == 1
    assert main(["ps", "--config", cfg("velocty = 1\n")]) == 1
    assert main(["sim", "--fading", "none", "--trials", "5"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["radius", "--nope"])
    assert exc.value.code == 1


def test_cli_sim(capsys):
    assert main(["sim", "--trials", "40", "--seed", "3", "--p", "0.05"]) == 0
    assert capsys.readouterr().out.startswith("mean_collision_prob = ")


def test_cli_validate(capsys, monkeypatch):
    assert main(["validate"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    import vanet_safety.validation as v
    monkeypatch.setattr(v, "run_all", lambda: [("forced", False, "injected")])
    assert main(["validate"]) == 2


SWEEP = ["sweep", "--seed", "1", "--trials", "60", "--grid", "0.02,0.1"]


def test_sweep_bytes_stable(capsys):
    main(SWEEP)
    first = capsys.readouterr().out
    main(SWEEP)
    assert capsys.readouterr().out == first
    main(SWEEP + ["--workers", "3"])
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(first.splitlines()) == 5


def _one_row():
    return SweepResult([SweepRow(0.05, "independent", 1, 0.25, 0.002, 100)])


def _manifest():
    return RunManifest(config=scenario_snapshot(ChainScenario()), seed=1, trials=100, p_grid=[0.05])


def test_csv_golden():
    text = emit_results(_one_row(), _manifest(), "csv")
    assert text == "p,scheme,fading_m,mean_collision_prob,ci_halfwidth,trials\n" \
                   "0.05,independent,1,0.25,0.002,100\n"
    assert load_results_csv(text).rows == _one_row().rows


def test_json_round_trip():
    text = emit_results(_one_row(), _manifest(), "json")
    doc = json.loads(text)
    assert set(doc) == {"manifest", "rows"}
    result, manifest = load_results_json(text)
    assert result == _one_row()
    assert manifest == _manifest()
    assert "collision_count" in manifest.conventions


def test_csv_file_gets_manifest(tmp_path):
    out = tmp_path / "fig.csv"
    emit_results(_one_row(), _manifest(), "csv", out)
    side = json.loads((tmp_path / "fig.csv.manifest.json").read_text())
    assert side["seed"] == 1 and side["timestamp"] is None


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_results(SweepResult([]), _manifest())
    with pytest.raises(OSError):
        emit_results(_one_row(), _manifest(), "csv", tmp_path / "missing" / "x.csv")

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from spinflow.cli import EXIT_CONFIG, EXIT_NAN, EXIT_OK, LOCK_NAME, ConfigError, main, parse_config
from spinflow.energy import CaseId
from spinflow.field_grid import load_snapshot
from spinflow.poisson import BracketTable, master_table

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """
[run]
case = DEGENERATE_SU_N
spin = 1
steps = 30
report_every = 5
snapshot_every = 10

[grid]
shape = 12, 8
spacing = 0.5

[constants]
J = 0.7
Jbar = 1.3
A = 0.4
B = 0.9

[initial]
kind = random_smooth
seed = 7
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_parse_config_resolves_defaults():
    cfg = parse_config(SMALL)
    assert cfg.case == CaseId.DEGENERATE_SU_N
    assert cfg.dim == 3 and cfg.grid == (12, 8) and cfg.spacing == (0.5, 0.5)
    assert cfg.dt is None
    assert cfg.echo()["dt"] == "auto"


def test_overrides_apply():
    cfg = parse_config(SMALL, {"run.steps": "4", "constants.J": "2.5"})
    assert cfg.steps == 4 and cfg.J == 2.5


@pytest.mark.parametrize("bad", [
    SMALL.replace("DEGENERATE_SU_N", "NO_SUCH_CASE"),
    SMALL.replace("steps = 30", "steps = many"),
    SMALL.replace("[initial]", "[initial]\ncolour = blue"),
    SMALL + "\n[extras]\nx = 1\n",
    SMALL.replace("spacing = 0.5", "spacing = -0.5"),
    SMALL.replace("shape = 12, 8", "shape = 2, 8"),
    SMALL.replace("Jbar = 1.3", "Jbar = 0"),
    "this is not an ini file",
])
def test_invalid_configs_raise(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_unknown_case_message_lists_valid_cases(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("DEGENERATE_SU_N", "NO_SUCH_CASE"))
    assert main(["run", str(cfg), "--output", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "LL_HEISENBERG" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_run_writes_outputs(tmp_path):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output", str(out)]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"] == "completed" and man["steps_done"] == 30
    rows = read_csv(out / "conservation.csv")
    assert rows[0] == man["csv_columns"]
    assert [int(r[0]) for r in rows[1:]] == [0, 5, 10, 15, 20, 25, 30]
    assert sorted(p.name for p in out.glob("snap_*.bin")) == [f"snap_{n:08d}.bin" for n in (0, 10, 20, 30)]
    header, fields = load_snapshot(out / "final.bin")
    assert header["step"] == 30 and set(fields) == {"g", "a"}
    assert not (out / LOCK_NAME).exists()
    assert float(rows[-1][rows[0].index("energy_drift")]) < 1e-8


def test_identical_runs_are_bit_identical(tmp_path):
    cfg = write(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--output", str(a)]) == EXIT_OK
    assert main(["run", str(cfg), "--output", str(b)]) == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        if n != "manifest.json":
            assert (a / n).read_bytes() == (b / n).read_bytes(), n
    # the manifest echoes the output directory, which is the only intended difference
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    ma["config"].pop("output"), mb["config"].pop("output")
    assert ma == mb


def test_different_seed_changes_output(tmp_path):
    cfg = write(tmp_path, SMALL)
    main(["run", str(cfg), "--output", str(tmp_path / "a")])
    main(["run", str(cfg), "--output", str(tmp_path / "b"), "--set", "initial.seed=8"])
    assert (tmp_path / "a" / "conservation.csv").read_bytes() != (tmp_path / "b" / "conservation.csv").read_bytes()


def test_uniform_config_has_zero_drift(tmp_path):
    out = tmp_path / "u"
    assert main(["run", str(CONFIGS / "uniform_su3.ini"), "--output", str(out)]) == EXIT_OK
    rows = read_csv(out / "conservation.csv")
    cols = rows[0]
    assert float(rows[-1][cols.index("energy_drift")]) == 0.0
    assert rows[1][2:] == rows[-1][2:]


def test_blow_up_exits_with_code_two(tmp_path):
    cfg = write(tmp_path, SMALL.replace("[run]", "[run]\ndt = 50"))
    out = tmp_path / "nan"
    assert main(["run", str(cfg), "--output", str(out)]) == EXIT_NAN
    man = json.loads((out / "manifest.json").read_text())
    assert man["status"].startswith("aborted")
    _, fields = load_snapshot(out / "abort.bin")
    assert all(np.all(np.isfinite(v)) for v in fields.values())
    assert not (out / "final.bin").exists()


def test_locked_output_is_refused(tmp_path):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "busy"
    out.mkdir()
    (out / LOCK_NAME).write_text("123")
    assert main(["run", str(cfg), "--output", str(out)]) == EXIT_CONFIG
    assert not (out / "conservation.csv").exists()


def test_bad_set_syntax(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["run", str(cfg), "--set", "run.steps"]) == EXIT_CONFIG


def test_spin_wave_config_matches_linear_frequency(tmp_path):
    out = tmp_path / "sw"
    assert main(["run", str(CONFIGS / "ll_spinwave.ini"), "--output", str(out)]) == EXIT_OK
    disp = json.loads((out / "dispersion.json").read_text())
    assert not disp["degenerate"]
    assert disp["relative_error"] < 0.01


def test_export_tables_round_trip(tmp_path, capsys):
    assert main(["export-tables", str(tmp_path)]) == EXIT_OK
    t = BracketTable.load(tmp_path / "master_dim3.json")
    np.testing.assert_array_equal(t.constants, master_table(3).constants)
    report = json.loads((tmp_path / "printed_report.json").read_text())
    flagged = {(r["group"], r["name"]) for r in report if r["status"] != "match"}
    assert len(flagged) == 3
    assert len(list(tmp_path.glob("chart_*.json"))) > 10


def test_verify_unknown_suite(capsys):
    assert main(["verify", "nonsense"]) == EXIT_CONFIG
    assert "algebra" in capsys.readouterr().err


def test_verify_suite_writes_report(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert main(["verify", "algebra", "--report", str(rep)]) == EXIT_OK
    data = json.loads(rep.read_text())
    assert data["passed"] and data["n_failed"] == 0

import csv
import os

import pytest

import netchemo
from netchemo.cli import main

CHEAP = """
[graph]
vertex v1
vertex v2
vertex v3
vertex v4
edge e1 v1 v4 length=1
edge e2 v4 v2 length=1
edge e3 v4 v3 length=1
[params]
* alpha=1 beta=0.1 gamma=1 delta=1 chi=1
[initial]
* u="4" c="0"
e3 u="4" c="1-cos(pi*x)"
[discretization]
h=0.25 tau=0.125 t_end=1
"""


@pytest.fixture()
def cheap_scenario(tmp_path):
    path = tmp_path / "cheap.scn"
    path.write_text(CHEAP)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_writes_csv_and_figures(cheap_scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", cheap_scenario, "--out", str(out)]) == 0

    snaps = read_csv(out / "snapshots.csv")
    assert snaps[0] == ["time", "edge", "x", "u", "c"]
    # 9 snapshots (stride ceil(8/10)=1), 3 edges, 5 nodes per edge
    assert len(snaps) - 1 == 9 * 3 * 5
    times = sorted({float(r[0]) for r in snaps[1:]})
    assert times[0] == 0.0 and times[-1] == 1.0

    diags = read_csv(out / "diagnostics.csv")
    assert diags[0][0] == "time" and len(diags) - 1 == 9
    assert float(diags[1][1]) == pytest.approx(12.0)  # mass_u

    for name in ("u_profiles.png", "c_profiles.png", "diagnostics.png"):
        assert (out / name).stat().st_size > 0


def test_simulate_no_figures(cheap_scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", cheap_scenario, "--out", str(out), "--no-figures"]) == 0
    assert (out / "snapshots.csv").exists()
    assert not (out / "u_profiles.png").exists()


def test_converge_writes_tables_and_figure(cheap_scenario, tmp_path, capsys):
    out = tmp_path / "conv"
    assert main(["converge", cheap_scenario, "--levels", "2", "--out", str(out)]) == 0
    for component in ("u", "c"):
        rows = read_csv(out / f"convergence_{component}.csv")
        assert rows[0] == ["h", "tau", "err_linf_l2", "eoc", "err_l2_h1", "eoc"]
        assert len(rows) - 1 == 2
        assert rows[1][3] == "" and rows[2][3] != ""  # first row has no eoc
        assert float(rows[1][0]) == 0.25  # coarse level of the first pair
    assert (out / "convergence.png").stat().st_size > 0
    printed = capsys.readouterr().out
    assert "errors between successive refinement levels" in printed


def test_converge_rejects_too_few_levels(cheap_scenario, tmp_path):
    assert main(["converge", cheap_scenario, "--levels", "1", "--out", str(tmp_path)]) == 1


def test_check_passes_on_sound_scenario(cheap_scenario, capsys):
    assert main(["check", cheap_scenario]) == 0
    printed = capsys.readouterr().out
    assert "PASS" in printed and "FAIL" not in printed


def test_check_fails_on_negative_data(tmp_path, capsys):
    path = tmp_path / "bad.scn"
    path.write_text(CHEAP.replace('u="4"', 'u="0-4"'))
    with pytest.warns(UserWarning):
        assert main(["check", str(path)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_simulate_exit_codes_on_bad_input(tmp_path):
    assert main(["simulate", str(tmp_path / "missing.scn"), "--out", str(tmp_path)]) == 1
    broken = tmp_path / "broken.scn"
    broken.write_text("[nosuch]\n")
    assert main(["simulate", str(broken), "--out", str(tmp_path)]) == 1


def test_bundled_scenarios_are_reachable():
    for name in ("tripod", "block"):
        assert os.path.exists(netchemo.bundled_scenario(name))

import json
import subprocess
import sys

import pytest

from latbal.analyzer import load_assignment_json
from latbal.cli import cmd_final, cmd_synchro, default_report_path, main
from latbal.fixtures import build_fig2
from latbal.netlist import DelayAssignment, dump_netlist
from latbal.simulator import FinalTestFailed

from .test_analyzer import PKG_GOLDEN


@pytest.fixture
def report_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("LATBAL_REPORT_DIR", str(tmp_path))
    return tmp_path


def test_latreadgen_invocation(tmp_path, capsys):
    rep = tmp_path / "latrep.txt"
    rep.write_text("TOP:EQ1 0 -1\nTOP:EQ1 1 -1\nTOP:EQ1 end\n"
                   "TOP:EQ1 0 10\nTOP:EQ1 1 6\nTOP:EQ1 end\n"
                   "TOP:EQ1 0 11\nTOP:EQ1 1 7\nTOP:EQ1 end\n")
    pkg = tmp_path / "lateq_read_pkg.vhd"
    assert main(["latreadgen", str(rep), str(pkg), "ex1_trees_pkg", "ex1_trees"]) == 0
    assert pkg.read_text() == PKG_GOLDEN
    assert capsys.readouterr().out == "TOP:EQ1: [4,0]\n"


def test_latreadgen_errors(tmp_path, capsys):
    rep = tmp_path / "latrep.txt"
    pkg = tmp_path / "p.vhd"
    rep.write_text("EQ 0 -1\nEQ 1 3\nEQ end\n")
    assert main(["latreadgen", str(rep), str(pkg), "p", "f"]) == 1
    assert "NoValidSamples" in capsys.readouterr().err
    rep.write_text("EQ 0 5\nEQ 1 5\nEQ end\nEQ 0 6\nEQ 1 7\nEQ end\n")
    assert main(["latreadgen", str(rep), str(pkg), "p", "f"]) == 1
    rep.write_text("EQ 0 5\n")
    assert main(["latreadgen", str(rep), str(pkg), "p", "f"]) == 2
    assert main(["latreadgen", str(tmp_path / "missing"), str(pkg), "p", "f"]) == 2
    assert main(["latreadgen", "--initial", str(rep), str(pkg), "1p", "f"]) == 2


def test_initial(tmp_path, capsys):
    pkg, js = tmp_path / "p.vhd", tmp_path / "d.json"
    assert main(["initial", "--fig2", "--package", str(pkg), "--json", str(js)]) == 0
    assert json.loads(js.read_text()) == {"EQ": [0, 0]}
    assert "return 0;" in pkg.read_text() and " if " not in pkg.read_text()
    assert capsys.readouterr().out == "EQ: [0,0]\n"


def test_synchro_then_final(tmp_path, report_dir, capsys):
    js = tmp_path / "d.json"
    assert main(["synchro", "--fig2", "--json", str(js), "--oracle"]) == 0
    out = capsys.readouterr().out
    assert out == "EQ: [0,4]\noracle: agrees\n"
    assert (report_dir / "latrep.txt").exists()
    assert main(["final", "--fig2", "--delays", str(js)]) == 0
    # a second pass from the balanced state adds nothing
    js2 = tmp_path / "d2.json"
    assert main(["synchro", "--fig2", "--delays", str(js), "--json", str(js2)]) == 0
    assert load_assignment_json(js2) == load_assignment_json(js)
    assert "EQ: [0,0]" in capsys.readouterr().out


def test_explicit_report_path_wins(tmp_path, report_dir):
    rep = tmp_path / "sub.txt"
    cmd_synchro(build_fig2(), 20, report_path=rep)
    assert rep.exists() and not (report_dir / "latrep.txt").exists()
    assert default_report_path() == report_dir / "latrep.txt"


def test_final_unbalanced_exit(capsys):
    assert main(["final", "--fig2"]) == 1
    assert "EQ inequal latencies: out0=-1, out1=0" in capsys.readouterr().err


def test_final_api_raises():
    with pytest.raises(FinalTestFailed):
        cmd_final(build_fig2(), None, 20)
    assert cmd_final(build_fig2(), DelayAssignment({("EQ", 1): 4}), 20).cycles_run == 20


def test_netlist_file(tmp_path, report_dir, capsys):
    path = tmp_path / "n.json"
    assert main(["fixture", "--fig2", "-o", str(path)]) == 0
    dump_netlist(build_fig2(long_path_first=False), path)
    assert main(["synchro", "--netlist", str(path)]) == 0
    assert capsys.readouterr().out.endswith("EQ: [4,0]\n")
    path.write_text("{}")
    assert main(["synchro", "--netlist", str(path)]) == 2


def test_window_too_small(report_dir):
    assert main(["synchro", "--fig2", "--cycles", "40", "--window", "64"]) == 2


def test_table1_cases(tmp_path, report_dir, capsys):
    js = tmp_path / "t.json"
    assert main(["synchro", "--cases", "1,5", "--json", str(js)]) == 0
    assert json.loads(js.read_text()) == {
        "case1": {"EQ1": [4, 0], "EQ2": [4, 1, 0]},
        "case5": {"EQ1": [6, 0], "EQ2": [6, 1, 0]},
    }


def test_lateqgen(tmp_path, capsys):
    out = tmp_path / "lceq1.vhd"
    assert main(["lateqgen", "lceq1", str(out), "T_VOLTAGE", "T_VOLTAGE", "T_WIDTH", "T_POSITION"]) == 0
    assert "entity lceq1 is" in out.read_text()
    assert main(["lateqgen", "lceq1", str(out), "T_VOLTAGE", "VOLTAGE"]) == 2


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "latbal.cli", "final", "--fig2"],
                       capture_output=True, text=True)
    assert r.returncode == 1
    assert "inequal latencies" in r.stderr

import json
import subprocess
import sys

import pytest

from transinv import io
from transinv.cli import main

EX1_CSV = "hypothesis,T1,T2,T3\nh1,0.01,0.01,0.49\nh2,0.01,0.49,0.49\nh3,0.49,0.49,0.49\n"


def run(tmp_path, command, kind, cfg, *extra, name="cfg.txt"):
    (tmp_path / name).write_text(cfg)
    argv = [command] + ([kind] if kind else []) + ["--config", str(tmp_path / name),
                                                   "--out", str(tmp_path / "out")] + list(extra)
    return main(argv)


def report(tmp_path, name="report.txt"):
    return io.parse_report((tmp_path / "out" / name).read_text())


@pytest.fixture
def ex1(tmp_path):
    (tmp_path / "ex1.csv").write_text(EX1_CSV)
    return tmp_path


def test_game_minmax_example1(ex1):
    assert run(ex1, "game", "minmax", "[game]\nmatrix = ex1.csv\n") == 0
    r = report(ex1)
    assert r["selected"] == "h1" and float(r["value"]) == 0.49


def test_game_coverage_example1(ex1):
    assert run(ex1, "game", "coverage", "[game]\nmatrix = ex1.csv\neps = 0.05\n") == 0
    r = report(ex1)
    assert r["selected"] == "h1" and r["count"] == "2"


def test_game_mw_erm_single_transform(tmp_path):
    (tmp_path / "d.txt").write_text("d=1\n1,1\n2,-1\n3,-1\n")
    cfg = "[game]\ndataset = d.txt\nhypotheses = thresholds\ngrid = 1,2,3\ntransforms = identity\neps = 0.1\n"
    assert run(tmp_path, "game", "mw-erm", cfg) == 0
    assert report(tmp_path)["rounds"] == "1"
    tr = io.parse_trace((tmp_path / "out" / "trace.txt").read_text())
    assert len(tr["records"]) == 1


def test_game_sampled_needs_seed(tmp_path, capsys):
    (tmp_path / "d.txt").write_text("d=1\n1,1\n2,-1\n")
    cfg = ("[game]\ndataset = d.txt\nhypotheses = thresholds\ngrid = 1,2\ntransforms = identity\n"
           "eps = 0.1\nmode = sampled\nm_erm = 5\n")
    assert run(tmp_path, "game", "mw-erm", cfg) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and "seed" in err["message"]
    assert run(tmp_path, "game", "mw-erm", cfg, "--seed", "4") == 0


def test_vc_lowerbound_k3(tmp_path):
    assert run(tmp_path, "vc", "lowerbound", "[vc]\nk = 3\n") == 0
    r = report(tmp_path)
    assert r["vc_h"] == "1" and int(r["vc_ht_lower_bound"]) >= 3


def test_vc_sample_size(tmp_path):
    assert run(tmp_path, "vc", "sample-size", "[vc]\nshape = uniform\nvc = 1\neps = 0.5\ndelta = 0.5\nc = 1\n") == 0
    assert abs(float(report(tmp_path)["m_estimate"]) - 6.77) < 5e-3


def test_vc_shatter_singleton(tmp_path):
    (tmp_path / "L.csv").write_text("1,-1,1,1\n")
    assert run(tmp_path, "vc", "shatter", "[vc]\nlabels = L.csv\n") == 0
    assert report(tmp_path)["vc"] == "0"


def test_vc_linear_closure_and_sauer_and_boolean(tmp_path):
    (tmp_path / "P.txt").write_text("d=2\n0,0,1\n1,0,1\n0,1,1\n1,2,1\n")
    (tmp_path / "maps.txt").write_text("0 -1\n1 0\n\n1 1\n0 0\n")
    assert run(tmp_path, "vc", "linear-closure", "[vc]\npoints = P.txt\nmaps = maps.txt\n") == 0
    assert report(tmp_path)["subset"] == "true"
    cfg = "[vc]\npoints = P.txt\nhypotheses = halfspaces\ntransforms = linear\nmaps = maps.txt\n"
    assert run(tmp_path, "vc", "sauer", cfg, "--force") == 0
    assert int(report(tmp_path)["n_behaviors"]) <= int(report(tmp_path)["bound_phi"])
    cfg = "[vc]\nd = 2\nhypotheses = dictators\ntransforms = bitflips\n"
    assert run(tmp_path, "vc", "boolean", cfg, "--force") == 0
    assert report(tmp_path)["vc_ht"] == "2"


def test_exp_steps_zero(tmp_path):
    cfg = "[exp]\nd = 4\ntrain_size = 20\ntest_size = 10\nwidth = 4\nsteps = 0\nseeds = 0,1\n"
    assert run(tmp_path, "exp", None, cfg) == 0
    lines = (tmp_path / "out" / "records.csv").read_text().splitlines()
    assert lines[0].startswith("# transinv exp")
    assert lines[1] == "seed,method,step,train_err,test_err"
    assert len(lines) == 2 + 4 and all(ln.split(",")[2] == "0" for ln in lines[2:])
    assert (tmp_path / "out" / "summary.csv").exists() and (tmp_path / "out" / "plot.gp").exists()


def test_exp_full_scale_echo(tmp_path):
    assert run(tmp_path, "exp", None, "[exp]\n", "--seed", "0", "--full-scale", "full-parity", "--dry-run") == 0
    r = report(tmp_path, "config.txt")
    assert r["d"] == "18" and r["train_size"] == "7000" and r["target"] == "parity-full"


def test_exp_needs_seed_or_seeds(tmp_path):
    assert run(tmp_path, "exp", None, "[exp]\nsteps = 0\n") == 2


def test_exit_codes(ex1, capsys):
    assert run(ex1, "game", "coverage", "[game]\nmatrix = ex1.csv\n") == 2       # missing eps
    assert run(ex1, "game", "coverage", "[game]\nmatrix = ex1.csv\neps = 2\n") == 3
    assert run(ex1, "game", "minmax", "[game]\nmatrix = nope.csv\n") == 2
    (ex1 / "bad.csv").write_text("T1\n1.5\n")
    assert run(ex1, "game", "minmax", "[game]\nmatrix = bad.csv\n") == 3
    assert run(ex1, "exp", None, "[exp]\nbogus = 1\n") == 2
    for line in capsys.readouterr().err.strip().splitlines():
        rec = json.loads(line)
        assert set(rec) == {"error", "message", "exit_code"}


def test_invariant_failure_exit_4(tmp_path, monkeypatch):
    from transinv import vc
    from transinv.core import InvariantViolation

    def broken(k):
        raise InvariantViolation("constructed subsets fail")
    monkeypatch.setattr(vc, "lowerbound_check", broken)
    assert run(tmp_path, "vc", "lowerbound", "[vc]\nk=2\n") == 4


def test_no_overwrite_without_force(ex1):
    cfg = "[game]\nmatrix = ex1.csv\n"
    assert run(ex1, "game", "minmax", cfg) == 0
    assert run(ex1, "game", "minmax", cfg) == 2
    assert run(ex1, "game", "minmax", cfg, "--force") == 0


def test_header_has_digest_and_seed(ex1):
    run(ex1, "game", "minmax", "[game]\nmatrix = ex1.csv\n", "--seed", "17")
    head = (ex1 / "out" / "report.txt").read_text().splitlines()[0]
    assert "config_digest=" in head and "seed=17" in head


def test_digest_tracks_config(ex1):
    run(ex1, "game", "coverage", "[game]\nmatrix = ex1.csv\neps = 0.05\n")
    a = (ex1 / "out" / "report.txt").read_text().splitlines()[0]
    run(ex1, "game", "coverage", "[game]\nmatrix = ex1.csv\neps = 0.5\n", "--force")
    b = (ex1 / "out" / "report.txt").read_text().splitlines()[0]
    assert a != b


def test_module_entry_point(ex1):
    (ex1 / "cfg.txt").write_text("[game]\nmatrix = ex1.csv\n")
    p = subprocess.run([sys.executable, "-m", "transinv", "game", "regret", "--config", str(ex1 / "cfg.txt"),
                        "--out", str(ex1 / "o")], capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert "selected=h1" in (ex1 / "o" / "report.txt").read_text()

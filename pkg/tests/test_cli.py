import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from quadsector.cli import BV_COLUMNS, main
from quadsector.checks import SUITES
from quadsector.prime_counts import Normalization, bv_lhs
from quadsector.sectors import SectorSpec


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_field():
    code, text = run("field", "--d", "2")
    assert code == 0 and "eps: 1+√2" in text
    code, text = run("field", "--d", "2", "--json")
    obj = json.loads(text)
    assert obj["eps"] == [1, 1] and obj["discriminant"] == 8


def test_field_rejected(capsys):
    code, _ = run("field", "--d", "5")
    assert code == 2
    assert "1 mod 4" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [["--eta1", "-1/0"], ["--eta1", "abc"], ["--eta1", "1", "--eta2", "0"], ["--x", "1e3.5"], ["--Q", "0"]])
def test_bv_config_errors(bad):
    assert run("bv", "--x", "1000", *bad)[0] == 2


def test_bv_golden():
    code, text = run("bv", "--d", "2", "--eta1", "-1", "--eta2", "0", "--x", "100000", "--Q", "20", "--json")
    assert code == 0
    obj = json.loads(text)
    rep = bv_lhs(100000, 20, SectorSpec(-1, 0), __import__("quadsector.quad_field", fromlist=["make_field"]).make_field(2))
    assert obj["total_half"] == rep.total(Normalization.HALF_ETA)
    assert obj["total_paper"] == rep.total(Normalization.PAPER_ETA)
    assert obj["total_tilde"] == rep.total_tilde
    assert list(obj) == ["d", "eta1", "eta2", "Q", "moduli", "x", "total_paper", "ratio_paper", "total_half", "ratio_half", "total_tilde"]


def test_bv_csv_deterministic(tmp_path):
    paths = [tmp_path / f"{i}.csv" for i in range(3)]
    for p, threads in zip(paths, ("1", "1", "3")):
        assert run("bv", "--eta1", "-1", "--eta2", "0", "--x", "20000", "--Q", "12", "--threads", threads, "--csv", str(p))[0] == 0
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]
    text = data[0].decode("utf-8")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0].split(",") == BV_COLUMNS
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == len(BV_COLUMNS)
        assert all(c.lstrip("-").isdigit() for c in cells[:6])
        for c in cells[6:]:
            mantissa = c.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
            assert len(mantissa) <= 12


def test_bv_svg(tmp_path):
    svg = tmp_path / "bv.svg"
    code, text = run("bv", "--eta1", "-1", "--eta2", "0", "--x-grid", "1000,10000,30000", "--Q", "10", "--svg", str(svg), "--json")
    assert code == 0
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    assert len(json.loads(text)["grid"]) == 3


def test_other_commands(tmp_path):
    assert run("ideals", "--x", "10", "--csv", str(tmp_path / "i.csv"))[0] == 0
    assert (tmp_path / "i.csv").read_text().splitlines()[1] == "1,1,0,1"
    obj = json.loads(run("primes", "--x", "10", "--json")[1])
    assert [p[0] for p in obj["primes"]] == [2, 7, 7, 9]
    code, text = run("psi", "--x", "10", "--q", "1,0", "--a", "1,0", "--json")
    assert code == 0 and json.loads(text)["psi"] == pytest.approx(8.168486417126681)
    assert run("charsum", "--q", "3,0", "--phases", "1", "--x", "1000")[0] == 0
    assert run("large-sieve", "--P", "4", "--K", "300", "--draws", "3")[0] == 0
    assert run("vaughan", "--x", "500")[0] == 0
    assert run("sigma", "--x-grid", "100,1000", "--eta1", "-1/2", "--eta2", "1/2", "--csv", str(tmp_path / "s.csv"))[0] == 0


def test_exit_codes(capsys):
    assert run("charsum", "--q", "400,0")[0] == 3
    assert run("large-sieve", "--P", "6000")[0] == 3
    assert run("psi", "--q", "3,0", "--a", "3,3")[0] == 2
    assert run("charsum", "--q", "3,0", "--phases", "1,2")[0] == 2
    assert run("nonsense")[0] == 2


def test_checks_list():
    code, text = run("checks", "--list")
    assert code == 0 and text.split() == list(SUITES)


def test_checks_pass_and_inject():
    code, text = run("checks", "--only", "hecke,routes", "--json")
    obj = json.loads(text)
    assert code == 0 and obj["passed"] and [s["name"] for s in obj["suites"]] == ["hecke", "routes"]
    code, text = run("checks", "--expect-fail", "hecke")
    assert code == 1 and text.startswith("[FAIL]")
    assert run("checks", "--expect-fail", "nope")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "quadsector", "field", "--d", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and "2+√3" in res.stdout


def test_out_dir_and_log_power(tmp_path):
    code, text = run("bv", "--eta1", "-1", "--eta2", "0", "--x", "5000", "--Q", "5", "--A", "2",
                     "--out-dir", str(tmp_path / "rep"), "--csv", "bv.csv", "--json")
    assert code == 0 and (tmp_path / "rep" / "bv.csv").exists()
    import math

    obj = json.loads(text)
    assert obj["scaled_half"] == pytest.approx(obj["total_half"] * math.log(5000) ** 2 / 5000)

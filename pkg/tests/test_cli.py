import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from darboux_pairs.cli import main
from darboux_pairs.mannheim import IDENTITY_IDS

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def fx(name):
    return str(FIX / f"{name}.json")


def test_frames_geodesic_helix(capsys):
    code, out, _ = run(capsys, "frames", "--config", fx("cylinder_helix"))
    assert code == 0
    data = rows(out)
    assert len(data) == 64
    assert list(data[0])[:4] == ["s", "x", "y", "z"]
    assert all(abs(float(r["k_g"])) < 1e-9 for r in data)


def test_frames_plane_line_all_zero(capsys):
    code, out, _ = run(capsys, "frames", "--config", fx("dsl_plane_line"))
    assert code == 0
    for r in rows(out):
        for col in ("k_g", "k_n", "tau_g"):
            assert float(r[col]) == 0.0


def test_frames_json(capsys):
    code, out, _ = run(capsys, "frames", "--config", fx("torus_parallel"), "--format", "json")
    assert code == 0
    assert isinstance(json.loads(out), (dict, list))


def test_pair_latitude_theta_zero(capsys):
    code, out, _ = run(capsys, "pair", "--config", fx("sphere_latitude"))
    assert code == 0
    assert all(abs(float(r["theta"])) < 1e-9 for r in rows(out))
    meta = [ln for ln in out.splitlines() if ln.startswith("#")]
    keys = {ln[1:].strip().split("=")[0] for ln in meta}
    assert {"lambda", "coincidence_sign", "v_half_width"} <= keys


def test_pair_helix_speed_ratio(capsys):
    code, out, _ = run(capsys, "pair", "--config", fx("cylinder_helix"))
    assert code == 0
    for r in rows(out):
        assert float(r["speed_ratio"]) == pytest.approx(1.131923, abs=1e-6)


def test_verify_report(capsys):
    code, out, _ = run(capsys, "verify", "--config", fx("cylinder_helix"))
    assert code == 0
    rep = json.loads(out)
    ids = [r["id"] for r in rep["identities"]]
    assert ids == list(IDENTITY_IDS)
    by_id = {r["id"]: r for r in rep["identities"]}
    assert by_id["CHAR15"]["normalized_max"] < 1e-7
    small = [k for k in ("CHAR14_P", "CHAR14_M") if by_id[k]["normalized_max"] < 1e-6]
    # this partner is a geodesic, so the two variants coincide
    assert small == ["CHAR14_P", "CHAR14_M"]
    assert {"id", "applicable", "gate_reason", "max_abs", "rms", "normalized_max"} <= set(by_id["THM2"])


def test_verify_gated_filter(capsys):
    code, out, _ = run(capsys, "verify", "--config", fx("sphere_latitude"), "--identities", "COR3")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["identities"]) == 1
    entry = rep["identities"][0]
    assert entry["id"] == "COR3" and entry["applicable"] is False
    assert entry["max_abs"] is None


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--config", fx("torus_parallel"), "--format", "csv",
                       "--identities", "THM2,COINCIDE")
    assert code == 0
    assert [r["id"] for r in rows(out)] == ["COINCIDE", "THM2"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "frames.csv"
    code, out, _ = run(capsys, "frames", "--config", fx("cylinder_helix"), "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("s,x,y,z")


def test_stations_flag(capsys):
    code, out, _ = run(capsys, "frames", "--config", fx("cylinder_helix"), "--stations", "20")
    assert code == 0 and len(rows(out)) == 20


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    lines = out.splitlines()
    for expected in ("sphere", "cylinder a=<radius>", "helicoid c=<pitch>"):
        assert expected in lines
    tops = [ln for ln in lines if not ln.startswith(" ")]
    assert tops == sorted(tops)
    assert "\x1b" not in out


def test_catalog_json(capsys):
    code, out, _ = run(capsys, "catalog", "--json")
    assert code == 0
    data = json.loads(out)
    assert isinstance(data, list) and data[0]["name"] == "cylinder"


@pytest.mark.parametrize("cmd, fixture, code, needle", [
    ("frames", "dsl_syntax_error", 2, "offset 5"),
    ("frames", "unknown_key", 2, "lamda"),
    ("frames", "cone_apex", 3, "degenerate"),
    ("pair", "zero_lambda", 2, "lambda"),
    ("pair", "dsl_plane_line", 2, "lambda"),
    ("pair", "singular_offset", 4, "s1 ="),
    ("verify", "singular_offset", 4, "s1 ="),
    ("pair", "strict_coincidence", 5, "coincidence"),
    ("verify", "strict_coincidence", 5, "coincidence"),
])
def test_exit_codes(capsys, cmd, fixture, code, needle):
    got, _, err = run(capsys, cmd, "--config", fx(fixture))
    assert got == code
    first = err.splitlines()[0]
    assert first.startswith("error: ") and first.count(": ") >= 2
    assert needle in first


def test_syntax_error_names_expected_token(capsys):
    _, _, err = run(capsys, "frames", "--config", fx("dsl_syntax_error"))
    assert '")"' in err or " ) " in err


def test_unknown_identity(capsys):
    code, _, err = run(capsys, "verify", "--config", fx("cylinder_helix"), "--identities", "COR9")
    assert code == 2
    assert "COR9" in err and "COINCIDE" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "frames", "--config", str(tmp_path / "nope.json"))
    assert code == 2 and err.startswith("error: ")


def test_bad_usage():
    proc = subprocess.run([sys.executable, "-m", "darboux_pairs", "frames"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.startswith("error: usage: ")


@pytest.mark.parametrize("argv", [
    ["frames", "--config", fx("torus_parallel")],
    ["frames", "--config", fx("torus_parallel"), "--format", "json"],
    ["pair", "--config", fx("cylinder_helix")],
    ["pair", "--config", fx("sphere_latitude"), "--format", "json"],
    ["verify", "--config", fx("torus_parallel")],
    ["verify", "--config", fx("torus_parallel"), "--format", "csv"],
    ["catalog"],
    ["catalog", "--json"],
])
def test_repeated_runs_are_byte_identical(argv):
    outs = [subprocess.run([sys.executable, "-m", "darboux_pairs", *argv],
                           capture_output=True, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] and outs[0]


def test_csv_uses_seventeen_digits(capsys):
    _, out, _ = run(capsys, "frames", "--config", fx("cylinder_helix"))
    value = rows(out)[1]["k_n"]
    assert float(value) == pytest.approx(-0.5) and len(value.lstrip("-").replace(".", "")) >= 16
    assert not math.isnan(float(value))

import json
import os

import numpy as np
import pytest

from signretrieval import io as sio
from signretrieval.cli import main


def test_complex_csv_round_trip():
    v = np.array([1.5 + 2j, -0.1 + 1e-300j, 3.0])
    text = sio.format_complex_csv(v)
    assert text.splitlines()[0] == "index,re,im"
    np.testing.assert_array_equal(sio.parse_complex_csv(text), v)
    np.testing.assert_array_equal(sio.complex_from_json(sio.complex_to_json(v)), v)


def test_real_csv_round_trip():
    v = np.array([0.1, 2.0, 1e-17])
    np.testing.assert_array_equal(sio.parse_real_csv(sio.format_real_csv(v)), v)
    np.testing.assert_array_equal(sio.parse_real_csv("1\n2\n"), [1.0, 2.0])


@pytest.mark.parametrize("text", ["", "value\n", "1,2\n3,4\n", "value\nabc\n", "1\nnan\n"])
def test_real_csv_malformed(text):
    with pytest.raises(sio.FormatError):
        sio.parse_real_csv(text)


@pytest.mark.parametrize("text", ["index,re,im\n1,0,0\n", "index,re,im\n0,1\n"])
def test_complex_csv_malformed(text):
    with pytest.raises(sio.FormatError):
        sio.parse_complex_csv(text)


def test_layout(tmp_path):
    p = tmp_path / "layout.json"
    p.write_text('{"len1": 3, "gap": 4, "len2": 3}')
    assert sio.read_layout(str(p)).offset == 0
    p.write_text('{"len1": 3, "gap": 4}')
    with pytest.raises(sio.FormatError):
        sio.read_layout(str(p))


def test_curve_csv():
    assert sio.format_curve_csv([(2, 0.5), (4, 0.0)]) == "tau_s,e_out\n2,0.5\n4,0.0\n"


def _run(capsys, *argv):
    code = main(list(argv) + ["--json"])
    out = json.loads(capsys.readouterr().out)
    return code, out


def test_cli_sign(tmp_path, capsys):
    d = str(tmp_path)
    code, out = _run(capsys, "generate", "--n", "64", "--tau", "12", "--dir", d)
    assert code == 0 and out["ok"] and out["cmd"] == "generate"
    res = os.path.join(d, "res.json")
    code, out = _run(capsys, "sign", "--input", os.path.join(d, "intensities.csv"), "--tau", "12", "--out", res)
    assert code == 0
    result = json.load(open(res))
    assert result["diagnostics"]["residual"] <= 1e-8
    truth = sio.parse_real_csv(open(os.path.join(d, "signs.csv")).read())
    assert np.array_equal(result["signs"], truth) or np.array_equal(result["signs"], -truth)
    fhat = sio.read_complex_vector(os.path.join(d, "res_fhat.csv"))
    assert fhat.shape == (64,)


def test_cli_oracle_check(capsys):
    code, out = _run(capsys, "oracle-check", "--n", "12", "--tau", "4", "--trials", "50")
    assert code == 0
    assert out["data"]["failed"] == []


def test_cli_exit_codes(tmp_path, capsys):
    code, out = _run(capsys, "sign", "--input", str(tmp_path / "missing.csv"), "--tau", "2")
    assert code == 2 and not out["ok"]
    bad = tmp_path / "bad.csv"
    bad.write_text("value\n1\nx\n")
    assert _run(capsys, "sign", "--input", str(bad), "--tau", "2")[0] == 2
    ones = tmp_path / "ones.csv"
    ones.write_text(sio.format_real_csv(np.ones(16)))
    nines = tmp_path / "nines.csv"
    nines.write_text(sio.format_real_csv(np.full(16, 9.0)))
    code, out = _run(capsys, "vpr3", "--i1", str(ones), "--i2", str(ones), "--sum", str(nines),
                     "--tau", "2", "--tau-interference", "2")
    assert code == 3
    assert "radicand" in out["data"]["error"]
    assert _run(capsys, "sign", "--input", str(ones), "--tau", "3")[0] == 2
    assert _run(capsys, "oracle-check", "--n", "30", "--tau", "2", "--trials", "1")[0] == 2


def test_cli_montecarlo_seed_flag(tmp_path, capsys):
    cfg = tmp_path / "mc.json"
    cfg.write_text(json.dumps({"n": 64, "tau": 12, "sigma_list": [1e-3], "trials": 3}))
    outs = []
    for seed in ("1", "1", "2"):
        agg = tmp_path / f"agg{len(outs)}.csv"
        code, _ = _run(capsys, "montecarlo", "--config", str(cfg), "--out", str(agg),
                       "--jsonl", str(tmp_path / "t.jsonl"), "--seed", seed)
        assert code == 0
        outs.append(agg.read_bytes())
    assert outs[0] == outs[1] != outs[2]

import io
import json

import pytest

from qmark.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, parse_rational, parse_sequence, read_quotients, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_qm_text():
    assert call("qm", "7/10")[:2] == (EXIT_OK, "25/32\n")
    code, out, _ = call("qm", "--cf", "1,2,3")
    assert code == EXIT_OK and out.startswith("25/32")


def test_json_and_csv():
    code, out, _ = call("--format", "json", "level", "2")
    assert code == EXIT_OK and json.loads(out)["values"] == ["1/3", "2/3"]
    code, out, _ = call("--format", "csv", "qm", "1/3")
    assert out.splitlines()[0].startswith("x,value")


def test_expand_and_continuant():
    assert "canonical: [1, 3, 1, 1, 3]" in call("expand", "25/32")[1]
    code, out, _ = call("continuant", "1,2,3", "--split", "1", "--fraction")
    assert code == EXIT_OK and out.splitlines()[0] == "10" and "7/10" in out


def test_constants_digits():
    out = call("constants")[1]
    assert "1.38848382726123460347758" in out and "5.31972235583836466988" in out


def test_diagnose_strict():
    assert call("diagnose", "100,1,1,100,1,1", "--strict")[0] == EXIT_OK
    assert call("diagnose", "1,1,1,1", "--strict")[0] == EXIT_FAIL
    assert call("diagnose", "1,1,1,1")[0] == EXIT_OK


def test_blocks():
    code, out, _ = call("blocks", "3,1,1,1,8,1,1,1", "--t0", "8", "--lam", "1/2", "--N", "2")
    assert code == EXIT_OK and "B_1: length 4 S=11 max=8@5" in out


def test_bounds_and_minimax():
    assert call("bounds-verify", "continuant", "2,2,2")[0] == EXIT_OK
    assert call("bounds-verify", "min-product", "--s", "10", "--alpha", "3", "--beta", "4")[0] == EXIT_OK
    code, out, _ = call("minimax", "--N", "2", "--lam", "1/4", "--bounds", "--oracle")
    assert code == EXIT_OK and "0.216506350946" in out


def test_usage_errors():
    assert call("nosuch")[0] == EXIT_USAGE
    assert call("qm", "abc")[0] == EXIT_USAGE
    assert call("minimax", "--N", "2")[0] == EXIT_USAGE
    assert call("qm", "3/2")[0] == EXIT_USAGE  # domain error


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small instance\nepsilon = 1/2\nlambda = 1/2\nN = 2\nT1 = 131072\n")
    seq = tmp_path / "x.txt"
    code, out, _ = call("--config", str(cfg), "construct", "--mode", "override", "--out", str(seq))
    assert code == EXIT_OK
    arr = read_quotients(str(seq))
    assert arr.size == 131072 and arr[:10].tolist() == [1] * 10
    assert call("--config", str(cfg), "verify-construction", str(seq))[0] == EXIT_OK
    # without the leading run the deficiency target is missed
    code, out, _ = call("--config", str(cfg), "verify-construction", str(seq), "--initial", "32480")
    assert code == EXIT_FAIL and "T=131072" in out.splitlines()[-1]


def test_construct_infeasible():
    code, _, err = call("construct", "--mode", "override", "--epsilon", "1/2", "--lam", "1/2", "--N", "2",
                        "--T1", "4096")
    assert code == EXIT_USAGE and "T" in err


def test_verify_all_byte_identical():
    a = call("--seed", "5", "--trials", "15", "verify-all")
    b = call("--seed", "5", "--trials", "15", "verify-all")
    assert a[0] == EXIT_OK and a == b


def test_parsers():
    assert parse_rational("0.25") == parse_rational("1/4")
    assert parse_sequence("1, 2,3") == (1, 2, 3)
    with pytest.raises(Exception):
        parse_sequence("1,0")

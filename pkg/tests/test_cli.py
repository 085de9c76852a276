import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gsp4bessel.besselcore as core
from gsp4bessel.besselcore import CosetAddress
from gsp4bessel.cli import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    Report,
    emit_report,
    parse_address,
    run_command,
)
from gsp4bessel.heckeverify import VerificationReport


def run(*argv):
    out = io.StringIO()
    code = run_command(list(argv), stdout=out)
    return code, [json.loads(line) for line in out.getvalue().splitlines()]


def test_dim_inert():
    code, rows = run("dim", "--p", "3", "--abc", "1,0,1", "--m0", "0")
    assert code == EXIT_OK
    assert rows[0] == {"dim": 0, "testvector": False}
    assert rows[-1] == {"pass": 0, "fail": 0}


def test_bvalue_l_one():
    code, rows = run("bvalue", "--p", "5", "--abc", "5,0,1", "--lam", "unif=-1", "--omega", "-1", "--addr", "h(1,0)")
    assert code == EXIT_OK
    assert rows[0]["value"] == "1/125"


def test_bvalue_w_address():
    code, rows = run("bvalue", "--p", "5", "--abc", "0,1,1", "--lam", "unif=2", "--omega", "1", "--addr", "h(0,0)·W-·s1")
    assert code == EXIT_OK
    assert rows[0]["addr"] == "h(0,0)·W-·s1"


def test_verify_theorem_steinberg():
    code, rows = run("verify-theorem", "--tau", "unramSt", "--m0", "1")
    assert code == EXIT_OK
    assert rows[0]["status"] == "pass"
    assert rows[0]["witness"]["difference"] == "0"
    assert rows[0]["lhs"] and rows[0]["rhs"]


def test_theorem_numeric_substitution():
    code, rows = run("verify-theorem", "--tau", "unram_ps", "--m0", "1", "--numeric", "aT=2,bT=-3")
    assert code == EXIT_OK and rows[0]["status"] == "pass"


def test_charsum_and_identities():
    assert run("verify-charsum", "--m0", "1", "--mrange", "0,2")[0] == EXIT_OK
    code, rows = run("verify-identities", "--p", "2", "--abc", "-1,1,1", "--lrange", "-1,1", "--mrange", "0,1")
    assert code == EXIT_OK and rows[-1]["fail"] == 0 and rows[-1]["pass"] > 0


def test_hecke_small_window():
    code, rows = run("verify-hecke", "--m0", "1", "--lrange", "-1,1", "--mrange", "0,1")
    assert code == EXIT_OK
    assert rows[-1]["pass"] == len(rows) - 1


def test_info_and_zeta():
    assert run("info", "--p", "5", "--abc", "5,0,1", "--m0", "1")[0] == EXIT_OK
    code, rows = run("zeta", "--p", "5", "--abc", "0,1,1", "--lam", "unif=symbolic", "--tau", "unramSt")
    assert code == EXIT_OK and "omg" in rows[0]["Z"]


@pytest.mark.parametrize(
    "argv",
    [("frobnicate",), ("dim", "--p"), ("dim", "--bogus", "1"), ()],
    ids=["unknown-command", "missing-value", "unknown-flag", "empty"],
)
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ("dim", "--p", "4"),
        ("dim", "--abc", "1,0"),
        ("dim", "--omega", "2"),
        ("dim", "--p", "3", "--abc", "1,0,1", "--lam", "unif=2"),
        ("bvalue", "--addr", "h(x,0)"),
        ("verify-theorem", "--tau", "nonsense", "--m0", "1"),
        ("verify-theorem", "--m0", "0"),
    ],
)
def test_config_errors(argv):
    assert run(*argv)[0] == EXIT_CONFIG


def test_missing_config_file_is_io_error(tmp_path):
    assert run("dim", "--config", str(tmp_path / "absent.cfg"))[0] == EXIT_IO


def test_config_file_and_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# inert, conductor one\np = 3\nabc = 1,0,1\nm0 = 0\n", encoding="utf-8")
    assert run("dim", "--config", str(path))[1][0]["dim"] == 0
    assert run("dim", "--config", str(path), "--m0", "1")[1][0] == {"dim": 1, "testvector": True}


def test_out_file(tmp_path):
    target = tmp_path / "report.jsonl"
    code, rows = run("dim", "--out", str(target))
    assert code == EXIT_OK and rows == []
    assert json.loads(target.read_text(encoding="utf-8").splitlines()[-1]) == {"pass": 0, "fail": 0}


def test_determinism():
    argv = ("verify-welldef", "--m0", "1", "--lrange", "0,1", "--mrange", "0,1", "--samples", "5", "--seed", "3")
    first, second = io.StringIO(), io.StringIO()
    run_command(list(argv), stdout=first)
    run_command(list(argv), stdout=second)
    assert first.getvalue() == second.getvalue()


# -------------------------------------------------------------- reports


def test_empty_report_is_trailer_only():
    out = io.StringIO()
    emit_report([], 0, 0, out)
    assert out.getvalue() == '{"pass": 0, "fail": 0}\n'


def test_pass_row_round_trips():
    rep = Report()
    rep.verdict(VerificationReport("hecke_T1", {"addr": "h(0,0)·1"}, "pass", "0", "0"))
    out = io.StringIO()
    emit_report(rep.lines, rep.passed, rep.failed, out)
    line = out.getvalue().splitlines()[0]
    assert json.dumps(json.loads(line), sort_keys=True, ensure_ascii=False) == line


def test_forced_failure_row(monkeypatch):
    original = core.b_table

    def perturbed(ctx, addr):
        value = original(ctx, addr)
        return value + 1 if addr == CosetAddress(0, 1) else value

    monkeypatch.setattr(core, "b_table", perturbed)
    code, rows = run("verify-hecke", "--m0", "1", "--lrange", "0,0", "--mrange", "0,1")
    assert code == EXIT_FAIL
    failing = [r for r in rows[:-1] if r["status"] == "fail"]
    assert failing and all(r["lhs"] != r["rhs"] for r in failing)
    assert rows[-1]["fail"] == len(failing)


# ------------------------------------------------------------ properties


@settings(max_examples=60, deadline=None)
@given(
    st.integers(-5, 5),
    st.integers(0, 5),
    st.sampled_from(["W0", "W+", "W-"]),
    st.sampled_from(["1", "s2", "s2s1", "s2s1s2"]),
    st.sampled_from(["·", "*", "."]),
)
def test_parse_w_address(l, m, w, s, sep):
    tag = {"W0": "w0", "W+": "wplus", "W-": "wminus"}[w]
    text = f"h({l},0){sep}{w}{sep}s1" + ("" if s == "1" else f"{sep}{s}")
    assert parse_address(text) == CosetAddress(l, 0, tag, s)
    plain = f"h({l},{m}){sep}s1s2" if m > 0 else f"h({l},{m})"
    assert parse_address(plain).l == l

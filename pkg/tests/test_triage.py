"""Sandboxed compile/run triage and repair-prompt assembly."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repairkit.errors import RepairKitError
from repairkit.triage import (
    BugType,
    ExecutorConfig,
    ProblemMeta,
    TestCase,
    build_prompt,
    classify,
    load_problem_meta,
    normalize_output,
    triage_source,
)

from conftest import SUM_EXTRA_WS, SUM_OK, SUM_WRONG_OP, write_problem_meta
from oracles import normalize_ref

SUM_TESTS = [TestCase("1 2\n", "3\n"), TestCase("10 -4\n", "6\n")]

# short limits keep the test suite quick; the spin-loop below never finishes
FAST = ExecutorConfig(timeout_s=0.5)

LOOP_FOREVER = """\
#include <stdio.h>
int main() {
    int a, b;
    scanf("%d %d", &a, &b);
    while (1) { a = a + 1; }
    return 0;
}
"""

NO_SEMICOLON = SUM_OK.replace("int a, b;", "int a, b")


# ---------------------------------------------------------------------------
# classification


def test_correct_program_passes():
    report = triage_source(SUM_OK, SUM_TESTS, FAST)
    assert report.compile_ok
    assert report.all_passed
    assert classify(report) is None


def test_compile_error():
    report = triage_source(NO_SEMICOLON, SUM_TESTS, FAST)
    assert not report.compile_ok
    assert report.results == []
    assert report.diagnostics
    assert classify(report) is BugType.COMPILE_ERROR


def test_time_limit():
    report = triage_source(LOOP_FOREVER, SUM_TESTS[:1], FAST)
    assert report.compile_ok
    assert report.results[0].timed_out
    assert not report.results[0].passed
    assert classify(report) is BugType.TIME_LIMIT


def test_presentation_error():
    report = triage_source(SUM_EXTRA_WS, SUM_TESTS, FAST)
    failing = [r for r in report.results if not r.passed]
    assert failing, "extra spaces must break the raw comparison"
    assert all(r.normalized_match for r in failing)
    assert classify(report) is BugType.PRESENTATION_ERROR


def test_semantic_error():
    report = triage_source(SUM_WRONG_OP, SUM_TESTS, FAST)
    assert classify(report) is BugType.SEMANTIC_ERROR


def test_timeout_beats_wrong_answer():
    # one test spins forever, the other would be wrong: TLE wins
    code = SUM_OK.replace("a + b", "a == 0 ? a : a - b")
    looped = code.replace("printf", "while (a == 0) ; printf")
    report = triage_source(looped, [TestCase("0 5\n", "5\n"), TestCase("4 1\n", "5\n")], FAST)
    assert classify(report) is BugType.TIME_LIMIT


def test_mixed_failures_are_semantic():
    # whitespace-only mismatch on one test, wrong value on another
    code = SUM_OK.replace('"%d\\n", a + b', '"%d \\n", a + a')
    report = triage_source(code, [TestCase("2 2\n", "4\n"), TestCase("1 2\n", "3\n")], FAST)
    assert classify(report) is BugType.SEMANTIC_ERROR


def test_nonzero_exit_is_not_presentation():
    code = SUM_OK.replace("return 0;", "return 1;")
    report = triage_source(code, SUM_TESTS, FAST)
    res = report.results[0]
    assert res.raw_match and res.returncode == 1 and not res.passed
    assert classify(report) is BugType.SEMANTIC_ERROR


def test_diagnostics_do_not_leak_the_jail():
    report = triage_source(NO_SEMICOLON, [], FAST)
    assert "main.c" in report.diagnostics
    assert "repairkit-" not in report.diagnostics
    assert "/tmp/" not in report.diagnostics


def test_output_is_capped():
    noisy = SUM_OK.replace(
        'printf("%d\\n", a + b);',
        'for (a = 0; a < 100000; a++) printf("xxxxxxxxxx");',
    )
    config = ExecutorConfig(timeout_s=2.0, max_output_bytes=1024)
    report = triage_source(noisy, [TestCase("1 2\n", "3\n")], config)
    res = report.results[0]
    assert len(res.stdout.encode()) <= 1024
    assert not res.passed
    assert classify(report) is BugType.SEMANTIC_ERROR


def test_missing_compiler_raises():
    config = ExecutorConfig(compiler_cmd="no-such-compiler-zz {src} -o {out}")
    with pytest.raises(RepairKitError):
        triage_source(SUM_OK, SUM_TESTS, config)


# ---------------------------------------------------------------------------
# output normalization


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("3\n", "3"),
        ("3  \n", "3"),
        ("a \t b\n\n\n", "a b"),
        ("  x\n", " x"),
        ("", ""),
        ("\n\n", ""),
        ("1\n2", "1\n2"),
    ],
)
def test_normalize_examples(raw, expected):
    assert normalize_output(raw) == expected


@given(st.text(alphabet=" \tab3\n", max_size=60))
@settings(max_examples=150)
def test_normalize_matches_reference(text):
    assert normalize_output(text) == normalize_ref(text)


@given(st.text(alphabet=" \tab3\n", max_size=60))
def test_normalize_idempotent(text):
    once = normalize_output(text)
    assert normalize_output(once) == once


# ---------------------------------------------------------------------------
# executor config


def test_config_from_file(tmp_path):
    cfg = tmp_path / "exec.cfg"
    cfg.write_text(
        "# toolchain\n"
        "compiler_cmd = gcc -O1 -w {src} -o {out}\n"
        "timeout_s = 1.5\n"
        "max_output_bytes = 4096  # plenty\n"
    )
    config = ExecutorConfig.from_file(cfg)
    assert config.compiler_cmd == "gcc -O1 -w {src} -o {out}"
    assert config.timeout_s == 1.5
    assert config.compile_timeout_s == 15.0
    assert config.max_output_bytes == 4096


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "exec.cfg"
    cfg.write_text("timeout = 2\n")
    with pytest.raises(ValueError, match="unknown key"):
        ExecutorConfig.from_file(cfg)


def test_config_rejects_bad_line(tmp_path):
    cfg = tmp_path / "exec.cfg"
    cfg.write_text("just some words\n")
    with pytest.raises(ValueError, match="expected key = value"):
        ExecutorConfig.from_file(cfg)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"timeout_s": 0.0},
        {"compile_timeout_s": -1.0},
        {"max_output_bytes": 0},
        {"compiler_cmd": "gcc {src}"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExecutorConfig(**kwargs)


# ---------------------------------------------------------------------------
# problem metadata and prompts


def test_load_problem_meta_roundtrip(tmp_path):
    path = write_problem_meta(tmp_path / "p1.json")
    meta = load_problem_meta(path)
    assert meta.problem_id == "p1"
    assert meta.example_ios == (("1 2\n", "3\n"),)
    assert meta.tests[0] == TestCase("3 4\n", "7\n")


def test_load_problem_meta_requires_id(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"description": "no id"}')
    with pytest.raises(RepairKitError):
        load_problem_meta(path)


def test_prompt_has_all_sections_in_order():
    meta = ProblemMeta(
        problem_id="p1",
        description="Sum two ints.",
        io_format="two ints -> one int",
        example_ios=(("1 2\n", "3\n"),),
    )
    prompt = build_prompt(meta, BugType.SEMANTIC_ERROR, SUM_WRONG_OP)
    headers = [ln for ln in prompt.splitlines() if ln.startswith("## ")]
    assert headers == [
        "## Problem Description",
        "## Input/Output Format",
        "## Example IOs",
        "## Bug Type",
        "## Buggy Code",
    ]
    assert "Sum two ints." in prompt
    assert "\nSE\n" in prompt
    assert prompt.endswith("\n")


def test_prompt_missing_parts_say_na():
    meta = ProblemMeta(problem_id="p2")
    prompt = build_prompt(meta, None, "int main() { return 0; }")
    assert prompt.count("N/A") == 4  # description, format, examples, bug type


def test_prompt_drops_examples_that_are_graded_tests():
    meta = ProblemMeta(
        problem_id="p3",
        example_ios=(("1 2\n", "3\n"), ("5 5\n", "10\n")),
        tests=(TestCase("5 5\n", "10\n"),),
    )
    prompt = build_prompt(meta, None, "x")
    assert "1 2" in prompt
    assert "5 5" not in prompt


def test_prompt_all_examples_graded_means_na():
    meta = ProblemMeta(
        problem_id="p4",
        example_ios=(("5 5\n", "10\n"),),
        tests=(TestCase("5 5\n", "10\n"),),
    )
    prompt = build_prompt(meta, None, "x")
    section = prompt.split("## Example IOs\n")[1].split("\n\n")[0]
    assert section == "N/A"

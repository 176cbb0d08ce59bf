import re

import pytest

from refdata import SB1_FORMS, graded_slice
from supercohom.algebras import verify_algebra, build_slice
from supercohom.cli import (RESULT_HEADER, JobError, build_algebra, dump_machine, load_representatives,
                            machine_data, main, parse_job, parse_machine, render, run_job)
from supercohom.cochains import TRIVIAL_MODULE as T, parse_cochain
from supercohom.cohomology import class_match, compute_cohomology

ORIGINAL_JOB = """Input data:
<* Special Leites superalgebra SLe(n) = SB(n)/Z *>
Even variables: x; y. < Optional >
Grading for even variables: 1; 1. < Optional >
Odd variables:  X; Y. < Optional >
Grading for odd variables: -1; -1. < Optional >
Module type: Trivial. < Coadjoint Adjoint>
Special Leites superalgebra: 2.
Cohomology number: 5. < Optional >
Grade: 0. < Optional >
"""

SM1_JOB = """supercohom-job v1
Algebra: SM 1.
Grading for even variables: 1.
Grading for odd variables: 0; -1.
Cohomology number: 1.
Grade: -1.
"""


# parse_job ---------------------------------------------------------------------------

def test_original_job_parses():
    spec = parse_job(ORIGINAL_JOB)
    assert (spec.kind, spec.params) == ("SLe", (2,))
    assert spec.even_names == ["x", "y"] and spec.odd_names == ["X", "Y"]
    assert spec.even_grades == [1, 1] and spec.odd_grades == [-1, -1]
    assert spec.module == "Trivial"
    assert spec.degrees == [5] and spec.grades == [0]


def test_default_grading_is_standard():
    spec = parse_job("Algebra: B 1.\n")
    fam = build_algebra(spec)
    assert fam.ctx.even_grades == (1,) and fam.ctx.odd_grades == (1,)


def test_ranges_and_lists():
    spec = parse_job("Algebra: B 1.\nCohomology number: 0..2.\nGrade: -1, 1.\n")
    assert spec.degrees == [0, 1, 2] and spec.grades == [-1, 1]


@pytest.mark.parametrize("text,where,what", [
    ("Algebra: B 1.\nField: Zp 4.\n", (2, 8), "not prime"),
    ("Algebra: B 1.\nGrading for even variables: 0.\n", (2, None), "grade"),
    ("Algebra: B 1.\nFoo: 3.\n", (2, 1), "unknown key"),
    ("Algebra: B 1.\nEven variables: x; y.\n", (None, None), ""),
])
def test_parse_errors_have_locations(text, where, what):
    with pytest.raises(JobError) as ei:
        parse_job(text)
    msg = str(ei.value)
    line, col = where
    if line is not None:
        assert f"line {line}" in msg
    if col is not None:
        assert f"column {col}" in msg
    assert what.lower() in msg.lower()


def test_unclosed_comment_is_an_error():
    with pytest.raises(JobError):
        parse_job("Algebra: B 1. < never closed\n")


def test_every_line_is_accounted_for():
    with pytest.raises(JobError):
        parse_job("Algebra: B 1.\nthis line means nothing\n")


# run_job -----------------------------------------------------------------------------

def test_original_job_runs():
    rep = run_job(parse_job(ORIGINAL_JOB))
    r = rep.results[(5, 0)]
    assert (r.even_dim, r.odd_dim) == (0, 1)
    text = render(rep, "ascii")
    assert "Even cocycles of degree 5 in grade 0 are trivial." in text
    assert "Odd cocycles of degree 5 in grade 0" in text


def test_original_job_matches_the_printed_class():
    from refdata import A5_0, sle2_slice
    rep = run_job(parse_job(ORIGINAL_JOB))
    sl = sle2_slice()
    got = load_representatives(machine_data(rep), sl)[(5, 0)][0]
    assert class_match(sl, T, got, parse_cochain(A5_0, sl)) is not None


def test_sm1_job_gives_ctx():
    rep = run_job(parse_job(SM1_JOB))
    r = rep.results[(1, -1)]
    assert (r.even_dim, r.odd_dim) == (0, 1)
    assert str(r.representatives[0]) == "C(TX)"


def test_b1_scan_job():
    text = "Algebra: B 1.\nGrading for even variables: 1.\nGrading for odd variables: -1.\n" \
           "Cohomology number: 0..4.\nGrade: -3..3.\n"
    rep = run_job(parse_job(text))
    nonzero = {kg for kg, r in rep.results.items() if r.dim}
    assert nonzero and all(g == 0 for _, g in nonzero)
    assert "Dimensions" in render(rep, "ascii")


@pytest.mark.parametrize("kind,params", [("W", "1 1"), ("S", "2 1"), ("Po", "2 0"), ("H", "2 1"), ("K", "1 1"),
                                         ("B", "1"), ("Le", "1"), ("SB", "1"), ("SLe", "1"), ("M", "1"),
                                         ("SM", "1")])
def test_default_jobs_build_and_verify(kind, params):
    fam = build_algebra(parse_job(f"Algebra: {kind} {params}.\n"))
    sl = build_slice(fam, fam.min_grade_bound(), 1)
    assert verify_algebra(sl).ok


# render ------------------------------------------------------------------------------

def test_ascii_and_latex_forms():
    sl = graded_slice("SB", 1)
    r = compute_cohomology(sl.family, T, 3, 1, slice=sl)
    # the computed class is the printed one up to scalar
    a31 = parse_cochain(SB1_FORMS["a3_1"], sl)
    assert class_match(sl, T, r.representatives[0], a31) is not None
    assert str(a31) == "C(X,1,x^2) - C(X,x,x)"
    tex = render(r, "latex")
    assert tex.startswith("\\documentclass{article}") and tex.rstrip().endswith("\\end{document}")
    assert "\\usepackage{amsmath}" in tex
    assert "C\\left(" in tex and "x^{2}" in tex


def test_latex_has_balanced_delimiters():
    rep = run_job(parse_job(SM1_JOB + "Print basis: yes.\nPrint commutators: yes.\n"))
    tex = render(rep, "latex")
    body = re.sub(r"\\[a-zA-Z]+", "", tex)
    assert body.count("{") == body.count("}")
    assert tex.count("\\left(") == tex.count("\\right)")
    assert tex.count("\\[") == tex.count("\\]")


# machine format ----------------------------------------------------------------------

def test_machine_round_trip():
    rep = run_job(parse_job(ORIGINAL_JOB))
    text = render(rep, "machine")
    assert text.startswith(RESULT_HEADER + "\n")
    data = parse_machine(text)
    assert dump_machine(data) == text
    cell = data["cells"][0]
    assert (cell["even_dim"], cell["odd_dim"]) == (0, 1)
    back = load_representatives(data, rep.slice)
    assert back[(5, 0)] == rep.results[(5, 0)].representatives


def test_machine_output_is_deterministic():
    a = render(run_job(parse_job(SM1_JOB)), "machine")
    b = render(run_job(parse_job(SM1_JOB)), "machine")
    assert a == b


def test_machine_rejects_garbage():
    with pytest.raises(ValueError):
        parse_machine("not a result\n{}")
    with pytest.raises(ValueError):
        parse_machine(RESULT_HEADER + "\n{broken")


# main --------------------------------------------------------------------------------

def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_main_success_and_out_file(tmp_path, capsys):
    job = write(tmp_path, "sm.job", SM1_JOB)
    out = tmp_path / "res.txt"
    assert main([job, "--out", str(out), "--format", "machine"]) == 0
    assert out.read_text().startswith(RESULT_HEADER)
    assert main([job]) == 0
    assert "C(TX)" in capsys.readouterr().out


def test_main_threads(tmp_path, capsys):
    job = write(tmp_path, "b.job", "Algebra: B 1.\nCohomology number: 2..3.\nGrade: 0..1.\n")
    assert main([job, "--threads", "2", "--format", "machine"]) == 0
    par = capsys.readouterr().out
    assert main([job, "--format", "machine"]) == 0
    assert capsys.readouterr().out == par


@pytest.mark.parametrize("text,code", [
    ("Algebra: B 1.\nField: Zp 4.\n", 1),
    ("Algebra: B 1.\nFoo: 3.\n", 1),
    ("Algebra: B 1.\nModule type: Adjoint.\n", 2),
])
def test_main_exit_codes(tmp_path, capsys, text, code):
    job = write(tmp_path, "x.job", text)
    assert main([job]) == code
    assert "supercohom" in capsys.readouterr().err


def test_main_missing_file(tmp_path):
    assert main([str(tmp_path / "nope.job")]) == 1


def test_custom_table_job(tmp_path):
    write(tmp_path, "heis.txt", "element 0 even 0 a\nelement 1 even 0 b\n[0, 1] = 1 1\n")
    job = write(tmp_path, "c.job", "Algebra: Custom heis.txt.\nCohomology number: 1.\nGrade: 0.\n")
    assert main([job, "--out", str(tmp_path / "o.txt")]) == 0
    assert "Even cocycles of degree 1" in (tmp_path / "o.txt").read_text()

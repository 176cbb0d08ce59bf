"""Batch front end: job files in, cohomology reports out.

A job file is a list of ``key: value.`` statements, one per line.  Text in
angle brackets is a comment, lists are separated by ``;`` (or ``,``), and
ranges are written ``lo..hi``.  The optional first line
``supercohom-job v1`` pins the grammar version.  Example::

    supercohom-job v1
    <* Special Leites superalgebra SLe(n) = SB(n)/Z *>
    Even variables: x; y.
    Grading for even variables: 1; 1.
    Odd variables: X; Y.
    Grading for odd variables: -1; -1.
    Module type: Trivial.
    Special Leites superalgebra: 2.
    Cohomology number: 5.
    Grade: 0.

Reports come in three formats.  ``ascii`` and ``latex`` are for reading;
``machine`` is a header line ``supercohom-result v1`` followed by JSON
(ASCII-escaped, keys in a fixed order) that reloads exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .algebras import (CustomAlgebra, Family, OutOfRangeError, UsageError, build_slice,
                       parse_custom_table, signature, standard_variables)
from .cochains import Cochain, ModuleSpec, _expand_args, _resolve_arg, format_cochain, format_key
from .cohomology import CohomologyResult, alternative_forms, compute_cohomology, slice_for
from .linalg import InternalConsistencyError
from .scalars import FieldArithmeticError, QQ, field_from_spec

JOB_HEADER = "supercohom-job v1"
RESULT_HEADER = "supercohom-result v1"

__all__ = ["JobError", "JobSpec", "Report", "parse_job", "run_job", "render", "parse_machine",
           "dump_machine", "load_representatives", "main"]


class JobError(UsageError):
    """A job file statement could not be understood."""

    def __init__(self, msg, line=None, col=None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)


# spelled-out family names accepted as keys, as in "Special Leites superalgebra: 2."
FAMILY_WORDS = {
    "general vector fields": "W", "vector fields": "W", "special vector fields": "S",
    "buttin superalgebra": "B", "leites superalgebra": "Le",
    "special buttin superalgebra": "SB", "special leites superalgebra": "SLe",
    "poisson superalgebra": "Po", "hamiltonian superalgebra": "H",
    "contact superalgebra": "K", "odd contact superalgebra": "M",
    "special odd contact superalgebra": "SM",
}
FAMILY_CODES = {"W", "S", "B", "Le", "SB", "SLe", "Po", "H", "K", "M", "SM"}

KEYS = {
    "algebra": "algebra", "custom table": "custom",
    "even variables": "even_names", "odd variables": "odd_names",
    "grading for even variables": "even_grades", "grading for odd variables": "odd_grades",
    "module type": "module", "module": "module", "field": "field",
    "cohomology number": "degrees", "degree": "degrees",
    "grade": "grades", "output": "output", "format": "output",
    "print basis": "print_basis", "print commutators": "print_commutators",
    "print equations": "print_equations", "alternative forms": "alt_forms",
    # informational lines from the original program's echo of its input
    "input data": None, "input file": None,
}


@dataclass
class JobSpec:
    kind: str | None = None
    params: tuple = ()
    custom_path: str | None = None
    even_names: list | None = None
    odd_names: list | None = None
    even_grades: list | None = None
    odd_grades: list | None = None
    module: str = "Trivial"
    field: str = "Q"
    degrees: list = dc_field(default_factory=lambda: [2])
    grades: list = dc_field(default_factory=lambda: [0])
    output: str = "ascii"
    print_basis: bool = False
    print_commutators: bool = False
    print_equations: bool = False
    alt_forms: int = 0
    base_dir: str = "."


# ---------------------------------------------------------------------------
# parsing


def _strip_comments(line: str, lineno: int, depth: int):
    out = []
    for ch in line:
        if ch == "<":
            depth += 1
        elif ch == ">" and depth:
            depth -= 1
        elif not depth:
            out.append(ch)
    return "".join(out), depth


def _split_list(value: str) -> list:
    return [p.strip() for p in re.split(r"[;,]|\s+", value) if p.strip()]


def _ints(value, line, col, what):
    items = _split_list(value)
    if not items:
        raise JobError(f"{what}: expected a list of integers", line, col)
    out = []
    for it in items:
        m = re.fullmatch(r"([+-]?\d+)\.\.([+-]?\d+)", it)
        try:
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if lo > hi:
                    raise JobError(f"{what}: empty range {it}", line, col)
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(it.replace("−", "-")))
        except ValueError:
            raise JobError(f"{what}: {it!r} is not an integer", line, col) from None
    return out


def _flag(value, line, col, what):
    v = value.strip().lower()
    if v in ("yes", "on", "true", "1"):
        return True
    if v in ("no", "off", "false", "0"):
        return False
    raise JobError(f"{what}: expected yes or no, got {value!r}", line, col)


def parse_job(text: str, base_dir: str = ".") -> JobSpec:
    spec = JobSpec(base_dir=base_dir)
    depth = 0
    seen_header = False
    locs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, depth = _strip_comments(raw, lineno, depth)
        s = line.strip()
        if not s:
            continue
        if s == JOB_HEADER:
            if seen_header or locs:
                raise JobError("misplaced header line", lineno, 1)
            seen_header = True
            continue
        if s.startswith("supercohom-job"):
            raise JobError(f"unsupported job format {s!r}", lineno, 1)
        if ":" not in s:
            raise JobError(f"expected 'key: value.', got {s!r}", lineno, raw.find(s[0]) + 1)
        key_txt, value = s.split(":", 1)
        col = raw.find(value.strip()[:1] or ":") + 1 if value.strip() else raw.find(":") + 2
        value = value.strip()
        if value.endswith("."):
            value = value[:-1].rstrip()
        key = " ".join(key_txt.lower().split())
        _apply(spec, key, value, lineno, col, raw.find(key_txt.strip()[0]) + 1)
        locs[key] = (lineno, col)
    if depth:
        raise JobError("unterminated <...> comment", len(text.splitlines()), 1)
    _validate(spec, locs)
    return spec


def _apply(spec, key, value, line, col, key_col):
    if key in FAMILY_WORDS:
        spec.kind = FAMILY_WORDS[key]
        spec.params = tuple(_ints(value, line, col, key))
        return
    if key not in KEYS:
        raise JobError(f"unknown key {key!r}", line, key_col)
    target = KEYS[key]
    if target is None:
        return
    if not value:
        raise JobError(f"{key}: missing value", line, col)
    if target == "algebra" and value.split()[0].lower() == "custom":
        path = value.split(None, 1)[1].strip() if len(value.split()) > 1 else ""
        if not path:
            raise JobError("Custom algebra needs a table file", line, col)
        spec.kind = "Custom"
        spec.custom_path = path
    elif target == "algebra":
        parts = _split_list(value.replace("(", " ").replace(")", " ").replace("|", " "))
        code = next((c for c in FAMILY_CODES if c.lower() == parts[0].lower()), None)
        if code is None:
            raise JobError(f"unknown algebra family {parts[0]!r}", line, col)
        spec.kind = code
        spec.params = tuple(_ints(";".join(parts[1:]), line, col, "algebra parameters")) if parts[1:] else ()
    elif target == "custom":
        spec.kind = "Custom"
        spec.custom_path = value
    elif target in ("even_names", "odd_names"):
        setattr(spec, target, _split_list(value))
    elif target in ("even_grades", "odd_grades"):
        setattr(spec, target, _ints(value, line, col, key))
    elif target == "module":
        try:
            spec.module = ModuleSpec.parse(value).kind
        except UsageError as exc:
            raise JobError(str(exc), line, col) from None
    elif target == "field":
        try:
            field_from_spec(value)
        except ValueError as exc:
            raise JobError(str(exc), line, col) from None
        spec.field = value
    elif target in ("degrees", "grades"):
        setattr(spec, target, _ints(value, line, col, key))
    elif target == "output":
        v = value.lower()
        if v not in ("ascii", "latex", "machine"):
            raise JobError(f"unknown output format {value!r}", line, col)
        spec.output = v
    elif target == "alt_forms":
        n = _ints(value, line, col, key)
        if len(n) != 1 or n[0] < 0:
            raise JobError("alternative forms: expected one non-negative integer", line, col)
        spec.alt_forms = n[0]
    else:
        setattr(spec, target, _flag(value, line, col, key))


def _validate(spec: JobSpec, locs: dict):
    def where(*keys):
        for k in keys:
            if k in locs:
                return locs[k]
        return (None, None)

    if spec.kind is None:
        raise JobError("no algebra given (e.g. 'Algebra: SLe 2.')")
    if spec.kind != "Custom":
        try:
            n, m = signature(spec.kind, spec.params)
        except UsageError as exc:
            raise JobError(str(exc), *where("algebra", *FAMILY_WORDS)) from None
        e, o, eg, og = standard_variables(spec.kind, n, m)
        checks = [("even", spec.even_names or e, spec.even_grades, "grading for even variables"),
                  ("odd", spec.odd_names or o, spec.odd_grades, "grading for odd variables")]
        for what, names, grades, key in checks:
            if grades is not None and len(grades) != len(names):
                raise JobError(f"{len(grades)} {what} grades for {len(names)} {what} variables",
                               *where(key))
        if spec.even_names is not None and len(spec.even_names) != len(e):
            raise JobError(f"{spec.kind} needs {len(e)} even variables", *where("even variables"))
        if spec.odd_names is not None and len(spec.odd_names) != len(o):
            raise JobError(f"{spec.kind} needs {len(o)} odd variables", *where("odd variables"))
        if spec.even_grades is not None and any(g < 1 for g in spec.even_grades):
            raise JobError("even variables need positive grades", *where("grading for even variables"))
    if not spec.degrees or any(k < 0 for k in spec.degrees):
        raise JobError("cohomology degrees must be non-negative", *where("cohomology number", "degree"))


# ---------------------------------------------------------------------------
# running


@dataclass
class Report:
    spec: JobSpec
    algebra: object
    slice: object
    module: ModuleSpec
    results: dict  # (k, g) -> CohomologyResult
    alternatives: dict = dc_field(default_factory=dict)  # (k, g, idx) -> [Cochain]


def build_algebra(spec: JobSpec):
    F = field_from_spec(spec.field)
    if spec.kind == "Custom":
        path = Path(spec.base_dir) / spec.custom_path
        try:
            text = path.read_text()
        except OSError as exc:
            raise JobError(f"cannot read custom table {str(path)!r}: {exc.strerror}") from None
        alg = parse_custom_table(text)
        return alg if F == QQ else alg.with_field(F)
    return Family.create(spec.kind, *spec.params, even_names=spec.even_names,
                         odd_names=spec.odd_names, even_grades=spec.even_grades,
                         odd_grades=spec.odd_grades, field=F)


def run_job(spec: JobSpec, threads: int = 1) -> Report:
    alg = build_algebra(spec)
    module = ModuleSpec(spec.module)
    if isinstance(alg, CustomAlgebra):
        sl = build_slice(alg)
    else:
        sl = slice_for(alg, module, spec.degrees, spec.grades)
    cells = [(k, g) for k in spec.degrees for g in spec.grades]
    results = {}
    if threads > 1 and len(cells) > 1:
        from .cohomology import scan
        table = scan(alg, module, spec.degrees, spec.grades, threads=threads)
        # keep one shared slice for rendering: recompute on it for exact key identity
        for kg in cells:
            results[kg] = compute_cohomology(alg, module, kg[0], kg[1], slice=sl)
            r = table.cells[kg]
            if (r.even_dim, r.odd_dim) != (results[kg].even_dim, results[kg].odd_dim):
                raise InternalConsistencyError(f"parallel and serial runs disagree at {kg}")
    else:
        for k, g in cells:
            results[(k, g)] = compute_cohomology(alg, module, k, g, slice=sl)
    rep = Report(spec, alg, sl, module, results)
    if spec.alt_forms:
        for (k, g), r in results.items():
            for i in range(len(r.representatives)):
                rep.alternatives[(k, g, i)] = alternative_forms(r, i, limit=spec.alt_forms)
    return rep


# ---------------------------------------------------------------------------
# rendering


def render(report, fmt: str | None = None) -> str:
    if isinstance(report, CohomologyResult):
        report = _wrap(report)
    fmt = fmt or report.spec.output
    if fmt == "ascii":
        return _render_text(report, latex=False)
    if fmt == "latex":
        return _render_text(report, latex=True)
    if fmt == "machine":
        return dump_machine(machine_data(report))
    raise UsageError(f"unknown output format {fmt!r}")


def _wrap(r: CohomologyResult) -> Report:
    spec = JobSpec(degrees=[r.degree], grades=[r.grade], module=r.module.kind, field=r.field)
    return Report(spec, r.slice.family, r.slice, r.module, {(r.degree, r.grade): r})


def _has_payloads(sl) -> bool:
    return sl.family.kind != "Custom"


def _cochain_text(C, latex, style):
    return format_cochain(C, style=style, latex=latex)


def _render_text(rep: Report, latex: bool) -> str:
    sl, mod = rep.slice, rep.module
    fam = sl.family
    F = sl.field
    out = []
    w = out.append
    label = fam.label if hasattr(fam, "label") else "custom algebra"

    def math(s):
        return f"\\[ {s} \\]" if latex else f"  {s}"

    def head(s):
        w(f"\\section*{{{s}}}" if latex else s)

    if latex:
        w("\\documentclass{article}")
        w("\\usepackage{amsmath}")
        w("\\begin{document}")
    title = f"Cohomology of {label} with {mod.kind.lower()} coefficients over {F.spec()}"
    w(f"\\noindent {title}\\par" if latex else title)
    if _has_payloads(sl):
        ctx = fam.ctx
        ev = ", ".join(f"g({a})={b}" for a, b in zip(ctx.even_names, ctx.even_grades))
        od = ", ".join(f"g({a})={b}" for a, b in zip(ctx.odd_names, ctx.odd_grades))
        w((f"\\noindent Even variables: ${ev}$\\par" if latex else f"Even variables: {ev}"))
        w((f"\\noindent Odd variables: ${od}$\\par" if latex else f"Odd variables: {od}"))
    w(("\\noindent " if latex else "") + f"Slice grades: [{sl.lo}, {sl.hi}]" + ("\\par" if latex else ""))
    w("")

    if rep.spec.print_basis:
        head("Basis elements")
        for b in sl.basis:
            kind = "even" if b.parity == 0 else "odd"
            if _has_payloads(sl):
                p = fam.format_payload(b.payload, latex=latex)
                w(math(f"{b.name} = {p};\\quad g = {b.grade}\\ ({kind})" if latex
                       else f"{b.name} = {p};  g = {b.grade} ({kind})"))
            else:
                w(math(f"{b.name};\\quad g = {b.grade}\\ ({kind})" if latex else f"{b.name};  g = {b.grade} ({kind})"))
        w("")

    if rep.spec.print_commutators:
        head("Non-zero commutators")
        seen = set()
        for (i, j), terms in sorted(sl.table.items()):
            if (j, i) in seen or not terms:
                continue
            seen.add((i, j))
            rhs = _lin_text(F, [(c, sl.basis[b].name) for b, c in terms], latex)
            a, b = sl.basis[i].name, sl.basis[j].name
            w(math(f"[{a}, {b}] = {rhs}"))
        w("")

    multi = len(rep.results) > 1
    if multi:
        head("Dimensions of H^k_g (even/odd)" if not latex else "Dimensions of $H^k_g$ (even/odd)")
        w(_grid(rep, latex))
        w("")

    for (k, g), r in rep.results.items():
        if multi and not r.dim:
            continue
        if rep.spec.print_equations:
            _equations(rep, r, w, math, head, latex)
        for parity in (0, 1):
            word = "Even" if parity == 0 else "Odd"
            reps = [(i, C) for i, C in enumerate(r.representatives) if C.parity == parity]
            if not reps:
                line = f"{word} cocycles of degree {k} in grade {g} are trivial."
                w((f"\\noindent {line}\\par" if latex else line))
                continue
            head(f"{word} cocycles of degree {k} in grade {g}")
            for n, (i, C) in enumerate(reps, 1):
                name = f"a^{{{k}}}_{{{g}}}" if latex else f"a^{k}_{g}"
                if len(reps) > 1:
                    name += f"({n})"
                by_name = _cochain_text(C, latex, 'name')
                w(math(f"{name} = {by_name}"))
                by_payload = _cochain_text(C, latex, 'payload') if _has_payloads(sl) else by_name
                if by_payload != by_name:
                    w(math(f"{' ' * len(name) if not latex else name} = {by_payload}"))
                alts = rep.alternatives.get((k, g, i), [])
                if alts:
                    w(("\\noindent " if latex else "") + "and also:" + ("\\par" if latex else ""))
                    for m, A in enumerate(alts, 1):
                        w(math(f"({m})\\quad {_cochain_text(A, latex, 'name')}" if latex
                               else f"({m}) {_cochain_text(A, latex, 'name')}"))
        w("")
    if latex:
        w("\\end{document}")
    return "\n".join(out).rstrip() + "\n"


def _lin_text(F, terms, latex):
    parts = []
    for c, name in terms:
        s = F.format(c)
        neg = s.startswith("-")
        mag = s.lstrip("-")
        if latex and "/" in mag:
            a, b = mag.split("/")
            mag = f"\\frac{{{a}}}{{{b}}}"
        body = name if mag == "1" else (f"{mag}\\,{name}" if latex else f"{mag}*{name}")
        parts.append((neg, body))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        text += (" - " if neg else " + ") + body
    return text


def _grid(rep: Report, latex: bool) -> str:
    ks = sorted({k for k, _ in rep.results})
    gs = sorted({g for _, g in rep.results})
    cell = {kg: f"{r.even_dim}/{r.odd_dim}" for kg, r in rep.results.items()}
    if latex:
        lines = ["\\begin{tabular}{r|" + "c" * len(gs) + "}",
                 "$k\\backslash g$ & " + " & ".join(str(g) for g in gs) + " \\\\ \\hline"]
        for k in ks:
            lines.append(f"{k} & " + " & ".join(cell.get((k, g), "") for g in gs) + " \\\\")
        lines.append("\\end{tabular}")
        return "\n".join(lines)
    width = max(5, *(len(c) for c in cell.values()))
    lines = ["k\\g  " + "".join(f"{g:>{width + 1}}" for g in gs)]
    for k in ks:
        lines.append(f"{k:<5}" + "".join(f"{cell.get((k, g), ''):>{width + 1}}" for g in gs))
    return "\n".join(lines)


def _equations(rep, r, w, math, head, latex):
    """Coboundary components x = b t and the cocycle equations Z x = 0."""
    from .cohomology import _piece
    sl, mod = rep.slice, rep.module
    F = sl.field
    k, g = r.degree, r.grade
    for parity in (0, 1):
        word = "even" if parity == 0 else "odd"
        piece = _piece(sl, mod, k, g, parity, need_b=True)
        if piece.keys_down:
            head(f"Coboundary component expressions, {word} part, grade {g}")
            for key, row in zip(piece.keys, piece.b.data):
                rhs = _lin_text(F, [(row[c], f"t_{{{c + 1}}}" if latex else f"t_{c + 1}")
                                    for c in sorted(row)], latex)
                w(math(f"{format_key(sl, mod, key, style='name', latex=latex)} = {rhs}"))
            w(("\\noindent " if latex else "") + "where" + ("\\par" if latex else ""))
            for i, key in enumerate(piece.keys_down, 1):
                t = f"t_{{{i}}}" if latex else f"t_{i}"
                w(math(f"{t} = {format_key(sl, mod, key, style='name', latex=latex)}"))
        if piece.Z.rows:
            head(f"Determining equations for {word} cocycles, grade {g}")
            for row in piece.Z.data:
                if not row:
                    continue
                lhs = _lin_text(F, [(row[c], format_key(sl, mod, piece.keys[c], style='name', latex=latex))
                                    for c in sorted(row)], latex)
                w(math(f"{lhs} = 0"))
        w("")


# ---------------------------------------------------------------------------
# machine format


def machine_data(rep: Report) -> dict:
    sl, mod = rep.slice, rep.module
    fam = sl.family
    F = sl.field
    used = sorted({i for r in rep.results.values() for C in r.representatives
                   for key in C.coeffs for i in key.args + ((key.m,) if not mod.trivial else ())})
    elements = []
    for i in used:
        b = sl.basis[i]
        payload = fam.format_payload(b.payload) if _has_payloads(sl) else None
        elements.append({"id": i, "name": b.name, "parity": b.parity, "grade": b.grade,
                         "payload": payload})
    cells = []
    for (k, g), r in rep.results.items():
        reps = []
        for C in r.representatives:
            terms = [[F.format(c), list(key.args), key.m] for key, c in C.sorted_items()]
            reps.append({"parity": C.parity, "terms": terms})
        cells.append({"degree": k, "grade": g, "even_dim": r.even_dim, "odd_dim": r.odd_dim,
                      "representatives": reps})
    out = {"algebra": fam.label if hasattr(fam, "label") else "Custom",
           "field": F.spec(), "module": mod.kind}
    if _has_payloads(sl):
        ctx = fam.ctx
        out["variables"] = {"even": [[a, b] for a, b in zip(ctx.even_names, ctx.even_grades)],
                            "odd": [[a, b] for a, b in zip(ctx.odd_names, ctx.odd_grades)]}
    out["elements"] = elements
    out["cells"] = cells
    return out


def dump_machine(data: dict) -> str:
    return RESULT_HEADER + "\n" + json.dumps(data, indent=1, ensure_ascii=True) + "\n"


def parse_machine(text: str) -> dict:
    head, _, body = text.partition("\n")
    if head.strip() != RESULT_HEADER:
        raise UsageError(f"not a {RESULT_HEADER!r} document")
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed machine result: {exc}") from None


def load_representatives(data: dict, sl, module: ModuleSpec | None = None) -> dict:
    """Machine data -> {(k, g): [Cochain]} rebuilt on a slice.

    Elements are matched by payload when the algebra has them, else by name;
    the slice may use a different basis, arguments are expanded multilinearly.
    """
    module = module or ModuleSpec(data["module"])
    F = sl.field
    coords = {}
    for e in data["elements"]:
        text = e["payload"] if e["payload"] is not None else e["name"]
        coords[e["id"]] = _resolve_arg(sl, text)
    out = {}
    for cell in data["cells"]:
        k, g = cell["degree"], cell["grade"]
        lst = []
        for r in cell["representatives"]:
            terms = []
            for c, args, m in r["terms"]:
                c = F.parse(c)
                if module.trivial:
                    mods = [(F.one, 0)]
                else:
                    mods = [(v, i) for i, v in coords[m].items()]
                for a, ids in _expand_args(F, [coords[x] for x in args]):
                    for b, mi in mods:
                        terms.append((F.mul(c, F.mul(a, b)), ids, mi))
            lst.append(Cochain.from_args(sl, module, terms, k))
        out[(k, g)] = lst
    return out


# ---------------------------------------------------------------------------
# entry point


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".supercohom-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="supercohom",
                                 description="Cohomology of Lie superalgebras of vector fields")
    ap.add_argument("jobfile")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=["ascii", "latex", "machine"],
                    help="override the job's output format")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for multi-cell jobs")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        text = Path(args.jobfile).read_text()
    except OSError as exc:
        print(f"supercohom: cannot read {args.jobfile}: {exc.strerror}", file=sys.stderr)
        return 1
    try:
        spec = parse_job(text, base_dir=str(Path(args.jobfile).parent))
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
    except (UsageError, ValueError) as exc:
        print(f"supercohom: {args.jobfile}: {exc}", file=sys.stderr)
        return 1
    try:
        rep = run_job(spec, threads=args.threads)
        out = render(rep, args.format or spec.output)
    except InternalConsistencyError as exc:
        print(f"supercohom: internal consistency failure: {exc}", file=sys.stderr)
        return 3
    except JobError as exc:
        print(f"supercohom: {args.jobfile}: {exc}", file=sys.stderr)
        return 1
    except (OutOfRangeError, FieldArithmeticError, UsageError, ValueError, ArithmeticError) as exc:
        print(f"supercohom: computation failed: {exc}", file=sys.stderr)
        return 2
    _write(args.out, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

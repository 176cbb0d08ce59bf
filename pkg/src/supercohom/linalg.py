"""Exact sparse linear algebra over a :class:`~supercohom.scalars.Field`.

Vectors are ``dict`` objects mapping a column index to a nonzero raw field
value.  Matrices are lists of such row dicts plus a column count.

Elimination is incremental: rows are fed into an :class:`Echelon`, which keeps
one pivot row per pivot column.  A row is reduced by repeatedly eliminating its
smallest column (a heap tracks the columns), so pivot rows only ever hold
entries at or to the right of their pivot.  When two rows compete for the same
pivot column the shorter one keeps it, which limits fill-in.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field as dc_field

from .scalars import Field


class ShapeError(ValueError):
    pass


class NotInSpan(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass
class ExactMatrix:
    rows: int
    cols: int
    field: Field
    data: list = dc_field(default_factory=list)  # list of row dicts

    def __post_init__(self):
        if not self.data:
            self.data = [dict() for _ in range(self.rows)]
        if len(self.data) != self.rows:
            raise ShapeError(f"{len(self.data)} row dicts for {self.rows} rows")

    @classmethod
    def from_dense(cls, rows, field: Field):
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        data = []
        for r in rows:
            if len(r) != ncols:
                raise ShapeError("ragged dense matrix")
            d = {}
            for c, v in enumerate(r):
                v = field(v)
                if not field.is_zero(v):
                    d[c] = v
            data.append(d)
        return cls(len(rows), ncols, field, data)

    @classmethod
    def zero(cls, rows, cols, field):
        return cls(rows, cols, field)

    def to_dense(self):
        z = self.field.zero
        out = []
        for r in self.data:
            row = [z] * self.cols
            for c, v in r.items():
                row[c] = v
            out.append(row)
        return out

    def columns(self) -> list:
        cols = [dict() for _ in range(self.cols)]
        for i, r in enumerate(self.data):
            for c, v in r.items():
                cols[c][i] = v
        return cols

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, self.field, self.columns())

    def nnz(self) -> int:
        return sum(len(r) for r in self.data)

    def matvec(self, v: dict) -> dict:
        F = self.field
        out = {}
        for i, r in enumerate(self.data):
            if len(r) < len(v):
                acc = F.zero
                for c, a in r.items():
                    b = v.get(c)
                    if b is not None:
                        acc = F.add(acc, F.mul(a, b))
            else:
                acc = F.zero
                for c, b in v.items():
                    a = r.get(c)
                    if a is not None:
                        acc = F.add(acc, F.mul(a, b))
            if not F.is_zero(acc):
                out[i] = acc
        return out

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"({self.rows}x{self.cols}) @ ({other.rows}x{other.cols})")
        F = self.field
        out = []
        for r in self.data:
            acc = {}
            for c, a in r.items():
                F.axpy(acc, a, other.data[c])
            out.append(acc)
        return ExactMatrix(self.rows, other.cols, F, out)

    def is_zero(self) -> bool:
        return all(not r for r in self.data)

    def restrict_columns(self, keep: list) -> "ExactMatrix":
        """Submatrix on the given columns, renumbered 0..len(keep)-1."""
        pos = {c: i for i, c in enumerate(keep)}
        data = []
        for r in self.data:
            data.append({pos[c]: v for c, v in r.items() if c in pos})
        return ExactMatrix(self.rows, len(keep), self.field, data)

    def reduce_mod(self, field: Field) -> "ExactMatrix":
        data = []
        for r in self.data:
            d = {}
            for c, v in r.items():
                w = field(v)
                if not field.is_zero(w):
                    d[c] = w
            data.append(d)
        return ExactMatrix(self.rows, self.cols, field, data)

    def dump(self) -> str:
        """Coordinate triplet text: header ``rows cols field`` then ``r c value``."""
        lines = [f"{self.rows} {self.cols} {self.field.spec().replace(' ', '')}"]
        for i, r in enumerate(self.data):
            for c in sorted(r):
                lines.append(f"{i} {c} {self.field.format(r[c])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "ExactMatrix":
        from .scalars import field_from_spec

        lines = [ln for ln in text.splitlines() if ln.strip()]
        nr, nc, fs = lines[0].split()
        F = field_from_spec(fs.replace("Zp", "Zp "))
        m = cls(int(nr), int(nc), F)
        for ln in lines[1:]:
            r, c, v = ln.split()
            m.data[int(r)][int(c)] = F.parse(v)
        return m


class Echelon:
    """Incrementally maintained row echelon form.

    ``pivots[c]`` is a row dict whose smallest column is ``c`` with entry 1.
    With ``track=True`` every pivot row also carries the combination of input
    rows (by insertion index) that produced it.
    """

    def __init__(self, field: Field, track: bool = False, order=None):
        self.field = field
        self.track = track
        self.pivots = {}
        self.combos = {}
        self.n_added = 0
        # optional column priority: a dict col -> rank; smaller rank pivots first
        self.order = order

    def _key(self, c):
        return c if self.order is None else self.order[c]

    def reduce(self, row: dict, combo: dict | None = None):
        """Reduce ``row`` in place against current pivots.

        Returns ``(row, combo, col)`` where ``col`` is the leading column of the
        nonzero residue (``None`` if the row reduced to zero).
        """
        F = self.field
        pivots = self.pivots
        key = self._key
        heap = [(key(c), c) for c in row]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            v = row.get(c)
            if v is None:
                continue
            prow = pivots.get(c)
            if prow is None:
                # c is the smallest surviving column: leading entry
                return row, combo, c
            factor = F.neg(v)
            for cc in prow:
                if cc not in row:
                    heapq.heappush(heap, (key(cc), cc))
            F.axpy(row, factor, prow)
            if self.track:
                F.axpy(combo, factor, self.combos[c])
        return row, combo, None

    def add(self, row: dict) -> bool:
        """Insert a row; returns True if it increased the rank."""
        F = self.field
        key = self._key
        pivots = self.pivots
        idx = self.n_added
        self.n_added += 1
        row = dict(row)
        combo = {idx: F.one} if self.track else None
        heap = [(key(c), c) for c in row]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            v = row.get(c)
            if v is None:
                continue
            prow = pivots.get(c)
            if prow is None:
                self._install(c, row, combo)
                return True
            if len(row) < len(prow):
                # shorter row takes over the pivot; keep reducing the old one
                old, old_combo = prow, self.combos.get(c)
                self._install(c, row, combo)
                row, combo = dict(old), (dict(old_combo) if self.track else None)
                prow = pivots[c]
                v = row[c]
                heap = [(key(cc), cc) for cc in row]
                heapq.heapify(heap)
            factor = F.neg(v)
            for cc in prow:
                if cc not in row:
                    heapq.heappush(heap, (key(cc), cc))
            F.axpy(row, factor, prow)
            if self.track:
                F.axpy(combo, factor, self.combos[c])
        return False

    def _install(self, c, row, combo):
        F = self.field
        inv = F.inv(row[c])
        if inv != F.one:
            row = {k: F.mul(inv, v) for k, v in row.items()}
            if self.track:
                combo = {k: F.mul(inv, v) for k, v in combo.items()}
        self.pivots[c] = row
        if self.track:
            self.combos[c] = combo

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def pivot_columns(self) -> list:
        return sorted(self.pivots, key=self._key)

    def back_substitute(self) -> None:
        """Make the form fully reduced (zero above every pivot)."""
        F = self.field
        cols = sorted(self.pivots, key=self._key, reverse=True)
        done = set()
        for c in cols:
            row = self.pivots[c]
            combo = self.combos.get(c)
            others = [cc for cc in row if cc != c and cc in done]
            # eliminate later pivots; their rows are already reduced
            for cc in others:
                v = row.get(cc)
                if v is None:
                    continue
                factor = F.neg(v)
                F.axpy(row, factor, self.pivots[cc])
                if self.track:
                    F.axpy(combo, factor, self.combos[cc])
            done.add(c)

    def contains(self, v: dict) -> bool:
        row, _, c = self.reduce(dict(v), {} if self.track else None)
        return c is None

    def solve(self, v: dict):
        """Coefficients over the input rows with sum = v, or raise NotInSpan."""
        if not self.track:
            raise ValueError("Echelon built without tracking")
        F = self.field
        # reduce v while recording the multiples of pivot rows used
        row = dict(v)
        combo = {}
        heap = [(self._key(c), c) for c in row]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            a = row.get(c)
            if a is None:
                continue
            prow = self.pivots.get(c)
            if prow is None:
                raise NotInSpan(f"vector has a component outside the span (column {c})")
            for cc in prow:
                if cc not in row:
                    heapq.heappush(heap, (self._key(cc), cc))
            F.axpy(row, F.neg(a), prow)
            F.axpy(combo, a, self.combos[c])
        return combo


@dataclass
class EchelonForm:
    """Reduced row echelon form of a matrix."""

    rref: ExactMatrix
    pivots: list
    rank: int
    transform: ExactMatrix | None


def row_echelon(M: ExactMatrix, with_transform: bool = True) -> EchelonForm:
    """Exact RREF with ``transform @ M == rref`` (rank rows, zero rows appended)."""
    F = M.field
    ech = Echelon(F, track=with_transform)
    for r in M.data:
        ech.add(r)
    ech.back_substitute()
    piv = ech.pivot_columns()
    rows = [ech.pivots[c] for c in piv]
    data = [dict(r) for r in rows] + [dict() for _ in range(M.rows - len(rows))]
    rref = ExactMatrix(M.rows, M.cols, F, data)
    transform = None
    if with_transform:
        tdata = [dict(ech.combos[c]) for c in piv]
        # complete with a basis of the left null space so the transform is invertible
        tdata += _left_null_rows(M, ech)
        transform = ExactMatrix(M.rows, M.rows, F, tdata)
    return EchelonForm(rref, piv, len(piv), transform)


def _left_null_rows(M: ExactMatrix, ech: Echelon) -> list:
    """Rows y with y @ M == 0 completing the transform to an invertible matrix."""
    F = M.field
    out = []
    # each input row that depends on the earlier ones yields one left-null vector
    probe = Echelon(F, track=True)
    for i, r in enumerate(M.data):
        row, combo, c = probe.reduce(dict(r), {i: F.one})
        probe.n_added += 1
        if c is None:
            out.append(combo)
        else:
            inv = F.inv(row[c])
            probe.pivots[c] = {k: F.mul(inv, v) for k, v in row.items()}
            probe.combos[c] = {k: F.mul(inv, v) for k, v in combo.items()}
    return out


def rank(M: ExactMatrix) -> int:
    ech = Echelon(M.field)
    # feed shorter rows first; it does not change the rank and limits fill-in
    for r in sorted(M.data, key=len):
        if r:
            ech.add(r)
    return ech.rank


def kernel_basis(M: ExactMatrix) -> list:
    """Basis of {x : M x = 0}; one vector per free column, that column set to 1."""
    F = M.field
    ech = Echelon(F)
    for r in sorted(M.data, key=len):
        if r:
            ech.add(r)
    ech.back_substitute()
    return _kernel_from_rref(ech, M.cols, F)


def _kernel_from_rref(ech: Echelon, ncols: int, F: Field) -> list:
    pivset = set(ech.pivots)
    free = [c for c in range(ncols) if c not in pivset]
    # column c of the reduced rows: which pivots mention it
    by_col = {}
    for p, row in ech.pivots.items():
        for c, v in row.items():
            if c != p:
                by_col.setdefault(c, []).append((p, v))
    basis = []
    for f in free:
        vec = {f: F.one}
        for p, v in by_col.get(f, ()):
            vec[p] = F.neg(v)
        basis.append(vec)
    return basis


def in_span(M: ExactMatrix, v: dict):
    """Is ``v`` in the column space of M?  Returns ``(True, coeffs)`` or ``(False, None)``.

    ``coeffs`` maps column index to coefficient with ``M @ coeffs == v``.
    """
    ech = Echelon(M.field, track=True)
    for col in M.columns():
        ech.add(col)
    try:
        return True, ech.solve(v)
    except NotInSpan:
        return False, None


class SpanSolver:
    """Expand vectors in a fixed list of (linearly independent) sparse vectors."""

    def __init__(self, vectors: list, field: Field):
        self.field = field
        self.ech = Echelon(field, track=True)
        for v in vectors:
            if not self.ech.add(v):
                raise ValueError("vectors are linearly dependent")
        self.n = len(vectors)

    def coords(self, w: dict) -> dict:
        if not w:
            return {}
        return self.ech.solve(w)


def quotient_basis(Z: ExactMatrix, b: ExactMatrix, cross_check_limit: int = 400) -> list:
    """Representatives of ker(Z) / im(b).

    The coboundary space im(b) is brought to reduced echelon form over the
    coordinates; its pivot coordinates P are eliminated (y = B x keeps only the
    non-pivot coordinates F, with B in canonical form), so the cocycle
    equations restricted to F read A y = 0.  The free (parametric) y's of that
    system give the basis.  Each returned vector is supported on F, hence
    independent modulo im(b).
    """
    if Z.cols != b.rows:
        raise ShapeError(f"Z has {Z.cols} columns but b has {b.rows} rows")
    return QuotientSolver(Z, b, cross_check_limit=cross_check_limit).representatives


class QuotientSolver:
    """Cohomology-style quotient ker(Z)/im(b) with the intermediate data kept.

    Attributes: ``coboundary`` (echelon of im b, with preimage tracking),
    ``free`` (non-pivot coordinates), ``representatives``.
    """

    def __init__(self, Z: ExactMatrix, b: ExactMatrix, cross_check_limit: int = 400,
                 track_preimages: bool = True, check: bool = True):
        if Z.cols != b.rows:
            raise ShapeError(f"Z has {Z.cols} columns but b has {b.rows} rows")
        F = Z.field
        self.field = F
        self.N = Z.cols
        self.Z = Z
        self.b = b
        ech = Echelon(F, track=track_preimages)
        for col in b.columns():
            ech.add(col)
        ech.back_substitute()
        self.coboundary = ech
        self.rank_b = ech.rank
        pivset = set(ech.pivots)
        self.free = [c for c in range(self.N) if c not in pivset]
        # A = Z restricted to the free coordinates
        A = Z.restrict_columns(self.free)
        aech = Echelon(F)
        for r in sorted(A.data, key=len):
            if r:
                aech.add(r)
        aech.back_substitute()
        self.rank_A = aech.rank
        ys = _kernel_from_rref(aech, len(self.free), F)
        reps = []
        for y in ys:
            x = {self.free[i]: v for i, v in y.items()}
            reps.append(normalize_first(x, F))
        reps.sort(key=lambda x: sorted(x))
        self.representatives = reps
        if check:
            self._cross_check(cross_check_limit)

    def _cross_check(self, limit: int) -> None:
        F = self.field
        rank_Z = rank(self.Z)
        nullity = self.N - rank_Z
        if nullity - self.rank_b != len(self.representatives):
            raise InternalConsistencyError(
                f"nullity(Z)={nullity}, rank(b)={self.rank_b}, "
                f"but {len(self.representatives)} representatives")
        if rank_Z != self.rank_A:
            raise InternalConsistencyError(f"rank Z={rank_Z} but rank A={self.rank_A}")
        for v in self.representatives:
            if self.Z.matvec(v):
                raise InternalConsistencyError("representative is not in ker Z")
        if self.N <= limit:
            # independent route: extend a basis of im(b) by kernel vectors of Z
            ech = Echelon(F)
            for col in self.b.columns():
                ech.add(col)
            base = ech.rank
            extra = sum(1 for kv in kernel_basis(self.Z) if ech.add(kv))
            if extra != len(self.representatives):
                raise InternalConsistencyError(
                    f"extension method found {extra} classes, substitution found "
                    f"{len(self.representatives)} (im b rank {base})")
            for v in self.representatives:
                if not ech.contains(v):
                    raise InternalConsistencyError("representative outside ker Z")
            probe = Echelon(F)
            for col in self.b.columns():
                probe.add(col)
            for v in self.representatives:
                if not probe.add(v):
                    raise InternalConsistencyError("representatives dependent modulo im b")

    def is_coboundary(self, v: dict):
        """``(True, preimage)`` if v is in im(b) (preimage over b's columns)."""
        try:
            if self.coboundary.track:
                return True, self.coboundary.solve(v)
            return self.coboundary.contains(v), None
        except NotInSpan:
            return False, None

    def reduce(self, v: dict) -> dict:
        """Canonical form of v modulo im(b) (supported on free coordinates)."""
        row, _, _ = _full_reduce(self.coboundary, dict(v))
        return row


def _full_reduce(ech: Echelon, row: dict):
    F = ech.field
    changed = True
    while changed:
        changed = False
        for c in [c for c in row if c in ech.pivots]:
            v = row.get(c)
            if v is None:
                continue
            F.axpy(row, F.neg(v), ech.pivots[c])
            changed = True
    return row, None, None


def normalize_first(x: dict, F: Field) -> dict:
    """Scale so the entry at the smallest index is 1."""
    if not x:
        return x
    c0 = min(x)
    inv = F.inv(x[c0])
    return {c: F.mul(inv, v) for c, v in x.items()}

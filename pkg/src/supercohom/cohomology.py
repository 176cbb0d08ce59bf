"""Cohomology of a grade slice: dimensions, representatives, class tests.

For each parity the driver assembles b = d^{k-1} and Z = d^k in value
coordinates (the "x = b t" and "Z x = 0" systems).  Representatives are
reported the way the cohomology tables print them: as forms in the C(K)
notation that kill every coboundary (rows of b^T vanish) and are taken
modulo combinations of rows of Z.  That quotient has dimension
nullity(Z) - rank(b), the dimension of H^k_g.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

from .algebras import AlgebraSlice, CustomAlgebra, Family, UsageError, actual_min_grade, build_slice
from .cochains import (TRIVIAL_MODULE, Cochain, ModuleSpec, apply_coboundary, apply_differential,
                       check_window, cochain_basis, differential_matrix, format_cochain)
from .linalg import Echelon, ExactMatrix, InternalConsistencyError, NotInSpan, QuotientSolver

__all__ = [
    "CohomologyResult", "compute_cohomology", "is_cocycle", "is_coboundary", "class_match",
    "is_closed", "is_exact",
    "alternative_forms", "scan", "ScanTable", "slice_for", "window_for",
]


@dataclass
class CohomologyResult:
    family: str
    module: ModuleSpec
    degree: int
    grade: int
    even_dim: int
    odd_dim: int
    representatives: list  # Cochain, each with .parity
    diagnostics: dict = dc_field(default_factory=dict)
    slice: AlgebraSlice | None = None
    field: str = "Q"
    representation: str = "table"

    @property
    def dim(self) -> int:
        return self.even_dim + self.odd_dim

    def by_parity(self, parity: int) -> list:
        return [r for r in self.representatives if r.parity == parity]


# ---------------------------------------------------------------------------
# windows


def window_for(family, module: ModuleSpec, k_max: int, g_max: int):
    """Grade range of a slice that supports C^{k_max+1} at grade g_max."""
    if isinstance(family, CustomAlgebra) or family.finite:
        return None, None
    if not module.trivial:
        raise UsageError(f"{module.kind} module needs a finite-dimensional algebra; "
                         f"{family.label} is infinite-dimensional")
    lo = actual_min_grade(family)
    hi = g_max - k_max * lo
    return lo, max(hi, lo)


def slice_for(family, module: ModuleSpec, k, g, basis_override=None, names=None) -> AlgebraSlice:
    """Slice wide enough for degrees up to max(k) and grades up to max(g)."""
    ks = k if isinstance(k, (list, tuple, range)) else [k]
    gs = g if isinstance(g, (list, tuple, range)) else [g]
    lo, hi = window_for(family, module, max(ks), max(gs))
    return build_slice(family, lo, hi, basis_override=basis_override, names=names)


def _coerce_slice(obj, module, k, g) -> AlgebraSlice:
    if isinstance(obj, AlgebraSlice):
        return obj
    if isinstance(obj, (Family, CustomAlgebra)):
        return slice_for(obj, module, k, g)
    raise UsageError(f"expected a family or a slice, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# per-parity complex data


class _Piece:
    """C^{k-1} -> C^k -> C^{k+1} at fixed grade and parity."""

    def __init__(self, sl, module, k, g, parity, need_b=True):
        t0 = time.perf_counter()
        self.keys = cochain_basis(sl, module, k, g, parity)
        self.keys_up = cochain_basis(sl, module, k + 1, g, parity)
        self.Z = differential_matrix(sl, module, k, g, parity, src=self.keys, dst=self.keys_up)
        if need_b:
            if k >= 1:
                self.keys_down = cochain_basis(sl, module, k - 1, g, parity)
                self.b = differential_matrix(sl, module, k - 1, g, parity,
                                             src=self.keys_down, dst=self.keys)
            else:
                self.keys_down = []
                self.b = ExactMatrix(len(self.keys), 0, sl.field)
        self.assemble_time = time.perf_counter() - t0
        self._bech = None

    def boundary_echelon(self) -> Echelon:
        """Echelon of the rows of Z (the coboundary side in C(K) notation)."""
        if self._bech is None:
            ech = Echelon(self.Z.field, track=True)
            for r in self.Z.data:
                ech.add(r)
            ech.back_substitute()
            self._bech = ech
        return self._bech


def _piece(sl, module, k, g, parity, need_b=False) -> _Piece:
    cache = sl.__dict__.setdefault("_pieces", {})
    key = (module.kind, k, g, parity)
    p = cache.get(key)
    if p is None or (need_b and not hasattr(p, "b")):
        p = _Piece(sl, module, k, g, parity, need_b=need_b)
        cache[key] = p
    return p


# ---------------------------------------------------------------------------
# main driver


def compute_cohomology(family, module: ModuleSpec = TRIVIAL_MODULE, k: int = 0, g: int = 0, *,
                       slice: AlgebraSlice | None = None, cross_check_limit: int = 400,
                       check_d2: bool = True, representation: str = "table") -> CohomologyResult:
    """H^k_g(A; M) for both parities, with representatives.

    ``representation="table"`` (default) gives forms in the C(K) notation of
    the printed tables; ``"cochain"`` gives genuine cocycles (values, dC = 0)
    modulo coboundaries instead.  Dimensions do not depend on the choice.
    """
    if k < 0:
        raise UsageError("cohomology degree must be non-negative")
    if representation not in ("table", "cochain"):
        raise UsageError(f"unknown representation {representation!r}")
    sl = slice if slice is not None else _coerce_slice(family, module, k, g)
    module.check(sl)
    check_window(sl, module, k + 1, g)
    F = sl.field
    dims = [0, 0]
    reps = []
    diag = {"window": [sl.lo, sl.hi], "sizes": {}, "timings": {}}
    for parity in (0, 1):
        piece = _piece(sl, module, k, g, parity, need_b=True)
        t0 = time.perf_counter()
        if check_d2 and piece.b.cols and piece.Z.rows and not piece.Z.matmul(piece.b).is_zero():
            raise InternalConsistencyError(f"d^{k} d^{k-1} != 0 at grade {g}, parity {parity}")
        if representation == "table":
            q = QuotientSolver(piece.b.transpose(), piece.Z.transpose(),
                               cross_check_limit=cross_check_limit, track_preimages=False)
        else:
            q = QuotientSolver(piece.Z, piece.b, cross_check_limit=cross_check_limit,
                               track_preimages=False)
        for v in q.representatives:
            C = Cochain.from_vector(sl, module, k, piece.keys, v)
            reps.append(C)
        dims[parity] = len(q.representatives)
        tag = "even" if parity == 0 else "odd"
        diag["sizes"][tag] = [len(piece.keys_down), len(piece.keys), len(piece.keys_up)]
        diag["timings"][tag] = round(piece.assemble_time + time.perf_counter() - t0, 3)
    check = apply_differential if representation == "table" else apply_coboundary
    for C in reps:
        if not check(sl, module, C).is_zero():
            raise InternalConsistencyError("representative fails the cocycle check")
    label = sl.family.label if hasattr(sl.family, "label") else "Custom"
    return CohomologyResult(label, module, k, g, dims[0], dims[1], reps, diag, sl, F.spec(),
                            representation)


# ---------------------------------------------------------------------------
# tests on given expressions


def is_cocycle(sl: AlgebraSlice, module: ModuleSpec, C: Cochain) -> bool:
    """True when the expression annihilates all coboundaries."""
    return apply_differential(sl, module, C).is_zero()


def is_coboundary(sl: AlgebraSlice, module: ModuleSpec, C: Cochain):
    """(True, certificate) if C is a combination of rows of d^k, else (False, None).

    The certificate T is a degree k+1 expression with apply_differential(T) == C.
    """
    if C.is_zero():
        return True, Cochain(sl, module, C.degree + 1, {})
    k, g, parity = C.degree, C.grade, C.parity
    piece = _piece(sl, module, k, g, parity)
    ech = piece.boundary_echelon()
    try:
        combo = ech.solve(C.vector(piece.keys))
    except NotInSpan:
        return False, None
    T = Cochain.from_vector(sl, module, k + 1, piece.keys_up, combo)
    if apply_differential(sl, module, T) != C:
        raise InternalConsistencyError("coboundary certificate does not reproduce the cochain")
    return True, T


def is_closed(sl: AlgebraSlice, module: ModuleSpec, C: Cochain) -> bool:
    """dC = 0 for a cochain given by its values."""
    return apply_coboundary(sl, module, C).is_zero()


def is_exact(sl: AlgebraSlice, module: ModuleSpec, C: Cochain):
    """(True, T) with dT = C for a cochain given by its values, else (False, None)."""
    k = C.degree
    if C.is_zero():
        return True, Cochain(sl, module, max(k - 1, 0), {})
    if k == 0:
        return False, None
    piece = _piece(sl, module, k - 1, C.grade, C.parity)
    ech = piece.__dict__.get("_col_ech")
    if ech is None:
        ech = Echelon(sl.field, track=True)
        for col in piece.Z.columns():
            ech.add(col)
        piece._col_ech = ech
    try:
        combo = ech.solve(C.vector(piece.keys_up))
    except NotInSpan:
        return False, None
    T = Cochain.from_vector(sl, module, k - 1, piece.keys, combo)
    if apply_coboundary(sl, module, T) != C:
        raise InternalConsistencyError("exactness certificate does not reproduce the cochain")
    return True, T


def class_match(sl: AlgebraSlice, module: ModuleSpec, C: Cochain, D: Cochain):
    """Scalar lam with C - lam*D a coboundary (None if there is none).

    ``lam`` may be zero only when C itself is trivial.
    """
    if C.degree != D.degree:
        return None
    if not (C.is_zero() or D.is_zero()) and (C.grade, C.parity) != (D.grade, D.parity):
        return None
    if C.is_zero() and D.is_zero():
        return sl.field.one
    ref = D if not D.is_zero() else C
    piece = _piece(sl, module, ref.degree, ref.grade, ref.parity)
    ech = piece.boundary_echelon()
    F = sl.field

    def normal(X):
        if X.is_zero():
            return {}
        if (X.grade, X.parity) != (ref.grade, ref.parity):
            raise UsageError("cochains of different grade or parity")
        # the echelon is fully reduced, so one pass gives the canonical form
        row = X.vector(piece.keys)
        for c in [c for c in row if c in ech.pivots]:
            F.axpy(row, F.neg(row[c]), ech.pivots[c])
        return row

    nc, nd = normal(C), normal(D)
    if not nd:
        return F.zero if not nc else None
    if not nc:
        return F.zero
    c0 = min(nd)
    if c0 not in nc:
        return None
    lam = F.div(nc[c0], nd[c0])
    if any(not F.is_zero(F.sub(nc.get(c, F.zero), F.mul(lam, nd.get(c, F.zero))))
           for c in set(nc) | set(nd)):
        return None
    return lam


def alternative_forms(result: CohomologyResult, index: int, limit: int = 8) -> list:
    """Other forms of a representative's class, each differing by a coboundary.

    Every coordinate in the support of the representative is tried as the one
    to eliminate: coboundaries are reduced with that coordinate pivoting
    first, which pushes the class onto different sets of keys.
    """
    if not result.representatives:
        return []
    rep = result.representatives[index]
    sl, module = result.slice, result.module
    F = sl.field
    piece = _piece(sl, module, rep.degree, rep.grade, rep.parity)
    v = rep.vector(piece.keys)
    n = len(piece.keys)
    seen = {tuple(sorted(v.items()))}
    out = []
    for c in sorted(v):
        order = {j: j + n for j in range(n)}
        order[c] = -1
        ech = Echelon(F, order=order)
        for r in piece.Z.data:
            ech.add(r)
        if c not in ech.pivots:
            continue
        ech.back_substitute()
        row = dict(v)
        for col in sorted(ech.pivots, key=order.__getitem__):
            a = row.get(col)
            if a is not None:
                F.axpy(row, F.neg(a), ech.pivots[col])
        if not row:
            continue
        row = _normalize(row, F)
        key = tuple(sorted(row.items()))
        if key in seen:
            continue
        seen.add(key)
        form = Cochain.from_vector(sl, module, rep.degree, piece.keys, row)
        if class_match(sl, module, form, rep) is None:
            raise InternalConsistencyError("alternative form is not in the class")
        out.append(form)
        if len(out) >= limit:
            break
    return out


def _normalize(row, F):
    c0 = min(row)
    inv = F.inv(row[c0])
    return {c: F.mul(inv, x) for c, x in row.items()}


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanTable:
    family: str
    module: ModuleSpec
    cells: dict  # (k, g) -> CohomologyResult

    def dims(self) -> dict:
        return {kg: (r.even_dim, r.odd_dim) for kg, r in self.cells.items()}

    def nonzero(self) -> list:
        return sorted(kg for kg, r in self.cells.items() if r.dim)


def _scan_cell(args):
    family, module, k, g, override = args
    sl = slice_for(family, module, k, g, basis_override=override)
    r = compute_cohomology(family, module, k, g, slice=sl)
    return (k, g), r


def scan(family, module: ModuleSpec = TRIVIAL_MODULE, k_range=(0,), g_range=(0,), *,
         threads: int = 1, basis_override=None, slice: AlgebraSlice | None = None) -> ScanTable:
    """Dimensions and representatives for every (k, g) in the grid."""
    ks, gs = list(k_range), list(g_range)
    if not ks or not gs:
        raise UsageError("scan ranges must be non-empty")
    cells = {}
    if threads > 1 and slice is None:
        jobs = [(family, module, k, g, basis_override) for k in ks for g in gs]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            for kg, r in ex.map(_scan_cell, jobs):
                cells[kg] = r
    else:
        sl = slice or slice_for(family, module, ks, gs, basis_override=basis_override)
        for k in ks:
            for g in gs:
                cells[(k, g)] = compute_cohomology(family, module, k, g, slice=sl)
    label = family.label if hasattr(family, "label") else "Custom"
    return ScanTable(label, module, dict(sorted(cells.items())))


def digest(r: CohomologyResult) -> list:
    return [format_cochain(C) for C in r.representatives]


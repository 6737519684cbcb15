"""Unit-cell geometry, its canonical 24-operator basis, and the tiling checks.

A cell is a 12-edge patch repeated at stride 2 in both lattice directions.
Cells overlap: 8 of the 12 edges are shared, two with each of the four
neighbouring cells. The edges are addressed by *slot* (0..11), the position
in ``CellGeometry.edges``; all cell-local Pauli operators are 12-qubit
``PauliOp`` values in slot order.

Basis derivation works against the surrounding lattice, not only the
12 cell qubits: pure errors and logicals must commute with every other
cell's enclosed stabilizers and with the coarse (2x2 block) stabilizers,
otherwise the level-to-level recursion would not be exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import gf2
from .lattice import TorusLattice
from .pauli import (
    PauliOp,
    canonical_form,
    commutation_table,
    gram_schmidt,
    symplectic,
    symplectic_dual,
    to_matrix,
)

NQ = 12
REF_ELL = 8


class GeometryError(ValueError):
    pass


Edge = tuple  # (kind, dx, dy)


@dataclass(frozen=True)
class CellGeometry:
    """Relative layout of one cell anchored at lattice point (0, 0)."""

    edges: tuple
    plaquettes: tuple
    sites: tuple
    stride: int = 2

    @cached_property
    def slot_of(self) -> dict:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def shared_map(self) -> dict:
        """slot -> (neighbour offset, neighbour slot) for every shared slot."""
        out = {}
        s = self.stride
        for i, (kind, x, y) in enumerate(self.edges):
            for dx, dy in itertools.product((-s, 0, s), repeat=2):
                if (dx, dy) == (0, 0):
                    continue
                j = self.slot_of.get((kind, x - dx, y - dy))
                if j is not None:
                    if i in out:
                        raise GeometryError(f"slot {i} shared with more than one neighbour")
                    out[i] = ((dx, dy), j)
        return out

    @property
    def shared_slots(self) -> list[int]:
        return sorted(self.shared_map)

    @property
    def interior_slots(self) -> list[int]:
        return [i for i in range(len(self.edges)) if i not in self.shared_map]

    @cached_property
    def own_slots(self) -> list[int]:
        """The 4 shared slots this cell owns: one per neighbour.

        For each positive neighbour offset the lower shared slot is owned;
        translation then fixes ownership on the negative side.
        """
        own = []
        for i in self.shared_slots:
            (dx, dy), j = self.shared_map[i]
            if (dx, dy) > (0, 0):
                first = min(k for k in self.shared_map if self.shared_map[k][0] == (dx, dy))
                if i == first:
                    own.append(i)
            else:
                first = min(k for k in self.shared_map if self.shared_map[k][0] == (-dx, -dy))
                if j != first:
                    own.append(i)
        return sorted(own)

    def edge_index(self, lat: TorusLattice, anchor, slot: int) -> int:
        kind, x, y = self.edges[slot]
        return lat.edge(kind, anchor[0] + x, anchor[1] + y)

    def edge_indices(self, lat: TorusLattice, anchor) -> np.ndarray:
        return np.array([self.edge_index(lat, anchor, i) for i in range(len(self.edges))])


def default_geometry() -> CellGeometry:
    """Staircase cell: 12 edges enclosing p(0,0), p(1,0), p(1,1) and s(1,0), s(1,1), s(2,1)."""
    edges = (
        ("h", 0, 0), ("h", 0, 1), ("h", 1, 0), ("h", 1, 1), ("h", 1, 2), ("h", 2, 1),
        ("v", 0, 0), ("v", 1, -1), ("v", 1, 0), ("v", 1, 1), ("v", 2, 0), ("v", 2, 1),
    )
    return CellGeometry(
        edges=edges,
        plaquettes=((0, 0), (1, 0), (1, 1)),
        sites=((1, 0), (1, 1), (2, 1)),
    )


def _site_edges(x, y):
    return [("h", x, y), ("h", x - 1, y), ("v", x, y), ("v", x, y - 1)]


def _plaquette_edges(x, y):
    return [("h", x, y), ("h", x, y + 1), ("v", x, y), ("v", x + 1, y)]


def cell_stabilizers(geom: CellGeometry) -> list[PauliOp]:
    """Enclosed sites (X type) then enclosed plaquettes (Z type), as 12-qubit operators."""
    out = []
    for x, y in geom.sites:
        slots = [geom.slot_of.get(e) for e in _site_edges(x, y)]
        if None in slots:
            raise GeometryError(f"site ({x},{y}) is not enclosed by the cell")
        out.append(PauliOp.from_support(NQ, xs=slots))
    for x, y in geom.plaquettes:
        slots = [geom.slot_of.get(e) for e in _plaquette_edges(x, y)]
        if None in slots:
            raise GeometryError(f"plaquette ({x},{y}) is not enclosed by the cell")
        out.append(PauliOp.from_support(NQ, zs=slots))
    return out


@dataclass(frozen=True)
class CellBasis:
    """Canonical 24-generator basis of the 12-qubit cell group.

    ``logical_edges[j]`` is the coarse edge ``(kind, dx, dy)``, relative to the
    cell's block coordinate, that logical qubit ``j`` becomes after one
    renormalization step.
    """

    geometry: CellGeometry
    stabilizers: tuple
    pure_errors: tuple
    logical_pairs: tuple  # ((X1, Z1), (X2, Z2))
    edge_pairs: tuple  # 4 x (XE, ZE)
    logical_edges: tuple = field(default=())

    def operators(self) -> list[PauliOp]:
        """All 24 generators as conjugate pairs ``[a1, b1, a2, b2, ...]``."""
        out = []
        for s, t in zip(self.stabilizers, self.pure_errors):
            out += [s, t]
        for a, b in self.logical_pairs:
            out += [a, b]
        for a, b in self.edge_pairs:
            out += [a, b]
        return out

    def dump(self) -> str:
        """24 Pauli strings with role labels, one per line."""
        lines = []
        names_s = [f"A{i + 1}" for i in range(3)] + [f"B{i + 1}" for i in range(3)]
        for name, s, t in zip(names_s, self.stabilizers, self.pure_errors):
            lines.append(f"stabilizer {name} {s}")
            lines.append(f"pure_error {name}bar {t}")
        for j, (a, b) in enumerate(self.logical_pairs, 1):
            lines.append(f"logical X{j} {a}")
            lines.append(f"logical Z{j} {b}")
        for j, (a, b) in enumerate(self.edge_pairs, 1):
            lines.append(f"edge XE{j} {a}")
            lines.append(f"edge ZE{j} {b}")
        return "\n".join(lines) + "\n"

    @cached_property
    def syndrome_masks(self) -> np.ndarray:
        """(12, 4) six-bit syndrome of each single-slot letter."""
        return _masks(self.stabilizers)

    @cached_property
    def logical_masks(self) -> np.ndarray:
        """(12, 4) four-bit logical coordinate of each single-slot letter.

        Bits follow the class convention: anti-commutation with Z1, X1, Z2, X2,
        i.e. the X1, Z1, X2, Z2 components.
        """
        (X1, Z1), (X2, Z2) = self.logical_pairs
        return _masks([Z1, X1, Z2, X2])

    @cached_property
    def edge_masks(self) -> np.ndarray:
        """(12, 4) eight-bit edge coordinate, two bits (X then Z component) per edge pair."""
        partners = []
        for a, b in self.edge_pairs:
            partners += [b, a]
        return _masks(partners)

    @cached_property
    def pure_error_codes(self) -> np.ndarray:
        """(6, 12) letter codes of each pure error."""
        return np.array([t.codes() for t in self.pure_errors], dtype=np.uint8)


def _masks(ops) -> np.ndarray:
    out = np.zeros((NQ, 4), dtype=np.int64)
    for q in range(NQ):
        for code in range(4):
            p = PauliOp(NQ, (code & 1) << q, (code >> 1) << q)
            m = 0
            for k, g in enumerate(ops):
                m |= symplectic(p, g) << k
            out[q, code] = m
    return out


# -- derivation -------------------------------------------------------------


def _restrict(op: PauliOp, idx: np.ndarray) -> PauliOp:
    return PauliOp.from_bits(op.xbits()[idx], op.zbits()[idx])


def _lift(op: PauliOp, idx: np.ndarray, n: int) -> PauliOp:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    np.bitwise_xor.at(x, idx, op.xbits())
    np.bitwise_xor.at(z, idx, op.zbits())
    return PauliOp.from_bits(x, z)


def _anchors(lat: TorusLattice, stride: int):
    return [(a, b) for b in range(0, lat.ell, stride) for a in range(0, lat.ell, stride)]


def _lattice_stabilizer(lat, kind, x, y):
    if kind == "s":
        return PauliOp.from_support(lat.n, xs=[lat.edge(*e) for e in _site_edges(x, y)])
    return PauliOp.from_support(lat.n, zs=[lat.edge(*e) for e in _plaquette_edges(x, y)])


def _block_stabilizers(lat: TorusLattice):
    """Coarse site and plaquette operators: products over each 2x2 block."""
    out = {}
    for b in range(lat.ell // 2):
        for a in range(lat.ell // 2):
            for kind in ("s", "p"):
                op = PauliOp(lat.n)
                for dx, dy in itertools.product((0, 1), repeat=2):
                    op = op * _lattice_stabilizer(lat, kind, 2 * a + dx, 2 * b + dy)
                out[(kind, a, b)] = op
    return out


def _sort_key(v: np.ndarray):
    # weight first, then prefer support on low slots, X before Z
    inter = np.ravel(np.column_stack([v[:NQ], v[NQ:]]))
    return (int((v[:NQ] | v[NQ:]).sum()), tuple(np.flatnonzero(inter)))


def _min_solution(A: np.ndarray, b: np.ndarray):
    """Lowest-weight solution of A v = b (v a 24-bit symplectic vector)."""
    x0 = gf2.solve(A, b) if A.shape[0] else np.zeros(2 * NQ, dtype=np.uint8)
    if x0 is None:
        return None
    N = gf2.nullspace(A) if A.shape[0] else np.eye(2 * NQ, dtype=np.uint8)
    cands = gf2.span(N) ^ x0 if len(N) else x0[None, :]
    best = min(cands, key=_sort_key)
    return PauliOp.from_vector(best)


class _Environment:
    """The cell at anchor (0,0) of a reference torus and its surroundings."""

    def __init__(self, geom: CellGeometry, ell: int = REF_ELL):
        self.geom = geom
        self.lat = TorusLattice(ell)
        self.idx = geom.edge_indices(self.lat, (0, 0))
        if len(set(self.idx.tolist())) != NQ:
            raise GeometryError("cell wraps onto itself on the reference torus")
        own = set()
        for x, y in geom.sites:
            own.add(("s", x % ell, y % ell))
        for x, y in geom.plaquettes:
            own.add(("p", x % ell, y % ell))
        foreign = []
        for a, b in _anchors(self.lat, geom.stride):
            for x, y in geom.sites:
                key = ("s", (a + x) % ell, (b + y) % ell)
                if key not in own:
                    foreign.append(_lattice_stabilizer(self.lat, "s", a + x, b + y))
            for x, y in geom.plaquettes:
                key = ("p", (a + x) % ell, (b + y) % ell)
                if key not in own:
                    foreign.append(_lattice_stabilizer(self.lat, "p", a + x, b + y))
        self.foreign = [r for r in (self.restrict(f) for f in foreign) if not r.is_identity()]
        self.blocks = _block_stabilizers(self.lat)
        self.coarse = [r for r in (self.restrict(k) for k in self.blocks.values()) if not r.is_identity()]

    def restrict(self, op: PauliOp) -> PauliOp:
        return _restrict(op, self.idx)

    def lift(self, op: PauliOp) -> PauliOp:
        return _lift(op, self.idx, self.lat.n)

    def signature(self, op: PauliOp):
        """Coarse sites and plaquettes (block coordinates) that anti-commute with ``op``."""
        full = self.lift(op)
        sites, plaqs = [], []
        half = self.lat.ell // 2
        for (kind, a, b), k in self.blocks.items():
            if symplectic(full, k):
                rel = (_centered(a, half), _centered(b, half))
                (sites if kind == "s" else plaqs).append(rel)
        return sorted(sites), sorted(plaqs)


def _centered(a, m):
    a %= m
    return a - m if a > m // 2 else a


def _coarse_edge(sites):
    """Coarse edge joining two adjacent coarse vertices, or None."""
    (x0, y0), (x1, y1) = sites
    if y0 == y1 and x1 - x0 == 1:
        return ("h", x0, y0)
    if x0 == x1 and y1 - y0 == 1:
        return ("v", x0, y0)
    return None


def _dual_plaquettes(edge):
    kind, x, y = edge
    if kind == "h":
        return sorted([(x, y), (x, y - 1)])
    return sorted([(x, y), (x - 1, y)])


@lru_cache(maxsize=None)
def derive_cell_basis(geom: CellGeometry | None = None) -> CellBasis:
    """Canonical cell basis consistent with the overlapping tiling.

    Pure errors are the lowest-weight operators that flip only their own
    stabilizer among all enclosed stabilizers of all cells and commute with
    the coarse block stabilizers. Logicals are the lowest-weight operators,
    commuting with every enclosed stabilizer and pure error, that act on the
    coarse lattice as a single X or Z on one coarse edge. The four edge pairs
    span what is left; they are built from single-qubit operators on the
    shared slots.
    """
    geom = geom or default_geometry()
    env = _Environment(geom)
    stabs = cell_stabilizers(geom)
    if len(stabs) != 6:
        raise GeometryError("cell must enclose exactly 3 sites and 3 plaquettes")

    S = to_matrix(stabs, NQ)
    F = to_matrix(env.foreign, NQ)
    K = to_matrix(env.coarse, NQ)
    A = symplectic_dual(np.vstack([S, F, K]))
    pure = []
    for i in range(6):
        rhs = np.zeros(A.shape[0], dtype=np.uint8)
        rhs[i] = 1
        t = _min_solution(A, rhs)
        if t is None:
            raise GeometryError(f"no pure error for stabilizer {i}")
        pure.append(t)
    for i in range(6):
        for j in range(i):
            if symplectic(pure[i], pure[j]):
                pure[i] = pure[i] * stabs[j]

    T = to_matrix(pure, NQ)
    C = symplectic_dual(np.vstack([S, T, F]))
    space = gf2.span(gf2.nullspace(C))
    by_edge: dict = {}
    for v in space:
        op = PauliOp.from_vector(v)
        if op.is_identity():
            continue
        sites, plaqs = env.signature(op)
        if len(sites) == 2 and not plaqs:
            e = _coarse_edge(sites)
            if e is not None:
                by_edge.setdefault(e, {}).setdefault("Z", []).append(v)
        elif len(plaqs) == 2 and not sites:
            for e in _edges_between(plaqs):
                by_edge.setdefault(e, {}).setdefault("X", []).append(v)
    edges = sorted(e for e, d in by_edge.items() if "X" in d and "Z" in d)
    if len(edges) != 2:
        raise GeometryError(f"expected 2 logical coarse edges, found {edges}")
    logical_pairs = []
    for e in edges:
        xbar = PauliOp.from_vector(min(by_edge[e]["X"], key=_sort_key))
        zbar = PauliOp.from_vector(min(by_edge[e]["Z"], key=_sort_key))
        logical_pairs.append((xbar, zbar))

    fixed = list(zip(stabs, pure)) + logical_pairs
    cands = []
    for q in geom.shared_slots + geom.interior_slots:
        cands += [PauliOp.single(NQ, q, "X"), PauliOp.single(NQ, q, "Z")]
    edge_pairs = gram_schmidt(cands, fixed)
    if len(edge_pairs) != 4:
        raise GeometryError("could not complete the basis with 4 edge pairs")

    basis = CellBasis(
        geometry=geom,
        stabilizers=tuple(stabs),
        pure_errors=tuple(pure),
        logical_pairs=tuple(logical_pairs),
        edge_pairs=tuple(edge_pairs),
        logical_edges=tuple(edges),
    )
    table = commutation_table(basis.operators())
    if not np.array_equal(table, canonical_form(12)):
        raise GeometryError("derived basis is not canonical")
    return basis


def _edges_between(plaqs):
    (x0, y0), (x1, y1) = plaqs
    out = []
    if x0 == x1 and y1 - y0 == 1:
        out.append(("h", x0, y1))
    if y0 == y1 and x1 - x0 == 1:
        out.append(("v", x1, y0))
    return out


# -- tiling -----------------------------------------------------------------


@dataclass
class TilingReport:
    ell: int
    ncells: int
    covered: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_tiling(ell: int, geom: CellGeometry | None = None) -> TilingReport:
    """Check coverage, ownership, sharing and the neighbour map of the stride-2 tiling."""
    geom = geom or default_geometry()
    lat = TorusLattice(ell)
    s = geom.stride
    report = TilingReport(ell, 0, 0)
    bad = report.violations
    if ell % s:
        bad.append(f"ell={ell} is not a multiple of the stride {s}")
        return report
    if len(geom.edges) != NQ:
        bad.append(f"cell has {len(geom.edges)} edges, expected {NQ}")
    anchors = _anchors(lat, s)
    report.ncells = len(anchors)
    cell_edges = {A: geom.edge_indices(lat, A) for A in anchors}
    incidence = np.zeros(lat.n, dtype=int)
    owners = np.zeros(lat.n, dtype=int)
    owned = set(geom.interior_slots) | set(geom.own_slots)
    for A, idx in cell_edges.items():
        if len(set(idx.tolist())) != len(idx):
            bad.append(f"cell at {A} covers an edge twice")
        np.add.at(incidence, idx, 1)
        np.add.at(owners, idx[sorted(owned)], 1)
        if len(owned) != 8:
            bad.append(f"cell at {A} owns {len(owned)} qubits, expected 8")
        if len(geom.shared_map) != 8:
            bad.append(f"cell at {A} has {len(geom.shared_map)} shared qubits, expected 8")
        for q, ((dx, dy), q2) in geom.shared_map.items():
            B = ((A[0] + dx) % ell, (A[1] + dy) % ell)
            if cell_edges[B][q2] != idx[q]:
                bad.append(f"cell at {A} slot {q}: neighbour {B} slot {q2} is a different edge")
    report.covered = int((incidence > 0).sum())
    for e in np.flatnonzero(incidence == 0):
        bad.append(f"edge {lat.edge_coords(int(e))} is not covered")
    for e in np.flatnonzero(owners != 1):
        if incidence[e]:
            bad.append(f"edge {lat.edge_coords(int(e))} has {owners[e]} owners")
    shared_edges = {int(i) for idx in cell_edges.values() for i in idx[geom.shared_slots]}
    for e in np.flatnonzero(incidence > 2):
        bad.append(f"edge {lat.edge_coords(int(e))} lies in {incidence[e]} cells")
    for e in shared_edges:
        if incidence[e] != 2:
            bad.append(f"shared edge {lat.edge_coords(e)} lies in {incidence[e]} cells")
    return report


def tiling_commutation_violations(basis: CellBasis, ell: int) -> list[str]:
    """Cross-cell commutation checks needed for an exact level-to-level recursion.

    Every pure error must anti-commute with its own stabilizer only, commute
    with every other pure error and with the coarse block stabilizers, and
    every logical must commute with all cell stabilizers.
    """
    geom = basis.geometry
    lat = TorusLattice(ell)
    anchors = _anchors(lat, geom.stride)
    S, T, L = [], [], []
    for A in anchors:
        idx = geom.edge_indices(lat, A)
        S += [_lift(op, idx, lat.n) for op in basis.stabilizers]
        T += [_lift(op, idx, lat.n) for op in basis.pure_errors]
        L += [_lift(op, idx, lat.n) for pair in basis.logical_pairs for op in pair]
    K = list(_block_stabilizers(lat).values()) if ell >= 4 else []
    out = []
    ts = _table(T, S)
    if not np.array_equal(ts, np.eye(len(S), dtype=np.uint8)):
        out.append("pure errors and stabilizers are not dual across cells")
    if _table(T, T).any():
        out.append("pure errors of different cells anti-commute")
    if K and _table(T, K).any():
        out.append("pure errors anti-commute with a coarse stabilizer")
    if _table(L, S).any():
        out.append("a logical anti-commutes with a cell stabilizer")
    return out


def _table(a, b) -> np.ndarray:
    A = to_matrix(a, a[0].n)
    Bd = symplectic_dual(to_matrix(b, b[0].n))
    return (A.astype(np.int64) @ Bd.T.astype(np.int64) & 1).astype(np.uint8)


@dataclass(frozen=True)
class RenormalizedMap:
    """Where each bare cell's logical qubits land on the ``ell/2`` lattice."""

    ell: int
    mapping: dict  # (cell index, logical index) -> coarse edge index

    def sources(self, coarse_cell: int, geom: CellGeometry | None = None) -> dict:
        """Bare cells feeding one coarse cell, with the logical indices each contributes."""
        geom = geom or default_geometry()
        coarse = TorusLattice(self.ell // 2)
        anchors = _anchors(coarse, geom.stride)
        edges = set(geom.edge_indices(coarse, anchors[coarse_cell]).tolist())
        out: dict = {}
        for (c, j), e in sorted(self.mapping.items()):
            if e in edges:
                out.setdefault(c, []).append(j)
        return out

    def correlated_pairs(self, coarse_cell: int, geom: CellGeometry | None = None) -> list[int]:
        """Bare cells contributing both logicals to ``coarse_cell``."""
        return [c for c, js in self.sources(coarse_cell, geom).items() if len(js) == 2]


def renormalized_qubit_map(ell: int, basis: CellBasis | None = None) -> RenormalizedMap:
    if ell < 4:
        raise GeometryError("renormalization needs ell >= 4")
    basis = basis or derive_cell_basis()
    s = basis.geometry.stride
    half = ell // s
    coarse = TorusLattice(half)
    mapping = {}
    for b in range(half):
        for a in range(half):
            for j, (kind, dx, dy) in enumerate(basis.logical_edges):
                mapping[(b * half + a, j)] = coarse.edge(kind, a + dx, b + dy)
    return RenormalizedMap(ell, mapping)

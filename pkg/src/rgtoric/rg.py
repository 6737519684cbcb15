"""Renormalization-group decoding of the toric code.

Each level of the recursion works on a torus of size ``ell``. The lattice is
tiled by overlapping cells; every cell turns its local error model and
syndrome into a distribution over its two logical qubits, which become two
edges of the ``ell/2`` torus. When both logicals of one cell land inside the
same coarse cell their joint distribution is kept, otherwise marginals are
used. At ``ell = 2`` the remaining 8-qubit problem is solved exactly.

Batched arrays carry a leading trial axis ``B`` so several syndromes can be
decoded in one sweep of the cells; trials never interact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import bp, gf2
from .cell import CellBasis, default_geometry, derive_cell_basis
from .kernel import CellKernel, kernel_for
from .lattice import (
    LatticeError,
    Syndrome,
    SyndromeError,
    TorusLattice,
    logical_generators,
    stabilizer_generators,
)
from .noise import CellErrorModel, depolarizing_prior
from .pauli import PauliOp, symplectic_dual, to_matrix


class DecoderSizeError(ValueError):
    pass


# -- single-cell tables -----------------------------------------------------


def reference_error(basis: CellBasis, c: int) -> PauliOp:
    """Product of the pure errors whose stabilizer reads -1 in the 6-bit syndrome ``c``."""
    out = PauliOp(12)
    for i, t in enumerate(basis.pure_errors):
        if (c >> i) & 1:
            out = out * t
    return out


@dataclass(frozen=True)
class ConditionalTable:
    """Normalized P(L, E | c) indexed ``[L, E]``; ``norm`` is the unnormalized total."""

    table: np.ndarray
    norm: float
    degenerate: bool = False


@dataclass(frozen=True)
class Marginals:
    logical: np.ndarray  # (16,)
    logical1: np.ndarray  # (4,)
    logical2: np.ndarray  # (4,)
    factorizes: bool
    edges: np.ndarray  # (4, 4): row j is P(E_j | c)


def _group_codes(gens, bits: int) -> np.ndarray:
    """Letter codes of all 2**len(gens) products, index bit k selects ``gens[k]``."""
    codes = np.array([g.codes() for g in gens], dtype=np.uint8)
    idx = np.arange(1 << bits)
    out = np.zeros((1 << bits, codes.shape[1]), dtype=np.uint8)
    for k in range(bits):
        out ^= ((idx >> k) & 1).astype(np.uint8)[:, None] * codes[k]
    return out


def _logical_gens(basis: CellBasis):
    (X1, Z1), (X2, Z2) = basis.logical_pairs
    return [X1, Z1, X2, Z2]


def _edge_gens(basis: CellBasis):
    return [op for pair in basis.edge_pairs for op in pair]


def _finish(raw: np.ndarray) -> ConditionalTable:
    z = float(raw.sum())
    if z <= 0:
        return ConditionalTable(np.full(raw.shape, 1.0 / raw.size), 0.0, True)
    return ConditionalTable(raw / z, z)


def _literal_table(model: CellErrorModel, basis: CellBasis, c: int) -> np.ndarray:
    logical = _group_codes(_logical_gens(basis), 4)
    edge = _group_codes(_edge_gens(basis), 8)
    stab = _group_codes(basis.stabilizers, 6)
    ref = reference_error(basis, c).codes()
    raw = np.empty((16, 256))
    for k in range(16):
        coset = (logical[k] ^ ref)[None, None, :] ^ edge[:, None, :] ^ stab[None, :, :]
        raw[k] = model.evaluate_codes(coset).sum(axis=1)
    return raw


def _halves(model: CellErrorModel):
    """Split the model's factors into two slot groups of about six qubits."""
    factors = [tuple(f.qubits) for f in model.pairs] + [(q,) for q in sorted(model.priors)]
    factors.sort(key=lambda f: min(f))
    first, second = [], []
    for f in factors:
        (first if len(first) + len(f) <= model.nqubits // 2 and not second else second).extend(f)
    return first, second


def _half_enum(model: CellErrorModel, basis: CellBasis, slots):
    m = len(slots)
    letters = (np.arange(4**m)[:, None] >> (2 * np.arange(m))[None, :]) & 3
    codes = np.zeros((4**m, model.nqubits), dtype=np.uint8)
    codes[:, slots] = letters
    probs = np.ones(4**m)
    for q, prior in model.priors.items():
        if q in slots:
            probs *= prior.probs[codes[:, q]]
    for f in model.pairs:
        a, b = f.qubits
        if a in slots:
            probs *= f.table[codes[:, a], codes[:, b]]
    syn = np.zeros(4**m, dtype=np.int64)
    key = np.zeros(4**m, dtype=np.int64)
    for k, q in enumerate(slots):
        syn ^= basis.syndrome_masks[q][letters[:, k]]
        key ^= basis.logical_masks[q][letters[:, k]] | (basis.edge_masks[q][letters[:, k]] << 4)
    return probs, syn, key


def _fast_table(model: CellErrorModel, basis: CellBasis, c: int) -> np.ndarray:
    first, second = _halves(model)
    pa, sa, ka = _half_enum(model, basis, first)
    pb, sb, kb = _half_enum(model, basis, second)
    raw = np.zeros(16 * 256)
    for s in range(64):
        ia = np.flatnonzero(sa == s)
        ib = np.flatnonzero(sb == (s ^ c))
        if ia.size and ib.size:
            keys = (ka[ia, None] ^ kb[None, ib]).ravel()
            raw += np.bincount(keys, weights=np.outer(pa[ia], pb[ib]).ravel(), minlength=4096)
    # key = L | E << 4
    return raw.reshape(256, 16).T


def cell_conditional(
    model: CellErrorModel,
    basis: CellBasis,
    c: int,
    reweight: dict | None = None,
    method: str = "fast",
) -> ConditionalTable:
    """P(L, E | c) over the 16 logical and 256 edge group elements.

    ``reweight`` maps shared slots to incoming 4-vectors that multiply the
    slot's prior before the sum. ``method="literal"`` sums the 64 stabilizer
    elements of every coset (logical x edge x stabilizer x reference) directly; ``"fast"`` enumerates the
    two halves of the cell and joins them on the syndrome.
    """
    if reweight:
        model = model.reweighted(reweight)
    if method == "literal":
        raw = _literal_table(model, basis, c)
    elif method == "fast":
        raw = _fast_table(model, basis, c)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(raw)


def marginals(table: ConditionalTable | np.ndarray) -> Marginals:
    t = table.table if isinstance(table, ConditionalTable) else np.asarray(table)
    t = t / t.sum()
    logical = t.sum(axis=1)
    joint = logical.reshape(4, 4).T  # [l1, l2]
    l1, l2 = joint.sum(axis=1), joint.sum(axis=0)
    edge = t.sum(axis=0).reshape(4, 4, 4, 4)  # axes: edge pair 4, 3, 2, 1
    edges = np.array([edge.sum(axis=tuple(a for a in range(4) if a != 3 - j)) for j in range(4)])
    return Marginals(logical, l1, l2, bool(np.allclose(np.outer(l1, l2), joint, atol=1e-12)), edges)


# -- lattice levels ---------------------------------------------------------


@dataclass(frozen=True)
class TorusModel:
    """Error model on a whole torus level.

    ``priors`` are per-edge letter marginals, ``(B, n, 4)``. ``joints`` (or
    None at the bottom level) holds ``(B, npairs, 4, 4)`` distributions for the
    edge pairs ``pair_edges`` that came from one cell of the finer level.
    """

    lat: TorusLattice
    priors: np.ndarray
    joints: np.ndarray | None = None
    pair_edges: np.ndarray | None = None

    @classmethod
    def depolarizing(cls, lat: TorusLattice, p: float, batch: int = 1) -> "TorusModel":
        prior = depolarizing_prior(p).probs
        return cls(lat, np.broadcast_to(prior, (batch, lat.n, 4)))


class LevelLayout:
    """Static index tables for one tiled torus size."""

    def __init__(self, ell: int, basis: CellBasis):
        if ell < 4 or ell % 2:
            raise LatticeError("a tiled level needs an even ell >= 4")
        self.lat = lat = TorusLattice(ell)
        self.basis = basis
        self.kernel: CellKernel = kernel_for(basis)
        geom = basis.geometry
        s = geom.stride
        half = ell // s
        self.anchors = [(s * a, s * b) for b in range(half) for a in range(half)]
        C = len(self.anchors)
        self.ncells = C
        self.cell_edges = np.array([geom.edge_indices(lat, A) for A in self.anchors])
        self.cell_sites = np.array([[lat.check_index(A[0] + x, A[1] + y) for x, y in geom.sites] for A in self.anchors])
        self.cell_plaqs = np.array(
            [[lat.check_index(A[0] + x, A[1] + y) for x, y in geom.plaquettes] for A in self.anchors]
        )
        k = self.kernel
        (_, x1, y1), _ = basis.logical_edges
        self.pair_ids = np.array(
            [
                [lat.check_index(A[0] + geom.edges[i][1] - x1, A[1] + geom.edges[i][2] - y1) for i, _ in k.pairs]
                for A in self.anchors
            ]
        )
        self.pair_slot_edges = self.cell_edges[:, np.array(k.pairs)]  # (C, npairs, 2)
        self.single_edges = self.cell_edges[:, k.singles]
        self.shared_edges = self.cell_edges[:, k.shared]
        index = {A: c for c, A in enumerate(self.anchors)}
        route = np.empty(C * len(k.shared), dtype=np.int64)
        for c, A in enumerate(self.anchors):
            for t, q in enumerate(k.shared):
                (dx, dy), q2 = geom.shared_map[q]
                c2 = index[((A[0] + dx) % ell, (A[1] + dy) % ell)]
                route[c * len(k.shared) + t] = c2 * len(k.shared) + k.shared.index(q2)
        self.route = route
        coarse = TorusLattice(half)
        self.coarse_edges = np.array(
            [[coarse.edge(kind, a + dx, b + dy) for kind, dx, dy in basis.logical_edges] for b in range(half) for a in range(half)]
        )

    def cell_syndromes(self, plaq: np.ndarray, site: np.ndarray) -> np.ndarray:
        """(B, C) six-bit syndromes, enclosed sites then enclosed plaquettes."""
        bits = np.concatenate([site[..., self.cell_sites], plaq[..., self.cell_plaqs]], axis=-1)
        return (bits.astype(np.int64) << np.arange(6)).sum(axis=-1)


@lru_cache(maxsize=None)
def level_layout(ell: int, basis: CellBasis) -> LevelLayout:
    return LevelLayout(ell, basis)


def _normalize(v: np.ndarray, axes) -> np.ndarray:
    s = v.sum(axis=axes, keepdims=True)
    return np.where(s > 0, v / np.where(s > 0, s, 1), 1.0 / np.prod([v.shape[a] for a in np.atleast_1d(axes)]))


@dataclass
class Level:
    """One tiled level ready for cell passes."""

    layout: LevelLayout
    pairs: np.ndarray  # (B, C, npairs, 4, 4)
    singles: np.ndarray  # (B, C, nsingles, 4)
    syndromes: np.ndarray  # (B, C)
    shared_prior: np.ndarray  # (B, C, nshared, 4)
    degenerate: int = 0

    @property
    def batch(self) -> int:
        return self.syndromes.shape[0]

    @property
    def ncells(self) -> int:
        return self.layout.ncells

    @property
    def nshared(self) -> int:
        return len(self.layout.kernel.shared)

    def cell_pass(self, messages: np.ndarray | None, posteriors: bool, chunk: int = 1024):
        """Reweight by incoming messages and run the kernel on every cell.

        Returns normalized P(L | c) of shape (B, C, 16) and, if requested,
        normalized shared-slot posteriors (B, C, nshared, 4).
        """
        k = self.layout.kernel
        B, C = self.syndromes.shape
        pairs = self.pairs.reshape(B * C, *self.pairs.shape[2:])
        singles = self.singles.reshape(B * C, *self.singles.shape[2:])
        syn = self.syndromes.reshape(B * C)
        msgs = None if messages is None else messages.reshape(B * C, *messages.shape[2:])
        joint = np.empty((B * C, 16))
        post = np.empty((B * C, self.nshared, 4)) if posteriors else None
        for lo in range(0, B * C, chunk):
            sl = slice(lo, lo + chunk)
            pr, si = pairs[sl], singles[sl]
            if msgs is not None:
                pr, si = k.reweight(pr, si, msgs[sl])
            j, q = k.run(pr, si, syn[sl], posteriors)
            joint[sl] = j
            if posteriors:
                post[sl] = q
        z = joint.sum(axis=1)
        bad = z <= 0
        self.degenerate += int(bad.sum())
        joint = np.where(bad[:, None], 1.0 / 16, joint / np.where(bad, 1, z)[:, None])
        if posteriors:
            post = np.where(bad[:, None, None], 0.25, post / np.where(bad, 1, z)[:, None, None])
            post = post.reshape(B, C, self.nshared, 4)
        return joint.reshape(B, C, 16), post


def build_level(model: TorusModel, plaq: np.ndarray, site: np.ndarray, basis: CellBasis) -> Level:
    layout = level_layout(model.lat.ell, basis)
    priors = np.asarray(model.priors)
    B = max(priors.shape[0], plaq.shape[0])
    priors = np.broadcast_to(priors, (B, *priors.shape[1:]))
    if model.joints is None:
        a = priors[:, layout.pair_slot_edges[..., 0]]
        b = priors[:, layout.pair_slot_edges[..., 1]]
        pairs = a[..., :, None] * b[..., None, :]
    else:
        joints = np.broadcast_to(model.joints, (B, *model.joints.shape[1:]))
        pairs = joints[:, layout.pair_ids]
    singles = priors[:, layout.single_edges]
    plaq = np.broadcast_to(plaq, (B, plaq.shape[-1]))
    site = np.broadcast_to(site, (B, site.shape[-1]))
    return Level(
        layout=layout,
        pairs=np.ascontiguousarray(pairs),
        singles=np.ascontiguousarray(singles),
        syndromes=layout.cell_syndromes(plaq, site),
        shared_prior=priors[:, layout.shared_edges],
    )


@dataclass
class LevelOutcome:
    coarse_model: TorusModel
    coarse_plaq: np.ndarray
    coarse_site: np.ndarray
    cell_syndromes: np.ndarray
    degenerate: int
    bp_changes: list


def renormalize_level(
    model: TorusModel,
    plaq: np.ndarray,
    site: np.ndarray,
    bp_rounds: int = 3,
    basis: CellBasis | None = None,
    damping: float = 0.0,
) -> LevelOutcome:
    """One RG step: belief propagation, cell tables, coarse model and syndromes."""
    basis = basis or derive_cell_basis(default_geometry())
    level = build_level(model, plaq, site, basis)
    layout = level.layout
    msgs, changes = bp.run_bp(level, bp_rounds, damping)
    logical, _ = level.cell_pass(msgs.incoming if bp_rounds > 0 else None, posteriors=False)
    B, C = level.syndromes.shape
    joint = logical.reshape(B, C, 4, 4).swapaxes(-1, -2)  # [l1, l2]
    coarse = TorusLattice(model.lat.ell // 2)
    priors = np.empty((B, coarse.n, 4))
    priors[:, layout.coarse_edges[:, 0]] = joint.sum(axis=-1)
    priors[:, layout.coarse_edges[:, 1]] = joint.sum(axis=-2)
    plaq = np.broadcast_to(plaq, (B, plaq.shape[-1]))
    site = np.broadcast_to(site, (B, site.shape[-1]))
    cp = _block_xor(plaq, model.lat.ell)
    cs = _block_xor(site, model.lat.ell)
    return LevelOutcome(
        coarse_model=TorusModel(coarse, priors, joint, layout.coarse_edges),
        coarse_plaq=cp,
        coarse_site=cs,
        cell_syndromes=level.syndromes,
        degenerate=level.degenerate,
        bp_changes=changes,
    )


def _block_xor(bits: np.ndarray, L: int) -> np.ndarray:
    B = bits.shape[0]
    b = bits.reshape(B, L // 2, 2, L // 2, 2)
    return (b.sum(axis=(2, 4)) & 1).astype(np.uint8).reshape(B, -1)


# -- exact final stage ------------------------------------------------------


@dataclass(frozen=True)
class SmallTorus:
    """Exhaustive coset data for a torus with a 64-element stabilizer group."""

    lat: TorusLattice
    stabilizer_codes: np.ndarray  # (64, n)
    logical_codes: np.ndarray  # (16, n), index = class bits
    pure_codes: np.ndarray  # (6, n)
    independent: tuple  # (site indices, plaquette indices) with pure errors

    def reference_codes(self, plaq: np.ndarray, site: np.ndarray) -> np.ndarray:
        """(B, n) reference errors for batched syndromes."""
        si, pi = self.independent
        bits = np.concatenate([site[..., list(si)], plaq[..., list(pi)]], axis=-1).astype(np.uint8)
        out = np.zeros((*bits.shape[:-1], self.lat.n), dtype=np.uint8)
        for k in range(bits.shape[-1]):
            out ^= bits[..., k, None] * self.pure_codes[k]
        return out


@lru_cache(maxsize=None)
def small_torus(ell: int = 2) -> SmallTorus:
    lat = TorusLattice(ell)
    sites, plaqs = stabilizer_generators(lat)
    gens = sites[:-1] + plaqs[:-1]
    if len(gens) > 6:
        raise DecoderSizeError(f"ell={ell} is too large for exhaustive decoding")
    logs = logical_generators(lat)  # Z1, X1, Z2, X2
    A = symplectic_dual(to_matrix(gens + logs, lat.n))
    pure = []
    for i in range(len(gens)):
        rhs = np.zeros(A.shape[0], dtype=np.uint8)
        rhs[i] = 1
        x0 = gf2.solve(A, rhs)
        cands = gf2.span(gf2.nullspace(A)) ^ x0
        best = min(cands, key=lambda v: (int((v[: lat.n] | v[lat.n :]).sum()), tuple(v)))
        pure.append(PauliOp.from_vector(best).codes())
    Z1, X1, Z2, X2 = logs
    lcodes = _group_codes([X1, Z1, X2, Z2], 4)
    scodes = _group_codes(gens, len(gens))
    n_site = len(sites) - 1
    return SmallTorus(
        lat,
        scodes,
        lcodes,
        np.array(pure, dtype=np.uint8),
        (tuple(range(n_site)), tuple(range(len(plaqs) - 1))),
    )


def torus_class_distribution(model: TorusModel, plaq: np.ndarray, site: np.ndarray) -> np.ndarray:
    """Exact (B, 16) class distribution relative to the reference error on a small torus."""
    st = small_torus(model.lat.ell)
    plaq = np.atleast_2d(plaq)
    site = np.atleast_2d(site)
    ref = st.reference_codes(plaq, site)  # (B, n)
    cosets = st.logical_codes[None, :, None, :] ^ st.stabilizer_codes[None, None, :, :] ^ ref[:, None, None, :]
    priors = np.asarray(model.priors)
    B = max(ref.shape[0], priors.shape[0])
    cosets = np.broadcast_to(cosets, (B, *cosets.shape[1:]))
    b = np.arange(B)[:, None, None]
    prob = np.ones(cosets.shape[:3])
    covered = np.zeros(model.lat.n, dtype=bool)
    if model.joints is not None:
        joints = np.broadcast_to(model.joints, (B, *model.joints.shape[1:]))
        for k, (e1, e2) in enumerate(model.pair_edges):
            prob *= joints[b, k, cosets[..., e1], cosets[..., e2]]
            covered[[e1, e2]] = True
    priors = np.broadcast_to(priors, (B, *priors.shape[1:]))
    for e in np.flatnonzero(~covered):
        prob *= priors[b, e, cosets[..., e]]
    raw = prob.sum(axis=2)
    z = raw.sum(axis=1, keepdims=True)
    return np.where(z > 0, raw / np.where(z > 0, z, 1), 1.0 / 16)


def exact_ml(target, syndrome, model) -> np.ndarray:
    """Exact 16-class distribution for an ``ell = 2`` torus or a single cell.

    ``target`` is a TorusLattice with ``model`` a TorusModel and ``syndrome``
    a Syndrome, or a CellBasis with a CellErrorModel and a 6-bit syndrome.
    """
    if isinstance(target, CellBasis):
        return marginals(_finish(_literal_table(model, target, int(syndrome)))).logical
    if not isinstance(target, TorusLattice):
        raise TypeError("target must be a TorusLattice or a CellBasis")
    if target.ell != 2:
        raise DecoderSizeError("exhaustive torus decoding is limited to ell = 2")
    return torus_class_distribution(model, syndrome.plaquette_bits, syndrome.site_bits)[0]


# -- corrections ------------------------------------------------------------


def _scatter_cells(layout: LevelLayout, contrib: np.ndarray) -> np.ndarray:
    """XOR (B, C, 12) per-cell letter codes onto (B, n) lattice codes."""
    B = contrib.shape[0]
    out = np.zeros((B, layout.lat.n), dtype=np.uint8)
    for s in range(contrib.shape[2]):
        out[:, layout.cell_edges[:, s]] ^= contrib[:, :, s]
    return out


def cell_reference_codes(layout: LevelLayout, syndromes: np.ndarray) -> np.ndarray:
    pe = layout.basis.pure_error_codes
    bits = ((syndromes[..., None] >> np.arange(6)) & 1).astype(np.uint8)
    contrib = np.zeros((*syndromes.shape, 12), dtype=np.uint8)
    for i in range(6):
        contrib ^= bits[..., i, None] * pe[i]
    return _scatter_cells(layout, contrib)


def push_down(layout: LevelLayout, coarse_codes: np.ndarray) -> np.ndarray:
    """Map coarse-lattice letters to the finer lattice via each cell's logical operators."""
    contrib = np.zeros((coarse_codes.shape[0], layout.ncells, 12), dtype=np.uint8)
    for j, (xbar, zbar) in enumerate(layout.basis.logical_pairs):
        letters = coarse_codes[:, layout.coarse_edges[:, j]]
        contrib ^= (letters & 1)[..., None] * xbar.codes().astype(np.uint8)
        contrib ^= (letters >> 1)[..., None] * zbar.codes().astype(np.uint8)
    return _scatter_cells(layout, contrib)


# -- full decoder -----------------------------------------------------------


@dataclass(frozen=True)
class DecoderConfig:
    bp_rounds: int = 3
    damping: float = 0.0
    geometry: str = "staircase"
    verbosity: int = 0

    def basis(self) -> CellBasis:
        if self.geometry != "staircase":
            raise ValueError(f"unknown geometry {self.geometry!r}")
        return derive_cell_basis(default_geometry())


@dataclass
class DecodeResult:
    """Decoder output.

    ``distribution[k]`` is the probability that the residual of the base
    correction (reference errors of every level) lies in class ``k`` of the
    final ``ell = 2`` stage; ``correction`` already includes the chosen class.
    """

    distribution: np.ndarray
    class_index: int
    correction: PauliOp
    diagnostics: dict = field(default_factory=dict)


@dataclass
class BatchResult:
    distributions: np.ndarray  # (B, 16)
    classes: np.ndarray  # (B,)
    corrections: np.ndarray  # (B, n) letter codes
    degenerate: int
    bp_changes: list


def _check_ell(ell: int):
    if ell < 4 or ell & (ell - 1):
        raise LatticeError(f"decoding needs ell a power of two >= 4, got {ell}")


def decode_batch(
    lat: TorusLattice,
    plaq: np.ndarray,
    site: np.ndarray,
    p: float,
    config: DecoderConfig = DecoderConfig(),
) -> BatchResult:
    _check_ell(lat.ell)
    plaq = np.atleast_2d(np.asarray(plaq, dtype=np.uint8))
    site = np.atleast_2d(np.asarray(site, dtype=np.uint8))
    if (plaq.sum(axis=1) % 2).any() or (site.sum(axis=1) % 2).any():
        raise SyndromeError("syndrome has odd parity in a sector")
    basis = config.basis()
    model = TorusModel.depolarizing(lat, p, 1)
    layouts, cell_syn, degenerate, changes = [], [], 0, []
    while model.lat.ell > 2:
        out = renormalize_level(model, plaq, site, config.bp_rounds, basis, config.damping)
        layouts.append(level_layout(model.lat.ell, basis))
        cell_syn.append(out.cell_syndromes)
        degenerate += out.degenerate
        changes.append(out.bp_changes)
        model, plaq, site = out.coarse_model, out.coarse_plaq, out.coarse_site
    dist = torus_class_distribution(model, plaq, site)
    classes = dist.argmax(axis=1)
    st = small_torus(2)
    corr = st.reference_codes(plaq, site) ^ st.logical_codes[classes]
    for layout, syn in zip(reversed(layouts), reversed(cell_syn)):
        corr = push_down(layout, corr) ^ cell_reference_codes(layout, syn)
    return BatchResult(dist, classes, corr, degenerate, changes)


def decode(lat: TorusLattice, syndrome: Syndrome, p: float, config: DecoderConfig = DecoderConfig()) -> DecodeResult:
    if syndrome.plaquette_bits.size != lat.nchecks:
        raise LatticeError("syndrome size does not match the lattice")
    if not syndrome.parity_ok():
        raise SyndromeError("syndrome has odd parity in a sector")
    res = decode_batch(lat, syndrome.plaquette_bits[None], syndrome.site_bits[None], p, config)
    codes = res.corrections[0]
    return DecodeResult(
        distribution=res.distributions[0],
        class_index=int(res.classes[0]),
        correction=PauliOp.from_bits(codes & 1, codes >> 1),
        diagnostics={"degenerate_cells": res.degenerate, "bp_changes": res.bp_changes},
    )

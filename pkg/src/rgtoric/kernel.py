"""Batched cell passes: conditional logical distribution and shared-qubit posteriors.

A cell error ``F`` is determined by its letters on the 12 slots. Its six
syndrome bits and four logical bits are XORs of per-slot contributions, so
the cell's factors are split into two halves of six slots each. Each half is
enumerated once (4096 configurations), histogrammed by (syndrome, logical)
key, and the two histograms are combined at the observed syndrome. All sums
are over nonnegative terms, so no cancellation can occur.

The slot pairs that can carry a joint factor (the pairs that become the two
logicals of one cell of the previous level) always sit in the same half.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numba
import numpy as np
import scipy.sparse as sp

from .cell import CellBasis

NS = 64  # syndrome values
NL = 16  # logical classes


def pair_slots(basis: CellBasis) -> list[tuple[int, int]]:
    """Slot pairs (i, j) whose edges form one renormalized pair of the level."""
    geom = basis.geometry
    (k1, x1, y1), (k2, x2, y2) = basis.logical_edges
    out = []
    for i, (kind, x, y) in enumerate(geom.edges):
        if kind != k1:
            continue
        j = geom.slot_of.get((k2, x + x2 - x1, y + y2 - y1))
        if j is not None:
            out.append((i, j))
    return out


@dataclass
class _Half:
    slots: list  # slot order of the configuration index (most significant first)
    pairs: list  # indices into the kernel's pair list
    singles: list  # indices into the kernel's single list
    shared: list  # slots of this half that are shared, in kernel shared order
    matrix: sp.csr_matrix  # configs -> [key histogram | per-shared-slot (letter, syndrome)]


@numba.njit(cache=True)
def _half_hist(f, k, hist):
    """Enumerate one half made of factors (pair, pair, single, single) into a key histogram."""
    for a in range(16):
        pa = f[0, a]
        if pa == 0.0:
            continue
        for b in range(16):
            pb = pa * f[1, b]
            if pb == 0.0:
                continue
            kb = k[0, a] ^ k[1, b]
            for c in range(4):
                pc = pb * f[2, c]
                kc = kb ^ k[2, c]
                for d in range(4):
                    hist[kc ^ k[3, d]] += pc * f[3, d]


@numba.njit(cache=True)
def _leave_one_out(f, k, skip, out):
    """Syndrome histogram (64 bins) of the half with factor ``skip`` left out."""
    sizes = np.array([16, 16, 4, 4])
    idx = np.zeros(3, dtype=np.int64)
    j = 0
    for m in range(4):
        if m != skip:
            idx[j] = m
            j += 1
    i0, i1, i2 = idx[0], idx[1], idx[2]
    out[:] = 0.0
    for a in range(sizes[i0]):
        pa = f[i0, a]
        if pa == 0.0:
            continue
        for b in range(sizes[i1]):
            pb = pa * f[i1, b]
            if pb == 0.0:
                continue
            kb = k[i0, a] ^ k[i1, b]
            for c in range(sizes[i2]):
                out[(kb ^ k[i2, c]) & 63] += pb * f[i2, c]


@numba.njit(cache=True)
def _run_cells(pairs, singles, syndromes, keys, sh_fac, sh_shift, post_index, want_post, joint, post):
    n = pairs.shape[0]
    nqa = sh_fac.shape[1]
    sizes = np.array([16, 16, 4, 4])
    hist = np.zeros((2, 1024))
    f = np.zeros((2, 4, 16))
    loo = np.zeros((4, 64))
    fold = np.zeros((2, 64))
    for i in range(n):
        hist[:] = 0.0
        for h in range(2):
            f[h, 0] = pairs[i, 2 * h]
            f[h, 1] = pairs[i, 2 * h + 1]
            f[h, 2, :4] = singles[i, 2 * h]
            f[h, 3, :4] = singles[i, 2 * h + 1]
            _half_hist(f[h], keys[h], hist[h])
        s = syndromes[i]
        for L in range(16):
            acc = 0.0
            for lam in range(16):
                ra = lam * 64
                rb = (lam ^ L) * 64
                for sg in range(64):
                    acc += hist[0, ra + sg] * hist[1, rb + (sg ^ s)]
            joint[i, L] = acc
        if not want_post:
            continue
        fold[:] = 0.0
        for lam in range(16):
            for sg in range(64):
                fold[0, sg] += hist[0, lam * 64 + sg]
                fold[1, sg] += hist[1, lam * 64 + sg]
        for h in range(2):
            other = 1 - h
            for m in range(4):
                _leave_one_out(f[h], keys[h], m, loo[m])
            for t in range(nqa):
                m = sh_fac[h, t]
                acc4 = np.zeros(4)
                for e in range(sizes[m]):
                    pe = f[h, m, e]
                    if pe == 0.0:
                        continue
                    ke = keys[h, m, e] & 63
                    acc = 0.0
                    for sg in range(64):
                        acc += loo[m, sg] * fold[other, sg ^ ke ^ s]
                    acc4[(e >> sh_shift[h, t]) & 3] += pe * acc
                for e in range(4):
                    post[i, post_index[h, t], e] = acc4[e]


class CellKernel:
    def __init__(self, basis: CellBasis):
        self.basis = basis
        geom = basis.geometry
        self.pairs = pair_slots(basis)
        paired = {q for pr in self.pairs for q in pr}
        self.singles = [q for q in range(len(geom.edges)) if q not in paired]
        self.shared = geom.shared_slots
        # each half takes the first (second) half of the pairs and of the singles
        hp, hs = len(self.pairs) // 2, len(self.singles) // 2
        first = [("p", k, self.pairs[k]) for k in range(hp)] + [("s", k, (self.singles[k],)) for k in range(hs)]
        second = [("p", k, self.pairs[k]) for k in range(hp, len(self.pairs))]
        second += [("s", k, (self.singles[k],)) for k in range(hs, len(self.singles))]
        self.halves = [self._build_half(first), self._build_half(second)]
        if set(self.halves[0].slots) & set(self.halves[1].slots):
            raise ValueError("halves overlap")
        # position of each shared slot inside its factor, used for reweighting
        self.shared_in_pair = []
        for t, q in enumerate(self.shared):
            for k, (a, b) in enumerate(self.pairs):
                if q in (a, b):
                    self.shared_in_pair.append((t, k, 0 if q == a else 1))
        self.shared_in_single = [(t, self.singles.index(q)) for t, q in enumerate(self.shared) if q in self.singles]
        order = [q for h in self.halves for q in h.shared]
        self.post_order = [order.index(q) for q in self.shared]
        self._setup_compiled()

    def _setup_compiled(self):
        """Tables for the compiled path: each half is exactly (pair, pair, single, single)."""
        self.compiled = all(len(h.pairs) == 2 and len(h.singles) == 2 for h in self.halves) and len(
            {len(h.shared) for h in self.halves}
        ) == 1
        if not self.compiled:
            return
        b = self.basis
        nq = len(self.halves[0].shared)
        keys = np.zeros((2, 4, 16), dtype=np.int64)
        sh_fac = np.zeros((2, nq), dtype=np.int64)
        sh_shift = np.zeros((2, nq), dtype=np.int64)
        post_index = np.zeros((2, nq), dtype=np.int64)
        for h, half in enumerate(self.halves):
            self._check_order(half)
            for f, k in enumerate(half.pairs):
                i, j = self.pairs[k]
                e = np.arange(16)
                keys[h, f] = _key(b, i, e >> 2) ^ _key(b, j, e & 3)
            for f, k in enumerate(half.singles):
                keys[h, 2 + f, :4] = _key(b, self.singles[k], np.arange(4))
            for t, q in enumerate(half.shared):
                post_index[h, t] = self.shared.index(q)
                for f, k in enumerate(half.pairs):
                    if q in self.pairs[k]:
                        sh_fac[h, t] = f
                        sh_shift[h, t] = 2 if q == self.pairs[k][0] else 0
                for f, k in enumerate(half.singles):
                    if q == self.singles[k]:
                        sh_fac[h, t] = 2 + f
        self._keys, self._sh_fac, self._sh_shift, self._post_index = keys, sh_fac, sh_shift, post_index

    def _check_order(self, half: _Half):
        # the compiled path reads pairs 2h, 2h+1 and singles 2h, 2h+1 for half h
        h = self.halves.index(half)
        if half.pairs != [2 * h, 2 * h + 1] or half.singles != [2 * h, 2 * h + 1]:
            self.compiled = False

    def _build_half(self, factors) -> _Half:
        slots = [q for f in factors for q in f[2]]
        m = len(slots)
        letters = (np.arange(4**m)[:, None] >> (2 * np.arange(m - 1, -1, -1))[None, :]) & 3
        syn = np.zeros(4**m, dtype=np.int64)
        lam = np.zeros(4**m, dtype=np.int64)
        for k, q in enumerate(slots):
            syn ^= self.basis.syndrome_masks[q][letters[:, k]]
            lam ^= self.basis.logical_masks[q][letters[:, k]]
        shared = [q for q in self.shared if q in slots]
        rows = [np.arange(4**m)]
        cols = [syn | (lam << 6)]
        for t, q in enumerate(shared):
            rows.append(np.arange(4**m))
            cols.append(NS * NL + t * 4 * NS + letters[:, slots.index(q)] * NS + syn)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        mat = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(4**m, NS * NL + 4 * NS * len(shared))
        )
        return _Half(
            slots=slots,
            pairs=[f[1] for f in factors if f[0] == "p"],
            singles=[f[1] for f in factors if f[0] == "s"],
            shared=shared,
            matrix=mat,
        )

    @cached_property
    def _xor16(self) -> np.ndarray:
        return np.arange(NL)[:, None] ^ np.arange(NL)[None, :]

    def _half_probs(self, half: _Half, pairs: np.ndarray, singles: np.ndarray) -> np.ndarray:
        """Outer product of the half's factors, flattened to (N, 4**m)."""
        N = pairs.shape[0]
        out = np.ones((N, 1))
        for k in half.pairs:
            out = (out[:, :, None] * pairs[:, k].reshape(N, 1, 16)).reshape(N, -1)
        for k in half.singles:
            out = (out[:, :, None] * singles[:, k].reshape(N, 1, 4)).reshape(N, -1)
        return out

    def run(self, pairs: np.ndarray, singles: np.ndarray, syndromes: np.ndarray, posteriors: bool = True):
        """One pass over a flat batch of N cells.

        Args:
            pairs: (N, npairs, 4, 4) slot-pair factors.
            singles: (N, nsingles, 4) single-slot factors.
            syndromes: (N,) six-bit cell syndromes.
            posteriors: also return shared-slot letter marginals.

        Returns:
            (joint, post): unnormalized P(L, c) of shape (N, 16) and, if
            requested, unnormalized P(E_q, c) of shape (N, nshared, 4).
        """
        N = pairs.shape[0]
        syndromes = np.asarray(syndromes, dtype=np.int64)
        if self.compiled:
            joint = np.empty((N, NL))
            post = np.empty((N, len(self.shared), 4))
            _run_cells(
                np.ascontiguousarray(pairs.reshape(N, -1, 16)),
                np.ascontiguousarray(singles),
                syndromes,
                self._keys,
                self._sh_fac,
                self._sh_shift,
                self._post_index,
                posteriors,
                joint,
                post,
            )
            return joint, (post if posteriors else None)
        return self.run_reference(pairs, singles, syndromes, posteriors)

    def run_reference(self, pairs, singles, syndromes, posteriors=True):
        """Vectorized numpy version of ``run``; works for any half layout."""
        N = pairs.shape[0]
        syndromes = np.asarray(syndromes, dtype=np.int64)
        hists = []
        for half in self.halves:
            probs = self._half_probs(half, pairs, singles)
            hists.append(np.asarray(half.matrix.T @ probs.T).T)
        hA = hists[0][:, : NS * NL].reshape(N, NL, NS)
        hB = hists[1][:, : NS * NL].reshape(N, NL, NS)
        gather = np.arange(NS)[None, :] ^ syndromes[:, None]
        hBg = np.take_along_axis(hB, gather[:, None, :], axis=2)
        joint = np.einsum("nls,nlms->nm", hA, hBg[:, self._xor16, :])
        if not posteriors:
            return joint, None
        foldA = np.take_along_axis(hA.sum(axis=1), gather, axis=1)
        foldB = hBg.sum(axis=1)
        post = []
        for h, (half, fold) in enumerate(zip(self.halves, (foldB, foldA))):
            ns = len(half.shared)
            if ns:
                hq = hists[h][:, NS * NL :].reshape(N, ns, 4, NS)
                post.append(np.einsum("nqes,ns->nqe", hq, fold))
        post = np.concatenate(post, axis=1)[:, self.post_order]
        return joint, post

    def reweight(self, pairs: np.ndarray, singles: np.ndarray, messages: np.ndarray):
        """Multiply shared-slot factors by (N, nshared, 4) messages."""
        pairs = pairs.copy()
        singles = singles.copy()
        for t, k, axis in self.shared_in_pair:
            if axis == 0:
                pairs[:, k] *= messages[:, t, :, None]
            else:
                pairs[:, k] *= messages[:, t, None, :]
        for t, k in self.shared_in_single:
            singles[:, k] *= messages[:, t]
        return pairs, singles


def _key(basis: CellBasis, slot: int, letters: np.ndarray) -> np.ndarray:
    return basis.syndrome_masks[slot][letters] | (basis.logical_masks[slot][letters] << 6)


@lru_cache(maxsize=None)
def kernel_for(basis: CellBasis) -> CellKernel:
    return CellKernel(basis)

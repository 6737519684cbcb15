"""Toric-lattice geometry, stabilizers, logicals, syndromes and homology.

Edge indexing on an ``ell x ell`` torus (all coordinates taken mod ell)::

    h(x, y) -> y*ell + x            edge from vertex (x, y) to (x+1, y)
    v(x, y) -> ell**2 + y*ell + x   edge from vertex (x, y) to (x, y+1)

Site ``s(x, y)`` is the vertex (x, y); plaquette ``p(x, y)`` is the face
with lower-left corner (x, y). Both are indexed ``y*ell + x``.

Syndromes are stored as bits, 0 for outcome +1 and 1 for outcome -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .pauli import PauliOp, symplectic


class LatticeError(ValueError):
    pass


class SyndromeError(ValueError):
    pass


@dataclass(frozen=True)
class TorusLattice:
    ell: int

    def __post_init__(self):
        if self.ell < 2:
            raise LatticeError("ell must be at least 2")

    @property
    def n(self) -> int:
        return 2 * self.ell * self.ell

    @property
    def nchecks(self) -> int:
        return self.ell * self.ell

    def h(self, x: int, y: int) -> int:
        L = self.ell
        return (y % L) * L + (x % L)

    def v(self, x: int, y: int) -> int:
        L = self.ell
        return L * L + (y % L) * L + (x % L)

    def edge(self, kind: str, x: int, y: int) -> int:
        return self.h(x, y) if kind == "h" else self.v(x, y)

    def edge_coords(self, e: int) -> tuple[str, int, int]:
        L = self.ell
        if not 0 <= e < self.n:
            raise LatticeError(f"edge {e} out of range")
        kind, r = ("h", e) if e < L * L else ("v", e - L * L)
        return kind, r % L, r // L

    def check_index(self, x: int, y: int) -> int:
        L = self.ell
        return (y % L) * L + (x % L)

    @cached_property
    def site_edges(self) -> np.ndarray:
        """(ell^2, 4) edges adjacent to each vertex."""
        L = self.ell
        out = np.empty((L * L, 4), dtype=np.int64)
        for y in range(L):
            for x in range(L):
                out[y * L + x] = [self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)]
        return out

    @cached_property
    def plaquette_edges(self) -> np.ndarray:
        """(ell^2, 4) boundary edges of each face."""
        L = self.ell
        out = np.empty((L * L, 4), dtype=np.int64)
        for y in range(L):
            for x in range(L):
                out[y * L + x] = [self.h(x, y), self.h(x, y + 1), self.v(x, y), self.v(x + 1, y)]
        return out

    def is_power_of_two(self) -> bool:
        return self.ell & (self.ell - 1) == 0


@dataclass(frozen=True)
class Syndrome:
    plaquette_bits: np.ndarray
    site_bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "plaquette_bits", np.asarray(self.plaquette_bits, dtype=np.uint8) & 1)
        object.__setattr__(self, "site_bits", np.asarray(self.site_bits, dtype=np.uint8) & 1)
        if self.plaquette_bits.shape != self.site_bits.shape:
            raise SyndromeError("sectors differ in size")

    @property
    def ell(self) -> int:
        L = int(round(np.sqrt(self.plaquette_bits.size)))
        if L * L != self.plaquette_bits.size:
            raise SyndromeError("sector size is not a square")
        return L

    @property
    def plaquette_values(self) -> np.ndarray:
        return 1 - 2 * self.plaquette_bits.astype(np.int8)

    @property
    def site_values(self) -> np.ndarray:
        return 1 - 2 * self.site_bits.astype(np.int8)

    def is_trivial(self) -> bool:
        return not (self.plaquette_bits.any() or self.site_bits.any())

    def parity_ok(self) -> bool:
        """Both sectors have an even number of -1 outcomes."""
        return int(self.plaquette_bits.sum()) % 2 == 0 and int(self.site_bits.sum()) % 2 == 0

    def to_string(self) -> str:
        """Row-major bits, plaquette sector then site sector; '1' means -1."""
        return "".join(map(str, self.plaquette_bits)) + "".join(map(str, self.site_bits))

    @classmethod
    def from_string(cls, s: str) -> "Syndrome":
        s = "".join(s.split())
        if len(s) % 2 or set(s) - {"0", "1"}:
            raise SyndromeError("syndrome string must be an even-length bit string")
        bits = np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")
        half = len(s) // 2
        return cls(bits[:half], bits[half:])

    @classmethod
    def trivial(cls, lat: TorusLattice) -> "Syndrome":
        z = np.zeros(lat.nchecks, dtype=np.uint8)
        return cls(z, z.copy())

    def __eq__(self, other):
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.plaquette_bits, other.plaquette_bits) and np.array_equal(
            self.site_bits, other.site_bits
        )

    __hash__ = None


def stabilizer_generators(lat: TorusLattice) -> tuple[list[PauliOp], list[PauliOp]]:
    """Site operators (X on the 4 adjacent edges) and plaquette operators (Z on the 4 boundary edges)."""
    sites = [PauliOp.from_support(lat.n, xs=row) for row in lat.site_edges]
    plaqs = [PauliOp.from_support(lat.n, zs=row) for row in lat.plaquette_edges]
    return sites, plaqs


def logical_generators(lat: TorusLattice) -> list[PauliOp]:
    """``[Z1, X1, Z2, X2]`` straight-loop representatives pinned to row/column 0.

    X1 crosses the vertical edges of row 0 (dual loop around x), Z1 runs up
    column 0; X2 crosses the horizontal edges of column 0, Z2 runs along row 0.
    """
    L, n = lat.ell, lat.n
    X1 = PauliOp.from_support(n, xs=[lat.v(x, 0) for x in range(L)])
    Z1 = PauliOp.from_support(n, zs=[lat.v(0, y) for y in range(L)])
    X2 = PauliOp.from_support(n, xs=[lat.h(0, y) for y in range(L)])
    Z2 = PauliOp.from_support(n, zs=[lat.h(x, 0) for x in range(L)])
    return [Z1, X1, Z2, X2]


def syndrome_bits(lat: TorusLattice, xbits: np.ndarray, zbits: np.ndarray):
    """Vectorized syndrome of arrays shaped ``(..., n)``; returns (plaquette, site) bit arrays."""
    xbits = np.asarray(xbits, dtype=np.uint8)
    zbits = np.asarray(zbits, dtype=np.uint8)
    plaq = np.bitwise_xor.reduce(xbits[..., lat.plaquette_edges], axis=-1)
    site = np.bitwise_xor.reduce(zbits[..., lat.site_edges], axis=-1)
    return plaq, site


def syndrome_of(lat: TorusLattice, error: PauliOp) -> Syndrome:
    if error.n != lat.n:
        raise LatticeError(f"error acts on {error.n} qubits, lattice has {lat.n}")
    plaq, site = syndrome_bits(lat, error.xbits(), error.zbits())
    return Syndrome(plaq, site)


def class_bits(lat: TorusLattice, xbits: np.ndarray, zbits: np.ndarray) -> np.ndarray:
    """Homology class index of (a batch of) syndrome-free operators, unchecked.

    Bit 0: anti-commutes with Z1, bit 1: with X1, bit 2: with Z2, bit 3: with X2.
    """
    L = lat.ell
    xbits = np.asarray(xbits, dtype=np.uint8)
    zbits = np.asarray(zbits, dtype=np.uint8)
    z1 = [lat.v(0, y) for y in range(L)]
    x1 = [lat.v(x, 0) for x in range(L)]
    z2 = [lat.h(x, 0) for x in range(L)]
    x2 = [lat.h(0, y) for y in range(L)]
    b0 = np.bitwise_xor.reduce(xbits[..., z1], axis=-1)
    b1 = np.bitwise_xor.reduce(zbits[..., x1], axis=-1)
    b2 = np.bitwise_xor.reduce(xbits[..., z2], axis=-1)
    b3 = np.bitwise_xor.reduce(zbits[..., x2], axis=-1)
    return b0.astype(np.int64) | (b1 << 1) | (b2 << 2) | (b3 << 3)


def homology_class(lat: TorusLattice, residual: PauliOp) -> int:
    """Class in [0, 16) of a syndrome-free operator; 0 iff it is a stabilizer."""
    if not syndrome_of(lat, residual).is_trivial():
        raise SyndromeError("operator has a nontrivial syndrome")
    bits = 0
    for k, g in enumerate(logical_generators(lat)):
        bits |= symplectic(residual, g) << k
    return bits


def coarse_grain_syndrome(fine: Syndrome, lat: TorusLattice) -> Syndrome:
    """Product of the four fine outcomes in each 2x2 block anchored at even coordinates."""
    L = lat.ell
    if L % 2:
        raise LatticeError("coarse graining needs an even lattice size")
    if L < 4:
        raise LatticeError("coarse graining needs ell >= 4")
    return Syndrome(_block_xor(fine.plaquette_bits, L), _block_xor(fine.site_bits, L))


def _block_xor(bits: np.ndarray, L: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint8).reshape(L // 2, 2, L // 2, 2)
    return (b.sum(axis=(1, 3)) & 1).astype(np.uint8).ravel()

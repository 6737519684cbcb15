"""Phaseless Pauli operators as pairs of bit-packed GF(2) vectors.

A Pauli operator on ``n`` qubits is stored as two Python integers used as
bitsets: bit ``e`` of ``x`` is set when the operator acts as X or Y on qubit
``e``, bit ``e`` of ``z`` when it acts as Z or Y. Phases are never tracked.

Single-qubit letters are coded as ``x + 2*z`` throughout the package::

    I = 0, X = 1, Z = 2, Y = 3

so multiplying letters is XOR of their codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2

LETTERS = "IXZY"
LETTER_CODE = {c: i for i, c in enumerate(LETTERS)}


class PauliDimensionError(ValueError):
    """Operators act on different numbers of qubits."""


class SymplecticStructureError(ValueError):
    """Input set is dependent or not mutually commuting."""


@dataclass(frozen=True)
class PauliOp:
    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", int(self.x))
        object.__setattr__(self, "z", int(self.z))
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if (self.x | self.z) >> self.n:
            raise ValueError("bits set beyond qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOp":
        code = LETTER_CODE[letter]
        return cls(n, (code & 1) << qubit, (code >> 1) << qubit)

    @classmethod
    def from_string(cls, s: str) -> "PauliOp":
        """Parse a string over IXYZ; qubit 0 is the leftmost character."""
        x = z = 0
        for i, c in enumerate(s):
            try:
                code = LETTER_CODE[c]
            except KeyError:
                raise ValueError(f"bad Pauli letter {c!r}") from None
            x |= (code & 1) << i
            z |= (code >> 1) << i
        return cls(len(s), x, z)

    @classmethod
    def from_support(cls, n: int, xs=(), zs=()) -> "PauliOp":
        x = z = 0
        for q in xs:
            x ^= 1 << int(q)
        for q in zs:
            z ^= 1 << int(q)
        return cls(n, x, z)

    @classmethod
    def from_bits(cls, xbits, zbits) -> "PauliOp":
        xbits = np.asarray(xbits, dtype=np.uint8)
        zbits = np.asarray(zbits, dtype=np.uint8)
        if xbits.shape != zbits.shape:
            raise PauliDimensionError("x and z parts differ in length")
        return cls(len(xbits), _pack(xbits), _pack(zbits))

    @classmethod
    def from_vector(cls, v) -> "PauliOp":
        """From a symplectic vector laid out as ``[x_0..x_{n-1}, z_0..z_{n-1}]``."""
        v = np.asarray(v, dtype=np.uint8)
        n = len(v) // 2
        return cls.from_bits(v[:n], v[n:])

    def xbits(self) -> np.ndarray:
        return _unpack(self.x, self.n)

    def zbits(self) -> np.ndarray:
        return _unpack(self.z, self.n)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.xbits(), self.zbits()])

    def letter(self, qubit: int) -> str:
        return LETTERS[self.code(qubit)]

    def code(self, qubit: int) -> int:
        return ((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)

    def codes(self) -> np.ndarray:
        return self.xbits() | (self.zbits() << 1)

    def support(self) -> list[int]:
        s = self.x | self.z
        return [i for i in range(self.n) if (s >> i) & 1]

    def is_identity(self) -> bool:
        return not (self.x or self.z)

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def __str__(self) -> str:
        return "".join(LETTERS[self.code(i)] for i in range(self.n))


def _pack(bits) -> int:
    return int.from_bytes(np.packbits(np.asarray(bits, dtype=np.uint8) & 1, bitorder="little").tobytes(), "little")


def _unpack(word: int, n: int) -> np.ndarray:
    raw = np.frombuffer(word.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()


def _check(a: PauliOp, b: PauliOp):
    if a.n != b.n:
        raise PauliDimensionError(f"operators on {a.n} and {b.n} qubits")


def multiply(a: PauliOp, b: PauliOp) -> PauliOp:
    _check(a, b)
    return PauliOp(a.n, a.x ^ b.x, a.z ^ b.z)


def product(ops, n: int) -> PauliOp:
    x = z = 0
    for op in ops:
        if op.n != n:
            raise PauliDimensionError(f"operator on {op.n} qubits, expected {n}")
        x ^= op.x
        z ^= op.z
    return PauliOp(n, x, z)


def symplectic(a: PauliOp, b: PauliOp) -> int:
    """Symplectic inner product: 1 if the operators anti-commute, else 0."""
    _check(a, b)
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() & 1


def commutes(a: PauliOp, b: PauliOp) -> bool:
    return symplectic(a, b) == 0


def weight(a: PauliOp) -> int:
    return (a.x | a.z).bit_count()


def commutation_table(ops) -> np.ndarray:
    """Matrix of symplectic products between all pairs in ``ops``."""
    ops = list(ops)
    k = len(ops)
    T = np.zeros((k, k), dtype=np.uint8)
    for i in range(k):
        for j in range(i + 1, k):
            T[i, j] = T[j, i] = symplectic(ops[i], ops[j])
    return T


def canonical_form(npairs: int) -> np.ndarray:
    """Commutation table expected for ``[a1, b1, a2, b2, ...]`` conjugate pairs."""
    T = np.zeros((2 * npairs, 2 * npairs), dtype=np.uint8)
    for i in range(npairs):
        T[2 * i, 2 * i + 1] = T[2 * i + 1, 2 * i] = 1
    return T


def to_matrix(ops, n: int) -> np.ndarray:
    ops = list(ops)
    if not ops:
        return np.zeros((0, 2 * n), dtype=np.uint8)
    for op in ops:
        if op.n != n:
            raise PauliDimensionError(f"operator on {op.n} qubits, expected {n}")
    return np.array([op.vector() for op in ops], dtype=np.uint8)


def symplectic_dual(M: np.ndarray) -> np.ndarray:
    """Rows ``v`` mapped to ``Lambda v`` so that ``A @ dual(B).T`` gives commutators."""
    n = M.shape[1] // 2
    return np.hstack([M[:, n:], M[:, :n]])


def _pivot_order(n: int) -> np.ndarray:
    # column permutation x0, z0, x1, z1, ... of the [x | z] layout
    return np.ravel(np.column_stack([np.arange(n), np.arange(n) + n]))


def standard_generators(n: int) -> list[PauliOp]:
    """X_0, Z_0, X_1, Z_1, ... (the fixed pivot order)."""
    out = []
    for q in range(n):
        out.append(PauliOp(n, 1 << q, 0))
        out.append(PauliOp(n, 0, 1 << q))
    return out


def project_out(v: PauliOp, pairs) -> PauliOp:
    """Multiply ``v`` by pair members until it commutes with every pair."""
    for a, b in pairs:
        if symplectic(v, b):
            v = v * a
        if symplectic(v, a):
            v = v * b
    return v


def gram_schmidt(candidates, pairs=()) -> list[tuple[PauliOp, PauliOp]]:
    """Symplectic Gram-Schmidt over ``candidates`` in order.

    Each candidate is first projected off the existing ``pairs``; the first
    surviving candidate becomes a pair's first member, and the next candidate
    that anti-commutes with it becomes the partner. Candidates that commute
    with everything left over are discarded.
    """
    pairs = list(pairs)
    pool = [project_out(c, pairs) for c in candidates]
    out = []
    while pool:
        a = pool.pop(0)
        if a.is_identity():
            continue
        for k, b in enumerate(pool):
            if symplectic(a, b):
                pool.pop(k)
                break
        else:
            continue
        out.append((a, b))
        pool = [project_out(c, [(a, b)]) for c in pool]
    return out


def symplectic_complete(commuting_set, n: int) -> list[tuple[PauliOp, PauliOp]]:
    """Extend independent commuting operators to a full canonical basis.

    Returns ``n`` conjugate pairs. The first ``len(commuting_set)`` pairs
    have the inputs (unchanged, in order) as first members. Remaining pairs
    come from Gram-Schmidt over the standard generators, so the result is
    deterministic.
    """
    S = list(commuting_set)
    m = len(S)
    M = to_matrix(S, n)
    if m > n or gf2.rank(M) != m:
        raise SymplecticStructureError("input operators are not independent")
    if commutation_table(S).any():
        raise SymplecticStructureError("input operators do not commute")

    order = _pivot_order(n)
    A = symplectic_dual(M)[:, order]
    partners = []
    for i in range(m):
        e = np.zeros(m, dtype=np.uint8)
        e[i] = 1
        t = gf2.solve(A, e)
        v = np.zeros(2 * n, dtype=np.uint8)
        v[order] = t
        partners.append(PauliOp.from_vector(v))
    # make partners commute with each other without touching [T_i, S_j]
    for i in range(m):
        for j in range(i):
            if symplectic(partners[i], partners[j]):
                partners[i] = partners[i] * S[j]
    pairs = list(zip(S, partners))
    pairs += gram_schmidt(standard_generators(n), pairs)
    if len(pairs) != n:
        raise SymplecticStructureError("completion did not reach a full basis")
    return pairs

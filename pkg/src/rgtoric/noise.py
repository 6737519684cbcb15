"""Channel priors, error sampling and the per-cell error model.

Probability vectors over single-qubit Paulis are indexed by letter code
(I, X, Z, Y) = (0, 1, 2, 3), matching ``pauli.LETTERS``. Two-qubit joints are
4x4 arrays ``J[a, b]`` over the codes of the first and second qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import TorusLattice
from .pauli import PauliOp

TOL = 1e-12


class ProbabilityError(ValueError):
    pass


def _check_distribution(v: np.ndarray, what: str):
    if np.any(v < 0) or not np.isfinite(v).all():
        raise ProbabilityError(f"{what} has negative or non-finite entries")
    if abs(v.sum() - 1.0) > TOL * max(1, v.size):
        raise ProbabilityError(f"{what} sums to {v.sum()!r}, not 1")


@dataclass(frozen=True)
class QubitPrior:
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.probs, dtype=float).reshape(4)
        _check_distribution(v, "qubit prior")
        object.__setattr__(self, "probs", v)


@dataclass(frozen=True)
class PairFactor:
    qubits: tuple[int, int]
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float).reshape(4, 4)
        _check_distribution(t, "pair factor")
        if self.qubits[0] == self.qubits[1]:
            raise ProbabilityError("pair factor couples a qubit with itself")
        object.__setattr__(self, "table", t)

    def marginals(self) -> tuple[QubitPrior, QubitPrior]:
        return QubitPrior(self.table.sum(axis=1)), QubitPrior(self.table.sum(axis=0))


@dataclass(frozen=True)
class CellErrorModel:
    """Independent priors on single slots plus joint factors on slot pairs."""

    priors: dict = field(default_factory=dict)  # slot -> QubitPrior
    pairs: tuple = ()  # PairFactor over slots
    nqubits: int = 12

    def __post_init__(self):
        covered = list(self.priors)
        for f in self.pairs:
            covered += list(f.qubits)
        if sorted(covered) != list(range(self.nqubits)):
            raise ProbabilityError("every cell qubit must be covered exactly once")

    @classmethod
    def depolarizing(cls, p: float, nqubits: int = 12) -> "CellErrorModel":
        prior = depolarizing_prior(p)
        return cls({q: prior for q in range(nqubits)}, (), nqubits)

    def marginal(self, q: int) -> np.ndarray:
        if q in self.priors:
            return self.priors[q].probs
        for f in self.pairs:
            if q == f.qubits[0]:
                return f.table.sum(axis=1)
            if q == f.qubits[1]:
                return f.table.sum(axis=0)
        raise KeyError(q)

    def reweighted(self, messages: dict) -> "CellErrorModel":
        """Multiply slot priors by incoming messages and renormalize each factor."""
        priors = dict(self.priors)
        for q, m in messages.items():
            if q in priors:
                priors[q] = QubitPrior(_normalized(priors[q].probs * m))
        pairs = []
        for f in self.pairs:
            t = f.table.copy()
            a, b = f.qubits
            if a in messages:
                t = t * np.asarray(messages[a])[:, None]
            if b in messages:
                t = t * np.asarray(messages[b])[None, :]
            pairs.append(PairFactor(f.qubits, _normalized(t)))
        return CellErrorModel(priors, tuple(pairs), self.nqubits)

    def evaluate_codes(self, codes: np.ndarray) -> np.ndarray:
        """Probabilities of a batch of letter-code arrays shaped ``(..., nqubits)``."""
        codes = np.asarray(codes)
        out = np.ones(codes.shape[:-1])
        for q, prior in self.priors.items():
            out = out * prior.probs[codes[..., q]]
        for f in self.pairs:
            a, b = f.qubits
            out = out * f.table[codes[..., a], codes[..., b]]
        return out


def _normalized(v: np.ndarray) -> np.ndarray:
    s = v.sum()
    if s <= 0:
        return np.full(v.shape, 1.0 / v.size)
    return v / s


def depolarizing_prior(p: float) -> QubitPrior:
    if not 0.0 <= p <= 1.0:
        raise ProbabilityError(f"p={p} outside [0, 1]")
    return QubitPrior(np.array([1.0 - p, p / 3, p / 3, p / 3]))


def evaluate(model: CellErrorModel, f: PauliOp) -> float:
    if f.n != model.nqubits:
        raise ProbabilityError(f"operator on {f.n} qubits, model has {model.nqubits}")
    return float(model.evaluate_codes(f.codes()))


def trial_rng(seed, trial: int = 0) -> np.random.Generator:
    """Counter-based stream for trial ``trial`` of master seed ``seed``."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(trial)]))


def sample_codes(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. depolarizing letter codes; one uniform draw per qubit."""
    depolarizing_prior(p)
    u = rng.random(n)
    codes = np.zeros(n, dtype=np.uint8)
    hit = u < p
    if p > 0:
        codes[hit] = 1 + np.minimum((3 * u[hit] / p).astype(np.uint8), 2)
    return codes


def sample_error(lat: TorusLattice, p: float, rng_seed, trial: int = 0) -> PauliOp:
    codes = sample_codes(lat.n, p, trial_rng(rng_seed, trial))
    return PauliOp.from_bits(codes & 1, codes >> 1)

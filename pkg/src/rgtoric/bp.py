"""Belief propagation between overlapping cells of one level.

Every cell sends one message per shared slot: its posterior letter
distribution for that qubit, with the qubit's own prior and the message it
received for it divided out. Messages are routed to the neighbour that holds
the same physical qubit and reweight that neighbour's prior in the next round.
All cells update together (flooding schedule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MessageSet:
    """Incoming messages ``(B, C, nshared, 4)`` after ``t`` rounds."""

    incoming: np.ndarray
    t: int = 0
    zero_messages: int = 0


def init_messages(level) -> MessageSet:
    shape = (level.batch, level.ncells, level.nshared, 4)
    return MessageSet(np.full(shape, 0.25), 0)


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def outgoing(level, msgs: MessageSet):
    """Outgoing messages of every cell, plus the count of all-zero ones."""
    _, post = level.cell_pass(msgs.incoming, posteriors=True)
    out = _safe_divide(post, msgs.incoming * level.shared_prior)
    z = out.sum(axis=-1, keepdims=True)
    zero = z[..., 0] <= 0
    out = np.where(zero[..., None], 0.25, out / np.where(z > 0, z, 1))
    return out, int(zero.sum())


def route(level, out: np.ndarray) -> np.ndarray:
    """Deliver each outgoing message to the neighbour slot holding the same qubit."""
    B = out.shape[0]
    flat = out.reshape(B, -1, 4)
    new = np.empty_like(flat)
    new[:, level.layout.route] = flat
    return new.reshape(out.shape)


def bp_round(msgs: MessageSet, level, damping: float = 0.0) -> MessageSet:
    out, zero = outgoing(level, msgs)
    new = route(level, out)
    if damping:
        new = (1.0 - damping) * new + damping * msgs.incoming
    return MessageSet(new, msgs.t + 1, msgs.zero_messages + zero)


def total_variation(a: np.ndarray, b: np.ndarray) -> float:
    """Largest total-variation distance between corresponding messages."""
    return float(0.5 * np.abs(a - b).sum(axis=-1).max()) if a.size else 0.0


def run_bp(level, rounds: int = 3, damping: float = 0.0):
    """Iterate ``rounds`` flooding rounds from uniform messages.

    Returns the final MessageSet and the per-round total-variation change.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    msgs = init_messages(level)
    changes = []
    for _ in range(rounds):
        new = bp_round(msgs, level, damping)
        changes.append(total_variation(new.incoming, msgs.incoming))
        msgs = new
    return msgs, changes


def changes_csv(changes) -> str:
    """CSV text with one row per (level, round) total-variation change."""
    lines = ["level,round,tv_change"]
    for lvl, row in enumerate(changes):
        for r, v in enumerate(row, 1):
            lines.append(f"{lvl},{r},{v:.6e}")
    return "\n".join(lines) + "\n"

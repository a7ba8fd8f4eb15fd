"""Deterministic random-stream plumbing.

Every randomized operation takes a 64-bit master seed and derives its own
substream from (seed, purpose tag, indices...).  Two rules keep runs
reproducible and components independent:

* named streams come from a Philox generator keyed by the full tuple, so a
  subsystem can draw any amount of randomness without disturbing others;
* per-(vertex, round) flip bits are a pure integer hash of (seed, round,
  vertex), so they can be queried lazily in any order and still agree with
  the declared iid Bernoulli schedule.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Purpose tags.  Distinct constants keep the substreams of different
# subsystems disjoint even when they share a master seed.
TAG_DIGRAPH = 0x11
TAG_GRAPH = 0x12
TAG_GW = 0x13
TAG_RECOLOUR_INIT = 0x21
TAG_RECOLOUR_STEP = 0x22
TAG_BISECT_INIT = 0x31
TAG_PIPELINE = 0x41
TAG_OVERLAP = 0x51


def generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the substream identified by (seed, *key)."""
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, *key) into one 64-bit sub-seed, platform-stably."""
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in key]
    a, b = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)
    return int(a) ^ (int(b) << 1) & _MASK64


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser, vectorised over uint64 arrays
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniform01_hash(seed: int, round_index: int, ids: np.ndarray) -> np.ndarray:
    """Uniform [0,1) numbers that are a pure function of (seed, round, id).

    Used for lazily evaluated flip schedules: the value for a given
    (round, vertex) pair never depends on query order.
    """
    base = (int(seed) ^ ((int(round_index) * 0xE7037ED1A0B428DB) & _MASK64)) & _MASK64
    with np.errstate(over="ignore"):
        h = np.asarray(ids, dtype=np.uint64) * np.uint64(0xA0761D6478BD642F)
        h = h ^ np.uint64(base)
        h = _mix64(_mix64(h))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

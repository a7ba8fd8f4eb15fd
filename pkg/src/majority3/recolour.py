"""Random recolouring processes on digraphs.

Implements the two synchronous dynamics: the simple rule, where every
non-majority vertex keeps re-rolling one of its other two colours, and the
personality-changing rule, where vertices react to a colour newly
overtaking half of their out-neighbourhood, with paranoid/thoughtful moods
governing how eagerly they dodge it.

All per-step updates are computed from the frozen pre-step state; the
per-vertex randomness for step t is a pure function of (seed, t, vertex),
so trajectories are reproducible regardless of evaluation order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import TAG_RECOLOUR_INIT, TAG_RECOLOUR_STEP, derive_seed, generator, uniform01_hash


class RecolourMode(enum.Enum):
    SIMPLE = "simple"
    PERSONALITY_CHANGING = "personality-changing"


class Personality(enum.IntEnum):
    PARANOID = 0
    THOUGHTFUL = 1


@dataclass
class RecolourState:
    """Full per-vertex state of a recolouring run at time t.

    prev_colour holds the colour a vertex wore immediately before its last
    change, and is meaningful only where ever_changed is True (it is 0
    elsewhere).  t follows the convention that the initial colouring is
    time 1 and step s produces the state at time s+1.
    """

    colours: np.ndarray
    personality: np.ndarray
    ever_changed: np.ndarray
    prev_colour: np.ndarray
    t: int

    @property
    def n(self) -> int:
        return self.colours.shape[0]


class TraceRow(NamedTuple):
    t: int
    nonmajority: int
    changed: int
    c1: int
    c2: int
    c3: int


TRACE_FIELDS = ("t", "nonmajority", "changed", "c1", "c2", "c3")


@dataclass
class ProcessTrace:
    rows: list[TraceRow]

    def as_records(self) -> list[dict]:
        return [row._asdict() for row in self.rows]

    def nonmajority_counts(self) -> np.ndarray:
        return np.array([r.nonmajority for r in self.rows], dtype=np.int64)


# ---------------------------------------------------------------------------
# single-vertex introspection
# ---------------------------------------------------------------------------


def vertex_majority_status(d, c: np.ndarray, v: int) -> tuple[bool, int, tuple[int, int, int]]:
    """Majority status of one vertex: (is_majority, same_count, per-colour counts)."""
    nb = d.out_neighbours(v)
    counts = np.bincount(c[nb], minlength=4)
    same = int(counts[c[v]])
    return 2 * same <= nb.size, same, (int(counts[1]), int(counts[2]), int(counts[3]))


def overtake_colour(d, c_prev: np.ndarray, c_cur: np.ndarray, v: int) -> int | None:
    """The colour that newly exceeds half of v's out-neighbourhood, if any.

    Returns the unique colour whose count was at most deg/2 under c_prev
    and exceeds deg/2 under c_cur; None when no colour does.  Uniqueness is
    automatic: two counts cannot both exceed half the degree.
    """
    nb = d.out_neighbours(v)
    deg = nb.size
    prev = np.bincount(c_prev[nb], minlength=4)
    cur = np.bincount(c_cur[nb], minlength=4)
    for col in (1, 2, 3):
        if 2 * prev[col] <= deg and 2 * cur[col] > deg:
            return col
    return None


def defect_2col(d, part: np.ndarray) -> tuple[int, np.ndarray]:
    """Defects of a 2-partition: per vertex, max(same - opposite, 0)."""
    n = d.n
    src, dst = d.arc_arrays()
    same_arc = part[src] == part[dst]
    same = np.bincount(src[same_arc], minlength=n)
    opp = np.bincount(src[~same_arc], minlength=n)
    per_vertex = np.maximum(same - opp, 0)
    return int(per_vertex.sum()), per_vertex


# ---------------------------------------------------------------------------
# the synchronous engine
# ---------------------------------------------------------------------------

_STREAM_CHOICE = 1
_STREAM_COIN = 2


def _colour_counts(n: int, src: np.ndarray, colours: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """cnt[v, c] = number of out-neighbours of v currently coloured c."""
    return np.bincount(src * 4 + colours[dst], minlength=4 * n).reshape(n, 4)


def _others_of(col: np.ndarray, pick_second: np.ndarray) -> np.ndarray:
    """One of the two colours different from col, selected by a boolean."""
    first = col % 3 + 1
    second = (col + 1) % 3 + 1
    return np.where(pick_second, second, first)


def _evolve(g, mode: RecolourMode, steps: int, seed: int):
    """Yield (t, colours, majority, changed_count, state arrays) per time.

    The first yield is the initial time-1 state; each subsequent yield is
    the synchronous result of one step.  Consumers own nothing: arrays are
    live views of the engine's state and must be copied if retained.
    """
    n = g.n
    src, dst = g.arc_arrays()
    deg = g.out_degrees.astype(np.int64)

    rng = generator(seed, TAG_RECOLOUR_INIT)
    colours = rng.integers(1, 4, size=n, dtype=np.int64)
    paranoid = rng.random(n) < (1.0 / 3.0)
    personality = np.where(paranoid, Personality.PARANOID, Personality.THOUGHTFUL).astype(np.int8)
    ever_changed = np.zeros(n, dtype=bool)
    prev_colour = np.zeros(n, dtype=np.int64)

    choice_seed = derive_seed(seed, TAG_RECOLOUR_STEP, _STREAM_CHOICE)
    coin_seed = derive_seed(seed, TAG_RECOLOUR_STEP, _STREAM_COIN)
    ids = np.arange(n, dtype=np.uint64)

    cnt = _colour_counts(n, src, colours, dst)
    same = cnt[np.arange(n), colours]
    majority = 2 * same <= deg
    yield 1, colours, majority, 0, personality, ever_changed, prev_colour

    personality_mode = mode is RecolourMode.PERSONALITY_CHANGING
    for s in range(1, steps + 1):
        pick_second = uniform01_hash(choice_seed, s, ids) >= 0.5
        new_colours = colours.copy()
        new_personality = personality.copy()

        if s == 1 or not personality_mode:
            actors = ~majority
            new_colours[actors] = _others_of(colours[actors], pick_second[actors])
        else:
            # overtaking colour per vertex: at most one colour can newly
            # exceed half the out-degree, so a sum over colours is safe
            gamma = np.zeros(n, dtype=np.int64)
            for col in (1, 2, 3):
                took = (2 * cnt_prev[:, col] <= deg) & (2 * cnt[:, col] > deg)
                gamma[took] = col
            has_ov = gamma > 0

            par_act = has_ov & (personality == Personality.PARANOID)
            new_colours[par_act] = _others_of(gamma[par_act], pick_second[par_act])
            new_personality[par_act] = Personality.THOUGHTFUL

            th = has_ov & (personality == Personality.THOUGHTFUL)
            heads_prob = np.full(n, 0.0)
            heads_prob[~ever_changed] = 0.25  # p* = 1/3
            changed_back = ever_changed & (prev_colour == gamma)
            heads_prob[changed_back] = 0.5  # p* = 0
            coin = uniform01_hash(coin_seed, s, ids) < heads_prob
            th_move = th & ((colours == gamma) | coin)
            new_colours[th_move] = _others_of(gamma[th_move], pick_second[th_move])
            th_stay = th & ~th_move
            new_personality[th_stay] = Personality.PARANOID

        changed = new_colours != colours
        prev_colour[changed] = colours[changed]
        ever_changed |= changed
        colours = new_colours
        personality = new_personality

        cnt_prev = cnt
        cnt = _colour_counts(n, src, colours, dst)
        same = cnt[np.arange(n), colours]
        majority = 2 * same <= deg
        yield s + 1, colours, majority, int(changed.sum()), personality, ever_changed, prev_colour


def run_recolouring(
    g, mode: RecolourMode, steps: int, seed: int
) -> tuple[np.ndarray, ProcessTrace, RecolourState]:
    """Run a recolouring process for `steps` synchronous steps.

    Returns the final colouring, the per-time trace (times 1..steps+1), and
    the full final state (time steps+1).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rows: list[TraceRow] = []
    for t, colours, majority, changed_count, personality, ever_changed, prev_colour in _evolve(
        g, mode, steps, seed
    ):
        sizes = np.bincount(colours, minlength=4)
        rows.append(
            TraceRow(
                t=t,
                nonmajority=int(g.n - majority.sum()),
                changed=changed_count,
                c1=int(sizes[1]),
                c2=int(sizes[2]),
                c3=int(sizes[3]),
            )
        )
    state = RecolourState(
        colours=colours.copy(),
        personality=personality.copy(),
        ever_changed=ever_changed.copy(),
        prev_colour=prev_colour.copy(),
        t=rows[-1].t,
    )
    return state.colours, ProcessTrace(rows), state


def majority_snapshots(
    g, mode: RecolourMode, times: list[int], seed: int
) -> dict[int, np.ndarray]:
    """Per-vertex majority masks at the requested times (time 1 = initial).

    Runs max(times) - 1 steps and copies the majority mask whenever the
    clock hits a requested time; used for root statistics on tree batches.
    """
    wanted = set(times)
    if min(wanted) < 1:
        raise ValueError("times must be >= 1")
    out: dict[int, np.ndarray] = {}
    for t, _colours, majority, _ch, *_ in _evolve(g, mode, max(wanted) - 1, seed):
        if t in wanted:
            out[t] = majority.copy()
    return out

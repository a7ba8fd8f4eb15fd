"""Graph containers and random generators.

Static digraph/graph types backed by flat numpy arrays (CSR-style adjacency),
plus the random models used everywhere else: sparse binomial random digraphs
and graphs sampled by geometric skipping, and Poisson branching trees with
explicit truncation accounting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import TAG_DIGRAPH, TAG_GRAPH, TAG_GW, generator

# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------


class Digraph:
    """Immutable simple digraph: no self-loops, no parallel arcs.

    Antiparallel pairs (u -> v and v -> u) are allowed.  Adjacency is stored
    both ways as CSR arrays with neighbour lists sorted by id.
    """

    __slots__ = ("n", "m", "_out_ptr", "_out_dst", "_in_ptr", "_in_src")

    def __init__(self, n: int, out_ptr, out_dst, in_ptr, in_src):
        self.n = int(n)
        self.m = int(out_dst.size)
        self._out_ptr = out_ptr
        self._out_dst = out_dst
        self._in_ptr = in_ptr
        self._in_src = in_src

    @classmethod
    def from_arcs(cls, n: int, src, dst) -> "Digraph":
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.size != dst.size:
            raise ValueError("src and dst must have equal length")
        if src.size:
            lo = min(src.min(), dst.min())
            hi = max(src.max(), dst.max())
            if lo < 0 or hi >= n:
                raise ValueError(f"arc endpoint out of range for n={n}")
            if np.any(src == dst):
                v = int(src[np.argmax(src == dst)])
                raise ValueError(f"self-loop at vertex {v}")
        order = np.lexsort((dst, src))
        src = src[order]
        dst = dst[order]
        if src.size > 1:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if np.any(dup):
                i = int(np.argmax(dup))
                raise ValueError(f"duplicate arc ({int(src[i])}, {int(dst[i])})")
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
        order_in = np.lexsort((src, dst))
        in_src = src[order_in]
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
        return cls(n, out_ptr, dst, in_ptr, in_src)

    # -- accessors ----------------------------------------------------------

    def out_neighbours(self, v: int) -> np.ndarray:
        return self._out_dst[self._out_ptr[v] : self._out_ptr[v + 1]]

    def in_neighbours(self, v: int) -> np.ndarray:
        return self._in_src[self._in_ptr[v] : self._in_ptr[v + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_ptr)

    def arc_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Arcs as (src, dst) arrays in lexicographic order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees)
        return src, self._out_dst

    def has_arc(self, u: int, v: int) -> bool:
        row = self.out_neighbours(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    def underlying_graph(self) -> "Graph":
        """Undirected graph obtained by forgetting orientations."""
        src, dst = self.arc_arrays()
        return Graph.from_edges(
            self.n, np.minimum(src, dst), np.maximum(src, dst), dedupe=True
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"Digraph(n={self.n}, m={self.m})"


class Graph:
    """Immutable simple undirected graph stored as a unique edge list + CSR."""

    __slots__ = ("n", "m", "_eu", "_ev", "_ptr", "_adj")

    def __init__(self, n, eu, ev, ptr, adj):
        self.n = int(n)
        self.m = int(eu.size)
        self._eu = eu
        self._ev = ev
        self._ptr = ptr
        self._adj = adj

    @classmethod
    def from_edges(cls, n: int, eu, ev, *, dedupe: bool = False) -> "Graph":
        eu = np.asarray(eu, dtype=np.int64).ravel()
        ev = np.asarray(ev, dtype=np.int64).ravel()
        if eu.size != ev.size:
            raise ValueError("eu and ev must have equal length")
        lo = np.minimum(eu, ev)
        hi = np.maximum(eu, ev)
        if eu.size:
            if lo.min() < 0 or hi.max() >= n:
                raise ValueError(f"edge endpoint out of range for n={n}")
            if np.any(lo == hi):
                v = int(lo[np.argmax(lo == hi)])
                raise ValueError(f"self-loop at vertex {v}")
        order = np.lexsort((hi, lo))
        lo = lo[order]
        hi = hi[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(dup):
                if dedupe:
                    keep = np.r_[True, ~dup]
                    lo = lo[keep]
                    hi = hi[keep]
                else:
                    i = int(np.argmax(dup))
                    raise ValueError(f"duplicate edge ({int(lo[i])}, {int(hi[i])})")
        both_src = np.concatenate([lo, hi])
        both_dst = np.concatenate([hi, lo])
        order2 = np.lexsort((both_dst, both_src))
        adj = both_dst[order2]
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both_src[order2], minlength=n), out=ptr[1:])
        return cls(n, lo, hi, ptr, adj)

    # -- accessors ----------------------------------------------------------

    def neighbours(self, v: int) -> np.ndarray:
        return self._adj[self._ptr[v] : self._ptr[v + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._ptr)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique edges as (u, v) arrays with u < v, lexicographic."""
        return self._eu, self._ev

    def adjacency_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Both-direction incidence: (owner, neighbour) sorted by owner."""
        owner = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return owner, self._adj

    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def induced(self, keep_mask: np.ndarray) -> tuple["Graph", np.ndarray]:
        """Induced subgraph on the True vertices, with old-id mapping."""
        keep_mask = np.asarray(keep_mask, dtype=bool)
        ids = np.flatnonzero(keep_mask)
        remap = -np.ones(self.n, dtype=np.int64)
        remap[ids] = np.arange(ids.size)
        sel = keep_mask[self._eu] & keep_mask[self._ev]
        sub = Graph.from_edges(ids.size, remap[self._eu[sel]], remap[self._ev[sel]])
        return sub, ids

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class RootedTreeDigraph:
    """A tree digraph with arcs oriented away from the root.

    ``depth[v]`` is the arc-distance from the root; every non-root vertex has
    in-degree exactly 1.  ``truncated`` records whether the vertex budget cut
    generation short.
    """

    digraph: Digraph
    root: int
    depth: np.ndarray
    truncated: bool

    @property
    def n(self) -> int:
        return self.digraph.n


# ---------------------------------------------------------------------------
# binomial random digraphs / graphs by geometric skipping
# ---------------------------------------------------------------------------


def _skip_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted positions of successes among `total` iid Bernoulli(p) slots.

    Walks the slots with geometric jumps, so the cost is O(#successes)
    instead of O(total).
    """
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    out = []
    pos = -1
    # draw jumps in batches; expected successes ~ total * p
    batch = max(1024, int(total * p * 1.1) + 16)
    while True:
        jumps = rng.geometric(p, size=batch).astype(np.int64)
        steps = np.cumsum(jumps) + pos
        if steps[-1] >= total:
            out.append(steps[steps < total])
            break
        out.append(steps)
        pos = int(steps[-1])
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def gen_digraph(n: int, p: float, seed: int) -> Digraph:
    """Sample a binomial random digraph: each ordered pair independently w.p. p."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"arc probability p={p} outside [0, 1]")
    rng = generator(seed, TAG_DIGRAPH)
    ks = _skip_positions(n * (n - 1), p, rng)
    src = ks // (n - 1) if n > 1 else np.empty(0, dtype=np.int64)
    r = ks - src * (n - 1)
    dst = r + (r >= src)
    return Digraph.from_arcs(n, src, dst)


def gen_graph(n: int, p: float, seed: int) -> Graph:
    """Sample a binomial random graph: each unordered pair independently w.p. p."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability p={p} outside [0, 1]")
    rng = generator(seed, TAG_GRAPH)
    ks = _skip_positions(n * (n - 1) // 2, p, rng)
    # invert the triangular indexing: offset(u) = u*(2n-u-1)/2 positions
    # precede the block of pairs whose smaller endpoint is u
    kf = ks.astype(np.float64)
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * kf)) / 2.0).astype(
        np.int64
    )
    u = np.clip(u, 0, max(n - 2, 0))

    def offset(x):
        return x * (2 * n - x - 1) // 2

    # float sqrt can be off by one either way; fix up exactly
    for _ in range(4):
        too_hi = offset(u) > ks
        too_lo = offset(u + 1) <= ks
        if not (too_hi.any() or too_lo.any()):
            break
        u = u - too_hi + too_lo
    ev = u + 1 + (ks - offset(u))
    return Graph.from_edges(n, u, ev)


# ---------------------------------------------------------------------------
# Poisson branching trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GWForest:
    """A batch of independent Poisson branching trees in flat-array form.

    Vertices are numbered in generation order across the whole forest;
    ``parent`` is -1 for roots.  ``truncated[t]`` says tree t hit the
    per-tree vertex budget before exhausting generation ``max_depth``.
    """

    n_trees: int
    parent: np.ndarray  # int64, -1 at roots
    depth: np.ndarray  # int32
    tree_id: np.ndarray  # int64
    truncated: np.ndarray  # bool per tree

    @property
    def n(self) -> int:
        return self.parent.size

    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == -1)

    def arc_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Parent-to-child arcs."""
        child = np.flatnonzero(self.parent >= 0)
        return self.parent[child], child

    @property
    def out_degrees(self) -> np.ndarray:
        """Number of children per vertex."""
        return np.bincount(self.parent[self.parent >= 0], minlength=self.n)


def gen_gw_forest(
    lam: float,
    max_depth: int,
    n_trees: int,
    max_vertices: int,
    seed: int,
) -> GWForest:
    """Sample ``n_trees`` independent Poisson(lam) branching trees.

    Each tree is generated breadth-first down to ``max_depth`` generations.
    Once a tree holds ``max_vertices`` vertices, further children in that
    tree are dropped and the tree is flagged truncated.  Offspring counts are
    drawn in BFS order within each generation, so a single-tree forest
    reproduces ``gen_gw_tree`` exactly.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if max_depth < 0 or n_trees <= 0 or max_vertices < 1:
        raise ValueError("max_depth >= 0, n_trees >= 1, max_vertices >= 1 required")
    rng = generator(seed, TAG_GW)

    parent_chunks = [np.full(n_trees, -1, dtype=np.int64)]
    depth_chunks = [np.zeros(n_trees, dtype=np.int32)]
    tree_chunks = [np.arange(n_trees, dtype=np.int64)]
    sizes = np.ones(n_trees, dtype=np.int64)
    truncated = np.zeros(n_trees, dtype=bool)

    cur_ids = np.arange(n_trees, dtype=np.int64)
    cur_tree = np.arange(n_trees, dtype=np.int64)
    total = n_trees

    for g in range(max_depth):
        if cur_ids.size == 0:
            break
        k = rng.poisson(lam, size=cur_ids.size).astype(np.int64)
        # segmented prefix of k within each tree (cur arrays are tree-sorted)
        csum = np.cumsum(k)
        prior_global = csum - k
        seg_starts = np.flatnonzero(np.r_[True, cur_tree[1:] != cur_tree[:-1]])
        seg_lens = np.diff(np.r_[seg_starts, cur_tree.size])
        prior_in_tree = prior_global - np.repeat(prior_global[seg_starts], seg_lens)
        remaining = np.repeat(
            max_vertices - sizes[cur_tree[seg_starts]], seg_lens
        )
        kept = np.clip(remaining - prior_in_tree, 0, k)
        cut = kept < k
        if cut.any():
            np.logical_or.at(truncated, cur_tree[cut], True)
        kept_per_tree = np.add.reduceat(kept, seg_starts)
        sizes[cur_tree[seg_starts]] += kept_per_tree

        n_new = int(kept.sum())
        if n_new == 0:
            cur_ids = np.empty(0, dtype=np.int64)
            break
        new_parent = np.repeat(cur_ids, kept)
        new_tree = np.repeat(cur_tree, kept)
        new_ids = np.arange(total, total + n_new, dtype=np.int64)
        parent_chunks.append(new_parent)
        depth_chunks.append(np.full(n_new, g + 1, dtype=np.int32))
        tree_chunks.append(new_tree)
        total += n_new
        cur_ids = new_ids
        cur_tree = new_tree

    return GWForest(
        n_trees=n_trees,
        parent=np.concatenate(parent_chunks),
        depth=np.concatenate(depth_chunks),
        tree_id=np.concatenate(tree_chunks),
        truncated=truncated,
    )


def gen_gw_tree(
    lam: float, max_depth: int, max_vertices: int, seed: int
) -> RootedTreeDigraph:
    """Sample one Poisson(lam) branching tree as a rooted digraph.

    Arcs point from parents to children; the root is vertex 0.
    """
    forest = gen_gw_forest(lam, max_depth, 1, max_vertices, seed)
    src, dst = forest.arc_arrays()
    d = Digraph.from_arcs(forest.n, src, dst)
    return RootedTreeDigraph(
        digraph=d, root=0, depth=forest.depth.copy(), truncated=bool(forest.truncated[0])
    )


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------


def serialize_edge_list(g: Digraph | Graph) -> str:
    """Canonical text form: header line, then one sorted pair per line."""
    if isinstance(g, Digraph):
        src, dst = g.arc_arrays()
        kind = "digraph"
    elif isinstance(g, Graph):
        src, dst = g.edge_arrays()
        kind = "graph"
    else:
        raise TypeError(f"cannot serialize {type(g).__name__}")
    lines = [f"{kind} {g.n} {g.m}"]
    lines.extend(f"{int(u)} {int(v)}" for u, v in zip(src, dst))
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Digraph | Graph:
    """Parse the canonical edge-list format, with 1-based line diagnostics.

    Lines starting with ``#`` are comments; blank lines are ignored.
    """
    numbered = [
        (i + 1, line.strip())
        for i, line in enumerate(text.splitlines())
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not numbered:
        raise ValueError("empty input: missing header line")
    hline, header = numbered[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] not in ("digraph", "graph"):
        raise ValueError(f"malformed header at line {hline}: {header!r}")
    kind = parts[0]
    try:
        n, m = int(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"malformed header at line {hline}: {header!r}") from None
    if n < 0 or m < 0:
        raise ValueError(f"malformed header at line {hline}: negative count")

    word = "arc" if kind == "digraph" else "edge"
    if len(numbered) - 1 != m:
        raise ValueError(
            f"header promises {m} {word}s but found {len(numbered) - 1}"
        )
    us = np.empty(m, dtype=np.int64)
    vs = np.empty(m, dtype=np.int64)
    seen: set[tuple[int, int]] = set()
    for row, (lineno, line) in enumerate(numbered[1:]):
        toks = line.split()
        if len(toks) != 2:
            raise ValueError(f"malformed {word} at line {lineno}: {line!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise ValueError(f"malformed {word} at line {lineno}: {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex id out of range at line {lineno}")
        if u == v:
            raise ValueError(f"self-loop at line {lineno}")
        key = (u, v) if kind == "digraph" else (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"duplicate {word} at line {lineno}")
        seen.add(key)
        us[row], vs[row] = u, v
    if kind == "digraph":
        return Digraph.from_arcs(n, us, vs)
    return Graph.from_edges(n, us, vs)


# ---------------------------------------------------------------------------
# short directed cycles
# ---------------------------------------------------------------------------


def count_cycles_upto(d: Digraph, max_len: int) -> int:
    """Number of vertices lying on at least one directed cycle of length <= max_len.

    Exhaustive path enumeration; guarded to short lengths because the cost
    grows like (mean degree) ** max_len per vertex.
    """
    if max_len > 12:
        raise ValueError(f"max_len={max_len} exceeds the enumeration guard (12)")
    if max_len < 2 or d.n == 0:
        return 0
    adj = [d.out_neighbours(v) for v in range(d.n)]
    on_cycle = np.zeros(d.n, dtype=bool)
    on_path = np.zeros(d.n, dtype=bool)
    path: list[int] = []

    def dfs(v: int, start: int, depth: int) -> None:
        for w in adj[v]:
            w = int(w)
            if w == start:
                on_cycle[path] = True
            elif w > start and depth < max_len - 1 and not on_path[w]:
                on_path[w] = True
                path.append(w)
                dfs(w, start, depth + 1)
                path.pop()
                on_path[w] = False

    for s in range(d.n):
        on_path[s] = True
        path.append(s)
        dfs(s, s, 1)
        path.pop()
        on_path[s] = False
    return int(on_cycle.sum())

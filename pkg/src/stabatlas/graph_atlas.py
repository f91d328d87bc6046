"""Cayley, reachability and contracted graphs.

* A reachability graph has one vertex per left coset ``g K`` of the
  stabilizer ``K`` of a state, i.e. one vertex per state in the orbit, and an
  arrow ``gK -> a g K`` for each generator ``a``.
* A contracted graph merges the vertices of a reachability graph that differ
  by a local (tensor-product) element: its vertices are the double cosets
  ``L \\ G / K`` where ``L`` is the local subgroup.  Local gates cannot change
  entanglement, so each vertex carries a single entropy vector.

Vertex 0 always holds the input state.  All other orderings follow element
indices, so exports are byte-stable.
"""

from __future__ import annotations

import io
import json
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from .entropy_lab import EntropyVector, representative_subsets
from .group_engine import (
    GroupError,
    SubgroupTable,
    close_subgroup,
    double_cosets,
    left_cosets,
    local_subgroup,
    stabilizer_subgroup,
)
from .stab_census import enumerate_stabilizer_states
from .state_space import DenseState

__all__ = [
    "QuotientGraph",
    "batch_entropy_vectors",
    "cayley_graph",
    "contracted_graph",
    "export_graph",
    "graph_metrics",
    "load_named_state",
    "orbit_partition_census",
    "orbit_states",
    "reachability_graph",
]

GENERATOR_COLORS = {
    "H1": "red",
    "H2": "blue",
    "P1": "darkgreen",
    "P2": "orange",
    "C12": "purple",
    "C21": "brown",
}
PALETTE = [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
    "#9a6324", "#fffac8", "#800000", "#aaffc3", "#808000", "#ffd8b1",
    "#000075", "#808080",
]
COLOR_DECIMALS = 7


@dataclass
class QuotientGraph:
    """Vertices, generator-labelled edges and entropy colouring."""

    kind: str
    vertex_reps: list[int]
    vertex_sizes: list[int]
    edges: list[tuple[int, int, str]]
    coloring: list[int] = field(default_factory=list)
    palette: list[tuple[float, ...]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    words: list[str] = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_reps)

    @property
    def n_colors(self) -> int:
        return len(set(self.coloring))

    def self_loops(self) -> list[tuple[int, int, str]]:
        return [e for e in self.edges if e[0] == e[1]]

    def to_networkx(self, directed: bool = True) -> nx.Graph:
        g = nx.DiGraph() if directed else nx.Graph()
        for v in range(self.n_vertices):
            attrs = {"size": self.vertex_sizes[v], "word": self.words[v] if self.words else ""}
            if self.coloring:
                attrs["color"] = self.coloring[v]
                attrs["entropy"] = ",".join(f"{c:.6f}" for c in self.palette[self.coloring[v]])
            g.add_node(v, **attrs)
        labels: dict[tuple[int, int], set[str]] = defaultdict(set)
        for u, v, lab in self.edges:
            labels[(u, v)].add(lab)
        for (u, v), labs in sorted(labels.items()):
            g.add_edge(u, v, label=",".join(sorted(labs)))
        return g


# ---------------------------------------------------------------------------
# Entropy helpers


def batch_entropy_vectors(amps: np.ndarray, n: int, threads: int = 1) -> np.ndarray:
    """Entropy vectors (bits) for a stack of ``(m, 2**n)`` pure states.

    ``threads > 1`` splits the stack into contiguous chunks; results are
    concatenated in input order, so the output does not depend on it.
    """
    amps = np.asarray(amps, complex)
    if threads > 1 and len(amps) > 1:
        chunks = np.array_split(amps, min(threads, len(amps)))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: batch_entropy_vectors(c, n), chunks))
        return np.concatenate(parts)
    m = amps.shape[0]
    t = amps.reshape((m,) + (2,) * n)
    cols = []
    for sub in representative_subsets(n):
        axes = [1 + n - q for q in sub]
        rest = [a for a in range(1, n + 1) if a not in axes]
        mat = np.transpose(t, [0] + axes + rest).reshape(m, 2 ** len(sub), -1)
        rho = mat @ np.conj(np.swapaxes(mat, 1, 2))
        lam = np.clip(np.linalg.eigvalsh(rho), 0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(lam > 1e-15, -lam * np.log2(lam), 0.0)
        cols.append(terms.sum(axis=1))
    return np.clip(np.stack(cols, axis=1), 0, None)


def _color_classes(vectors: np.ndarray) -> tuple[list[int], list[tuple[float, ...]]]:
    """Group rows by value; audits that grouping is unambiguous."""
    keys = [tuple(np.round(v, COLOR_DECIMALS) + 0.0) for v in vectors]
    palette: dict[tuple[float, ...], int] = {}
    coloring = []
    for k in keys:
        if k not in palette:
            palette[k] = len(palette)
        coloring.append(palette[k])
    reps = np.array(list(palette))
    for i, j in combinations(range(len(reps)), 2):
        if np.max(np.abs(reps[i] - reps[j])) < 1e-5:
            raise GroupError("entropy vectors too close to separate reliably")
    spread = max(
        (np.max(np.abs(vectors[i] - reps[c])) for i, c in enumerate(coloring)), default=0.0
    )
    if spread > 1e-7:
        raise GroupError("entropy grouping is ambiguous at the chosen tolerance")
    return coloring, [tuple(float(x) for x in r) for r in reps]


def orbit_states(table: SubgroupTable, indices: Sequence[int], state: DenseState) -> np.ndarray:
    """Amplitudes of ``elements[i] |state>`` for each index, acting on qubits 1, 2."""
    n = state.n_qubits
    psi = state.matricize((1, 2))  # rows in kron(q1, q2) order
    mats = table.float_matrices[list(indices)]
    out = mats @ psi  # (m, 4, rest)
    m = out.shape[0]
    # rows of psi enumerate (q1, q2); columns enumerate qubits 3..n with qubit n slowest
    t = out.reshape((m, 2, 2) + (2,) * (n - 2))
    # axes: 1 -> q1, 2 -> q2, 3 -> q3, ..., want order q_n ... q_1
    order = [0] + list(range(n, 2, -1)) + [2, 1]
    return np.transpose(t, order).reshape(m, -1)


# ---------------------------------------------------------------------------
# Graph builders


def cayley_graph(table: SubgroupTable) -> QuotientGraph:
    """Vertices are group elements; arrows are right multiplication by generators."""
    edges = []
    for g in table.generator_set:
        act = table.right_action[g]
        edges.extend((i, int(act[i]), g) for i in range(table.order))
    edges.sort()
    return QuotientGraph(
        "cayley",
        list(range(table.order)),
        [1] * table.order,
        edges,
        metadata={
            "group": "".join(table.generator_set),
            "mod_phase": table.mod_phase,
            "order": table.order,
            "root": table.identity_index,
        },
        words=[table.word_string(i) for i in range(table.order)],
    )


def _ordered_classes(classes: list[tuple[int, ...]], identity: int) -> list[tuple[int, ...]]:
    first = [c for c in classes if identity in c]
    rest = sorted((c for c in classes if identity not in c), key=lambda c: c[0])
    return first + rest


def reachability_graph(
    table: SubgroupTable,
    state: DenseState,
    tolerance: float = 1e-9,
    state_label: str = "state",
    with_colors: bool = True,
    threads: int = 1,
) -> QuotientGraph:
    """Left-coset quotient of the Cayley graph by the state's stabilizer."""
    stab = stabilizer_subgroup(table, state, tolerance)
    cos = left_cosets(table, stab)
    ident = table.identity_index
    classes = _ordered_classes(cos.classes, ident)
    class_of = np.empty(table.order, dtype=np.int64)
    for c, members in enumerate(classes):
        class_of[list(members)] = c
    reps = [c[0] if ident not in c else ident for c in classes]
    edges = []
    for g in table.generator_set:
        act = table.left_action[g]
        for v, r in enumerate(reps):
            edges.append((v, int(class_of[act[r]]), g))
    edges.sort()
    amps = orbit_states(table, reps, state)
    keys = {DenseState.from_unnormalized(a).key(6) for a in amps}
    if len(keys) != len(reps):
        raise GroupError("coset count and distinct orbit states disagree")
    graph = QuotientGraph(
        "reachability",
        reps,
        [len(c) for c in classes],
        edges,
        metadata={
            "group": "".join(table.generator_set),
            "state": state_label,
            "stabilizer_order": len(stab),
            "group_order": table.order,
            "stabilizer_words": [table.word_string(i) for i in stab],
            "qubit_order": "basis index bit j is qubit j+1",
        },
        words=[table.word_string(r) for r in reps],
    )
    if with_colors and state.n_qubits >= 2:
        graph.coloring, graph.palette = _color_classes(
            batch_entropy_vectors(amps, state.n_qubits, threads)
        )
    graph.metadata["class_of"] = class_of
    return graph


def contracted_graph(
    table: SubgroupTable,
    state: DenseState,
    tolerance: float = 1e-9,
    state_label: str = "state",
    threads: int = 1,
) -> QuotientGraph:
    """Double-coset quotient ``Local \\ G / Stab`` with entropy colouring."""
    reach = reachability_graph(table, state, tolerance, state_label, threads=threads)
    stab = stabilizer_subgroup(table, state, tolerance)
    local = local_subgroup(table)
    dc = double_cosets(table, local, stab)
    ident = table.identity_index
    classes = _ordered_classes(dc.classes, ident)
    class_of = np.empty(table.order, dtype=np.int64)
    for c, members in enumerate(classes):
        class_of[list(members)] = c
    # colours: every reachability vertex inside a class must share one colour
    reach_class = reach.metadata["class_of"]
    colors_in: dict[int, set[int]] = defaultdict(set)
    for c, members in enumerate(classes):
        for x in members:
            colors_in[c].add(reach.coloring[reach_class[x]])
    mixed = [c for c, s in colors_in.items() if len(s) != 1]
    if mixed:
        raise GroupError(f"contracted classes {mixed} mix entropy vectors")
    edge_labels: dict[tuple[int, int], set[str]] = defaultdict(set)
    for g in table.generator_set:
        act = table.left_action[g]
        for x in range(table.order):
            a, b = int(class_of[x]), int(class_of[act[x]])
            if a != b:
                edge_labels[(min(a, b), max(a, b))].add(g)
    edges = [(u, v, ",".join(sorted(l))) for (u, v), l in sorted(edge_labels.items())]
    reps = [c[0] if ident not in c else ident for c in classes]
    vertex_colors = [next(iter(colors_in[c])) for c in range(len(classes))]
    used = sorted(set(vertex_colors), key=vertex_colors.index)
    remap = {old: new for new, old in enumerate(used)}
    return QuotientGraph(
        "contracted",
        reps,
        [len(c) for c in classes],
        edges,
        coloring=[remap[c] for c in vertex_colors],
        palette=[reach.palette[c] for c in used],
        metadata={
            "group": "".join(table.generator_set),
            "state": state_label,
            "stabilizer_order": len(stab),
            "local_order": len(local),
            "reachability_vertices": reach.n_vertices,
            "qubit_order": "basis index bit j is qubit j+1",
        },
        words=[table.word_string(r) for r in reps],
    )


# ---------------------------------------------------------------------------
# Metrics


def graph_metrics(g: QuotientGraph, directed: bool | None = None) -> dict:
    """Diameter, sizes, per-generator fixed points and a WL hash.

    Cayley graphs default to directed distances from the root (the identity);
    quotient graphs use the undirected edge support.
    """
    if directed is None:
        directed = g.kind == "cayley"
    if directed:
        root = g.metadata.get("root", 0)
        adj: dict[int, list[int]] = defaultdict(list)
        for u, v, _ in g.edges:
            adj[u].append(v)
        dist = {root: 0}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if len(dist) != g.n_vertices:
            raise GroupError("graph is not connected from its root")
        diameter = max(dist.values())
    else:
        und = nx.Graph()
        und.add_nodes_from(range(g.n_vertices))
        und.add_edges_from((u, v) for u, v, _ in g.edges if u != v)
        if not nx.is_connected(und):
            raise GroupError("graph is disconnected")
        diameter = nx.diameter(und) if g.n_vertices > 1 else 0
    fixed = Counter(lab for u, v, lab in g.edges if u == v)
    wl = nx.weisfeiler_lehman_graph_hash(
        g.to_networkx(directed=True), edge_attr="label", iterations=4
    )
    return {
        "diameter": int(diameter),
        "vertices": g.n_vertices,
        "edges": len(g.edges),
        "colors": g.n_colors,
        "fixed_points": dict(sorted(fixed.items())),
        "wl_hash": wl,
    }


# ---------------------------------------------------------------------------
# Orbit partition census


def _stack_keys(amps: np.ndarray) -> list[bytes]:
    idx = np.argmax(np.abs(amps) > 1e-9, axis=1)
    first = amps[np.arange(len(amps)), idx]
    canon = amps * (np.abs(first) / first)[:, None]
    canon = np.round(canon, 6) + (0.0 + 0.0j)
    return [row.tobytes() for row in canon]


def _apply_two_qubit(amps: np.ndarray, n: int, u: np.ndarray) -> np.ndarray:
    m = amps.shape[0]
    t = amps.reshape((m,) + (2,) * n)
    # qubit q lives on axis 1 + n - q
    t = np.moveaxis(t, [n, n - 1], [1, 2])
    shape = t.shape
    t = np.einsum("ab,mbr->mar", u, t.reshape(m, 4, -1)).reshape(shape)
    return np.moveaxis(t, [1, 2], [n, n - 1]).reshape(m, -1)


def orbit_partition_census(n: int, table: SubgroupTable | None = None) -> dict[int, int]:
    """Tally of orbit sizes of all n-qubit stabilizer states under ``table``.

    Defaults to ``<H1, H2, C12, C21>`` acting on qubits 1 and 2.
    """
    if not 2 <= n <= 4:
        raise ValueError("orbit partition census supports 2 <= n <= 4")
    if table is None:
        table = close_subgroup(["H1", "H2", "C12", "C21"], mod_phase=True)
    amps = np.stack([t.to_dense().amplitudes for t in enumerate_stabilizer_states(n)])
    keys = _stack_keys(amps)
    index = {k: i for i, k in enumerate(keys)}
    if len(index) != len(keys):
        raise GroupError("duplicate stabilizer states in enumeration")
    parent = np.arange(len(keys))

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    from .clifford_core import gate

    for name in table.generator_set:
        moved = _apply_two_qubit(amps, n, gate(name, 2).to_numpy())
        for i, k in enumerate(_stack_keys(moved)):
            a, b = find(i), find(index[k])
            if a != b:
                parent[max(a, b)] = min(a, b)
    sizes = Counter(find(i) for i in range(len(keys)))
    return dict(sorted(Counter(sizes.values()).items()))


# ---------------------------------------------------------------------------
# Named data states and export


def load_named_state(name: str) -> DenseState:
    """Packaged example states: ``six_qubit_g144`` and ``eight_qubit_g1152``."""
    text = resources.files("stabatlas.data").joinpath(f"{name}.json").read_text()
    return DenseState.from_json(text)


def _palette_color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def to_dot(g: QuotientGraph) -> str:
    lines = [f'digraph "{g.kind}" {{', "  node [style=filled];"]
    for v in range(g.n_vertices):
        fill = _palette_color(g.coloring[v]) if g.coloring else "white"
        lab = g.words[v] if g.words else str(v)
        lines.append(f'  {v} [label="{lab}", fillcolor="{fill}"];')
    merged: dict[tuple[int, int], set[str]] = defaultdict(set)
    for u, v, lab in g.edges:
        merged[(u, v)].update(lab.split(","))
    for (u, v), labs in sorted(merged.items()):
        for lab in sorted(labs):
            color = GENERATOR_COLORS.get(lab, "black")
            lines.append(f'  {u} -> {v} [label="{lab}", color="{color}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: QuotientGraph) -> str:
    meta = {k: v for k, v in g.metadata.items() if k != "class_of"}
    return json.dumps(
        {
            "kind": g.kind,
            "metadata": meta,
            "vertices": [
                {
                    "id": v,
                    "word": g.words[v] if g.words else "",
                    "size": g.vertex_sizes[v],
                    "color": g.coloring[v] if g.coloring else None,
                }
                for v in range(g.n_vertices)
            ],
            "edges": [{"source": u, "target": v, "label": lab} for u, v, lab in g.edges],
            "palette": [list(p) for p in g.palette],
        },
        indent=1,
        sort_keys=True,
    )


def to_graphml(g: QuotientGraph) -> str:
    buf = io.BytesIO()
    nx.write_graphml(g.to_networkx(directed=True), buf)
    return buf.getvalue().decode()


def export_graph(g: QuotientGraph, fmt: str) -> str:
    fmt = fmt.lower()
    if fmt == "dot":
        return to_dot(g)
    if fmt == "json":
        return to_json(g)
    if fmt == "graphml":
        return to_graphml(g)
    raise ValueError(f"unknown graph format {fmt!r}")

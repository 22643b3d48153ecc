"""Graph rewrites that preserve or relate exterior functions.

Vertex merging, inverse-pair transformer insertion, the holographic
transformation (external insertions, internal pair insertions, then merging
back into the original vertices), and the fast per-axis cumulus, difference,
and Fourier transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    GroupAlphabet,
    character_table,
    dual_kernel_table,
    ordered_sizes,
)
from .factor import REL_TOL, Factor, OpCounter, contract, factors_allclose
from .indicators import TransformerPair
from .nfg import HalfEdge, InternalEdge, NfgGraph

__all__ = [
    "HolographicSpec",
    "merge_vertices",
    "insert_transformer_pair",
    "insert_transformer",
    "holographic_transform",
    "split_vertex_guided",
    "fast_axis_transform",
]


def _edge_labels(g: NfgGraph, vertex: str) -> Dict[str, str]:
    """Axis -> working label; loop endpoints get slot-suffixed labels."""
    mapping: Dict[str, str] = {}
    for e in g.internal_at(vertex):
        if e.is_loop():
            mapping[e.ends[0][1]] = f"{e.id}#0"
            mapping[e.ends[1][1]] = f"{e.id}#1"
        else:
            v, axis = e.ends[0] if e.ends[0][0] == vertex else e.ends[1]
            mapping[axis] = e.id
    for h in g.half_at(vertex):
        mapping[h.end[1]] = h.id
    return mapping


def merge_vertices(g: NfgGraph, u: str, v: str) -> NfgGraph:
    """Replace adjacent u, v with one vertex carrying their sum-of-products.

    The merged vertex keeps the id ``u``; the exterior function is unchanged.
    """
    if u == v:
        raise ValueError("cannot merge a vertex with itself")
    shared = g.edges_between(u, v)
    if not shared:
        raise ValueError(f"vertices {u!r} and {v!r} are not adjacent")

    map_u = _edge_labels(g, u)
    map_v = _edge_labels(g, v)
    merged = contract([g.factor(u).relabel(map_u), g.factor(v).relabel(map_v)])

    shared_ids = {e.id for e in shared}
    vertices = {w: f for w, f in g.vertices.items() if w not in (u, v)}
    vertices[u] = merged

    internal: List[InternalEdge] = []
    for e in g.internal_edges:
        if e.id in shared_ids:
            continue
        ends = []
        for slot, (w, axis) in enumerate(e.ends):
            if w in (u, v):
                label = f"{e.id}#{slot}" if e.is_loop() else e.id
                ends.append((u, label))
            else:
                ends.append((w, axis))
        internal.append(InternalEdge(e.id, (ends[0], ends[1]), e.alphabet))
    half: List[HalfEdge] = []
    for h in g.half_edges:
        if h.end[0] in (u, v):
            half.append(HalfEdge(h.id, (u, h.id), h.alphabet, h.var))
        else:
            half.append(h)
    return NfgGraph(vertices, internal, half)


def insert_transformer_pair(g: NfgGraph, edge_id: str, pair: TransformerPair,
                            orientation: str, tol: float = REL_TOL) -> NfgGraph:
    """Subdivide an internal edge with a verified inverse pair.

    ``orientation`` names the endpoint vertex the forward transformer sits
    next to.  The exterior function is unchanged.
    """
    pair.verify(tol)
    e = g.internal_edge(edge_id)
    if e.is_loop():
        raise ValueError("transformer insertion on a self-loop is not supported")
    if orientation not in e.vertices:
        raise ValueError(f"orientation {orientation!r} is not an endpoint of {edge_id!r}")
    near = e.ends[0] if e.ends[0][0] == orientation else e.ends[1]
    far = e.ends[1] if near is e.ends[0] else e.ends[0]

    x_alpha = pair.forward.domain.axes[0][1]
    s_alpha = pair.forward.domain.axes[1][1]
    if pair.inverse.domain.axes[0][1] != s_alpha or \
            pair.inverse.domain.axes[1][1] != x_alpha:
        raise ValueError("pair member alphabets are inconsistent")
    if x_alpha != e.alphabet:
        raise ValueError(f"pair alphabet does not match edge {edge_id!r}")

    w_fwd = g.fresh_id(f"{edge_id}_g")
    w_inv = g.fresh_id(f"{edge_id}_gi")
    e_near = g.fresh_id(f"{edge_id}_a")
    e_mid = g.fresh_id(f"{edge_id}_m")
    e_far = g.fresh_id(f"{edge_id}_b")

    vertices = dict(g.vertices)
    vertices[w_fwd] = pair.forward
    vertices[w_inv] = pair.inverse
    internal = [x for x in g.internal_edges if x.id != edge_id]
    internal.append(InternalEdge(e_near, (near, (w_fwd, "arg1")), e.alphabet))
    internal.append(InternalEdge(e_mid, ((w_fwd, "arg2"), (w_inv, "arg1")), s_alpha))
    internal.append(InternalEdge(e_far, ((w_inv, "arg2"), far), e.alphabet))
    return NfgGraph(vertices, internal, g.half_edges)


def insert_transformer(g: NfgGraph, var: str, transformer: Factor) -> NfgGraph:
    """Insert a bivariate transformer g(x, y) into a half edge.

    The first axis faces the original vertex; the second becomes the new
    external variable (same name, possibly a different alphabet).
    """
    if transformer.ndim != 2:
        raise ValueError("external transformer must be bivariate")
    h = g.half_edge_for_var(var)
    if transformer.domain.axes[0][1] != h.alphabet:
        raise ValueError(f"transformer does not match the alphabet of {var!r}")
    w = g.fresh_id(f"{var}_g")
    e_new = g.fresh_id(f"{var}_t")
    y_alpha = transformer.domain.axes[1][1]
    vertices = dict(g.vertices)
    vertices[w] = transformer
    internal = list(g.internal_edges)
    internal.append(InternalEdge(e_new, (h.end, (w, "arg1")), h.alphabet))
    half = [x for x in g.half_edges if x.id != h.id]
    half.append(HalfEdge(h.id, (w, "arg2"), y_alpha, var))
    return NfgGraph(vertices, internal, half)


@dataclass(frozen=True)
class HolographicSpec:
    """External transformers per variable and oriented internal pairs per edge."""

    external: Mapping[str, Factor] = field(default_factory=dict)
    internal: Mapping[str, Tuple[TransformerPair, str]] = field(default_factory=dict)


def holographic_transform(g: NfgGraph, spec: HolographicSpec,
                          tol: float = REL_TOL) -> NfgGraph:
    """Transform every local function while keeping the graph topology.

    Steps: insert the external transformers, insert the internal inverse
    pairs, then merge each original vertex with its surrounding inserted
    vertices.  The result keeps the original vertex ids, edge ids, and
    external names.
    """
    for var in spec.external:
        g.half_edge_for_var(var)
    for eid in spec.internal:
        g.internal_edge(eid)

    original_vertices = list(g.vertex_ids)
    work = g
    absorb: Dict[str, List[str]] = {v: [] for v in original_vertices}
    mid_edge_of: Dict[str, str] = {}

    for var in sorted(spec.external):
        h = work.half_edge_for_var(var)
        owner = h.end[0]
        before = set(work.vertices)
        work = insert_transformer(work, var, spec.external[var])
        (w,) = set(work.vertices) - before
        absorb[owner].append(w)

    for eid in sorted(spec.internal):
        pair, orientation = spec.internal[eid]
        before = set(work.vertices)
        before_edges = {x.id for x in work.internal_edges}
        work = insert_transformer_pair(work, eid, pair, orientation, tol=tol)
        new = set(work.vertices) - before
        for w in new:
            # each inserted vertex is adjacent to exactly one original vertex
            neigh = [x for x in work.neighbors(w) if x in absorb]
            if neigh:
                absorb[neigh[0]].append(w)
        mid = next(x.id for x in work.internal_edges
                   if x.id not in before_edges and set(x.vertices) <= new)
        mid_edge_of[mid] = eid

    for v in original_vertices:
        for w in absorb[v]:
            work = merge_vertices(work, v, w)

    # restore the subdivided edges' original ids
    internal = []
    for e in work.internal_edges:
        if e.id in mid_edge_of:
            internal.append(InternalEdge(mid_edge_of[e.id], e.ends, e.alphabet))
        else:
            internal.append(e)
    return work.replace(internal_edges=internal)


def split_vertex_guided(g: NfgGraph, vertex: str, replacement: NfgGraph,
                        tol: float = REL_TOL) -> NfgGraph:
    """Replace a vertex by a caller-supplied sub-NFG realizing the same function.

    The replacement's external variable names must be the ids of the edges
    incident on ``vertex``; its exterior must reproduce the vertex factor
    within ``tol``.
    """
    factor = g.factor(vertex)
    mapping = _edge_labels(g, vertex)
    want = factor.relabel(mapping)
    from .exterior import exterior_bruteforce

    got = exterior_bruteforce(replacement)
    if set(got.labels) != set(want.labels):
        raise ValueError(
            f"replacement realizes variables {sorted(got.labels)}, expected "
            f"{sorted(want.labels)}")
    if not factors_allclose(got, want, tol=tol):
        raise ValueError("replacement does not reproduce the vertex function")

    rename = {w: g.fresh_id(f"{vertex}.{w}") for w in replacement.vertex_ids}
    vertices = {w: f for w, f in g.vertices.items() if w != vertex}
    for w, f in replacement.vertices.items():
        vertices[rename[w]] = f

    new_end: Dict[str, Tuple[str, str]] = {}
    for h in replacement.half_edges:
        new_end[h.var] = (rename[h.end[0]], h.end[1])

    internal = [e for e in g.internal_edges
                if vertex not in (e.ends[0][0], e.ends[1][0])]
    for e in replacement.internal_edges:
        internal.append(InternalEdge(
            g.fresh_id(f"{vertex}.{e.id}"),
            ((rename[e.ends[0][0]], e.ends[0][1]),
             (rename[e.ends[1][0]], e.ends[1][1])),
            e.alphabet))
    for e in g.internal_edges:
        if vertex not in (e.ends[0][0], e.ends[1][0]):
            continue
        ends = tuple(new_end[mapping[axis]] if w == vertex else (w, axis)
                     for w, axis in e.ends)
        internal.append(InternalEdge(e.id, ends, e.alphabet))

    half = []
    for h in g.half_edges:
        if h.end[0] == vertex:
            half.append(HalfEdge(h.id, new_end[mapping[h.end[1]]],
                                 h.alphabet, h.var))
        else:
            half.append(h)
    return NfgGraph(vertices, internal, half)


# -- fast per-axis transforms ---------------------------------------------------


def _axis_component_view(values: np.ndarray, axis: int, sizes: Sequence[int]) -> np.ndarray:
    shape = list(values.shape)
    new_shape = shape[:axis] + list(sizes) + shape[axis + 1:]
    return values.reshape(new_shape)


def _running_sum(values: np.ndarray, axis: int, counter: Optional[OpCounter]) -> None:
    m = values.shape[axis]
    slab = int(values.size // m)
    idx: List[object] = [slice(None)] * values.ndim
    prev: List[object] = [slice(None)] * values.ndim
    for k in range(1, m):
        idx[axis] = k
        prev[axis] = k - 1
        values[tuple(idx)] += values[tuple(prev)]
        if counter is not None:
            counter.adds += slab


def _running_difference(values: np.ndarray, axis: int, counter: Optional[OpCounter]) -> None:
    m = values.shape[axis]
    slab = int(values.size // m)
    idx: List[object] = [slice(None)] * values.ndim
    prev: List[object] = [slice(None)] * values.ndim
    for k in range(m - 1, 0, -1):
        idx[axis] = k
        prev[axis] = k - 1
        values[tuple(idx)] -= values[tuple(prev)]
        if counter is not None:
            counter.adds += slab


def fast_axis_transform(f: Factor, kernel: str, axes: Sequence[str],
                        counter: Optional[OpCounter] = None) -> Factor:
    """Apply a named kernel along each listed axis in sequence.

    ``cumulus`` and ``difference`` run the in-place slice recurrences and cost
    |X_axis|-1 whole-slab additions per axis component; ``fourier`` and
    ``fourier_inv`` apply the dense character kernel.
    """
    if kernel not in ("cumulus", "difference", "fourier", "fourier_inv"):
        raise ValueError(f"unknown kernel {kernel!r}")
    values = np.array(f.values, dtype=np.complex128)
    for label in axes:
        ax = f.domain.axis_index(label)
        alpha = f.domain.axes[ax][1]
        if kernel in ("cumulus", "difference"):
            sizes = ordered_sizes(alpha)
            view = _axis_component_view(values, ax, sizes)
            for c in range(len(sizes)):
                comp_axis = ax + c
                if kernel == "cumulus":
                    _running_sum(view, comp_axis, counter)
                else:
                    _running_difference(view, comp_axis, counter)
            values = view.reshape(values.shape)
        else:
            if not isinstance(alpha, GroupAlphabet):
                raise ValueError(f"axis {label!r} is not group-valued")
            table = character_table(alpha) if kernel == "fourier" \
                else dual_kernel_table(alpha)
            values = np.moveaxis(
                np.tensordot(values, table, axes=([ax], [0])), -1, ax)
            if counter is not None:
                counter.mults += alpha.size * values.size
    return Factor(f.domain, values)

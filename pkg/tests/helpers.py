"""Shared builders and independent oracles for the test suite.

The oracles here enumerate assignments with plain Python loops and index
lookups; they deliberately avoid the package's contraction machinery.
"""

import itertools

import numpy as np

from nfgraph.algebra import Alphabet, make_product_domain
from nfgraph.factor import Factor
from nfgraph.nfg import HalfEdge, InternalEdge, NfgGraph


def rand_factor(rng, labels, alphabets, positive=False, integer=False):
    dom = make_product_domain(list(zip(labels, alphabets)))
    if integer:
        vals = rng.integers(0, 5, size=dom.shape).astype(float)
    elif positive:
        vals = rng.uniform(0.1, 1.0, size=dom.shape)
    else:
        vals = rng.standard_normal(dom.shape)
    return Factor(dom, vals)


def mesh_graph(rng, positive=False):
    """Four vertices on a ring with a chord, five internal edges, two half edges."""
    b = Alphabet(2)
    f1 = rand_factor(rng, ["x1", "s1", "s2"], [b, b, b], positive=positive)
    f2 = rand_factor(rng, ["x2", "s2", "s3", "s5"], [b, b, b, b], positive=positive)
    f3 = rand_factor(rng, ["s3", "s4"], [b, b], positive=positive)
    f4 = rand_factor(rng, ["s1", "s4", "s5"], [b, b, b], positive=positive)
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3, "f4": f4},
        internal_edges=[
            InternalEdge("s1", (("f1", "s1"), ("f4", "s1")), b),
            InternalEdge("s2", (("f1", "s2"), ("f2", "s2")), b),
            InternalEdge("s3", (("f2", "s3"), ("f3", "s3")), b),
            InternalEdge("s4", (("f3", "s4"), ("f4", "s4")), b),
            InternalEdge("s5", (("f2", "s5"), ("f4", "s5")), b),
        ],
        half_edges=[
            HalfEdge("hx1", ("f1", "x1"), b, "x1"),
            HalfEdge("hx2", ("f2", "x2"), b, "x2"),
        ],
    )


def random_nfg(rng, max_vertices=6, max_internal=8, max_alpha=4, max_half=3,
               integer=False, positive=False):
    """A random NFG: possibly disconnected, parallel edges allowed."""
    n_v = int(rng.integers(2, max_vertices + 1))
    vids = [f"v{i}" for i in range(n_v)]
    axes_of = {v: [] for v in vids}
    internal = []
    n_e = int(rng.integers(1, max_internal + 1))
    for k in range(n_e):
        u, v = rng.choice(n_v, size=2, replace=False)
        u, v = vids[u], vids[v]
        alpha = Alphabet(int(rng.integers(2, max_alpha + 1)))
        eid = f"e{k}"
        axes_of[u].append((f"a{len(axes_of[u])}", alpha))
        axes_of[v].append((f"a{len(axes_of[v])}", alpha))
        internal.append(InternalEdge(
            eid, ((u, axes_of[u][-1][0]), (v, axes_of[v][-1][0])), alpha))
    half = []
    n_h = int(rng.integers(0, max_half + 1))
    for k in range(n_h):
        v = vids[int(rng.integers(0, n_v))]
        alpha = Alphabet(int(rng.integers(2, max_alpha + 1)))
        axes_of[v].append((f"a{len(axes_of[v])}", alpha))
        half.append(HalfEdge(f"h{k}", (v, axes_of[v][-1][0]), alpha, f"x{k}"))
    vertices = {}
    for v in vids:
        labels = [l for l, _ in axes_of[v]]
        alphas = [a for _, a in axes_of[v]]
        vertices[v] = rand_factor(rng, labels, alphas, integer=integer, positive=positive)
    return NfgGraph(vertices, internal, half)


def random_tree(rng, max_vertices=10, max_alpha=4, closed=True, max_half=3):
    """A random connected tree NFG."""
    n_v = int(rng.integers(2, max_vertices + 1))
    vids = [f"v{i}" for i in range(n_v)]
    axes_of = {v: [] for v in vids}
    internal = []
    for k in range(1, n_v):
        parent = int(rng.integers(0, k))
        u, v = vids[parent], vids[k]
        alpha = Alphabet(int(rng.integers(2, max_alpha + 1)))
        axes_of[u].append((f"a{len(axes_of[u])}", alpha))
        axes_of[v].append((f"a{len(axes_of[v])}", alpha))
        internal.append(InternalEdge(
            f"e{k}", ((u, axes_of[u][-1][0]), (v, axes_of[v][-1][0])), alpha))
    half = []
    if not closed:
        for k in range(int(rng.integers(1, max_half + 1))):
            v = vids[int(rng.integers(0, n_v))]
            alpha = Alphabet(int(rng.integers(2, max_alpha + 1)))
            axes_of[v].append((f"a{len(axes_of[v])}", alpha))
            half.append(HalfEdge(f"h{k}", (v, axes_of[v][-1][0]), alpha, f"x{k}"))
    vertices = {}
    for v in vids:
        labels = [l for l, _ in axes_of[v]]
        alphas = [a for _, a in axes_of[v]]
        vertices[v] = rand_factor(rng, labels, alphas)
    return NfgGraph(vertices, internal, half)


def enumerate_joint(g):
    """Oracle: the full joint table over every edge variable, by explicit loops.

    Returns (edge_ids, sizes, table) where table is indexed by the assignment
    of internal edges first, then half edges, in declaration order.
    """
    ids = [e.id for e in g.internal_edges] + [h.id for h in g.half_edges]
    sizes = [e.alphabet.size for e in g.internal_edges] + \
        [h.alphabet.size for h in g.half_edges]
    slot = {eid: i for i, eid in enumerate(ids)}

    vertex_axes = {}
    for v, f in g.vertices.items():
        axis_slots = []
        for axis in f.labels:
            eid = None
            for e in g.internal_edges:
                if (v, axis) in e.ends:
                    eid = e.id
                    break
            if eid is None:
                eid = next(h.id for h in g.half_edges if h.end == (v, axis))
            axis_slots.append(slot[eid])
        vertex_axes[v] = axis_slots

    table = np.zeros(tuple(sizes) if sizes else (), dtype=np.complex128)
    for assign in itertools.product(*(range(s) for s in sizes)):
        prod = 1.0 + 0.0j
        for v, f in g.vertices.items():
            prod *= f.values[tuple(assign[s] for s in vertex_axes[v])]
        table[assign] = prod
    return ids, sizes, table


def oracle_exterior(g):
    """Oracle: exterior over the external variables, via enumerate_joint."""
    ids, sizes, table = enumerate_joint(g)
    n_int = len(g.internal_edges)
    summed = table.sum(axis=tuple(range(n_int))) if n_int else table
    return summed  # indexed by half edges in declaration order


def oracle_edge_marginal(g, edge_id):
    """Oracle: marginal exterior over one internal edge of a closed NFG."""
    ids, sizes, table = enumerate_joint(g)
    k = ids.index(edge_id)
    other = tuple(i for i in range(len(ids)) if i != k)
    return table.sum(axis=other)


def broadcast_joint(g):
    """The full joint over every edge via literal broadcasting of each factor.

    Same defining formula as enumerate_joint, evaluated without per-assignment
    loops; independent of the package's contraction and message machinery.
    """
    ids = [e.id for e in g.internal_edges] + [h.id for h in g.half_edges]
    sizes = [e.alphabet.size for e in g.internal_edges] + \
        [h.alphabet.size for h in g.half_edges]
    slot = {eid: i for i, eid in enumerate(ids)}
    table = np.ones(tuple(sizes) if sizes else (), dtype=np.complex128)
    for v, f in g.vertices.items():
        pos = []
        for axis in f.labels:
            eid = None
            for e in g.internal_edges:
                if (v, axis) in e.ends:
                    eid = e.id
                    break
            if eid is None:
                eid = next(h.id for h in g.half_edges if h.end == (v, axis))
            pos.append(slot[eid])
        order = np.argsort(pos, kind="stable")
        slab = f.values.transpose(tuple(order))
        shape = [1] * len(sizes)
        for p in pos:
            shape[p] = sizes[p]
        table = table * slab.reshape(shape)
    return ids, sizes, table

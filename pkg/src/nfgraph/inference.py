"""Evidence and marginalization as graph surgery, plus up-to-scale queries.

``reduce_star`` glues a constant-one vertex onto each marginalized half edge
and an evaluation vertex onto each evidence half edge; target edges stay
dangling.  ``query`` runs the reduction and a chosen engine, returning the
unnormalized answer whose total is the evidence mass.  Constrained models can
shortcut evidence by slice-and-delete, generative models can shortcut
marginalization by vertex deletion with constant absorption; both must agree
with the generic path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Tuple

import numpy as np

from .factor import Factor, marginalize
from .indicators import make_indicator
from .nfg import InternalEdge, NfgGraph, classify
from .exterior import eliminate, exterior_bruteforce, sum_product

__all__ = ["Query", "QueryResult", "reduce_star", "query"]

NORMALIZE_FLOOR = 1e-12


@dataclass(frozen=True)
class Query:
    """A partition of the external variables into targets, sums, and evidence."""

    targets: Tuple[str, ...] = ()
    marginalized: Tuple[str, ...] = ()
    evidence: Mapping[str, int] = field(default_factory=dict)
    algorithm: str = "eliminate"
    normalize: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "marginalized", tuple(self.marginalized))
        object.__setattr__(self, "evidence", dict(self.evidence))
        if self.algorithm not in ("bruteforce", "eliminate", "spa"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    def check_partition(self, g: NfgGraph) -> None:
        named = list(self.targets) + list(self.marginalized) + list(self.evidence)
        if len(set(named)) != len(named):
            raise ValueError("targets, marginalized, and evidence overlap")
        missing = set(g.external_vars) - set(named)
        if missing:
            raise ValueError(f"unassigned external variable(s): {sorted(missing)}")
        unknown = set(named) - set(g.external_vars)
        if unknown:
            raise ValueError(f"unknown external variable(s): {sorted(unknown)}")


@dataclass
class QueryResult:
    """Unnormalized (or optionally normalized) answer over the target variables.

    ``total`` is the sum of the unnormalized table, which equals the evidence
    mass p(N = evidence) when the exterior is a joint distribution.
    """

    table: Factor
    total: complex
    normalized: bool


def reduce_star(g: NfgGraph, q: Query) -> NfgGraph:
    """Glue constant-one and evaluation vertices per the query partition."""
    q.check_partition(g)
    vertices = dict(g.vertices)
    internal = list(g.internal_edges)
    half = list(g.half_edges)
    for var in q.marginalized:
        h = g.half_edge_for_var(var)
        w = g.fresh_id(f"one_{var}")
        vertices[w] = make_indicator("one", h.alphabet, 1)
        internal.append(InternalEdge(g.fresh_id(f"m_{var}"),
                                     (h.end, (w, "arg1")), h.alphabet))
        half = [x for x in half if x.id != h.id]
    for var, value in q.evidence.items():
        h = g.half_edge_for_var(var)
        w = g.fresh_id(f"ev_{var}")
        vertices[w] = make_indicator("eval", h.alphabet, 1,
                                     value=h.alphabet.check(value))
        internal.append(InternalEdge(g.fresh_id(f"n_{var}"),
                                     (h.end, (w, "arg1")), h.alphabet))
        half = [x for x in half if x.id != h.id]
    return NfgGraph(vertices, internal, half)


def _run_engine(g: NfgGraph, algorithm: str) -> Factor:
    if algorithm == "bruteforce":
        return exterior_bruteforce(g)
    if algorithm == "eliminate":
        return eliminate(g).result
    if algorithm == "spa":
        if not g.internal_edges:
            return exterior_bruteforce(g)
        out = sum_product(g)
        e = g.internal_edges[0]
        joint = out.marginals[e.id]
        summed = marginalize(joint, e.id, "sum")
        want = [h.var for h in g.half_edges]
        return summed.transpose(want)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _constrained_evidence_shortcut(g: NfgGraph, q: Query,
                                   tol: float) -> Tuple[NfgGraph, Query]:
    """Slice evidence into the latents and delete the equality interfaces."""
    vertices = dict(g.vertices)
    internal = list(g.internal_edges)
    half = list(g.half_edges)
    for var, value in q.evidence.items():
        h = g.half_edge_for_var(var)
        i = h.end[0]
        f = g.factor(i)
        if f.ndim >= 2:
            eq = make_indicator("eq", h.alphabet, f.ndim)
            if not np.allclose(f.values, eq.values, atol=tol):
                raise ValueError(
                    f"interface {i!r} is not an equality indicator; "
                    "normalize the model first")
        value = h.alphabet.check(value)
        for e in list(g.internal_at(i)):
            j, j_axis = e.other_end(i)
            vertices[j] = marginalize(vertices[j], j_axis, "evaluate", value=value)
            internal = [x for x in internal if x.id != e.id]
        del vertices[i]
        half = [x for x in half if x.id != h.id]
    reduced = NfgGraph(vertices, internal, half)
    return reduced, Query(targets=q.targets, marginalized=q.marginalized,
                          evidence={}, algorithm=q.algorithm,
                          normalize=q.normalize)


def _generative_marginal_shortcut(g: NfgGraph, q: Query,
                                  constants: Mapping[str, complex]) -> Tuple[NfgGraph, Query]:
    """Delete marginalized conditional interfaces, absorbing their constants."""
    vertices = dict(g.vertices)
    internal = list(g.internal_edges)
    half = list(g.half_edges)
    for var in q.marginalized:
        h = g.half_edge_for_var(var)
        i = h.end[0]
        neighbors = sorted(g.neighbors(i))
        c = constants[i]
        for e in list(g.internal_at(i)):
            j, j_axis = e.other_end(i)
            vertices[j] = marginalize(vertices[j], j_axis, "sum")
            internal = [x for x in internal if x.id != e.id]
        del vertices[i]
        half = [x for x in half if x.id != h.id]
        if neighbors:
            target = neighbors[0]
            vertices[target] = vertices[target].scaled(c)
        elif vertices:
            target = sorted(vertices)[0]
            vertices[target] = vertices[target].scaled(c)
        else:
            vertices[g.fresh_id("scale")] = Factor.scalar(c)
    reduced = NfgGraph(vertices, internal, half)
    return reduced, Query(targets=q.targets, marginalized=(),
                          evidence=q.evidence, algorithm=q.algorithm,
                          normalize=q.normalize)


def query(g: NfgGraph, q: Query, shortcuts: bool = False,
          tol: float = 1e-9) -> QueryResult:
    """Answer a query: reduce, evaluate, and optionally normalize.

    With ``shortcuts`` enabled, constrained models handle evidence by
    slice-and-delete and generative models handle marginalization by vertex
    deletion; both paths equal the generic reduction exactly.
    """
    q.check_partition(g)
    work, wq = g, q
    if shortcuts:
        flags = classify(g, tol=tol)
        if flags.constrained and wq.evidence:
            work, wq = _constrained_evidence_shortcut(work, wq, tol)
        elif flags.generative and wq.marginalized:
            work, wq = _generative_marginal_shortcut(work, wq,
                                                     flags.conditional_constants)
    reduced = reduce_star(work, wq)
    if wq.algorithm == "spa":
        cycle = reduced.find_cycle()
        if cycle is not None:
            raise ValueError(f"spa query needs a tree after reduction; cycle {cycle}")
    table = _run_engine(reduced, wq.algorithm)
    if set(table.labels) != set(q.targets):
        raise RuntimeError("engine returned unexpected axes")
    table = table.transpose(q.targets)
    total = complex(table.values.sum())
    if q.normalize:
        if abs(total) <= NORMALIZE_FLOOR:
            raise ValueError(
                f"cannot normalize: total mass {abs(total):.3e} is below "
                f"{NORMALIZE_FLOOR:.0e}")
        table = table.scaled(1.0 / total)
        return QueryResult(table=table, total=total, normalized=True)
    return QueryResult(table=table, total=total, normalized=False)

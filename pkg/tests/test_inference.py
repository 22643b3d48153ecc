import numpy as np
import pytest

from nfgraph.algebra import Alphabet, make_product_domain
from nfgraph.factor import Factor, factors_allclose
from nfgraph.nfg import HalfEdge, InternalEdge, NfgGraph
from nfgraph.exterior import exterior_bruteforce
from nfgraph.inference import Query, QueryResult, query, reduce_star
from nfgraph.models import fg_to_nfg, FactorGraphDesc, cfg_to_nfg, CfgDesc
from nfgraph.algebra import GroupAlphabet

from helpers import mesh_graph, rand_factor


def _triangle_graph(rng):
    """Three vertices on a ring, three external variables."""
    b = Alphabet(2)
    f1 = rand_factor(rng, ["x1", "y1", "y3"], [b, b, b], positive=True)
    f2 = rand_factor(rng, ["x2", "y1", "y2"], [b, b, b], positive=True)
    f3 = rand_factor(rng, ["x3", "y2", "y3"], [b, b, b], positive=True)
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3},
        internal_edges=[
            InternalEdge("y1", (("f1", "y1"), ("f2", "y1")), b),
            InternalEdge("y2", (("f2", "y2"), ("f3", "y2")), b),
            InternalEdge("y3", (("f3", "y3"), ("f1", "y3")), b),
        ],
        half_edges=[
            HalfEdge("h1", ("f1", "x1"), b, "x1"),
            HalfEdge("h2", ("f2", "x2"), b, "x2"),
            HalfEdge("h3", ("f3", "x3"), b, "x3"),
        ])


def test_reduce_star_empty_query_unchanged():
    g = _triangle_graph(np.random.default_rng(0))
    q = Query(targets=("x1", "x2", "x3"))
    out = reduce_star(g, q)
    assert set(out.vertex_ids) == set(g.vertex_ids)
    assert out.external_vars == g.external_vars


def test_reduce_star_structure_and_value():
    rng = np.random.default_rng(1)
    g = _triangle_graph(rng)
    q = Query(targets=("x1",), marginalized=("x3",), evidence={"x2": 1})
    reduced = reduce_star(g, q)
    assert len(reduced.vertices) == len(g.vertices) + 2
    assert reduced.external_vars == ("x1",)
    z = exterior_bruteforce(reduced)
    joint = exterior_bruteforce(g).transpose(["x1", "x2", "x3"]).values
    expected = joint[:, 1, :].sum(axis=1)
    assert np.allclose(z.values, expected, atol=1e-12)


def test_reduce_star_full_marginalization_gives_total_mass():
    rng = np.random.default_rng(2)
    g = _triangle_graph(rng)
    q = Query(marginalized=("x1", "x2", "x3"))
    z = exterior_bruteforce(reduce_star(g, q))
    assert z.ndim == 0
    joint = exterior_bruteforce(g)
    assert z.item() == pytest.approx(complex(joint.values.sum()))


def test_reduce_star_rejects_bad_partition_and_value():
    g = _triangle_graph(np.random.default_rng(3))
    with pytest.raises(ValueError, match="unassigned"):
        reduce_star(g, Query(targets=("x1",)))
    with pytest.raises(ValueError, match="overlap"):
        reduce_star(g, Query(targets=("x1", "x2", "x3"), marginalized=("x1",)))
    with pytest.raises(ValueError, match="out of range"):
        reduce_star(g, Query(targets=("x1", "x3"), evidence={"x2": 7}))


def test_query_conditional_on_chain():
    rng = np.random.default_rng(4)
    b = Alphabet(2)
    f1 = rand_factor(rng, ["x1", "s"], [b, b], positive=True)
    f2 = rand_factor(rng, ["s", "x2"], [b, b], positive=True)
    g = NfgGraph(
        {"f1": f1, "f2": f2},
        internal_edges=[InternalEdge("s", (("f1", "s"), ("f2", "s")), b)],
        half_edges=[HalfEdge("h1", ("f1", "x1"), b, "x1"),
                    HalfEdge("h2", ("f2", "x2"), b, "x2")])
    res = query(g, Query(targets=("x1",), evidence={"x2": 0}))
    joint = exterior_bruteforce(g).transpose(["x1", "x2"]).values.real
    expected = joint[:, 0]
    assert np.allclose(res.table.values.real, expected, atol=1e-12)
    assert res.total == pytest.approx(expected.sum())
    normed = query(g, Query(targets=("x1",), evidence={"x2": 0}, normalize=True))
    assert normed.table.values.real.sum() == pytest.approx(1.0)


def test_query_engines_agree():
    rng = np.random.default_rng(5)
    g = _triangle_graph(rng)
    q_args = dict(targets=("x1",), marginalized=("x3",), evidence={"x2": 1})
    res_b = query(g, Query(algorithm="bruteforce", **q_args))
    res_e = query(g, Query(algorithm="eliminate", **q_args))
    assert np.allclose(res_b.table.values, res_e.table.values, atol=1e-9)
    # the reduced triangle is cyclic, so the spa engine refuses
    with pytest.raises(ValueError, match="tree"):
        query(g, Query(algorithm="spa", **q_args))


def test_query_spa_engine_on_tree():
    rng = np.random.default_rng(6)
    b = Alphabet(3)
    f1 = rand_factor(rng, ["x1", "s"], [b, b], positive=True)
    f2 = rand_factor(rng, ["s", "t", "x2"], [b, b, b], positive=True)
    f3 = rand_factor(rng, ["t", "x3"], [b, b], positive=True)
    g = NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3},
        internal_edges=[InternalEdge("s", (("f1", "s"), ("f2", "s")), b),
                        InternalEdge("t", (("f2", "t"), ("f3", "t")), b)],
        half_edges=[HalfEdge("h1", ("f1", "x1"), b, "x1"),
                    HalfEdge("h2", ("f2", "x2"), b, "x2"),
                    HalfEdge("h3", ("f3", "x3"), b, "x3")])
    q_args = dict(targets=("x1", "x3"), marginalized=("x2",))
    res_spa = query(g, Query(algorithm="spa", **q_args))
    res_bf = query(g, Query(algorithm="bruteforce", **q_args))
    assert np.allclose(res_spa.table.values, res_bf.table.values, atol=1e-9)


def test_query_normalize_zero_mass_refused():
    b = Alphabet(2)
    f = Factor(make_product_domain([("x", b)]), [0.0, 0.0])
    g = NfgGraph({"f": f}, half_edges=[HalfEdge("h", ("f", "x"), b, "x")])
    with pytest.raises(ValueError, match="cannot normalize"):
        query(g, Query(targets=("x",), normalize=True))


def _random_constrained_fg(rng, integer=True):
    n_vars = int(rng.integers(2, 4))
    alphas = [Alphabet(int(rng.integers(2, 4))) for _ in range(n_vars)]
    names = [f"x{i}" for i in range(n_vars)]
    funs = []
    for k in range(int(rng.integers(1, 4))):
        size = int(rng.integers(1, min(2, n_vars) + 1))
        chosen = sorted(rng.choice(n_vars, size=size, replace=False))
        f = rand_factor(rng, [f"a{j}" for j in range(size)],
                        [alphas[c] for c in chosen], integer=integer)
        funs.append((f"f{k}", f, tuple(names[c] for c in chosen)))
    return fg_to_nfg(FactorGraphDesc(tuple(zip(names, alphas)), tuple(funs)))


@pytest.mark.parametrize("seed", range(10))
def test_constrained_evidence_shortcut_exact(seed):
    rng = np.random.default_rng(700 + seed)
    g = _random_constrained_fg(rng, integer=True)
    ext = list(g.external_vars)
    ev_var = ext[0]
    size = g.half_edge_for_var(ev_var).alphabet.size
    q = Query(targets=tuple(ext[1:]), evidence={ev_var: int(rng.integers(0, size))},
              algorithm="bruteforce")
    generic = query(g, q, shortcuts=False)
    fast = query(g, q, shortcuts=True)
    # integer tables keep the float arithmetic exact on both paths
    assert np.array_equal(generic.table.values, fast.table.values)


def _random_generative_cfg(rng):
    z3 = GroupAlphabet((3,))
    names = ["x0", "x1", "x2"]
    funs = []
    for k in range(int(rng.integers(1, 3))):
        size = int(rng.integers(1, 3))
        chosen = sorted(rng.choice(3, size=size, replace=False))
        f = rand_factor(rng, [f"a{j}" for j in range(size)], [z3] * size,
                        integer=True)
        funs.append((f"f{k}", f, tuple(names[c] for c in chosen)))
    return cfg_to_nfg(CfgDesc(tuple((n, z3) for n in names), tuple(funs)))


@pytest.mark.parametrize("seed", range(10))
def test_generative_marginal_shortcut_exact(seed):
    rng = np.random.default_rng(800 + seed)
    g = _random_generative_cfg(rng)
    ext = list(g.external_vars)
    q = Query(targets=tuple(ext[1:]), marginalized=(ext[0],),
              algorithm="bruteforce")
    generic = query(g, q, shortcuts=False)
    fast = query(g, q, shortcuts=True)
    assert np.array_equal(generic.table.values, fast.table.values)


def test_unnormalized_total_equals_evidence_mass():
    rng = np.random.default_rng(9)
    g = _triangle_graph(rng)
    q = Query(targets=("x1",), marginalized=("x3",), evidence={"x2": 0})
    res = query(g, q)
    joint = exterior_bruteforce(g).transpose(["x1", "x2", "x3"]).values
    mass = joint[:, 0, :].sum()
    assert res.total == pytest.approx(complex(mass), rel=1e-9)

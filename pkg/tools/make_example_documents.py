"""Regenerate the checked-in example documents under graphs/.

Values are seeded and frozen; rerunning reproduces the same files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from nfgraph.algebra import Alphabet, GroupAlphabet, OrderedAlphabet, make_product_domain
from nfgraph.document import desc_to_document, dump_document, graph_to_document
from nfgraph.factor import Factor
from nfgraph.indicators import make_indicator
from nfgraph.models import CfgDesc, FactorGraphDesc, cfg_to_nfg, fg_to_nfg
from nfgraph.nfg import HalfEdge, InternalEdge, NfgGraph

OUT = Path(__file__).resolve().parent.parent / "graphs"


def _factor(rng, labels, alphabets, positive=False, decimals=3):
    dom = make_product_domain(list(zip(labels, alphabets)))
    vals = rng.uniform(0.1, 1.0, size=dom.shape) if positive \
        else rng.standard_normal(dom.shape)
    return Factor(dom, np.round(vals, decimals))


def mesh_two_external(rng):
    b = Alphabet(2)
    f1 = _factor(rng, ["x1", "s1", "s2"], [b] * 3)
    f2 = _factor(rng, ["x2", "s2", "s3", "s5"], [b] * 4)
    f3 = _factor(rng, ["s3", "s4"], [b] * 2)
    f4 = _factor(rng, ["s1", "s4", "s5"], [b] * 3)
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3, "f4": f4},
        internal_edges=[
            InternalEdge("s1", (("f1", "s1"), ("f4", "s1")), b),
            InternalEdge("s2", (("f1", "s2"), ("f2", "s2")), b),
            InternalEdge("s3", (("f2", "s3"), ("f3", "s3")), b),
            InternalEdge("s4", (("f3", "s4"), ("f4", "s4")), b),
            InternalEdge("s5", (("f2", "s5"), ("f4", "s5")), b),
        ],
        half_edges=[HalfEdge("hx1", ("f1", "x1"), b, "x1"),
                    HalfEdge("hx2", ("f2", "x2"), b, "x2")])


def constrained_pair(rng):
    b = Alphabet(2)
    def split3(rng):
        # round the pieces, not the product, so the table stays exactly split
        p1 = np.round(rng.uniform(0.1, 1.0, size=(2, 2)), 3)
        p2 = np.round(rng.uniform(0.1, 1.0, size=(2, 2)), 3)
        return np.einsum("pa,pb->pab", p1, p2)
    f1 = Factor(make_product_domain([("x1", b), ("s1", b), ("s1p", b)]), split3(rng))
    f2 = Factor(make_product_domain([("x2", b), ("s2", b), ("s2p", b)]), split3(rng))
    h1 = _factor(rng, ["s1"], [b], positive=True)
    h2 = _factor(rng, ["s1p", "s2"], [b, b], positive=True)
    h3 = _factor(rng, ["s2p"], [b], positive=True)
    return NfgGraph(
        {"f1": f1, "f2": f2, "h1": h1, "h2": h2, "h3": h3},
        internal_edges=[
            InternalEdge("s1", (("f1", "s1"), ("h1", "s1")), b),
            InternalEdge("s1p", (("f1", "s1p"), ("h2", "s1p")), b),
            InternalEdge("s2", (("f2", "s2"), ("h2", "s2")), b),
            InternalEdge("s2p", (("f2", "s2p"), ("h3", "s2p")), b),
        ],
        half_edges=[HalfEdge("hx1", ("f1", "x1"), b, "x1"),
                    HalfEdge("hx2", ("f2", "x2"), b, "x2")])


def fg_triangle(rng):
    a = Alphabet(2)
    f1 = _factor(rng, ["u", "v"], [a, a], positive=True)
    f2 = _factor(rng, ["u", "v"], [a, a], positive=True)
    f3 = _factor(rng, ["u", "v"], [a, a], positive=True)
    return FactorGraphDesc(
        variables=(("x1", a), ("x2", a), ("x3", a)),
        functions=(("f1", f1, ("x1", "x2")),
                   ("f2", f2, ("x1", "x3")),
                   ("f3", f3, ("x1", "x3"))))


def indep_chain(rng, kind):
    b = Alphabet(2)
    if kind == "constrained":
        def iface(nax):
            parts = [np.round(rng.uniform(0.1, 1.0, size=(2, 2)), 3)
                     for _ in range(nax - 1)]
            table = parts[0] if nax == 2 else np.einsum("pa,pb->pab", *parts)
            labels = ["x"] + [f"t{k}" for k in range(nax - 1)]
            return Factor(make_product_domain([(l, b) for l in labels]), table)
    else:
        def iface(nax):
            raw = rng.uniform(0.1, 1.0, size=(2,) * nax)
            raw = np.round(raw, 3)
            raw = raw / raw.sum(axis=0, keepdims=True)
            labels = ["x"] + [f"t{k}" for k in range(nax - 1)]
            return Factor(make_product_domain([(l, b) for l in labels]), raw)
    g1, g2, g3 = iface(2), iface(3), iface(2)
    f1 = _factor(rng, ["a", "b"], [b, b], positive=True)
    f2 = _factor(rng, ["a", "b"], [b, b], positive=True)
    return NfgGraph(
        {"g1": g1, "g2": g2, "g3": g3, "f1": f1, "f2": f2},
        internal_edges=[
            InternalEdge("e1", (("g1", "t0"), ("f1", "a")), b),
            InternalEdge("e2", (("g2", "t0"), ("f1", "b")), b),
            InternalEdge("e3", (("g2", "t1"), ("f2", "a")), b),
            InternalEdge("e4", (("g3", "t0"), ("f2", "b")), b),
        ],
        half_edges=[HalfEdge("hx", ("g1", "x"), b, "x"),
                    HalfEdge("hy", ("g2", "x"), b, "y"),
                    HalfEdge("hz", ("g3", "x"), b, "z")])


def cfg_triangle(rng):
    z3 = GroupAlphabet((3,))
    f1 = _factor(rng, ["u", "v"], [z3, z3], positive=True)
    f2 = _factor(rng, ["u", "v"], [z3, z3], positive=True)
    f3 = _factor(rng, ["u", "v"], [z3, z3], positive=True)
    return CfgDesc(
        variables=(("x1", z3), ("x2", z3), ("x3", z3)),
        functions=(("f1", f1, ("x1", "x2")),
                   ("f2", f2, ("x1", "x3")),
                   ("f3", f3, ("x1", "x3"))))


def cdn_transformed(rng):
    o = OrderedAlphabet(3)
    m1 = make_indicator("max", o, 4).relabel(
        {"arg1": "out", "arg2": "t1", "arg3": "t2", "arg4": "t3"})
    m2 = make_indicator("max", o, 3).relabel(
        {"arg1": "out", "arg2": "t1", "arg3": "t2"})
    def dist(shape):
        p = np.round(rng.uniform(0.1, 1.0, size=shape), 3)
        return p / p.sum()
    f1 = Factor(make_product_domain([("a", o)]), dist((3,)))
    f2 = Factor(make_product_domain([("a", o), ("b", o)]), dist((3, 3)))
    f3 = Factor(make_product_domain([("a", o), ("b", o)]), dist((3, 3)))
    A = make_indicator("cumulus", o, 2)
    return NfgGraph(
        {"m1": m1, "m2": m2, "f1": f1, "f2": f2, "f3": f3, "A1": A, "A2": A},
        internal_edges=[
            InternalEdge("e1", (("m1", "t1"), ("f1", "a")), o),
            InternalEdge("e2", (("m1", "t2"), ("f2", "a")), o),
            InternalEdge("e3", (("m1", "t3"), ("f3", "a")), o),
            InternalEdge("e4", (("m2", "t1"), ("f2", "b")), o),
            InternalEdge("e5", (("m2", "t2"), ("f3", "b")), o),
            InternalEdge("a1", (("m1", "out"), ("A1", "arg2")), o),
            InternalEdge("a2", (("m2", "out"), ("A2", "arg2")), o),
        ],
        half_edges=[HalfEdge("h1", ("A1", "arg1"), o, "x1"),
                    HalfEdge("h2", ("A2", "arg1"), o, "x2")])


def elimination_triangle(rng):
    b = Alphabet(2)
    f1 = _factor(rng, ["x1", "y1", "y3"], [b] * 3)
    f2 = _factor(rng, ["x2", "y1", "y2"], [b] * 3)
    f3 = _factor(rng, ["x3", "y2", "y3"], [b] * 3)
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3},
        internal_edges=[
            InternalEdge("y1", (("f1", "y1"), ("f2", "y1")), b),
            InternalEdge("y2", (("f2", "y2"), ("f3", "y2")), b),
            InternalEdge("y3", (("f3", "y3"), ("f1", "y3")), b),
        ],
        half_edges=[HalfEdge("h1", ("f1", "x1"), b, "x1"),
                    HalfEdge("h2", ("f2", "x2"), b, "x2"),
                    HalfEdge("h3", ("f3", "x3"), b, "x3")])


def spa_chain_star(rng):
    b = Alphabet(2)
    f1 = _factor(rng, ["y1"], [b])
    f2 = _factor(rng, ["y1", "y2"], [b, b])
    f3 = _factor(rng, ["y2", "y3", "y4"], [b] * 3)
    f4 = _factor(rng, ["y3"], [b])
    f5 = _factor(rng, ["y4"], [b])
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3, "f4": f4, "f5": f5},
        internal_edges=[
            InternalEdge("y1", (("f1", "y1"), ("f2", "y1")), b),
            InternalEdge("y2", (("f2", "y2"), ("f3", "y2")), b),
            InternalEdge("y3", (("f3", "y3"), ("f4", "y3")), b),
            InternalEdge("y4", (("f3", "y4"), ("f5", "y4")), b),
        ])


def dsp_pair(rng):
    o = OrderedAlphabet(3)
    q1 = make_indicator("eq", o, 3).relabel(
        {"arg1": "y", "arg2": "yp", "arg3": "ypp"})
    q2 = make_indicator("eq", o, 3).relabel(
        {"arg1": "y", "arg2": "ypp", "arg3": "yp"})
    f1 = _factor(rng, ["a"], [o], positive=True)
    f2 = _factor(rng, ["a", "b"], [o, o], positive=True)
    f3 = _factor(rng, ["a"], [o], positive=True)
    return NfgGraph(
        {"q1": q1, "q2": q2, "f1": f1, "f2": f2, "f3": f3},
        internal_edges=[
            InternalEdge("yp1", (("q1", "yp"), ("f1", "a")), o),
            InternalEdge("ypp1", (("q1", "ypp"), ("f2", "a")), o),
            InternalEdge("ypp2", (("q2", "ypp"), ("f2", "b")), o),
            InternalEdge("yp2", (("q2", "yp"), ("f3", "a")), o),
        ],
        half_edges=[HalfEdge("h1", ("q1", "y"), o, "x1"),
                    HalfEdge("h2", ("q2", "y"), o, "x2")])


def inference_triangle(rng):
    b = Alphabet(2)
    f1 = _factor(rng, ["x1", "y1", "y3"], [b] * 3, positive=True)
    f2 = _factor(rng, ["x2", "y1", "y2"], [b] * 3, positive=True)
    f3 = _factor(rng, ["x3", "y2", "y3"], [b] * 3, positive=True)
    return NfgGraph(
        {"f1": f1, "f2": f2, "f3": f3},
        internal_edges=[
            InternalEdge("y1", (("f1", "y1"), ("f2", "y1")), b),
            InternalEdge("y2", (("f2", "y2"), ("f3", "y2")), b),
            InternalEdge("y3", (("f3", "y3"), ("f1", "y3")), b),
        ],
        half_edges=[HalfEdge("h1", ("f1", "x1"), b, "x1"),
                    HalfEdge("h2", ("f2", "x2"), b, "x2"),
                    HalfEdge("h3", ("f3", "x3"), b, "x3")])


def transform_demo(rng):
    z2 = GroupAlphabet((2,))
    u = _factor(rng, ["x", "s", "t"], [z2] * 3)
    v = _factor(rng, ["s", "t", "y"], [z2] * 3)
    return NfgGraph(
        {"u": u, "v": v},
        internal_edges=[InternalEdge("s", (("u", "s"), ("v", "s")), z2),
                        InternalEdge("t", (("u", "t"), ("v", "t")), z2)],
        half_edges=[HalfEdge("hx", ("u", "x"), z2, "x"),
                    HalfEdge("hy", ("v", "y"), z2, "y")])


def main():
    OUT.mkdir(exist_ok=True)

    def write(name, payload):
        (OUT / name).write_text(dump_document(payload), encoding="utf-8")
        print(f"wrote graphs/{name}")

    write("mesh_two_external.json",
          graph_to_document(mesh_two_external(np.random.default_rng(1))))
    write("constrained_pair.json",
          graph_to_document(constrained_pair(np.random.default_rng(2))))
    fg = fg_triangle(np.random.default_rng(3))
    write("fg_triangle.json", desc_to_document(fg))
    write("constrained_triangle.json", graph_to_document(fg_to_nfg(fg)))
    write("indep_chain_constrained.json",
          graph_to_document(indep_chain(np.random.default_rng(4), "constrained")))
    write("indep_chain_generative.json",
          graph_to_document(indep_chain(np.random.default_rng(5), "generative")))
    cfg = cfg_triangle(np.random.default_rng(6))
    write("cfg_triangle.json", desc_to_document(cfg))
    write("generative_sum_triangle.json", graph_to_document(cfg_to_nfg(cfg)))
    write("cdn_transformed.json",
          graph_to_document(cdn_transformed(np.random.default_rng(7))))
    write("elimination_triangle.json",
          graph_to_document(elimination_triangle(np.random.default_rng(8))))
    write("spa_chain_star.json",
          graph_to_document(spa_chain_star(np.random.default_rng(9))))
    write("dsp_pair.json", graph_to_document(dsp_pair(np.random.default_rng(10))))

    doc = graph_to_document(inference_triangle(np.random.default_rng(11)))
    doc["query"] = {"targets": ["x1"], "marginalize": ["x3"],
                    "evidence": {"x2": 1}, "algorithm": "eliminate"}
    write("inference_triangle.json", doc)

    doc = graph_to_document(transform_demo(np.random.default_rng(12)))
    doc["transform"] = {
        "external": {"x": "fourier", "y": "fourier"},
        "internal": {"s": {"kind": "fourier", "forward_at": "u"},
                     "t": {"kind": "fourier", "forward_at": "v"}},
    }
    write("transform_demo.json", doc)

    (OUT / "hamming_generator.txt").write_text(
        "2 7 4\n"
        "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n"
        "1 1 0 1\n1 0 1 1\n0 1 1 1\n", encoding="utf-8")
    print("wrote graphs/hamming_generator.txt")
    (OUT / "hamming_parity.txt").write_text(
        "2 7 4\n"
        "1 1 0 1 1 0 0\n1 0 1 1 0 1 0\n0 1 1 1 0 0 1\n", encoding="utf-8")
    print("wrote graphs/hamming_parity.txt")


if __name__ == "__main__":
    main()

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nfgraph.cli import main
from nfgraph.document import (
    dump_document,
    graph_to_document,
    load_document,
    loads_document,
)
from nfgraph.exterior import exterior_bruteforce
from nfgraph.factor import factors_allclose
from nfgraph.models import fg_global_function

from helpers import mesh_graph, random_nfg

GRAPHS = Path(__file__).resolve().parent.parent / "graphs"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- document format -------------------------------------------------------------


def test_document_roundtrip_bit_exact():
    rng = np.random.default_rng(0)
    g = random_nfg(rng, max_vertices=5, max_internal=6, max_alpha=3)
    doc = graph_to_document(g)
    text = dump_document(doc)
    back = loads_document(text).graph
    assert set(back.vertex_ids) == set(g.vertex_ids)
    for v in g.vertex_ids:
        assert np.array_equal(back.factor(v).values, g.factor(v).values)
    # serialization is deterministic
    assert dump_document(graph_to_document(back)) == text


def test_document_complex_values_roundtrip():
    rng = np.random.default_rng(1)
    from nfgraph.algebra import Alphabet, make_product_domain
    from nfgraph.factor import Factor
    from nfgraph.nfg import HalfEdge, NfgGraph

    b = Alphabet(3)
    vals = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    f = Factor(make_product_domain([("x", b)]), vals)
    g = NfgGraph({"v": f}, half_edges=[HalfEdge("h", ("v", "x"), b, "x")])
    back = loads_document(dump_document(graph_to_document(g))).graph
    assert np.array_equal(back.factor("v").values, vals)


def test_document_indicator_form():
    text = json.dumps({
        "alphabets": {"bit": {"kind": "group", "moduli": [2]}},
        "factors": {
            "par": {"indicator": "parity", "alphabet": "bit", "degree": 3},
            "u": {"axes": [["a", "bit"]], "values": [1.0, 2.0]},
        },
        "vertices": {"p": "par", "u1": "u"},
        "edges": [
            {"id": "e1", "kind": "internal", "alphabet": "bit",
             "ends": [["p", "arg1"], ["u1", "a"]]},
            {"id": "h1", "kind": "half", "alphabet": "bit",
             "end": ["p", "arg2"], "var": "x"},
            {"id": "h2", "kind": "half", "alphabet": "bit",
             "end": ["p", "arg3"], "var": "y"},
        ],
    })
    g = loads_document(text).graph
    assert g.factor("p").tag == "parity"
    z = exterior_bruteforce(g)
    # parity glue: z(x, y) = u(x + y)
    assert z.transpose(["x", "y"]).values[0, 1] == pytest.approx(2.0)


def test_document_errors():
    with pytest.raises(ValueError, match="no graph or model section"):
        loads_document("{}")
    with pytest.raises(ValueError, match="unknown alphabet"):
        loads_document(json.dumps({
            "factors": {"f": {"axes": [["x", "nope"]], "values": [1, 2]}},
            "vertices": {"v": "f"},
            "edges": [{"id": "h", "kind": "half", "alphabet": "nope",
                       "end": ["v", "x"], "var": "x"}],
        }))


# -- checked-in example documents ---------------------------------------------------


ALL_GRAPH_DOCS = [
    "mesh_two_external.json",
    "constrained_pair.json",
    "constrained_triangle.json",
    "indep_chain_constrained.json",
    "indep_chain_generative.json",
    "generative_sum_triangle.json",
    "cdn_transformed.json",
    "elimination_triangle.json",
    "spa_chain_star.json",
    "dsp_pair.json",
    "inference_triangle.json",
    "transform_demo.json",
]


@pytest.mark.parametrize("name", ALL_GRAPH_DOCS)
def test_checked_in_documents_validate(capsys, name):
    code, out, err = run_cli(capsys, "validate", str(GRAPHS / name))
    assert code == 0, err
    payload = json.loads(out)
    assert payload["ok"] is True


def test_classify_constrained_triangle(capsys):
    code, out, _ = run_cli(capsys, "classify", str(GRAPHS / "constrained_triangle.json"))
    assert code == 0
    flags = json.loads(out)
    assert flags["constrained"] is True
    assert flags["interfaces"] == ["x1", "x2", "x3"]


def test_classify_generative_sum(capsys):
    code, out, _ = run_cli(capsys, "classify",
                           str(GRAPHS / "generative_sum_triangle.json"))
    flags = json.loads(out)
    assert flags["generative"] is True
    # cyclic generative model carries the CLI-level notice
    assert "note" in flags


def test_exterior_engines_identical_json(capsys):
    path = str(GRAPHS / "mesh_two_external.json")
    code_b, out_b, _ = run_cli(capsys, "exterior", path, "--algo", "bruteforce")
    code_e, out_e, _ = run_cli(capsys, "exterior", path, "--algo", "eliminate")
    assert code_b == 0 and code_e == 0
    tb = json.loads(out_b)["exterior"]
    te = json.loads(out_e)["exterior"]
    assert tb["axes"] == te["axes"]
    assert np.allclose(np.array(tb["values"], dtype=float),
                       np.array(te["values"], dtype=float), atol=1e-9)
    assert json.loads(out_e)["total_ops"] > 0


def test_exterior_deterministic_rerun(capsys):
    path = str(GRAPHS / "mesh_two_external.json")
    _, out1, _ = run_cli(capsys, "exterior", path, "--algo", "eliminate")
    _, out2, _ = run_cli(capsys, "exterior", path, "--algo", "eliminate")
    assert out1 == out2


def test_spa_subcommand(capsys):
    code, out, _ = run_cli(capsys, "spa", str(GRAPHS / "spa_chain_star.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["messages"] == 8
    assert set(payload["marginals"]) == {"y1", "y2", "y3", "y4"}


def test_transform_subcommand_preserves_exterior(capsys):
    path = GRAPHS / "transform_demo.json"
    code, out, _ = run_cli(capsys, "transform", str(path))
    assert code == 0
    transformed = loads_document(out).graph
    original = load_document(json.loads(path.read_text())).graph
    za = exterior_bruteforce(original)
    zb = exterior_bruteforce(transformed)
    # fourier externals on both variables relate the two exteriors
    from nfgraph.factor import contract
    from nfgraph.indicators import make_indicator
    from nfgraph.algebra import GroupAlphabet

    z2 = GroupAlphabet((2,))
    kx = make_indicator("fourier", z2, 2).relabel({"arg1": "xin", "arg2": "x"})
    ky = make_indicator("fourier", z2, 2).relabel({"arg1": "yin", "arg2": "y"})
    expected = contract([za.relabel({"x": "xin", "y": "yin"}), kx, ky])
    assert factors_allclose(zb, expected, tol=1e-9)


def test_convert_fg_to_nfg_and_back(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "convert", str(GRAPHS / "fg_triangle.json"),
                           "--to", "nfg")
    assert code == 0
    nfg_doc = tmp_path / "converted.json"
    nfg_doc.write_text(out)
    g = loads_document(out).graph
    fg = load_document(json.loads((GRAPHS / "fg_triangle.json").read_text()))
    expected = fg_global_function(fg.factor_graph)
    assert factors_allclose(exterior_bruteforce(g), expected, tol=1e-9)
    code2, out2, _ = run_cli(capsys, "convert", str(nfg_doc), "--to", "fg")
    assert code2 == 0
    assert "factor_graph" in json.loads(out2)


def test_convert_cdn(capsys):
    code, out, _ = run_cli(capsys, "convert", str(GRAPHS / "cdn_transformed.json"),
                           "--to", "cdn")
    assert code == 0
    assert "cdn" in json.loads(out)


def test_codes_list_and_dual(capsys):
    code, out, _ = run_cli(capsys, "codes", "list",
                           str(GRAPHS / "hamming_generator.txt"),
                           "--form", "generator")
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 16
    assert payload["weight_distribution"] == [1, 0, 0, 7, 7, 0, 0, 1]

    code, out, _ = run_cli(capsys, "codes", "dual",
                           str(GRAPHS / "hamming_generator.txt"),
                           "--form", "generator")
    payload = json.loads(out)
    assert payload["count"] == 8
    assert payload["weight_distribution"] == [1, 0, 0, 0, 7, 0, 0, 0]


def test_codes_parity_document(capsys):
    code, out, _ = run_cli(capsys, "codes", "parity",
                           str(GRAPHS / "hamming_parity.txt"))
    assert code == 0
    g = loads_document(out).graph
    assert len(g.half_edges) == 7


def test_infer_with_document_query(capsys):
    code, out, _ = run_cli(capsys, "infer", str(GRAPHS / "inference_triangle.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["targets"] == ["x1"]
    assert payload["table"]["shape"] == [2]


def test_infer_with_flags(capsys):
    code, out, _ = run_cli(
        capsys, "infer", str(GRAPHS / "inference_triangle.json"),
        "--target", "x1", "--marginalize", "x3", "--evidence", "x2=1",
        "--algo", "bruteforce", "--normalize")
    assert code == 0
    payload = json.loads(out)
    vals = np.array(payload["table"]["values"], dtype=float)
    assert vals.sum() == pytest.approx(1.0)


def test_sample_subcommand(capsys):
    code, out, _ = run_cli(capsys, "sample",
                           str(GRAPHS / "indep_chain_generative.json"),
                           "--seed", "7", "--count", "4000")
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 4000
    assert payload["tv_distance"] < 0.08
    code2, out2, _ = run_cli(capsys, "sample",
                             str(GRAPHS / "indep_chain_generative.json"),
                             "--seed", "7", "--count", "4000")
    assert out2 == out


# -- exit codes -------------------------------------------------------------------


def test_exit_1_on_validation_error(capsys, tmp_path):
    bad = {
        "alphabets": {"a2": {"kind": "plain", "size": 2},
                      "a3": {"kind": "plain", "size": 3}},
        "factors": {"f": {"axes": [["x", "a2"]], "values": [1, 2]},
                    "g": {"axes": [["x", "a3"]], "values": [1, 2, 3]}},
        "vertices": {"u": "f", "v": "g"},
        "edges": [{"id": "edge9", "kind": "internal", "alphabet": "a2",
                   "ends": [["u", "x"], ["v", "x"]]}],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, err = run_cli(capsys, "validate", str(path))
    assert code == 1
    assert "edge9" in err


def test_exit_2_on_contract_failure(capsys):
    # spa on a cyclic graph is a computation-stage failure
    code, out, err = run_cli(capsys, "spa", str(GRAPHS / "mesh_two_external.json"))
    assert code == 2
    assert "cycle" in err


def test_exit_64_on_usage_error(capsys):
    code, out, err = run_cli(capsys, "nonsense")
    assert code == 64
    code, out, err = run_cli(capsys, "exterior")
    assert code == 64


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "nfgraph.cli", "classify",
         str(GRAPHS / "constrained_triangle.json")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["constrained"] is True


# -- semantic checks for the remaining checked-in documents -------------------------


def test_constrained_pair_document_semantics(capsys):
    code, out, _ = run_cli(capsys, "classify", str(GRAPHS / "constrained_pair.json"))
    assert code == 0
    flags = json.loads(out)
    assert flags["constrained"] is True
    code, out, _ = run_cli(capsys, "sample", str(GRAPHS / "constrained_pair.json"),
                           "--seed", "3", "--count", "5000")
    assert code == 0
    assert json.loads(out)["tv_distance"] < 0.08


def test_dsp_pair_document_semantics():
    from nfgraph.exterior import derivative_sum_product

    doc = load_document(json.loads((GRAPHS / "dsp_pair.json").read_text()))
    out = derivative_sum_product(doc.graph, {"x1": 1, "x2": 2})
    assert set(out) == {"x1", "x2"}
    # the running sum inverts the outer difference, recovering the
    # difference-in-x2 of the joint evaluated at the evidence
    z = exterior_bruteforce(doc.graph).transpose(["x1", "x2"]).values.real
    reduced = z[:, 2] - z[:, 1]
    assert np.allclose(np.cumsum(out["x1"].values.real), reduced, atol=1e-9)


def test_elimination_triangle_document(capsys):
    path = str(GRAPHS / "elimination_triangle.json")
    _, out_b, _ = run_cli(capsys, "exterior", path, "--algo", "bruteforce")
    _, out_e, _ = run_cli(capsys, "exterior", path, "--algo", "eliminate")
    vb = np.array(json.loads(out_b)["exterior"]["values"], dtype=float)
    ve = np.array(json.loads(out_e)["exterior"]["values"], dtype=float)
    assert np.allclose(vb, ve, atol=1e-9)


def test_generative_sum_triangle_roundtrip(capsys, tmp_path):
    path = GRAPHS / "generative_sum_triangle.json"
    code, out, _ = run_cli(capsys, "convert", str(path), "--to", "cfg")
    assert code == 0
    cfg_doc = json.loads(out)
    assert "cfg" in cfg_doc
    back = tmp_path / "cfg.json"
    back.write_text(out)
    code2, out2, _ = run_cli(capsys, "convert", str(back), "--to", "nfg")
    assert code2 == 0
    g1 = load_document(json.loads(path.read_text())).graph
    g2 = loads_document(out2).graph
    z1 = exterior_bruteforce(g1)
    z2 = exterior_bruteforce(g2).transpose(z1.labels)
    assert factors_allclose(z1, z2, tol=1e-9)


def test_indep_chain_documents():
    from nfgraph.models import independence

    cons = load_document(json.loads(
        (GRAPHS / "indep_chain_constrained.json").read_text())).graph
    assert independence(cons, ["x"], ["z"], ["y"]).kind == "conditional"
    gen = load_document(json.loads(
        (GRAPHS / "indep_chain_generative.json").read_text())).graph
    assert independence(gen, ["x"], ["z"], ["y"]).kind == "marginal"

"""Model verification and the immersion search against the naive oracle."""

import itertools

import pytest

from helpers import complete_graph, grid_graph, iter_unlabeled_graphs, naive_immersion
from wallim.graphcore import MultiGraph, Path, StructuralError
from wallim.hosts import wall_host
from wallim.immersion import (
    ImmersionModel,
    SearchResult,
    find_immersion,
    model_from_document,
    model_to_document,
    verify_model,
)


def test_subgraph_is_an_immersion():
    k3, k4 = complete_graph(3), complete_graph(4)
    vm = {v: v for v in k3.vertices}
    pm = {e: Path(k4.endpoints(e), (e,)) for e in k3.edge_ids}
    ok, violation = verify_model(ImmersionModel(k3, k4, vm, pm))
    assert ok and violation is None


def test_shared_edge_rejected_with_name():
    h = MultiGraph(["a", "b", "c"], [("ab", "a", "b"), ("ac", "a", "c")])
    g = MultiGraph(["x", "y", "z"], [("xy", "x", "y"), ("yz", "y", "z")])
    vm = {"a": "x", "b": "y", "c": "z"}
    pm = {
        "ab": Path(("x", "y"), ("xy",)),
        "ac": Path(("x", "y", "z"), ("xy", "yz")),
    }
    ok, violation = verify_model(ImmersionModel(h, g, vm, pm))
    assert not ok
    assert violation.kind == "shared-edge"
    assert "xy" in violation.detail


def test_non_injective_map_rejected():
    h = MultiGraph(["a", "b"], [("ab", "a", "b")])
    g = MultiGraph(["x", "y"], [("xy", "x", "y")])
    m = ImmersionModel(h, g, {"a": "x", "b": "x"}, {"ab": Path(("x", "y"), ("xy",))})
    ok, violation = verify_model(m)
    assert not ok and violation.kind == "not-injective"


def test_unknown_path_map_edge_is_structural():
    h = MultiGraph(["a", "b"], [("ab", "a", "b")])
    g = MultiGraph(["x", "y"], [("xy", "x", "y")])
    m = ImmersionModel(h, g, {"a": "x", "b": "y"},
                       {"zz": Path(("x", "y"), ("xy",))})
    with pytest.raises(StructuralError):
        verify_model(m)


def test_strong_rejects_internal_image_hit():
    h = MultiGraph(["a", "b", "c"], [("ab", "a", "b")])
    g = MultiGraph(["x", "y", "z"],
                   [("xy", "x", "y"), ("yz", "y", "z"), ("xz", "x", "z")])
    vm = {"a": "x", "b": "z", "c": "y"}
    pm = {"ab": Path(("x", "y", "z"), ("xy", "yz"))}
    weak_ok, _ = verify_model(ImmersionModel(h, g, vm, pm), strong=False)
    strong_ok, violation = verify_model(ImmersionModel(h, g, vm, pm), strong=True)
    assert weak_ok
    assert not strong_ok and violation.kind == "strong-internal-hit"


# -- search ------------------------------------------------------------------


def test_c4_found_in_k4():
    c4 = MultiGraph(["a", "b", "c", "d"],
                    [("1", "a", "b"), ("2", "b", "c"), ("3", "c", "d"), ("4", "d", "a")])
    res = find_immersion(c4, complete_graph(4))
    assert res.status == "found"
    ok, _ = verify_model(res.model)
    assert ok


def test_k5_not_in_wall():
    cert = wall_host(4, doubled=False)
    res = find_immersion(complete_graph(5), cert.host)
    assert res.status == "none"


def test_k4_in_three_by_three_grid():
    # golden verdict, frozen after computing it with both searchers
    res = find_immersion(complete_graph(4), grid_graph(3, 3))
    assert res.status == "found"
    ok, _ = verify_model(res.model)
    assert ok
    assert naive_immersion(complete_graph(4), grid_graph(3, 3))


def test_budget_exhaustion_reported():
    res = find_immersion(complete_graph(4), grid_graph(3, 3), budget=3)
    assert res.status == "exhausted"
    assert res.model is None


def test_monotone_on_labeled_subgraph():
    g = complete_graph(5)
    h = g.without_edges(["e0_1", "e2_3"]).induced(["v0", "v1", "v2", "v3"])
    res = find_immersion(h, g)
    assert res.status == "found"


def test_degree_necessity_on_success():
    h = complete_graph(3)
    g = complete_graph(4)
    res = find_immersion(h, g)
    assert res.status == "found"
    for v in h.vertices:
        assert g.degree(res.model.vertex_map[v]) >= h.degree(v)


def test_strong_implies_weak():
    h = MultiGraph(["a", "b", "c"],
                   [("1", "a", "b"), ("2", "b", "c"), ("3", "a", "c")])
    g = complete_graph(5)
    res = find_immersion(h, g, strong=True)
    assert res.status == "found"
    assert verify_model(res.model, strong=True)[0]
    assert verify_model(res.model, strong=False)[0]


def test_parallel_pattern_edges_need_two_paths():
    h = MultiGraph(["a", "b"], [("e1", "a", "b"), ("e2", "a", "b")])
    path2 = MultiGraph(["x", "y"], [("xy", "x", "y")])
    assert find_immersion(h, path2).status == "none"
    c4 = MultiGraph(["w", "x", "y", "z"],
                    [("1", "w", "x"), ("2", "x", "y"), ("3", "y", "z"), ("4", "z", "w")])
    res = find_immersion(h, c4)
    assert res.status == "found"


def test_agreement_with_naive_on_mini_corpus():
    # spot agreement here; the full corpus runs in the acceptance suite
    patterns = [complete_graph(3),
                MultiGraph(["a", "b", "c"], [("1", "a", "b"), ("2", "b", "c")])]
    hosts = list(iter_unlabeled_graphs(4))
    checked = 0
    for h in patterns:
        for g in hosts:
            want = naive_immersion(h, g)
            got = find_immersion(h, g, budget=500000)
            assert got.status in ("found", "none")
            assert (got.status == "found") == want
            checked += 1
    assert checked >= 20


def test_model_document_round_trip():
    h = complete_graph(3)
    g = complete_graph(4)
    res = find_immersion(h, g)
    doc = model_to_document(res.model)
    m2 = model_from_document(doc, h, g)
    assert verify_model(m2)[0]
    assert model_to_document(m2) == doc

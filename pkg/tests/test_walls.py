"""Wall construction, layers, important vertices, tightness, subwalls."""

import pytest

from wallim.graphcore import edge_connectivity, trace_faces, ParameterError
from wallim.hosts import nontight_host, wall_host
from wallim.walls import (
    analysis,
    bricks,
    build_wall,
    check_tight,
    important_vertices,
    layer_cycle,
    layer_structures,
    layers,
    subwall,
    validate_cert,
    vertical_track,
    wall_paths,
)


# -- abstract walls -----------------------------------------------------------


def test_wall_height_one_is_hexagon():
    w = build_wall(1)
    assert len(w.vertices) == 6
    assert len(w.edges) == 6
    assert all(len(w.adj[v]) == 2 for v in w.vertices)


def test_wall_height_two_vertex_count_and_degrees():
    w = build_wall(2)
    assert len(w.vertices) == 16
    assert max(len(w.adj[v]) for v in w.vertices) == 3


@pytest.mark.parametrize("k", range(1, 12))
def test_wall_degrees_two_or_three(k):
    w = build_wall(k)
    assert {len(w.adj[v]) for v in w.vertices} <= {2, 3}


def test_wall_rejects_zero_height():
    with pytest.raises(ParameterError):
        build_wall(0)


def test_peeling_yields_wall_two_lower():
    # layer recursion: peeled wall of height k is a wall of height k-2
    for k in range(3, 11):
        second = layer_structures(k)[1]
        small = build_wall(k - 2)
        assert len(second.verts) == len(small.vertices)
        assert len(second.edges) == len(small.edges)
        degs = sorted(
            sum(1 for e in second.edges if v in e) for v in second.verts
        )
        degs_small = sorted(len(small.adj[v]) for v in small.vertices)
        assert degs == degs_small


# -- layers -------------------------------------------------------------------


def test_height_five_wall_has_three_layers():
    cert = wall_host(5, doubled=False)
    assert layers(cert) == [1, 2, 3]


def test_height_two_wall_single_layer_is_perimeter():
    cert = wall_host(2, doubled=False)
    assert layers(cert) == [1]
    per = layer_cycle(cert, 1)
    assert len(per) == len(layer_structures(2)[0].cycle)


def test_height_nine_layers_pairwise_disjoint():
    cert = wall_host(9, doubled=False)
    assert layers(cert) == [1, 2, 3, 4, 5]
    sets = [set(layer_cycle(cert, i)) for i in layers(cert)]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            assert not (sets[i] & sets[j])


# -- important vertices -------------------------------------------------------


def test_second_layer_of_height_five_has_ten_importants():
    cert = wall_host(5, doubled=False)
    assert len(important_vertices(cert, 2)) == 10


def test_perimeter_has_no_importants():
    cert = wall_host(5, doubled=False)
    with pytest.raises(ParameterError):
        important_vertices(cert, 1)


@pytest.mark.parametrize("k", range(3, 11))
def test_important_count_formula_exact(k):
    cert = wall_host(k, doubled=False)
    for i in layers(cert)[1:]:
        kp = k - 2 * (i - 1)
        assert len(important_vertices(cert, i)) == 4 * kp - 2


def test_subwall_height_one_two_importants():
    # innermost layer of a height-3 wall defines a height-1 subwall
    cert = wall_host(3, doubled=False)
    assert len(important_vertices(cert, 2)) == 2


# -- wall paths ---------------------------------------------------------------


def test_height_five_has_six_vertical_paths():
    cert = wall_host(5, doubled=False)
    wp = wall_paths(cert)
    assert len(wp["vertical"]) == 6
    assert len(wp["horizontal"]) == 6


def test_horizontal_paths_vertex_disjoint():
    cert = wall_host(4, doubled=False)
    wp = wall_paths(cert)
    seen = set()
    for p in wp["horizontal"]:
        vs = set(p.vertices)
        assert not (vs & seen)
        seen |= vs


def test_vertical_paths_vertex_disjoint():
    cert = wall_host(6, doubled=False)
    wp = wall_paths(cert)
    seen = set()
    for p in wp["vertical"]:
        vs = set(p.vertices)
        assert not (vs & seen)
        seen |= vs


def test_perimeter_is_union_of_boundary_paths():
    cert = wall_host(2, doubled=False)
    wp = wall_paths(cert)
    boundary = (
        set(wp["north"].vertices)
        | set(wp["south"].vertices)
        | set(wp["west"].vertices)
        | set(wp["east"].vertices)
    )
    assert boundary == set(layer_cycle(cert, 1))


def test_vertical_track_partitions_interior():
    k = 5
    per = set(layer_structures(k)[0].cycle)
    w = build_wall(k)
    for v in w.vertices - per:
        assert v in vertical_track(k, v)


# -- cert validation and faces --------------------------------------------------


@pytest.mark.parametrize("k,doubled", [(1, False), (3, False), (3, True), (5, True)])
def test_cert_validates(k, doubled):
    assert validate_cert(wall_host(k, doubled=doubled))


def test_wall_face_count_is_bricks_plus_one():
    cert = wall_host(2, doubled=False)
    tr = trace_faces(cert.host, cert.rotation)
    assert tr.face_count() == len(bricks(2)) + 1
    assert tr.euler_ok


def test_doubled_wall_is_four_edge_connected():
    cert = wall_host(3, doubled=True)
    assert edge_connectivity(cert.host) == 4


# -- tightness ------------------------------------------------------------------


def test_plain_wall_host_is_tight():
    ok, wit = check_tight(wall_host(5, doubled=False))
    assert ok and wit is None


@pytest.mark.parametrize("k", [3, 4, 5, 7])
def test_doubled_wall_is_tight(k):
    ok, _ = check_tight(wall_host(k, doubled=True))
    assert ok


def test_chord_host_is_not_tight_with_witness():
    cert, chord, bypassed = nontight_host(5)
    validate_cert(cert)
    ok, wit = check_tight(cert)
    assert not ok
    assert wit.detour.edges == (chord,)
    assert wit.bypassed == bypassed
    assert wit.layer == 2


def test_augmented_host_valid_and_tight():
    cert = wall_host(6, doubled=True, augment=True, seed=3)
    assert validate_cert(cert)
    assert check_tight(cert)[0]


# -- subwalls --------------------------------------------------------------------


def test_subwall_identity():
    cert = wall_host(5, doubled=False)
    sub = subwall(cert, 1, 1, 5)
    assert sub.vertex_map == cert.vertex_map
    assert sub.edge_map == cert.edge_map


def test_subwall_block_validates():
    cert = wall_host(10, doubled=True)
    sub = subwall(cert, 1, 1, 3)
    assert sub.height == 3
    assert validate_cert(sub)


def test_subwall_out_of_range():
    cert = wall_host(5, doubled=False)
    with pytest.raises(ParameterError):
        subwall(cert, 3, 3, 4)


def test_tiling_interiors_disjoint():
    # four height-2 tiles inside a height-10 wall
    cert = wall_host(10, doubled=False)
    interiors = []
    for i in (1, 2):
        for j in (1, 2):
            sub = subwall(cert, i, j, 2)
            assert validate_cert(sub)
            vs = set()
            for p in sub.edge_map.values():
                vs |= p.vertex_set()
            interiors.append(vs)
    for i in range(4):
        for j in range(i + 1, 4):
            assert not (interiors[i] & interiors[j])


def test_region_classification_doubled_wall():
    cert = wall_host(5, doubled=True)
    ana = analysis(cert)
    # the NW stub pruned when peeling once sits between layers 1 and 2
    assert ana.regions["3,2"] == (1, 2)
    # a deep vertex is inside the innermost layer or on it
    assert ana.regions["6,3"][0] >= 2

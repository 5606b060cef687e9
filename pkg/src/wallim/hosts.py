"""Host generators: walls and doubled walls with planar rotations, plus
seeded planar augmentations that preserve 4-edge-connectivity and
tightness.  These provide inputs satisfying the routing and model-building
preconditions at desk scale.

Construction style: the plain wall is embedded by its grid drawing (true
angular rotations); every derived edge (parallel copy, chord) is inserted
into a known face of the current embedding by rotation position, so
planarity is preserved by construction and re-verified by face tracing.
"""

from __future__ import annotations

import math
import random

from .graphcore import (
    MultiGraph,
    ParameterError,
    Path,
    RotationSystem,
    StructuralError,
    trace_faces,
)
from .walls import WallCert, _ed, build_wall, layer_structures, validate_cert


def _vid(p):
    return f"{p[0]},{p[1]}"


def _abstract_edge_id(a, b):
    a, b = _ed(a, b)
    if a[1] == b[1]:
        return f"h{a[0]},{a[1]}"
    return f"v{a[0]},{a[1]}"


def _abstract_layer_map(k):
    """abstract vertex -> layer index, or None for pruned stub vertices."""
    out = {}
    for ls in layer_structures(k):
        for p in ls.cycle:
            out[p] = ls.index
    for p in build_wall(k).vertices:
        out.setdefault(p, None)
    return out


class PlanarHost:
    """Mutable embedded multigraph under construction."""

    def __init__(self):
        self.edges = {}      # eid -> (u, v)
        self.rot = {}        # v -> list of eids (cyclic)

    def add_vertex(self, v):
        self.rot.setdefault(v, [])

    def add_edge_by_angle(self, eid, u, v, ang_u, ang_v, angles):
        self.edges[eid] = (u, v)
        self.rot.setdefault(u, []).append(eid)
        self.rot.setdefault(v, []).append(eid)
        angles[(eid, u)] = ang_u
        angles[(eid, v)] = ang_v

    def graph(self):
        return MultiGraph(self.rot.keys(), [(e, u, v) for e, (u, v) in self.edges.items()])

    def rotation(self, outer=None):
        return RotationSystem({v: tuple(es) for v, es in self.rot.items()}, outer)

    def insert_adjacent(self, new_eid, u, v, anchor, side_u, side_v):
        """Insert a parallel arc next to ``anchor`` (an edge id at both u and
        v); side is 'before' or 'after' in each rotation list."""
        self.edges[new_eid] = (u, v)
        for w, side in ((u, side_u), (v, side_v)):
            lst = self.rot[w]
            i = lst.index(anchor)
            lst.insert(i + (1 if side == "after" else 0), new_eid)

    def insert_chord_in_face(self, new_eid, face, a, b):
        """Insert an edge joining a and b through the interior of ``face``
        (a dart orbit of the current embedding)."""
        self.edges[new_eid] = (a, b)
        for w in (a, b):
            spot = None
            n = len(face)
            for i, (e, tail, head) in enumerate(face):
                if head == w:
                    e_out = face[(i + 1) % n][0]
                    lst = self.rot[w]
                    spot = lst.index(e_out)
                    break
            if spot is None:
                raise ParameterError(f"vertex {w!r} is not on the given face")
            self.rot[w].insert(spot, new_eid)

    def subdivide(self, eid, mid):
        u, v = self.edges.pop(eid)
        ea, eb = f"{eid}:a", f"{eid}:b"
        self.edges[ea] = (u, mid)
        self.edges[eb] = (mid, v)
        self.rot[u][self.rot[u].index(eid)] = ea
        self.rot[v][self.rot[v].index(eid)] = eb
        self.rot[mid] = [ea, eb]
        return ea, eb


def _face_index(g, rotation):
    """Map dart -> face (as tuple of darts) for all faces."""
    tr = trace_faces(g, rotation)
    by_dart = {}
    for f in tr.faces:
        for d in f:
            by_dart[d] = f
    return tr, by_dart


def _undoubled_wall(k):
    """PlanarHost of the plain wall with true angular rotations."""
    wall = build_wall(k)
    ph = PlanarHost()
    angles = {}
    for a, b in sorted(wall.edges):
        eid = _abstract_edge_id(a, b)
        u, v = _vid(a), _vid(b)
        ph.add_edge_by_angle(
            eid, u, v,
            math.atan2(b[1] - a[1], b[0] - a[0]),
            math.atan2(a[1] - b[1], a[0] - b[0]),
            angles,
        )
    for v, lst in ph.rot.items():
        lst.sort(key=lambda e: (angles[(e, v)], e))
    return wall, ph


def _perimeter_walk_edges(k, edge_paths):
    ls0 = layer_structures(k)[0]
    cyc = list(ls0.cycle) + [ls0.cycle[0]]
    walk = []
    for a, b in zip(cyc, cyc[1:]):
        p = edge_paths[_ed(a, b)]
        walk.extend(p.edges)
    return walk


def wall_host(k: int, doubled: bool = True, seed=None, augment: bool = False) -> WallCert:
    """A host containing the wall of height k with a disk compass.

    ``doubled`` adds a parallel copy of every edge, which makes the host
    4-edge-connected while keeping the wall cert tight.  ``augment``
    additionally applies a seeded planar augmentation (extra parallel
    copies and subdivisions of cross-layer edges).
    """
    if k < 1:
        raise ParameterError("wall height must be at least 1")
    wall, ph = _undoubled_wall(k)
    layer_map = _abstract_layer_map(k)
    layer_pos = [{p: i for i, p in enumerate(ls.cycle)} for ls in layer_structures(k)]
    for a, b in sorted(wall.edges):
        la, lb = layer_map[a], layer_map[b]
        if la is not None and la == lb:
            pos = layer_pos[la - 1]
            n = len(pos)
            if min((pos[a] - pos[b]) % n, (pos[b] - pos[a]) % n) != 1:
                raise StructuralError(f"wall edge {a}-{b} chords layer {la}")

    edge_paths = {
        _ed(a, b): Path((_vid(_ed(a, b)[0]), _vid(_ed(a, b)[1])), (_abstract_edge_id(a, b),))
        for a, b in wall.edges
    }

    g0 = ph.graph()
    rot0 = ph.rotation()
    tr, by_dart = _face_index(g0, rot0)
    if not tr.euler_ok:
        raise StructuralError("base wall embedding is not planar")
    # identify the outer face: the one walking the perimeter edge set
    per_walk = _perimeter_walk_edges(k, edge_paths)
    per_set = set(per_walk)
    outer = None
    for f in tr.faces:
        if len(f) == len(per_walk) and {e for e, _, _ in f} == per_set:
            outer = f
            break
    if outer is None:
        raise StructuralError("perimeter face not found in the base wall")

    def add_copies(n_copies_of):
        """Insert parallel copies next to their originals, bulging into a
        non-outer adjacent face.  Extra copies of the same edge nest between
        the original and the previous copy, which keeps them in that face."""
        for eid in sorted(n_copies_of):
            u, v = ph.edges[eid]
            # the face on the (e, u->v) side sits before e at u, after e at v
            if by_dart[(eid, u, v)] is not outer:
                sides = ("before", "after")
            else:
                sides = ("after", "before")
            for c in range(n_copies_of[eid]):
                ph.insert_adjacent(eid + "'" * (c + 1), u, v, eid, *sides)

    rng = random.Random(seed)
    copies = {}
    if doubled:
        for eid in ph.edges:
            copies[eid] = 1
    if augment:
        cross = [e for e in sorted(wall.edges)
                 if layer_map[e[0]] != layer_map[e[1]] or layer_map[e[0]] is None]
        for a, b in rng.sample(cross, max(1, len(cross) // 10)):
            eid = _abstract_edge_id(a, b)
            copies[eid] = copies.get(eid, 0) + 1
    if copies:
        add_copies(copies)

    if augment:
        subdiv = rng.sample(cross, max(1, len(cross) // 12))
        for a, b in subdiv:
            key = _ed(a, b)
            eid = _abstract_edge_id(a, b)
            target = eid if rng.random() < 0.5 else eid + "'"
            if target not in ph.edges:
                target = eid
            mid = f"m:{target}"
            ea, eb = ph.subdivide(target, mid)
            if target == eid:
                u, v = _vid(key[0]), _vid(key[1])
                edge_paths[key] = Path((u, mid, v), (ea, eb))

    per_walk = _perimeter_walk_edges(k, edge_paths)
    g = ph.graph()
    rotation = ph.rotation(per_walk)
    vertex_map = {p: _vid(p) for p in wall.vertices}
    return WallCert(k, vertex_map, dict(edge_paths), g, rotation)


def nontight_host(k: int) -> tuple:
    """A wall host (not doubled) plus one chord through the outermost
    annulus bypassing a three-vertex stretch of the second layer.

    Returns (cert, chord_edge_id, bypassed_vertices).
    """
    if k < 4:
        raise ParameterError("need height >= 4 for a clean chord placement")
    wall, ph = _undoubled_wall(k)
    edge_paths = {
        _ed(a, b): Path((_vid(_ed(a, b)[0]), _vid(_ed(a, b)[1])), (_abstract_edge_id(a, b),))
        for a, b in wall.edges
    }
    ls2 = layer_structures(k)[1]
    cyc2 = set(ls2.cycle)
    target = None
    for (x, y) in sorted(p for p in cyc2 if p[1] == 2):
        if x % 2 == 1 and (x + 1, 2) in cyc2 and (x + 2, 2) in cyc2:
            target = (x, 2)
            break
    if target is None:
        raise StructuralError("no brick-aligned stretch found on layer 2")
    x, _ = target
    a, c = _vid((x, 2)), _vid((x + 2, 2))
    g0 = ph.graph()
    tr, by_dart = _face_index(g0, ph.rotation())
    brick_face = None
    want = {a, _vid((x + 1, 2)), c, _vid((x, 1)), _vid((x + 1, 1)), _vid((x + 2, 1))}
    for f in tr.faces:
        if len(f) == 6 and {h for _, _, h in f} == want:
            brick_face = f
            break
    if brick_face is None:
        raise StructuralError("brick face for the chord not found")
    chord = f"chord{x},2"
    ph.insert_chord_in_face(chord, brick_face, a, c)
    per_walk = _perimeter_walk_edges(k, edge_paths)
    cert = WallCert(k, {p: _vid(p) for p in wall.vertices}, edge_paths,
                    ph.graph(), ph.rotation(per_walk))
    return cert, chord, (a, _vid((x + 1, 2)), c)

"""Walls: construction, layers, annuli, bricks, important vertices,
certified subdivided walls inside hosts, tightness checking and subwalls.

Abstract wall vertices are (x, y) integer pairs with y growing southward;
row 1 is the northern path.  A wall of height k lives on the
(k+1) x (2k+2) grid minus the vertical edges at odd x+y and minus the two
degree-1 leftovers.  All cyclic structures are normalized to clockwise
order (shoelace-positive in these screen coordinates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .graphcore import (
    MultiGraph,
    ParameterError,
    Path,
    RotationSystem,
    StructuralError,
    find_face_matching,
    trace_faces,
)


def _ed(a, b):
    """Canonical abstract edge key."""
    return (a, b) if a <= b else (b, a)


# ---------------------------------------------------------------------------
# Abstract walls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbstractWall:
    """The non-subdivided wall W_k on grid coordinates."""

    height: int
    vertices: frozenset
    edges: frozenset          # of canonical (a, b) pairs
    corners: tuple            # (c1, c2, c3, c4) in clockwise order from NW
    adj: dict = field(compare=False, repr=False)

    def degree(self, v):
        return len(self.adj[v])

    def has_edge(self, a, b):
        return _ed(a, b) in self.edges


def _grid_wall_edges(k):
    """Vertex and edge sets of the wall before degree-1 pruning."""
    verts = {(x, y) for x in range(1, 2 * k + 3) for y in range(1, k + 2)}
    edges = set()
    for y in range(1, k + 2):
        for x in range(1, 2 * k + 2):
            edges.add(_ed((x, y), (x + 1, y)))
    for y in range(1, k + 1):
        for x in range(1, 2 * k + 3):
            if (x + y) % 2 == 0:
                edges.add(_ed((x, y), (x, y + 1)))
    return verts, edges


def _prune_degree_one(verts, edges):
    verts = set(verts)
    edges = set(edges)
    adj = {v: set() for v in verts}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    stack = [v for v in verts if len(adj[v]) <= 1]
    while stack:
        v = stack.pop()
        if v not in verts:
            continue
        verts.discard(v)
        for w in adj[v]:
            adj[w].discard(v)
            edges.discard(_ed(v, w))
            if w in verts and len(adj[w]) <= 1:
                stack.append(w)
        adj[v] = set()
    return verts, edges


@lru_cache(maxsize=None)
def build_wall(k: int) -> AbstractWall:
    """The wall of height k (max degree 3, degree-1 leftovers removed)."""
    if k < 1:
        raise ParameterError("wall height must be at least 1")
    verts, edges = _prune_degree_one(*_grid_wall_edges(k))
    adj = {v: set() for v in verts}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    parity = (k + 1) % 2
    corners = ((1, 1), (2 * k + 1, 1), (2 * k + 1 + parity, k + 1), (1 + parity, k + 1))
    for c in corners:
        if c not in verts:
            raise StructuralError(f"wall corner {c} missing")
    return AbstractWall(k, frozenset(verts), frozenset(edges),
                        corners, {v: frozenset(a) for v, a in adj.items()})


def clockwise_cycle(points):
    """Normalize a closed coordinate cycle to clockwise (y grows south)."""
    pts = list(points)
    area2 = 0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        area2 += x1 * y2 - x2 * y1
    return pts if area2 > 0 else list(reversed(pts))


def _boundary_cycle(verts, adj):
    """Outer boundary of a connected grid-coordinate graph, clockwise.

    Left-first wall-following from the NW-most vertex, then shoelace
    normalization.
    """
    start = min(verts, key=lambda p: (p[1], p[0]))
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]  # E S W N

    def turn_order(d):
        i = dirs.index(d)
        return [dirs[(i - 1) % 4], d, dirs[(i + 1) % 4], dirs[(i + 2) % 4]]

    cycle = [start]
    heading = (1, 0)
    cur = start
    guard = 0
    while True:
        guard += 1
        if guard > 8 * len(verts) + 16:
            raise StructuralError("boundary walk did not close")
        for d in turn_order(heading):
            nxt = (cur[0] + d[0], cur[1] + d[1])
            if nxt in adj.get(cur, ()):
                heading = d
                cur = nxt
                break
        else:
            raise StructuralError("boundary walk is stuck")
        if cur == start:
            break
        cycle.append(cur)
    return clockwise_cycle(cycle)


@dataclass(frozen=True)
class LayerStruct:
    """Layer i of a wall: the perimeter of the (i-1)-times peeled subwall."""

    index: int
    subwall_height: int
    verts: frozenset            # vertices of the peeled subwall
    edges: frozenset
    cycle: tuple                # abstract layer cycle, clockwise
    corners: tuple              # 4 corners of the peeled subwall
    importants: tuple           # clockwise; degree-2 non-corner perimeter vertices
    side_of: dict = field(compare=False, repr=False)  # important -> N/S/W/E


def _structure_of(verts, edges, index):
    adj = {v: set() for v in verts}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    cycle = tuple(_boundary_cycle(verts, adj))
    cyc_set = set(cycle)
    ys = [y for _, y in verts]
    y0, y1 = min(ys), max(ys)
    top = sorted(p for p in cyc_set if p[1] == y0)
    bot = sorted(p for p in cyc_set if p[1] == y1)
    corners = (top[0], top[-1], bot[-1], bot[0])
    xs = [x for x, _ in verts]
    x0 = min(xs)

    def side(p):
        if p[1] == y0:
            return "N"
        if p[1] == y1:
            return "S"
        return "W" if p[0] <= x0 + 1 else "E"

    importants = tuple(p for p in cycle if len(adj[p]) == 2 and p not in corners)
    return LayerStruct(index, y1 - y0, frozenset(verts), frozenset(edges),
                       cycle, corners, importants, {p: side(p) for p in importants})


def peel(verts, edges, perimeter):
    """Remove the perimeter and prune degree-1 leftovers."""
    keep = set(verts) - set(perimeter)
    kept_edges = {e for e in edges if e[0] in keep and e[1] in keep}
    return _prune_degree_one(keep, kept_edges)


@lru_cache(maxsize=None)
def layer_structures(k: int):
    """LayerStruct for every layer 1..ceil(k/2) of the wall of height k."""
    wall = build_wall(k)
    out = []
    verts, edges = set(wall.vertices), set(wall.edges)
    for i in range(1, math.ceil(k / 2) + 1):
        ls = _structure_of(verts, edges, i)
        expect_h = k - 2 * (i - 1)
        if ls.subwall_height != expect_h:
            raise StructuralError(
                f"layer {i} defines height {ls.subwall_height}, expected {expect_h}")
        out.append(ls)
        verts, edges = peel(verts, edges, ls.cycle)
    return tuple(out)


def vertical_track(k: int, v):
    """The full vertical path of the wall through the non-perimeter
    original vertex v, as a north-to-south vertex list."""
    x, _ = v
    i = x if x % 2 == 1 else x - 1
    wall = build_wall(k)
    out = [(i, 1)]
    cur = i
    for row in range(1, k + 1):
        col = i if row % 2 == 1 else i + 1
        if col != cur:
            out.append((col, row))
            cur = col
        out.append((col, row + 1))
    track = [p for p in out if p in wall.vertices]
    if v not in track:
        raise ParameterError(f"{v} lies on no vertical track")
    return track


def horizontal_track(k: int, v):
    """The full horizontal path (row) through v, west to east."""
    wall = build_wall(k)
    return sorted(p for p in wall.vertices if p[1] == v[1])


def vertical_track_index(v):
    x = v[0]
    return x if x % 2 == 1 else x - 1


def bricks(k: int):
    """All facial 6-cycles of the wall of height k, as vertex tuples."""
    wall = build_wall(k)
    out = []
    for y in range(1, k + 1):
        for x in range(1, 2 * k + 1):
            if (x + y) % 2 != 0:
                continue
            cyc = [(x, y), (x + 1, y), (x + 2, y), (x + 2, y + 1), (x + 1, y + 1), (x, y + 1)]
            if all(p in wall.vertices for p in cyc):
                out.append(tuple(cyc))
    return out


# ---------------------------------------------------------------------------
# Certified subdivided walls in hosts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WallCert:
    """A certified subdivided wall of ``height`` inside ``host``.

    ``vertex_map`` sends abstract wall vertices to host originals;
    ``edge_map`` sends abstract wall edges to internally disjoint host
    paths between the mapped endpoints.  ``rotation`` embeds the host so
    that the compass of the wall lies in a closed disk.
    """

    height: int
    vertex_map: dict
    edge_map: dict           # canonical abstract edge -> host Path
    host: MultiGraph
    rotation: RotationSystem

    def abstract(self):
        return build_wall(self.height)

    def host_path(self, a, b) -> Path:
        p = self.edge_map[_ed(a, b)]
        if p.start == self.vertex_map[a]:
            return p
        return p.reverse()

    def map_abstract_walk(self, walk) -> Path:
        """Concatenate edge_map paths along a list of abstract vertices.

        Closed walks (first == last) are threaded as vertex/edge sequences
        without the Path simplicity check on the repeated endpoint.
        """
        vs = [self.vertex_map[walk[0]]]
        es = []
        for a, b in zip(walk, walk[1:]):
            p = self.host_path(a, b)
            vs.extend(p.vertices[1:])
            es.extend(p.edges)
        if vs[0] == vs[-1] and len(vs) > 1:
            return Path(tuple(vs), tuple(es), closed=True)
        return Path(tuple(vs), tuple(es))


class CertAnalysis:
    """Lazily derived structure shared by wall operations on one cert."""

    def __init__(self, cert: WallCert):
        self.cert = cert
        self.layerstructs = layer_structures(cert.height)
        self.n_layers = len(self.layerstructs)
        self.layer_cycle_hosts = []   # host vertex tuples, clockwise, no repeat
        self.layer_edge_walks = []    # walk[i] joins cyc[i] and cyc[i+1]
        self.layer_sets = []
        self.layer_pos = []
        for ls in self.layerstructs:
            hp = cert.map_abstract_walk(list(ls.cycle) + [ls.cycle[0]])
            cyc = hp.vertices[:-1]
            self.layer_cycle_hosts.append(cyc)
            self.layer_edge_walks.append(hp.edges)
            self.layer_sets.append(frozenset(cyc))
            self.layer_pos.append({v: i for i, v in enumerate(cyc)})
        self._locator = None
        self._regions = None
        self._compass = None
        self._hand = None

    @property
    def perimeter_cycle(self):
        return self.layer_cycle_hosts[0]

    def layer_of(self, v):
        for j, s in enumerate(self.layer_sets, start=1):
            if v in s:
                return j
        return None

    @property
    def locator(self):
        """host vertex -> ('orig', abstract vertex) or ('sub', abstract edge)."""
        if self._locator is None:
            loc = {}
            for av, hv in self.cert.vertex_map.items():
                loc[hv] = ("orig", av)
            for ae, path in self.cert.edge_map.items():
                for hv in path.interior():
                    loc[hv] = ("sub", ae)
            self._locator = loc
        return self._locator

    @property
    def compass(self) -> MultiGraph:
        """Subgraph of the host inside (and including) the perimeter.

        Edges joining two perimeter vertices but drawn on the outer side of
        the perimeter (parallel copies of perimeter edges of an enclosing
        wall, say) belong to the outside world and are excluded; the
        remaining region must be embeddable in a closed disk.
        """
        if self._compass is None:
            host = self.cert.host
            per = set(self.perimeter_cycle)
            seed = None
            for av, hv in self.cert.vertex_map.items():
                if hv not in per:
                    seed = hv
                    break
            if seed is None:
                induced = host.induced(per)
            else:
                rest = host.without_vertices(per)
                induced = host.induced(rest.component_of(seed) | per)
            walk_set = set(self.layer_edge_walks[0])
            chords = [
                e for e in induced.edge_list()
                if e not in walk_set
                and induced.endpoints(e)[0] in per
                and induced.endpoints(e)[1] in per
            ]
            if not chords:
                self._compass = induced
                self._orient(induced)
            else:
                reduced = induced.without_edges(chords)
                self._orient(reduced)
                outer_chords = [
                    e for e in chords
                    if not self.edge_in_inner_wedge(1, induced.endpoints(e)[0], e)
                ]
                self._compass = induced.without_edges(outer_chords)
        return self._compass

    # -- orientation ------------------------------------------------------

    def _orient(self, compass_graph):
        """Fix the handedness from the perimeter face of ``compass_graph``."""
        tr = trace_faces(compass_graph, self.cert.rotation.restricted(compass_graph))
        idx = find_face_matching(tr, self.layer_edge_walks[0])
        if idx is None:
            raise StructuralError("perimeter does not bound a compass face")
        cyc = self.perimeter_cycle
        pos = self.layer_pos[0]
        n = len(cyc)
        hand = None
        for _, t, h in tr.faces[idx]:
            if t in pos and h in pos:
                if (pos[t] + 1) % n == pos[h]:
                    hand = 1
                    break
                if (pos[h] + 1) % n == pos[t]:
                    hand = -1
                    break
        if hand is None:
            raise StructuralError("could not orient the perimeter face")
        self._hand = hand

    def handedness(self):
        """+1 when face tracing walks the perimeter of the compass in our
        clockwise direction, -1 when in the opposite direction."""
        if self._hand is None:
            self.compass  # orients as a side effect
        return self._hand

    def edge_in_inner_wedge(self, j, a, eid):
        """Whether non-layer edge ``eid`` at layer-j vertex ``a`` leaves on
        the side of the disk bounded by layer j (the deeper side)."""
        cyc = self.layer_cycle_hosts[j - 1]
        pos = self.layer_pos[j - 1][a]
        n = len(cyc)
        walk = self.layer_edge_walks[j - 1]
        e_prev = walk[(pos - 1) % n]   # joins cyc[pos-1] -> a
        e_next = walk[pos]             # joins a -> cyc[pos+1]
        rot = self.cert.rotation.rot[a]
        i_prev, i_next, i_e = rot.index(e_prev), rot.index(e_next), rot.index(eid)
        between = False
        i = (i_next + 1) % len(rot)
        while i != i_prev:
            if i == i_e:
                between = True
                break
            i = (i + 1) % len(rot)
        # With handedness +1 the open rotation interval from the outgoing
        # cycle edge to the incoming one covers the inner side; tests on
        # canonical wall hosts pin this convention.
        return between if self.handedness() > 0 else not between

    # -- region classification ----------------------------------------------

    @property
    def regions(self):
        """host vertex -> depth interval.

        On layer j: (j, j).  Strictly between layers j and j+1: (j, j+1).
        Strictly inside the innermost layer: (n_layers, n_layers + 1).
        Only compass vertices are classified.
        """
        if self._regions is None:
            self._regions = self._classify_regions()
        return self._regions

    def _classify_regions(self):
        compass = self.compass
        out = {}
        all_layers = set()
        for j, s in enumerate(self.layer_sets, start=1):
            for v in s:
                out[v] = (j, j)
            all_layers |= s
        rest = compass.without_vertices(all_layers)
        seen = set()
        for v0 in rest.vertex_list:
            if v0 in seen:
                continue
            comp = rest.component_of(v0)
            seen |= comp
            touched = set()
            attach = []
            for v in sorted(comp, key=repr):
                for eid, w in compass.edges_at(v):
                    r = out.get(w)
                    if r and r[0] == r[1]:
                        touched.add(r[0])
                        attach.append((v, eid, w, r[0]))
            if not touched:
                raise StructuralError("floating component inside the compass")
            lo, hi = min(touched), max(touched)
            if hi - lo > 1:
                raise StructuralError(
                    f"component touches non-adjacent layers {sorted(touched)}")
            if lo != hi:
                region = (lo, lo + 1)
            else:
                j = lo
                _, eid, a, _ = next(t for t in attach if t[3] == j)
                inner = self.edge_in_inner_wedge(j, a, eid)
                region = (j, j + 1) if inner else (j - 1, j)
                if region[0] == 0:
                    raise StructuralError(
                        "component hangs outside the perimeter inside the compass")
            for v in comp:
                out[v] = region
        return out

    def depth_at_least(self, v, j):
        """True when v lies inside or on the closed disk of layer j."""
        r = self.regions.get(v)
        return r is not None and r[0] >= j

    def strictly_between(self, j):
        """Vertices strictly between layer j and layer j+1."""
        return {v for v, r in self.regions.items() if r == (j, j + 1)}


_ANALYSES = {}


def analysis(cert: WallCert) -> CertAnalysis:
    key = id(cert)
    got = _ANALYSES.get(key)
    if got is None or got.cert is not cert:
        got = CertAnalysis(cert)
        if len(_ANALYSES) > 32:
            _ANALYSES.pop(next(iter(_ANALYSES)))
        _ANALYSES[key] = got
    return got


# ---------------------------------------------------------------------------
# Cert validation and queries
# ---------------------------------------------------------------------------


def validate_cert(cert: WallCert):
    """Full end-to-end validation; raises StructuralError on any defect."""
    wall = cert.abstract()
    host = cert.host
    vm = cert.vertex_map
    if set(vm) != set(wall.vertices):
        raise StructuralError("vertex_map keys differ from the abstract wall")
    imgs = list(vm.values())
    if len(set(imgs)) != len(imgs):
        raise StructuralError("vertex_map is not injective")
    for hv in imgs:
        if not host.has_vertex(hv):
            raise StructuralError(f"mapped vertex {hv!r} missing from host")
    if set(cert.edge_map) != set(wall.edges):
        raise StructuralError("edge_map keys differ from the abstract wall")
    seen_internal = {}
    originals = set(imgs)
    for ae, path in cert.edge_map.items():
        a, b = ae
        path.validate(host)
        if {path.start, path.end} != {vm[a], vm[b]}:
            raise StructuralError(f"edge_map path for {ae} joins wrong endpoints")
        for hv in path.interior():
            if hv in originals:
                raise StructuralError(
                    f"subdivision path for {ae} passes through original {hv!r}")
            if hv in seen_internal:
                raise StructuralError(
                    f"subdivision paths {seen_internal[hv]} and {ae} share {hv!r}")
            seen_internal[hv] = ae
    cert.rotation.validate(host)
    ana = analysis(cert)
    compass = ana.compass
    tr = trace_faces(compass, cert.rotation.restricted(compass))
    if not tr.euler_ok:
        raise StructuralError("compass embedding is not planar")
    if find_face_matching(tr, ana.layer_edge_walks[0]) is None:
        raise StructuralError("perimeter does not bound a face of the compass")
    ana.regions  # forces region classification; raises on inconsistency
    return True


def layers(cert: WallCert):
    """Layer indices, outermost (perimeter) first."""
    return list(range(1, analysis(cert).n_layers + 1))


def layer_cycle(cert: WallCert, i: int) -> tuple:
    ana = analysis(cert)
    if not 1 <= i <= ana.n_layers:
        raise ParameterError(f"layer index {i} out of range")
    return ana.layer_cycle_hosts[i - 1]


def important_vertices(cert: WallCert, i: int):
    """Important vertices of layer i in clockwise order (host vertices)."""
    ana = analysis(cert)
    if i < 2:
        raise ParameterError("the perimeter has no important vertices")
    if i > ana.n_layers:
        raise ParameterError(f"layer index {i} out of range")
    return [cert.vertex_map[p] for p in ana.layerstructs[i - 1].importants]


def wall_paths(cert: WallCert):
    """Horizontal and vertical host path families plus the boundary paths."""
    k = cert.height
    wall = build_wall(k)
    horiz = []
    for y in range(1, k + 2):
        row = sorted(p for p in wall.vertices if p[1] == y)
        horiz.append(cert.map_abstract_walk(row))
    vert = []
    for j in range(1, k + 2):
        track = vertical_track(k, (2 * j - 1, 1))
        vert.append(cert.map_abstract_walk(track))
    return {
        "horizontal": horiz,
        "vertical": vert,
        "north": horiz[0],
        "south": horiz[-1],
        "west": vert[0],
        "east": vert[-1],
    }


# -- tightness -----------------------------------------------------------------


@dataclass(frozen=True)
class TightnessWitness:
    """An improving local move: re-route ``layer``'s cycle along ``detour``,
    absorbing the arc ``bypassed`` into the annulus inside it."""

    layer: int
    bypassed: tuple
    detour: Path


def check_tight(cert: WallCert):
    """Bounded local-move search for annulus enlargements.

    Returns (True, None) when no single re-routing of a layer subpath
    through the region just outside it strictly grows the annulus vertex
    set, innermost annuli kept fixed first; otherwise (False, witness).
    """
    ana = analysis(cert)
    host = cert.host
    for j in range(ana.n_layers, 1, -1):
        layer_set = ana.layer_sets[j - 1]
        cyc = ana.layer_cycle_hosts[j - 1]
        pos = ana.layer_pos[j - 1]
        between = ana.strictly_between(j - 1)
        if between:
            sub = host.induced(between)
            seen = set()
            for v0 in sub.vertex_list:
                if v0 in seen:
                    continue
                comp = sub.component_of(v0)
                seen |= comp
                attach = sorted(
                    {w for v in comp for _, w in host.edges_at(v) if w in layer_set},
                    key=lambda w: pos[w],
                )
                if len(attach) >= 2:
                    a, b = attach[0], attach[1]
                    detour = _detour_path(host, a, b, comp)
                    return False, TightnessWitness(
                        j, tuple(_arc_between(cyc, pos[a], pos[b])), detour)
        chord = _outer_chord(ana, j)
        if chord is not None:
            eid, a, b = chord
            arc = _arc_between(cyc, pos[a], pos[b])
            return False, TightnessWitness(j, tuple(arc), Path((a, b), (eid,)))
    return True, None


def _detour_path(host, a, b, comp):
    sub = host.induced(set(comp) | {a, b})
    parent = {a: None}
    queue = [a]
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        if v == b:
            break
        for eid, w in sub.edges_at(v):
            if w in parent:
                continue
            if v == a and w == b:
                continue  # must pass through the component
            parent[w] = (v, eid)
            queue.append(w)
    if b not in parent:
        raise StructuralError("detour component lost its second attachment")
    vs, es = [b], []
    v = b
    while parent[v] is not None:
        u, eid = parent[v]
        es.append(eid)
        vs.append(u)
        v = u
    return Path(tuple(reversed(vs)), tuple(reversed(es)))


def _arc_between(cyc, i, j):
    n = len(cyc)
    if i <= j:
        return [cyc[t] for t in range(i, j + 1)]
    return [cyc[t % n] for t in range(i, j + n + 1)]


def _outer_chord(ana: CertAnalysis, j):
    """A host edge joining two layer-j vertices on the outer side that is
    not a layer edge and not parallel to a single layer edge."""
    host = ana.cert.host
    layer_set = ana.layer_sets[j - 1]
    pos = ana.layer_pos[j - 1]
    n = len(ana.layer_cycle_hosts[j - 1])
    walk_edges = set(ana.layer_edge_walks[j - 1])
    for v in sorted(layer_set, key=lambda w: pos[w]):
        for eid, w in host.edges_at(v):
            if eid in walk_edges or w not in layer_set:
                continue
            d = abs(pos[v] - pos[w])
            if min(d, n - d) <= 1:
                continue  # parallel to one layer edge: no vertex gain
            if not ana.edge_in_inner_wedge(j, v, eid):
                return eid, v, w
    return None


# -- subwalls --------------------------------------------------------------------


def subwall_at(cert: WallCert, r0: int, c0: int, h: int) -> WallCert:
    """Subwall cert of height h with its north row on wall row r0 and its
    west column at c0.  Requires (r0 + c0) even so the brick pattern of the
    window matches a wall of height h."""
    K = cert.height
    if h < 1 or h > K:
        raise ParameterError("subwall height out of range")
    if (r0 + c0) % 2 != 0:
        raise ParameterError("subwall anchor has wrong parity")
    if not (1 <= r0 and r0 + h <= K + 1 and 1 <= c0 and c0 + 2 * h + 1 <= 2 * K + 2):
        raise ParameterError("subwall window out of range")
    big = build_wall(K)
    small = build_wall(h)
    dx, dy = c0 - 1, r0 - 1
    vm = {}
    for (x, y) in small.vertices:
        tgt = (x + dx, y + dy)
        if tgt not in big.vertices:
            raise ParameterError(f"subwall window covers missing vertex {tgt}")
        vm[(x, y)] = tgt
    for (a, b) in small.edges:
        if not big.has_edge(vm[a], vm[b]):
            raise ParameterError(f"subwall window misses edge {vm[a]}-{vm[b]}")
    vertex_map = {v: cert.vertex_map[vm[v]] for v in small.vertices}
    edge_map = {_ed(a, b): cert.edge_map[_ed(vm[a], vm[b])] for (a, b) in small.edges}
    return WallCert(h, vertex_map, edge_map, cert.host, cert.rotation)


def subwall(cert: WallCert, i: int, j: int, h: int) -> WallCert:
    """Block (i, j) of the tiling of ``cert`` into height-h subwalls with a
    two-track margin between blocks (stride h + 2 rows, 2(h + 2) columns).
    (1, 1, height) is the identity."""
    if i < 1 or j < 1:
        raise ParameterError("tile indices are 1-based")
    if h == cert.height and i == 1 and j == 1:
        return subwall_at(cert, 1, 1, h)
    r0 = (h + 2) * (i - 1) + 2
    c0 = 2 * (h + 2) * (j - 1) + 3
    if (r0 + c0) % 2 != 0:
        c0 += 1
    return subwall_at(cert, r0, c0, h)

"""Multigraph core: vertices, identified edges, rotation systems, flows,
face tracing and document serialization.

Everything here is immutable after construction and safe to share between
threads.  Vertex and edge identifiers are arbitrary hashables internally;
documents stringify them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional


class GraphError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(GraphError):
    """A caller violated a documented precondition."""


class StructuralError(GraphError):
    """An internal consistency condition failed; carries audit context."""

    def __init__(self, message, audit=None):
        super().__init__(message)
        self.audit = audit or {}


class ParseError(GraphError):
    """A document could not be decoded; ``location`` points at the culprit."""

    def __init__(self, message, location=""):
        super().__init__(f"{message} (at {location or 'document root'})")
        self.location = location


def _sort_key(x):
    # vertices/edges may mix tuples and strings; sort on a stable tag+repr
    return (x.__class__.__name__, repr(x))


class MultiGraph:
    """Undirected multigraph with identified edges.

    Parallel edges are allowed and carry distinct edge ids; self-loops are
    rejected.  All adjacency listings are sorted by edge id so that every
    traversal in the package is deterministic.
    """

    __slots__ = ("_vertices", "_edges", "_adj", "_vlist")

    def __init__(self, vertices: Iterable, edges: Iterable[tuple]):
        vs = set(vertices)
        emap = {}
        adj = {v: [] for v in vs}
        for item in edges:
            eid, u, v = item
            if eid in emap:
                raise ParameterError(f"duplicate edge id {eid!r}")
            if u not in vs or v not in vs:
                raise ParameterError(f"edge {eid!r} has endpoint outside the vertex set")
            if u == v:
                raise ParameterError(f"edge {eid!r} is a self-loop")
            emap[eid] = (u, v)
            adj[u].append((eid, v))
            adj[v].append((eid, u))
        self._vertices = frozenset(vs)
        self._edges = emap
        self._adj = {v: tuple(sorted(lst, key=lambda p: _sort_key(p[0]))) for v, lst in adj.items()}
        self._vlist = tuple(sorted(vs, key=_sort_key))

    # -- basic accessors -------------------------------------------------

    @property
    def vertices(self):
        return self._vertices

    @property
    def vertex_list(self):
        return self._vlist

    @property
    def edge_ids(self):
        return self._edges.keys()

    def edge_list(self):
        return sorted(self._edges, key=_sort_key)

    @property
    def num_vertices(self):
        return len(self._vertices)

    @property
    def num_edges(self):
        return len(self._edges)

    def has_vertex(self, v):
        return v in self._vertices

    def has_edge_id(self, eid):
        return eid in self._edges

    def endpoints(self, eid):
        return self._edges[eid]

    def other_end(self, eid, v):
        u, w = self._edges[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise ParameterError(f"{v!r} is not an endpoint of {eid!r}")

    def edges_at(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def max_degree(self):
        return max((len(a) for a in self._adj.values()), default=0)

    def neighbors(self, v):
        return {w for _, w in self._adj[v]}

    def edges_between(self, u, v):
        return [eid for eid, w in self._adj[u] if w == v]

    # -- derivation ------------------------------------------------------

    def with_extra(self, vertices=(), edges=()):
        vs = set(self._vertices) | set(vertices)
        es = [(e, u, v) for e, (u, v) in self._edges.items()]
        es.extend(edges)
        return MultiGraph(vs, es)

    def induced(self, vertices):
        vs = set(vertices)
        es = [(e, u, v) for e, (u, v) in self._edges.items() if u in vs and v in vs]
        return MultiGraph(vs, es)

    def without_vertices(self, vertices):
        drop = set(vertices)
        return self.induced(self._vertices - drop)

    def without_edges(self, eids):
        drop = set(eids)
        es = [(e, u, v) for e, (u, v) in self._edges.items() if e not in drop]
        return MultiGraph(self._vertices, es)

    # -- connectivity primitives -----------------------------------------

    def component_of(self, start):
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for _, w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def components(self):
        left = set(self._vertices)
        out = []
        while left:
            v = min(left, key=_sort_key)
            comp = self.component_of(v)
            out.append(comp)
            left -= comp
        return out

    def is_connected(self):
        if not self._vertices:
            return True
        return len(self.component_of(self._vlist[0])) == self.num_vertices

    def bridges(self):
        """Edge ids whose removal disconnects their component.

        A parallel pair is never a bridge.  Iterative Tarjan lowpoint scan.
        """
        disc, low = {}, {}
        out = []
        time = [0]
        for root in self._vlist:
            if root in disc:
                continue
            stack = [(root, None, iter(self._adj[root]))]
            disc[root] = low[root] = time[0]
            time[0] += 1
            while stack:
                v, in_edge, it = stack[-1]
                advanced = False
                for eid, w in it:
                    if eid == in_edge:
                        continue
                    if w not in disc:
                        disc[w] = low[w] = time[0]
                        time[0] += 1
                        stack.append((w, eid, iter(self._adj[w])))
                        advanced = True
                        break
                    low[v] = min(low[v], disc[w])
                if advanced:
                    continue
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent] and len(self.edges_between(parent, v)) == 1:
                        out.append(in_edge)
        return out

    def __repr__(self):
        return f"MultiGraph(|V|={self.num_vertices}, |E|={self.num_edges})"


@dataclass(frozen=True)
class Path:
    """Alternating vertex/edge sequence; simple unless ``closed``.

    ``closed`` paths repeat the first vertex at the end and model cycles.
    """

    vertices: tuple
    edges: tuple
    closed: bool = False

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ParameterError("path shape mismatch")
        if len(set(self.edges)) != len(self.edges):
            raise ParameterError("path repeats an edge id")
        if self.closed:
            if self.vertices[0] != self.vertices[-1]:
                raise ParameterError("closed path must return to its start")
            if len(set(self.vertices[:-1])) != len(self.vertices) - 1:
                raise ParameterError("closed path revisits a vertex")
        else:
            if len(set(self.vertices)) != len(self.vertices):
                raise ParameterError("open path revisits a vertex")

    @staticmethod
    def single(v):
        return Path((v,), ())

    @staticmethod
    def from_alternating(seq):
        return Path(tuple(seq[0::2]), tuple(seq[1::2]))

    def to_alternating(self):
        out = []
        for v, e in zip(self.vertices, self.edges):
            out.extend((v, e))
        out.append(self.vertices[-1])
        return out

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def __len__(self):
        return len(self.edges)

    def edge_set(self):
        return frozenset(self.edges)

    def vertex_set(self):
        return frozenset(self.vertices)

    def interior(self):
        return self.vertices[1:-1]

    def reverse(self):
        return Path(tuple(reversed(self.vertices)), tuple(reversed(self.edges)), self.closed)

    def index_of(self, v):
        return self.vertices.index(v)

    def subpath(self, u, v):
        """Subpath between vertices u and v (in either order of appearance)."""
        i, j = self.vertices.index(u), self.vertices.index(v)
        if i <= j:
            return Path(self.vertices[i : j + 1], self.edges[i:j])
        return Path(self.vertices[j : i + 1], self.edges[j:i]).reverse()

    def concat(self, other: "Path") -> "Path":
        if self.end != other.start:
            raise ParameterError("paths do not chain")
        return Path(self.vertices + other.vertices[1:], self.edges + other.edges)

    def validate(self, g: MultiGraph):
        for v in self.vertices:
            if not g.has_vertex(v):
                raise StructuralError(f"path vertex {v!r} missing from graph")
        for a, e, b in zip(self.vertices, self.edges, self.vertices[1:]):
            if not g.has_edge_id(e):
                raise StructuralError(f"path edge {e!r} missing from graph")
            if {a, b} != set(g.endpoints(e)):
                raise StructuralError(f"path edge {e!r} does not join {a!r},{b!r}")


def simplify_walk(vertices, edges):
    """Cut cycles out of a walk, keeping the earliest prefix at each repeat.

    Returns (vertices, edges) of a simple path with the same endpoints and an
    edge set contained in the input's.
    """
    out_v, out_e = [], []
    pos = {}
    i = 0
    for v in vertices:
        if v in pos:
            j = pos[v]
            for w in out_v[j + 1 :]:
                del pos[w]
            del out_v[j + 1 :]
            del out_e[j:]
        else:
            out_v.append(v)
            pos[v] = len(out_v) - 1
            if len(out_v) >= 2:
                out_e.append(edges[i - 1])
        i += 1
    return tuple(out_v), tuple(out_e)


class RotationSystem:
    """Cyclic order of edge ids around each vertex, plus an outer face walk.

    Realizes a combinatorial embedding; a parallel edge appears once at each
    endpoint.  ``outer_face`` is a closed edge-id walk (may be None while a
    rotation is under construction).
    """

    __slots__ = ("rot", "outer_face")

    def __init__(self, rot: dict, outer_face=None):
        self.rot = {v: tuple(es) for v, es in rot.items()}
        self.outer_face = tuple(outer_face) if outer_face is not None else None

    def at(self, v):
        return self.rot[v]

    def validate(self, g: MultiGraph):
        seen = {}
        for v, es in self.rot.items():
            if not g.has_vertex(v):
                raise StructuralError(f"rotation lists unknown vertex {v!r}")
            expect = {e for e, _ in g.edges_at(v)}
            if set(es) != expect or len(es) != len(expect):
                raise StructuralError(f"rotation at {v!r} does not match incident edges")
            for e in es:
                seen[e] = seen.get(e, 0) + 1
        for e in g.edge_ids:
            if seen.get(e, 0) != 2:
                raise StructuralError(f"edge {e!r} does not appear exactly twice in the rotation")

    def restricted(self, g_sub: MultiGraph):
        keep = set(g_sub.edge_ids)
        rot = {
            v: tuple(e for e in es if e in keep)
            for v, es in self.rot.items()
            if g_sub.has_vertex(v)
        }
        return RotationSystem(rot, None)

    def with_outer_face(self, walk):
        return RotationSystem(self.rot, walk)


@dataclass(frozen=True)
class FaceTrace:
    """Result of tracing all faces of an embedded graph."""

    faces: tuple          # tuple of faces; each face is a tuple of darts (eid, tail, head)
    euler_ok: bool

    def face_edge_walks(self):
        return [tuple(e for e, _, _ in f) for f in self.faces]

    def face_count(self):
        return len(self.faces)


def trace_faces(g: MultiGraph, rotation: RotationSystem) -> FaceTrace:
    """Trace the face walks induced by the rotation system.

    Every dart (edge side) lies on exactly one face.  ``euler_ok`` reports
    whether v - e + f = 1 + c holds with f counted per component, i.e. the
    rotation describes a planar (genus zero) embedding.
    """
    rotation.validate(g)
    pos = {}
    for v, es in rotation.rot.items():
        for i, e in enumerate(es):
            pos[(e, v)] = i
    darts = []
    for e in g.edge_list():
        u, v = g.endpoints(e)
        darts.append((e, u, v))
        darts.append((e, v, u))
    unused = set(darts)
    faces = []
    for d0 in darts:
        if d0 not in unused:
            continue
        face = []
        d = d0
        while True:
            face.append(d)
            unused.discard(d)
            e, tail, head = d
            es = rotation.rot[head]
            i = pos[(e, head)]
            nxt = es[(i + 1) % len(es)]
            d = (nxt, head, g.other_end(nxt, head))
            if d == d0:
                break
        faces.append(tuple(face))
    # Euler check per component: faces incident to a component are counted
    # for it; an isolated vertex contributes one face in a 2-cell embedding,
    # which this trace cannot see, so skip such vertices.
    comp_id = {}
    for i, comp in enumerate(g.components()):
        for v in comp:
            comp_id[v] = i
    ncomp = len(set(comp_id.values()))
    face_comp = {}
    for f in faces:
        c = comp_id[f[0][1]]
        face_comp[f] = c
    ok = True
    for c in range(ncomp):
        vs = sum(1 for v in g.vertices if comp_id[v] == c)
        es = sum(1 for e in g.edge_ids if comp_id[g.endpoints(e)[0]] == c)
        fs = sum(1 for f in faces if face_comp[f] == c)
        if es and vs - es + fs != 2:
            ok = False
    return FaceTrace(tuple(faces), ok)


def find_face_matching(trace: FaceTrace, walk_edges) -> Optional[int]:
    """Index of a traced face whose edge walk equals ``walk_edges`` cyclically
    (either direction), or None."""
    want = list(walk_edges)
    n = len(want)
    for idx, f in enumerate(trace.faces):
        es = [e for e, _, _ in f]
        if len(es) != n or sorted(map(repr, es)) != sorted(map(repr, want)):
            continue
        doubled = es + es
        for cand in (want, list(reversed(want))):
            for s in range(n):
                if doubled[s : s + n] == cand:
                    return idx
    return None


# ---------------------------------------------------------------------------
# Flows on the unit-capacity edge space
# ---------------------------------------------------------------------------


def _augment_once(g, s, t, used):
    """One BFS augmentation in the undirected unit-capacity residual.

    ``used`` maps edge id -> None (free) or (u, v) direction of current use.
    Returns True if an augmenting path was applied.  Neighbor exploration is
    in sorted edge-id order, so the outcome is deterministic.
    """
    parent = {s: None}
    queue = [s]
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        if v == t:
            break
        for eid, w in g.edges_at(v):
            if w in parent:
                continue
            use = used.get(eid)
            if use is None or use == (w, v):
                parent[w] = (v, eid)
                queue.append(w)
    if t not in parent:
        return False
    v = t
    while parent[v] is not None:
        u, eid = parent[v]
        if used.get(eid) == (v, u):
            used[eid] = None
        else:
            used[eid] = (u, v)
        v = u
    return True


def _decompose_paths(g, s, t, used, count):
    """Extract ``count`` edge-disjoint s-t paths from a unit flow."""
    out_arcs = {}
    for eid, use in used.items():
        if use is not None:
            out_arcs.setdefault(use[0], []).append((eid, use[1]))
    for v in out_arcs:
        out_arcs[v].sort(key=lambda p: _sort_key(p[0]))
    paths = []
    for _ in range(count):
        walk_v, walk_e = [s], []
        v = s
        while v != t:
            eid, w = out_arcs[v].pop(0)
            walk_v.append(w)
            walk_e.append(eid)
            v = w
        sv, se = simplify_walk(walk_v, walk_e)
        paths.append(Path(sv, se))
    return paths


def max_edge_disjoint_paths(g: MultiGraph, s, t, limit: int):
    """Up to ``limit`` pairwise edge-disjoint s-t paths, in discovery order."""
    paths, _ = max_edge_disjoint_paths_with_cut(g, s, t, limit)
    return paths


def max_edge_disjoint_paths_with_cut(g: MultiGraph, s, t, limit: int):
    """As ``max_edge_disjoint_paths`` but also returns a cut witness.

    When fewer than ``limit`` paths exist the second component is the list of
    edge ids crossing the final residual cut (a minimum s-t cut); otherwise
    it is None.
    """
    if s == t or not g.has_vertex(s) or not g.has_vertex(t):
        raise ParameterError("flow endpoints must be two distinct graph vertices")
    used = {}
    value = 0
    while value < limit and _augment_once(g, s, t, used):
        value += 1
    cut = None
    if value < limit:
        reach = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for eid, w in g.edges_at(v):
                use = used.get(eid)
                if (use is None or use == (w, v)) and w not in reach:
                    reach.add(w)
                    stack.append(w)
        cut = sorted(
            (e for e, (u, v) in ((e, g.endpoints(e)) for e in g.edge_ids)
             if (u in reach) != (v in reach)),
            key=_sort_key,
        )
    return _decompose_paths(g, s, t, used, value), cut


def edge_connectivity(g: MultiGraph, cap: Optional[int] = None) -> int:
    """Global minimum edge cut value, counting parallel edges.

    ``cap`` short-circuits the search once the connectivity is known to be
    at least ``cap`` (useful as a threshold test).
    """
    if g.num_vertices < 2:
        raise ParameterError("edge connectivity needs at least 2 vertices")
    if not g.is_connected():
        return 0
    s = g.vertex_list[0]
    best = None
    for t in g.vertex_list[1:]:
        limit = best if best is not None else g.num_edges + 1
        if cap is not None:
            limit = min(limit, cap)
        paths, _ = max_edge_disjoint_paths_with_cut(g, s, t, limit)
        v = len(paths)
        if best is None or v < best:
            best = v
        if best == 0:
            break
    return best


class _DirectedUnitFlow:
    """Small directed unit-capacity max-flow (BFS augmenting paths).

    Nodes and arc payloads are arbitrary hashables; arcs are added in call
    order and explored in that order, so results are deterministic.
    """

    def __init__(self):
        self.adj = {}          # node -> list of arc indices
        self.arcs = []         # (tail, head, payload); arc i and i^1 are partners
        self.flow = []         # 0/1 per arc

    def _touch(self, v):
        if v not in self.adj:
            self.adj[v] = []

    def add_arc(self, u, v, payload=None):
        self._touch(u)
        self._touch(v)
        i = len(self.arcs)
        self.arcs.append((u, v, payload))
        self.flow.append(0)
        self.arcs.append((v, u, payload))
        self.flow.append(1)  # reverse starts saturated
        self.adj[u].append(i)
        self.adj[v].append(i + 1)
        return i

    def augment(self, s, t):
        parent = {s: None}
        queue = [s]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            if v == t:
                break
            for ai in self.adj[v]:
                if self.flow[ai] == 0:
                    w = self.arcs[ai][1]
                    if w not in parent:
                        parent[w] = ai
                        queue.append(w)
        if t not in parent:
            return False
        v = t
        while parent[v] is not None:
            ai = parent[v]
            self.flow[ai] = 1
            self.flow[ai ^ 1] = 0
            v = self.arcs[ai][0]
        return True

    def used_arcs(self):
        # Forward arcs carrying net flow: forward saturated and reverse empty.
        out = {}
        for i in range(0, len(self.arcs), 2):
            if self.flow[i] == 1 and self.flow[i + 1] == 0:
                u, v, payload = self.arcs[i]
                out.setdefault(u, []).append((v, payload))
        return out


def internally_disjoint_paths(g: MultiGraph, source, targets, limit: int,
                              allowed=None, banned=None):
    """Up to ``limit`` paths from ``source`` to distinct ``targets`` that are
    internally vertex-disjoint and pairwise share no vertex besides the
    source.  Targets are endpoints only (paths never pass through a target).

    ``allowed`` restricts the search to a vertex subset; ``banned`` removes
    vertices outright.  Standard split-vertex unit network, deterministic.
    """
    targets = list(targets)
    tset = set(targets)
    if source in tset:
        raise ParameterError("source may not be a target")
    ok = set(g.vertices) if allowed is None else set(allowed) & set(g.vertices)
    if banned:
        ok -= set(banned)
    ok.add(source)
    ok |= tset

    net = _DirectedUnitFlow()
    SRC, SNK = ("#src",), ("#snk",)
    # vertex capacities: (v,'i') -> (v,'o'), unit except at the source
    for v in sorted(ok, key=_sort_key):
        if v == source:
            continue
        net.add_arc((v, "i"), (v, "o"), ("cap", v))
    for e in g.edge_list():
        u, v = g.endpoints(e)
        if u not in ok or v not in ok:
            continue
        uu = SRC if u == source else (u, "o")
        vv = SRC if v == source else (v, "o")
        net.add_arc(uu, (v, "i"), ("edge", e, u, v))
        net.add_arc(vv, (u, "i"), ("edge", e, v, u))
    for t in sorted(tset, key=_sort_key):
        net.add_arc((t, "i"), SNK, ("fin", t))
    # targets absorb: remove their pass-through capacity by rerouting the
    # cap arc budget; simplest is to delete (t,'i')->(t,'o') arcs
    for t in tset:
        for ai in list(net.adj.get((t, "i"), ())):
            payload = net.arcs[ai][2]
            if payload and payload[0] == "cap":
                net.flow[ai] = 1  # permanently saturated forward
                net.flow[ai ^ 1] = 1  # and no residual back-arc

    value = 0
    while value < limit and net.augment(SRC, SNK):
        value += 1

    used = net.used_arcs()
    paths = []
    for v in used:
        used[v].sort(key=lambda p: _sort_key(p[1]))
    for _ in range(value):
        walk_v, walk_e = [source], []
        node = SRC
        while True:
            head, payload = used[node].pop(0)
            if payload[0] == "fin":
                break
            if payload[0] == "cap":
                node = head
                continue
            _, eid, _u, w = payload
            walk_v.append(w)
            walk_e.append(eid)
            node = head
        sv, se = simplify_walk(walk_v, walk_e)
        paths.append(Path(sv, se))
    ends = [p.end for p in paths]
    if len(set(ends)) != len(ends) or not set(ends) <= tset:
        raise StructuralError("vertex-disjoint extraction produced bad endpoints")
    return paths


def disjoint_path_matching(g: MultiGraph, sources, sinks, limit: int, allowed=None):
    """Up to ``limit`` fully vertex-disjoint paths, each from a distinct
    source to a distinct sink.  ``allowed`` restricts usable vertices
    (sources and sinks are always usable).  Deterministic."""
    sources = list(sources)
    sinks = list(sinks)
    sset, tset = set(sources), set(sinks)
    if sset & tset:
        raise ParameterError("sources and sinks must be disjoint")
    ok = set(g.vertices) if allowed is None else set(allowed) & set(g.vertices)
    ok |= sset | tset

    net = _DirectedUnitFlow()
    SRC, SNK = ("#src",), ("#snk",)
    for v in sorted(ok, key=_sort_key):
        net.add_arc((v, "i"), (v, "o"), ("cap", v))
    for s in sorted(sset, key=_sort_key):
        net.add_arc(SRC, (s, "i"), ("from", s))
    for t in sorted(tset, key=_sort_key):
        net.add_arc((t, "i"), SNK, ("fin", t))
        # sinks absorb; their pass-through capacity is removed
        for ai in net.adj[(t, "i")]:
            payload = net.arcs[ai][2]
            if payload and payload[0] == "cap":
                net.flow[ai] = 1
                net.flow[ai ^ 1] = 1
    for e in g.edge_list():
        u, v = g.endpoints(e)
        if u not in ok or v not in ok:
            continue
        net.add_arc((u, "o"), (v, "i"), ("edge", e, u, v))
        net.add_arc((v, "o"), (u, "i"), ("edge", e, v, u))

    value = 0
    while value < limit and net.augment(SRC, SNK):
        value += 1

    used = net.used_arcs()
    for v in used:
        used[v].sort(key=lambda p: _sort_key(p[1]))
    paths = []
    for _ in range(value):
        head, payload = used[SRC].pop(0)
        walk_v = [payload[1]]
        walk_e = []
        node = head
        while True:
            head, payload = used[node].pop(0)
            if payload[0] == "fin":
                break
            if payload[0] == "cap":
                node = head
                continue
            _, eid, _u, w = payload
            walk_v.append(w)
            walk_e.append(eid)
            node = head
        sv, se = simplify_walk(walk_v, walk_e)
        paths.append(Path(sv, se))
    return paths


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def _vid(v):
    if isinstance(v, tuple):
        return ",".join(str(c) for c in v)
    return str(v)


def graph_to_document(g: MultiGraph, rotation: Optional[RotationSystem] = None,
                      wall_cert=None, immersion_model=None) -> dict:
    doc = {
        "vertices": [_vid(v) for v in g.vertex_list],
        "edges": [
            {"id": _vid(e), "u": _vid(g.endpoints(e)[0]), "v": _vid(g.endpoints(e)[1])}
            for e in g.edge_list()
        ],
    }
    if rotation is not None:
        doc["rotation"] = {_vid(v): [_vid(e) for e in es] for v, es in sorted(
            rotation.rot.items(), key=lambda kv: _sort_key(kv[0]))}
        if rotation.outer_face is not None:
            doc["outer_face"] = [_vid(e) for e in rotation.outer_face]
    if wall_cert is not None:
        doc["wall_cert"] = wall_cert
    if immersion_model is not None:
        doc["immersion_model"] = immersion_model
    return doc


def document_to_graph(doc: dict):
    """Decode a graph document.

    Returns (graph, rotation_or_None, wall_cert_dict_or_None,
    immersion_model_dict_or_None).  Raises ParseError with a location on
    malformed input.
    """
    if not isinstance(doc, dict):
        raise ParseError("document must be an object", "")
    try:
        vs = doc["vertices"]
    except KeyError:
        raise ParseError("missing field 'vertices'", "vertices")
    if not isinstance(vs, list) or not all(isinstance(v, str) for v in vs):
        raise ParseError("'vertices' must be an array of string ids", "vertices")
    try:
        es_raw = doc["edges"]
    except KeyError:
        raise ParseError("missing field 'edges'", "edges")
    edges = []
    for i, rec in enumerate(es_raw):
        loc = f"edges[{i}]"
        if not isinstance(rec, dict):
            raise ParseError("edge record must be an object", loc)
        for k in ("id", "u", "v"):
            if k not in rec:
                raise ParseError(f"edge record missing '{k}'", loc)
        edges.append((rec["id"], rec["u"], rec["v"]))
    try:
        g = MultiGraph(vs, edges)
    except GraphError as exc:
        raise ParseError(str(exc), "edges")
    rotation = None
    if "rotation" in doc:
        rot_raw = doc["rotation"]
        if not isinstance(rot_raw, dict):
            raise ParseError("'rotation' must be an object", "rotation")
        rotation = RotationSystem(
            {v: tuple(es) for v, es in rot_raw.items()},
            doc.get("outer_face"),
        )
        try:
            rotation.validate(g)
        except GraphError as exc:
            raise ParseError(str(exc), "rotation")
    return g, rotation, doc.get("wall_cert"), doc.get("immersion_model")


def dumps_document(doc: dict) -> str:
    """Canonical JSON text: sorted keys, compact separators, one newline."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}")
    return doc


def dot_export(g: MultiGraph, name="G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertex_list:
        lines.append(f'  "{_vid(v)}";')
    for e in g.edge_list():
        u, v = g.endpoints(e)
        lines.append(f'  "{_vid(u)}" -- "{_vid(v)}" [label="{_vid(e)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

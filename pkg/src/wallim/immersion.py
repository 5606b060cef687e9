"""Immersion models: verification (weak and strong) and a budgeted
brute-force decision search for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graphcore import (
    MultiGraph,
    ParameterError,
    Path,
    StructuralError,
    _sort_key,
    max_edge_disjoint_paths,
)


@dataclass(frozen=True)
class ImmersionModel:
    """An injective vertex map plus pairwise edge-disjoint connecting paths."""

    pattern: MultiGraph
    host: MultiGraph
    vertex_map: dict          # pattern vertex -> host vertex
    path_map: dict            # pattern edge id -> host Path


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: tuple

    def __str__(self):
        return f"{self.kind}: {', '.join(map(repr, self.detail))}"


def verify_model(m: ImmersionModel, strong: bool = False):
    """Check every model invariant; returns (ok, first violation or None).

    With ``strong`` the connecting paths must also avoid mapped vertices
    internally.
    """
    pat, host = m.pattern, m.host
    if set(m.vertex_map) != set(pat.vertices):
        return False, Violation("vertex-map-domain", (sorted(map(repr, pat.vertices))[:3],))
    imgs = {}
    for v in sorted(pat.vertices, key=_sort_key):
        hv = m.vertex_map[v]
        if not host.has_vertex(hv):
            return False, Violation("unmapped-host-vertex", (v, hv))
        if hv in imgs:
            return False, Violation("not-injective", (imgs[hv], v, hv))
        imgs[hv] = v
    if set(m.path_map) != set(pat.edge_ids):
        missing = set(pat.edge_ids) ^ set(m.path_map)
        raise StructuralError(f"path_map keys mismatch pattern edges: {sorted(map(repr, missing))}")
    used = {}
    image_set = set(imgs)
    for e in sorted(pat.edge_ids, key=_sort_key):
        path = m.path_map[e]
        try:
            path.validate(host)
        except StructuralError as exc:
            return False, Violation("bad-path", (e, str(exc)))
        u, v = pat.endpoints(e)
        if {path.start, path.end} != {m.vertex_map[u], m.vertex_map[v]}:
            return False, Violation("wrong-endpoints", (e, path.start, path.end))
        for he in path.edges:
            if he in used:
                return False, Violation("shared-edge", (used[he], e, he))
            used[he] = e
        if strong:
            for hv in path.interior():
                if hv in image_set:
                    return False, Violation("strong-internal-hit", (e, hv))
    return True, None


@dataclass(frozen=True)
class SearchResult:
    status: str              # "found" | "none" | "exhausted"
    model: Optional[ImmersionModel]
    expansions: int


def find_immersion(h: MultiGraph, g: MultiGraph, strong: bool = False,
                   budget: int = 200000) -> SearchResult:
    """Backtracking search for a model of ``h`` in ``g``.

    Vertex maps are enumerated injectively with degree pruning (pattern
    vertices by decreasing degree, host candidates in sorted order); for a
    complete map the connecting paths are packed edge-disjointly by exact
    backtracking with flow-based pruning.  ``budget`` counts search-tree
    node expansions; hitting it yields status "exhausted".  Every found
    model is verified before being returned.
    """
    if h.num_vertices > g.num_vertices:
        raise ParameterError("pattern has more vertices than the host")
    pat_order = sorted(h.vertices, key=lambda v: (-h.degree(v), _sort_key(v)))
    host_verts = g.vertex_list
    edges_order = sorted(h.edge_ids, key=_sort_key)
    state = {"expansions": 0}

    def over_budget():
        state["expansions"] += 1
        return state["expansions"] > budget

    def pack_paths(vmap):
        """Pack edge-disjoint connecting paths for a full vertex map."""
        assignment = {}
        used = set()

        def feasible(idx):
            # flow-based pruning: each remaining pattern pair must still
            # admit as many edge-disjoint paths as it needs
            remaining = {}
            for e in edges_order[idx:]:
                u, v = h.endpoints(e)
                key = tuple(sorted((vmap[u], vmap[v]), key=_sort_key))
                remaining[key] = remaining.get(key, 0) + 1
            if not remaining:
                return True
            avail = g.without_edges(used)
            for (a, b), need in remaining.items():
                if len(max_edge_disjoint_paths(avail, a, b, need)) < need:
                    return False
            return True

        def rec(idx):
            if over_budget():
                raise _Budget()
            if idx == len(edges_order):
                return True
            if not feasible(idx):
                return False
            e = edges_order[idx]
            u, v = h.endpoints(e)
            s, t = vmap[u], vmap[v]
            for path in _simple_paths(g, s, t, used, strong, set(vmap.values())):
                assignment[e] = path
                used.update(path.edges)
                if rec(idx + 1):
                    return True
                used.difference_update(path.edges)
                del assignment[e]
            return False

        if rec(0):
            return dict(assignment)
        return None

    def extend(i, vmap, taken):
        if over_budget():
            raise _Budget()
        if i == len(pat_order):
            packed = pack_paths(vmap)
            if packed is None:
                return None
            model = ImmersionModel(h, g, dict(vmap), packed)
            ok, violation = verify_model(model, strong=strong)
            if not ok:
                raise StructuralError(f"search produced an invalid model: {violation}")
            return model
        pv = pat_order[i]
        need = h.degree(pv)
        for hv in host_verts:
            if hv in taken or g.degree(hv) < need:
                continue
            vmap[pv] = hv
            taken.add(hv)
            got = extend(i + 1, vmap, taken)
            if got is not None:
                return got
            taken.discard(hv)
            del vmap[pv]
        return None

    try:
        model = extend(0, {}, set())
    except _Budget:
        return SearchResult("exhausted", None, state["expansions"])
    if model is None:
        return SearchResult("none", None, state["expansions"])
    return SearchResult("found", model, state["expansions"])


class _Budget(Exception):
    pass


def _simple_paths(g: MultiGraph, s, t, banned_edges, strong, images):
    """Yield simple s-t paths avoiding ``banned_edges`` in deterministic
    order; under ``strong`` interior vertices avoid ``images``."""
    stack = [(s, (s,), ())]
    while stack:
        v, vs, es = stack.pop()
        if v == t:
            yield Path(vs, es)
            continue
        branches = []
        for eid, w in g.edges_at(v):
            if eid in banned_edges or eid in es or w in vs:
                continue
            if strong and w != t and w in images:
                continue
            branches.append((w, vs + (w,), es + (eid,)))
        stack.extend(reversed(branches))


def model_to_document(m: ImmersionModel) -> dict:
    from .graphcore import _vid
    return {
        "vertex_map": [
            {"pattern": _vid(v), "host": _vid(m.vertex_map[v])}
            for v in sorted(m.pattern.vertices, key=_sort_key)
        ],
        "path_map": [
            {"edge": _vid(e), "path": [_vid(x) for x in m.path_map[e].to_alternating()]}
            for e in sorted(m.pattern.edge_ids, key=_sort_key)
        ],
    }


def model_from_document(doc: dict, pattern: MultiGraph, host: MultiGraph) -> ImmersionModel:
    vm = {rec["pattern"]: rec["host"] for rec in doc["vertex_map"]}
    pm = {}
    for rec in doc["path_map"]:
        seq = rec["path"]
        pm[rec["edge"]] = Path(tuple(seq[0::2]), tuple(seq[1::2]))
    return ImmersionModel(pattern, host, vm, pm)

"""Confluence machinery: overlapping-vertex detection, uncrossing a fan of
edge-disjoint paths into a confluent one, detachment trees that split a
vertex so confluent paths become vertex-disjoint there, and the reverse
contraction projecting surgered paths back into the original host.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphcore import (
    MultiGraph,
    ParameterError,
    Path,
    RotationSystem,
    StructuralError,
    simplify_walk,
)
from .walls import WallCert, _ed


@dataclass(frozen=True)
class PathFamily:
    """Edge-disjoint paths from one source; targets may repeat.

    Carries the host and its rotation system so that overlap queries are
    self-contained.
    """

    source: object
    paths: tuple
    host: MultiGraph
    rotation: RotationSystem

    def __post_init__(self):
        seen = set()
        for p in self.paths:
            if p.start != self.source:
                raise ParameterError("family paths must share the source")
            if p.end == self.source:
                raise ParameterError("family targets must differ from the source")
            dup = seen & p.edge_set()
            if dup:
                raise ParameterError(f"family paths share edges {sorted(dup)!r}")
            seen |= p.edge_set()

    @property
    def targets(self):
        return tuple(p.end for p in self.paths)

    def edge_union(self):
        out = set()
        for p in self.paths:
            out |= p.edge_set()
        return out

    def with_paths(self, paths):
        return PathFamily(self.source, tuple(paths), self.host, self.rotation)


def _ends_at(path: Path, x):
    """The one or two path edges incident to x on ``path``."""
    i = path.vertices.index(x)
    out = []
    if i > 0:
        out.append(path.edges[i - 1])
    if i < len(path.edges):
        out.append(path.edges[i])
    return out


def _interleaved(rot, a1, a2, b1, b2):
    """Do chords {a1,a2} and {b1,b2} cross in the cyclic order ``rot``?"""
    pos = {e: i for i, e in enumerate(rot)}
    ia1, ia2 = pos[a1], pos[a2]
    inside = 0
    i = (ia1 + 1) % len(rot)
    while i != ia2:
        if i == pos[b1] or i == pos[b2]:
            inside += 1
        i = (i + 1) % len(rot)
    return inside == 1


def overlapping_vertices(fam: PathFamily):
    """All (vertex, (i, j)) where paths i and j cross transversally.

    A shared internal vertex x counts when the four path edge-ends at x
    interleave in the rotation there.
    """
    out = set()
    n = len(fam.paths)
    for i in range(n):
        pi = fam.paths[i]
        interior_i = set(pi.vertices[1:-1])
        for j in range(i + 1, n):
            pj = fam.paths[j]
            for x in pj.vertices[1:-1]:
                if x not in interior_i:
                    continue
                rot = fam.rotation.rot.get(x)
                if rot is None:
                    raise StructuralError(f"no rotation at shared vertex {x!r}")
                a = _ends_at(pi, x)
                b = _ends_at(pj, x)
                if len(a) == 2 and len(b) == 2 and _interleaved(rot, a[0], a[1], b[0], b[1]):
                    out.add((x, (i, j)))
    return out


def _first_overlap(fam: PathFamily):
    """Deterministic pick: lowest path pair, then earliest along path i."""
    n = len(fam.paths)
    for i in range(n):
        pi = fam.paths[i]
        for j in range(i + 1, n):
            pj = fam.paths[j]
            interior_j = set(pj.vertices[1:-1])
            for x in pi.vertices[1:-1]:
                if x not in interior_j:
                    continue
                rot = fam.rotation.rot.get(x)
                if rot is None:
                    raise StructuralError(f"no rotation at shared vertex {x!r}")
                a = _ends_at(pi, x)
                b = _ends_at(pj, x)
                if _interleaved(rot, a[0], a[1], b[0], b[1]):
                    return x, i, j
    return None


def make_confluent(fam: PathFamily) -> PathFamily:
    """Uncross the family until no overlapping vertex remains.

    Each step swaps the two continuations at an overlapping vertex and
    simplifies; the pair (total edge count, overlap count) drops strictly
    in lexicographic order, which bounds the iteration.  The output keeps
    the source, the multiset of targets and uses only input edges.
    """
    cur = fam
    total0 = len(cur.edge_union())
    overlaps0 = len(overlapping_vertices(cur))
    guard = 0
    while True:
        pick = _first_overlap(cur)
        if pick is None:
            return cur
        guard += 1
        if guard > 4 * total0 * (overlaps0 + 2) + 64:
            raise StructuralError("uncrossing did not terminate")
        x, i, j = pick
        pi, pj = cur.paths[i], cur.paths[j]
        ii, jj = pi.vertices.index(x), pj.vertices.index(x)
        new_i = simplify_walk(
            pi.vertices[: ii + 1] + pj.vertices[jj + 1 :],
            pi.edges[:ii] + pj.edges[jj:],
        )
        new_j = simplify_walk(
            pj.vertices[: jj + 1] + pi.vertices[ii + 1 :],
            pj.edges[:jj] + pi.edges[ii:],
        )
        paths = list(cur.paths)
        paths[i] = Path(*new_i)
        paths[j] = Path(*new_j)
        nxt = cur.with_paths(paths)
        pot_cur = (len(cur.edge_union()), len(overlapping_vertices(cur)))
        pot_nxt = (len(nxt.edge_union()), len(overlapping_vertices(nxt)))
        if not pot_nxt < pot_cur:
            raise StructuralError(
                f"uncrossing potential did not drop: {pot_cur} -> {pot_nxt}")
        cur = nxt


# ---------------------------------------------------------------------------
# Detachment trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetachmentTree:
    """Plane tree replacing a vertex.

    Node labels: ("end", eid) boundary leaves, one per incident host edge;
    ("sub", t) the midpoint of path t's chord; ("hub", f) a face connector.
    ``rotations`` fixes a planar embedding consistent with the boundary
    order ``order``.
    """

    center: object
    order: tuple                # rotation of host edge ids around the center
    chords: dict                # path tag -> (end eid 1, end eid 2)
    nodes: tuple
    edges: tuple                # (node, node) pairs
    rotations: dict = field(compare=False)

    def leaf(self, eid):
        return ("end", eid)

    def adjacency(self):
        adj = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def tree_path(self, a, b):
        adj = self.adjacency()
        parent = {a: None}
        stack = [a]
        while stack:
            v = stack.pop()
            if v == b:
                break
            for w in adj[v]:
                if w not in parent:
                    parent[w] = v
                    stack.append(w)
        if b not in parent:
            raise StructuralError("detachment tree is disconnected")
        out = [b]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return list(reversed(out))

    def steiner(self, leaf_nodes):
        """An internal node from which the given leaves are reachable by
        internally disjoint tree paths (the median for three leaves, the
        chord midpoint area for two)."""
        if len(leaf_nodes) == 2:
            p = self.tree_path(leaf_nodes[0], leaf_nodes[1])
            return p[len(p) // 2]
        if len(leaf_nodes) == 3:
            p01 = set(self.tree_path(leaf_nodes[0], leaf_nodes[1]))
            p02 = self.tree_path(leaf_nodes[0], leaf_nodes[2])
            p12 = set(self.tree_path(leaf_nodes[1], leaf_nodes[2]))
            for v in p02:
                if v in p01 and v in p12:
                    return v
            raise StructuralError("no median found in the detachment tree")
        raise ParameterError("steiner defined for 2 or 3 leaves")


def _chords_cross(c1, c2):
    (p1, q1), (p2, q2) = c1, c2
    return (p1 < p2 < q1 < q2) or (p2 < p1 < q2 < q1)


def build_detachment_tree(u, end_pairs, rotation_at_u) -> DetachmentTree:
    """Construct the detachment tree at ``u``.

    ``end_pairs`` maps a path tag to the pair of host edges the path uses
    at u; pairs must be pairwise non-crossing in ``rotation_at_u``
    (confluence), or a ParameterError is raised.  The boundary circle is
    subdivided chord-wise; every bounded face contributes a hub joined to
    its free edge-end leaves and its chord midpoints; boundary arcs are
    then discarded and degree-1 hubs pruned.
    """
    order = tuple(rotation_at_u)
    pos = {e: i for i, e in enumerate(order)}
    chords = {}
    for tag, (e1, e2) in end_pairs.items():
        p, q = sorted((pos[e1], pos[e2]))
        chords[tag] = (p, q)
    tags = sorted(chords, key=lambda t: (chords[t], repr(t)))
    for a in range(len(tags)):
        for b in range(a + 1, len(tags)):
            if _chords_cross(chords[tags[a]], chords[tags[b]]):
                raise ParameterError(
                    f"paths {tags[a]!r} and {tags[b]!r} cross at {u!r}: not confluent")

    # laminar nesting of chord intervals
    parent = {t: None for t in tags}
    stack = []
    for t in sorted(tags, key=lambda t: (chords[t][0], -chords[t][1])):
        p, q = chords[t]
        while stack and not (chords[stack[-1]][0] < p and q < chords[stack[-1]][1]):
            stack.pop()
        parent[t] = stack[-1] if stack else None
        stack.append(t)
    children = {t: [] for t in tags}
    top = []
    for t in tags:
        if parent[t] is None:
            top.append(t)
        else:
            children[parent[t]].append(t)

    nodes = [("end", e) for e in order]
    edges = []
    rotations = {}
    sub = {t: ("sub", t) for t in tags}
    for t in tags:
        e1 = order[chords[t][0]]
        e2 = order[chords[t][1]]
        nodes.append(sub[t])
        edges.append((("end", e1), sub[t]))
        edges.append((sub[t], ("end", e2)))

    used_positions = {p for t in tags for p in chords[t]}

    def face_items(lo, hi, kids):
        """Attachment nodes for the face spanning positions (lo, hi)."""
        items = []
        kid_spans = sorted((chords[t], t) for t in kids)
        i = lo + 1
        ki = 0
        while i < hi:
            if ki < len(kid_spans) and kid_spans[ki][0][0] == i:
                items.append(sub[kid_spans[ki][1]])
                i = kid_spans[ki][0][1] + 1
                ki += 1
                continue
            if i not in used_positions:
                items.append(("end", order[i]))
            i += 1
        return items

    # faces: one per chord (its inner side) plus the root face outside all
    # top-level chords; a hub joins the free ends and chord midpoints of
    # its face, and is dropped when that leaves it with degree below two
    faces = []
    for t in tags:
        lo, hi = chords[t]
        faces.append((t, face_items(lo, hi, children[t]) + [sub[t]]))
    root_items = []
    top_spans = sorted((chords[t], t) for t in top)
    i = ki = 0
    while i < len(order):
        if ki < len(top_spans) and top_spans[ki][0][0] == i:
            root_items.append(sub[top_spans[ki][1]])
            i = top_spans[ki][0][1] + 1
            ki += 1
            continue
        if i not in used_positions:
            root_items.append(("end", order[i]))
        i += 1
    faces.append(("root", root_items))

    kept_hub = {}
    for fkey, items in faces:
        if len(items) <= 1:
            continue
        hub = ("hub", fkey)
        kept_hub[fkey] = hub
        nodes.append(hub)
        for it in items:
            edges.append((hub, it))
        rotations[hub] = tuple(items)

    for t in tags:
        e1, e2 = order[chords[t][0]], order[chords[t][1]]
        rot = [("end", e1)]
        if t in kept_hub:
            rot.append(kept_hub[t])
        rot.append(("end", e2))
        parent_face = parent[t] if parent[t] is not None else "root"
        if parent_face in kept_hub:
            rot.append(kept_hub[parent_face])
        rotations[sub[t]] = tuple(rot)

    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    for e in order:
        rotations[("end", e)] = tuple(sorted(adj.get(("end", e), ()), key=repr))

    tree = DetachmentTree(
        u, order, {t: (order[chords[t][0]], order[chords[t][1]]) for t in tags},
        tuple(nodes), tuple(edges), rotations)
    _check_tree(tree)
    return tree


def _check_tree(tree: DetachmentTree):
    adj = tree.adjacency()
    n, m = len(tree.nodes), len(tree.edges)
    if m != n - 1:
        raise StructuralError(f"detachment graph has {m} edges on {n} nodes")
    seen = {tree.nodes[0]}
    stack = [tree.nodes[0]]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        raise StructuralError("detachment graph is disconnected")
    for e in tree.order:
        if len(adj[("end", e)]) != 1:
            raise StructuralError(f"boundary node for {e!r} is not a leaf")


# ---------------------------------------------------------------------------
# Vertex replacement and contraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurgeryLogEntry:
    vertex: object
    tree: DetachmentTree
    leaf_vertex: dict        # host edge id at u -> new leaf vertex id
    edge_rename: dict        # host edge id at u -> replacement edge id
    tree_vertices: frozenset
    tree_edges: dict         # new edge id -> (vertex, vertex)


@dataclass(frozen=True)
class SurgeryState:
    """Host + rotation + optional cert + family, evolving under surgery."""

    host: MultiGraph
    rotation: RotationSystem
    cert: WallCert
    family: PathFamily
    log: tuple = ()


def _node_vid(u, node):
    kind, key = node
    return f"tn{kind[0]}:{u}:{key}"


def replace_vertices(state: SurgeryState, vertices) -> SurgeryState:
    """Replace every vertex in ``vertices`` by its detachment tree, in one
    rebuild of the host.

    Each host edge at a replaced vertex is cut at a fresh leaf vertex and
    renamed once; paths through a replaced vertex are re-threaded along
    their chords, wall structure through it via a Steiner node.  The
    embedding stays planar because each tree is drawn inside the disk its
    vertex occupied.
    """
    us = sorted(set(vertices), key=repr)
    if not us:
        return state
    fam = state.family
    uset = set(us)
    if fam.source in uset or uset & set(fam.targets):
        raise ParameterError("cannot replace the source or a target")
    host, rotation, cert = state.host, state.rotation, state.cert

    through = {u: {} for u in us}
    for idx, p in enumerate(fam.paths):
        for x in p.vertices[1:-1]:
            if x in uset:
                ends = _ends_at(p, x)
                through[x][idx] = (ends[0], ends[1])
    trees = {u: build_detachment_tree(u, through[u], rotation.rot[u]) for u in us}

    leaf_vertex = {u: {e: _node_vid(u, ("end", e)) for e in trees[u].order} for u in us}
    tree_edge_ids = {}
    for u in us:
        ids = {}
        for i, (a, b) in enumerate(trees[u].edges):
            ids[(a, b)] = f"te:{u}:{i}"
            ids[(b, a)] = f"te:{u}:{i}"
        tree_edge_ids[u] = ids

    rename = {}
    for u in us:
        for e in trees[u].order:
            rename[e] = f"{e}@"

    # --- new host ----------------------------------------------------------
    new_edges = []
    for e in host.edge_list():
        a, b = host.endpoints(e)
        a2 = leaf_vertex[a][e] if a in uset else a
        b2 = leaf_vertex[b][e] if b in uset else b
        new_edges.append((rename.get(e, e), a2, b2))
    for u in us:
        seen = set()
        for (a, b) in trees[u].edges:
            eid = tree_edge_ids[u][(a, b)]
            if eid not in seen:
                seen.add(eid)
                new_edges.append((eid, _node_vid(u, a), _node_vid(u, b)))
    new_vertices = set(host.vertices) - uset
    for u in us:
        new_vertices |= {_node_vid(u, n) for n in trees[u].nodes}
    new_host = MultiGraph(new_vertices, new_edges)

    # --- new rotation ---------------------------------------------------------
    new_rot = {}
    for v, es in rotation.rot.items():
        if v in uset:
            continue
        new_rot[v] = tuple(rename.get(e, e) for e in es)
    for u in us:
        tree = trees[u]
        for node in tree.nodes:
            vid = _node_vid(u, node)
            items = [tree_edge_ids[u][(node, nb)] for nb in tree.rotations[node]]
            if node[0] == "end":
                items.append(rename[node[1]])
            new_rot[vid] = tuple(items)
    outer = tuple(rename.get(e, e) for e in (rotation.outer_face or ()))
    new_rotation = RotationSystem(new_rot, outer or None)

    # --- splicing helper ---------------------------------------------------------
    def splice(path: Path, chain_for) -> Path:
        """Rebuild a host path, replacing visits of replaced vertices by the
        tree chain ``chain_for(u, e_in, e_out)`` (a list of tree nodes)."""
        vs, es = [], []
        pv, pe = path.vertices, path.edges
        for i, x in enumerate(pv):
            e_in = pe[i - 1] if i > 0 else None
            e_out = pe[i] if i < len(pe) else None
            if x in uset:
                chain = chain_for(x, e_in, e_out)
                for a in chain:
                    vs.append(_node_vid(x, a))
                for a, b in zip(chain, chain[1:]):
                    es.append(tree_edge_ids[x][(a, b)])
                if e_out is not None:
                    es.append(rename[e_out])
            else:
                vs.append(x)
                if e_out is not None:
                    es.append(rename.get(e_out, e_out))
        return Path(tuple(vs), tuple(es))

    # --- new family -----------------------------------------------------------
    new_paths = []
    for idx, p in enumerate(fam.paths):
        def chain_for(u, e_in, e_out, idx=idx):
            if e_in is None or e_out is None:
                raise StructuralError("family path may not end inside a tree")
            return [("end", e_in), ("sub", idx), ("end", e_out)]
        new_paths.append(splice(p, chain_for))
    new_family = PathFamily(fam.source, tuple(new_paths), new_host, new_rotation)

    # --- new cert ----------------------------------------------------------------
    new_cert = cert
    if cert is not None:
        new_cert = _rewire_cert_batch(cert, uset, trees, rename, tree_edge_ids,
                                      splice, new_host, new_rotation)

    entries = tuple(
        SurgeryLogEntry(
            u, trees[u], dict(leaf_vertex[u]),
            {e: rename[e] for e in trees[u].order},
            frozenset(_node_vid(u, n) for n in trees[u].nodes),
            {tree_edge_ids[u][(a, b)]: (_node_vid(u, a), _node_vid(u, b))
             for (a, b) in trees[u].edges},
        )
        for u in us
    )
    return SurgeryState(new_host, new_rotation, new_cert, new_family,
                        state.log + entries)


def replace_vertex(state: SurgeryState, u, tree: DetachmentTree = None) -> SurgeryState:
    """Single-vertex convenience wrapper around ``replace_vertices``.

    A pre-built ``tree`` must match the rotation at u and the family's
    chords there (useful in tests that pin a specific construction)."""
    if tree is not None:
        rot_u = state.rotation.rot[u]
        if set(tree.order) != set(rot_u):
            raise StructuralError("tree boundary does not match the rotation at u")
        through = {}
        for idx, p in enumerate(state.family.paths):
            if u in p.vertices[1:-1]:
                ends = _ends_at(p, u)
                through[idx] = (ends[0], ends[1])
        if set(tree.chords) != set(through):
            raise StructuralError("supplied tree chords do not match the family")
    return replace_vertices(state, [u])


def _rewire_cert_batch(cert, uset, trees, rename, tree_edge_ids, splice,
                       new_host, new_rotation):
    """Re-thread wall structure through the detachment trees."""
    new_vm = dict(cert.vertex_map)
    steiner_of = {}
    for av, hv in cert.vertex_map.items():
        if hv not in uset:
            continue
        tree = trees[hv]
        wall = cert.abstract()
        first_edges = []
        for nb in sorted(wall.adj[av]):
            p = cert.host_path(av, nb)
            first_edges.append(p.edges[0])
        center = tree.steiner([("end", e) for e in first_edges])
        steiner_of[hv] = center
        new_vm[av] = _node_vid(hv, center)

    new_em = {}
    for ae, p in cert.edge_map.items():
        if not (set(p.vertices) & uset):
            new_em[ae] = p
            continue

        def chain_for(u, e_in, e_out):
            tree = trees[u]
            if e_in is None or e_out is None:
                # wall path endpoint at a replaced original: Steiner leg
                e = e_out if e_in is None else e_in
                leg = tree.tree_path(steiner_of[u], ("end", e))
                return leg if e_in is None else list(reversed(leg))
            return tree.tree_path(("end", e_in), ("end", e_out))

        new_em[ae] = splice(p, chain_for)
    return WallCert(cert.height, new_vm, new_em, new_host, new_rotation)


def shared_internal_vertices(fam: PathFamily, exclude=()):
    """Vertices internal to at least two family paths, minus ``exclude``."""
    count = {}
    for p in fam.paths:
        for v in set(p.vertices[1:-1]):
            count[v] = count.get(v, 0) + 1
    return {v for v, c in count.items() if c >= 2} - set(exclude) - {fam.source}


def replace_all_shared(state: SurgeryState, protected=()) -> SurgeryState:
    """Replace every shared internal vertex (outside ``protected``) by its
    detachment tree; afterwards the family is internally vertex-disjoint."""
    shared = shared_internal_vertices(state.family, exclude=protected)
    if not shared:
        return state
    out = replace_vertices(state, shared)
    if shared_internal_vertices(out.family, exclude=protected):
        raise StructuralError("replacement left shared internal vertices")
    return out


def contract_trees(paths, log):
    """Project paths of the surgered host back into the original host.

    Entries are unwound newest-first, so chained surgeries compose.  Tree
    interiors collapse to their original vertices and renamed cut edges
    recover their original ids; projected paths keep their endpoints and
    are simplified where a collapse creates a revisit.
    """
    paths = list(paths)
    for entry in reversed(log):
        rename_back = {v: k for k, v in entry.edge_rename.items()}
        tverts = entry.tree_vertices
        projected = []
        for p in paths:
            vs, es = [], []
            pv, pe = p.vertices, p.edges
            i = 0
            while i < len(pv):
                if pv[i] in tverts:
                    while i < len(pv) and pv[i] in tverts:
                        i += 1
                    vs.append(entry.vertex)
                    if i < len(pv):
                        es.append(rename_back.get(pe[i - 1], pe[i - 1]))
                else:
                    vs.append(pv[i])
                    if i < len(pe):
                        es.append(rename_back.get(pe[i], pe[i]))
                    i += 1
            sv, se = simplify_walk(tuple(vs), tuple(es))
            projected.append(Path(sv, se))
        paths = projected
    return paths

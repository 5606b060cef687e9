"""Shared test utilities: an independent brute-force immersion decider and
small-graph corpus generators.  Kept deliberately naive; these are the
oracles the package's own search is checked against.
"""

import itertools

from wallim.graphcore import MultiGraph, Path


def all_simple_paths(g, s, t, banned):
    """Every simple s-t path avoiding ``banned`` edge ids (recursive)."""
    out = []

    def walk(v, vs, es):
        if v == t:
            out.append(Path(tuple(vs), tuple(es)))
            return
        for eid, w in g.edges_at(v):
            if eid in banned or eid in es or w in vs:
                continue
            walk(w, vs + [w], es + [eid])

    walk(s, [s], [])
    return out


def naive_immersion(h, g, strong=False):
    """Exhaustive immersion decision: try every injective vertex map and
    every tuple of edge-disjoint connecting paths."""
    pat_vs = sorted(h.vertices, key=repr)
    host_vs = g.vertex_list
    edges = sorted(h.edge_ids, key=repr)

    def pack(vmap, idx, banned):
        if idx == len(edges):
            return True
        u, v = h.endpoints(edges[idx])
        for p in all_simple_paths(g, vmap[u], vmap[v], banned):
            if strong and any(x in set(vmap.values()) for x in p.interior()):
                continue
            if pack(vmap, idx + 1, banned | p.edge_set()):
                return True
        return False

    if len(pat_vs) > len(host_vs):
        return False
    for images in itertools.permutations(host_vs, len(pat_vs)):
        vmap = dict(zip(pat_vs, images))
        if pack(vmap, 0, frozenset()):
            return True
    return False


def complete_graph(n):
    vs = [f"v{i}" for i in range(n)]
    es = [(f"e{i}_{j}", vs[i], vs[j])
          for i in range(n) for j in range(i + 1, n)]
    return MultiGraph(vs, es)


def grid_graph(rows, cols):
    vs = [f"g{r}_{c}" for r in range(rows) for c in range(cols)]
    es = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                es.append((f"h{r}_{c}", f"g{r}_{c}", f"g{r}_{c+1}"))
            if r + 1 < rows:
                es.append((f"v{r}_{c}", f"g{r}_{c}", f"g{r+1}_{c}"))
    return MultiGraph(vs, es)


def graph_from_mask(n, mask):
    """Simple graph on n labelled vertices from an edge bitmask."""
    pairs = list(itertools.combinations(range(n), 2))
    vs = [f"v{i}" for i in range(n)]
    es = []
    for b, (i, j) in enumerate(pairs):
        if mask >> b & 1:
            es.append((f"e{i}_{j}", vs[i], vs[j]))
    return MultiGraph(vs, es)


def canonical_form(n, mask):
    """Minimum bitmask over all vertex relabelings (tiny n only)."""
    pairs = list(itertools.combinations(range(n), 2))
    idx = {p: b for b, p in enumerate(pairs)}
    best = None
    for perm in itertools.permutations(range(n)):
        m = 0
        for b, (i, j) in enumerate(pairs):
            if mask >> b & 1:
                a, c = perm[i], perm[j]
                m |= 1 << idx[(a, c) if a < c else (c, a)]
        if best is None or m < best:
            best = m
    return best


def iter_unlabeled_graphs(n, max_edges=None, connected_only=False):
    """All unlabeled simple graphs on exactly n vertices (n <= 6)."""
    pairs = list(itertools.combinations(range(n), 2))
    seen = set()
    by_fingerprint = {}
    for mask in range(1 << len(pairs)):
        if max_edges is not None and bin(mask).count("1") > max_edges:
            continue
        g = graph_from_mask(n, mask)
        if connected_only and not g.is_connected():
            continue
        degs = tuple(sorted(g.degree(v) for v in g.vertex_list))
        tri = sum(
            1 for a, b, c in itertools.combinations(g.vertex_list, 3)
            if g.edges_between(a, b) and g.edges_between(b, c) and g.edges_between(a, c)
        )
        fp = (degs, tri)
        bucket = by_fingerprint.setdefault(fp, [])
        canon = canonical_form(n, mask)
        if canon in bucket:
            continue
        bucket.append(canon)
        yield graph_from_mask(n, canon)


def petersen_graph():
    vs = [f"p{i}" for i in range(10)]
    es = []
    for i in range(5):
        es.append((f"outer{i}", f"p{i}", f"p{(i+1)%5}"))
        es.append((f"spoke{i}", f"p{i}", f"p{i+5}"))
        es.append((f"inner{i}", f"p{i+5}", f"p{(i+2)%5+5}"))
    return MultiGraph(vs, es)

"""Routing engines inside tight walls: layer traces, brick-crossing
checks, rerouting an internally vertex-disjoint fan to prescribed
perimeter targets, and the full edge-disjoint fan construction that
combines flow, confluence, detachment surgery and rerouting.

Every structural claim the constructions rely on is asserted at runtime;
failures raise StructuralError carrying the audit assembled so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graphcore import (
    MultiGraph,
    ParameterError,
    Path,
    StructuralError,
    _sort_key,
    disjoint_path_matching,
    max_edge_disjoint_paths_with_cut,
)
from .pathsurgery import (
    PathFamily,
    SurgeryState,
    contract_trees,
    make_confluent,
    replace_all_shared,
)
from .walls import (
    WallCert,
    analysis,
    bricks,
    build_wall,
    check_tight,
    horizontal_track,
    layer_structures,
    validate_cert,
    vertical_track,
)


@dataclass(frozen=True)
class LayerTrace:
    """Per-layer first-touch and inner-excursion-exit vertices of a path."""

    start_depth: int
    incoming: dict            # layer j -> host vertex x^j
    outgoing: dict            # layer j -> host vertex y^j


def trace_layers(cert: WallCert, path: Path) -> LayerTrace:
    """Incoming and outgoing vertices of ``path`` on every layer it spans.

    The path must start inside the wall and end on the perimeter; traces
    are produced for layers 2 .. depth(start).
    """
    ana = analysis(cert)
    regions = ana.regions
    r0 = regions.get(path.start)
    if r0 is None:
        raise ParameterError("trace start lies outside the compass")
    if path.end not in ana.layer_sets[0]:
        raise ParameterError("trace path must end on the perimeter")
    start_depth = min(r0[0], ana.n_layers)
    incoming, outgoing = {}, {}
    for j in range(2, start_depth + 1):
        lset = ana.layer_sets[j - 1]
        x = next((v for v in path.vertices if v in lset), None)
        if x is None:
            raise StructuralError(f"path never meets layer {j}")
        incoming[j] = x
        y = None
        for t, v in enumerate(path.vertices):
            r = regions.get(v)
            if r is None or r[0] < j:
                if t == 0:
                    raise StructuralError(f"path starts outside layer {j}'s disk")
                y = path.vertices[t - 1]
                break
        if y is None:
            raise StructuralError(f"path never leaves layer {j}'s disk")
        if y not in lset:
            raise StructuralError(f"exit vertex {y!r} of layer {j} is off the layer")
        outgoing[j] = y
    return LayerTrace(start_depth, incoming, outgoing)


@dataclass(frozen=True)
class BrickCrossingWitness:
    layer: int
    outgoing: object
    incoming: object
    tight_witness: object     # TightnessWitness when the move search finds one


def check_brick_crossing(cert: WallCert, trace: LayerTrace):
    """Verify that each consecutive (outgoing, next incoming) vertex pair of
    the trace shares a brick meeting the open annulus between the layers.

    Returns (True, None) or (False, witness); a failing pair on a wall
    that passes the tightness check indicates a genuine structural defect,
    so the witness carries the improving move when one exists.
    """
    ana = analysis(cert)
    regions = ana.regions
    brick_list = bricks(cert.height)
    at_vertex = {}
    for bi, cyc in enumerate(brick_list):
        for p in cyc:
            at_vertex.setdefault(p, []).append(bi)

    def bricks_of(hv):
        kind, key = ana.locator[hv]
        if kind == "orig":
            return set(at_vertex.get(key, ()))
        a, b = key
        return set(at_vertex.get(a, ())) & set(at_vertex.get(b, ()))

    def brick_meets_annulus(bi, j):
        lo, hi = None, None
        between = False
        for p in brick_list[bi]:
            r = regions.get(cert.vertex_map[p])
            if r is None:
                return False
            if r[0] != r[1]:
                if r == (j - 1, j):
                    between = True
            lo = r[0] if lo is None else min(lo, r[0])
            hi = r[1] if hi is None else max(hi, r[1])
        return between or (lo <= j - 1 and hi >= j)

    for j in range(trace.start_depth, 1, -1):
        y = trace.outgoing[j]
        x = trace.incoming.get(j - 1)
        if x is None:
            continue  # j-1 == 1 has no incoming record only when j-1 < 2
        cands = bricks_of(y) & bricks_of(x)
        if not any(brick_meets_annulus(bi, j) for bi in cands):
            ok, wit = check_tight(cert)
            return False, BrickCrossingWitness(j, y, x, None if ok else wit)
    return True, None


# ---------------------------------------------------------------------------
# Rerouting to prescribed perimeter targets
# ---------------------------------------------------------------------------


@dataclass
class RerouteAudit:
    k: int = 0
    j0: int = 0
    j1: int = 0
    i0: int = 0
    order: tuple = ()
    arc_counts: tuple = ()
    window_start: int = -1
    window_side: str = ""
    u_block: tuple = ()
    u_landings: tuple = ()
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "k": self.k, "j0": self.j0, "j1": self.j1, "i0": self.i0,
            "order": list(map(repr, self.order)),
            "arc_counts": list(self.arc_counts),
            "window_start": self.window_start,
            "window_side": self.window_side,
            "u_block": list(map(repr, self.u_block)),
            "u_landings": list(map(repr, self.u_landings)),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class RerouteResult:
    paths: tuple
    audit: RerouteAudit


def _cyclic_arc(cyc, pos, i, j, include_ends=True):
    n = len(cyc)
    out = []
    t = i
    while True:
        out.append(cyc[t % n])
        if t % n == j % n:
            break
        t += 1
        if t - i > n:
            raise StructuralError("cyclic arc did not close")
    if not include_ends:
        out = out[1:-1]
    return out


def _arc_path(ana, layer, i, j, reverse_ok=False):
    """Host path along layer ``layer``'s cycle from position i to j
    clockwise."""
    cyc = ana.layer_cycle_hosts[layer - 1]
    walk = ana.layer_edge_walks[layer - 1]
    n = len(cyc)
    vs, es = [cyc[i % n]], []
    t = i
    while t % n != j % n:
        es.append(walk[t % n])
        t += 1
        vs.append(cyc[t % n])
        if t - i > n:
            raise StructuralError("arc construction wrapped twice")
    return Path(tuple(vs), tuple(es))


def _abstract_of(ana, hv):
    kind, key = ana.locator[hv]
    if kind != "orig":
        raise StructuralError(f"{hv!r} is not an original wall vertex")
    return key


def _abstract_distance_at_least_two(cert, targets):
    wall = cert.abstract()
    inv = {hv: av for av, hv in cert.vertex_map.items()}
    avs = []
    for t in targets:
        if t not in inv:
            raise ParameterError(f"target {t!r} is not an original wall vertex")
        avs.append(inv[t])
    for i in range(len(avs)):
        for j in range(i + 1, len(avs)):
            a, b = avs[i], avs[j]
            if a == b or b in wall.adj[a]:
                raise ParameterError(
                    f"targets {a} and {b} are closer than 2 in the wall")
    return avs


def _outward_ride(cert, ana, u_av, side, j1):
    """Abstract walk from an important vertex of a layer outward along its
    track (vertical for N/S sides, horizontal for W/E) up to the important
    vertex of layer j1 on that track."""
    k = cert.height
    imps_j1 = set(layer_structures(k)[j1 - 1].importants)
    if side in ("N", "S"):
        track = vertical_track(k, u_av)
    else:
        track = horizontal_track(k, u_av)
    i = track.index(u_av)
    step = -1 if side in ("N", "W") else 1
    walk = [u_av]
    t = i
    while True:
        t += step
        if t < 0 or t >= len(track):
            raise StructuralError(f"track ride from {u_av} left the wall")
        walk.append(track[t])
        if track[t] in imps_j1:
            return walk


def reroute_to_targets(cert: WallCert, fan, targets, require_tight: bool = True) -> RerouteResult:
    """Reroute ``fan`` (internally vertex-disjoint paths from a deep vertex
    to the perimeter) so the paths end at ``targets`` instead.

    Implements the layered construction: pick the arc of layer k^2+1
    richest in important vertices, drop verticals from a block of k
    consecutive important vertices to layer k+1, connect everything with
    layer arcs, and finish through the outer annulus.  All claims the
    construction relies on are asserted; the output is verified internally
    vertex-disjoint with the prescribed distinct endpoints.
    """
    k = len(fan)
    if k == 0:
        raise ParameterError("empty fan")
    if len(targets) != k or len(set(targets)) != k:
        raise ParameterError("need exactly k distinct targets")
    if cert.height < 4 * k * k + 1:
        raise ParameterError(
            f"wall height {cert.height} below {4 * k * k + 1} for k={k}")
    if require_tight:
        ok, wit = check_tight(cert)
        if not ok:
            raise ParameterError(f"wall is not tight: improving move on layer {wit.layer}")
    ana = analysis(cert)
    audit = RerouteAudit(k=k)
    _abstract_distance_at_least_two(cert, targets)

    v = fan[0].start
    if any(p.start != v for p in fan):
        raise ParameterError("fan paths must share their source")
    seen = {}
    for a, p in enumerate(fan):
        for x in p.vertices[1:]:
            interior = x != p.end
            if x in seen and (interior or seen[x][1]):
                raise ParameterError("fan paths are not internally vertex-disjoint")
            seen[x] = (a, interior)
    rv = ana.regions.get(v)
    if rv is None or rv[0] < 2 * k * k + 1:
        raise ParameterError("fan source is not deep enough in the wall")

    j0 = k * k + 1
    j1 = k + 1
    audit.j0, audit.j1 = j0, j1
    traces = [trace_layers(cert, p) for p in fan]

    # clockwise order of the fan by incoming vertices on layer j0
    pos0 = ana.layer_pos[j0 - 1]
    order = sorted(range(k), key=lambda a: pos0[traces[a].incoming[j0]])
    fan = [fan[a] for a in order]
    traces = [traces[a] for a in order]
    audit.order = tuple(p.end for p in fan)

    _assert_clockwise_order(ana, traces, k, audit)

    # arcs between consecutive incoming vertices and their important counts
    cyc0 = ana.layer_cycle_hosts[j0 - 1]
    n0 = len(cyc0)
    imps0 = [cert.vertex_map[p] for p in layer_structures(cert.height)[j0 - 1].importants]
    side_of0 = {cert.vertex_map[p]: s
                for p, s in layer_structures(cert.height)[j0 - 1].side_of.items()}
    imp_pos = sorted((pos0[h], h) for h in imps0)
    xs = [pos0[tr.incoming[j0]] for tr in traces]

    def arc_importants(i):
        a = xs[i]
        b = xs[(i + 1) % k]
        out = []
        for pp, h in imp_pos:
            rel = (pp - a) % n0
            end = (b - a) % n0 if k > 1 else n0
            if 0 < rel < end:
                out.append(h)
        return out

    arcs = [arc_importants(i) for i in range(k)]
    audit.arc_counts = tuple(len(a) for a in arcs)
    i0 = max(range(k), key=lambda i: (len(arcs[i]), -i))
    if len(arcs[i0]) < 7 * k:
        raise StructuralError(
            f"best arc holds {len(arcs[i0])} important vertices, need {7 * k}",
            audit.as_dict())

    # relabel so the chosen arc sits at ceil(k/2)
    ic = math.ceil(k / 2) - 1
    shift = (ic - i0) % k
    fan = [fan[(a - shift) % k] for a in range(k)]
    traces = [traces[(a - shift) % k] for a in range(k)]
    xs = [xs[(a - shift) % k] for a in range(k)]
    arcs = [arcs[(a - shift) % k] for a in range(k)]
    i0 = ic
    audit.i0 = i0 + 1

    # window of k consecutive same-side importants with 3k-margins
    imps = arcs[i0]
    window = None
    for s in range(3 * k, len(imps) - 4 * k + 1):
        block = imps[s : s + k]
        sides = {side_of0[h] for h in block}
        if len(sides) == 1:
            window = s
            audit.window_side = sides.pop()
            break
    if window is None:
        raise StructuralError("no same-side window with 3k margins", audit.as_dict())
    audit.window_start = window
    u_block = imps[window : window + k]
    audit.u_block = tuple(u_block)

    # outward rides R_i along tracks, and their layer landings
    rides = []
    for h in u_block:
        av = _abstract_of(ana, h)
        walk = _outward_ride(cert, ana, av, audit.window_side, j1)
        rides.append(cert.map_abstract_walk(walk))
    for a in range(k):
        for b in range(a + 1, k):
            if rides[a].vertex_set() & rides[b].vertex_set():
                raise StructuralError("outward rides intersect", audit.as_dict())
    for r, h in zip(rides, u_block):
        for x in r.vertices:
            rx = ana.regions.get(x)
            if rx is None or (x != h and rx[0] >= j0):
                raise StructuralError("ride dips inside the chosen layer",
                                      audit.as_dict())
    u_land = [r.end for r in rides]
    audit.u_landings = tuple(u_land)

    # chunk assembly
    paths_mid = [None] * k
    r_half = math.ceil((k - 2) / 2) if k >= 2 else 0
    plus_max = r_half - (1 if k % 2 == 1 else 0)

    def ride_tail(a, from_vertex):
        r = rides[a]
        i = r.vertices.index(from_vertex)
        return Path(r.vertices[i:], r.edges[i:])

    used_on_layer = {}
    for a in range(k):
        depth = 0
        if a < i0:
            depth = i0 - a
        elif a > i0 + 1:
            depth = a - i0 - 1
        if depth:
            seg = fan[a].subpath(traces[a].incoming[j0], traces[a].incoming[j0 - depth])
            for x in seg.vertices:
                lj = ana.layer_of(x)
                if lj is not None:
                    used_on_layer.setdefault(lj, set()).add(x)

    # F1 and F2 on layer j0
    pos_u0 = pos0[u_block[i0]]
    f1 = _arc_path(ana, j0, xs[i0], pos_u0)
    paths_mid[i0] = f1.concat(ride_tail(i0, u_block[i0]))
    if k >= 2:
        pos_u1 = pos0[u_block[i0 + 1]]
        f2 = _arc_path(ana, j0, pos_u1, xs[(i0 + 1) % k])
        paths_mid[i0 + 1] = f2.reverse().concat(ride_tail(i0 + 1, u_block[i0 + 1]))
        if set(f1.vertices) & set(f2.vertices):
            raise StructuralError("layer arcs F1 and F2 intersect", audit.as_dict())
        other = used_on_layer.get(j0, set()) - {traces[i0].incoming[j0],
                                                traces[i0 + 1].incoming[j0]}
        if (set(f1.vertices) | set(f2.vertices)) & other:
            raise StructuralError("layer arcs meet another path", audit.as_dict())

    # connectors on the preceding layers
    chosen_on_layer = {}
    for j in range(1, r_half + 1):
        for sign, a in ((-1, i0 - j), (1, i0 + 1 + j)):
            if sign > 0 and j > plus_max:
                continue
            layer = j0 - j
            lset = ana.layer_sets[layer - 1]
            posL = ana.layer_pos[layer - 1]
            ride = rides[a]
            landing = next((x for x in ride.vertices if x in lset), None)
            if landing is None:
                raise StructuralError("ride misses an intermediate layer",
                                      audit.as_dict())
            x_here = traces[a].incoming[layer]
            avoid = set()
            for l in range(k):
                if l != a:
                    avoid |= rides[l].vertex_set()
            avoid |= ride.vertex_set() - {landing}
            avoid |= used_on_layer.get(layer, set()) - {x_here}
            avoid |= chosen_on_layer.get(layer, set())
            for b in range(k):
                if b != a and layer in traces[b].incoming:
                    avoid.add(traces[b].incoming[layer])
            arc_cw = _arc_path(ana, layer, posL[x_here], posL[landing])
            arc_ccw = _arc_path(ana, layer, posL[landing], posL[x_here]).reverse()
            chosen = None
            for cand in sorted((arc_cw, arc_ccw), key=len):
                if not (set(cand.interior()) & avoid):
                    chosen = cand
                    break
            if chosen is None:
                raise StructuralError(
                    f"no clean connector on layer {layer} for path {a}",
                    audit.as_dict())
            chosen_on_layer.setdefault(layer, set()).update(chosen.vertices)
            mid = fan[a].subpath(traces[a].incoming[j0], x_here)
            paths_mid[a] = mid.concat(chosen).concat(ride_tail(a, landing))

    # assemble and check pairwise internal disjointness
    rerouted = []
    for a in range(k):
        if paths_mid[a] is None:
            raise StructuralError(f"no chunk assembled for path {a}", audit.as_dict())
        prefix = fan[a].subpath(v, traces[a].incoming[j0])
        rerouted.append(prefix.concat(paths_mid[a]))
    _assert_internally_disjoint(rerouted, v, audit)

    # final hop through the annulus between layer j1 and the perimeter
    allowed = {x for x, r in ana.regions.items() if r[1] <= j1}
    used = set()
    for p in rerouted:
        used |= p.vertex_set()
    allowed -= used - set(u_land)
    finals = disjoint_path_matching(cert.host, u_land, targets, k, allowed=allowed)
    if len(finals) != k:
        raise StructuralError(
            f"annulus hop found {len(finals)} of {k} paths", audit.as_dict())
    by_start = {p.start: p for p in finals}
    out = []
    for p in rerouted:
        out.append(p.concat(by_start[p.end]))
    _assert_internally_disjoint(out, v, audit)
    ends = [p.end for p in out]
    if sorted(ends, key=_sort_key) != sorted(targets, key=_sort_key):
        raise StructuralError("rerouted endpoints differ from the targets",
                              audit.as_dict())
    return RerouteResult(tuple(out), audit)


def _assert_clockwise_order(ana, traces, k, audit):
    """The spec'd runtime ordering assertion on every traced layer."""
    jmax = min(2 * k * k + 1, ana.n_layers)
    for j in range(2, jmax + 1):
        posL = ana.layer_pos[j - 1]
        n = len(ana.layer_cycle_hosts[j - 1])
        for p in range(2, k):
            for q in range(p + 1, k):
                quad = []
                tr_prev, tr_p = traces[p - 2], traces[p - 1]
                tr_q, tr_next = traces[q - 1], traces[q]
                if j not in tr_prev.outgoing or j not in tr_next.outgoing:
                    continue
                if j not in tr_p.incoming or j not in tr_q.incoming:
                    continue
                quad = [tr_prev.outgoing[j], tr_p.incoming[j],
                        tr_q.incoming[j], tr_next.outgoing[j]]
                base = posL[quad[0]]
                rel = [(posL[x] - base) % n for x in quad]
                if not (rel[0] <= rel[1] <= rel[2] <= rel[3]):
                    raise StructuralError(
                        f"clockwise order violated on layer {j}: {quad}",
                        audit.as_dict())


def _assert_internally_disjoint(paths, v, audit):
    seen = {}
    for a, p in enumerate(paths):
        for x in p.vertices:
            if x == v:
                continue
            if x in seen and seen[x] != a:
                raise StructuralError(
                    f"paths {seen[x]} and {a} share vertex {x!r}", audit.as_dict())
            seen[x] = a


# ---------------------------------------------------------------------------
# The edge-disjoint fan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FanResult:
    hub: object
    paths: tuple
    audit: dict


def edge_disjoint_fan(g: MultiGraph, cert: WallCert, S, require_tight: bool = True) -> FanResult:
    """|S| edge-disjoint paths from a deep wall vertex to the perimeter
    vertices S, via flow + confluence + detachment surgery + rerouting +
    contraction.

    ``g`` must admit |S| edge-disjoint paths between the chosen deep vertex
    and the perimeter (a cut below that is reported as a ParameterError
    naming the cut, the connectivity obstruction).
    """
    S = list(S)
    kS = len(S)
    if kS == 0:
        raise ParameterError("need at least one target")
    if len(set(S)) != kS:
        raise ParameterError("targets must be distinct")
    if cert.height < 4 * kS * kS + 1:
        raise ParameterError(
            f"wall height {cert.height} below {4 * kS * kS + 1} for |S|={kS}")
    _abstract_distance_at_least_two(cert, S)
    if require_tight:
        ok, wit = check_tight(cert)
        if not ok:
            raise ParameterError(
                f"wall is not tight: improving move on layer {wit.layer}")
    ana = analysis(cert)
    per_set = ana.layer_sets[0]
    for t in S:
        if t not in per_set:
            raise ParameterError(f"target {t!r} is not on the perimeter")

    # deterministic deep hub and perimeter anchor
    K = cert.height
    cx, cy = (2 * K + 3) / 2.0, (K + 2) / 2.0
    wall = build_wall(K)
    candidates = sorted(
        wall.vertices,
        key=lambda p: ((p[0] - cx) ** 2 + (p[1] - cy) ** 2, p),
    )
    v = None
    for av in candidates:
        hv = cert.vertex_map[av]
        r = ana.regions.get(hv)
        if r is not None and r[0] >= 2 * kS * kS + 1:
            v = hv
            break
    if v is None:
        raise StructuralError("no deep enough hub vertex found")
    c1 = cert.vertex_map[wall.corners[0]]
    per_cyc = ana.perimeter_cycle
    u = per_cyc[(ana.layer_pos[0][c1] + 1) % len(per_cyc)]

    paths, cut = max_edge_disjoint_paths_with_cut(g, v, u, kS)
    if len(paths) < kS:
        raise ParameterError(
            f"host admits only {len(paths)} edge-disjoint paths between "
            f"{v!r} and {u!r}; cut: {cut}")

    fam = PathFamily(v, tuple(paths), g, cert.rotation)
    fam = make_confluent(fam)

    # truncate at the first perimeter hit
    trunc = []
    for p in fam.paths:
        stop = next(i for i, x in enumerate(p.vertices) if x in per_set)
        trunc.append(Path(p.vertices[: stop + 1], p.edges[:stop]))
    fam = fam.with_paths(trunc)

    state = SurgeryState(g, cert.rotation, cert, fam)
    state = replace_all_shared(state, protected=per_set)
    if state.log:
        validate_cert(state.cert)

    result = reroute_to_targets(state.cert, list(state.family.paths), S,
                                require_tight=False)
    projected = contract_trees(list(result.paths), state.log)

    seen = set()
    for p in projected:
        p.validate(g)
        if p.start != v:
            raise StructuralError("projected path lost its hub endpoint")
        dup = seen & p.edge_set()
        if dup:
            raise StructuralError(f"projected paths share edges {sorted(dup)!r}")
        seen |= p.edge_set()
    if sorted(p.end for p in projected) != sorted(S):
        raise StructuralError("projected endpoints differ from S")
    audit = {
        "hub": repr(v),
        "anchor": repr(u),
        "surgered": len(state.log),
        "reroute": result.audit.as_dict(),
    }
    return FanResult(v, tuple(projected), audit)

"""Brute-force reference implementations used as test oracles.

They are written independently of the production code: plain enumeration,
naive iteration and exact rational arithmetic, with no caching or bitmasks.
"""

import itertools
from fractions import Fraction
from math import ceil

from secnoc.routing import CORE_TO_SWITCH, SWITCH_TO_CORE, SWITCH_TO_SWITCH, LinkId

STEPS = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}


def minimal_paths(src, dst):
    """Every minimal lattice path from src to dst as a move string."""
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    h = ("E" if dx > 0 else "W") * abs(dx)
    v = ("N" if dy > 0 else "S") * abs(dy)
    n = len(h) + len(v)
    out = set()
    for pos in itertools.combinations(range(n), len(h)):
        moves, hi, vi = [], 0, 0
        for k in range(n):
            if k in pos:
                moves.append(h[hi]); hi += 1
            else:
                moves.append(v[vi]); vi += 1
        out.add("".join(moves))
    return sorted(out)


def nodes_along(src, moves):
    node = tuple(src)
    seq = [node]
    for m in moves:
        node = (node[0] + STEPS[m][0], node[1] + STEPS[m][1])
        seq.append(node)
    return seq


def links_of(src, moves):
    nodes = nodes_along(src, moves)
    links = [LinkId(CORE_TO_SWITCH, nodes[0], nodes[0], "local")]
    for a, b, m in zip(nodes, nodes[1:], moves):
        links.append(LinkId(SWITCH_TO_SWITCH, a, b, m))
    links.append(LinkId(SWITCH_TO_CORE, nodes[-1], nodes[-1], "local"))
    return links


def west_first_legal(src, dst, moves):
    # while the destination is strictly west the only legal move is west
    for node, m in zip(nodes_along(src, moves), moves):
        if dst[0] < node[0] and m != "W":
            return False
    return True


def policy_paths(policy, src, dst):
    paths = minimal_paths(src, dst)
    if policy == "XYYX":
        xy = [p for p in paths if p == "".join(sorted(p, key=lambda c: c in "NS"))]
        yx = [p for p in paths if p == "".join(sorted(p, key=lambda c: c in "EW"))]
        return sorted(set(xy + yx))
    if policy == "WestFirst":
        return [p for p in paths if west_first_legal(src, dst, p)]
    raise ValueError(policy)


def union_links(policy, src, dst):
    out = set()
    for p in policy_paths(policy, src, dst):
        out.update(links_of(src, p))
    return frozenset(out)


def route_probabilities(policy, src, dst):
    """Exact probability of each move string under the policy's randomness."""
    paths = policy_paths(policy, src, dst)
    if policy == "XYYX":
        return {p: Fraction(1, len(paths)) for p in paths}
    probs = {}
    for p in paths:
        pr = Fraction(1)
        for node, m in zip(nodes_along(src, p), p):
            # count the productive choices a west-first router has here
            if dst[0] < node[0]:
                options = 1
            else:
                options = (dst[0] > node[0]) + (dst[1] != node[1])
            pr /= options
        probs[p] = pr
    return probs


def response_time(wcet, jitter, higher, deadline):
    """Naive uniprocessor fixed point; higher = [(C, T, J)]. None if R > D."""
    r = Fraction(wcet)
    while True:
        nxt = wcet + jitter + sum(ceil(Fraction(r + j, t)) * c for c, t, j in higher)
        if nxt > deadline:
            return None
        if nxt == r:
            return int(r)
        r = Fraction(nxt)


def latency_fixed_point(no_load, interferers, budget=None):
    """Naive packet latency iteration; interferers = [(L_j, T_j, K_j, KI_j)]."""
    s = Fraction(no_load)
    while True:
        nxt = no_load + sum(ceil(Fraction(s + k + ki, t)) * lj for lj, t, k, ki in interferers)
        if budget is not None and nxt > budget:
            return None
        if nxt == s:
            return int(s)
        s = Fraction(nxt)


def naive_analyze(app, mapping, platform, policy="XYYX"):
    """Whole-application analysis from first principles.

    Returns (R per task, S per flow, schedulable per flow). Route sets come
    from brute-force path enumeration, interference from explicit link set
    intersection.
    """
    W = platform.width

    def coord(task_id):
        c = mapping[task_id]
        return (c % W, c // W)

    R = {}
    for t in app.tasks:
        hp = [(u.wcet, u.period, u.release_jitter) for u in app.tasks
              if u.priority < t.priority and mapping[u.id] == mapping[t.id]]
        R[t.id] = response_time(t.wcet, t.release_jitter, hp, t.deadline)

    links, L = {}, {}
    for f in app.flows:
        a, b = coord(f.source_task), coord(f.dest_task)
        if a == b:
            links[f.id] = frozenset()
            continue
        if f.randomized and policy != "XY":
            links[f.id] = union_links(policy, a, b)
        else:
            xy = ("E" if b[0] > a[0] else "W") * abs(b[0] - a[0]) + ("N" if b[1] > a[1] else "S") * abs(b[1] - a[1])
            links[f.id] = frozenset(links_of(a, xy))
        hops = abs(a[0] - b[0]) + abs(a[1] - b[1]) + 2
        L[f.id] = hops * platform.hop_latency + (ceil(f.size / platform.flit_width) - 1) * platform.flit_latency

    S, ok = {}, {}
    for f in sorted(app.flows, key=lambda f: f.priority):
        r = R[f.source_task]
        if not links[f.id]:
            S[f.id] = 0
            ok[f.id] = r is not None
            continue
        hits = [g for g in app.flows if g.priority < f.priority and links[g.id] & links[f.id]]
        if r is None or any(S[g.id] is None or R[g.source_task] is None for g in hits):
            S[f.id] = None
            ok[f.id] = False
            continue
        terms = [(L[g.id], g.period, R[g.source_task], S[g.id] - L[g.id]) for g in hits]
        S[f.id] = latency_fixed_point(L[f.id], terms, f.deadline - r)
        ok[f.id] = S[f.id] is not None and r + S[f.id] <= f.deadline
    return R, S, ok

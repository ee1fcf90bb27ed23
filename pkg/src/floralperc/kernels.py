"""Compiled connectivity kernels over the flat node layout of ``topology``.

All functions take one sampled configuration (``colors`` row and ``states``
row) at a time; the batch drivers loop over samples.  Union-find uses
path halving and links the larger root under the smaller, so labels do not
depend on traversal order.
"""
from __future__ import annotations

import numpy as np
from numba import njit

CROSSING = 0
SEPARATION = 1
PATH = 2  # both sets entirely ``color`` and joined by a ``color`` cluster


@njit(cache=True, inline="always")
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, inline="always")
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


@njit(cache=True)
def node_colors(colors, states, iris_hex, part_color, ncol):
    H = colors.shape[0]
    for i in range(H):
        ncol[i] = colors[i]
    for j in range(iris_hex.shape[0]):
        st = states[j]
        ncol[iris_hex[j]] = part_color[st, 0]
        ncol[H + j] = part_color[st, 1]


@njit(cache=True)
def label_color(color, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, parent):
    """Same-colour clusters: union every pair of ``color`` nodes sharing >= half an edge."""
    for n in range(parent.shape[0]):
        parent[n] = n
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        if ncol[i] == color and ncol[j] == color:
            _union(parent, i, j)
    for j in range(iris_hex.shape[0]):
        st = states[j]
        for p in range(2):
            if part_color[st, p] != color:
                continue
            node = iris_hex[j] if p == 0 else H + j
            for k in range(6):
                if part_touch[st, p, k]:
                    pt = petals[j, k]
                    if ncol[pt] == color:
                        _union(parent, node, pt)


@njit(cache=True)
def label_geometric(excl, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, parent):
    """Components of the non-excluded nodes under geometric adjacency (chords included)."""
    for n in range(parent.shape[0]):
        parent[n] = n
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        if not excl[i] and not excl[j]:
            _union(parent, i, j)
    for j in range(iris_hex.shape[0]):
        st = states[j]
        for p in range(2):
            node = iris_hex[j] if p == 0 else H + j
            if part_color[st, p] < 0 or excl[node]:
                continue
            for k in range(6):
                if part_touch[st, p, k]:
                    pt = petals[j, k]
                    if not excl[pt]:
                        _union(parent, node, pt)
        if part_color[st, 1] >= 0 and not excl[iris_hex[j]] and not excl[H + j]:
            _union(parent, iris_hex[j], H + j)


@njit(cache=True)
def mark_set(hexset, color, ncol, iris_index, H, parent, flag):
    """flag[root] = True for every ``color`` node (color -1: any present node) of the hexagons in ``hexset``."""
    for t in range(hexset.shape[0]):
        h = hexset[t]
        if h < 0:
            break
        if (color < 0 and ncol[h] >= 0) or ncol[h] == color:
            flag[_find(parent, h)] = True
        j = iris_index[h]
        if j >= 0:
            node = H + j
            if (color < 0 and ncol[node] >= 0) or (color >= 0 and ncol[node] == color):
                flag[_find(parent, node)] = True


@njit(cache=True)
def vertex_node(h, slot, states, iris_index, vert_part, H):
    j = iris_index[h]
    if j < 0:
        return h
    if vert_part[states[j], slot] == 0:
        return h
    return H + j


@njit(cache=True)
def crossing(color, set0, set1, ncol, states, H, edges, iris_hex, iris_index, petals,
             part_color, part_touch, parent, flag0, flag1):
    label_color(color, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, parent)
    flag0[:] = False
    flag1[:] = False
    mark_set(set0, color, ncol, iris_index, H, parent, flag0)
    mark_set(set1, color, ncol, iris_index, H, parent, flag1)
    for n in range(flag0.shape[0]):
        if flag0[n] and flag1[n]:
            return True
    return False


MAXDEG = 8


@njit(cache=True)
def color_adjacency(color, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, adj):
    """adj[n, 0] = degree of node n in the ``color`` graph, adj[n, 1:] its neighbours."""
    for n in range(adj.shape[0]):
        adj[n, 0] = 0
    for e in range(edges.shape[0]):
        i = edges[e, 0]
        j = edges[e, 1]
        if ncol[i] == color and ncol[j] == color:
            adj[i, 0] += 1
            adj[i, adj[i, 0]] = j
            adj[j, 0] += 1
            adj[j, adj[j, 0]] = i
    for j in range(iris_hex.shape[0]):
        st = states[j]
        for p in range(2):
            if part_color[st, p] != color:
                continue
            node = iris_hex[j] if p == 0 else H + j
            for k in range(6):
                if part_touch[st, p, k]:
                    pt = petals[j, k]
                    if ncol[pt] == color:
                        adj[node, 0] += 1
                        adj[node, adj[node, 0]] = pt
                        adj[pt, 0] += 1
                        adj[pt, adj[pt, 0]] = node
    for n in range(adj.shape[0]):
        if adj[n, 0] > MAXDEG:
            raise ValueError("node degree exceeds adjacency width")


@njit(cache=True)
def _set_nodes(hexset, color, ncol, iris_index, H, flag, lst):
    m = 0
    for t in range(hexset.shape[0]):
        h = hexset[t]
        if h < 0:
            break
        if ncol[h] == color and not flag[h]:
            flag[h] = True
            lst[m] = h
            m += 1
        j = iris_index[h]
        if j >= 0 and ncol[H + j] == color and not flag[H + j]:
            flag[H + j] = True
            lst[m] = H + j
            m += 1
    return m


@njit(cache=True)
def _neighbor(u, i, nn, adj, inX, inY, xl, nx, yl, ny):
    """i-th neighbour of u in the graph with super-nodes nn (on X) and nn + 1 (on Y), or -1."""
    if u == nn:
        return xl[i] if i < nx else -1
    if u == nn + 1:
        return yl[i] if i < ny else -1
    d = adj[u, 0]
    if i < d:
        return adj[u, 1 + i]
    i -= d
    if inX[u]:
        if i == 0:
            return nn
        i -= 1
    if inY[u] and i == 0:
        return nn + 1
    return -1


@njit(cache=True)
def backbone(color, setX, setY, ncol, iris_index, H, adj, iw, bw, ew, bb):
    """bb[n] = True iff ``color`` node n lies on a self-avoiding path from X to Y.

    Biconnected blocks (iterative Tarjan from a super-node on X); the
    backbone is the union of the blocks met by the DFS tree path to the
    super-node on Y.  Returns False when X and Y are not joined.
    """
    nn = ncol.shape[0]
    disc, low, par, it, vstack, bchild, xl, yl = iw[0], iw[1], iw[2], iw[3], iw[4], iw[5], iw[6], iw[7]
    inX, inY, onpath = bw[0], bw[1], bw[2]
    su, sv, eu, ev, eb = ew[0], ew[1], ew[2], ew[3], ew[4]
    inX[:] = False
    inY[:] = False
    bb[:nn] = False
    nx = _set_nodes(setX, color, ncol, iris_index, H, inX, xl)
    ny = _set_nodes(setY, color, ncol, iris_index, H, inY, yl)
    if nx == 0 or ny == 0:
        return False
    disc[:] = -1
    a = nn
    t = 0
    disc[a] = t
    low[a] = t
    par[a] = -1
    it[a] = 0
    vstack[0] = a
    sp = 1
    es = 0
    ne = 0
    nblk = 0
    while sp > 0:
        u = vstack[sp - 1]
        w = _neighbor(u, it[u], nn, adj, inX, inY, xl, nx, yl, ny)
        if w >= 0:
            it[u] += 1
            if w == par[u]:
                continue
            if disc[w] < 0:
                t += 1
                disc[w] = t
                low[w] = t
                par[w] = u
                it[w] = 0
                su[es] = u
                sv[es] = w
                es += 1
                vstack[sp] = w
                sp += 1
            elif disc[w] < disc[u]:
                su[es] = u
                sv[es] = w
                es += 1
                if disc[w] < low[u]:
                    low[u] = disc[w]
        else:
            sp -= 1
            p = par[u]
            if p >= 0:
                if low[u] < low[p]:
                    low[p] = low[u]
                if low[u] >= disc[p]:
                    while True:
                        es -= 1
                        eu[ne] = su[es]
                        ev[ne] = sv[es]
                        eb[ne] = nblk
                        ne += 1
                        if par[sv[es]] == su[es]:
                            bchild[sv[es]] = nblk  # tree edge
                        if su[es] == p and sv[es] == u:
                            break
                    nblk += 1
    b = nn + 1
    if disc[b] < 0:
        return False
    onpath[:nblk] = False
    v = b
    while par[v] >= 0:
        onpath[bchild[v]] = True
        v = par[v]
    for k in range(ne):
        if onpath[eb[k]]:
            if eu[k] < nn:
                bb[eu[k]] = True
            if ev[k] < nn:
                bb[ev[k]] = True
    return True


@njit(cache=True)
def workspace(nn, width):
    """Scratch arrays for :func:`backbone` (``width`` bounds the X and Y set sizes)."""
    m = nn + 2
    E = MAXDEG * m + 4 * width + 4
    return (np.empty((nn, MAXDEG + 1), np.int64), np.empty((8, m), np.int64), np.empty((3, m), np.bool_),
            np.empty((5, E), np.int64))


@njit(cache=True)
def separated_vertices(color, setX, setY, setZ, vh, vs, ncol, states, H, edges, iris_hex, iris_index,
                       petals, part_color, part_touch, vert_part, adj, iw, bw, ew, excl, parent_g,
                       seed, out, rebuild):
    """out[v] = True iff vertex v is cut off from ``setZ`` by a ``color`` path from X to Y.

    The separating set is the X-Y backbone: nodes on some self-avoiding X-Y
    path.  A vertex whose incident nodes all lie on it is separated; otherwise
    the answer is read from its complementary component.  ``adj`` must hold
    the ``color`` adjacency when ``rebuild`` is False.
    """
    nn = ncol.shape[0]
    if rebuild:
        color_adjacency(color, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, adj)
    backbone(color, setX, setY, ncol, iris_index, H, adj, iw, bw, ew, excl)
    for n in range(nn):
        if ncol[n] < 0:
            excl[n] = True
    label_geometric(excl, ncol, states, H, edges, iris_hex, petals, part_color, part_touch, parent_g)
    seed[:] = False
    for t in range(setZ.shape[0]):
        h = setZ[t]
        if h < 0:
            break
        if not excl[h]:
            seed[_find(parent_g, h)] = True
        j = iris_index[h]
        if j >= 0 and not excl[H + j]:
            seed[_find(parent_g, H + j)] = True
    for v in range(vh.shape[0]):
        sep = True
        for t in range(3):
            h = vh[v, t]
            if h < 0:
                continue
            node = vertex_node(h, vs[v, t], states, iris_index, vert_part, H)
            if not excl[node] and seed[_find(parent_g, node)]:
                sep = False
                break
        out[v] = sep


@njit(cache=True)
def all_color(hexset, color, ncol):
    for t in range(hexset.shape[0]):
        h = hexset[t]
        if h < 0:
            break
        if ncol[h] != color:
            return False
    return True


@njit(cache=True)
def _eval_events(colors, states, ev_kind, ev_color, ev_sets, ev_vh, ev_vs, H, edges, iris_hex,
                 iris_index, petals, part_color, part_touch, vert_part, ncol, parent_c, parent_g,
                 f0, f1, excl, seed, vout, res, adj, iw, bw, ew):
    node_colors(colors, states, iris_hex, part_color, ncol)
    for e in range(ev_kind.shape[0]):
        c = ev_color[e]
        if ev_kind[e] == PATH:
            res[e] = (all_color(ev_sets[e, 0], c, ncol) and all_color(ev_sets[e, 1], c, ncol)
                      and crossing(c, ev_sets[e, 0], ev_sets[e, 1], ncol, states, H, edges, iris_hex,
                                   iris_index, petals, part_color, part_touch, parent_c, f0, f1))
        elif ev_kind[e] == CROSSING:
            res[e] = crossing(c, ev_sets[e, 0], ev_sets[e, 1], ncol, states, H, edges, iris_hex,
                              iris_index, petals, part_color, part_touch, parent_c, f0, f1)
        else:
            separated_vertices(c, ev_sets[e, 0], ev_sets[e, 1], ev_sets[e, 2], ev_vh[e:e + 1],
                               ev_vs[e:e + 1], ncol, states, H, edges, iris_hex, iris_index, petals,
                               part_color, part_touch, vert_part, adj, iw, bw, ew, excl, parent_g,
                               seed, vout, True)
            res[e] = vout[0]


@njit(cache=True, nogil=True)
def eval_events_batch(colors, states, ev_kind, ev_color, ev_sets, ev_vh, ev_vs, edges, iris_hex,
                      iris_index, petals, part_color, part_touch, vert_part, out):
    n, H = colors.shape
    nn = H + iris_hex.shape[0]
    ncol = np.empty(nn, np.int8)
    parent_c = np.empty(nn, np.int64)
    parent_g = np.empty(nn, np.int64)
    f0 = np.empty(nn, np.bool_)
    f1 = np.empty(nn, np.bool_)
    excl = np.empty(nn, np.bool_)
    seed = np.empty(nn, np.bool_)
    vout = np.empty(1, np.bool_)
    res = np.empty(ev_kind.shape[0], np.bool_)
    adj, iw, bw, ew = workspace(nn, ev_sets.shape[2])
    for b in range(n):
        _eval_events(colors[b], states[b], ev_kind, ev_color, ev_sets, ev_vh, ev_vs, H, edges,
                     iris_hex, iris_index, petals, part_color, part_touch, vert_part, ncol,
                     parent_c, parent_g, f0, f1, excl, seed, vout, res, adj, iw, bw, ew)
        out[b, :] = res


@njit(cache=True, nogil=True)
def enumerate_counts(H, plain, ev_kind, ev_color, ev_sets, ev_vh, ev_vs, edges, iris_hex, iris_index,
                     petals, part_color, part_touch, vert_part, trig_table, counts):
    """counts[event mask, class code] over every support configuration.

    The class code records, per iris in base 3, whether it was a trigger
    (pure, mass 1/2), a non-trigger pure state (mass a) or mixed (mass s).
    """
    K = iris_hex.shape[0]
    nn = H + K
    colors = np.zeros(H, np.uint8)
    states = np.zeros(K, np.uint8)
    trig = np.zeros(K, np.bool_)
    ncol = np.empty(nn, np.int8)
    parent_c = np.empty(nn, np.int64)
    parent_g = np.empty(nn, np.int64)
    f0 = np.empty(nn, np.bool_)
    f1 = np.empty(nn, np.bool_)
    excl = np.empty(nn, np.bool_)
    seed = np.empty(nn, np.bool_)
    vout = np.empty(1, np.bool_)
    res = np.empty(ev_kind.shape[0], np.bool_)
    adj, iw, bw, ew = workspace(nn, ev_sets.shape[2])
    n_st = 1
    for j in range(K):
        n_st *= 5
    npl = plain.shape[0]
    for bits in range(1 << npl):
        for t in range(npl):
            colors[plain[t]] = (bits >> t) & 1
        for j in range(K):
            code = 0
            for k in range(6):
                code |= np.int64(colors[petals[j, k]]) << k
            trig[j] = trig_table[code]
        for combo in range(n_st):
            c = combo
            cls = 0
            mult = 1
            ok = True
            for j in range(K):
                st = c % 5
                c //= 5
                if trig[j] and st >= 2:
                    ok = False
                    break
                states[j] = st
                cl = 0 if trig[j] else (1 if st < 2 else 2)
                cls += cl * mult
                mult *= 3
            if not ok:
                continue
            _eval_events(colors, states, ev_kind, ev_color, ev_sets, ev_vh, ev_vs, H, edges,
                         iris_hex, iris_index, petals, part_color, part_touch, vert_part, ncol,
                         parent_c, parent_g, f0, f1, excl, seed, vout, res, adj, iw, bw, ew)
            mask = 0
            for e in range(res.shape[0]):
                if res[e]:
                    mask |= 1 << e
            counts[mask, cls] += 1


@njit(cache=True, nogil=True)
def cardy_batch(colors, states, arcs, vh, vs, edges, iris_hex, iris_index, petals, part_color,
                part_touch, vert_part, cvidx, cw, ccid, counts, integrals):
    """Shared-sample Cardy fields.

    arcs: (3, W) padded hexagon lists for A, B, C.  Event e in (u, v, w) uses
    (X, Y, Z) = (A, B, C), (B, C, A), (C, A, B).  counts[color, e, v] gains one
    per separated vertex; integrals[b, color, e, c] = sum of w_k * indicator
    over the tracked vertices of contour c.
    """
    n, H = colors.shape
    nn = H + iris_hex.shape[0]
    V = vh.shape[0]
    ncol = np.empty(nn, np.int8)
    parent_g = np.empty(nn, np.int64)
    excl = np.empty(nn, np.bool_)
    seed = np.empty(nn, np.bool_)
    sep = np.empty(V, np.bool_)
    adj, iw, bw, ew = workspace(nn, arcs.shape[1])
    for b in range(n):
        node_colors(colors[b], states[b], iris_hex, part_color, ncol)
        for color in range(2):
            color_adjacency(color, ncol, states[b], H, edges, iris_hex, petals, part_color, part_touch,
                            adj)
            for e in range(3):
                separated_vertices(color, arcs[e], arcs[(e + 1) % 3], arcs[(e + 2) % 3], vh, vs, ncol,
                                   states[b], H, edges, iris_hex, iris_index, petals, part_color,
                                   part_touch, vert_part, adj, iw, bw, ew, excl, parent_g, seed, sep,
                                   False)
                for v in range(V):
                    if sep[v]:
                        counts[color, e, v] += 1
                for t in range(cvidx.shape[0]):
                    if sep[cvidx[t]]:
                        integrals[b, color, e, ccid[t]] += cw[t]

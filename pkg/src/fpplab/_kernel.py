"""Compiled inner loops: the keyed edge-weight hash and the best-first search.

Inside a search, tree words are interned in a table (parent, letter, depth,
hash, common-prefix lengths with both endpoints, child index), so a vertex is
a (word id, z) pair and tree depth is unbounded.  Edge weights are keyed by a
base-independent *word hash*, so the same edge gets the same weight in every
topology built on the same tree.
"""

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
ROOT_SALT = np.uint64(0x243F6A8885A308D3)
SEED_SALT = np.uint64(0x6A09E667F3BCC909)
ZEDGE_SALT = np.uint64(0xD1B54A32D192ED03)

FULL, DARY, PRUNED, RESTRICTED = 0, 1, 2, 3
TREE_EDGE, Z_EDGE = 0, 1
CONSTANT, UNIFORM, EXPONENTIAL, SHIFTED_EXP, PARETO = 0, 1, 2, 3, 4

OK, BUDGET_EXCEEDED, NO_PATH = 0, 1, 2


@njit(cache=True)
def mix64(x):
    x = np.uint64(x)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True)
def root_hash():
    return mix64(ROOT_SALT)


@njit(cache=True)
def child_hash(parent, letter):
    return mix64(np.uint64(parent) + np.uint64(letter + 1) * GOLDEN)


@njit(cache=True)
def seed_key(seed):
    return mix64(np.uint64(seed) ^ SEED_SALT)


@njit(cache=True)
def edge_uniform(skey, kind, whash, z):
    skey = np.uint64(skey)
    x = mix64(skey ^ np.uint64(whash))
    salt = ZEDGE_SALT if kind == Z_EDGE else np.uint64(0)
    x = mix64(x ^ (np.uint64(np.int64(z)) * GOLDEN) ^ salt)
    x = mix64(x + skey)
    return (np.float64(x >> np.uint64(11)) + 0.5) * 1.1102230246251565e-16


@njit(cache=True)
def inverse_cdf(family, p1, p2, u):
    if family == CONSTANT:
        return p1
    if family == UNIFORM:
        return p1 + (p2 - p1) * u
    if family == EXPONENTIAL:
        return -np.log1p(-u) / p1
    if family == SHIFTED_EXP:
        return p1 - np.log1p(-u) / p2
    return p1 * (1.0 - u) ** (-1.0 / p2)


@njit(cache=True)
def edge_weight(skey, family, p1, p2, kind, whash, z):
    return inverse_cdf(family, p1, p2, edge_uniform(skey, kind, whash, z))




@njit(cache=True)
def edge_weights_along(skey, family, p1, p2, kind, whash, zs):
    out = np.empty(zs.shape[0], dtype=np.float64)
    for i in range(zs.shape[0]):
        out[i] = edge_weight(skey, family, p1, p2, kind, whash, zs[i])
    return out


@njit(cache=True)
def _slot(word, z, mask):
    return np.int64(mix64(np.uint64(word) ^ mix64(np.uint64(z) + GOLDEN)) & np.uint64(mask))


@njit(cache=True)
def _grow2(a, rows, fill):
    b = np.full((rows, a.shape[1]), fill, dtype=a.dtype)
    b[:a.shape[0]] = a
    return b


@njit(cache=True)
def _grow1(a, rows):
    b = np.empty(rows, dtype=a.dtype)
    b[:a.shape[0]] = a
    return b


# word table columns
_W_PARENT, _W_LETTER, _W_DEPTH, _W_HASH, _W_LT, _W_LS = 0, 1, 2, 3, 4, 5
# node table columns; _less reads DEPTH, WORD, Z in that order
_WORD, _Z, _DEPTH, _PARENT, _SETTLED = 0, 1, 2, 3, 4


@njit(cache=True)
def _new_words(d):
    W = np.empty((1 << 12, 6), dtype=np.int64)
    kids = np.full((1 << 12, d), -1, dtype=np.int64)
    W[0, _W_PARENT] = -1
    W[0, _W_LETTER] = -1
    W[0, _W_DEPTH] = 0
    W[0, _W_HASH] = np.int64(root_hash())
    W[0, _W_LT] = 0
    W[0, _W_LS] = 0
    return W, kids


@njit(cache=True)
def _child(W, kids, nw, w, letter, s_letters, t_letters):
    """Id of child ``letter`` of word ``w``, interning it on first use."""
    c = kids[w, letter]
    if c >= 0:
        return W, kids, nw, c
    if nw == W.shape[0]:
        W = _grow2(W, 2 * nw, 0)
        kids = _grow2(kids, 2 * nw, -1)
    c = nw
    dp = W[w, _W_DEPTH]
    W[c, _W_PARENT] = w
    W[c, _W_LETTER] = letter
    W[c, _W_DEPTH] = dp + 1
    W[c, _W_HASH] = np.int64(child_hash(np.uint64(W[w, _W_HASH]), letter))
    lt = W[w, _W_LT]
    if lt == dp and dp < t_letters.shape[0] and t_letters[dp] == letter:
        lt += 1
    ls = W[w, _W_LS]
    if ls == dp and dp < s_letters.shape[0] and s_letters[dp] == letter:
        ls += 1
    W[c, _W_LT] = lt
    W[c, _W_LS] = ls
    kids[w, letter] = c
    return W, kids, nw + 1, c


@njit(cache=True)
def _intern(W, kids, nw, letters, s_letters, t_letters):
    w = 0
    for i in range(letters.shape[0]):
        W, kids, nw, w = _child(W, kids, nw, w, letters[i], s_letters, t_letters)
    return W, kids, nw, w


@njit(cache=True)
def _less(heap, node, i, j):
    if heap[i, 0] != heap[j, 0]:
        return heap[i, 0] < heap[j, 0]
    a = np.int64(heap[i, 1])
    b = np.int64(heap[j, 1])
    for col in (2, 0, 1):  # depth, word id, z
        if node[a, col] != node[b, col]:
            return node[a, col] < node[b, col]
    return False


@njit(cache=True)
def _heap_pop(heap, hlen, node):
    top = np.int64(heap[0, 1])
    hlen -= 1
    if hlen > 0:
        heap[0, 0] = heap[hlen, 0]
        heap[0, 1] = heap[hlen, 1]
        i = 0
        while True:
            lft = 2 * i + 1
            if lft >= hlen:
                break
            m = lft
            if lft + 1 < hlen and _less(heap, node, lft + 1, lft):
                m = lft + 1
            if not _less(heap, node, m, i):
                break
            a0 = heap[i, 0]
            a1 = heap[i, 1]
            heap[i, 0] = heap[m, 0]
            heap[i, 1] = heap[m, 1]
            heap[m, 0] = a0
            heap[m, 1] = a1
            i = m
    return top, hlen


@njit(cache=True)
def _heap_push(heap, hlen, node, key, idx):
    if hlen == heap.shape[0]:
        heap = _grow2(heap, 2 * hlen, 0.0)
    heap[hlen, 0] = key
    heap[hlen, 1] = idx
    i = hlen
    while i > 0:
        p = (i - 1) // 2
        if not _less(heap, node, i, p):
            break
        a0 = heap[i, 0]
        a1 = heap[i, 1]
        heap[i, 0] = heap[p, 0]
        heap[i, 1] = heap[p, 1]
        heap[p, 0] = a0
        heap[p, 1] = a1
        i = p
    return heap, hlen + 1


@njit(cache=True)
def _find(table, word, z):
    """(index, slot): index is -1 when absent, slot is then the free slot."""
    mask = table.shape[0] - 1
    sl = _slot(word, z, mask)
    while table[sl, 0] != -1:
        if table[sl, 1] == word and table[sl, 2] == z:
            return table[sl, 0], sl
        sl = (sl + 1) & mask
    return -1, sl


@njit(cache=True)
def _rehash(node, count, tsize):
    table = np.empty((tsize, 3), dtype=np.int64)
    table[:, 0] = -1
    mask = tsize - 1
    for e in range(count):
        sl = _slot(node[e, _WORD], node[e, _Z], mask)
        while table[sl, 0] != -1:
            sl = (sl + 1) & mask
        table[sl, 0] = e
        table[sl, 1] = node[e, _WORD]
        table[sl, 2] = node[e, _Z]
    return table


@njit(cache=True)
def _new_side(word, z, depth, key):
    node = np.empty((1 << 12, 5), dtype=np.int64)
    g = np.empty(1 << 12, dtype=np.float64)
    table = np.empty((1 << 13, 3), dtype=np.int64)
    table[:, 0] = -1
    heap = np.empty((1 << 12, 2), dtype=np.float64)
    node[0, _WORD] = word
    node[0, _Z] = z
    node[0, _DEPTH] = depth
    node[0, _PARENT] = -1
    node[0, _SETTLED] = 0
    g[0] = 0.0
    _, sl = _find(table, word, z)
    table[sl, 0] = 0
    table[sl, 1] = word
    table[sl, 2] = z
    heap[0, 0] = key
    heap[0, 1] = 0.0
    return node, g, table, heap


@njit(cache=True)
def _expand(cur, side, bidir, node, g, table, heap, count, hlen, og, otable, W, kids, nw,
            d, variant, special, skey, family, p1, p2, floor,
            s_letters, s_z, t_letters, t_z, upper, nb_word, nb_z, nb_w,
            mu, meet_side, meet_a, meet_b):
    """Settle-time relaxation of every neighbour of ``cur`` on one side."""
    w = node[cur, _WORD]
    z = node[cur, _Z]
    depth = node[cur, _DEPTH]
    wh = np.uint64(W[w, _W_HASH])
    gc = g[cur]
    s_depth = s_letters.shape[0]
    t_depth = t_letters.shape[0]

    k = 0
    if depth > 0 and not (variant == RESTRICTED and w == special):
        nb_word[k] = W[w, _W_PARENT]
        nb_z[k] = z
        nb_w[k] = edge_weight(skey, family, p1, p2, TREE_EDGE, wh, z)
        k += 1
    nch = d - 1
    if depth == 0 and variant != DARY:
        nch = d
    for letter in range(nch):
        W, kids, nw, c = _child(W, kids, nw, w, letter, s_letters, t_letters)
        if variant == PRUNED and c == special:
            continue
        nb_word[k] = c
        nb_z[k] = z
        nb_w[k] = edge_weight(skey, family, p1, p2, TREE_EDGE, np.uint64(W[c, _W_HASH]), z)
        k += 1
    for dz in (-1, 1):
        nb_word[k] = w
        nb_z[k] = z + dz
        nb_w[k] = edge_weight(skey, family, p1, p2, Z_EDGE, wh, z if dz > 0 else z - 1)
        k += 1

    pcur = node[cur, _PARENT]
    pc_word = node[pcur, _WORD] if pcur >= 0 else -1
    pc_z = node[pcur, _Z] if pcur >= 0 else 0
    for j in range(k):
        vw = nb_word[j]
        vz = nb_z[j]
        if vw == pc_word and vz == pc_z:
            continue
        vd = W[vw, _W_DEPTH]
        ht = vd + t_depth - 2 * W[vw, _W_LT] + abs(vz - t_z)
        hs = vd + s_depth - 2 * W[vw, _W_LS] + abs(vz - s_z)
        newg = gc + nb_w[j]
        if side == 0:
            if newg + floor * ht > upper:
                continue
            if bidir:
                key = newg + 0.5 * floor * (ht - hs)
            else:
                key = newg + floor * ht
        else:
            if newg + floor * hs > upper:
                continue
            key = newg + 0.5 * floor * (hs - ht)
        idx, sl = _find(table, vw, vz)
        if idx >= 0:
            if node[idx, _SETTLED] != 0 or newg >= g[idx]:
                continue
            g[idx] = newg
            node[idx, _PARENT] = cur
        else:
            if count == node.shape[0]:
                node = _grow2(node, 2 * count, 0)
                g = _grow1(g, 2 * count)
            idx = count
            count += 1
            node[idx, _WORD] = vw
            node[idx, _Z] = vz
            node[idx, _DEPTH] = vd
            node[idx, _PARENT] = cur
            node[idx, _SETTLED] = 0
            g[idx] = newg
            table[sl, 0] = idx
            table[sl, 1] = vw
            table[sl, 2] = vz
            if 2 * count > table.shape[0]:
                table = _rehash(node, count, 2 * table.shape[0])
        oidx, _ = _find(otable, vw, vz)
        if oidx >= 0 and newg + og[oidx] < mu:
            mu = newg + og[oidx]
            meet_side = side
            meet_a = idx
            meet_b = oidx
        heap, hlen = _heap_push(heap, hlen, node, key, idx)
    return node, g, table, heap, count, hlen, W, kids, nw, mu, meet_side, meet_a, meet_b


@njit(cache=True)
def _chain(node, e):
    n = 0
    x = e
    while x >= 0:
        n += 1
        x = node[x, _PARENT]
    out = np.empty(n, dtype=np.int64)
    x = e
    for i in range(n):
        out[i] = x
        x = node[x, _PARENT]
    return out  # from e back to the side's root


@njit(cache=True)
def search(bidir, d, variant, special_letters, skey, family, p1, p2, floor,
           s_letters, s_z, t_letters, t_z, budget, upper):
    """Exact source-target FPP distance by A*.

    The potential is ``floor * graph_distance``, a lower bound on the
    remaining cost whenever all weights are at least ``floor``.  With
    ``bidir`` two searches run with averaged potentials (forward key
    ``g + floor (h_t - h_s) / 2``, backward its mirror); they share one
    consistent reduced metric and stop once the two heap minima sum to the
    best meeting value.  Otherwise a single forward search runs with key
    ``g + floor h_t``.  Vertices whose lower bound exceeds ``upper`` are
    never queued.  The distance is re-summed left to right along the path.

    ``special_letters`` names the excised word (pruned) or the anchor
    (restricted).  Heap order is (key, depth, word id, z).

    Returns ``(status, distance, settled, path_words, path_z, word_parent,
    word_letter)``; the last two decode word ids back to letter strings.
    """
    W, kids = _new_words(d)
    nw = 1
    W, kids, nw, s_word = _intern(W, kids, nw, s_letters, s_letters, t_letters)
    W, kids, nw, t_word = _intern(W, kids, nw, t_letters, s_letters, t_letters)
    special = -1
    if variant == PRUNED or variant == RESTRICTED:
        W, kids, nw, special = _intern(W, kids, nw, special_letters, s_letters, t_letters)
    s_depth = s_letters.shape[0]
    t_depth = t_letters.shape[0]
    L = s_depth + t_depth - 2 * W[t_word, _W_LS] + abs(s_z - t_z)
    k0 = 0.5 * floor * L if bidir else floor * L
    nF, gF, tF, hF = _new_side(s_word, s_z, s_depth, k0)
    nB, gB, tB, hB = _new_side(t_word, t_z, t_depth, k0)
    cF = 1
    cB = 1
    lF = 1
    lB = 1 if bidir else 0

    nb_word = np.empty(d + 3, dtype=np.int64)
    nb_z = np.empty(d + 3, dtype=np.int64)
    nb_w = np.empty(d + 3, dtype=np.float64)
    mu = np.inf
    meet_side = -1
    meet_a = -1
    meet_b = -1
    if s_word == t_word and s_z == t_z:
        mu = 0.0
        meet_side = 0
        meet_a = 0
        meet_b = 0
    settled = 0
    status = OK
    while lF > 0 and (lB > 0 or not bidir):
        if bidir:
            if hF[0, 0] + hB[0, 0] >= mu + 1e-12 * max(1.0, mu):
                break
            side = 0 if hF[0, 0] <= hB[0, 0] else 1
        else:
            if hF[0, 0] >= mu + 1e-12 * max(1.0, mu):
                break
            side = 0
        if side == 0:
            cur, lF = _heap_pop(hF, lF, nF)
            if nF[cur, _SETTLED] != 0:
                continue
        else:
            cur, lB = _heap_pop(hB, lB, nB)
            if nB[cur, _SETTLED] != 0:
                continue
        if settled >= budget:
            status = BUDGET_EXCEEDED
            break
        settled += 1
        if side == 0:
            nF[cur, _SETTLED] = 1
            nF, gF, tF, hF, cF, lF, W, kids, nw, mu, meet_side, meet_a, meet_b = _expand(
                cur, 0, bidir, nF, gF, tF, hF, cF, lF, gB, tB, W, kids, nw,
                d, variant, special, skey, family, p1, p2, floor,
                s_letters, s_z, t_letters, t_z, upper, nb_word, nb_z, nb_w,
                mu, meet_side, meet_a, meet_b)
        else:
            nB[cur, _SETTLED] = 1
            nB, gB, tB, hB, cB, lB, W, kids, nw, mu, meet_side, meet_a, meet_b = _expand(
                cur, 1, bidir, nB, gB, tB, hB, cB, lB, gF, tF, W, kids, nw,
                d, variant, special, skey, family, p1, p2, floor,
                s_letters, s_z, t_letters, t_z, upper, nb_word, nb_z, nb_w,
                mu, meet_side, meet_a, meet_b)

    empty = np.empty(0, dtype=np.int64)
    if status == OK and meet_side < 0:
        status = NO_PATH
    if status != OK:
        return status, np.inf, settled, empty, empty, empty, empty

    if meet_side == 0:
        fwd = _chain(nF, meet_a)
        bwd = _chain(nB, meet_b)
    else:
        fwd = _chain(nF, meet_b)
        bwd = _chain(nB, meet_a)
    # both chains contain the meeting vertex; keep the forward copy
    n = fwd.shape[0] + bwd.shape[0] - 1
    pw = np.empty(n, dtype=np.int64)
    pz = np.empty(n, dtype=np.int64)
    i = 0
    for j in range(fwd.shape[0] - 1, -1, -1):
        pw[i] = nF[fwd[j], _WORD]
        pz[i] = nF[fwd[j], _Z]
        i += 1
    for j in range(1, bwd.shape[0]):
        pw[i] = nB[bwd[j], _WORD]
        pz[i] = nB[bwd[j], _Z]
        i += 1
    dist = 0.0
    for i in range(n - 1):
        a = pw[i]
        b = pw[i + 1]
        if a == b:
            dist += edge_weight(skey, family, p1, p2, Z_EDGE, np.uint64(W[a, _W_HASH]),
                                min(pz[i], pz[i + 1]))
        else:
            lower = a if W[a, _W_DEPTH] > W[b, _W_DEPTH] else b
            dist += edge_weight(skey, family, p1, p2, TREE_EDGE, np.uint64(W[lower, _W_HASH]),
                                pz[i])
    return (status, dist, settled, pw, pz,
            W[:nw, _W_PARENT].copy(), W[:nw, _W_LETTER].copy())

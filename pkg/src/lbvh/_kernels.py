"""Compiled hot loops: radix-tree topology, bottom-up refit, batched traversal.

Every kernel is nogil so batch drivers can run chunks of work on plain
threads. Kernels never raise; stack-overflow conditions are reported through
per-query error flags checked by the drivers.

Keys used for topology are 64-bit concatenations ``code * 2**32 + position``
of the sorted 30-bit Morton codes with their sorted positions, which makes
every key distinct and lets duplicate codes split on position bits.
"""

import numpy as np
from numba import njit

STACK_CAPACITY = 64


# ---------------------------------------------------------------------------
# Prefix metric and topology
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _bit_length_64(x):
    # x: non-negative int64
    n = 0
    if x >= 1 << 32:
        n += 32
        x >>= 32
    if x >= 1 << 16:
        n += 16
        x >>= 16
    if x >= 1 << 8:
        n += 8
        x >>= 8
    if x >= 1 << 4:
        n += 4
        x >>= 4
    if x >= 1 << 2:
        n += 2
        x >>= 2
    if x >= 2:
        n += 1
        x >>= 1
    if x >= 1:
        n += 1
    return n


@njit(cache=True, nogil=True, inline="always")
def _prefix(akeys, n, i, j):
    # Common-prefix length of augmented keys i and j; -1 when j is out of range.
    if j < 0 or j >= n:
        return -1
    x = akeys[i] ^ akeys[j]
    if x == 0:
        return 64
    return 64 - _bit_length_64(x)


@njit(cache=True, nogil=True)
def find_split_kernel(akeys, first, last):
    # Highest position s in [first, last) such that keys first..s share a
    # strictly longer prefix than the whole range does.
    n = akeys.shape[0]
    common = _prefix(akeys, n, first, last)
    split = first
    step = last - first
    while True:
        step = (step + 1) >> 1
        candidate = split + step
        if candidate < last and _prefix(akeys, n, first, candidate) > common:
            split = candidate
        if step <= 1:
            break
    return split


@njit(cache=True, nogil=True)
def node_range_kernel(akeys, i):
    # Leaf range [first, last] owned by internal node i: direction from the
    # longer-prefix neighbor, extent by exponential then binary search.
    n = akeys.shape[0]
    d = 1 if _prefix(akeys, n, i, i + 1) > _prefix(akeys, n, i, i - 1) else -1
    prefix_floor = _prefix(akeys, n, i, i - d)
    span_max = 2
    while _prefix(akeys, n, i, i + span_max * d) > prefix_floor:
        span_max <<= 1
    span = 0
    t = span_max >> 1
    while t >= 1:
        if _prefix(akeys, n, i, i + (span + t) * d) > prefix_floor:
            span += t
        t >>= 1
    j = i + span * d
    if i < j:
        return i, j
    return j, i


@njit(cache=True, nogil=True)
def build_topology(akeys, left, right, parent, i_start, i_end):
    # Each internal node i in [i_start, i_end) is resolved independently.
    # Internal node ids are 0..n-2; the leaf at sorted position p has id
    # (n-1)+p. A child is a leaf exactly when its sub-range is a single key.
    n = akeys.shape[0]
    for i in range(i_start, i_end):
        first, last = node_range_kernel(akeys, i)
        g = find_split_kernel(akeys, first, last)
        lc = (n - 1) + g if g == first else g
        rc = (n - 1) + (g + 1) if g + 1 == last else g + 1
        left[i] = lc
        right[i] = rc
        parent[lc] = i
        parent[rc] = i


@njit(cache=True, nogil=True)
def refit_kernel(node_mins, node_maxs, left, right, parent, n):
    # Bottom-up box fill: walk up from every leaf; the first arrival at an
    # internal node stops, the second proceeds, so both children are final
    # before the parent box is written.
    visits = np.zeros(n - 1, dtype=np.int32)
    for leaf_id in range(n - 1, 2 * n - 1):
        node = leaf_id
        while True:
            p = parent[node]
            if p < 0:
                break
            visits[p] += 1
            if visits[p] < 2:
                break
            lc = left[p]
            rc = right[p]
            for axis in range(3):
                node_mins[p, axis] = min(node_mins[lc, axis], node_mins[rc, axis])
                node_maxs[p, axis] = max(node_maxs[lc, axis], node_maxs[rc, axis])
            node = p


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _box_dist_sq(node_mins, node_maxs, node, px, py, pz):
    d = np.float32(0.0)
    v = px
    lo = node_mins[node, 0]
    hi = node_maxs[node, 0]
    if v < lo:
        t = lo - v
        d += t * t
    elif v > hi:
        t = v - hi
        d += t * t
    v = py
    lo = node_mins[node, 1]
    hi = node_maxs[node, 1]
    if v < lo:
        t = lo - v
        d += t * t
    elif v > hi:
        t = v - hi
        d += t * t
    v = pz
    lo = node_mins[node, 2]
    hi = node_maxs[node, 2]
    if v < lo:
        t = lo - v
        d += t * t
    elif v > hi:
        t = v - hi
        d += t * t
    return d


@njit(cache=True, nogil=True)
def spatial_pass(node_mins, node_maxs, left, right, leaf_obj, centers, radii,
                 order, q_start, q_end, counts, offsets, out, store, err):
    """Count (store=False) or fill (store=True) hits for queries in one chunk.

    Iterates traversal order positions [q_start, q_end); results land at the
    original query's slot/span so output order matches the caller's.
    """
    n = leaf_obj.shape[0]
    internal = n - 1
    stack = np.empty(STACK_CAPACITY, dtype=np.int64)
    for s in range(q_start, q_end):
        q = order[s]
        px = centers[q, 0]
        py = centers[q, 1]
        pz = centers[q, 2]
        r = radii[q]
        r2 = r * r
        base = offsets[q] if store else 0
        cnt = 0
        if n == 1:
            if _box_dist_sq(node_mins, node_maxs, 0, px, py, pz) <= r2:
                if store:
                    out[base] = leaf_obj[0]
                cnt = 1
            counts[q] = cnt
            continue
        sp = 1
        stack[0] = 0
        failed = False
        while sp > 0:
            sp -= 1
            node = stack[sp]
            for side in range(2):
                child = left[node] if side == 0 else right[node]
                if _box_dist_sq(node_mins, node_maxs, child, px, py, pz) <= r2:
                    if child >= internal:
                        if store:
                            out[base + cnt] = leaf_obj[child - internal]
                        cnt += 1
                    else:
                        if sp >= STACK_CAPACITY:
                            err[q] = 1
                            failed = True
                            break
                        stack[sp] = child
                        sp += 1
            if failed:
                break
        counts[q] = cnt


@njit(cache=True, nogil=True)
def spatial_pass_buffered(node_mins, node_maxs, left, right, leaf_obj, centers,
                          radii, order, q_start, q_end, buf, counts, overflow, err):
    """Single-pass count-and-store into per-query rows of a fixed buffer.

    A query that exceeds its row is flagged in ``overflow`` and abandoned;
    the driver falls back to the two-pass path for the whole batch.
    """
    n = leaf_obj.shape[0]
    internal = n - 1
    capacity = buf.shape[1]
    stack = np.empty(STACK_CAPACITY, dtype=np.int64)
    for s in range(q_start, q_end):
        q = order[s]
        px = centers[q, 0]
        py = centers[q, 1]
        pz = centers[q, 2]
        r = radii[q]
        r2 = r * r
        cnt = 0
        if n == 1:
            if _box_dist_sq(node_mins, node_maxs, 0, px, py, pz) <= r2:
                buf[q, 0] = leaf_obj[0]
                cnt = 1
            counts[q] = cnt
            continue
        sp = 1
        stack[0] = 0
        failed = False
        while sp > 0:
            sp -= 1
            node = stack[sp]
            for side in range(2):
                child = left[node] if side == 0 else right[node]
                if _box_dist_sq(node_mins, node_maxs, child, px, py, pz) <= r2:
                    if child >= internal:
                        if cnt >= capacity:
                            overflow[q] = 1
                            failed = True
                            break
                        buf[q, cnt] = leaf_obj[child - internal]
                        cnt += 1
                    else:
                        if sp >= STACK_CAPACITY:
                            err[q] = 1
                            failed = True
                            break
                        stack[sp] = child
                        sp += 1
            if failed:
                break
        counts[q] = cnt


@njit(cache=True, nogil=True)
def compact_rows(buf, counts, offsets, out, q_start, q_end):
    for q in range(q_start, q_end):
        base = offsets[q]
        for j in range(counts[q]):
            out[base + j] = buf[q, j]


@njit(cache=True, nogil=True, inline="always")
def _worse(d1, i1, d2, i2):
    # Lexicographic (distance, ordinal) comparison; True when entry 1 is worse.
    return d1 > d2 or (d1 == d2 and i1 > i2)


@njit(cache=True, nogil=True, inline="always")
def _sift_down(hd, hi, size, pos):
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        sibling = child + 1
        if sibling < size and _worse(hd[sibling], hi[sibling], hd[child], hi[child]):
            child = sibling
        if _worse(hd[child], hi[child], hd[pos], hi[pos]):
            hd[pos], hd[child] = hd[child], hd[pos]
            hi[pos], hi[child] = hi[child], hi[pos]
            pos = child
        else:
            break


@njit(cache=True, nogil=True, inline="always")
def _sift_up(hd, hi, pos):
    while pos > 0:
        up = (pos - 1) >> 1
        if _worse(hd[pos], hi[pos], hd[up], hi[up]):
            hd[pos], hd[up] = hd[up], hd[pos]
            hi[pos], hi[up] = hi[up], hi[pos]
            pos = up
        else:
            break


@njit(cache=True, nogil=True)
def knn_pass(node_mins, node_maxs, left, right, leaf_obj, centers, order,
             q_start, q_end, offsets, out_idx, out_dist, err):
    """k-nearest traversal for one chunk of queries.

    The per-query span of ``out_idx``/``out_dist`` doubles as a bounded
    max-heap of the best candidates; the closer child of a popped node is
    pushed last so it is processed first, and a stack entry whose recorded
    distance exceeds the current worst candidate is skipped. Spans end up
    sorted ascending by (distance, ordinal), with true distances.
    """
    n = leaf_obj.shape[0]
    internal = n - 1
    stack_node = np.empty(STACK_CAPACITY, dtype=np.int64)
    stack_dist = np.empty(STACK_CAPACITY, dtype=np.float32)
    for s in range(q_start, q_end):
        q = order[s]
        px = centers[q, 0]
        py = centers[q, 1]
        pz = centers[q, 2]
        base = offsets[q]
        kk = offsets[q + 1] - base
        hd = out_dist[base:base + kk]
        hi = out_idx[base:base + kk]
        if kk <= 0:
            continue
        size = 0
        if n == 1:
            hd[0] = np.sqrt(_box_dist_sq(node_mins, node_maxs, 0, px, py, pz))
            hi[0] = leaf_obj[0]
            continue
        sp = 1
        stack_node[0] = 0
        stack_dist[0] = _box_dist_sq(node_mins, node_maxs, 0, px, py, pz)
        failed = False
        while sp > 0:
            sp -= 1
            node = stack_node[sp]
            nd = stack_dist[sp]
            if size == kk and nd > hd[0]:
                continue
            cl = left[node]
            cr = right[node]
            dl = _box_dist_sq(node_mins, node_maxs, cl, px, py, pz)
            dr = _box_dist_sq(node_mins, node_maxs, cr, px, py, pz)
            # visit the farther child first so the nearer sits on stack top
            if dl <= dr:
                first_c, first_d = cr, dr
                second_c, second_d = cl, dl
            else:
                first_c, first_d = cl, dl
                second_c, second_d = cr, dr
            for pick in range(2):
                child = first_c if pick == 0 else second_c
                cd = first_d if pick == 0 else second_d
                if size == kk and cd > hd[0]:
                    continue
                if child >= internal:
                    obj = leaf_obj[child - internal]
                    if size < kk:
                        hd[size] = cd
                        hi[size] = obj
                        size += 1
                        _sift_up(hd, hi, size - 1)
                    elif _worse(hd[0], hi[0], cd, obj):
                        hd[0] = cd
                        hi[0] = obj
                        _sift_down(hd, hi, kk, 0)
                else:
                    if sp >= STACK_CAPACITY:
                        err[q] = 1
                        failed = True
                        break
                    stack_node[sp] = child
                    stack_dist[sp] = cd
                    sp += 1
            if failed:
                break
        # heap-sort the span ascending by (distance, ordinal)
        hs = size
        while hs > 1:
            hs -= 1
            hd[0], hd[hs] = hd[hs], hd[0]
            hi[0], hi[hs] = hi[hs], hi[0]
            _sift_down(hd, hi, hs, 0)
        for j in range(size):
            hd[j] = np.sqrt(hd[j])

"""Hot loops. Each numba kernel has a numpy (or plain python) twin with the
same contract; `_accel.HAVE_NUMBA` decides which one the solvers call.

Red DP state layout: a window (b_1..b_W) of sensor-type ids (0 = nobody)
for the last W positions, b_1 newest, encoded as sum b_{m+1} * B**m.
"""
import numpy as np

from ._accel import njit, HAVE_NUMBA

NEG_POS = -(1 << 40)   # "never sensed" marker for last-use positions
TIE = 1e-12


# -- Best Red Response, dense table --------------------------------------

@njit
def _red_dense_numba(cost_none, cap, valid, B, W, want_bp):
    n = cost_none.shape[0]
    size = B ** W
    low = B ** (W - 1)
    J = np.full(size, np.inf)
    J[0] = 0.0
    Jn = np.empty(size)
    if want_bp:
        bp = np.zeros((n, low), dtype=np.int32)
    else:
        bp = np.zeros((1, 1), dtype=np.int32)
    for p in range(n):
        for r in range(low):
            m = np.inf
            arg = 0
            for s in range(B):
                val = J[r + low * s]
                if val < m:
                    m = val
                    arg = s
            if want_bp:
                bp[p, r] = arg
            base = B * r
            for b in range(B):
                code = base + b
                if m == np.inf or not valid[code]:
                    Jn[code] = np.inf
                elif b == 0:
                    Jn[code] = m + cost_none[p]
                elif cap[p, b]:
                    Jn[code] = m
                else:
                    Jn[code] = np.inf
        J, Jn = Jn, J
    return J, bp


def _red_dense_numpy(cost_none, cap, valid, B, W, want_bp):
    n = cost_none.shape[0]
    size = B ** W
    low = B ** (W - 1)
    J = np.full(size, np.inf)
    J[0] = 0.0
    bp = np.zeros((n, low) if want_bp else (1, 1), dtype=np.int32)
    add = np.empty(B)
    for p in range(n):
        Jr = J.reshape(B, low)
        m = Jr.min(axis=0)
        if want_bp:
            bp[p] = Jr.argmin(axis=0)
        add[0] = cost_none[p]
        add[1:] = np.where(cap[p, 1:], 0.0, np.inf)
        Jn = (m[:, None] + add[None, :]).reshape(-1)
        Jn[~valid] = np.inf
        J = Jn
    return J, bp


def red_dense(cost_none, cap, valid, B, W, want_bp=True):
    if HAVE_NUMBA:
        return _red_dense_numba(cost_none, cap, valid, B, W, want_bp)
    return _red_dense_numpy(cost_none, cap, valid, B, W, want_bp)


def window_valid_mask(counts, W):
    """valid[code] iff no type appears in the window more often than it has sensors."""
    B = len(counts) + 1
    size = B ** W
    codes = np.arange(size, dtype=np.int64)
    per = np.zeros((size, B), dtype=np.int64)
    for m in range(W):
        digit = (codes // B ** m) % B
        per[codes, digit] += 1
    lim = np.concatenate([[W], np.asarray(counts, dtype=np.int64)])
    return np.all(per <= lim[None, :], axis=1)


# -- Stackelberg: all orderings, red DP shared along the prefix tree ------

@njit
def _layer(Jin, Jout, c_none, cap_row, valid, B, low):
    best = np.inf
    for r in range(low):
        m = np.inf
        for s in range(B):
            val = Jin[r + low * s]
            if val < m:
                m = val
        base = B * r
        for b in range(B):
            code = base + b
            if m == np.inf or not valid[code]:
                Jout[code] = np.inf
            elif b == 0:
                Jout[code] = m + c_none
            elif cap_row[b]:
                Jout[code] = m
            else:
                Jout[code] = np.inf
            if Jout[code] < best:
                best = Jout[code]
    return best


@njit
def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] < b[i]:
            return True
        if a[i] > b[i]:
            return False
    return False


@njit
def _stackelberg_numba(cost_none, cap, valid, B, W):
    n = cost_none.shape[0]
    size = B ** W
    low = B ** (W - 1)
    stack = np.full((n + 1, size), np.inf)
    stack[0, 0] = 0.0
    prefmin = np.zeros(n + 1)
    used = np.zeros(n, dtype=np.bool_)
    order = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n + 1, dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    best = -1.0
    best_pos = np.zeros(n, dtype=np.int64)
    total = 0.0
    for i in range(n):
        total += cost_none[i]
    remaining = total
    depth = 0
    leaves = 0
    while depth >= 0:
        if depth == n:
            leaves += 1
            val = prefmin[n]
            for i in range(n):
                pos[order[i]] = i + 1
            if val > best + 1e-12:
                best = val
                best_pos[:] = pos
            elif abs(val - best) <= 1e-12 and _lex_less(pos, best_pos):
                best_pos[:] = pos
            depth -= 1
            t = order[depth]
            used[t] = False
            remaining += cost_none[t]
            continue
        t = nxt[depth]
        while t < n and used[t]:
            t += 1
        if t >= n:
            nxt[depth] = 0
            depth -= 1
            if depth >= 0:
                u = order[depth]
                used[u] = False
                remaining += cost_none[u]
            continue
        nxt[depth] = t + 1
        m = _layer(stack[depth], stack[depth + 1], cost_none[t], cap[t], valid, B, low)
        rem = remaining - cost_none[t]
        # any completion is worth at most m + rem
        if m + rem < best - 1e-12:
            continue
        used[t] = True
        order[depth] = t
        remaining = rem
        prefmin[depth + 1] = m
        depth += 1
        nxt[depth] = 0
    return best, best_pos, leaves


def _stackelberg_numpy(cost_none, cap, valid, B, W):
    n = cost_none.shape[0]
    size = B ** W
    low = B ** (W - 1)
    state = {"best": -1.0, "pos": None, "leaves": 0}
    order = []
    used = [False] * n
    add = np.empty(B)

    def step(J, t):
        m = J.reshape(B, low).min(axis=0)
        add[0] = cost_none[t]
        add[1:] = np.where(cap[t, 1:], 0.0, np.inf)
        Jn = (m[:, None] + add[None, :]).reshape(-1)
        Jn[~valid] = np.inf
        return Jn

    def rec(J, remaining):
        if len(order) == n:
            state["leaves"] += 1
            val = float(J.min())
            pos = np.empty(n, dtype=np.int64)
            pos[np.array(order, dtype=np.int64)] = np.arange(1, n + 1)
            best = state["best"]
            if val > best + 1e-12:
                state["best"], state["pos"] = val, pos
            elif abs(val - best) <= 1e-12 and tuple(pos) < tuple(state["pos"]):
                state["pos"] = pos
            return
        for t in range(n):
            if used[t]:
                continue
            Jn = step(J, t)
            m = float(Jn.min())
            rem = remaining - cost_none[t]
            if m + rem < state["best"] - 1e-12:
                continue
            used[t] = True
            order.append(t)
            rec(Jn, rem)
            order.pop()
            used[t] = False

    J0 = np.full(size, np.inf)
    J0[0] = 0.0
    rec(J0, float(cost_none.sum()))
    pos = state["pos"] if state["pos"] is not None else np.arange(1, n + 1)
    return state["best"], pos, state["leaves"]


def stackelberg_enumerate(cost_none, cap, valid, B, W):
    if HAVE_NUMBA:
        return _stackelberg_numba(cost_none, cap, valid, B, W)
    return _stackelberg_numpy(cost_none, cap, valid, B, W)


# -- Greedy (non-coordinated) pipeline ------------------------------------

@njit
def _simulate_numba(order, matrix, values, tau):
    n = order.shape[0]
    k = matrix.shape[1]
    last = np.full(k, NEG_POS, dtype=np.int64)
    assign = np.zeros(n, dtype=np.int64)
    val = 0.0
    for p in range(n):
        t = order[p]
        hit = -1
        for j in range(k):
            if matrix[t, j] and (p + 1) - last[j] > tau:
                hit = j
                break
        if hit >= 0:
            last[hit] = p + 1
            assign[t] = hit + 1
        else:
            val += values[t]
    return val, assign


def _simulate_numpy(order, matrix, values, tau):
    n = order.shape[0]
    k = matrix.shape[1]
    last = np.full(k, NEG_POS, dtype=np.int64)
    assign = np.zeros(n, dtype=np.int64)
    val = 0.0
    for p in range(n):
        t = order[p]
        ready = (matrix[t] != 0) & ((p + 1) - last > tau)
        idx = np.flatnonzero(ready)
        if idx.size:
            last[idx[0]] = p + 1
            assign[t] = idx[0] + 1
        else:
            val += values[t]
    return val, assign


def simulate_order(order, matrix, values, tau):
    if HAVE_NUMBA:
        return _simulate_numba(order, matrix, values, tau)
    return _simulate_numpy(order, matrix, values, tau)


@njit
def _blue_enumerate_numba(matrix, values, tau):
    n = matrix.shape[0]
    k = matrix.shape[1]
    last = np.full(k, NEG_POS, dtype=np.int64)
    saved = np.zeros(n + 1, dtype=np.int64)      # sensor touched at each depth (-1: none)
    saved_last = np.zeros(n + 1, dtype=np.int64)
    vals = np.zeros(n + 1)
    used = np.zeros(n, dtype=np.bool_)
    order = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n + 1, dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    best = -1.0
    best_pos = np.zeros(n, dtype=np.int64)
    total = 0.0
    for i in range(n):
        total += values[i]
    remaining = total
    depth = 0
    leaves = 0
    while depth >= 0:
        if depth == n:
            leaves += 1
            val = vals[n]
            for i in range(n):
                pos[order[i]] = i + 1
            if val > best + 1e-12:
                best = val
                best_pos[:] = pos
            elif abs(val - best) <= 1e-12 and _lex_less(pos, best_pos):
                best_pos[:] = pos
            depth -= 1
            # undo placement at depth
            t = order[depth]
            used[t] = False
            remaining += values[t]
            if saved[depth] >= 0:
                last[saved[depth]] = saved_last[depth]
            continue
        t = nxt[depth]
        while t < n and used[t]:
            t += 1
        if t >= n:
            nxt[depth] = 0
            depth -= 1
            if depth >= 0:
                u = order[depth]
                used[u] = False
                remaining += values[u]
                if saved[depth] >= 0:
                    last[saved[depth]] = saved_last[depth]
            continue
        nxt[depth] = t + 1
        p = depth + 1
        hit = -1
        for j in range(k):
            if matrix[t, j] and p - last[j] > tau:
                hit = j
                break
        v = vals[depth]
        if hit < 0:
            v += values[t]
        rem = remaining - values[t]
        if v + rem < best - 1e-12:
            continue
        saved[depth] = hit
        if hit >= 0:
            saved_last[depth] = last[hit]
            last[hit] = p
        used[t] = True
        order[depth] = t
        remaining = rem
        vals[depth + 1] = v
        depth += 1
        nxt[depth] = 0
    return best, best_pos, leaves


def _blue_enumerate_python(matrix, values, tau):
    n, k = matrix.shape
    last = [NEG_POS] * k
    caps = [[j for j in range(k) if matrix[t, j]] for t in range(n)]
    vals = [float(v) for v in values]
    state = {"best": -1.0, "pos": None, "leaves": 0}
    order = []
    used = [False] * n

    def rec(v, remaining):
        p = len(order) + 1
        if p == n + 1:
            state["leaves"] += 1
            pos = [0] * n
            for i, t in enumerate(order):
                pos[t] = i + 1
            if v > state["best"] + 1e-12:
                state["best"], state["pos"] = v, pos
            elif abs(v - state["best"]) <= 1e-12 and pos < state["pos"]:
                state["pos"] = pos
            return
        for t in range(n):
            if used[t]:
                continue
            hit = -1
            for j in caps[t]:
                if p - last[j] > tau:
                    hit = j
                    break
            nv = v + (vals[t] if hit < 0 else 0.0)
            rem = remaining - vals[t]
            if nv + rem < state["best"] - 1e-12:
                continue
            old = last[hit] if hit >= 0 else 0
            if hit >= 0:
                last[hit] = p
            used[t] = True
            order.append(t)
            rec(nv, rem)
            order.pop()
            used[t] = False
            if hit >= 0:
                last[hit] = old

    rec(0.0, sum(vals))
    pos = state["pos"] if state["pos"] is not None else list(range(1, n + 1))
    return state["best"], np.array(pos, dtype=np.int64), state["leaves"]


def blue_enumerate(matrix, values, tau):
    if HAVE_NUMBA:
        return _blue_enumerate_numba(matrix, values, tau)
    return _blue_enumerate_python(matrix, values, tau)

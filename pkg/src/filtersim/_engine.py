"""Per-cycle kernels of the streaming filter.

The clocked control logic (``cycle``/``run``) is written once and closed
over one of two sets of datapath helpers: explicit loops compiled with
numba, or numpy-vectorised equivalents for the interpreted fallback.
State lives in flat int64 arrays so both paths share it unchanged.
"""

import functools

import numpy as np

from . import _backend

# params[] slots
P_W, P_H, P_IW, P_FRAMES, P_FORM, P_WRAP, P_NEGLECT, P_CONST = range(8)
P_LAT, P_DELAY, P_STALL, P_FRAC, P_MAXOUT, P_OUT_H, P_OUT_W, P_END = range(8, 16)
N_PARAMS = 16

# regs[] slots
R_CYCLE, R_POS, R_CONSUMED, R_STALLS, R_STALL_LEFT, R_EMITTED = range(6)
R_FIRST_OUT, R_LAST_OUT, R_STARTED, R_OUT_IDX, R_OUT_VAL = range(6, 11)
N_REGS = 11


# -- loop helpers (numba) -------------------------------------------------

def _shift_in_loop(rowbuf, cache, raw, vsel_row, col, grow, x, const):
    w = cache.shape[0]
    lines = w - 1
    for i in range(lines):
        raw[i] = rowbuf[(grow - lines + i) % lines, col]
    raw[lines] = x
    if lines > 0:
        rowbuf[grow % lines, col] = x
    for j in range(w - 1):
        for a in range(w):
            cache[a, j] = cache[a, j + 1]
    for a in range(w):
        s = vsel_row[a]
        cache[a, w - 1] = raw[s] if s >= 0 else const


def _window_loop(cache, hsel_row, const, win):
    w = cache.shape[0]
    for a in range(w):
        for b in range(w):
            s = hsel_row[b]
            win[a * w + b] = cache[a, s] if s >= 0 else const


def _wrap_window_loop(frame, rsel_row, csel_row, win):
    w = rsel_row.shape[0]
    for a in range(w):
        for b in range(w):
            win[a * w + b] = frame[rsel_row[a], csel_row[b]]


def _tree_sum_loop(win, coefs, arity, nodes, vals):
    n = win.shape[0]
    for i in range(n):
        vals[i] = win[i] * coefs[i]
    k = 0
    for s in range(nodes.shape[0]):
        src = 0
        for node in range(nodes[s]):
            acc = 0
            for _ in range(arity[k]):
                acc += vals[src]
                src += 1
            vals[node] = acc
            k += 1
    return vals[0]


def _mac_step_loop(mac, coefs, delays, x, p):
    depth = mac.shape[1]
    slot = p % depth
    out = 0
    for n in range(coefs.shape[0]):
        carry = mac[n - 1, (p - delays[n]) % depth] if n > 0 else 0
        out = carry + coefs[n] * x
        mac[n, slot] = out
    return out


# -- numpy helpers (fallback) ---------------------------------------------

def _shift_in_np(rowbuf, cache, raw, vsel_row, col, grow, x, const):
    lines = cache.shape[0] - 1
    if lines > 0:
        raw[:lines] = rowbuf[(grow - lines + np.arange(lines)) % lines, col]
        rowbuf[grow % lines, col] = x
    raw[lines] = x
    cache[:, :-1] = cache[:, 1:]
    cache[:, -1] = np.where(vsel_row >= 0, raw[vsel_row], const)


def _window_np(cache, hsel_row, const, win):
    win[:] = np.where(hsel_row[None, :] >= 0, cache[:, hsel_row], const).ravel()


def _wrap_window_np(frame, rsel_row, csel_row, win):
    win[:] = frame[np.ix_(rsel_row, csel_row)].ravel()


def _tree_sum_np(win, coefs, arity, nodes, vals):
    v = win * coefs
    k = 0
    for count in nodes:
        ar = arity[k:k + count]
        v = np.add.reduceat(v, np.concatenate(([0], np.cumsum(ar)[:-1])))
        k += count
    return int(v[0])


def _mac_step_np(mac, coefs, delays, x, p):
    depth = mac.shape[1]
    n = coefs.shape[0]
    carry = np.zeros(n, dtype=np.int64)
    carry[1:] = mac[np.arange(n - 1), (p - delays[1:]) % depth]
    mac[:, p % depth] = carry + coefs * x
    return int(mac[n - 1, p % depth])


def _make_engine(shift_in, window, wrap_window, tree_sum, mac_step, jit):
    if jit:
        shift_in, window, wrap_window, tree_sum, mac_step = (
            _backend.njit(f) for f in (shift_in, window, wrap_window, tree_sum, mac_step))

    def advance(params, p, x, cyc, rowbuf, cache, raw, vsel, hsel, frames, mac,
                coefs, delays, arity, nodes, win, vals, q_valid, q_idx, q_val):
        """Move the stream one position: ingest ``x`` and maybe start a result."""
        w = params[P_W]
        H = params[P_H]
        W = params[P_IW]
        hw = H * W
        half = (w - 1) // 2
        total_in = params[P_FRAMES] * hw
        const = params[P_CONST]
        col = p % W
        grow = p // W
        idx = -1
        acc = 0
        if params[P_FORM] == 1:
            # Transposed MAC chain; its output at p filters the window ending at p.
            acc = mac_step(mac, coefs, delays, x, p)
            lrow = (p % hw) // W
            if p < total_in and lrow >= w - 1 and col >= w - 1:
                idx = ((p // hw) * params[P_OUT_H] * params[P_OUT_W]
                       + (lrow - w + 1) * params[P_OUT_W] + (col - w + 1))
        else:
            if params[P_WRAP] == 1:
                if p < total_in:
                    frames[(p // hw) % 2, (p % hw) // W, col] = x
            else:
                shift_in(rowbuf, cache, raw, vsel[(grow - half) % H], col, grow, x, const)
            k = p - params[P_DELAY]
            if 0 <= k < total_in:
                fo = k // hw
                r = (k % hw) // W
                c = k % W
                if params[P_NEGLECT] == 1:
                    if half <= r < H - half and half <= c < W - half:
                        idx = (fo * params[P_OUT_H] * params[P_OUT_W]
                               + (r - half) * params[P_OUT_W] + (c - half))
                else:
                    idx = k
                if idx >= 0:
                    if params[P_WRAP] == 1:
                        wrap_window(frames[fo % 2], vsel[r], hsel[c], win)
                    else:
                        window(cache, hsel[c], const, win)
                    acc = tree_sum(win, coefs, arity, nodes, vals)
        if idx >= 0:
            frac = params[P_FRAC]
            if frac > 0:
                acc = (acc + (1 << (frac - 1))) >> frac
            if acc < 0:
                acc = 0
            elif acc > params[P_MAXOUT]:
                acc = params[P_MAXOUT]
            slot = (cyc + params[P_LAT]) % q_valid.shape[0]
            q_valid[slot] = 1
            q_idx[slot] = idx
            q_val[slot] = acc

    if jit:
        advance = _backend.njit(advance)

    def cycle(params, regs, pixel, has_pixel, rowbuf, cache, raw, vsel, hsel, frames,
              mac, coefs, delays, arity, nodes, win, vals, q_valid, q_idx, q_val,
              out_val, out_cyc):
        """Advance one clock.  Returns 1 if ``pixel`` was accepted, else 0."""
        regs[R_OUT_IDX] = -1
        if regs[R_STARTED] == 0:
            if not has_pixel:
                return 0
            regs[R_STARTED] = 1
        regs[R_CYCLE] += 1
        cyc = regs[R_CYCLE]

        slot = cyc % q_valid.shape[0]
        if q_valid[slot] == 1:
            q_valid[slot] = 0
            i = q_idx[slot]
            out_val[i] = q_val[slot]
            out_cyc[i] = cyc
            regs[R_EMITTED] += 1
            if regs[R_FIRST_OUT] == 0:
                regs[R_FIRST_OUT] = cyc
            regs[R_LAST_OUT] = cyc
            regs[R_OUT_IDX] = i
            regs[R_OUT_VAL] = q_val[slot]

        if regs[R_STALL_LEFT] > 0:
            regs[R_STALL_LEFT] -= 1
            regs[R_STALLS] += 1
            return 0

        p = regs[R_POS]
        hw = params[P_H] * params[P_IW]
        total_in = params[P_FRAMES] * hw
        consumed = 0
        if p < total_in:
            if not has_pixel:
                return 0
            x = pixel
            consumed = 1
        elif p < params[P_END]:
            x = 0
        else:
            return 0
        advance(params, p, x, cyc, rowbuf, cache, raw, vsel, hsel, frames, mac,
                coefs, delays, arity, nodes, win, vals, q_valid, q_idx, q_val)
        regs[R_POS] = p + 1
        if consumed == 1:
            regs[R_CONSUMED] += 1
            local = p % hw
            if params[P_STALL] > 0 and (local + 1) % params[P_IW] == 0:
                # Row boundary; the frame boundary carries both flush and prime.
                regs[R_STALL_LEFT] = params[P_STALL] * (2 if local == hw - 1 else 1)
        return consumed

    if jit:
        cycle = _backend.njit(cycle)

    def run(params, regs, stream, n_out, rowbuf, cache, raw, vsel, hsel, frames, mac,
            coefs, delays, arity, nodes, win, vals, q_valid, q_idx, q_val, out_val, out_cyc):
        """Clock the pipeline until ``n_out`` results have been emitted."""
        total_in = stream.shape[0]
        while regs[R_EMITTED] < n_out:
            p = regs[R_POS]
            has = p < total_in
            px = stream[p] if has else 0
            cycle(params, regs, px, has, rowbuf, cache, raw, vsel, hsel, frames, mac,
                  coefs, delays, arity, nodes, win, vals, q_valid, q_idx, q_val,
                  out_val, out_cyc)

    if jit:
        run = _backend.njit(run)
    return cycle, run


def make_engine(backend=None):
    """``(cycle, run)`` for ``backend`` ('numba' or 'numpy'); built once per backend."""
    return _engine_for(backend or _backend.BACKEND)


@functools.lru_cache(maxsize=None)
def _engine_for(backend):
    if backend == "numba":
        return _make_engine(_shift_in_loop, _window_loop, _wrap_window_loop,
                            _tree_sum_loop, _mac_step_loop, jit=True)
    return _make_engine(_shift_in_np, _window_np, _wrap_window_np,
                        _tree_sum_np, _mac_step_np, jit=False)


cycle, run = make_engine()

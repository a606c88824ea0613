"""Optional compiled HLT engine.

The pure-Python enumerator in coset_enum is the reference implementation;
this module mirrors its HLT-with-lookahead strategy step for step on int32
numpy arrays under numba, so a completed run produces the identical table,
index and definition count, only faster.  Everything degrades gracefully:
when numba is unavailable HAS_NUMBA is False and callers stay on the pure
engine.

The kernel runs in definition-budget slices so the wrapper can honor wall
clock limits, report progress, grow the table geometrically and drive the
lookahead/compaction recovery exactly like the reference engine.
"""

from __future__ import annotations

import time
from array import array
from typing import Callable, Optional

try:
    import numba
    import numpy as np

    HAS_NUMBA = True
except ImportError:                              # pragma: no cover
    HAS_NUMBA = False

# state vector indices
_NCOSETS, _LIVE, _ALPHA, _DEFINED, _PEAK_LIVE, _PHASE, _CAP = range(7)

if HAS_NUMBA:
    _njit = numba.njit(cache=True, nogil=True)

    @_njit
    def _rep(p, k):
        r = k
        while p[r] != r:
            r = p[r]
        while p[k] != r:
            nxt = p[k]
            p[k] = r
            k = nxt
        return r

    @_njit
    def _coincide(tab, p, w, a, b, queue, state):
        qn = 0
        ra = _rep(p, a)
        rb = _rep(p, b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            p[rb] = ra
            state[_LIVE] -= 1
            queue[qn] = rb
            qn += 1
        qi = 0
        while qi < qn:
            gamma = queue[qi]
            qi += 1
            row = gamma * w
            for x in range(w):
                delta = tab[row + x]
                if delta < 0:
                    continue
                tab[delta * w + (x ^ 1)] = -1
                mu = _rep(p, gamma)
                nu = _rep(p, delta)
                tmu = tab[mu * w + x]
                if tmu >= 0:
                    r1 = _rep(p, nu)
                    r2 = _rep(p, tmu)
                    if r1 != r2:
                        if r2 < r1:
                            r1, r2 = r2, r1
                        p[r2] = r1
                        state[_LIVE] -= 1
                        queue[qn] = r2
                        qn += 1
                else:
                    tnu = tab[nu * w + (x ^ 1)]
                    if tnu >= 0:
                        r1 = _rep(p, mu)
                        r2 = _rep(p, tnu)
                        if r1 != r2:
                            if r2 < r1:
                                r1, r2 = r2, r1
                            p[r2] = r1
                            state[_LIVE] -= 1
                            queue[qn] = r2
                            qn += 1
                    else:
                        tab[mu * w + x] = nu
                        tab[nu * w + (x ^ 1)] = mu

    @_njit
    def _define(tab, p, w, alpha, x, state):
        ncosets = state[_NCOSETS]
        if ncosets >= state[_CAP]:
            return -1
        beta = ncosets
        base = beta * w
        for k in range(w):
            tab[base + k] = -1
        p[beta] = beta
        tab[alpha * w + x] = beta
        tab[base + (x ^ 1)] = alpha
        state[_NCOSETS] = ncosets + 1
        state[_LIVE] += 1
        state[_DEFINED] += 1
        if state[_LIVE] > state[_PEAK_LIVE]:
            state[_PEAK_LIVE] = state[_LIVE]
        return beta

    @_njit
    def _scan(tab, p, w, alpha, letters, lo, hi, fill, queue, state):
        """One scan-and-fill; returns 0 on completion, -1 on table full."""
        f = alpha
        b = alpha
        i = lo
        j = hi - 1
        while True:
            while i <= j:
                nxt = tab[f * w + letters[i]]
                if nxt < 0:
                    break
                f = nxt
                i += 1
            if i > j:
                if f != b:
                    _coincide(tab, p, w, f, b, queue, state)
                return 0
            while j >= i:
                nxt = tab[b * w + (letters[j] ^ 1)]
                if nxt < 0:
                    break
                b = nxt
                j -= 1
            if j < i:
                _coincide(tab, p, w, f, b, queue, state)
                return 0
            if j == i:
                tab[f * w + letters[i]] = b
                tab[b * w + (letters[i] ^ 1)] = f
                return 0
            if not fill:
                return 0
            beta = _define(tab, p, w, f, letters[i], state)
            if beta < 0:
                return -1

    @_njit
    def _hlt_slice(tab, p, w, rel_flat, rel_off, sub_flat, sub_off,
                   queue, state, budget):
        """Resumes the HLT main loop; 0 done, 1 table full, 2 budget used."""
        defined_start = state[_DEFINED]
        if state[_PHASE] == 0:
            for s in range(len(sub_off) - 1):
                r = _scan(tab, p, w, 0, sub_flat, sub_off[s], sub_off[s + 1],
                          True, queue, state)
                if r < 0:
                    return 1
            state[_PHASE] = 1
        alpha = state[_ALPHA]
        nrel = len(rel_off) - 1
        while alpha < state[_NCOSETS]:
            if p[alpha] == alpha:
                dead = False
                for ri in range(nrel):
                    r = _scan(tab, p, w, alpha, rel_flat, rel_off[ri],
                              rel_off[ri + 1], True, queue, state)
                    if r < 0:
                        state[_ALPHA] = alpha
                        return 1
                    if p[alpha] != alpha:
                        dead = True
                        break
                if not dead:
                    base = alpha * w
                    for x in range(w):
                        if tab[base + x] < 0:
                            beta = _define(tab, p, w, alpha, x, state)
                            if beta < 0:
                                state[_ALPHA] = alpha
                                return 1
            alpha += 1
            if state[_DEFINED] - defined_start >= budget:
                state[_ALPHA] = alpha
                return 2
        state[_ALPHA] = alpha
        return 0

    @_njit
    def _lookahead(tab, p, w, rel_flat, rel_off, queue, state):
        nrel = len(rel_off) - 1
        for gamma in range(state[_NCOSETS]):
            if p[gamma] != gamma:
                continue
            for ri in range(nrel):
                _scan(tab, p, w, gamma, rel_flat, rel_off[ri],
                      rel_off[ri + 1], False, queue, state)
                if p[gamma] != gamma:
                    break

    @_njit
    def _closing_pass(tab, p, w, rel_flat, rel_off, sub_flat, sub_off,
                      queue, state):
        """Returns 1 when the table is complete and closed, else 0."""
        live_before = state[_LIVE]
        for s in range(len(sub_off) - 1):
            _scan(tab, p, w, 0, sub_flat, sub_off[s], sub_off[s + 1],
                  False, queue, state)
        _lookahead(tab, p, w, rel_flat, rel_off, queue, state)
        if state[_LIVE] != live_before:
            return 0
        for gamma in range(state[_NCOSETS]):
            if p[gamma] != gamma:
                continue
            base = gamma * w
            for x in range(w):
                if tab[base + x] < 0:
                    return 0
        return 1

    @_njit
    def _compact(tab, p, w, mark, state):
        """Dense renumbering; returns (new_tab, new_p, new_mark)."""
        ncosets = state[_NCOSETS]
        cap = state[_CAP]
        newid = np.full(ncosets, -1, np.int32)
        nid = 0
        new_mark = 0
        for old in range(ncosets):
            if p[old] == old:
                newid[old] = nid
                if old < mark:
                    new_mark += 1
                nid += 1
        new_tab = np.empty(cap * w, np.int32)
        pos = 0
        for old in range(ncosets):
            if p[old] != old:
                continue
            base = old * w
            for x in range(w):
                e = tab[base + x]
                new_tab[pos] = -1 if e < 0 else newid[e]
                pos += 1
        new_p = np.empty(cap, np.int32)
        for i in range(nid):
            new_p[i] = i
        state[_NCOSETS] = nid
        state[_LIVE] = nid
        return new_tab, new_p, new_mark


class _FastOverflow(Exception):
    def __init__(self, reason, peak, defined):
        self.reason = reason
        self.peak = peak
        self.defined = defined


def run_hlt(width: int, relators, subgroup, max_cosets: int,
            time_limit_s: Optional[float],
            progress: Optional[Callable[[int, int], None]] = None,
            progress_every: int = 100_000):
    """Drive the compiled kernel; mirrors _Engine.run_hlt exactly.

    Returns (flat_table_as_array_i, live, peak, defined) on completion and
    raises _FastOverflow on resource exhaustion.
    """
    if not HAS_NUMBA:                            # pragma: no cover
        raise RuntimeError("numba is not available")
    w = width
    rel_flat, rel_off = _flatten([r for r in relators if r])
    sub_flat, sub_off = _flatten(subgroup)
    cap = min(max(4096, 2 * width), max_cosets)
    tab = np.full(cap * w, -1, np.int32)
    p = np.empty(cap, np.int32)
    p[0] = 0
    queue = np.empty(cap, np.int32)
    state = np.zeros(8, np.int64)
    state[_NCOSETS] = 1
    state[_LIVE] = 1
    state[_DEFINED] = 1
    state[_PEAK_LIVE] = 1
    state[_CAP] = cap
    deadline = time.monotonic() + time_limit_s if time_limit_s else None
    peak_alloc = 1
    last_progress = 0
    recovering = False

    def grow(new_cap: int):
        nonlocal tab, p, queue, cap
        new_tab = np.empty(new_cap * w, np.int32)
        new_tab[:cap * w] = tab
        new_p = np.empty(new_cap, np.int32)
        new_p[:cap] = p
        tab, p = new_tab, new_p
        queue = np.empty(new_cap, np.int32)
        cap = new_cap
        state[_CAP] = new_cap

    while True:
        code = _hlt_slice(tab, p, w, rel_flat, rel_off, sub_flat, sub_off,
                          queue, state, 250_000)
        peak_alloc = max(peak_alloc, int(state[_NCOSETS]))
        if deadline is not None and time.monotonic() > deadline:
            raise _FastOverflow("time_limit", peak_alloc, int(state[_DEFINED]))
        if progress and int(state[_DEFINED]) - last_progress >= progress_every:
            last_progress = int(state[_DEFINED])
            progress(last_progress, int(state[_LIVE]))
        if code == 2:
            # periodic dead-row compaction, same policy as the pure engine
            nc = int(state[_NCOSETS])
            lv = int(state[_LIVE])
            if nc > 4096 and (nc - lv) > nc * 0.25:
                mark = int(state[_ALPHA]) if state[_PHASE] == 1 else 0
                tab, p, new_mark = _compact(tab, p, w, mark, state)
                if state[_PHASE] == 1:
                    state[_ALPHA] = new_mark
            continue
        if code == 1:
            if cap < max_cosets:
                grow(min(2 * cap, max_cosets))
                continue
            # at the budget: one lookahead pass, compact, then either
            # continue or report overflow (same policy as the pure engine)
            _lookahead(tab, p, w, rel_flat, rel_off, queue, state)
            mark = int(state[_ALPHA]) if state[_PHASE] == 1 else 0
            tab, p, new_mark = _compact(tab, p, w, mark, state)
            queue = np.empty(cap, np.int32)
            if state[_PHASE] == 1:
                state[_ALPHA] = new_mark
            if int(state[_NCOSETS]) >= max_cosets * 0.98:
                raise _FastOverflow("max_cosets", peak_alloc,
                                    int(state[_DEFINED]))
            continue
        # main loop finished: verify closure, else compact and rerun
        if _closing_pass(tab, p, w, rel_flat, rel_off, sub_flat, sub_off,
                         queue, state):
            break
        tab, p, _ = _compact(tab, p, w, 0, state)
        state[_ALPHA] = 0
        state[_PHASE] = 0

    tab, p, _ = _compact(tab, p, w, 0, state)
    live = int(state[_LIVE])
    out = array("i")
    out.frombytes(tab[:live * w].astype(np.int32).tobytes())
    return out, live, max(peak_alloc, live), int(state[_DEFINED])


def _flatten(words):
    flat: list[int] = []
    off = [0]
    for wrd in words:
        flat.extend(wrd)
        off.append(len(flat))
    return (np.asarray(flat, dtype=np.int32),
            np.asarray(off, dtype=np.int64))

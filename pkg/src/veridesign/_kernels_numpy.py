"""Pure-numpy trajectory kernels: the fallback backend.

Vectorized across paths/replications instead of JIT-compiled, but draw for
draw identical to ``_kernels_numba``: path ``k`` consumes draw ``t`` of its
own substream at its ``t``-th step in both backends, so outputs match bit
for bit.
"""

from __future__ import annotations

import numpy as np

from ._rng import stream_origins, uniforms


def _advance(cum, last_idx, states, u):
    rows = cum[states]
    nxt = (rows <= u[:, None]).sum(axis=1)
    return np.minimum(nxt, last_idx[states])


def until_statuses(cum, last_idx, initial, target_mask, avoid_mask, n_paths, max_steps, master):
    statuses = np.zeros(n_paths, dtype=np.int8)
    if target_mask[initial] != 0:
        statuses[:] = 1
        return statuses
    if avoid_mask[initial] != 0:
        statuses[:] = 2
        return statuses
    origins = stream_origins(master, n_paths)
    states = np.full(n_paths, initial, dtype=np.int64)
    active = np.arange(n_paths)
    for t in range(max_steps):
        if active.size == 0:
            break
        u = uniforms(origins[active], t)
        nxt = _advance(cum, last_idx, states[active], u)
        states[active] = nxt
        hit = target_mask[nxt] != 0
        fail = (avoid_mask[nxt] != 0) & ~hit
        statuses[active[hit]] = 1
        statuses[active[fail]] = 2
        active = active[~(hit | fail)]
    return statuses


def next_hits(cum, last_idx, from_state, target_mask, n_draws, master):
    origin = stream_origins(master, 1)[0]
    u = uniforms(origin, np.arange(n_draws))
    row = cum[from_state]
    states = (row[None, :] <= u[:, None]).sum(axis=1)
    states = np.minimum(states, last_idx[from_state])
    return (target_mask[states] != 0).astype(np.int8)


def occupancy_sums(cum, last_idx, initial, state_values, trans_values, horizon, burn_in, n_reps, master):
    sums = np.zeros(n_reps, dtype=np.float64)
    origins = stream_origins(master, n_reps)
    states = np.full(n_reps, initial, dtype=np.int64)
    for t in range(horizon):
        u = uniforms(origins, t)
        nxt = _advance(cum, last_idx, states, u)
        if t >= burn_in:
            sums += state_values[states] + trans_values[states, nxt]
        states = nxt
    return sums


def reward_until_target(cum, last_idx, initial, target_mask, state_values, trans_values,
                        n_paths, max_steps, master):
    totals = np.zeros(n_paths, dtype=np.float64)
    statuses = np.zeros(n_paths, dtype=np.int8)
    if target_mask[initial] != 0:
        statuses[:] = 1
        return totals, statuses
    origins = stream_origins(master, n_paths)
    states = np.full(n_paths, initial, dtype=np.int64)
    active = np.arange(n_paths)
    for t in range(max_steps):
        if active.size == 0:
            break
        u = uniforms(origins[active], t)
        cur = states[active]
        nxt = _advance(cum, last_idx, cur, u)
        totals[active] += state_values[cur] + trans_values[cur, nxt]
        states[active] = nxt
        hit = target_mask[nxt] != 0
        statuses[active[hit]] = 1
        active = active[~hit]
    return totals, statuses

"""Pure-Python event loop for the hybrid allocation simulator.

Used when the compiled ``_ckernel`` extension is unavailable, and by tests
that need the per-event log (``record``).
"""

import heapq

import numpy as np


def simulate_calls(arrival_time, cell, holding, capacity, pool, horizon, record=None):
    """Run every call through fixed channels, then the shared pool, else block.

    Parameters
    ----------
    arrival_time, cell, holding : array_like
        One entry per call, sorted by ``(arrival_time, cell)``.
    capacity : array_like of int
        Fixed channels per cell.
    pool : int
        Size of the dynamic pool.
    horizon : float
        End of the observation window. Departures after it stay in progress.
    record : list, optional
        If given, receives ``(time, kind, cell, fixed_busy, pool_busy)`` after
        every event, ``kind`` being one of ``"fixed"``, ``"dynamic"``,
        ``"blocked"``, ``"depart"``.

    Returns
    -------
    tuple
        ``(offered, blocked, completed, in_progress, dynamic_grants,
        peak_pool, pool_area)``; the first five are int64 arrays per cell,
        ``pool_area`` is the time integral of busy pool channels.
    """
    times = np.asarray(arrival_time, dtype=np.float64).tolist()
    cells = np.asarray(cell, dtype=np.int64).tolist()
    holds = np.asarray(holding, dtype=np.float64).tolist()
    cap = np.asarray(capacity, dtype=np.int64).tolist()
    m = len(cap)

    offered = [0] * m
    blocked = [0] * m
    completed = [0] * m
    grants = [0] * m
    fixed_busy = [0] * m
    dyn_held = [0] * m
    pool_busy = 0
    peak = 0
    area = 0.0
    last_t = 0.0
    # (departure_time, seq, cell, dynamic)
    pending = []

    def depart_until(t):
        nonlocal pool_busy, area, last_t
        while pending and pending[0][0] <= t:
            dt, _, c, dyn = heapq.heappop(pending)
            area += pool_busy * (dt - last_t)
            last_t = dt
            if dyn:
                pool_busy -= 1
                dyn_held[c] -= 1
            else:
                fixed_busy[c] -= 1
            completed[c] += 1
            if record is not None:
                record.append((dt, "depart", c, fixed_busy[c], pool_busy))

    for seq in range(len(times)):
        t = times[seq]
        c = cells[seq]
        depart_until(t)
        area += pool_busy * (t - last_t)
        last_t = t
        offered[c] += 1
        if fixed_busy[c] < cap[c]:
            fixed_busy[c] += 1
            heapq.heappush(pending, (t + holds[seq], seq, c, False))
            kind = "fixed"
        elif pool_busy < pool:
            pool_busy += 1
            dyn_held[c] += 1
            grants[c] += 1
            if pool_busy > peak:
                peak = pool_busy
            heapq.heappush(pending, (t + holds[seq], seq, c, True))
            kind = "dynamic"
        else:
            blocked[c] += 1
            kind = "blocked"
        if record is not None:
            record.append((t, kind, c, fixed_busy[c], pool_busy))

    depart_until(horizon)
    area += pool_busy * (horizon - last_t)

    in_progress = [0] * m
    for _, _, c, _ in pending:
        in_progress[c] += 1
    as_arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    return (
        as_arr(offered),
        as_arr(blocked),
        as_arr(completed),
        as_arr(in_progress),
        as_arr(grants),
        int(peak),
        float(area),
    )

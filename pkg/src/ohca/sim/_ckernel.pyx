# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event loop; same contract and same arithmetic order as _pykernel."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline bint _less(double t1, Py_ssize_t s1, double t2, Py_ssize_t s2) noexcept nogil:
    return t1 < t2 or (t1 == t2 and s1 < s2)


cdef inline void _push(double* ht, Py_ssize_t* hs, Py_ssize_t* size,
                       double t, Py_ssize_t s) noexcept nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(t, s, ht[parent], hs[parent]):
            ht[i] = ht[parent]
            hs[i] = hs[parent]
            i = parent
        else:
            break
    ht[i] = t
    hs[i] = s


cdef inline void _pop(double* ht, Py_ssize_t* hs, Py_ssize_t* size) noexcept nogil:
    cdef Py_ssize_t n = size[0] - 1
    cdef double t = ht[n]
    cdef Py_ssize_t s = hs[n]
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    size[0] = n
    if n == 0:
        return
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(ht[child + 1], hs[child + 1], ht[child], hs[child]):
            child += 1
        if _less(ht[child], hs[child], t, s):
            ht[i] = ht[child]
            hs[i] = hs[child]
            i = child
        else:
            break
    ht[i] = t
    hs[i] = s


def simulate_calls(arrival_time, cell, holding, capacity, long pool, double horizon,
                   record=None):
    if record is not None:
        raise NotImplementedError("event recording is only available in the Python kernel")
    cdef cnp.float64_t[::1] times = np.ascontiguousarray(arrival_time, dtype=np.float64)
    cdef cnp.int64_t[::1] cells = np.ascontiguousarray(cell, dtype=np.int64)
    cdef cnp.float64_t[::1] holds = np.ascontiguousarray(holding, dtype=np.float64)
    cdef cnp.int64_t[::1] cap = np.ascontiguousarray(capacity, dtype=np.int64)
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t m = cap.shape[0]

    offered_a = np.zeros(m, dtype=np.int64)
    blocked_a = np.zeros(m, dtype=np.int64)
    completed_a = np.zeros(m, dtype=np.int64)
    grants_a = np.zeros(m, dtype=np.int64)
    in_progress_a = np.zeros(m, dtype=np.int64)
    fixed_busy_a = np.zeros(m, dtype=np.int64)
    dynamic_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.int64_t[::1] offered = offered_a
    cdef cnp.int64_t[::1] blocked = blocked_a
    cdef cnp.int64_t[::1] completed = completed_a
    cdef cnp.int64_t[::1] grants = grants_a
    cdef cnp.int64_t[::1] in_progress = in_progress_a
    cdef cnp.int64_t[::1] fixed_busy = fixed_busy_a
    cdef cnp.uint8_t[::1] dynamic = dynamic_a

    cdef double* ht = <double*> malloc((n + 1) * sizeof(double))
    cdef Py_ssize_t* hs = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    if ht == NULL or hs == NULL:
        free(ht)
        free(hs)
        raise MemoryError()

    cdef Py_ssize_t size = 0
    cdef long pool_busy = 0
    cdef long peak = 0
    cdef double area = 0.0
    cdef double last_t = 0.0
    cdef double t, dt
    cdef Py_ssize_t seq, s, c, i

    try:
        with nogil:
            for seq in range(n):
                t = times[seq]
                c = cells[seq]
                while size > 0 and ht[0] <= t:
                    dt = ht[0]
                    s = hs[0]
                    _pop(ht, hs, &size)
                    area += pool_busy * (dt - last_t)
                    last_t = dt
                    if dynamic[s]:
                        pool_busy -= 1
                    else:
                        fixed_busy[cells[s]] -= 1
                    completed[cells[s]] += 1
                area += pool_busy * (t - last_t)
                last_t = t
                offered[c] += 1
                if fixed_busy[c] < cap[c]:
                    fixed_busy[c] += 1
                    _push(ht, hs, &size, t + holds[seq], seq)
                elif pool_busy < pool:
                    pool_busy += 1
                    grants[c] += 1
                    dynamic[seq] = 1
                    if pool_busy > peak:
                        peak = pool_busy
                    _push(ht, hs, &size, t + holds[seq], seq)
                else:
                    blocked[c] += 1

            while size > 0 and ht[0] <= horizon:
                dt = ht[0]
                s = hs[0]
                _pop(ht, hs, &size)
                area += pool_busy * (dt - last_t)
                last_t = dt
                if dynamic[s]:
                    pool_busy -= 1
                else:
                    fixed_busy[cells[s]] -= 1
                completed[cells[s]] += 1
            area += pool_busy * (horizon - last_t)

            for i in range(size):
                in_progress[cells[hs[i]]] += 1
    finally:
        free(ht)
        free(hs)

    return (offered_a, blocked_a, completed_a, in_progress_a, grants_a,
            int(peak), float(area))

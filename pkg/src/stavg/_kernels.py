"""Compiled inner loops.

All kernels work on int64 residues and require p < 2**30 so that every
intermediate product fits in a signed 64-bit integer.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_KERNEL_PRIME = 1 << 30

# bsgs status codes
BSGS_OK = 1
BSGS_AMBIGUOUS = 0


@njit(cache=True, nogil=True)
def jacobi_nb(a, n):
    a = a % n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a = a % n
    if n == 1:
        return result
    return 0


@njit(cache=True, nogil=True)
def kronecker_nb(a, n):
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        if a % 2 == 0:
            return 0
        n //= 2
        r = a % 8
        if r == 3 or r == 5:
            result = -result
    if n == 1:
        return result
    return result * jacobi_nb(a, n)


@njit(cache=True, nogil=True)
def kronecker_period(d):
    """chi_d(n) for 0 <= n < |d|; for a discriminant d this is one full period."""
    q = -d if d < 0 else d
    out = np.zeros(q, dtype=np.int8)
    for n in range(1, q):
        out[n] = kronecker_nb(d, n)
    return out


@njit(cache=True, nogil=True)
def fnv1a64(data):
    h = np.uint64(14695981039346656037)
    prime = np.uint64(1099511628211)
    for i in range(data.shape[0]):
        h = (h ^ np.uint64(data[i])) * prime
    return h


# ---------------------------------------------------------------------------
# Naive traces
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _naive_one(a, b, p, chi):
    s = 0
    for x in range(p):
        v = (x * x % p * x + a * x + b) % p
        s += chi[v]
    return -s


@njit(cache=True, nogil=True)
def _euler_chi(v, p):
    if v == 0:
        return 0
    t = _powmod(v, (p - 1) // 2, p)
    return 1 if t == 1 else -1


@njit(cache=True, nogil=True)
def _naive_no_table(a, b, p):
    s = 0
    for x in range(p):
        v = (x * x % p * x + a * x + b) % p
        s += _euler_chi(v, p)
    return -s


@njit(cache=True, nogil=True)
def naive_traces(a_arr, b_arr, p, chi):
    out = np.empty(a_arr.shape[0], dtype=np.int64)
    for i in range(a_arr.shape[0]):
        out[i] = _naive_one(a_arr[i] % p, b_arr[i] % p, p, chi)
    return out


@njit(cache=True, nogil=True)
def trace_table(p, chi):
    """lambda(a, b) for every residue pair; singular pairs are not flagged."""
    out = np.empty((p, p), dtype=np.int64)
    cnt = np.zeros(p, dtype=np.int64)
    for a in range(p):
        cnt[:] = 0
        for x in range(p):
            cnt[(x * x % p * x + a * x) % p] += 1
        for b in range(p):
            s = 0
            for v in range(p):
                c = cnt[v]
                if c != 0:
                    w = v + b
                    if w >= p:
                        w -= p
                    s += c * chi[w]
            out[a, b] = -s
    return out


# ---------------------------------------------------------------------------
# Baby-step giant-step
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _powmod(b, e, m):
    r = 1
    b = b % m
    while e > 0:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@njit(cache=True, nogil=True)
def _inv(a, p):
    t, nt, r, nr = 0, 1, p, a % p
    while nr != 0:
        q = r // nr
        t, nt = nt, t - q * nt
        r, nr = nr, r - q * nr
    return t % p


@njit(cache=True, nogil=True)
def _add(x1, y1, z1, x2, y2, z2, a, p):
    # z == 1 marks the point at infinity
    if z1 == 1:
        return x2, y2, z2
    if z2 == 1:
        return x1, y1, z1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return 0, 0, 1
        lam = (3 * x1 % p * x1 + a) % p * _inv(2 * y1 % p, p) % p
    else:
        lam = (y2 - y1) % p * _inv((x2 - x1) % p, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * ((x1 - x3) % p) - y1) % p
    return x3, y3, 0


@njit(cache=True, nogil=True)
def _mul(k, x, y, z, a, p):
    rx, ry, rz = 0, 0, 1
    while k > 0:
        if k & 1:
            rx, ry, rz = _add(rx, ry, rz, x, y, z, a, p)
        x, y, z = _add(x, y, z, x, y, z, a, p)
        k >>= 1
    return rx, ry, rz


@njit(cache=True, nogil=True)
def _annihilators(x0, y0, a, p, lo, hi, found):
    """Mark found[m - lo] for every m in [lo, hi] with m * P = O."""
    width = hi - lo + 1
    s = 1
    while s * s < width:
        s += 1
    s += 1
    nb = 2 * s + 1
    bx = np.empty(s + 1, dtype=np.int64)
    by = np.empty(s + 1, dtype=np.int64)
    cx, cy, cz = x0, y0, 0
    order = 0
    for j in range(1, nb + 1):
        if cz == 1:
            order = j
            break
        if j <= s:
            bx[j] = cx
            by[j] = cy
        cx, cy, cz = _add(cx, cy, cz, x0, y0, 0, a, p)
    if order > 0:
        for m in range(lo, hi + 1):
            found[m - lo] = m % order == 0
        return
    step = 2 * s + 1
    gx, gy, gz = _mul(step, x0, y0, 0, a, p)
    rx, ry, rz = _mul(lo, x0, y0, 0, a, p)
    base = lo
    while base - s <= hi:
        if rz == 1:
            if lo <= base <= hi:
                found[base - lo] = True
        else:
            for j in range(1, s + 1):
                if bx[j] == rx:
                    m = base - j if by[j] == ry else base + j
                    if lo <= m <= hi:
                        found[m - lo] = True
                    break
        rx, ry, rz = _add(rx, ry, rz, gx, gy, gz, a, p)
        base += step


@njit(cache=True, nogil=True)
def bsgs_trace(a, b, p, max_points):
    """Frobenius trace of y^2 = x^3 + a x + b over F_p by group-order search.

    Points are taken on the curve or its quadratic twist without square
    roots: for c = f(x0) != 0 the point (x0 c, c^2) lies on
    y^2 = x^3 + a c^2 x + b c^3, whose trace is (c|p) * lambda. Candidate
    traces are intersected over successive points until one remains.
    Returns (lambda, BSGS_OK) or (0, BSGS_AMBIGUOUS).
    """
    a = a % p
    b = b % p
    w = int(np.sqrt(4.0 * p))
    while w * w > 4 * p:
        w -= 1
    while (w + 1) * (w + 1) <= 4 * p:
        w += 1
    lo = p + 1 - w
    hi = p + 1 + w
    cand = np.ones(2 * w + 1, dtype=np.bool_)
    found = np.zeros(2 * w + 1, dtype=np.bool_)
    used = 0
    for x0 in range(p):
        c = (x0 * x0 % p * x0 + a * x0 + b) % p
        if c == 0:
            continue
        sgn = _euler_chi(c, p)
        ac = a * c % p * c % p
        px = x0 * c % p
        py = c * c % p
        found[:] = False
        _annihilators(px, py, ac, p, lo, hi, found)
        left = 0
        last = 0
        for idx in range(2 * w + 1):
            if cand[idx]:
                lam = idx - w
                m = p + 1 - sgn * lam
                if not found[m - lo]:
                    cand[idx] = False
                else:
                    left += 1
                    last = lam
        if left == 1:
            return last, BSGS_OK
        used += 1
        if used >= max_points or left == 0:
            break
    return 0, BSGS_AMBIGUOUS


@njit(cache=True, nogil=True)
def curve_traces(a, b, primes, chi_pack, chi_off, naive_below, max_points):
    """Traces of one curve at every prime of ``primes``.

    Returns (lambda, good) arrays. A prime is good when p >= 3 and
    p does not divide 4a^3 + 27b^2. Primes below ``naive_below`` use the
    packed residue tables (``chi_pack[chi_off[i]:chi_off[i] + p]``); the
    rest use baby-step giant-step, falling back to a table-free naive sum
    when the group order stays ambiguous.
    """
    n = primes.shape[0]
    lam = np.zeros(n, dtype=np.int64)
    good = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        p = primes[i]
        if p < 3:
            continue
        ar = a % p
        br = b % p
        disc = (4 * (ar * ar % p) % p * ar + 27 * (br * br % p)) % p
        if disc == 0:
            continue
        good[i] = True
        if p < naive_below:
            lam[i] = _naive_one(ar, br, p, chi_pack[chi_off[i] : chi_off[i] + p])
        else:
            t, status = bsgs_trace(ar, br, p, max_points)
            if status == BSGS_OK:
                lam[i] = t
            else:
                lam[i] = _naive_no_table(ar, br, p)
    return lam, good


@njit(cache=True, nogil=True)
def window_hits(a_arr, b_arr, primes, r_lo, r_hi, chi_pack, chi_off,
                naive_below, max_points):
    """hits[c, i] is True when curve c has good reduction at primes[i] and its
    trace lies in [r_lo[i], r_hi[i]]."""
    nc = a_arr.shape[0]
    n = primes.shape[0]
    hits = np.zeros((nc, n), dtype=np.bool_)
    for c in range(nc):
        lam, good = curve_traces(a_arr[c], b_arr[c], primes, chi_pack, chi_off,
                                 naive_below, max_points)
        for i in range(n):
            if good[i] and r_lo[i] <= lam[i] and lam[i] <= r_hi[i]:
                hits[c, i] = True
    return hits

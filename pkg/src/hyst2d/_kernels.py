"""Hot loops of the ensemble: grid drive and transition-surface sweep.

Both kernels ship as a numba-compiled version and a pure numpy twin that
computes the identical result.  The numba path is used when the package can
import numba and the environment variable ``HYST2D_NO_NUMBA`` is not ``1``;
callers can also force a backend per call (the benchmark does).

Return-code convention for the compiled drive kernel: ``n_events >= 0`` on
success, ``-1`` when an input sample lands outside both region closures of
some cell (the wrapper raises), ``-2`` when the preallocated event buffer is
full (the wrapper doubles it and retries).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import AdmissibilityViolation

HAVE_NUMBA = False
if os.environ.get("HYST2D_NO_NUMBA", "") != "1":
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        HAVE_NUMBA = False


def active_backend(override: str | None = None) -> str:
    if override is not None:
        if override not in ("numpy", "numba"):
            raise ValueError(f"unknown backend {override!r}")
        if override == "numba" and not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return override
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# grid drive


def _drive_numpy(t, k0, k1, c0, c1, xi, w):
    n = len(t)
    out0 = k0[0] >= c0
    out1 = k1[0] >= c1
    both = out0 & out1
    if both.any():
        j = int(np.argmax(both))
        raise AdmissibilityViolation(
            f"cell {j} has the start point outside both region closures"
        )
    state = np.where(out0, 1, np.where(out1, 0, xi)).astype(np.int8)
    H = np.empty(n)
    H[0] = w @ state
    ev_cell, ev_time, ev_val = [], [], []
    for i in range(n - 1):
        a0 = k0[i + 1] >= c0
        a1 = k1[i + 1] >= c1
        viol = a0 & a1
        if viol.any():
            j = int(np.argmax(viol))
            raise AdmissibilityViolation(
                f"cell {j} is outside both region closures at t={t[i + 1]:.9g}"
            )
        up = (state == 0) & a0
        dn = (state == 1) & a1
        if up.any() or dn.any():
            dt = t[i + 1] - t[i]
            iu = np.flatnonzero(up)
            idn = np.flatnonzero(dn)
            rise0 = k0[i + 1] - k0[i]
            rise1 = k1[i + 1] - k1[i]
            te_u = (t[i] + (c0[iu] - k0[i]) / rise0 * dt if rise0 > 0
                    else np.full(len(iu), t[i]))
            te_d = (t[i] + (c1[idn] - k1[i]) / rise1 * dt if rise1 > 0
                    else np.full(len(idn), t[i]))
            jj = np.concatenate([iu, idn])
            te = np.clip(np.concatenate([te_u, te_d]), t[i], t[i + 1])
            vv = np.concatenate([np.ones(len(iu), np.int8), np.zeros(len(idn), np.int8)])
            order = np.argsort(jj, kind="stable")
            ev_cell.append(jj[order])
            ev_time.append(te[order])
            ev_val.append(vv[order])
            state[up] = 1
            state[dn] = 0
        H[i + 1] = w @ state
    if ev_cell:
        return (state, H, np.concatenate(ev_cell), np.concatenate(ev_time),
                np.concatenate(ev_val))
    return (state, H, np.empty(0, np.int64), np.empty(0), np.empty(0, np.int8))


if HAVE_NUMBA:

    @njit(cache=True)
    def _drive_numba(t, k0, k1, c0, c1, xi, w, ev_cell, ev_time, ev_val):
        n = t.shape[0]
        m = c0.shape[0]
        state = np.empty(m, np.int8)
        H = np.empty(n)
        acc = 0.0
        for j in range(m):
            o0 = k0[0] >= c0[j]
            o1 = k1[0] >= c1[j]
            if o0 and o1:
                return state, H, -1, 0, j
            if o0:
                state[j] = 1
            elif o1:
                state[j] = 0
            else:
                state[j] = xi[j]
            acc += w[j] * state[j]
        H[0] = acc
        ne = 0
        cap = ev_cell.shape[0]
        for i in range(n - 1):
            dt = t[i + 1] - t[i]
            rise0 = k0[i + 1] - k0[i]
            rise1 = k1[i + 1] - k1[i]
            for j in range(m):
                a0 = k0[i + 1] >= c0[j]
                a1 = k1[i + 1] >= c1[j]
                if a0 and a1:
                    return state, H, -1, i + 1, j
                if state[j] == 0 and a0:
                    if ne >= cap:
                        return state, H, -2, i, 0
                    te = t[i] if rise0 <= 0 else t[i] + (c0[j] - k0[i]) / rise0 * dt
                    if te < t[i]:
                        te = t[i]
                    elif te > t[i + 1]:
                        te = t[i + 1]
                    ev_cell[ne] = j
                    ev_time[ne] = te
                    ev_val[ne] = 1
                    ne += 1
                    state[j] = 1
                elif state[j] == 1 and a1:
                    if ne >= cap:
                        return state, H, -2, i, 0
                    te = t[i] if rise1 <= 0 else t[i] + (c1[j] - k1[i]) / rise1 * dt
                    if te < t[i]:
                        te = t[i]
                    elif te > t[i + 1]:
                        te = t[i + 1]
                    ev_cell[ne] = j
                    ev_time[ne] = te
                    ev_val[ne] = 0
                    ne += 1
                    state[j] = 0
            acc = 0.0
            for j in range(m):
                acc += w[j] * state[j]
            H[i + 1] = acc
        return state, H, ne, 0, 0


def drive_grid(t, k0, k1, c0, c1, xi, w, backend: str | None = None):
    """Run every relay cell along sampled channel traces.

    Returns ``(final_state, H, ev_cell, ev_time, ev_val)`` where ``H`` holds
    the weighted ensemble output at each sample time and the ``ev_*`` arrays
    list switching events in (segment, cell index) order.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    k0 = np.ascontiguousarray(k0, dtype=np.float64)
    k1 = np.ascontiguousarray(k1, dtype=np.float64)
    c0 = np.ascontiguousarray(c0, dtype=np.float64)
    c1 = np.ascontiguousarray(c1, dtype=np.float64)
    xi = np.ascontiguousarray(xi, dtype=np.int8)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if active_backend(backend) == "numpy":
        return _drive_numpy(t, k0, k1, c0, c1, xi, w)
    cap = max(1024, 4 * len(t))
    while True:
        ev_cell = np.empty(cap, np.int64)
        ev_time = np.empty(cap, np.float64)
        ev_val = np.empty(cap, np.int8)
        state, H, ne, ei, ej = _drive_numba(t, k0, k1, c0, c1, xi, w,
                                            ev_cell, ev_time, ev_val)
        if ne == -2:
            cap *= 4
            continue
        if ne == -1:
            if ei == 0:
                raise AdmissibilityViolation(
                    f"cell {ej} has the start point outside both region closures"
                )
            raise AdmissibilityViolation(
                f"cell {ej} is outside both region closures at t={t[ei]:.9g}"
            )
        return state, H, ev_cell[:ne], ev_time[:ne], ev_val[:ne]


# ---------------------------------------------------------------------------
# transition-surface sweep


def _psi_corner_indices(K0, K1, c0, c1, eps0, eps1):
    """Corner grid indices of each cell's contribution rectangle.

    A cell threshold within ``eps`` of a node value counts as reached, so
    both corners of a finite-difference window that straddle the same tie
    resolve it the same way; otherwise float rounding could admit a whole
    row of cells into one corner sum and not the other.
    """
    a_star = np.searchsorted(K0, c0 - eps0, side="left")
    rev = K1[::-1]
    count = len(K1) - np.searchsorted(rev, c1 - eps1, side="left")
    b_star = count - 1
    return a_star, b_star


def _psi_numpy(K0, K1, c0, c1, wa, eps0, eps1):
    n0, n1 = len(K0), len(K1)
    a_star, b_star = _psi_corner_indices(K0, K1, c0, c1, eps0, eps1)
    keep = (a_star < n0) & (b_star >= 0)
    E = np.zeros((n0, n1))
    np.add.at(E, (a_star[keep], b_star[keep]), wa[keep])
    out = np.cumsum(E, axis=0)
    out = np.cumsum(out[:, ::-1], axis=1)[:, ::-1]
    return np.ascontiguousarray(out)


if HAVE_NUMBA:

    @njit(cache=True)
    def _psi_numba(K0, K1, c0, c1, wa, eps0, eps1):
        n0 = K0.shape[0]
        n1 = K1.shape[0]
        m = c0.shape[0]
        E = np.zeros((n0, n1))
        for j in range(m):
            # first a with K0[a] >= c0[j] - eps0 (tie counts as reached)
            t0 = c0[j] - eps0
            lo, hi = 0, n0
            while lo < hi:
                mid = (lo + hi) // 2
                if K0[mid] < t0:
                    lo = mid + 1
                else:
                    hi = mid
            a = lo
            # number of leading K1 entries >= c1[j] - eps1 (K1 is descending)
            t1 = c1[j] - eps1
            lo, hi = 0, n1
            while lo < hi:
                mid = (lo + hi) // 2
                if K1[mid] >= t1:
                    lo = mid + 1
                else:
                    hi = mid
            b = lo - 1
            if a < n0 and b >= 0:
                E[a, b] += wa[j]
        for bb in range(n1):
            for aa in range(1, n0):
                E[aa, bb] += E[aa - 1, bb]
        for aa in range(n0):
            for bb in range(n1 - 2, -1, -1):
                E[aa, bb] += E[aa, bb + 1]
        return E


def _psi_frac_numpy(K0, K1, c0, c1, wa, half0, half1):
    # Each axis fraction is a clipped ramp, i.e. a difference of two hinge
    # terms max(K - edge, 0) / (2 * half).  The product over both axes
    # expands into four signed corner sums, each separable into dominance
    # cumsums of w, w*e0, w*e1 and w*e0*e1.
    n0, n1 = len(K0), len(K1)
    rev = K1[::-1]
    FA = np.zeros((n0, n1))
    FB = np.zeros((n0, n1))
    FC = np.zeros((n0, n1))
    FD = np.zeros((n0, n1))
    for sgn0, e0 in ((1.0, c0 - half0), (-1.0, c0 + half0)):
        a_star = np.searchsorted(K0, e0, side="left")
        for sgn1, e1 in ((1.0, c1 - half1), (-1.0, c1 + half1)):
            b_star = n1 - np.searchsorted(rev, e1, side="left") - 1
            keep = (a_star < n0) & (b_star >= 0)
            ak = a_star[keep]
            bk = b_star[keep]
            w = (sgn0 * sgn1) * wa[keep]
            e0k = e0[keep]
            e1k = e1[keep]
            np.add.at(FA, (ak, bk), w)
            np.add.at(FB, (ak, bk), w * e0k)
            np.add.at(FC, (ak, bk), w * e1k)
            np.add.at(FD, (ak, bk), w * e0k * e1k)
    for F in (FA, FB, FC, FD):
        np.cumsum(F, axis=0, out=F)
        F[:, :] = np.cumsum(F[:, ::-1], axis=1)[:, ::-1]
    out = np.outer(K0, K1) * FA - K0[:, None] * FC - K1[None, :] * FB + FD
    out /= (2.0 * half0) * (2.0 * half1)
    return np.ascontiguousarray(out)


if HAVE_NUMBA:

    @njit(cache=True)
    def _psi_frac_numba(K0, K1, c0, c1, wa, half0, half1):
        n0 = K0.shape[0]
        n1 = K1.shape[0]
        m = c0.shape[0]
        FA = np.zeros((n0, n1))
        FB = np.zeros((n0, n1))
        FC = np.zeros((n0, n1))
        FD = np.zeros((n0, n1))
        for j in range(m):
            for corner in range(4):
                if corner == 0:
                    e0 = c0[j] - half0
                    e1 = c1[j] - half1
                    sgn = 1.0
                elif corner == 1:
                    e0 = c0[j] - half0
                    e1 = c1[j] + half1
                    sgn = -1.0
                elif corner == 2:
                    e0 = c0[j] + half0
                    e1 = c1[j] - half1
                    sgn = -1.0
                else:
                    e0 = c0[j] + half0
                    e1 = c1[j] + half1
                    sgn = 1.0
                # first a with K0[a] >= e0; below it the hinge is zero
                lo, hi = 0, n0
                while lo < hi:
                    mid = (lo + hi) // 2
                    if K0[mid] < e0:
                        lo = mid + 1
                    else:
                        hi = mid
                a = lo
                # number of leading K1 entries >= e1 (K1 is descending)
                lo, hi = 0, n1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if K1[mid] >= e1:
                        lo = mid + 1
                    else:
                        hi = mid
                b = lo - 1
                if a < n0 and b >= 0:
                    w = sgn * wa[j]
                    FA[a, b] += w
                    FB[a, b] += w * e0
                    FC[a, b] += w * e1
                    FD[a, b] += w * e0 * e1
        for bb in range(n1):
            for aa in range(1, n0):
                FA[aa, bb] += FA[aa - 1, bb]
                FB[aa, bb] += FB[aa - 1, bb]
                FC[aa, bb] += FC[aa - 1, bb]
                FD[aa, bb] += FD[aa - 1, bb]
        for aa in range(n0):
            for bb in range(n1 - 2, -1, -1):
                FA[aa, bb] += FA[aa, bb + 1]
                FB[aa, bb] += FB[aa, bb + 1]
                FC[aa, bb] += FC[aa, bb + 1]
                FD[aa, bb] += FD[aa, bb + 1]
        out = np.empty((n0, n1))
        inv = 1.0 / ((2.0 * half0) * (2.0 * half1))
        for aa in range(n0):
            for bb in range(n1):
                out[aa, bb] = (K0[aa] * K1[bb] * FA[aa, bb]
                               - K0[aa] * FC[aa, bb]
                               - K1[bb] * FB[aa, bb]
                               + FD[aa, bb]) * inv
        return out


def psi_sweep(K0, K1, c0, c1, wa, backend: str | None = None,
              half0: float = 0.0, half1: float = 0.0):
    """Transition surface on a node lattice from rise-fall two-leg drives.

    ``K0[a]`` is the family-0 channel value at the upper reversal node and
    ``K1[b]`` the family-1 channel value at the lower stop node.  A cell
    switches on during the rise iff ``c0 <= K0[a]`` and back off during the
    fall iff additionally ``c1 <= K1[b]``; the surface sums ``wa`` over that
    rectangle of cells, which the kernels accumulate corner-wise.

    Requires ``K0`` ascending and ``K1`` descending (strict transversality).
    A threshold within float-noise distance of a node counts as reached,
    mirroring the drive rule that touching a switching curve switches.

    With positive ``half0``/``half1`` each cell is treated as a rectangle
    of that half-extent in threshold space instead of a point, and a node
    accrues the fraction of the rectangle it covers.  That is the exact
    continuum surface for piecewise-constant cell weights; it agrees with
    the point rule whenever nodes line up with cell edges, and between
    edges it replaces the point rule's staircase with its exact smoothing,
    which finite-difference consumers need.  Pass the halves together or
    not at all.
    """
    K0 = np.ascontiguousarray(K0, dtype=np.float64)
    K1 = np.ascontiguousarray(K1, dtype=np.float64)
    c0 = np.ascontiguousarray(c0, dtype=np.float64)
    c1 = np.ascontiguousarray(c1, dtype=np.float64)
    wa = np.ascontiguousarray(wa, dtype=np.float64)
    if np.any(np.diff(K0) <= 0) or np.any(np.diff(K1) >= 0):
        raise ValueError("node channel values must be strictly ordered")
    if half0 < 0.0 or half1 < 0.0:
        raise ValueError("cell half-extents must be non-negative")
    if (half0 > 0.0) != (half1 > 0.0):
        raise ValueError(
            "cell half-extents must be positive on both axes or zero on both"
        )
    use_numpy = active_backend(backend) == "numpy"
    if half0 > 0.0:
        if use_numpy:
            return _psi_frac_numpy(K0, K1, c0, c1, wa, half0, half1)
        return _psi_frac_numba(K0, K1, c0, c1, wa, half0, half1)
    eps0 = 1e-9 * (1.0 + float(np.max(np.abs(K0))))
    eps1 = 1e-9 * (1.0 + float(np.max(np.abs(K1))))
    if use_numpy:
        return _psi_numpy(K0, K1, c0, c1, wa, eps0, eps1)
    return _psi_numba(K0, K1, c0, c1, wa, eps0, eps1)

"""Bounded-variation diagnostics for relay switching under planar inputs.

The relay output is a binary step function, so its total variation is the
switch count.  Two a-priori bounds tie that count to the input: a rate bound
through the inverse modulus of continuity (how quickly the input can move a
curve-gap distance) and an amplitude bound through the input's arc length
divided by the curve gap.  A randomized probe checks that no admissible
binary trajectory along the same input switches less often than the relay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .foliation import FoliationPair, ParamPair
from .relay import RelayState, initial_relay_value, trace_exit, trace_threshold
from .signal import Signal2D, k_signals


# ---------------------------------------------------------------------------
# inverse modulus of continuity


def _pair_reach_sq(u: Signal2D, i: np.ndarray, j: np.ndarray, r: float) -> np.ndarray:
    """Exact max of |u(s)-u(s')|^2 over segment pairs subject to |s-s'| <= r.

    The squared distance is convex in the two segment parameters, so the max
    over the clipped square sits at a vertex: a square corner or a crossing
    of the band edge s'-s = +-r with a square edge.
    """
    t, xy = u.t, u.xy
    ta, tb = t[i], t[i + 1]
    sa, sb = t[j], t[j + 1]
    pa, da = xy[i], xy[i + 1] - xy[i]
    qa, db = xy[j], xy[j + 1] - xy[j]
    dti = (tb - ta)[:, None]
    dtj = (sb - sa)[:, None]
    base_dt = (sa - ta)[:, None]

    lam_c = np.array([0.0, 0.0, 1.0, 1.0])
    mu_c = np.array([0.0, 1.0, 0.0, 1.0])
    lam = [np.broadcast_to(lam_c, (len(i), 4))]
    mu = [np.broadcast_to(mu_c, (len(i), 4))]
    # band edges dt(lam, mu) = base + mu*dtj - lam*dti = +-r crossing the
    # four square edges
    for sign in (r, -r):
        # lam fixed at 0 / 1, solve for mu
        for lv in (0.0, 1.0):
            m = (sign - base_dt + lv * dti) / dtj
            lam.append(np.full_like(m, lv))
            mu.append(m)
        # mu fixed at 0 / 1, solve for lam
        for mv in (0.0, 1.0):
            l = (base_dt + mv * dtj - sign) / dti
            lam.append(l)
            mu.append(np.full_like(l, mv))
    L = np.concatenate(lam, axis=1)
    M = np.concatenate(mu, axis=1)
    ok = (L >= 0.0) & (L <= 1.0) & (M >= 0.0) & (M <= 1.0)
    dt = base_dt + M * dtj - L * dti
    ok &= np.abs(dt) <= r * (1.0 + 1e-12) + 1e-15
    dx = (qa[:, None, 0] + M * db[:, None, 0]) - (pa[:, None, 0] + L * da[:, None, 0])
    dy = (qa[:, None, 1] + M * db[:, None, 1]) - (pa[:, None, 1] + L * da[:, None, 1])
    d2 = dx * dx + dy * dy
    d2[~ok] = -np.inf
    return d2.max(axis=1)


class _ReachEvaluator:
    """reach(r): the largest input displacement over any time window <= r."""

    def __init__(self, u: Signal2D):
        self.u = u
        m = len(u.t) - 1
        ii, jj = np.triu_indices(m)
        # minimal time separation between the two segments
        gap = u.t[jj] - u.t[ii + 1]
        gap[ii == jj] = 0.0
        gap = np.maximum(gap, 0.0)
        # unconstrained max distance (attained at segment endpoints)
        best = np.zeros(len(ii))
        for a in (ii, ii + 1):
            for b in (jj, jj + 1):
                d = np.hypot(u.xy[a, 0] - u.xy[b, 0], u.xy[a, 1] - u.xy[b, 1])
                best = np.maximum(best, d)
        self.ii, self.jj = ii, jj
        self.gap = gap
        self.dmax = best

    def global_max(self) -> float:
        return float(self.dmax.max())

    def reach(self, r: float) -> float:
        cand = self.gap <= r
        if not cand.any():
            return 0.0
        d2 = _pair_reach_sq(self.u, self.ii[cand], self.jj[cand], r)
        return float(np.sqrt(max(d2.max(), 0.0)))


def inverse_modulus(u: Signal2D, delta: float, grid_points: int = 1000,
                    refinements: int = 20) -> float:
    """Shortest time window over which the input moves at least ``delta``.

    Searches the window length on a coarse grid over [0, T] and refines the
    bracketing cell by bisection; each probe evaluates the exact polyline
    reach, so the only error left is the final bracket width.  When the
    input never moves ``delta`` at all the span T is returned.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    ev = _ReachEvaluator(u)
    T = float(u.t[-1] - u.t[0])
    if ev.global_max() < delta:
        return T
    grid = np.linspace(0.0, T, grid_points + 1)
    # reach is nondecreasing in r: binary search the first grid point at
    # which delta is attainable
    lo_i, hi_i = 0, grid_points
    if ev.reach(grid[0]) >= delta:
        return 0.0
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if ev.reach(grid[mid]) >= delta:
            hi_i = mid
        else:
            lo_i = mid
    lo, hi = grid[lo_i], grid[hi_i]
    for _ in range(refinements):
        mid = 0.5 * (lo + hi)
        if ev.reach(mid) >= delta:
            hi = mid
        else:
            lo = mid
    # the lo side is certified below the true window, so the derived
    # switch-count bound T/omega + 1 can only be an overestimate
    return float(lo)


# ---------------------------------------------------------------------------
# report


@dataclass
class VariationReport:
    """Switch count of one relay along one input, with its a-priori bounds."""

    switch_count: int
    input_variation: float
    curve_gap: float
    omega: float
    t_span: float
    rate_bound: float
    amplitude_bound: float

    @property
    def rate_bound_ok(self) -> bool:
        return self.switch_count <= self.rate_bound + 1e-12

    @property
    def amplitude_bound_ok(self) -> bool:
        return self.switch_count <= self.amplitude_bound + 1e-12

    def to_text(self) -> str:
        lines = [
            f"switch_count: {self.switch_count}",
            f"input_variation: {self.input_variation!r}",
            f"curve_gap: {self.curve_gap!r}",
            f"omega: {self.omega!r}",
            f"t_span: {self.t_span!r}",
            f"rate_bound: {self.rate_bound!r}",
            f"rate_bound_ok: {self.rate_bound_ok}",
            f"amplitude_bound: {self.amplitude_bound!r}",
            f"amplitude_bound_ok: {self.amplitude_bound_ok}",
        ]
        return "\n".join(lines)


def variation_report(f: FoliationPair, pair: ParamPair, u: Signal2D, xi: int = 0,
                     semantics: str = "exit",
                     omega_grid_points: int = 1000) -> VariationReport:
    """Trace one relay and compare its switch count with both bounds."""
    pair = f.require_relay_pair(pair)
    if semantics == "exit":
        rs: RelayState = trace_exit(f, pair, u, xi)
    elif semantics == "threshold":
        rs = trace_threshold(f, pair, u, xi)
    else:
        raise ValueError(f"unknown semantics {semantics!r}")
    gap = f.curve_gap(pair)
    V = u.total_variation()
    omega = inverse_modulus(u, gap, grid_points=omega_grid_points)
    T = float(u.t[-1] - u.t[0])
    rate = T / omega + 1.0 if omega > 0 else np.inf
    return VariationReport(
        switch_count=rs.switch_count,
        input_variation=V,
        curve_gap=gap,
        omega=omega,
        t_span=T,
        rate_bound=rate,
        amplitude_bound=V / gap,
    )


# ---------------------------------------------------------------------------
# minimality probe


@dataclass
class ProbeResult:
    is_minimal: bool
    relay_variation: int
    best_candidate_variation: int
    n_candidates: int


def _forced_intervals(f: FoliationPair, pair: ParamPair, u: Signal2D):
    """Partition [0, T] into forced-1 / forced-0 / free intervals.

    Interval labels come from the sampled channel traces with linear
    interpolation: strictly above a threshold forces the corresponding
    value.  Edge constraints capture exact boundary touches, which also
    force the value for that single instant (a touch counts as an exit).
    """
    ks = k_signals(f, u)
    c0, c1 = pair
    cuts = {float(u.t[0]), float(u.t[-1])}
    for k, c in ((ks.k0, c0), (ks.k1, c1)):
        g = k - c
        s = g[:-1] * g[1:]
        for i in np.flatnonzero(s < 0):
            te = u.t[i] + (0.0 - g[i]) / (g[i + 1] - g[i]) * (u.t[i + 1] - u.t[i])
            cuts.add(float(te))
        for i in np.flatnonzero(g == 0.0):
            cuts.add(float(u.t[i]))
    edges = np.asarray(sorted(cuts))
    mids = 0.5 * (edges[:-1] + edges[1:])
    k0m = np.interp(mids, u.t, ks.k0)
    k1m = np.interp(mids, u.t, ks.k1)
    labels = np.zeros(len(mids), dtype=np.int8)  # 0 free, +1 forced-1, -1 forced-0
    labels[k0m > c0] = 1
    labels[k1m > c1] = -1
    k0e = np.interp(edges, u.t, ks.k0)
    k1e = np.interp(edges, u.t, ks.k1)
    econ = np.full(len(edges), -1, dtype=np.int8)  # -1 unconstrained
    econ[k0e >= c0] = 1
    econ[k1e >= c1] = 0
    return edges, labels, econ, ks


def _sequence_variation(values: np.ndarray) -> int:
    return int(np.sum(values[1:] != values[:-1]))


def minimality_probe(f: FoliationPair, pair: ParamPair, u: Signal2D, xi: int = 0,
                     seed: int = 0, trials: int = 64,
                     max_flips: int = 6) -> ProbeResult:
    """Randomized check that the relay undercuts every admissible trajectory.

    Candidates are binary functions fixed on forced intervals and arbitrary
    elsewhere; each trial re-randomizes the free-interval patterns (up to
    ``max_flips`` value flips per free interval).  The relay's own pattern
    and the hold-until-forced pattern are always included.
    """
    pair = f.require_relay_pair(pair)
    edges, labels, econ, ks = _forced_intervals(f, pair, u)
    rs = trace_threshold(f, pair, u, xi)
    relay_var = rs.switch_count

    forced_vals = np.where(labels > 0, 1, 0)
    initial = initial_relay_value(float(ks.k0[0]), float(ks.k1[0]),
                                  pair.c0, pair.c1, xi)

    def merged_variation(interval_pieces: list[np.ndarray]) -> int:
        # interleave edge constraints with the interval value patterns
        seq: list[int] = []
        for i, piece in enumerate(interval_pieces):
            if econ[i] >= 0:
                seq.append(int(econ[i]))
            seq.extend(int(v) for v in piece)
        if econ[-1] >= 0:
            seq.append(int(econ[-1]))
        return _sequence_variation(np.asarray(seq))

    # lazy candidate: keep the current value until a forced interval or a
    # boundary touch demands the other one
    lazy_pieces: list[np.ndarray] = []
    cur = initial
    for i, lab in enumerate(labels):
        if econ[i] >= 0:
            cur = int(econ[i])
        if lab != 0:
            cur = int(forced_vals[i])
        lazy_pieces.append(np.asarray([cur]))

    best = relay_var
    best = min(best, merged_variation(lazy_pieces))
    n_cand = 2

    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        pieces: list[np.ndarray] = []
        for i, lab in enumerate(labels):
            if lab != 0:
                pieces.append(np.asarray([forced_vals[i]]))
                continue
            flips = int(rng.integers(0, max_flips + 1))
            # candidates must launch from the relay's reconciled value
            if i == 0 and econ[0] < 0:
                start = initial
            else:
                start = int(rng.integers(0, 2))
            seq = (start + np.arange(flips + 1)) % 2
            pieces.append(seq)
        best = min(best, merged_variation(pieces))
        n_cand += 1

    return ProbeResult(
        is_minimal=best >= relay_var,
        relay_variation=relay_var,
        best_candidate_variation=int(best),
        n_candidates=n_cand,
    )

"""Single two-input relay: switching driven by exits from two region families.

A relay with parameter pair ``(c0, c1)`` outputs 1 once the input leaves
``D0(c0)`` (its family-0 channel reaches ``c0``) and outputs 0 once the input
leaves ``D1(c1)`` (family-1 channel reaches ``c1``); between exits it holds.
Output is right continuous, and touching a boundary curve already counts as
an exit.  At the start time the value is forced whenever the initial point
lies outside one of the closures, otherwise the configured initial value is
used.

Two tracers are provided.  ``trace_exit`` resolves switching times in
continuous time along the polyline input (piecewise-monotone channel
analysis plus bisection).  ``trace_threshold`` works purely on the sampled
channel values with linear interpolation, which is cheaper and matches the
grid kernels bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityViolation
from .foliation import FoliationPair, ParamPair
from .signal import KSignals, Signal2D

BISECT_TOL = 1e-9
BISECT_MAX_ITER = 64


@dataclass
class RelayState:
    """Right-continuous step record: value ``values[i]`` holds from ``times[i]``.

    ``times[0]`` is the signal start and ``values[0]`` the initial value; every
    later entry is a switch.
    """

    times: np.ndarray
    values: np.ndarray

    @property
    def switch_times(self) -> np.ndarray:
        return self.times[1:]

    @property
    def switch_count(self) -> int:
        return len(self.times) - 1

    def values_at(self, tq) -> np.ndarray:
        tq = np.asarray(tq, dtype=float)
        idx = np.searchsorted(self.times, tq, side="right") - 1
        return self.values[np.clip(idx, 0, len(self.values) - 1)]

    def value_at(self, tq: float) -> int:
        return int(self.values_at(np.asarray([tq]))[0])

    def left_limit(self, tq: float) -> int:
        idx = int(np.searchsorted(self.times, tq, side="left")) - 1
        return int(self.values[max(idx, 0)])


def initial_relay_value(k0: float, k1: float, c0: float, c1: float, xi: int) -> int:
    """Start-time reconciliation of the configured value with the input point."""
    out0 = k0 >= c0
    out1 = k1 >= c1
    if out0 and out1:
        raise AdmissibilityViolation(
            f"initial point is outside both region closures "
            f"(k0={k0:.6g}>=c0={c0:.6g}, k1={k1:.6g}>=c1={c1:.6g})"
        )
    if out0:
        return 1
    if out1:
        return 0
    return int(xi)


def _event_guard(k0: float, k1: float, c0: float, c1: float, t: float) -> None:
    if k0 >= c0 and k1 >= c1:
        raise AdmissibilityViolation(
            f"input reached both exit regions at t={t:.9g}; the curve "
            "families do not cover the domain there"
        )


def trace_threshold(f: FoliationPair, pair: ParamPair, u: Signal2D, xi: int,
                    ks: KSignals | None = None) -> RelayState:
    """Sample-driven tracer: switching decided on sampled channel values."""
    pair = f.require_relay_pair(pair)
    if ks is None:
        from .signal import k_signals

        ks = k_signals(f, u)
    return trace_threshold_k(ks, pair, xi)


def trace_threshold_k(ks: KSignals, pair: ParamPair, xi: int) -> RelayState:
    """Threshold tracer on precomputed channel traces.

    Per segment the interpolated channel maxima sit at the endpoints, so one
    endpoint comparison decides switching; the reported event time solves the
    linear interpolant against the threshold.
    """
    c0, c1 = pair
    t, k0, k1 = ks.t, ks.k0, ks.k1
    state = initial_relay_value(k0[0], k1[0], c0, c1, xi)
    times = [float(t[0])]
    values = [state]
    for i in range(len(t) - 1):
        _event_guard(k0[i + 1], k1[i + 1], c0, c1, t[i + 1])
        if state == 0 and k0[i + 1] >= c0:
            rise = k0[i + 1] - k0[i]
            te = t[i] if (k0[i] >= c0 or rise <= 0) else (
                t[i] + (c0 - k0[i]) / rise * (t[i + 1] - t[i])
            )
            state = 1
            times.append(float(te))
            values.append(state)
        elif state == 1 and k1[i + 1] >= c1:
            rise = k1[i + 1] - k1[i]
            te = t[i] if (k1[i] >= c1 or rise <= 0) else (
                t[i] + (c1 - k1[i]) / rise * (t[i + 1] - t[i])
            )
            state = 0
            times.append(float(te))
            values.append(state)
    return RelayState(np.asarray(times), np.asarray(values, dtype=np.int8))


class _SegmentChannel:
    """Channel evaluation along one linear segment of the input."""

    def __init__(self, f: FoliationPair, u: Signal2D, i: int):
        self.f = f
        self.ta = float(u.t[i])
        self.tb = float(u.t[i + 1])
        self.xa = u.xy[i]
        self.d = u.xy[i + 1] - u.xy[i]

    def point(self, t: float) -> np.ndarray:
        lam = (t - self.ta) / (self.tb - self.ta)
        return self.xa + lam * self.d

    def both(self, t: float) -> tuple[float, float]:
        k0, k1 = self.f.classify_many(self.point(t)[None, :])
        return float(k0[0]), float(k1[0])

    def value(self, family: int, t: float) -> float:
        return self.both(t)[family]


def _earliest_reach(ch: _SegmentChannel, family: int, thr: float,
                    a: float, b: float) -> float | None:
    """First time in [a, b] where the channel meets ``thr``; the channel is
    monotone on the piece, so a bisection brackets the crossing."""
    ka = ch.value(family, a)
    if ka >= thr:
        return a
    kb = ch.value(family, b)
    if kb < thr:
        return None
    lo, hi = a, b
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if ch.value(family, mid) >= thr:
            hi = mid
        else:
            lo = mid
    return hi


def trace_exit(f: FoliationPair, pair: ParamPair, u: Signal2D, xi: int) -> RelayState:
    """Continuous-time tracer: exits located on the actual polyline path.

    Uses per-segment channel ranges to skip event-free segments, then splits
    candidate segments at channel direction changes and bisects each monotone
    piece for the first boundary touch.
    """
    pair = f.require_relay_pair(pair)
    c0, c1 = pair
    u.require_in_domain(f.domain)
    stats = f.segment_stats(u.xy, u.t)
    k00, k10 = f.classify_many(u.xy[0][None, :])
    state = initial_relay_value(float(k00[0]), float(k10[0]), c0, c1, xi)
    times = [float(u.t[0])]
    values = [state]
    thresholds = (c0, c1)
    for i in range(len(u.t) - 1):
        # the first event of a segment must exit the state's own family
        reachable = (stats.k0_max[i] >= c0) if state == 0 else (stats.k1_max[i] >= c1)
        if not reachable:
            continue
        ch = _SegmentChannel(f, u, i)
        cuts = stats.breaks[i]
        cuts = np.sort(cuts[np.isfinite(cuts)])
        edges = np.concatenate([[u.t[i]], cuts, [u.t[i + 1]]])
        pos = float(u.t[i])
        for pa, pb in zip(edges[:-1], edges[1:]):
            a = max(float(pa), pos)
            b = float(pb)
            if not a < b:
                continue
            watch = state  # family watched equals the state's exit family
            te = _earliest_reach(ch, watch, thresholds[watch], a, b)
            if te is None:
                continue
            if te > float(u.t[0]):
                ke0, ke1 = ch.both(te)
                _event_guard(ke0, ke1, c0, c1, te)
            state = 1 - state
            times.append(float(te))
            values.append(state)
            pos = te
    return RelayState(np.asarray(times), np.asarray(values, dtype=np.int8))

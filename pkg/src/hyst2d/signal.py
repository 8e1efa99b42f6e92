"""Piecewise linear planar input signals and their per-family reductions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPiecewiseMonotone, OutsideDomain, SignalError
from .foliation import FoliationPair


@dataclass
class Signal2D:
    """Continuous planar input sampled at increasing times, linear between."""

    t: np.ndarray
    xy: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.xy = np.asarray(self.xy, dtype=float)
        if self.t.ndim != 1 or len(self.t) < 2:
            raise SignalError("need at least two samples")
        if self.xy.shape != (len(self.t), 2):
            raise SignalError(f"xy must have shape ({len(self.t)}, 2)")
        if np.any(np.diff(self.t) <= 0):
            raise SignalError("timestamps must be strictly increasing")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.xy))):
            raise SignalError("samples must be finite")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_waypoints(cls, points, times=None) -> "Signal2D":
        points = np.asarray(points, dtype=float)
        if times is None:
            times = np.arange(len(points), dtype=float)
        return cls(np.asarray(times, dtype=float), points)

    @classmethod
    def sine(cls, center, radius: float, t_end: float, n_samples: int,
             phase: float = 0.0, turns: float = 1.0) -> "Signal2D":
        """Circular arc traversed at constant angular speed."""
        t = np.linspace(0.0, t_end, n_samples)
        ang = phase + 2.0 * np.pi * turns * t / t_end
        cx, cy = center
        xy = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
        return cls(t, xy)

    @classmethod
    def from_csv(cls, path) -> "Signal2D":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] != 3:
            raise SignalError("signal csv must have columns t,x1,x2")
        return cls(rows[:, 0], rows[:, 1:3])

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["t", "x1", "x2"],
                  np.column_stack([self.t, self.xy]))

    # -- evaluation ----------------------------------------------------------

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def value(self, tq) -> np.ndarray:
        """Interpolated position(s); clamped to the time span."""
        tq = np.asarray(tq, dtype=float)
        x1 = np.interp(tq, self.t, self.xy[:, 0])
        x2 = np.interp(tq, self.t, self.xy[:, 1])
        return np.stack([x1, x2], axis=-1)

    def resample(self, dt: float) -> "Signal2D":
        """Refine the time grid to steps <= dt, keeping original vertices."""
        knots = [self.t]
        for a, b in zip(self.t[:-1], self.t[1:]):
            n_extra = int(np.ceil((b - a) / dt)) - 1
            if n_extra > 0:
                knots.append(a + (b - a) * (np.arange(1, n_extra + 1) / (n_extra + 1)))
        tt = np.unique(np.concatenate(knots))
        return Signal2D(tt, self.value(tt))

    def total_variation(self) -> float:
        """Arc length of the polyline: sum of Euclidean increments."""
        d = np.diff(self.xy, axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def require_in_domain(self, domain) -> None:
        inside = domain.contains_many(self.xy)
        if not np.all(inside):
            i = int(np.argmax(~inside))
            raise OutsideDomain(
                f"signal leaves the open domain at t={self.t[i]} "
                f"(sample {i}: ({self.xy[i, 0]}, {self.xy[i, 1]}))"
            )


@dataclass
class KSignals:
    """Scalar channel traces k0(t), k1(t) of a signal through a foliation.

    Values are exact at the sample times; between samples the planar path is
    a chord, so the channel values there are whatever the fields do along it
    (affine for linear fields, convex for radial distance).
    """

    t: np.ndarray
    k0: np.ndarray
    k1: np.ndarray

    def channel(self, family: int) -> np.ndarray:
        return self.k0 if family == 0 else self.k1

    def monotone_runs(self, family: int) -> np.ndarray:
        """Index bounds [start, stop] of maximal weakly monotone runs."""
        k = self.channel(family)
        d = np.sign(np.diff(k))
        bounds = [0]
        cur = 0.0
        for i, s in enumerate(d):
            if s == 0.0:
                continue
            if cur == 0.0:
                cur = s
            elif s != cur:
                bounds.append(i)
                cur = s
        bounds.append(len(k) - 1)
        return np.asarray(bounds)


def k_signals(f: FoliationPair, u: Signal2D) -> KSignals:
    u.require_in_domain(f.domain)
    k0, k1 = f.classify_many(u.xy)
    return KSignals(u.t, np.asarray(k0, dtype=float), np.asarray(k1, dtype=float))


def reduce_signal(f: FoliationPair, u: Signal2D,
                  max_direction_changes: int | None = None) -> KSignals:
    """Channel traces plus sanity checks used before scalar-style analysis.

    Verifies the two channels move in opposite directions sample-to-sample
    (the defining property of the family pair) and, optionally, caps the
    number of direction changes so downstream stack logic stays bounded.
    """
    ks = k_signals(f, u)
    d0 = np.diff(ks.k0)
    d1 = np.diff(ks.k1)
    agree = (d0 * d1 <= 1e-12) & ~((d0 == 0.0) ^ (d1 == 0.0))
    if not np.all(agree):
        i = int(np.argmax(~agree))
        raise NotPiecewiseMonotone(
            f"channel traces move together on segment {i} "
            f"(dk0={d0[i]:.3g}, dk1={d1[i]:.3g}); foliation families must "
            "order the plane oppositely"
        )
    if max_direction_changes is not None:
        runs = ks.monotone_runs(0)
        if len(runs) - 2 > max_direction_changes:
            raise NotPiecewiseMonotone(
                f"{len(runs) - 2} direction changes exceed the cap "
                f"{max_direction_changes}"
            )
    return ks

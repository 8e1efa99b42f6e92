"""Weight and curve identification from input-output measurements.

Both procedures probe the operator along a transversal curve: a path the
curve families cross strictly, so arc length orders the family-0 labels
upward and the family-1 labels downward.  Rise-fall drives from the curve
start produce a transition surface whose mixed derivative, divided by the
label-rate Jacobian of the curve, returns the weight density; matching that
surface against a known weight locates individual level curves in the plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import psi_sweep
from .errors import (
    AmbiguousRoot,
    FoliationConditionViolation,
    GridTooCoarse,
    HysteresisError,
    NoRoot,
    SingularJacobian,
)
from .foliation import FoliationPair
from .plane import RelayGrid


# ---------------------------------------------------------------------------
# transversal curves


@dataclass
class TransversalCurve:
    """Polyline path parameterized by arc length, starting at ``s_start``."""

    vertices: np.ndarray
    s_start: float = 0.0

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[0] < 2 \
                or self.vertices.shape[1] != 2:
            raise ValueError("need at least two planar vertices")
        d = np.diff(self.vertices, axis=0)
        seg = np.hypot(d[:, 0], d[:, 1])
        if np.any(seg <= 0):
            raise ValueError("repeated consecutive vertices")
        self._s = self.s_start + np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def s_min(self) -> float:
        return float(self._s[0])

    @property
    def s_max(self) -> float:
        return float(self._s[-1])

    def point_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if np.any(s < self.s_min - 1e-12) or np.any(s > self.s_max + 1e-12):
            raise ValueError("arc length outside the curve span")
        x1 = np.interp(s, self._s, self.vertices[:, 0])
        x2 = np.interp(s, self._s, self.vertices[:, 1])
        return np.stack([x1, x2], axis=-1)

    def labels(self, f: FoliationPair, s) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(self.point_at(s))
        k0, k1 = f.classify_many(pts)
        return np.asarray(k0, dtype=float), np.asarray(k1, dtype=float)


def validate_transversal(f: FoliationPair, curve: TransversalCurve,
                         n_check: int = 256) -> None:
    """Require the family labels to be strictly monotone along the curve."""
    s = np.linspace(curve.s_min, curve.s_max, n_check)
    k0, k1 = curve.labels(f, s)
    if np.any(np.diff(k0) <= 0):
        i = int(np.argmax(np.diff(k0) <= 0))
        raise FoliationConditionViolation(
            f"family-0 label is not strictly increasing along the curve "
            f"near s={s[i]:.6g}"
        )
    if np.any(np.diff(k1) >= 0):
        i = int(np.argmax(np.diff(k1) >= 0))
        raise FoliationConditionViolation(
            f"family-1 label is not strictly decreasing along the curve "
            f"near s={s[i]:.6g}"
        )


# ---------------------------------------------------------------------------
# transition surface


def _entry_guard(grid: RelayGrid, curve: TransversalCurve) -> None:
    k0, _ = curve.labels(grid.foliation, np.asarray([curve.s_min]))
    if float(k0[0]) >= float(grid.c0.min()):
        raise HysteresisError(
            "curve start does not enter below the cell range: the rise leg "
            f"would begin with cells already switched (k0 at start = "
            f"{float(k0[0]):.6g}, smallest cell c0 = {float(grid.c0.min()):.6g})"
        )


def _psi_halves(grid: RelayGrid) -> tuple[float, float]:
    # fractional cell coverage keeps the measured surface smooth between
    # cell edges; a degenerate single-row grid falls back to the point rule
    half0, half1 = grid.cell_halves
    if half0 > 0.0 and half1 > 0.0:
        return half0, half1
    return 0.0, 0.0


def transition_surface(grid: RelayGrid, curve: TransversalCurve,
                       s0_nodes, s1_nodes,
                       backend: str | None = None) -> np.ndarray:
    """Measured surface psi[a, b]: output drop of the fall leg.

    Each lattice entry is the response to one rise-fall drive along the
    curve: from the curve start up to ``s0_nodes[a]``, then back down to
    ``s1_nodes[b]``; the entry is the output at the top minus the output at
    the stop.  Meaningful for ``s1 <= s0``; entries above that diagonal are
    the same cell sum extended smoothly and carry no measurement meaning.
    """
    s0_nodes = np.asarray(s0_nodes, dtype=float)
    s1_nodes = np.asarray(s1_nodes, dtype=float)
    _entry_guard(grid, curve)
    K0, _ = curve.labels(grid.foliation, s0_nodes)
    _, K1 = curve.labels(grid.foliation, s1_nodes)
    if np.any(np.diff(K0) <= 0) or np.any(np.diff(K1) >= 0):
        raise FoliationConditionViolation(
            "label ordering along the curve is not strictly monotone on the "
            "requested lattice"
        )
    half0, half1 = _psi_halves(grid)
    return psi_sweep(K0, K1, grid.c0, grid.c1, grid.effective_weight,
                     backend=backend, half0=half0, half1=half1)


# ---------------------------------------------------------------------------
# finite differences


def _d_axis(mat: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order first derivative along one axis: central inside, 3-point
    one-sided on the edges."""
    m = np.moveaxis(mat, axis, 0)
    n = m.shape[0]
    if n < 3:
        raise GridTooCoarse("need at least 3 nodes per axis for derivatives")
    out = np.empty_like(m, dtype=float)
    out[1:-1] = (m[2:] - m[:-2]) / (2.0 * h)
    out[0] = (-3.0 * m[0] + 4.0 * m[1] - m[2]) / (2.0 * h)
    out[-1] = (3.0 * m[-1] - 4.0 * m[-2] + m[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def mixed_derivative(psi: np.ndarray, h0: float, h1: float) -> np.ndarray:
    """phi[a, b] = -d^2 psi / ds0 ds1 on a uniform lattice."""
    return -_d_axis(_d_axis(psi, h1, axis=1), h0, axis=0)


def label_rate(f: FoliationPair, curve: TransversalCurve, family: int,
               s_nodes: np.ndarray, step: float) -> np.ndarray:
    """Central-difference rate of one family label along the curve."""
    s_nodes = np.asarray(s_nodes, dtype=float)
    lo = np.maximum(s_nodes - step, curve.s_min)
    hi = np.minimum(s_nodes + step, curve.s_max)
    ka = curve.labels(f, lo)[family]
    kb = curve.labels(f, hi)[family]
    return (kb - ka) / (hi - lo)


def jacobian_surface(f: FoliationPair, curve: TransversalCurve,
                     s0_nodes, s1_nodes, step: float) -> np.ndarray:
    """J[a, b] = |sigma0'(s0_a) * sigma1'(s1_b)| with a singularity guard."""
    r0 = label_rate(f, curve, 0, np.asarray(s0_nodes, dtype=float), step)
    r1 = label_rate(f, curve, 1, np.asarray(s1_nodes, dtype=float), step)
    J = np.abs(np.outer(r0, r1))
    if float(J.min()) < 1e-8:
        a, b = np.unravel_index(int(np.argmin(J)), J.shape)
        raise SingularJacobian(
            f"label rates vanish near lattice node ({a}, {b}); the curve is "
            "tangent to a family there"
        )
    return J


# ---------------------------------------------------------------------------
# weight identification


@dataclass
class IdentifiedWeight:
    """Weight density on an (s0, s1) label lattice, with a validity mask.

    The mask excludes the diagonal band where the rise-fall stencil leaks
    above ``s1 <= s0`` and any nodes outside the measured lattice.
    """

    s0_nodes: np.ndarray
    s1_nodes: np.ndarray
    values: np.ndarray
    valid: np.ndarray
    psi: np.ndarray = field(repr=False, default=None)
    jacobian: np.ndarray = field(repr=False, default=None)

    def interp(self, s0, s1) -> np.ndarray:
        """Bilinear evaluation (clamped to the lattice hull)."""
        a = np.clip(s0, self.s0_nodes[0], self.s0_nodes[-1])
        b = np.clip(s1, self.s1_nodes[0], self.s1_nodes[-1])
        i = np.clip(np.searchsorted(self.s0_nodes, a) - 1, 0, len(self.s0_nodes) - 2)
        j = np.clip(np.searchsorted(self.s1_nodes, b) - 1, 0, len(self.s1_nodes) - 2)
        w1 = (a - self.s0_nodes[i]) / (self.s0_nodes[i + 1] - self.s0_nodes[i])
        w2 = (b - self.s1_nodes[j]) / (self.s1_nodes[j + 1] - self.s1_nodes[j])
        return (self.values[i, j] * (1 - w1) * (1 - w2)
                + self.values[i + 1, j] * w1 * (1 - w2)
                + self.values[i, j + 1] * (1 - w1) * w2
                + self.values[i + 1, j + 1] * w1 * w2)

    def as_cell_weight(self, f: FoliationPair, curve: TransversalCurve,
                       n_map: int = 2048):
        """Weight callable over cell labels, via the curve's label maps."""
        s = np.linspace(curve.s_min, curve.s_max, n_map)
        K0, K1 = curve.labels(f, s)

        def weight(c0, c1):
            s0 = np.interp(c0, K0, s)
            # K1 decreases in s: interpolate on the reversed table
            s1 = np.interp(c1, K1[::-1], s[::-1])
            return self.interp(s0, s1)

        return weight


def _pad_nodes(nodes: np.ndarray, h: float, curve: TransversalCurve,
               slack: float) -> tuple[np.ndarray, int]:
    """Extend a uniform lattice by one full step per end inside the span."""
    parts = []
    lead = 0
    if nodes[0] - h >= curve.s_min - slack:
        parts.append([max(nodes[0] - h, curve.s_min)])
        lead = 1
    parts.append(nodes)
    if nodes[-1] + h <= curve.s_max + slack:
        parts.append([min(nodes[-1] + h, curve.s_max)])
    return np.concatenate(parts), lead


def identify_weight(grid: RelayGrid, curve: TransversalCurve,
                    s0_nodes, s1_nodes, band_margin: float | None = None,
                    backend: str | None = None) -> IdentifiedWeight:
    """Recover the weight density from rise-fall measurements.

    The lattice must be uniform per axis.  The returned values are
    ``-d^2 psi/ds0 ds1`` divided by the label-rate Jacobian; the validity
    mask keeps nodes whose full stencil stays below the diagonal by
    ``band_margin`` (default: two lattice steps plus the foliation min_gap).

    Where the curve span allows, the surface is measured one step beyond
    each lattice end so that every requested node gets a central stencil;
    a lattice end flush with the span falls back to a one-sided stencil
    on that row, which costs accuracy there.
    """
    s0_nodes = np.asarray(s0_nodes, dtype=float)
    s1_nodes = np.asarray(s1_nodes, dtype=float)
    if len(s0_nodes) < 3 or len(s1_nodes) < 3:
        raise GridTooCoarse("need at least 3 lattice nodes per axis")
    h0s = np.diff(s0_nodes)
    h1s = np.diff(s1_nodes)
    if (np.max(np.abs(h0s - h0s[0])) > 1e-9 * abs(h0s[0])
            or np.max(np.abs(h1s - h1s[0])) > 1e-9 * abs(h1s[0])):
        raise ValueError("lattice must be uniformly spaced per axis")
    h0, h1 = float(h0s[0]), float(h1s[0])
    slack = 1e-9 * max(h0, h1)
    e0, i0 = _pad_nodes(s0_nodes, h0, curve, slack)
    e1, j0 = _pad_nodes(s1_nodes, h1, curve, slack)
    psi_ext = transition_surface(grid, curve, e0, e1, backend=backend)
    phi_ext = mixed_derivative(psi_ext, h0, h1)
    rows = slice(i0, i0 + len(s0_nodes))
    cols = slice(j0, j0 + len(s1_nodes))
    psi = np.ascontiguousarray(psi_ext[rows, cols])
    phi = phi_ext[rows, cols]
    step = 0.5 * min(h0, h1)
    J = jacobian_surface(grid.foliation, curve, s0_nodes, s1_nodes, step)
    W = phi / J
    if band_margin is None:
        band_margin = 2.0 * max(h0, h1) + grid.foliation.min_gap
    S0, S1 = np.meshgrid(s0_nodes, s1_nodes, indexing="ij")
    valid = (S0 - S1) >= band_margin
    return IdentifiedWeight(s0_nodes, s1_nodes, W, valid, psi=psi, jacobian=J)


# ---------------------------------------------------------------------------
# curve recovery


@dataclass
class CurvePointRecord:
    curve_index: int
    s_root: float
    point: np.ndarray


@dataclass
class CurveClouds:
    """Recovered points of one level curve, grouped by probing curve."""

    records: list[CurvePointRecord]
    skipped: list[tuple[int, str]]

    def merged(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, 2))
        return np.vstack([r.point for r in self.records])

    def spread(self) -> float:
        """Largest pairwise distance between recovered points."""
        pts = self.merged()
        if len(pts) < 2:
            return 0.0
        d = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                     pts[:, None, 1] - pts[None, :, 1])
        return float(d.max())


def _phi_point(grid: RelayGrid, curve: TransversalCurve, s0: float,
               s1_ref: float, fd_step: float) -> float:
    """Mixed derivative at one lattice-free point via a 4-corner stencil."""
    h = fd_step
    s0v = np.asarray([s0 - h, s0 + h])
    # ascending s gives descending family-1 labels, as the kernel expects
    s1v = np.asarray([s1_ref - h, s1_ref + h])
    K0, _ = curve.labels(grid.foliation, s0v)
    _, K1 = curve.labels(grid.foliation, s1v)
    half0, half1 = _psi_halves(grid)
    psi = psi_sweep(K0, K1, grid.c0, grid.c1, grid.effective_weight,
                    half0=half0, half1=half1)
    # rows: s0 -/+ h, cols: s1 -/+ h
    num = psi[1, 1] - psi[1, 0] - psi[0, 1] + psi[0, 0]
    return -float(num) / (4.0 * h * h)


def recover_level_points(grid: RelayGrid, curves: list[TransversalCurve],
                         target: float, s_ref: float,
                         s_span: tuple[float, float], scan_step: float,
                         fd_step: float, tol: float = 1e-3,
                         family: int = 0) -> CurveClouds:
    """Locate one level curve by matching the measured surface to ``target``.

    ``family`` selects which label family is being traced back: 0 scans the
    rising coordinate with the falling one held at ``s_ref``, 1 scans the
    falling coordinate with the rising one held there.  On each probing
    curve the mixed-derivative profile is scanned at ``scan_step``
    resolution for a sign change against ``target``; the unique bracket is
    bisected down to ``tol``.  Curves with no bracket are skipped
    (recorded), several brackets raise, since the match is then not a
    single level crossing.
    """
    if family not in (0, 1):
        raise ValueError("family must be 0 or 1")

    def profile(grid, curve, s, h):
        if family == 0:
            return _phi_point(grid, curve, s, s_ref, h)
        return _phi_point(grid, curve, s_ref, s, h)

    records: list[CurvePointRecord] = []
    skipped: list[tuple[int, str]] = []
    lo_s, hi_s = float(s_span[0]), float(s_span[1])
    for idx, curve in enumerate(curves):
        _entry_guard(grid, curve)
        a = max(lo_s, curve.s_min + fd_step)
        b = min(hi_s, curve.s_max - fd_step)
        if not a < b:
            skipped.append((idx, "scan span is empty on this curve"))
            continue
        n = max(2, int(np.ceil((b - a) / scan_step)) + 1)
        svals = np.linspace(a, b, n)
        fvals = np.asarray([
            profile(grid, curve, s, fd_step) - target for s in svals
        ])
        sign = np.sign(fvals)
        crossings = [
            i for i in range(n - 1)
            if sign[i] != sign[i + 1] and sign[i] != 0.0
        ]
        exact = [i for i in range(n) if sign[i] == 0.0]
        if len(crossings) + len(exact) == 0:
            skipped.append((idx, NoRoot("no bracket for the target value").args[0]))
            continue
        if len(crossings) + len(exact) > 1:
            raise AmbiguousRoot(
                f"curve {idx}: {len(crossings) + len(exact)} brackets for the "
                "target value; the profile is not single-crossing on the span"
            )
        if exact:
            root = float(svals[exact[0]])
        else:
            i = crossings[0]
            lo, hi = float(svals[i]), float(svals[i + 1])
            flo = fvals[i]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = profile(grid, curve, mid, fd_step) - target
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo = mid
                    flo = fm
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
        records.append(CurvePointRecord(idx, root, curve.point_at(root)))
    return CurveClouds(records, skipped)

"""Weighted ensembles of two-input relays over a parameter-plane lattice.

A grid holds one relay cell per admissible parameter pair on a rectangular
lattice of (c0, c1) labels; driving the grid superposes the cell outputs
with weight times cell area.  The module also provides the reduced-memory
view of an input: the surviving dominant reversal levels and a short
waypoint signal that reproduces the full grid state.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyRegion, HysteresisError, SignalError
from .foliation import FoliationPair, ParamPair, _ScalarFieldFoliation, sample_domain
from .relay import RelayState, trace_exit
from .signal import KSignals, Signal2D, k_signals


# ---------------------------------------------------------------------------
# weights


class ConstantWeight:
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(c0, dtype=float), self.value)


_ALLOWED_CALLS = {
    "abs": np.abs, "sqrt": np.sqrt, "exp": np.exp, "log": np.log,
    "sin": np.sin, "cos": np.cos, "tanh": np.tanh,
    "minimum": np.minimum, "maximum": np.maximum,
}
_ALLOWED_NAMES = {"c0", "c1", "pi", "e"}


class ExpressionWeight:
    """Weight as an arithmetic expression in the cell labels ``c0`` and ``c1``.

    Only arithmetic operators, numeric literals, and a short list of
    functions are allowed; anything else is rejected at construction.
    """

    def __init__(self, expr: str):
        self.expr = expr
        tree = ast.parse(expr, mode="eval")
        for node in ast.walk(tree):
            if isinstance(node, (ast.Expression, ast.BinOp, ast.UnaryOp,
                                 ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow,
                                 ast.USub, ast.UAdd, ast.Load)):
                continue
            if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
                continue
            if isinstance(node, ast.Name) and node.id in _ALLOWED_NAMES | set(_ALLOWED_CALLS):
                continue
            if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                    and node.func.id in _ALLOWED_CALLS and not node.keywords:
                continue
            raise ValueError(f"disallowed element in weight expression: {ast.dump(node)}")
        self._code = compile(tree, "<weight>", "eval")

    def __call__(self, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
        ns = dict(_ALLOWED_CALLS)
        ns.update({"c0": np.asarray(c0, dtype=float),
                   "c1": np.asarray(c1, dtype=float),
                   "pi": np.pi, "e": np.e})
        out = eval(self._code, {"__builtins__": {}}, ns)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(c0)).copy()


class TableWeight:
    """Bilinear interpolation of a weight table over (c0, c1) labels."""

    def __init__(self, c0_nodes, c1_nodes, table):
        self.c0_nodes = np.asarray(c0_nodes, dtype=float)
        self.c1_nodes = np.asarray(c1_nodes, dtype=float)
        self.table = np.asarray(table, dtype=float)
        if self.table.shape != (len(self.c0_nodes), len(self.c1_nodes)):
            raise ValueError("table shape must be (len(c0_nodes), len(c1_nodes))")

    def __call__(self, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
        a = np.clip(c0, self.c0_nodes[0], self.c0_nodes[-1])
        b = np.clip(c1, self.c1_nodes[0], self.c1_nodes[-1])
        i = np.clip(np.searchsorted(self.c0_nodes, a) - 1, 0, len(self.c0_nodes) - 2)
        j = np.clip(np.searchsorted(self.c1_nodes, b) - 1, 0, len(self.c1_nodes) - 2)
        w1 = (a - self.c0_nodes[i]) / (self.c0_nodes[i + 1] - self.c0_nodes[i])
        w2 = (b - self.c1_nodes[j]) / (self.c1_nodes[j + 1] - self.c1_nodes[j])
        return (self.table[i, j] * (1 - w1) * (1 - w2)
                + self.table[i + 1, j] * w1 * (1 - w2)
                + self.table[i, j + 1] * (1 - w1) * w2
                + self.table[i + 1, j + 1] * w1 * w2)


def make_weight(spec):
    if callable(spec):
        return spec
    if isinstance(spec, (int, float)):
        return ConstantWeight(spec)
    if isinstance(spec, str):
        return ExpressionWeight(spec)
    raise ValueError(f"cannot build a weight from {spec!r}")


# ---------------------------------------------------------------------------
# grid construction


def admissible_mask(f: FoliationPair, C0: np.ndarray, C1: np.ndarray) -> np.ndarray:
    """Vectorized admissibility of label pairs (broadcasting arrays).

    Scalar-field kinds use the closed form.  Tabulated kinds reduce the
    dense cover check to a threshold test: a pair fails iff some sampled
    domain point sits outside both regions, i.e. iff the running maximum of
    k1 over points with k0 >= c0 reaches c1.
    """
    C0 = np.asarray(C0, dtype=float)
    C1 = np.asarray(C1, dtype=float)
    lo0, hi0 = f.c0_range
    lo1, hi1 = f.c1_range
    in_range = (C0 >= lo0) & (C0 <= hi0) & (C1 >= lo1) & (C1 <= hi1)
    if isinstance(f, _ScalarFieldFoliation):
        return in_range & (C0 + C1 > f.field_const)
    pts = sample_domain(f.domain, f.sampling.cover_grid)
    k0, k1 = f.classify_many(pts)
    order = np.argsort(k0)
    k0s = k0[order]
    worst_k1 = np.maximum.accumulate(k1[order][::-1])[::-1]
    # M(c) = max k1 over samples with k0 >= c; pair fails iff M(c0) >= c1
    idx = np.searchsorted(k0s, C0, side="left")
    M = np.where(idx < len(k0s), worst_k1[np.minimum(idx, len(k0s) - 1)], -np.inf)
    return in_range & (M < C1)


@dataclass
class RelayGrid:
    """Relay cells on a (c0, c1) label lattice, admissible cells only.

    Flat arrays index the kept cells; ``nodes0``/``nodes1``/``mask`` retain
    the lattice layout for table exports.
    """

    foliation: FoliationPair
    c0: np.ndarray
    c1: np.ndarray
    area: np.ndarray
    weight: np.ndarray
    xi: np.ndarray
    nodes0: np.ndarray
    nodes1: np.ndarray
    mask: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.c0)

    @property
    def effective_weight(self) -> np.ndarray:
        return self.weight * self.area

    @property
    def cell_halves(self) -> tuple[float, float]:
        """Half-extent of one cell along each label axis."""
        h0 = float(self.nodes0[1] - self.nodes0[0]) if len(self.nodes0) > 1 else 0.0
        h1 = float(self.nodes1[1] - self.nodes1[0]) if len(self.nodes1) > 1 else 0.0
        return 0.5 * h0, 0.5 * h1

    def with_initial(self, xi) -> "RelayGrid":
        xi_arr = np.broadcast_to(np.asarray(xi, dtype=np.int8), self.c0.shape).copy()
        return RelayGrid(self.foliation, self.c0, self.c1, self.area, self.weight,
                         xi_arr, self.nodes0, self.nodes1, self.mask)


def build_grid(f: FoliationPair, n0: int, n1: int, weight=1.0, xi=0,
               drop_degenerate: bool = True) -> RelayGrid:
    """Lattice of cell centers over the declared parameter ranges.

    Cells whose pair is not admissible are dropped; with ``drop_degenerate``
    (scalar-field kinds only) cells closer than ``min_gap`` to losing the
    covering property are dropped as well.
    """
    lo0, hi0 = f.c0_range
    lo1, hi1 = f.c1_range
    h0 = (hi0 - lo0) / n0
    h1 = (hi1 - lo1) / n1
    g0 = lo0 + (np.arange(n0) + 0.5) * h0
    g1 = lo1 + (np.arange(n1) + 0.5) * h1
    C0, C1 = np.meshgrid(g0, g1, indexing="ij")
    mask = admissible_mask(f, C0, C1)
    if drop_degenerate and isinstance(f, _ScalarFieldFoliation):
        mask &= (C0 + C1 - f.field_const) >= f.min_gap
    if not mask.any():
        raise EmptyRegion("no admissible cells on the requested lattice")
    c0 = C0[mask]
    c1 = C1[mask]
    area = np.full(len(c0), h0 * h1)
    w = make_weight(weight)(c0, c1)
    xi_arr = np.broadcast_to(np.asarray(xi, dtype=np.int8), c0.shape).copy()
    return RelayGrid(f, c0, c1, area, w, xi_arr, g0, g1, mask)


def save_grid_csv(path, grid: RelayGrid, states: np.ndarray | None = None) -> None:
    from .io import write_csv

    st = states if states is not None else grid.xi
    rows = np.column_stack([grid.c0, grid.c1, grid.area, grid.weight,
                            np.asarray(st, dtype=float)])
    write_csv(path, ["c0", "c1", "area", "weight", "state"], rows)


# ---------------------------------------------------------------------------
# driving


@dataclass
class HysteresisOutput:
    """Result of driving a grid: sampled output plus the full event stream."""

    t: np.ndarray
    H: np.ndarray
    ev_cell: np.ndarray
    ev_time: np.ndarray
    ev_val: np.ndarray
    final_state: np.ndarray
    grid: RelayGrid

    @property
    def n_events(self) -> int:
        return len(self.ev_time)

    def cell_switch_counts(self) -> np.ndarray:
        return np.bincount(self.ev_cell, minlength=self.grid.n_cells)

    def event_table(self) -> np.ndarray:
        """Events as rows (time, cell, new_value) sorted by time (stable)."""
        order = np.argsort(self.ev_time, kind="stable")
        return np.column_stack([
            self.ev_time[order],
            self.ev_cell[order].astype(float),
            self.ev_val[order].astype(float),
        ])


def apply_grid(grid: RelayGrid, u: Signal2D, semantics: str = "threshold",
               backend: str | None = None,
               ks: KSignals | None = None) -> HysteresisOutput:
    """Drive every cell along the input and superpose weighted outputs.

    ``threshold`` semantics decides switching on sampled channel values (the
    fast kernel path); ``exit`` resolves boundary touches in continuous time
    per cell, which is exact on the polyline but loops in Python.
    """
    f = grid.foliation
    if ks is None:
        u.require_in_domain(f.domain)
        ks = k_signals(f, u)
    if semantics == "threshold":
        state, H, ev_cell, ev_time, ev_val = _kernels.drive_grid(
            ks.t, ks.k0, ks.k1, grid.c0, grid.c1, grid.xi,
            grid.effective_weight, backend=backend)
        return HysteresisOutput(ks.t, H, ev_cell, ev_time, ev_val, state, grid)
    if semantics != "exit":
        raise ValueError(f"unknown semantics {semantics!r}")
    w = grid.effective_weight
    H = np.zeros(len(u.t))
    ev = []
    final = np.empty(grid.n_cells, dtype=np.int8)
    for j in range(grid.n_cells):
        rs: RelayState = trace_exit(f, ParamPair(grid.c0[j], grid.c1[j]), u,
                                    int(grid.xi[j]))
        H += w[j] * rs.values_at(u.t)
        final[j] = rs.values[-1]
        for te, tv in zip(rs.switch_times, rs.values[1:]):
            ev.append((j, te, tv))
    if ev:
        ev.sort(key=lambda r: (r[1], r[0]))
        ev_cell = np.asarray([r[0] for r in ev], dtype=np.int64)
        ev_time = np.asarray([r[1] for r in ev])
        ev_val = np.asarray([r[2] for r in ev], dtype=np.int8)
    else:
        ev_cell = np.empty(0, np.int64)
        ev_time = np.empty(0)
        ev_val = np.empty(0, np.int8)
    return HysteresisOutput(u.t, H, ev_cell, ev_time, ev_val, final, grid)


# ---------------------------------------------------------------------------
# dominant reversals and reduced histories


@dataclass(frozen=True)
class Reversal:
    """One dominant-candidate extremum of a channel trace."""

    family: int
    level: float  # the extremal value in the family's own label scale
    index: int  # sample index of the level's last attainment
    time: float


def _suffix_max_indices(k: np.ndarray) -> list[int]:
    """Indices whose value strictly exceeds everything after them.

    These are exactly the channel levels no later sample matches again,
    each reported at its last attainment; levels strictly decrease along
    the returned (increasing) indices.
    """
    out: list[int] = []
    best = -np.inf
    for i in range(len(k) - 1, -1, -1):
        if k[i] > best:
            best = k[i]
            out.append(i)
    out.reverse()
    return out


def _rose_into_end(k: np.ndarray) -> bool:
    for i in range(len(k) - 1, 0, -1):
        if k[i] != k[i - 1]:
            return k[i] > k[i - 1]
    return False


def dominant_reversals(ks: KSignals) -> list[Reversal]:
    """Surviving reversal levels after wiping, in time order.

    Per family the survivors are the suffix maxima of the channel: levels
    never matched again later, each at its last attainment.  Merging both
    families by sample index and keeping only the first entry of each
    same-family run gives the alternating dominant sequence.  A family's
    final-sample entry only counts when the channel rose into it, and a
    leading start-sample entry is dropped: both ends are pinned by the
    start and end points that reduce_history keeps anyway.
    """
    revs: list[Reversal] = []
    for fam in (0, 1):
        k = ks.channel(fam)
        idx = _suffix_max_indices(k)
        if idx and idx[-1] == len(k) - 1 and not _rose_into_end(k):
            idx.pop()
        for i in idx:
            revs.append(Reversal(fam, float(k[i]), i, float(ks.t[i])))
    revs.sort(key=lambda r: (r.index, r.family))
    out: list[Reversal] = []
    for r in revs:
        if out and out[-1].family == r.family:
            continue
        out.append(r)
    while out and out[0].index == 0:
        out.pop(0)
    return out


@dataclass
class ReducedHistory:
    """Dominant memory plus a short input realizing the same grid state."""

    reversals: list[Reversal]
    waypoints: Signal2D


def reduce_history(f: FoliationPair, u: Signal2D) -> ReducedHistory:
    """Compress an input to its surviving reversals.

    The waypoint signal visits, in order: the start point, one canonical
    point per surviving reversal, and the end point.  Canonical points are
    foliation-specific (linear keeps the original planar points, radial
    re-anchors on a ray from the center); driving any grid with the waypoint
    signal under threshold semantics reproduces the final cell states of the
    full input exactly, because only the attained label extrema matter.
    """
    u.require_in_domain(f.domain)
    ks = k_signals(f, u)
    stack = dominant_reversals(ks)
    pts = [u.xy[0]]
    times = [float(u.t[0])]
    for r in stack:
        if r.index == 0:
            continue
        p = f.history_waypoint(float(ks.k0[r.index]), u.xy[r.index])
        if r.index == len(u.t) - 1:
            # final-sample reversal doubles as the end point
            continue
        pts.append(p)
        times.append(r.time)
    pts.append(u.xy[-1])
    times.append(float(u.t[-1]))
    tt = np.asarray(times)
    if np.any(np.diff(tt) <= 0):
        # collapse coincident times by re-spacing; state equality only
        # depends on the visit order
        tt = np.arange(len(pts), dtype=float)
    try:
        wp = Signal2D(tt, np.asarray(pts))
    except SignalError as exc:  # pragma: no cover - defensive
        raise HysteresisError(f"could not build waypoint signal: {exc}") from exc
    return ReducedHistory(stack, wp)

"""Shared fixtures: reference foliations, random signal and pair factories."""
from __future__ import annotations

import numpy as np
import pytest

import hyst2d as h


# ---------------------------------------------------------------------------
# reference foliations


def make_std_linear() -> h.LinearFoliation:
    """Vertical line family on a square: labels c0 = x1, c1 = -x1."""
    return h.LinearFoliation(h.Rectangle(-2, 2, -2, 2), (1, 0),
                             (-1, 1), (-1, 1))


def make_wide_linear() -> h.LinearFoliation:
    """Same geometry with room for amplitude-2 inputs and unit thresholds."""
    return h.LinearFoliation(h.Rectangle(-3, 3, -3, 3), (1, 0),
                             (-2.5, 2.5), (-2.5, 2.5))


def make_std_radial() -> h.RadialFoliation:
    """Concentric circles on an annulus: c0 = r, c1 = 4 - r."""
    return h.RadialFoliation(h.Annulus((0, 0), 0.5, 3.0), (0, 0), 4.0,
                             (0.6, 2.9), (1.1, 3.4))


def make_tab_linear(n_nodes: int = 41) -> h.TabulatedFoliation:
    """Tabulated twin of the standard linear setup (exact under bilinear)."""
    x1 = np.linspace(-2.0, 2.0, n_nodes)
    x2 = np.linspace(-2.0, 2.0, n_nodes)
    c0 = np.broadcast_to(x1[:, None], (n_nodes, n_nodes)).copy()
    return h.TabulatedFoliation(h.Rectangle(-2, 2, -2, 2), x1, x2,
                                c0, -c0, (-1, 1), (-1, 1))


class OverclaimingLinear(h.LinearFoliation):
    """Deliberately broken admissibility: claims slightly-uncovering pairs.

    Pairs with curve gap in (-0.3, 0] leave an uncovered vertical strip of
    width |gap| yet are reported admissible, so a sampled cover check must
    catch the disagreement.
    """

    def is_admissible(self, p) -> bool:
        if not self.in_ranges(p):
            return False
        return p.c0 + p.c1 > self.field_const - 0.3


@pytest.fixture(scope="session")
def std_linear() -> h.LinearFoliation:
    return make_std_linear()


@pytest.fixture(scope="session")
def wide_linear() -> h.LinearFoliation:
    return make_wide_linear()


@pytest.fixture(scope="session")
def std_radial() -> h.RadialFoliation:
    return make_std_radial()


@pytest.fixture(scope="session")
def tab_linear() -> h.TabulatedFoliation:
    return make_tab_linear()


# ---------------------------------------------------------------------------
# random factories (shared by unit and acceptance tests)


def random_linear_signal(rng: np.random.Generator, nseg: int = 7) -> h.Signal2D:
    """Piecewise-linear wander inside the standard square."""
    pts = rng.uniform(-1.9, 1.9, size=(nseg + 1, 2))
    dts = rng.uniform(0.3, 1.0, size=nseg)
    t = np.concatenate([[0.0], np.cumsum(dts)])
    return h.Signal2D(t, pts)


def random_disk_signal(rng: np.random.Generator, nseg: int = 7) -> h.Signal2D:
    """Wander in a disk whose chords stay inside the standard annulus."""
    ang = rng.uniform(0.0, 2.0 * np.pi, size=nseg + 1)
    rad = 1.1 * np.sqrt(rng.uniform(0.0, 1.0, size=nseg + 1))
    pts = np.column_stack([1.7 + rad * np.cos(ang), rad * np.sin(ang)])
    dts = rng.uniform(0.3, 1.0, size=nseg)
    t = np.concatenate([[0.0], np.cumsum(dts)])
    return h.Signal2D(t, pts)


def random_linear_pairs(rng: np.random.Generator, n: int) -> np.ndarray:
    """Admissible (c0, c1) pairs for the standard linear setup, gap >= 0.05."""
    out = np.empty((0, 2))
    while len(out) < n:
        cand = rng.uniform(-0.95, 0.95, size=(4 * n, 2))
        keep = cand[:, 0] + cand[:, 1] >= 0.05
        out = np.vstack([out, cand[keep]])
    return out[:n]


def random_radial_pairs(rng: np.random.Generator, n: int) -> np.ndarray:
    """Admissible (c0, c1) pairs for the standard radial setup, gap >= 0.05."""
    out = np.empty((0, 2))
    while len(out) < n:
        up = rng.uniform(0.7, 2.7, size=4 * n)
        dn = rng.uniform(0.7, 2.7, size=4 * n)
        keep = up - dn >= 0.05
        cand = np.column_stack([up[keep], 4.0 - dn[keep]])
        out = np.vstack([out, cand])
    return out[:n]

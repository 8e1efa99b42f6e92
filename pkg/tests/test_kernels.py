"""Backend parity and guard-rail tests for the low-level kernels."""

import os
import subprocess
import sys

import numpy as np
import pytest

import hyst2d
from hyst2d import _kernels as kern
from hyst2d.errors import AdmissibilityViolation

needs_numba = pytest.mark.skipif(not kern.HAVE_NUMBA, reason="numba unavailable")


def _zigzag_inputs(n_legs=5, n_cells=12, rng=None):
    # alternating full sweeps; c1 stays below the k1 peak so every cell
    # switches on every leg
    t = np.arange(n_legs + 1, dtype=float)
    k0 = np.where(np.arange(n_legs + 1) % 2 == 0, -1.0, 1.0)
    k1 = -k0
    c0 = np.linspace(-0.8, 0.8, n_cells)
    c1 = 0.5 - 0.25 * c0
    w = np.ones(n_cells)
    xi = np.zeros(n_cells, dtype=np.int8)
    return t, k0, k1, c0, c1, xi, w


def test_numpy_drive_counts_every_leg():
    t, k0, k1, c0, c1, xi, w = _zigzag_inputs(n_legs=5)
    fs, hh, ec, et, ev = kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend="numpy")
    assert hh.shape == t.shape
    assert ec.size == 5 * c0.size
    assert np.array_equal(fs, np.ones_like(fs))
    assert hh[0] == 0.0 and hh[-1] == c0.size


@needs_numba
def test_backends_agree_exactly():
    rng = np.random.default_rng(7)
    t = np.cumsum(rng.uniform(0.01, 0.2, size=400))
    k0 = np.cumsum(rng.normal(0, 0.25, size=400))
    k0 -= k0.mean()
    k1 = -k0 + 0.1 * np.sin(np.linspace(0, 9, 400))
    c0 = rng.uniform(-1, 1, size=150)
    c1 = rng.uniform(-1, 1, size=150)
    # keep every cell covered along this trajectory: k0+k1 stays near 0.1*sin
    c1 = np.maximum(c1, -c0 + 0.6)
    xi = (rng.random(150) < 0.5).astype(np.int8)
    w = rng.uniform(0.1, 2.0, size=150)

    out_np = kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend="numpy")
    out_nb = kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend="numba")
    assert np.array_equal(out_nb[0], out_np[0])
    np.testing.assert_allclose(out_nb[1], out_np[1], rtol=0, atol=1e-12)
    assert np.array_equal(out_nb[2], out_np[2])
    np.testing.assert_allclose(out_nb[3], out_np[3], rtol=0, atol=1e-15)
    assert np.array_equal(out_nb[4], out_np[4])


@needs_numba
def test_numba_event_buffer_retry():
    # 300 cells x 12 full sweeps = 3600 events, above the 1024 starting cap
    t, k0, k1, c0, c1, xi, w = _zigzag_inputs(n_legs=12, n_cells=300)
    fs, hh, ec, et, ev = kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend="numba")
    assert ec.size == 12 * 300
    ref = kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend="numpy")
    assert np.array_equal(ec, ref[2])
    np.testing.assert_allclose(et, ref[3], rtol=0, atol=1e-15)
    assert np.array_equal(ev, ref[4])


@pytest.mark.parametrize("backend", ["numpy"] + (["numba"] if kern.HAVE_NUMBA else []))
def test_drive_rejects_uncovered_cell(backend):
    t = np.array([0.0, 1.0])
    k0 = np.array([0.0, 1.0])
    k1 = np.array([0.0, 1.0])
    c0 = np.array([0.5])
    c1 = np.array([0.5])
    xi = np.zeros(1, dtype=np.int8)
    w = np.ones(1)
    with pytest.raises(AdmissibilityViolation, match="outside both region closures"):
        kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend=backend)


@pytest.mark.parametrize("backend", ["numpy"] + (["numba"] if kern.HAVE_NUMBA else []))
def test_drive_rejects_bad_start(backend):
    # start point already violates both closures for the single cell
    t = np.array([0.0, 1.0])
    k0 = np.array([1.0, 0.0])
    k1 = np.array([1.0, 0.0])
    c0 = np.array([0.5])
    c1 = np.array([0.5])
    xi = np.zeros(1, dtype=np.int8)
    w = np.ones(1)
    with pytest.raises(AdmissibilityViolation, match="start point"):
        kern.drive_grid(t, k0, k1, c0, c1, xi, w, backend=backend)


def test_psi_sweep_matches_direct_count():
    rng = np.random.default_rng(11)
    c0 = rng.uniform(-1, 1, size=60)
    c1 = rng.uniform(-1, 1, size=60)
    wa = rng.uniform(0.1, 1.0, size=60)
    K0 = np.sort(rng.uniform(-1, 1, size=9))
    K1 = np.sort(rng.uniform(-1, 1, size=7))[::-1].copy()
    psi = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy")
    # direct double loop over the definition
    for a, ka in enumerate(K0):
        for b, kb in enumerate(K1):
            expect = wa[(c0 <= ka) & (c1 <= kb)].sum()
            assert psi[a, b] == pytest.approx(expect, abs=1e-12)


def test_psi_sweep_counts_exact_node_ties():
    K0 = np.array([0.3, 0.5])
    K1 = np.array([0.4, 0.2])
    psi = kern.psi_sweep(K0, K1, np.array([0.5]), np.array([0.2]), np.array([1.0]))
    np.testing.assert_allclose(psi, [[0.0, 0.0], [1.0, 1.0]], atol=0)


@needs_numba
def test_psi_sweep_backends_agree():
    rng = np.random.default_rng(13)
    c0 = rng.uniform(-1, 1, size=500)
    c1 = rng.uniform(-1, 1, size=500)
    wa = rng.uniform(0.0, 2.0, size=500)
    K0 = np.sort(rng.uniform(-1, 1, size=15))
    K1 = np.sort(rng.uniform(-1, 1, size=12))[::-1].copy()
    a = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy")
    b = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numba")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_psi_sweep_fractional_exact_area():
    # unit weight times cell area makes psi the covered area of the node
    # rectangle, so with fractional coverage it must equal the product of
    # the clipped node coordinates exactly, aligned or not
    n = 40
    h = 1.0 / n
    centers = (np.arange(n) + 0.5) * h
    C0, C1 = np.meshgrid(centers, centers, indexing="ij")
    c0 = C0.ravel()
    c1 = C1.ravel()
    wa = np.full(c0.size, h * h)
    K0 = np.array([-0.2, 0.137, 0.5, 0.912345, 1.3])
    K1 = np.array([1.2, 0.83, 0.41000001, 0.052, -0.1])
    psi = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy",
                         half0=0.5 * h, half1=0.5 * h)
    expect = np.outer(np.clip(K0, 0.0, 1.0), np.clip(K1, 0.0, 1.0))
    np.testing.assert_allclose(psi, expect, rtol=0, atol=1e-11)


def test_psi_sweep_fractional_matches_point_rule_on_edges():
    # nodes sitting exactly on cell edges leave no partial cells, so the
    # fractional rule reduces to the point rule; h = 1/8 keeps the edges
    # exact in binary
    rng = np.random.default_rng(29)
    n = 8
    h = 1.0 / n
    centers = (np.arange(n) + 0.5) * h
    C0, C1 = np.meshgrid(centers, centers, indexing="ij")
    c0 = C0.ravel()
    c1 = C1.ravel()
    wa = rng.uniform(0.1, 2.0, size=c0.size)
    K0 = np.array([0.25, 0.625, 1.0])
    K1 = np.array([0.875, 0.5, 0.125])
    point = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy")
    frac = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy",
                          half0=0.5 * h, half1=0.5 * h)
    np.testing.assert_allclose(frac, point, rtol=0, atol=1e-12)


@needs_numba
def test_psi_sweep_fractional_backends_agree():
    rng = np.random.default_rng(31)
    c0 = rng.uniform(-1, 1, size=400)
    c1 = rng.uniform(-1, 1, size=400)
    wa = rng.uniform(0.0, 2.0, size=400)
    K0 = np.sort(rng.uniform(-1.2, 1.2, size=14))
    K1 = np.sort(rng.uniform(-1.2, 1.2, size=11))[::-1].copy()
    a = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numpy",
                       half0=0.03, half1=0.05)
    b = kern.psi_sweep(K0, K1, c0, c1, wa, backend="numba",
                       half0=0.03, half1=0.05)
    # summation order differs; the 1/(4*half0*half1) scaling amplifies it
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_psi_sweep_rejects_mixed_halves():
    c0 = np.array([0.0])
    c1 = np.array([0.0])
    wa = np.array([1.0])
    K0 = np.array([0.1, 0.2])
    K1 = np.array([0.2, 0.1])
    with pytest.raises(ValueError, match="both axes"):
        kern.psi_sweep(K0, K1, c0, c1, wa, half0=0.1)
    with pytest.raises(ValueError, match="non-negative"):
        kern.psi_sweep(K0, K1, c0, c1, wa, half0=-0.1, half1=0.1)


def test_psi_sweep_rejects_unordered_nodes():
    c0 = np.array([0.0])
    c1 = np.array([0.0])
    wa = np.array([1.0])
    with pytest.raises(ValueError, match="strictly ordered"):
        kern.psi_sweep(np.array([0.2, 0.2]), np.array([0.5, 0.1]), c0, c1, wa)
    with pytest.raises(ValueError, match="strictly ordered"):
        kern.psi_sweep(np.array([0.1, 0.2]), np.array([0.1, 0.5]), c0, c1, wa)


def test_active_backend_validation():
    assert kern.active_backend("numpy") == "numpy"
    with pytest.raises(ValueError, match="unknown backend"):
        kern.active_backend("fortran")
    if kern.HAVE_NUMBA:
        assert kern.active_backend(None) == "numba"
        assert kern.active_backend("numba") == "numba"


def test_env_flag_disables_numba():
    code = (
        "import numpy as np\n"
        "from hyst2d import _kernels as k\n"
        "assert not k.HAVE_NUMBA\n"
        "assert k.active_backend(None) == 'numpy'\n"
        "try:\n"
        "    k.active_backend('numba')\n"
        "except RuntimeError:\n"
        "    pass\n"
        "else:\n"
        "    raise SystemExit('numba backend should be refused')\n"
        "t = np.array([0.0, 1.0, 2.0])\n"
        "k0 = np.array([-1.0, 1.0, -1.0])\n"
        "k1 = -k0\n"
        "fs, hh, ec, et, ev = k.drive_grid(t, k0, k1, np.array([0.0]),\n"
        "                                  np.array([0.5]), np.zeros(1, np.int8),\n"
        "                                  np.ones(1))\n"
        "print(','.join(f'{x:.12g}' for x in hh))\n"
    )
    env = dict(os.environ, HYST2D_NO_NUMBA="1")
    res = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert res.returncode == 0, res.stderr
    t = np.array([0.0, 1.0, 2.0])
    k0 = np.array([-1.0, 1.0, -1.0])
    ref = kern.drive_grid(
        t, k0, -k0, np.array([0.0]), np.array([0.5]), np.zeros(1, np.int8),
        np.ones(1), backend="numpy",
    )[1]
    got = np.array([float(x) for x in res.stdout.strip().split(",")])
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_apply_grid_backend_override(std_linear):
    grid = hyst2d.build_grid(std_linear, 12, 12)
    u = hyst2d.Signal2D.from_waypoints(
        [(-1.5, 0.0), (1.2, 0.5), (-0.8, -0.4), (0.9, 0.1)]
    )
    out_a = hyst2d.apply_grid(grid, u, backend="numpy")
    out_b = hyst2d.apply_grid(grid, u)
    np.testing.assert_allclose(out_a.H, out_b.H, atol=1e-12)
    assert np.array_equal(out_a.final_state, out_b.final_state)
    assert np.array_equal(out_a.ev_cell, out_b.ev_cell)

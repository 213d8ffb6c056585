import numpy as np
import pytest

from toricasd.contour import (
    CutViolation,
    DegeneratePoint,
    GEvaluator,
    NonConvergence,
    branch_factors,
    branch_sqrt_pair,
    eval_G_jet,
    einstein_pde_residual,
    g_consistency_residual,
)
from toricasd.coords import JoycePoint, joyce_to_twistor
from toricasd.series import ParitySeries, solve_phi2

ZERO = (ParitySeries.odd([0.0]), ParitySeries.odd([0.0]))
ZIZ = (ParitySeries.odd([1.0]), ParitySeries.odd([1j], radius=1.0))


def test_branch_factor_examples():
    rf, sf = branch_factors(0.5, 0.0, 25)
    assert rf == pytest.approx(0.5)
    rf, sf = branch_factors(0.5, 0.04, 25)
    assert rf == pytest.approx(0.5 * np.sqrt(0.84))
    assert sf == pytest.approx(1j * 5 * np.sqrt(0.99))
    assert branch_sqrt_pair(0.5, 0.04, 25) == pytest.approx(rf * sf)
    with pytest.raises(CutViolation):
        branch_factors(0.1, 0.04, 25)
    with pytest.raises(CutViolation):
        branch_factors(6.0, 0.04, 25)


def test_branch_product_is_a_square_root():
    z = 0.6 * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
    r, s = 0.1 + 0.05j, 4 - 1j
    v = branch_sqrt_pair(z, r, s)
    assert np.allclose(v * v, (z * z - r) * (z * z - s))
    # continuity around the circle: adjacent nodes differ by a small amount
    assert np.max(np.abs(np.diff(np.r_[v, v[0]]))) < 0.3


def test_zero_seed_and_linearity():
    gj = eval_G_jet(GEvaluator(ZERO), 0.04, 25, 3)
    assert all(np.all(v == 0) for v in gj.partials.values())
    double = (ZIZ[0] * 2, ZIZ[1] * 2)
    a = eval_G_jet(GEvaluator(ZIZ), 0.1 + 0.02j, 9 - 2j, 2)
    b = eval_G_jet(GEvaluator(double), 0.1 + 0.02j, 9 - 2j, 2)
    for k in a.partials:
        assert np.allclose(b.partials[k], 2 * a.partials[k], atol=1e-15)


def test_node_doubling_and_contour_independence():
    ref = eval_G_jet(GEvaluator(ZIZ, nodes=4096), 0.04, 25, 3)
    fine = eval_G_jet(GEvaluator(ZIZ, nodes=8192), 0.04, 25, 3)
    assert max(np.max(np.abs(ref.partials[k] - fine.partials[k])) for k in ref.partials) < 1e-10
    for rho in np.linspace(0.3, 0.6, 4):
        other = eval_G_jet(GEvaluator(ZIZ, rho=rho), 0.04, 25, 3)
        assert max(np.max(np.abs(ref.partials[k] - other.partials[k])) for k in ref.partials) < 1e-9


def test_error_estimate_decreases_geometrically():
    phi1 = ParitySeries.odd([1.0, 0.3, 0.1])
    ev = (phi1, solve_phi2(phi1, 100))
    from toricasd.contour import _partials

    r, s = 0.2, 5.0
    ref = _partials(GEvaluator(ev), r, s, 4096, 1)[(1, 0)]
    errs = [np.max(np.abs(_partials(GEvaluator(ev), r, s, n, 1)[(1, 0)] - ref)) for n in (8, 16, 32)]
    assert errs[1] < 0.5 * errs[0] and errs[2] < 0.5 * errs[1]


def test_admissibility():
    ev = GEvaluator(ZIZ)
    assert ev.admissible(0.04, 25)
    assert not ev.admissible(0.9, 1.1)
    with pytest.raises(CutViolation):
        eval_G_jet(GEvaluator(ZIZ, rho=0.1), 0.04, 25)
    with pytest.raises(ValueError):
        GEvaluator(ZIZ, nodes=100)


def test_non_convergence_reported():
    ev = GEvaluator(ZIZ, nodes=64, max_nodes=128, tol=1e-30)
    with pytest.raises(NonConvergence):
        eval_G_jet(ev, 0.04, 25)


def test_second_order_pde():
    ev = GEvaluator(ZIZ)
    assert g_consistency_residual(GEvaluator(ZERO), 0.04, 25) == 0
    assert g_consistency_residual(ev, 0.04, 25) < 1e-8
    with pytest.raises(DegeneratePoint):
        g_consistency_residual(ev, 0.3, 0.3)


def test_second_order_pde_random_polynomial(rng):
    c = (rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4)) * 0.5
    phi1 = ParitySeries.odd(c)
    ev = GEvaluator((phi1, solve_phi2(phi1, 100)))
    for _ in range(5):
        p = JoycePoint(rng.uniform(-0.5, 0.5), rng.uniform(1.3, 3))
        assert g_consistency_residual(ev, *joyce_to_twistor(p)) < 1e-8


def test_einstein_pde_examples():
    assert einstein_pde_residual(GEvaluator(ZIZ), 0.04, 25) < 1e-9
    assert einstein_pde_residual(GEvaluator(ZERO), 0.04, 25) == 0
    broken = (ParitySeries.odd([1.0]), ParitySeries.odd([0.0]))
    off_axis = joyce_to_twistor(JoycePoint(0.3, 1.5))
    assert einstein_pde_residual(GEvaluator(broken), *off_axis) > 1e-3


def test_asymptotics_in_s():
    ev = GEvaluator(ZIZ)
    r = 0.04
    a_scaled, b_scaled = [], []
    for s in (1e2, 1e3, 1e4):
        gj = eval_G_jet(ev, r, s, 1)
        a_scaled.append(np.max(np.abs(gj.A)) * s**0.5)
        b_scaled.append(np.max(np.abs(gj.B)) * s**1.5)
    assert max(a_scaled) < 10 * min(a_scaled)
    assert max(b_scaled) < 10 * min(b_scaled)


def test_finite_difference_partials():
    ev = GEvaluator(ZIZ)
    r, s, h = 0.1 + 0.02j, 6 - 1j, 1e-4
    gj = eval_G_jet(ev, r, s, 2)

    def G(rr, ss):
        return eval_G_jet(ev, rr, ss, 0).values

    dr = (G(r + h, s) - G(r - h, s)) / (2 * h)
    ds = (G(r, s + h) - G(r, s - h)) / (2 * h)
    drs = (G(r + h, s + h) - G(r + h, s - h) - G(r - h, s + h) + G(r - h, s - h)) / (4 * h * h)
    for ana, num in ((gj.A, dr), (gj.B, ds), (gj.partials[(1, 1)], drs)):
        assert np.max(np.abs(ana - num)) < 1e-6 * np.max(np.abs(ana))

"""Acceptance criteria 1-11.

Each test times its own work, appends one ``criterion N PASS|FAIL`` line to the
terminal summary and asserts the thresholds, runtime included.
"""
import time

import numpy as np

from conftest import ACCEPTANCE, GRID
from toricasd.contour import GEvaluator, einstein_pde_residual, eval_G_jet, g_consistency_residual
from toricasd.coords import (
    JoycePoint,
    cp_residual,
    f_jet_from_g,
    joyce_to_twistor,
    mapped_einstein_residual,
    pq_jet,
    twistor_to_joyce,
)
from toricasd.curvature import curvature_report, einstein_gauge
from toricasd.joyce import MetricJet, SeedPipeline, builtin_seeds, joyce_residual, metric_at
from toricasd.series import ParitySeries, ode_residual, solve_phi2, validate_seed
from toricasd.twistor import STANDARD_FRAME, FramePoint, bracket_coefficient, involution_defects, passing_kappa


def record(n, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    line = f"criterion {n} {'PASS' if ok else 'FAIL'} {title}: {detail} ({elapsed:.2f} s, budget {budget:g} s)"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def disc_points(rng, radius, n):
    return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def joyce_points(rng, n, off_axis=0.0):
    xs = rng.uniform(off_axis, 0.5, n) * rng.choice([-1, 1], n)
    return [JoycePoint(float(x), float(y)) for x, y in zip(xs, rng.uniform(1.3, 3.0, n))]


ZIZ = (ParitySeries.odd([1.0]), ParitySeries.odd([1j]))


def test_criterion_1_ode_exactness():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        k = rng.integers(1, 6)  # odd powers z, z^3, ..., z^9
        phi1 = ParitySeries.odd(disc_points(rng, 1.0, k))
        phi2 = solve_phi2(phi1, 60)
        worst = max(worst, ode_residual(phi1, phi2, disc_points(rng, 0.5, 50)))
    elapsed = time.perf_counter() - t0
    assert record(1, "ODE solver exactness", worst < 1e-12, f"max residual {worst:.2e}", elapsed, 1)


def test_criterion_2_closed_form_pin():
    t0 = time.perf_counter()
    phi2 = solve_phi2(ParitySeries.odd([1.0]), 40)
    exact_z = phi2.coefficients[0] == 1j and all(c == 0 for c in phi2.coefficients[1:])
    # i (3z - 4 artanh z), artanh z = sum z^(2k+1) / (2k+1)
    k = np.arange(40)
    target = 1j * (np.where(k == 0, 3.0, 0.0) - 4.0 / (2 * k + 1))
    err = float(np.max(np.abs(np.asarray(solve_phi2(ParitySeries.odd([3.0]), 40).coefficients[:40]) - target)))
    elapsed = time.perf_counter() - t0
    ok = exact_z and err < 1e-14
    assert record(2, "closed-form pin", ok, f"phi1=z exact: {exact_z}, 3z coefficient error {err:.1e}", elapsed, 1)


def test_criterion_3_quadrature():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()

    def gap(a, b):
        return max(float(np.max(np.abs(a.partials[k] - b.partials[k]))) for k in a.partials)

    ref = eval_G_jet(GEvaluator(ZIZ, nodes=4096), 0.04, 25, 3)
    doubling = gap(ref, eval_G_jet(GEvaluator(ZIZ, nodes=8192), 0.04, 25, 3))
    rho_gap = max(gap(ref, eval_G_jet(GEvaluator(ZIZ, rho=rho), 0.04, 25, 3)) for rho in np.linspace(0.3, 0.6, 7))
    ev = GEvaluator(ZIZ)
    pde = [g_consistency_residual(ev, 0.04, 25)]
    for p in joyce_points(rng, 20):
        r, s = joyce_to_twistor(p)
        assert ev.admissible(r, s)
        pde.append(g_consistency_residual(ev, r, s))
    elapsed = time.perf_counter() - t0
    ok = doubling < 1e-9 and rho_gap < 1e-9 and max(pde) < 1e-8
    detail = f"doubling {doubling:.1e}, rho sweep {rho_gap:.1e}, max PDE residual {max(pde):.1e}"
    assert record(3, "quadrature correctness", ok, detail, elapsed, 5)


def test_criterion_4_einstein_pde_separation():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    # the broken seed's residual vanishes on x = 0 by symmetry, so sample off the axis
    pts = [joyce_to_twistor(p) for p in joyce_points(rng, 10, off_axis=0.15)]
    good = 0.0
    for c in ([1.0], [3.0], [1.0, 0.2]):
        phi1 = ParitySeries.odd(c)
        ev = GEvaluator((phi1, solve_phi2(phi1, 120)))
        good = max(good, max(einstein_pde_residual(ev, r, s) for r, s in pts))
    broken = GEvaluator((ParitySeries.odd([1.0]), ParitySeries.odd([0.0])))
    bad = min(einstein_pde_residual(broken, r, s) for r, s in pts)
    elapsed = time.perf_counter() - t0
    detail = f"ODE seeds max {good:.1e}, broken seed min {bad:.1e}"
    assert record(4, "Einstein PDE separation", good < 1e-9 and bad > 1e-3, detail, elapsed, 5)


def test_criterion_5_equivalence_chain():
    t0 = time.perf_counter()
    sp = SeedPipeline.from_phi1(ParitySeries.odd([1.0]), 80)
    cp, mapped, gap = [], [], []
    for x, y in GRID:
        p = JoycePoint(x, y)
        gj = sp.g_jet(p, 1)
        a = cp_residual(f_jet_from_g(gj, p.zeta, p.xi), p)
        b = mapped_einstein_residual(gj, p)
        cp.append(a)
        mapped.append(b)
        gap.append(abs(a - b))
    elapsed = time.perf_counter() - t0
    ok = max(gap) < 1e-7 and max(cp) < 1e-7 and max(mapped) < 1e-7
    detail = f"max cp {max(cp):.1e}, max mapped {max(mapped):.1e}, max gap {max(gap):.1e}"
    assert record(5, "equivalence chain", ok, detail, elapsed, 10)


def _bumped(mj):
    # g_u1u1 raised by 1% of its value, derivatives untouched
    g = mj.g.copy()
    g[2, 2] *= 1.01
    return MetricJet.from_arrays(mj.point, g, mj.dg, mj.d2g)


def test_criterion_6_joyce_consequence():
    t0 = time.perf_counter()
    builtins = {}
    for name, F in builtin_seeds().items():
        if all(joyce_residual(pq_jet(F.f_jet(JoycePoint(x, y), 2), JoycePoint(x, y))) < 1e-12 for x, y in GRID):
            builtins[name] = F
    fields = {**builtins, "pipeline z": SeedPipeline.from_phi1(ParitySeries.odd([1.0]), 80).field()}
    asd, bumped = 0.0, {}
    for name, F in fields.items():
        for x, y in GRID:
            mj = metric_at(F, JoycePoint(x, y), 2)
            asd = max(asd, curvature_report(mj).asd_residual)
            b = curvature_report(_bumped(mj)).asd_residual
            bumped[name] = min(bumped.get(name, np.inf), b)
    elapsed = time.perf_counter() - t0
    # the bump is judged on the conformally flat H3xR metric: on a metric with W- != 0 a constant
    # 1% bump moves min(W+, W-) / (W+ + W-) only by O(1e-3), which the other entries show
    ok = len(builtins) == len(builtin_seeds()) and asd < 1e-6 and bumped["H3xR"] > 1e-2
    others = ", ".join(f"{k} {v:.1e}" for k, v in bumped.items() if k != "H3xR")
    detail = (
        f"{len(builtins)} builtin pairs + pipeline max asd {asd:.1e}; 1%-bumped H3xR min {bumped['H3xR']:.2f} "
        f"(other bases: {others})"
    )
    assert record(6, "Joyce consequence", ok, detail, elapsed, 30)


def _hyperbolic(p):
    return MetricJet.from_function(
        p, lambda X, Y: [[(Y * Y).reciprocal() if i == j else 0.0 for j in range(4)] for i in range(4)], 2
    )


def test_criterion_7_curvature_oracles():
    t0 = time.perf_counter()
    p = JoycePoint(0, 2)
    flat = curvature_report(MetricJet.from_arrays(p, np.eye(4), np.zeros((2, 4, 4)), np.zeros((3, 4, 4))))
    flat_max = max(flat.riemann_norm, abs(flat.scalar), flat.ricci0_norm, flat.wplus_norm, flat.wminus_norm)
    hyp = curvature_report(_hyperbolic(p))
    h3 = curvature_report(metric_at(builtin_seeds()["H3xR"], p, 2))
    elapsed = time.perf_counter() - t0
    ok = (
        flat_max < 1e-12
        and abs(hyp.scalar + 12) < 1e-10
        and hyp.ricci0_norm < 1e-10
        and max(hyp.wplus_norm, hyp.wminus_norm) < 1e-10
        and abs(h3.scalar + 6) < 1e-6
        and min(h3.wplus_norm, h3.wminus_norm) < 1e-8
    )
    detail = (
        f"flat max {flat_max:.1e}; hyperbolic scalar {hyp.scalar:.12g}, ricci0 {hyp.ricci0_norm:.1e}; "
        f"H3xR scalar {h3.scalar:.12g}, min Weyl {min(h3.wplus_norm, h3.wminus_norm):.1e}"
    )
    assert record(7, "curvature oracles", ok, detail, elapsed, 5)


INSIDE = ([1.0], [0.5], [1.5], [1 + 0.5j], [0.3, 0.1])
OUTSIDE = ([3.0], [-0.5], [2.5], [1 + 1.5j], [-1.0, 0.2])


def _gauge_grid(sp):
    out = [einstein_gauge(metric_at(sp.field(), JoycePoint(x, y), 3)) for x, y in GRID]
    return [g.residual for g in out], {g.scalar_sign for g in out}


def test_criterion_8_einstein_certification():
    t0 = time.perf_counter()
    pipes = {tuple(c): SeedPipeline.from_phi1(ParitySeries.odd(c), 80) for c in (*INSIDE, *OUTSIDE, [1.0, 0.2])}
    good, bad = 0.0, np.inf
    for c in ([1.0], [3.0], [1.0, 0.2]):
        sp = pipes[tuple(c)]
        good = max(good, max(_gauge_grid(sp)[0]))
        perturbed = SeedPipeline.from_phi1(sp.phi1, phi2=sp.phi2 + ParitySeries.odd([0, 0.05]))
        bad = min(bad, min(_gauge_grid(perturbed)[0]))
    mapping, constant, sweep_residual = {}, True, 0.0
    for c in (*INSIDE, *OUTSIDE):
        sp = pipes[tuple(c)]
        rep = validate_seed(sp.phi1, sp.phi2)
        residuals, signs = _gauge_grid(sp)
        sweep_residual = max(sweep_residual, max(residuals))
        constant &= len(signs) == 1 and rep.nondegenerate
        mapping.setdefault(rep.component, set()).update(signs)
    elapsed = time.perf_counter() - t0
    separates = set(mapping) == {"inside", "outside"} and all(len(v) == 1 for v in mapping.values())
    separates = separates and mapping["inside"] != mapping["outside"]
    ok = good < 1e-6 and bad > 1e-3 and constant and separates and sweep_residual < 1e-6
    detail = (
        f"max residual {good:.1e}, perturbed min {bad:.1e}, sweep max {sweep_residual:.1e}, "
        f"signs {dict(sorted((k, sorted(v)) for k, v in mapping.items()))}"
    )
    assert record(8, "Einstein certification", ok, detail, elapsed, 120)


def test_criterion_9_twistor_algebra():
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    defect, kappas = 0.0, set()
    for c in ([1.0], [3.0], [1.0, 0.2], [0.5 + 0.3j, -0.1]):
        phi1 = ParitySeries.odd(c)
        phi = (phi1, solve_phi2(phi1, 120))
        for z in disc_points(rng, 0.6, 20):
            fp = FramePoint(complex(z), phi=phi)
            d = involution_defects(fp)
            defect = max(defect, d["product"], d["det"])
            kappas.add(passing_kappa(fp))
    z = disc_points(rng, 1.0, 12)
    vals = np.array([bracket_coefficient(STANDARD_FRAME, complex(w)) for w in z])
    bracket = float(np.max(np.abs(vals - 4j * z)))
    elapsed = time.perf_counter() - t0
    ok = defect < 1e-10 and bracket < 1e-12 and len(kappas) == 1 and None not in kappas
    detail = f"involution defect {defect:.1e}, bracket misfit {bracket:.1e}, passing kappa {sorted(kappas, key=str)}"
    assert record(9, "twistor algebra", ok, detail, elapsed, 1)


def test_criterion_10_coordinate_dictionary():
    rng = np.random.default_rng(10)
    t0 = time.perf_counter()
    trip, slice_defect = 0.0, 0.0
    for p in (JoycePoint(float(x), float(y)) for x, y in zip(rng.uniform(-3, 3, 200), rng.uniform(0.05, 3, 200))):
        r, s = joyce_to_twistor(p)
        slice_defect = max(slice_defect, abs(s * np.conj(r) - 1))
        q = twistor_to_joyce(r, s).point
        trip = max(trip, abs(complex(q.x, q.y) - complex(p.x, p.y)) / max(1.0, abs(complex(p.x, p.y))))
    r, s = joyce_to_twistor(JoycePoint(0, 2))
    back = twistor_to_joyce(1 / 3, 3).point
    worked = max(abs(r - 1 / 3), abs(s - 3), abs(back.x), abs(back.y - 2))
    elapsed = time.perf_counter() - t0
    ok = trip < 1e-14 and slice_defect < 1e-14 and worked < 1e-14
    detail = f"round trip {trip:.1e}, slice {slice_defect:.1e}, worked values {worked:.1e}"
    assert record(10, "coordinate dictionary", ok, detail, elapsed, 1)


def _rel(ana, num):
    ana, num = np.asarray(ana), np.asarray(num)
    return float(np.max(np.abs(ana - num)) / max(np.max(np.abs(ana)), 1e-300))


def test_criterion_11_jets_vs_finite_differences():
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    sp = SeedPipeline.from_phi1(ParitySeries.odd([1.0, 0.2]), 80)
    F = sp.field()
    worst = {"G": 0.0, "PQ": 0.0, "metric": 0.0}
    for p in joyce_points(rng, 10, off_axis=0.05):
        # G partials of every order up to 3 against differences of the order below
        r, s = joyce_to_twistor(p)
        hr, hs = 1e-4 * abs(r), 1e-4 * abs(s)
        gj = eval_G_jet(sp.evaluator, r, s, 3)
        lower = {d: eval_G_jet(sp.evaluator, r + d[0], s + d[1], 2) for d in ((hr, 0), (-hr, 0), (0, hs), (0, -hs))}
        for (m, n), v in gj.partials.items():
            if m > 0:
                num = (lower[(hr, 0)].partials[(m - 1, n)] - lower[(-hr, 0)].partials[(m - 1, n)]) / (2 * hr)
            elif n > 0:
                num = (lower[(0, hs)].partials[(m, n - 1)] - lower[(0, -hs)].partials[(m, n - 1)]) / (2 * hs)
            else:
                continue
            worst["G"] = max(worst["G"], _rel(v, num))

        # F -> (P, Q) transport and metric derivatives, both in (x, y)
        h = 1e-4
        pq = pq_jet(F.f_jet(p, 3), p)
        mj = metric_at(F, p, 3)
        shifted = {}
        for d in ((h, 0), (-h, 0), (0, h), (0, -h)):
            q = JoycePoint(p.x + d[0], p.y + d[1])
            shifted[d] = (pq_jet(F.f_jet(q, 2), q), metric_at(F, q, 2))

        def diff(get, axis):
            a, b = ((h, 0), (-h, 0)) if axis == 0 else ((0, h), (0, -h))
            return (get(*shifted[a]) - get(*shifted[b])) / (2 * h)

        for axis in (0, 1):
            num = diff(lambda j, m: np.r_[j.P, j.Q], axis)
            worst["PQ"] = max(worst["PQ"], _rel(np.r_[pq.dP[:, axis], pq.dQ[:, axis]], num))
            num = diff(lambda j, m: np.r_[j.dP.ravel(), j.dQ.ravel()], axis)
            ana = np.r_[pq.d2P[:, [axis, axis + 1]].ravel(), pq.d2Q[:, [axis, axis + 1]].ravel()]
            worst["PQ"] = max(worst["PQ"], _rel(ana, num))
            worst["metric"] = max(worst["metric"], _rel(mj.dg[axis], diff(lambda j, m: m.g, axis)))
            worst["metric"] = max(worst["metric"], _rel(mj.d2g[axis : axis + 2], diff(lambda j, m: m.dg, axis)))
            worst["metric"] = max(worst["metric"], _rel(mj.d3g[axis : axis + 3], diff(lambda j, m: m.d2g, axis)))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-6
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert record(11, "jets vs finite differences", ok, detail, elapsed, 30)

"""Walk one seed through the whole construction.

Start from an odd seed phi1, solve for phi2, build the contour potentials,
move to Joyce's harmonic pair and metric, and certify that the metric is
anti-self-dual and conformally Einstein at a few points.

Run with ``python3 demos/einstein_pipeline.py [c1 c3 ...]``; the arguments are
the odd Taylor coefficients of phi1 (default: phi1 = z).
"""
import sys

import numpy as np

from toricasd.coords import JoycePoint, cp_residual, pq_jet
from toricasd.curvature import curvature_report, einstein_gauge
from toricasd.joyce import SeedPipeline, joyce_residual, metric_at
from toricasd.series import ParitySeries, ode_residual, solve_phi2, validate_seed

coeffs = [complex(c) for c in sys.argv[1:]] or [1.0]
phi1 = ParitySeries.odd(coeffs)
phi2 = solve_phi2(phi1, 80)

# seed: the ODE holds to rounding, and the component decides the curvature sign
z = 0.4 * np.exp(2j * np.pi * np.arange(8) / 8)
report = validate_seed(phi1, phi2)
print(f"phi2 leading coefficients: {np.round(phi2.coefficients[:3], 6)}")
print(f"ODE residual on |z| = 0.4: {ode_residual(phi1, phi2, z):.2e}")
print(f"component: {report.component}, nondegenerate: {report.nondegenerate}")

sp = SeedPipeline.from_phi1(phi1, phi2=phi2)
F = sp.field()

print()
print(f"{'x':>5} {'y':>5} {'joyce':>9} {'cp':>9} {'scalar':>10} {'asd':>9} {'gauge':>9}  Einstein scalar sign")
for x, y in [(0.0, 2.0), (0.2, 1.6), (-0.3, 2.4)]:
    p = JoycePoint(x, y)
    fj = F.f_jet(p, 4)
    pq = pq_jet(fj, p)
    mj = metric_at(F, p, 3)
    rep = curvature_report(mj)
    gauge = einstein_gauge(mj)
    print(
        f"{x:5.2f} {y:5.2f} {joyce_residual(pq):9.1e} {cp_residual(fj, p):9.1e} "
        f"{rep.scalar:10.4f} {rep.asd_residual:9.1e} {gauge.residual:9.1e}  {gauge.scalar_sign}"
    )

# a seed that breaks the ODE loses the Einstein gauge but stays anti-self-dual
bent = SeedPipeline.from_phi1(phi1, phi2=phi2 + ParitySeries.odd([0, 0.05]))
mj = metric_at(bent.field(), JoycePoint(0.1, 2.0), 3)
print()
print("phi2 + 0.05 z^3 at (0.1, 2):")
print(f"  asd residual   {curvature_report(mj).asd_residual:.1e}")
print(f"  gauge residual {einstein_gauge(mj).residual:.1e}")

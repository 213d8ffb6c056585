"""Coordinates and the gluing of twistor charts.

Shows the Joyce <-> twistor dictionary on a few points and checks that the
gluing map built from an ODE seed is an involution preserving the contact
distribution, while a broken seed is not.
"""
import numpy as np

from toricasd.coords import JoycePoint, joyce_to_twistor, twistor_to_joyce
from toricasd.series import ParitySeries, solve_phi2
from toricasd.twistor import FramePoint, STANDARD_FRAME, bracket_coefficient, involution_defects, span_residual

print("Joyce point -> (r, s) -> back")
for x, y in [(0.0, 2.0), (0.5, 1.5), (-1.0, 0.3)]:
    r, s = joyce_to_twistor(JoycePoint(x, y))
    back = twistor_to_joyce(r, s).point
    print(f"  ({x:5.2f}, {y:4.2f})  r = {r:.4f}  s = {s:.4f}  s conj(r) - 1 = {abs(s * np.conj(r) - 1):.0e}"
          f"  back ({back.x:.3f}, {back.y:.3f})")

phi1 = ParitySeries.odd([1.0, 0.2])
good = (phi1, solve_phi2(phi1, 120))
broken = (phi1, good[1] + ParitySeries.odd([0, 0.1]))

print()
print(f"{'seed':>7} {'z':>14} {'A(z)A(-z)-I':>12} {'det A + 1':>10} {'span k=+2':>10} {'span k=-2':>10}")
for label, phi in (("ODE", good), ("broken", broken)):
    for z in (0.3, 0.2 + 0.3j):
        fp = FramePoint(z, phi=phi)
        d = involution_defects(fp)
        print(f"{label:>7} {z!s:>14} {d['product']:12.1e} {d['det']:10.1e} "
              f"{span_residual(fp, 2.0, 'both'):10.1e} {span_residual(fp, -2.0, 'both'):10.1e}")

print()
print("[V1, V2] has d/dz coefficient q1 q2' - q2 q1' =", bracket_coefficient(STANDARD_FRAME, 0.5), "at z = 0.5 (4iz)")

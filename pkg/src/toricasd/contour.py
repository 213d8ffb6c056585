"""Contour-integral evaluation of the twistor potentials G1, G2.

For a seed ``phi = (phi1, phi2)`` and twistor coordinates ``(r, s)``::

    G_i(r, s) = -1/(4 pi i) * oint_C  z phi_i(z) / ((z^2 - r)^(1/2) (z^2 - s)^(1/2)) dz

``C`` has one component around the cut joining ``+-sqrt(r)`` and one around
the cut through infinity joining ``+-sqrt(s)``.  Both are realised as
circles in the annulus between the cuts:

* the inner circle ``|z| = rho`` integrates ``phi`` itself;
* the outer circle ``|z| = rho_outer`` integrates the reflected seed
  ``conj(phi(-1/conj(z)))``, which is how the seed looks in the chart about
  ``z = infinity`` under the antipodal map.  It enters with the opposite
  orientation, so ``oint_C dz / sqrt(...) = 0``.

The outer piece is not optional: without it the identity behind
:func:`einstein_pde_residual` picks up a multiple of the complete elliptic
integral ``oint dz / sqrt(...)``.

Both integrands are analytic and periodic on their circles, so the trapezoidal
rule converges geometrically; node doubling provides the error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .series import ParitySeries


class CutViolation(ValueError):
    """The quadrature circle does not separate the branch cuts."""


class NonConvergence(ArithmeticError):
    """Node doubling did not settle within the node budget."""


class DegeneratePoint(ValueError):
    """``r`` and ``s`` are too close for the requested identity."""


SIGMA = 1j  # sign convention of the s-factor


def branch_factors(z, r: complex, s: complex):
    """The two square-root factors ``(z^2 - r)^(1/2)`` and ``(z^2 - s)^(1/2)``.

    The r-factor is ``z sqrt(1 - r/z^2)`` (cut on the segment between
    ``+-sqrt(r)``); the s-factor is ``i sqrt(s) sqrt(1 - z^2/s)`` (cut through
    infinity).  Requires ``|r| < |z|^2 < |s|``.
    """
    z = np.asarray(z, dtype=complex)
    z2 = z * z
    a2 = np.abs(z2)
    if np.any(a2 <= abs(r)) or np.any(a2 >= abs(s)):
        raise CutViolation(f"need |r| < |z|^2 < |s| (r={r}, s={s})")
    rf = z * np.sqrt(1 - r / z2)
    sf = SIGMA * np.sqrt(complex(s)) * np.sqrt(1 - z2 / s)
    return rf, sf


def branch_sqrt_pair(z, r: complex, s: complex):
    """``(z^2 - r)^(1/2) (z^2 - s)^(1/2)`` on the branch fixed by :func:`branch_factors`."""
    rf, sf = branch_factors(z, r, s)
    return rf * sf


def reflect(f):
    """The reflected function ``z -> conj(f(-1/conj(z)))``."""

    def g(z):
        z = np.asarray(z, dtype=complex)
        return np.conj(f(-1.0 / np.conj(z)))

    return g


def _dfact_ratio(m: int) -> float:
    # (2m-1)!! / 2^m
    out = 1.0
    for j in range(1, m + 1):
        out *= (2 * j - 1) / 2
    return out


@dataclass(frozen=True)
class GJet:
    """Mixed ``(r, s)`` partials of ``(G1, G2)``; ``partials[(m, n)]`` is a length-2 array."""

    point: tuple[complex, complex]
    partials: dict
    error_estimate: float
    nodes: int = 0

    @property
    def order(self) -> int:
        return max(m + n for m, n in self.partials)

    @property
    def values(self) -> np.ndarray:
        return self.partials[(0, 0)]

    @property
    def A(self) -> np.ndarray:
        return self.partials[(1, 0)]

    @property
    def B(self) -> np.ndarray:
        return self.partials[(0, 1)]


@dataclass(frozen=True)
class GEvaluator:
    """Quadrature set-up for the G potentials of a seed.

    ``rho`` and ``rho_outer`` are chosen per point when left as ``None``.
    ``safety`` is the margin kept between each circle and the nearest
    singularity (cut or edge of the seed's disc).
    """

    phi: tuple[ParitySeries, ParitySeries]
    nodes: int = 512
    rho: float | None = None
    rho_outer: float | None = None
    safety: float = 0.9
    tol: float = 1e-11
    max_nodes: int = 1 << 15
    outer: bool = True
    _funcs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nodes < 64 or self.nodes & (self.nodes - 1):
            raise ValueError("nodes must be a power of two, at least 64")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")
        object.__setattr__(self, "_funcs", tuple(self.phi))

    @property
    def radius(self) -> float:
        return min(p.radius for p in self.phi)

    def circles(self, r: complex, s: complex) -> tuple[float, float | None]:
        """Radii of the inner and outer circles at ``(r, s)``; raises :class:`CutViolation`."""
        k = self.safety
        lo = math.sqrt(abs(r))
        hi_s = math.sqrt(abs(s)) if math.isfinite(abs(s)) else math.inf
        lo_in, hi_in = lo / k, k * min(self.radius, hi_s)
        rho = self.rho if self.rho is not None else _midpoint(lo, min(self.radius, hi_s))
        if not lo_in < rho < hi_in:
            raise CutViolation(
                f"inner circle rho={rho:.4g} not inside the admissible window "
                f"({lo_in:.4g}, {hi_in:.4g}) at r={r}, s={s}"
            )
        if not self.outer:
            return rho, None
        inner_edge = max(lo, 1.0 / self.radius)
        lo_out, hi_out = inner_edge / k, k * hi_s
        rho2 = self.rho_outer if self.rho_outer is not None else _midpoint(inner_edge, hi_s)
        if not lo_out < rho2 < hi_out:
            raise CutViolation(
                f"outer circle rho={rho2:.4g} not inside the admissible window "
                f"({lo_out:.4g}, {hi_out:.4g}) at r={r}, s={s}"
            )
        return rho, rho2

    def admissible(self, r: complex, s: complex) -> bool:
        try:
            self.circles(r, s)
        except CutViolation:
            return False
        return r != 0 and r != s


def _midpoint(a: float, b: float) -> float:
    if math.isinf(b):
        return 2.0 * a + 1.0
    return math.sqrt(a * b)


def _circle_partials(funcs, r, s, rho, n, max_order):
    t = 2 * np.pi * np.arange(n) / n
    z = rho * np.exp(1j * t)
    rf, sf = branch_factors(z, r, s)
    weight = z * (2 * np.pi / n) * 1j  # dz
    base = z / (rf * sf) * weight * (-1.0 / (4j * np.pi))
    vals = np.stack([np.asarray(f(z), dtype=complex) for f in funcs])  # (2, n)
    ur = 1.0 / (z * z - r)
    us = 1.0 / (z * z - s)
    out = {}
    pr = np.ones_like(z)
    for m in range(max_order + 1):
        ps = np.ones_like(z)
        for k in range(max_order + 1 - m):
            w = base * pr * ps * (_dfact_ratio(m) * _dfact_ratio(k))
            out[(m, k)] = vals @ w
            ps = ps * us
        pr = pr * ur
    return out


def _partials(ev: GEvaluator, r, s, n, max_order):
    rho, rho2 = ev.circles(r, s)
    inner = _circle_partials(ev._funcs, r, s, rho, n, max_order)
    if rho2 is None:
        return inner
    outer = _circle_partials([reflect(f) for f in ev._funcs], r, s, rho2, n, max_order)
    return {k: inner[k] - outer[k] for k in inner}


def eval_G_jet(ev: GEvaluator, r: complex, s: complex, max_order: int = 3) -> GJet:
    """All partials ``d^{m+n} G / dr^m ds^n`` with ``m + n <= max_order``.

    The node count starts at ``ev.nodes`` and doubles until successive
    results agree to ``ev.tol`` (relative to ``max(1, |value|)``).

    Raises
    ------
    CutViolation
        if no admissible circle exists at ``(r, s)``.
    NonConvergence
        if ``ev.max_nodes`` is reached first.
    """
    r, s = complex(r), complex(s)
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    n = ev.nodes
    prev = _partials(ev, r, s, n, max_order)
    while True:
        cur = _partials(ev, r, s, 2 * n, max_order)
        err = max(
            float(np.max(np.abs(cur[k] - prev[k]) / np.maximum(1.0, np.abs(cur[k]))))
            for k in cur
        )
        n *= 2
        if err <= ev.tol:
            break
        if n >= ev.max_nodes:
            raise NonConvergence(f"node doubling change {err:.3g} at {n} nodes (r={r}, s={s})")
        prev = cur
    return GJet((r, s), cur, err, n)


def g_consistency_residual(ev: GEvaluator, r: complex, s: complex, tol: float = 1e-12) -> float:
    """Residual of ``G_rs = (G_r - G_s) / (2 (r - s))`` for both components."""
    if abs(r - s) < tol:
        raise DegeneratePoint(f"|r - s| = {abs(r - s):.3g} below {tol}")
    gj = eval_G_jet(ev, r, s, 2)
    lhs = gj.partials[(1, 1)]
    rhs = (gj.partials[(1, 0)] - gj.partials[(0, 1)]) / (2 * (r - s))
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))


def einstein_combination(gj: GJet, q_coeffs=(1.0, 1.0, 1j, -1j)) -> complex:
    """``(ar+b) A1 + (cr+d) A2 + (as+b) B1 + (cs+d) B2`` from a jet."""
    a, b, c, d = q_coeffs
    r, s = gj.point
    A, B = gj.A, gj.B
    return (a * r + b) * A[0] + (c * r + d) * A[1] + (a * s + b) * B[0] + (c * s + d) * B[1]


def einstein_pde_residual(ev: GEvaluator, r, s, q_coeffs=(1.0, 1.0, 1j, -1j)) -> float:
    """Magnitude of the first-order PDE that the seed ODE imposes on G."""
    return float(abs(einstein_combination(eval_G_jet(ev, r, s, 1), q_coeffs)))

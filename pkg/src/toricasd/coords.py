"""Joyce <-> twistor coordinates and transport of derivative jets.

Joyce coordinates ``(x, y)``, ``y > 0``, complexify to ``zeta = x + i y`` and
``xi = x - i y``; the twistor coordinates are the Cayley images
``r = (zeta - i)/(zeta + i)`` and ``s = (xi - i)/(xi + i)``.  The harmonic
pair ``F`` of the Joyce description is tied to the contour potential ``G`` by

    dF/dzeta = ((zeta + i)/(xi + i))^(1/2) dG/dzeta
    dF/dxi   = ((xi + i)/(zeta + i))^(1/2) dG/dxi

All derivatives are carried as :class:`~toricasd.jets.Jet` objects, so
higher-order transport is exact algebra on Taylor coefficients.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .contour import GJet, einstein_combination
from .jets import Jet, stack


class PoleAtInfinity(ValueError):
    """The point maps to ``s = infinity`` (``(x, y) = (0, 1)``)."""

    def __init__(self, msg, r=0j, s=complex("inf")):
        super().__init__(msg)
        self.r, self.s = r, s


class OffRealSlice(ValueError):
    pass


class BranchAmbiguity(ValueError):
    pass


class Degenerate(ValueError):
    """``P1 Q2 - Q1 P2`` vanishes to tolerance."""


class RealityError(ValueError):
    """P, Q are not real up to a common phase."""


@dataclass(frozen=True)
class JoycePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isrealobj(self.x) and np.isrealobj(self.y)):
            raise ValueError("JoycePoint coordinates must be real")
        if not self.y > 0:
            raise ValueError(f"y must be positive, got {self.y}")

    @property
    def zeta(self) -> complex:
        return complex(self.x, self.y)

    @property
    def xi(self) -> complex:
        return complex(self.x, -self.y)


def cayley(w: complex) -> complex:
    return (w - 1j) / (w + 1j)


def inverse_cayley(r: complex) -> complex:
    return 1j * (1 + r) / (1 - r)


def joyce_to_twistor(p: JoycePoint) -> tuple[complex, complex]:
    """``(r, s)`` for a Joyce point; ``s * conj(r) = 1`` unless ``r = 0``."""
    if p.xi + 1j == 0:
        raise PoleAtInfinity("(x, y) = (0, 1) maps to s = infinity", r=cayley(p.zeta))
    return cayley(p.zeta), cayley(p.xi)


@dataclass(frozen=True)
class TwistorImage:
    zeta: complex
    xi: complex
    on_real_slice: bool
    point: JoycePoint | None


def twistor_to_joyce(r: complex, s: complex, tol: float = 1e-12, require_real: bool = False) -> TwistorImage:
    """Invert the Cayley maps; report a Joyce point when ``s conj(r) = 1``."""
    r, s = complex(r), complex(s)
    if r == 1 or s == 1:
        raise ValueError("r = 1 or s = 1 maps to infinity")
    zeta, xi = inverse_cayley(r), inverse_cayley(s)
    real = abs(s * r.conjugate() - 1) < tol
    point = None
    if real:
        point = JoycePoint(float(zeta.real), float(zeta.imag))
    elif require_real:
        raise OffRealSlice(f"|s conj(r) - 1| = {abs(s * r.conjugate() - 1):.3g}")
    return TwistorImage(zeta, xi, real, point)


# F jets -------------------------------------------------------------------


@dataclass(frozen=True)
class FJet:
    """Derivatives of ``F = (F1, F2)`` in ``(zeta, xi)``.

    ``dzeta`` and ``dxi`` are jets (tensor shape ``(2,)``) of ``dF/dzeta``
    and ``dF/dxi`` in the increments ``(h_zeta, h_xi)``.  ``F`` itself is only
    defined up to a constant, so partials start at total order one.
    """

    point: tuple[complex, complex]
    dzeta: Jet
    dxi: Jet
    prefactor: complex = 1.0

    @property
    def order(self) -> int:
        return self.dzeta.order + 1

    @property
    def partials(self) -> dict:
        out = {}
        for (m, n), v in self.dzeta.partials().items():
            out[(m + 1, n)] = v
        for (m, n), v in self.dxi.partials().items():
            if m == 0:
                out[(0, n + 1)] = v
        return out

    @property
    def integrability(self) -> float:
        """``|d/dxi dF/dzeta - d/dzeta dF/dxi|``; zero for a genuine potential."""
        if self.order < 2:
            return 0.0
        return float(np.max(np.abs(self.dzeta.partial(0, 1) - self.dxi.partial(1, 0))))


def _h_variable(axis: int, order: int, base: complex) -> Jet:
    return Jet.variable(axis, base, order)


def f_jet_from_g(gj: GJet, zeta: complex, xi: complex, branch_reference: complex | None = None) -> FJet:
    """Transport a G jet at ``(r, s)`` to the F jet at ``(zeta, xi)``.

    ``branch_reference`` selects the sign of the square-root prefactor closest
    to a previously used value (grid continuation); by default the principal
    branch is used.
    """
    zeta, xi = complex(zeta), complex(xi)
    if zeta + 1j == 0 or xi + 1j == 0:
        raise PoleAtInfinity("zeta or xi equals -i")
    r, s = gj.point
    if abs(cayley(zeta) - r) > 1e-12 * max(1, abs(r)) or abs(cayley(xi) - s) > 1e-12 * max(1, abs(s)):
        raise ValueError("G jet was not evaluated at the image of (zeta, xi)")
    k = gj.order
    G = Jet.from_partials(gj.partials, k)
    Z = _h_variable(0, k, zeta)
    X = _h_variable(1, k, xi)
    R = (Z - 1j) / (Z + 1j)
    S = (X - 1j) / (X + 1j)
    Gz = G.substitute(R - R.value, S - S.value)
    p = ((Z + 1j) / (X + 1j)).truncate(k - 1).sqrt()
    p0 = complex(p.value)
    if branch_reference is not None:
        near, far = abs(p0 - branch_reference), abs(p0 + branch_reference)
        if abs(near - far) < 0.1 * abs(p0):
            raise BranchAmbiguity("prefactor sign cannot be continued from the reference")
        if far < near:
            p, p0 = -p, -p0
    return FJet((zeta, xi), p * Gz.diff(0), Gz.diff(1) / p, p0)


def f_jet_from_xy(F: Jet, p: JoycePoint) -> FJet:
    """FJet from a jet of ``F`` in the Joyce increments ``(dx, dy)``."""
    k = F.order
    a = np.zeros((k + 1, k + 1), dtype=complex)
    b = np.zeros((k + 1, k + 1), dtype=complex)
    a[1, 0] = a[0, 1] = 0.5  # dx = (h_zeta + h_xi) / 2
    b[1, 0], b[0, 1] = -0.5j, 0.5j  # dy = (h_zeta - h_xi) / (2i)
    Fh = F.substitute(Jet(a, k), Jet(b, k))
    return FJet((p.zeta, p.xi), Fh.diff(0), Fh.diff(1))


def xy_gradient_jets(fj: FJet) -> tuple[Jet, Jet]:
    """Jets of ``F_x`` and ``F_y`` in ``(dx, dy)``."""
    k = fj.dzeta.order
    fx = fj.dzeta + fj.dxi
    fy = (fj.dzeta - fj.dxi) * 1j
    a = np.zeros((k + 1, k + 1), dtype=complex)
    b = np.zeros((k + 1, k + 1), dtype=complex)
    if k >= 1:
        a[1, 0], a[0, 1] = 1.0, 1j  # h_zeta = dx + i dy
        b[1, 0], b[0, 1] = 1.0, -1j  # h_xi = dx - i dy
    if k == 0:
        return Jet(fx.c, 0), Jet(fy.c, 0)
    return fx.substitute(Jet(a, k), Jet(b, k)), fy.substitute(Jet(a, k), Jet(b, k))


# P, Q -----------------------------------------------------------------------


@dataclass(frozen=True)
class PQJet:
    """``P = -y F_x`` and ``Q = y F_y`` as jets in ``(dx, dy)``."""

    point: JoycePoint
    Pj: Jet
    Qj: Jet
    tol: float = 1e-10

    @property
    def order(self) -> int:
        return self.Pj.order

    @property
    def P(self) -> np.ndarray:
        return self.Pj.value

    @property
    def Q(self) -> np.ndarray:
        return self.Qj.value

    @property
    def dP(self) -> np.ndarray:
        """``dP[i, a]``: derivative of component ``i`` in ``a`` = x, y."""
        return np.stack([self.Pj.partial(1, 0), self.Pj.partial(0, 1)], axis=-1)

    @property
    def dQ(self) -> np.ndarray:
        return np.stack([self.Qj.partial(1, 0), self.Qj.partial(0, 1)], axis=-1)

    @property
    def d2P(self) -> np.ndarray:
        """``d2P[i, :]`` = (xx, xy, yy)."""
        return np.stack([self.Pj.partial(2, 0), self.Pj.partial(1, 1), self.Pj.partial(0, 2)], axis=-1)

    @property
    def d2Q(self) -> np.ndarray:
        return np.stack([self.Qj.partial(2, 0), self.Qj.partial(1, 1), self.Qj.partial(0, 2)], axis=-1)

    @property
    def det(self) -> complex:
        P, Q = self.P, self.Q
        return P[0] * Q[1] - Q[0] * P[1]

    @property
    def scale(self) -> float:
        return float(max(np.max(np.abs(self.P)), np.max(np.abs(self.Q))))

    @property
    def degenerate(self) -> bool:
        return bool(abs(self.det) < self.tol * max(self.scale, 1e-300) ** 2 or self.scale == 0)


def pq_jet(fj: FJet, p: JoycePoint, tol: float = 1e-10) -> PQJet:
    """P and Q jets at ``p``; the jet order is one less than ``fj.order``.

    The result carries a ``degenerate`` flag instead of raising, so zero data
    can still be fed to residual checks; :func:`~toricasd.joyce.assemble_metric`
    refuses degenerate input.
    """
    fx, fy = xy_gradient_jets(fj)
    Y = Jet.variable(1, p.y, fx.order)
    return PQJet(p, -(fx * Y), fy * Y, tol)


def pq_from_arrays(p: JoycePoint, P, Q, dP=None, dQ=None, d2P=None, d2Q=None) -> PQJet:
    """Assemble a PQJet from explicit values and derivatives (missing ones are zero)."""
    order = 0 if dP is None else (1 if d2P is None else 2)

    def build(v, d1, d2):
        parts = {(0, 0): np.asarray(v)}
        if d1 is not None:
            d1 = np.asarray(d1)
            parts[(1, 0)], parts[(0, 1)] = d1[..., 0], d1[..., 1]
        if d2 is not None:
            d2 = np.asarray(d2)
            parts[(2, 0)], parts[(1, 1)], parts[(0, 2)] = d2[..., 0], d2[..., 1], d2[..., 2]
        return Jet.from_partials(parts, order)

    return PQJet(p, build(P, dP, d2P), build(Q, dQ, d2Q))


def cp_residual(fj: FJet, p: JoycePoint, form: str = "chain") -> float:
    """Residual of the first-order Einstein PDE linking ``F1`` and ``F2``.

    ``form="chain"`` checks ``x F1_x + y F1_y + F2_x = 0``, the form that the
    seed ODE produces through the twistor change of variables
    (equivalently ``zeta F1_zeta + xi F1_xi + F2_zeta + F2_xi = 0``).
    ``form="printed"`` checks ``x F1_x + y F1_y + F2_y = 0``.
    """
    fz, fw = fj.dzeta.value, fj.dxi.value
    fx = fz + fw
    fy = 1j * (fz - fw)
    base = p.x * fx[0] + p.y * fy[0]
    if form == "chain":
        return float(abs(base + fx[1]))
    if form == "printed":
        return float(abs(base + fy[1]))
    raise ValueError(f"unknown form {form!r}")


def mapped_einstein_residual(gj: GJet, p: JoycePoint) -> float:
    """The G-side PDE residual rescaled to compare with ``cp_residual``.

    ``zeta F1_zeta + xi F1_xi + F2_zeta + F2_xi`` equals the standard
    G combination divided by ``i sqrt((zeta + i)(xi + i))``.
    """
    w = cmath.sqrt((p.zeta + 1j) * (p.xi + 1j))
    return float(abs(einstein_combination(gj)) / abs(w))


def _phase(v: np.ndarray) -> complex:
    """Unit phase ``e^{i t}`` with ``e^{-i t} v`` as real as possible (defined up to sign)."""
    s = np.sum(v * v)
    if abs(s) == 0:
        return 1.0 + 0j
    return cmath.exp(0.5j * cmath.phase(s))


def _pq_vector(pq: PQJet) -> np.ndarray:
    return np.concatenate([pq.P, pq.Q, pq.dP.ravel(), pq.dQ.ravel()]).astype(complex)


def real_slice_residual(fj: FJet, p: JoycePoint) -> float:
    """Largest imaginary part of ``P, Q`` and their first derivatives after phase alignment."""
    if fj.order < 2:
        raise ValueError("need an F jet of order >= 2")
    v = _pq_vector(pq_jet(fj, p))
    return float(np.max(np.abs((v / _phase(v)).imag)))


def realify(pq: PQJet, tol: float = 1e-8) -> PQJet:
    """Rotate P, Q by their common phase and return the real parts.

    Raises :class:`RealityError` if any jet coefficient keeps an imaginary part
    above ``tol`` (relative to the data scale) after rotation.
    """
    if not (np.iscomplexobj(pq.Pj.c) or np.iscomplexobj(pq.Qj.c)):
        return pq
    u = _phase(_pq_vector(pq)) if pq.order >= 1 else _phase(np.concatenate([pq.P, pq.Q]))
    P, Q = pq.Pj * (1 / u), pq.Qj * (1 / u)
    scale = max(float(np.max(np.abs(P.c))), float(np.max(np.abs(Q.c))), 1e-300)
    bad = max(float(np.max(np.abs(P.c.imag))), float(np.max(np.abs(Q.c.imag)))) / max(scale, 1.0)
    if bad > tol:
        raise RealityError(f"imaginary residue {bad:.3g} after phase alignment exceeds {tol:.1e}")
    return PQJet(pq.point, P.real, Q.real, pq.tol)

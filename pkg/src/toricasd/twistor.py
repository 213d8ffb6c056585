"""Chart-level algebra of the twistor-space gluing.

Two charts ``(z, v1, v2)`` are glued by ``(z, v) -> (-z, v + eps * phi(z))``.
On each chart the hyperplane distribution is spanned by

    V_j = d/dv_j + q_j(z) d/dz,        j = 1, 2,

with even quadratics ``q_j`` (standard choice ``q1 = z^2 + 1``,
``q2 = i (z^2 - 1)``).  The pushforward of ``V_1`` is

    (1 + eps q1 phi1') d/dv1 + eps q1 phi2' d/dv2 - q1 d/dz,

and after subtracting its ``V``-components at ``-z`` (using ``q(-z) = q(z)``)
the ``d/dz`` part left over is ``-q1 (2 + eps (q1 phi1' + q2 phi2'))``.  It
vanishes exactly when ``q1 phi1' + q2 phi2' = -2 / eps``; the constant
``kappa = -2 / eps`` labels the orientation of the gluing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import EVEN, ParitySeries, derivative

STANDARD_FRAME = (ParitySeries.even([1.0, 1.0]), ParitySeries.even([-1j, 1j]))


class FrameError(ValueError):
    pass


def _quadratic(q: ParitySeries) -> tuple[complex, complex]:
    """``(a, b)`` with ``q = a z^2 + b``."""
    if q.parity != EVEN:
        raise FrameError("frame quadratics must be even")
    c = list(q.coefficients) + [0, 0]
    if any(abs(x) > 0 for x in c[2:]):
        raise FrameError("frame quadratics must have degree at most 2")
    return complex(c[1]), complex(c[0])


@dataclass(frozen=True)
class FramePoint:
    """A point ``z`` of a chart with frame quadratics ``q`` and seed ``phi``."""

    z: complex
    q: tuple[ParitySeries, ParitySeries] = STANDARD_FRAME
    phi: tuple[ParitySeries, ParitySeries] = (ParitySeries.odd([0.0]), ParitySeries.odd([0.0]))

    def __post_init__(self):
        (a, b), (c, d) = _quadratic(self.q[0]), _quadratic(self.q[1])
        if abs(a * d - b * c) < 1e-14:
            raise FrameError("q1 and q2 share a zero (they must span the quadratics a z^2 + b)")
        if any(abs(self.z) >= p.radius for p in self.phi):
            raise FrameError("z lies outside the seed's disc")

    @property
    def qz(self) -> np.ndarray:
        return np.array([complex(q(self.z)) for q in self.q])

    @property
    def dphi(self) -> np.ndarray:
        return np.array([complex(derivative(p)(self.z)) for p in self.phi])

    @property
    def combination(self) -> complex:
        """``q1 phi1' + q2 phi2'`` at ``z``."""
        return complex(self.qz @ self.dphi)


def involution_matrix(fp: FramePoint) -> np.ndarray:
    """``A(z) = I - phi'(z) q(z)^T``, i.e. ``[[1 - q1 phi1', -q2 phi1'], [-q1 phi2', 1 - q2 phi2']]``."""
    return np.eye(2) - np.outer(fp.dphi, fp.qz)


def involution_defects(fp: FramePoint) -> dict:
    """Deviations of ``A(z) A(-z)``, ``A(z)^2`` from the identity and of ``det A(z)`` from -1."""
    A = involution_matrix(fp)
    Am = involution_matrix(FramePoint(-fp.z, fp.q, fp.phi))
    eye = np.eye(2)
    return {
        "product": float(np.max(np.abs(A @ Am - eye))),
        "square": float(np.max(np.abs(A @ A - eye))),
        "det": float(abs(np.linalg.det(A) + 1)),
    }


def pushforward(fp: FramePoint, kappa: float = 2.0, which: int = 1) -> np.ndarray:
    """Components of ``g_*(V_which)`` in the basis ``(V1, V2, d/dz)`` at ``-z``."""
    if kappa not in (2, -2, 2.0, -2.0):
        raise ValueError("kappa must be +2 or -2")
    eps = -2.0 / kappa
    qj = fp.qz[which - 1]
    e = np.zeros(2, dtype=complex)
    e[which - 1] = 1.0
    dv = e + eps * qj * fp.dphi  # d/dv components
    dz = -qj  # from g_*(d/dz) = -d/dz + eps phi'
    return np.array([dv[0], dv[1], dz - fp.qz @ dv])


def span_residual(fp: FramePoint, kappa: float = 2.0, which: int | str = 1) -> float:
    """Magnitude of the ``d/dz`` component of ``g_*(V_j)`` outside the span of the ``V``'s.

    ``which`` is 1, 2 or ``"both"`` (maximum of the two).
    """
    if which == "both":
        return max(span_residual(fp, kappa, 1), span_residual(fp, kappa, 2))
    return float(abs(pushforward(fp, kappa, int(which))[2]))


def passing_kappa(fp: FramePoint, tol: float = 1e-12) -> float | None:
    """The orientation constant for which ``g_*`` preserves the distribution, if any."""
    ok = [k for k in (2.0, -2.0) if span_residual(fp, k, "both") < tol * max(1.0, abs(fp.qz).max())]
    return ok[0] if len(ok) == 1 else None


def bracket_coefficient(q, z: complex) -> complex:
    """``q1 q2' - q2 q1'`` at ``z``: the ``d/dz`` part of ``[V1, V2]``."""
    q1, q2 = q
    d1, d2 = derivative(q1), derivative(q2)
    return complex(q1(z) * d2(z) - q2(z) * d1(z))

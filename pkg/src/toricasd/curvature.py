"""Pointwise curvature of metrics on ``(x, y, u1, u2)`` that depend on ``(x, y)`` only.

Everything is computed by jet algebra from a :class:`~toricasd.joyce.MetricJet`:
Christoffel symbols from first derivatives, Riemann from second derivatives,
and (for the Einstein gauge fit with a 3-jet) derivatives of Ricci from third
derivatives.  No numerical differentiation is involved.

Conventions::

    Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    R^a_bcd    = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    Ric_bd     = R^a_bad

so the round sphere has positive scalar curvature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm
from scipy.optimize import least_squares

from .jets import Jet, inv_matrix, jeinsum, stack
from .joyce import MetricJet

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
# Hodge star on the orthonormal 2-form basis above, orientation e0^e1^e2^e3
HODGE = np.zeros((6, 6))
for _i, (_j, _s) in enumerate([(5, 1), (4, -1), (3, 1), (2, 1), (1, -1), (0, 1)]):
    HODGE[_j, _i] = _s

FLAT_TOL = 1e-10


class SingularMetric(ValueError):
    pass


class NoConvergence(ArithmeticError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


# jets of curvature ------------------------------------------------------------


def _coordinate_derivative(T: Jet) -> Jet:
    """Append a derivative index (length 4; only x, y are nonzero)."""
    dx, dy = T.diff(0), T.diff(1)
    zero = dx * 0.0
    return Jet(np.stack([dx.c, dy.c, zero.c, zero.c], axis=-3), dx.order)


def christoffel(g: Jet, ginv: Jet | None = None) -> Jet:
    """``Gamma[a, b, c]`` as a jet of order ``g.order - 1``."""
    if ginv is None:
        ginv = inv_matrix(g)
    dg = _coordinate_derivative(g)  # dg[d, b, c] = d_c g_db
    t = Jet(
        np.einsum("dcb...->dbc...", dg.c)  # d_b g_dc
        + dg.c  # d_c g_db
        - np.einsum("bcd...->dbc...", dg.c),  # d_d g_bc
        dg.order,
    )
    return jeinsum("ad,dbc->abc", ginv, t) * 0.5


def riemann(g: Jet, Gamma: Jet | None = None) -> Jet:
    """``R[a, b, c, d] = R^a_bcd`` as a jet of order ``g.order - 2``."""
    if Gamma is None:
        Gamma = christoffel(g)
    dG = _coordinate_derivative(Gamma)  # dG[a, d, b, c] = d_c Gamma^a_db
    lin = np.einsum("adbc...->abcd...", dG.c) - np.einsum("acbd...->abcd...", dG.c)
    quad = jeinsum("ace,edb->abcd", Gamma, Gamma)
    quad = Jet(quad.c - np.einsum("abdc...->abcd...", quad.c), quad.order)
    return Jet(lin, dG.order) + quad


def ricci(R: Jet) -> Jet:
    return Jet(np.einsum("abad...->bd...", R.c), R.order)


def lower(g: Jet, R: Jet) -> Jet:
    return jeinsum("ae,ebcd->abcd", g, R)


def _weyl(g: np.ndarray, Rl: np.ndarray, Ric: np.ndarray, scal) -> np.ndarray:
    k = (
        np.einsum("ac,bd->abcd", g, Ric)
        - np.einsum("ad,bc->abcd", g, Ric)
        - np.einsum("bc,ad->abcd", g, Ric)
        + np.einsum("bd,ac->abcd", g, Ric)
    )
    gg = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    return Rl - 0.5 * k + scal / 6.0 * gg


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal frame (``E.T g E = I``); symmetric square root."""
    E = np.linalg.inv(sqrtm(g))
    return E if np.iscomplexobj(g) else E.real


def to_frame(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    idx = "abcd"[: T.ndim]
    out = T
    for k in range(T.ndim):
        sub = idx[:k] + "z" + idx[k + 1 :]
        out = np.einsum(f"{sub},z{idx[k]}->{idx}", out, E)
    return out


def two_form_matrix(W: np.ndarray) -> np.ndarray:
    """6x6 matrix of a curvature-type tensor on the 2-form basis ``PAIRS``."""
    return np.array([[W[i, j, k, l] for (k, l) in PAIRS] for (i, j) in PAIRS])


# report -------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureReport:
    point: object
    riemann_norm: float
    ricci: np.ndarray
    scalar: complex
    ricci0: np.ndarray
    ricci0_norm: float
    wplus_norm: float
    wminus_norm: float
    asd_residual: float
    conformally_flat: bool
    bianchi: float
    condition: float
    complexified: bool = False

    def as_row(self) -> dict:
        s = self.scalar
        return {
            "x": self.point.x,
            "y": self.point.y,
            "scalar": s.real if not self.complexified else s,
            "ricci0_norm": self.ricci0_norm,
            "wplus": self.wplus_norm,
            "wminus": self.wminus_norm,
            "asd_residual": self.asd_residual,
        }


def _norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def curvature_report(mj: MetricJet, orientation: int = 1, eps: float = 1e-300) -> CurvatureReport:
    """Curvature at ``mj.point`` from a metric jet of order at least 2.

    ``orientation=+1`` uses the volume form ``dx^dy^du1^du2``, ``-1`` its
    reverse; swapping orientation swaps ``wplus`` and ``wminus``.
    """
    if mj.order < 2:
        raise ValueError("curvature needs second derivatives of the metric")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    g0 = mj.g
    cond = float(np.linalg.cond(g0))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularMetric(f"metric condition number {cond:.3g}")
    gj = mj.jet.truncate(2)
    Rj = riemann(gj)
    R = Rj.value
    g_inv = np.linalg.inv(g0)
    Rl = np.einsum("ae,ebcd->abcd", g0, R)
    Ric = np.einsum("abad->bd", R)
    scal = complex(np.einsum("bd,bd->", g_inv, Ric))
    ric0 = Ric - scal / 4.0 * g0
    W = _weyl(g0, Rl, Ric, scal)

    E = orthonormal_frame(g0)
    Wf = two_form_matrix(to_frame(W, E))
    H = HODGE * orientation
    Pp, Pm = (np.eye(6) + H) / 2, (np.eye(6) - H) / 2
    wp, wm = _norm(Pp @ Wf @ Pp), _norm(Pm @ Wf @ Pm)
    rn = _norm(to_frame(Rl, E))
    tol = FLAT_TOL * (2 if mj.complexified else 1) * max(1.0, rn)
    flat = wp + wm < tol
    asd = 0.0 if flat else min(wp, wm) / (wp + wm + eps)

    cyc = Rl + np.einsum("acdb->abcd", Rl) + np.einsum("adbc->abcd", Rl)
    bianchi = _norm(cyc) / max(_norm(Rl), 1e-300)

    if not mj.complexified:
        scal = scal.real
        Ric, ric0 = Ric.real, ric0.real
    return CurvatureReport(
        mj.point,
        rn,
        Ric,
        scal,
        ric0,
        _norm(to_frame(ric0, E)),
        wp,
        wm,
        asd,
        bool(flat),
        bianchi,
        cond,
        mj.complexified,
    )


def asd_residual(rep: CurvatureReport) -> tuple[float, bool]:
    """``min(W+, W-) / (W+ + W- + eps)`` and the conformally-flat flag."""
    return rep.asd_residual, rep.conformally_flat


# Einstein gauge -------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeResult:
    """Best conformal factor jet and the trace-free Ricci left over.

    ``jet`` lists ``(u_x, u_y, u_xx, u_xy, u_yy)`` followed, in 3-jet mode,
    by ``(u_xxx, u_xxy, u_xyy, u_yyy)``.  ``residual`` is the norm of the
    trace-free Ricci of ``e^{2u} g`` at the point (frame components),
    together with its first derivatives in 3-jet mode; ``relative`` divides it
    by the same quantity at ``u = 0``.
    """

    jet: np.ndarray
    residual: float
    relative: float
    scalar_sign: str
    rescaled_scalar: float
    mode: str
    nfev: int


_UNKNOWNS = {"2-jet": 5, "3-jet": 9}
_KEYS = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]


class _GaugeProblem:
    """Trace-free part of ``Ric - 2 (Hess u - du du)`` as a function of the jet of ``u``."""

    def __init__(self, mj: MetricJet, mode: str):
        k = 1 if mode == "3-jet" else 0
        need = k + 2
        if mj.order < need:
            raise ValueError(f"{mode} gauge fit needs a metric jet of order {need}")
        self.k = k
        self.mode = mode
        g = mj.jet.truncate(need)
        ginv = inv_matrix(g)
        Gamma = christoffel(g, ginv)
        R = riemann(g, Gamma)
        self.Ric = ricci(R)
        self.g = g.truncate(k)
        self.ginv = ginv.truncate(k)
        self.Gamma = Gamma.truncate(k + 1)
        self.E = orthonormal_frame(mj.g)
        self.complexified = mj.complexified
        self.scalar = complex(np.einsum("bd,bd->", ginv.value, self.Ric.value))

    def u_jet(self, params) -> Jet:
        parts = {(0, 0): 0.0}
        for key, v in zip(_KEYS, params):
            parts[key] = v
        return Jet.from_partials(parts, self.k + 2)

    def tensors(self, params):
        u = self.u_jet(params)
        du = _coordinate_vector(u)  # order k + 1
        hess = _coordinate_derivative(du).truncate(self.k)  # partials
        conn = jeinsum("cab,c->ab", self.Gamma.truncate(self.k), du.truncate(self.k))
        nabla2 = hess - conn
        dudu = jeinsum("a,b->ab", du.truncate(self.k), du.truncate(self.k))
        T = self.Ric.truncate(self.k) - (nabla2 - dudu) * 2.0
        tr = jeinsum("ab,ab->", self.ginv, T)
        T0 = T - self.g * stack([stack([tr] * 4)] * 4) * 0.25
        return T0, nabla2, du

    def residual_vector(self, params) -> np.ndarray:
        T0, _, _ = self.tensors(params)
        blocks = [to_frame(T0.value, self.E)]
        if self.k:
            blocks += [to_frame(T0.partial(1, 0), self.E), to_frame(T0.partial(0, 1), self.E)]
        iu = np.triu_indices(4)
        v = np.concatenate([b[iu] for b in blocks])
        if self.complexified:
            return np.concatenate([v.real, v.imag])
        return v.real

    def rescaled_scalar(self, params) -> complex:
        """``e^{2u} R(e^{2u} g)`` at the point, taking ``u(p) = 0``."""
        _, nabla2, du = self.tensors(params)
        ginv = self.ginv.value
        lap = np.einsum("ab,ab->", ginv, nabla2.value)
        d = du.value
        return self.scalar - 6 * lap - 6 * np.einsum("ab,a,b->", ginv, d, d)


def _coordinate_vector(u: Jet) -> Jet:
    dx, dy = u.diff(0), u.diff(1)
    zero = dx * 0.0
    return Jet(np.stack([dx.c, dy.c, zero.c, zero.c]), dx.order)


def _project(fun, outer_idx, inner_idx, size):
    """Variable projection: the residual is affine in the ``inner_idx`` unknowns.

    Returns ``reduced(a)`` giving the least-squares residual over the inner
    unknowns for fixed outer ones, and ``solve(a)`` giving the full vector.
    """
    basis = np.eye(len(inner_idx))

    def solve(a):
        x = np.zeros(size)
        x[outer_idx] = a
        r0 = fun(x)
        cols = []
        for e in basis:
            xe = x.copy()
            xe[inner_idx] = e
            cols.append(fun(xe) - r0)
        M = np.stack(cols, axis=1)
        b = np.linalg.lstsq(M, -r0, rcond=None)[0]
        x[inner_idx] = b
        return x, r0 + M @ b

    return (lambda a: solve(a)[1]), solve


def einstein_gauge(
    mj: MetricJet,
    init=None,
    mode: str | None = None,
    max_nfev: int = 100,
    gtol: float = 1e-12,
    sign_tol: float = 1e-9,
) -> GaugeResult:
    """Fit the jet of a conformal factor ``u(x, y)`` making ``e^{2u} g`` Einstein at the point.

    With a metric 3-jet (default when available) the fit uses the third jet of
    ``u`` and asks the trace-free Ricci *and its first derivatives* to vanish
    (15 equations, 9 unknowns).  With a 2-jet only the pointwise equations are
    used (5 equations, 5 unknowns), which block metrics of this shape can
    almost always satisfy, so that mode certifies little.

    For fixed ``(u_x, u_y)`` the equations are affine in the higher
    derivatives of ``u``, so those are eliminated by linear least squares and
    the trust-region iteration runs over ``(u_x, u_y)`` only.  ``max_nfev``
    bounds the outer iterations.

    Raises
    ------
    NoConvergence
        if the budget runs out before the gradient tolerance is met and the
        residual is not already at rounding level.
    """
    if mode is None:
        mode = "3-jet" if mj.order >= 3 else "2-jet"
    if mode not in _UNKNOWNS:
        raise ValueError(f"unknown gauge mode {mode!r}")
    prob = _GaugeProblem(mj, mode)
    n = _UNKNOWNS[mode]
    size = 2 * n if prob.complexified else n
    if prob.complexified:
        outer, inner = [0, 1, n, n + 1], [k for k in range(size) if k not in (0, 1, n, n + 1)]

        def fun(p):
            return prob.residual_vector(p[:n] + 1j * p[n:])
    else:
        outer, inner = [0, 1], list(range(2, n))
        fun = prob.residual_vector
    a0 = np.zeros(len(outer))
    if init is not None:
        init = np.asarray(init)
        a0[:2] = np.real(init[:2])
        if prob.complexified:
            a0[2:] = np.imag(init[:2])
    reduced, solve = _project(fun, outer, inner, size)
    base = float(np.linalg.norm(fun(np.zeros(size))))
    sol = least_squares(reduced, a0, method="trf", gtol=gtol, xtol=1e-15, ftol=1e-15, max_nfev=max_nfev)
    x, r = solve(sol.x)
    res = float(np.linalg.norm(r))
    if sol.status == 0 and res > 1e3 * np.finfo(float).eps * max(base, 1.0):
        raise NoConvergence(f"gauge fit used {sol.nfev} iterations, residual {res:.3g}", best=res)
    params = x[:n] + 1j * x[n:] if prob.complexified else x
    rs = prob.rescaled_scalar(params)
    rsr = rs.real
    sign = "zero" if abs(rsr) < sign_tol * max(1.0, abs(prob.scalar)) else ("positive" if rsr > 0 else "negative")
    return GaugeResult(params, res, res / max(base, 1e-300), sign, float(rsr), mode, int(sol.nfev))

"""Joyce's construction: axially symmetric harmonic pairs and their metrics.

A pair ``F = (F1, F2)`` solving ``F_xx + F_yy + F_y / y = 0`` on ``y > 0``
gives ``P = -y F_x``, ``Q = y F_y`` and the toric metric

    (dx^2 + dy^2) / y^2
      + ((P2 du1 - P1 du2)^2 + (Q2 du1 - Q1 du2)^2) / (P1 Q2 - Q1 P2)^2

in the frame ``(x, y, u1, u2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import series as _series
from .contour import GEvaluator, eval_G_jet
from .coords import (
    Degenerate,
    FJet,
    JoycePoint,
    PQJet,
    cp_residual,
    f_jet_from_g,
    f_jet_from_xy,
    joyce_to_twistor,
    pq_jet,
    realify,
    xy_gradient_jets,
)
from .jets import Jet, stack


# harmonic fields ----------------------------------------------------------


@dataclass(frozen=True)
class HarmonicField:
    """A pair ``F = (F1, F2)`` that can produce derivative jets at any ``y > 0``.

    Built-in fields are closed-form expressions evaluated in jet arithmetic;
    pipeline fields come from a seed through the contour potentials.
    """

    name: str
    provenance: str
    f_jet: Callable[[JoycePoint, int], FJet] = field(repr=False)
    components: tuple = field(default=(), repr=False)

    def value_jet(self, p: JoycePoint, order: int) -> Jet:
        """Jet of ``F`` itself in ``(dx, dy)`` (built-in fields only)."""
        if not self.components:
            raise TypeError("value jets are only available for closed-form fields")
        X = Jet.variable(0, p.x, order)
        Y = Jet.variable(1, p.y, order)
        return stack([f(X, Y) for f in self.components])


def _const(value):
    return lambda X, Y: X * 0.0 + value


SCALARS: dict[str, Callable] = {
    "x": lambda X, Y: X * 1.0,
    "-x": lambda X, Y: -X,
    "log y": lambda X, Y: Y.log(),
    "x^2 - y^2/2": lambda X, Y: X * X - Y * Y * 0.5,
    "(x^2+y^2)^(-1/2)": lambda X, Y: (X * X + Y * Y).power(-0.5),
    "x^3 - 3xy^2/2": lambda X, Y: X * X * X - X * Y * Y * 1.5,
    "0": _const(0.0),
}

PAIRS: dict[str, tuple[str, str]] = {
    "H3xR": ("-x", "log y"),
    "x|log y": ("x", "log y"),
    "quadratic|x": ("x^2 - y^2/2", "x"),
    "inverse|x": ("(x^2+y^2)^(-1/2)", "x"),
    "x|inverse": ("x", "(x^2+y^2)^(-1/2)"),
    "cubic|log y": ("x^3 - 3xy^2/2", "log y"),
}


def closed_form_field(name: str, f1: Callable, f2: Callable) -> HarmonicField:
    def f_jet(p: JoycePoint, order: int = 3) -> FJet:
        X = Jet.variable(0, p.x, order)
        Y = Jet.variable(1, p.y, order)
        return f_jet_from_xy(stack([f1(X, Y), f2(X, Y)]), p)

    return HarmonicField(name, "builtin", f_jet, (f1, f2))


def builtin_scalars() -> dict[str, Callable]:
    return dict(SCALARS)


def builtin_seeds() -> dict[str, HarmonicField]:
    """Catalogue of closed-form harmonic pairs, keyed by name."""
    return {name: closed_form_field(name, SCALARS[a], SCALARS[b]) for name, (a, b) in PAIRS.items()}


@dataclass(frozen=True)
class SeedPipeline:
    """Everything needed to turn an odd seed ``phi1`` into Joyce data."""

    phi1: _series.ParitySeries
    phi2: _series.ParitySeries
    evaluator: GEvaluator

    @classmethod
    def from_phi1(cls, phi1, n_terms: int = 200, phi2=None, **quadrature) -> "SeedPipeline":
        if phi2 is None:
            phi2 = _series.solve_phi2(phi1, n_terms)
        return cls(phi1, phi2, GEvaluator((phi1, phi2), **quadrature))

    def g_jet(self, p: JoycePoint, order: int):
        r, s = joyce_to_twistor(p)
        return eval_G_jet(self.evaluator, r, s, order)

    def f_jet(self, p: JoycePoint, order: int = 3) -> FJet:
        gj = self.g_jet(p, order)
        return f_jet_from_g(gj, p.zeta, p.xi)

    def field(self, name: str = "pipeline") -> HarmonicField:
        return HarmonicField(name, "pipeline", self.f_jet)


# residuals -----------------------------------------------------------------


def ash_residual(F: HarmonicField, p: JoycePoint) -> float:
    """``max_i |F_i,xx + F_i,yy + F_i,y / y|`` at ``p``."""
    fx, fy = xy_gradient_jets(F.f_jet(p, 2))
    lap = fx.partial(1, 0) + fy.partial(0, 1) + fy.value / p.y
    return float(np.max(np.abs(lap)))


def joyce_residual(pq: PQJet) -> float:
    """Largest residual of ``P_x = Q_y`` and ``P_y + Q_x = P / y``."""
    dP, dQ = pq.dP, pq.dQ
    e1 = dP[:, 0] - dQ[:, 1]
    e2 = dP[:, 1] + dQ[:, 0] - pq.P / pq.point.y
    return float(max(np.max(np.abs(e1)), np.max(np.abs(e2))))


# metric ------------------------------------------------------------------------

G_INDEX = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]
AXES = ("x", "y", "u1", "u2")
G_NAMES = ["g_" + AXES[a] + AXES[b] for a, b in G_INDEX]


@dataclass(frozen=True)
class MetricJet:
    """A metric on ``(x, y, u1, u2)`` depending on ``(x, y)`` only, as a jet in ``(dx, dy)``."""

    point: JoycePoint
    jet: Jet
    complexified: bool = False

    def __post_init__(self):
        if self.jet.tshape != (4, 4):
            raise ValueError("metric jet must have tensor shape (4, 4)")

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def g(self) -> np.ndarray:
        return self.jet.value

    @property
    def dg(self) -> np.ndarray:
        """``dg[a]`` = derivative along ``a`` = x, y."""
        return np.stack([self.jet.partial(1, 0), self.jet.partial(0, 1)])

    @property
    def d2g(self) -> np.ndarray:
        """``d2g[k]`` for k = xx, xy, yy."""
        j = self.jet
        return np.stack([j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)])

    @property
    def d3g(self) -> np.ndarray:
        """``d3g[k]`` for k = xxx, xxy, xyy, yyy."""
        j = self.jet
        return np.stack([j.partial(3, 0), j.partial(2, 1), j.partial(1, 2), j.partial(0, 3)])

    @classmethod
    def from_arrays(cls, point, g, dg=None, d2g=None, d3g=None, complexified=False) -> "MetricJet":
        parts = {(0, 0): np.asarray(g)}
        order = 0
        if dg is not None:
            parts[(1, 0)], parts[(0, 1)] = dg[0], dg[1]
            order = 1
        if d2g is not None:
            parts[(2, 0)], parts[(1, 1)], parts[(0, 2)] = d2g[0], d2g[1], d2g[2]
            order = 2
        if d3g is not None:
            for k, mn in enumerate([(3, 0), (2, 1), (1, 2), (0, 3)]):
                parts[mn] = d3g[k]
            order = 3
        return cls(point, Jet.from_partials(parts, order), complexified)

    @classmethod
    def from_function(cls, point: JoycePoint, fn: Callable, order: int = 2, complexified=False) -> "MetricJet":
        """``fn(X, Y)`` returns a 4x4 nested list of scalar jets (or plain numbers)."""
        X = Jet.variable(0, point.x, order)
        Y = Jet.variable(1, point.y, order)
        rows = fn(X, Y)
        entries = []
        for row in rows:
            entries.append([e if isinstance(e, Jet) else Jet.constant(e, order) for e in row])
        return cls(point, stack([stack(row) for row in entries]), complexified)

    def independent_entries(self) -> np.ndarray:
        return np.array([self.g[a, b] for a, b in G_INDEX])


def assemble_metric(pq: PQJet, mode: str = "real", reality_tol: float = 1e-8) -> MetricJet:
    """Joyce's metric from P, Q jets.

    ``mode="real"`` first aligns the common phase of P, Q and requires the
    result to be real; ``mode="complexified"`` keeps complex P, Q and builds a
    complex symmetric (bilinear) metric.
    """
    if mode not in ("real", "complexified"):
        raise ValueError(f"unknown mode {mode!r}")
    if pq.degenerate:
        raise Degenerate(f"P1 Q2 - Q1 P2 = {pq.det:.3g} at {pq.point}")
    if mode == "real":
        pq = realify(pq, reality_tol)
    P, Q = pq.Pj, pq.Qj
    P1, P2, Q1, Q2 = P[0], P[1], Q[0], Q[1]
    det = P1 * Q2 - Q1 * P2
    w = (det * det).reciprocal()
    g11 = (P2 * P2 + Q2 * Q2) * w
    g12 = -(P1 * P2 + Q1 * Q2) * w
    g22 = (P1 * P1 + Q1 * Q1) * w
    k = g11.order
    Y = Jet.variable(1, pq.point.y, k)
    h = (Y * Y).reciprocal()
    z = h * 0.0
    rows = [[h, z, z, z], [z, h, z, z], [z, z, g11, g12], [z, z, g12, g22]]
    return MetricJet(pq.point, stack([stack(row) for row in rows]), mode == "complexified")


def metric_at(F: HarmonicField, p: JoycePoint, order: int = 2, mode: str = "real") -> MetricJet:
    """Metric jet of order ``order`` at ``p`` (needs the F jet of order ``order + 1``)."""
    return assemble_metric(pq_jet(F.f_jet(p, order + 1), p), mode)


def grid_row(F: HarmonicField, p: JoycePoint, mode: str = "real") -> dict:
    """One row of the metric grid export."""
    fj = F.f_jet(p, 3)
    pq = pq_jet(fj, p)
    mj = assemble_metric(pq, mode)
    row = {"x": p.x, "y": p.y}
    for name, v in zip(G_NAMES, mj.independent_entries()):
        row[name] = v
    fx, fy = xy_gradient_jets(fj)
    lap = fx.partial(1, 0) + fy.partial(0, 1) + fy.value / p.y
    row["joyce"] = joyce_residual(pq)
    row["ash"] = float(np.max(np.abs(lap)))
    row["cp"] = cp_residual(fj, p)
    return row


GRID_COLUMNS = ["x", "y", *G_NAMES, "joyce", "ash", "cp"]


def scale_check(pq: PQJet, lam: float) -> tuple[MetricJet, MetricJet]:
    """Metrics for ``(P, Q)`` and ``(lam P, lam Q)``; used to test the fiber scaling law."""
    scaled = PQJet(pq.point, pq.Pj * lam, pq.Qj * lam, pq.tol)
    return assemble_metric(pq), assemble_metric(scaled)

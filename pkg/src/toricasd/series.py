"""Parity-aware truncated power series and the seed ODE.

Seeds are odd holomorphic functions about ``z = 0``.  A :class:`ParitySeries`
stores only the coefficients allowed by its parity, so oddness can never be
broken by rounding.  :func:`solve_phi2` integrates

    (z**2 + 1) phi1'(z) + i (z**2 - 1) phi2'(z) = const

term by term for the unique odd ``phi2``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ODD, EVEN = "odd", "even"


class OutsideDomain(ValueError):
    """Evaluation point lies outside the disc of convergence."""


class DivergentTail(ArithmeticError):
    """The geometric tail estimate does not converge at the evaluation point."""


@dataclass(frozen=True)
class ParitySeries:
    """Truncated power series with a single parity.

    Coefficient ``k`` multiplies ``z**(2k+1)`` for odd series and ``z**(2k)``
    for even series.  ``radius`` may be ``inf`` for polynomials.
    """

    parity: str
    coefficients: np.ndarray
    radius: float = math.inf
    safety: float = 0.9

    def __post_init__(self):
        if self.parity not in (ODD, EVEN):
            raise ValueError(f"parity must be 'odd' or 'even', got {self.parity!r}")
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not 0 < self.safety < 1:
            raise ValueError("safety factor must lie in (0, 1)")

    @classmethod
    def odd(cls, coefficients, radius=math.inf, **kw) -> "ParitySeries":
        return cls(ODD, coefficients, radius, **kw)

    @classmethod
    def even(cls, coefficients, radius=math.inf, **kw) -> "ParitySeries":
        return cls(EVEN, coefficients, radius, **kw)

    @property
    def truncation(self) -> int:
        return len(self.coefficients)

    @property
    def offset(self) -> int:
        return 1 if self.parity == ODD else 0

    @property
    def degree(self) -> int:
        """Highest power of ``z`` the series knows about."""
        return 2 * (self.truncation - 1) + self.offset

    def dense(self) -> np.ndarray:
        """Ordinary coefficient vector, index = power of z."""
        out = np.zeros(self.degree + 1, dtype=complex)
        out[self.offset :: 2] = self.coefficients
        return out

    def __call__(self, z):
        """Truncated sum (no tail bookkeeping)."""
        z = np.asarray(z, dtype=complex)
        w = z * z
        acc = np.zeros_like(z)
        for a in self.coefficients[::-1]:
            acc = acc * w + a
        return acc * z if self.parity == ODD else acc

    # arithmetic -----------------------------------------------------------
    def _binary_degree(self, other: "ParitySeries") -> int:
        return min(self.degree, other.degree)

    def __add__(self, other: "ParitySeries") -> "ParitySeries":
        if not isinstance(other, ParitySeries):
            return NotImplemented
        if other.parity != self.parity:
            raise ValueError("cannot add series of different parity")
        n = min(self.truncation, other.truncation)
        return ParitySeries(
            self.parity,
            self.coefficients[:n] + other.coefficients[:n],
            min(self.radius, other.radius),
            self.safety,
        )

    def __neg__(self) -> "ParitySeries":
        return ParitySeries(self.parity, -self.coefficients, self.radius, self.safety)

    def __sub__(self, other: "ParitySeries") -> "ParitySeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ParitySeries):
            parity = EVEN if self.parity == other.parity else ODD
            deg = self._binary_degree(other)
            prod = np.convolve(self.dense(), other.dense())[: deg + 1]
            off = 1 if parity == ODD else 0
            return ParitySeries(parity, prod[off::2], min(self.radius, other.radius), self.safety)
        return ParitySeries(self.parity, self.coefficients * complex(other), self.radius, self.safety)

    __rmul__ = __mul__


def eval_series(s: ParitySeries, z: complex) -> tuple[complex, float]:
    """Evaluate ``s`` at ``z`` and bound the truncation error.

    The bound is the last stored term times a geometric factor
    ``q / (1 - q)`` where ``q`` is the larger of ``(|z| / radius)**2`` and the
    ratio of the last two stored terms at ``|z|``.

    Raises
    ------
    OutsideDomain
        if ``|z| >= s.radius``.
    DivergentTail
        if the ratio estimate is not below one.
    """
    z = complex(z)
    if abs(z) >= s.radius:
        raise OutsideDomain(f"|z| = {abs(z):.6g} is outside the radius {s.radius:.6g}")
    value = complex(s(z))
    t = abs(z) ** 2
    q = t / s.radius**2 if math.isfinite(s.radius) else 0.0
    c = np.abs(s.coefficients)
    if s.truncation >= 2 and c[-1] > 0 and c[-2] > 0:
        q = max(q, c[-1] / c[-2] * t)
    if q >= 1:
        raise DivergentTail(f"tail ratio estimate {q:.3g} >= 1 at |z| = {abs(z):.6g}")
    last = c[-1] * abs(z) ** s.degree
    return value, float(last * q / (1 - q))


def derivative(s: ParitySeries) -> ParitySeries:
    """Termwise derivative; the parity flips and the radius is kept."""
    c = s.coefficients
    if s.parity == ODD:
        k = np.arange(len(c))
        return ParitySeries(EVEN, (2 * k + 1) * c, s.radius, s.safety)
    if len(c) == 1:
        return ParitySeries(ODD, [0.0], s.radius, s.safety)
    k = np.arange(1, len(c))
    return ParitySeries(ODD, 2 * k * c[1:], s.radius, s.safety)


def solve_phi2(phi1: ParitySeries, n_terms: int, constant: complex = 2.0) -> ParitySeries:
    """Odd ``phi2`` with ``(z^2+1) phi1' + i (z^2-1) phi2' = constant`` and ``phi2(0) = 0``.

    Coefficients of ``phi1`` beyond its truncation are taken to be zero.  The
    radius of the result is capped at 1 by the pole of ``1/(z^2 - 1)``.
    """
    if phi1.parity != ODD:
        raise ValueError("phi1 must be odd")
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    a = np.zeros(n_terms + 1, dtype=complex)
    m = min(n_terms, phi1.truncation)
    a[:m] = phi1.coefficients[:m]
    j = np.arange(1, n_terms)
    w = np.empty(n_terms, dtype=complex)
    w[0] = constant - a[0]
    w[1:] = -((2 * j + 1) * a[j] + (2 * j - 1) * a[j - 1])
    c = 1j * np.cumsum(w)
    b = c / (2 * np.arange(n_terms) + 1)
    return ParitySeries(ODD, b, min(phi1.radius, 1.0), phi1.safety)


def _check_points(series, points):
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    bad = [s for s in series if np.any(np.abs(z) >= s.radius)]
    if bad:
        raise OutsideDomain("sample points must lie inside every series' radius")
    return z


def combination(phi1, phi2, q_coeffs, points) -> np.ndarray:
    """``(a z^2 + b) phi1'(z) + (c z^2 + d) phi2'(z)`` at ``points``."""
    a, b, c, d = q_coeffs
    z = _check_points((phi1, phi2), points)
    z2 = z * z
    return (a * z2 + b) * derivative(phi1)(z) + (c * z2 + d) * derivative(phi2)(z)


STANDARD_Q = (1.0, 1.0, 1j, -1j)


def ode_residual(phi1, phi2, sample_points) -> float:
    """Max of ``|(z^2+1) phi1' + i (z^2-1) phi2' - 2|`` over the samples."""
    return float(np.max(np.abs(combination(phi1, phi2, STANDARD_Q, sample_points) - 2)))


def combination_constancy(phi1, phi2, q_coeffs, sample_points) -> tuple[complex, float]:
    """Mean and maximal deviation of the ``q``-combination over the samples."""
    f = combination(phi1, phi2, q_coeffs, sample_points)
    mean = complex(np.mean(f))
    return mean, float(np.max(np.abs(f - mean)))


@dataclass(frozen=True)
class SeedReport:
    derivative_at_zero: tuple[complex, complex]
    nondegenerate: bool
    circle_distance: float
    component: str
    reality_obstruction: float
    tolerance: float = field(default=1e-9)

    def to_json(self) -> dict:
        d1, d2 = self.derivative_at_zero
        return {
            "derivative_at_zero": [[d1.real, d1.imag], [d2.real, d2.imag]],
            "nondegenerate": self.nondegenerate,
            "circle_distance": self.circle_distance,
            "component": self.component,
            "reality_obstruction": self.reality_obstruction,
            "tolerance": self.tolerance,
        }


def validate_seed(phi1: ParitySeries, phi2: ParitySeries, tol: float = 1e-9) -> SeedReport:
    """Classify a seed by ``|phi1'(0) - 1|`` and the reality of ``conj(phi1'(0)) phi2'(0)``."""
    d1 = complex(phi1.coefficients[0]) if phi1.parity == ODD else 0j
    d2 = complex(phi2.coefficients[0]) if phi2.parity == ODD else 0j
    dist = abs(d1 - 1)
    obstruction = abs((d1.conjugate() * d2).imag)
    if dist < 1 - tol:
        component = "inside"
    elif dist > 1 + tol:
        component = "outside"
    else:
        component = "boundary"
    ok = component != "boundary" and obstruction > tol
    return SeedReport((d1, d2), ok, dist, component, obstruction, tol)


# seed files -----------------------------------------------------------------


def _pairs_to_complex(pairs) -> list[complex]:
    out = []
    for p in pairs:
        if isinstance(p, (list, tuple)) and len(p) == 2:
            out.append(complex(float(p[0]), float(p[1])))
        else:
            out.append(complex(p))
    return out


def _radius(value) -> float:
    if value is None or value in ("inf", "Infinity"):
        return math.inf
    return float(value)


def load_seed(path) -> tuple[ParitySeries, int]:
    """Read a seed file; returns ``(phi1, truncation)``."""
    data = json.loads(Path(path).read_text())
    return seed_from_dict(data)


def seed_from_dict(data: dict) -> tuple[ParitySeries, int]:
    try:
        block = data["phi1"]
        coeffs = _pairs_to_complex(block["odd_coefficients"])
        radius = _radius(block.get("radius"))
        truncation = int(data["truncation"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed seed file: {exc}") from exc
    return ParitySeries.odd(coeffs, radius), truncation


def seed_to_dict(phi1: ParitySeries, truncation: int) -> dict:
    return {
        "phi1": {
            "odd_coefficients": [[c.real, c.imag] for c in phi1.coefficients],
            "radius": phi1.radius if math.isfinite(phi1.radius) else None,
        },
        "truncation": truncation,
    }


def series_to_dict(s: ParitySeries) -> dict:
    key = "odd_coefficients" if s.parity == ODD else "even_coefficients"
    return {
        key: [[c.real, c.imag] for c in s.coefficients],
        "radius": s.radius if math.isfinite(s.radius) else None,
    }

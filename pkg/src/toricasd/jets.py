"""Truncated bivariate Taylor jets.

A :class:`Jet` stores the Taylor coefficients of a (possibly tensor-valued)
function of two variables ``(h1, h2)`` about a base point::

    f(h1, h2) = sum_{m + n <= order} c[m, n] * h1**m * h2**n

Coefficients with ``m + n > order`` are unknown and kept at zero.  Partial
derivatives at the base point are ``m! n! c[m, n]``.  Arithmetic between jets
truncates to the smaller order, so the order always states how much of the
result is trustworthy.

The coefficient array has shape ``tshape + (N + 1, N + 1)``: any leading
tensor axes, followed by the two jet axes.  :func:`jeinsum` contracts tensor
axes while multiplying the jet parts, which is all the curvature code needs.
"""
from __future__ import annotations

import math
import string
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _mask(order: int) -> np.ndarray:
    m, n = np.indices((order + 1, order + 1))
    return (m + n <= order).astype(float)


def _truncate(c: np.ndarray, order: int) -> np.ndarray:
    c = c[..., : order + 1, : order + 1]
    return c * _mask(order)


class Jet:
    """Tensor-valued truncated Taylor polynomial in two variables."""

    __array_priority__ = 1000

    def __init__(self, coeffs, order: int):
        c = np.asarray(coeffs)
        if c.shape[-2:] != (order + 1, order + 1):
            raise ValueError(f"jet axes must be {(order + 1, order + 1)}, got {c.shape[-2:]}")
        if not np.iscomplexobj(c):
            c = c.astype(float)
        self.c = c * _mask(order)
        self.order = order

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value)
        c = np.zeros(value.shape + (order + 1, order + 1), dtype=np.result_type(value, float))
        c[..., 0, 0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, axis: int, base, order: int) -> "Jet":
        """The jet of ``base + h_axis`` (``axis`` is 0 or 1)."""
        c = np.zeros((order + 1, order + 1), dtype=np.result_type(base, float))
        c[0, 0] = base
        if order >= 1:
            c[(1, 0) if axis == 0 else (0, 1)] = 1.0
        return cls(c, order)

    @classmethod
    def from_partials(cls, partials: dict, order: int) -> "Jet":
        """Build from a map ``(m, n) -> d^{m+n} f / dh1^m dh2^n`` (missing keys are zero)."""
        first = next(iter(partials.values()))
        first = np.asarray(first)
        dtype = np.result_type(*[np.asarray(v) for v in partials.values()], float)
        c = np.zeros(first.shape + (order + 1, order + 1), dtype=dtype)
        for (m, n), v in partials.items():
            if m + n <= order:
                c[..., m, n] = np.asarray(v) / (math.factorial(m) * math.factorial(n))
        return cls(c, order)

    # introspection ------------------------------------------------------
    @property
    def tshape(self) -> tuple:
        return self.c.shape[:-2]

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0, 0]

    def partial(self, m: int, n: int) -> np.ndarray:
        if m + n > self.order:
            raise ValueError(f"partial ({m},{n}) exceeds jet order {self.order}")
        return self.c[..., m, n] * (math.factorial(m) * math.factorial(n))

    def partials(self) -> dict:
        return {
            (m, n): self.partial(m, n)
            for m in range(self.order + 1)
            for n in range(self.order + 1 - m)
        }

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(_truncate(self.c, order), order)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[idx + (slice(None), slice(None))], self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.c.real, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.c.imag, self.order)

    def conj(self) -> "Jet":
        return Jet(self.c.conj(), self.order)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, tshape={self.tshape})"

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return _truncate(self.c, n), _truncate(other.c, n), n
        other = np.asarray(other)
        return self.c, other, self.order

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, n = self._coerce(other)
            return Jet(a + b, n)
        return self + Jet.constant(np.broadcast_to(other, self.tshape), self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, n = self._coerce(other)
            return Jet(_conv(a, b, n), n)
        other = np.asarray(other)
        return Jet(self.c * other[..., None, None], self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other)
        return Jet(self.c / other[..., None, None], self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            out = Jet.constant(np.ones(self.tshape), self.order)
            for _ in range(k):
                out = out * self
            return out
        return self.power(k)

    # derivatives --------------------------------------------------------
    def diff(self, axis: int) -> "Jet":
        """Partial derivative in ``h1`` (axis 0) or ``h2`` (axis 1); order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        n = self.order
        k = np.arange(1, n + 1, dtype=float)
        if axis == 0:
            c = self.c[..., 1:, :] * k[:, None]
            c = c[..., :, :n]
        else:
            c = self.c[..., :, 1:] * k[None, :]
            c = c[..., :n, :]
        return Jet(c, n - 1)

    # univariate functions -------------------------------------------------
    def _apply(self, taylor) -> "Jet":
        """Compose with a function given by its Taylor coefficients at the value."""
        c0 = self.value
        coef = taylor(c0, self.order)
        h = Jet(self.c - _const_array(c0, self.order), self.order)
        out = Jet.constant(coef[self.order], self.order)
        for k in range(self.order - 1, -1, -1):  # Horner
            out = out * h + Jet.constant(coef[k], self.order)
        return out

    def reciprocal(self) -> "Jet":
        return self.power(-1)

    def power(self, alpha) -> "Jet":
        def taylor(c0, n):
            base = c0 ** alpha
            out, binom = [], 1.0
            for k in range(n + 1):
                out.append(base * binom / c0 ** k)
                binom = binom * (alpha - k) / (k + 1)
            return out

        return self._apply(taylor)

    def sqrt(self) -> "Jet":
        """Principal square root at the base value."""
        return self.power(0.5)

    def log(self) -> "Jet":
        def taylor(c0, n):
            return [np.log(c0)] + [(-1) ** (k + 1) / (k * c0 ** k) for k in range(1, n + 1)]

        return self._apply(taylor)

    def exp(self) -> "Jet":
        def taylor(c0, n):
            e = np.exp(c0)
            return [e / math.factorial(k) for k in range(n + 1)]

        return self._apply(taylor)

    # composition ----------------------------------------------------------
    def substitute(self, x1: "Jet", x2: "Jet") -> "Jet":
        """Compose ``f(h1, h2)`` with ``h1 = x1(k1, k2)``, ``h2 = x2(k1, k2)``.

        ``x1`` and ``x2`` must be scalar jets with zero constant term.
        """
        if abs(complex(x1.value)) > 0 or abs(complex(x2.value)) > 0:
            raise ValueError("substituted jets must vanish at the base point")
        n = min(self.order, x1.order, x2.order)
        p1 = [Jet.constant(1.0, n)]
        p2 = [Jet.constant(1.0, n)]
        for _ in range(n):
            p1.append(p1[-1] * x1.truncate(n))
            p2.append(p2[-1] * x2.truncate(n))
        out = Jet.constant(np.zeros(self.tshape, dtype=self.c.dtype), n)
        for m in range(n + 1):
            for k in range(n + 1 - m):
                coeff = self.c[..., m, k]
                if np.any(coeff):
                    out = out + (p1[m] * p2[k]) * coeff
        return out


def _const_array(c0, order):
    c0 = np.asarray(c0)
    out = np.zeros(c0.shape + (order + 1, order + 1), dtype=np.result_type(c0, float))
    out[..., 0, 0] = c0
    return out


def _conv(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.result_type(a, b))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            ai = a[..., i, j]
            if not np.any(ai):
                continue
            out[..., i:, j:] += ai[..., None, None] * b[..., : n + 1 - i, : n + 1 - j]
    return out * _mask(n)


def jeinsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """``np.einsum`` over tensor axes with jet multiplication on the jet axes.

    ``subscripts`` names tensor axes only, e.g. ``"ad,dbc->abc"``.
    """
    n = min(a.order, b.order)
    ac, bc = _truncate(a.c, n), _truncate(b.c, n)
    lhs, out_idx = subscripts.split("->")
    sa, sb = lhs.split(",")
    used = set(subscripts)
    x, y = [ch for ch in string.ascii_letters if ch not in used][:2]
    spec = f"{sa},{sb}{x}{y}->{out_idx}{x}{y}"
    probe = np.einsum(f"{sa},{sb}->{out_idx}", ac[..., 0, 0], bc[..., 0, 0])
    out = np.zeros(probe.shape + (n + 1, n + 1), dtype=np.result_type(ac, bc))
    for i in range(n + 1):
        for j in range(n + 1 - i):
            ai = ac[..., i, j]
            if not np.any(ai):
                continue
            out[..., i:, j:] += np.einsum(spec, ai, bc[..., : n + 1 - i, : n + 1 - j])
    return Jet(out, n)


def inv_matrix(g: Jet) -> Jet:
    """Inverse of a square-matrix-valued jet by the nilpotent Neumann series."""
    g0 = g.value
    g0inv = np.linalg.inv(g0)
    n = g.order
    h = Jet(g.c - _const_array(g0, n), n)
    step = jeinsum("ab,bc->ac", Jet.constant(-g0inv, n), h)
    term = Jet.constant(np.eye(g0.shape[0], dtype=g0inv.dtype), n)
    acc = term
    for _ in range(n):
        term = jeinsum("ab,bc->ac", step, term)
        acc = acc + term
    return jeinsum("ab,bc->ac", acc, Jet.constant(g0inv, n))


def stack(jets) -> Jet:
    """Stack jets of equal tensor shape along a new leading tensor axis."""
    n = min(j.order for j in jets)
    return Jet(np.stack([_truncate(j.c, n) for j in jets]), n)

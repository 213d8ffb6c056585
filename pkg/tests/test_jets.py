import math

import numpy as np
import pytest

from toricasd.jets import Jet, inv_matrix, jeinsum, stack


def test_partials_of_closed_forms():
    x0, y0 = 0.3, 1.7
    X, Y = Jet.variable(0, x0, 4), Jet.variable(1, y0, 4)
    r = (X * X + Y * Y).power(-0.5)
    rho2 = x0**2 + y0**2
    assert r.value == pytest.approx(rho2**-0.5)
    assert r.partial(1, 0) == pytest.approx(-x0 * rho2**-1.5)
    assert r.partial(1, 1) == pytest.approx(3 * x0 * y0 * rho2**-2.5)
    L = Y.log()
    for k in range(1, 5):
        assert L.partial(0, k) == pytest.approx((-1) ** (k + 1) * math.factorial(k - 1) / y0**k)
    E = (X * 2.0).exp()
    assert E.partial(3, 0) == pytest.approx(8 * math.exp(2 * x0))


def test_arithmetic_identities():
    X, Y = Jet.variable(0, 0.4, 3), Jet.variable(1, 2.0, 3)
    f = X * Y + X.sqrt()
    g = f / f
    assert np.allclose(g.c[..., 0, 0], 1) and np.allclose(g.c.ravel()[1:], 0)
    assert np.allclose((f - f).c, 0)
    assert np.allclose((Y**2).c, (Y * Y).c)


def test_order_tracking():
    a = Jet.variable(0, 1.0, 3)
    b = Jet.variable(1, 1.0, 2)
    assert (a * b).order == 2
    assert a.diff(0).order == 2
    with pytest.raises(ValueError):
        a.partial(2, 2)
    with pytest.raises(ValueError):
        b.truncate(3)


def test_substitute_composes():
    # f(h1, h2) = h1^2 + h2 composed with h1 = k1 + k2, h2 = k1 k2
    f = Jet.from_partials({(2, 0): 2.0, (0, 1): 1.0, (0, 0): 0.0}, 3)
    u = Jet.variable(0, 0.0, 3) + Jet.variable(1, 0.0, 3)
    v = Jet.variable(0, 0.0, 3) * Jet.variable(1, 0.0, 3)
    h = f.substitute(u, v)
    # (k1 + k2)^2 + k1 k2
    assert h.partial(2, 0) == pytest.approx(2)
    assert h.partial(1, 1) == pytest.approx(3)
    with pytest.raises(ValueError):
        f.substitute(u + 1.0, v)


def test_matrix_inverse_and_einsum():
    X, Y = Jet.variable(0, 0.2, 3), Jet.variable(1, 1.3, 3)
    g = stack([stack([Y * Y + 1.0, X * Y]), stack([X * Y, X * X + 2.0])])
    gi = inv_matrix(g)
    eye = jeinsum("ab,bc->ac", g, gi)
    assert np.allclose(eye.value, np.eye(2))
    assert np.allclose(eye.c[..., 1:, :], 0, atol=1e-13)
    assert np.allclose(eye.c[..., :, 1:], 0, atol=1e-13)
    tr = jeinsum("ab,ab->", g, gi)
    assert tr.value == pytest.approx(2)

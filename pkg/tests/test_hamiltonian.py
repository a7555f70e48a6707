import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hjdg.hamiltonian import NAMES, catalog, directional, embed_1d, reduce_diagonal

ONE_D = [n for n in NAMES if catalog(n).dim == 1]
TWO_D = [n for n in NAMES if catalog(n).dim == 2]


def test_catalog_covers_all_names():
    assert set(NAMES) == {"linsmth", "linnonsmth", "burgers1d", "eikonal1d", "cos1d", "quartic1d",
                          "rotation", "burgers2d", "crossderiv", "control", "cos2d", "sinsum",
                          "surface"}
    with pytest.raises(KeyError):
        catalog("nope")


def test_catalog_examples():
    b = catalog("burgers1d")
    assert b.H(3.0, 0.0) == 4.5 and b.H1(3.0, 0.0) == 3.0
    assert catalog("eikonal1d").H1(0.0, 0.0) == 0.0
    q = catalog("quartic1d")
    assert q.H(1.0, 0.0) == 0.0 and q.H(2.0, 0.0) == 0.0
    assert catalog("burgers2d").H(0.0, 0.0, 0.0, 0.0) == 0.5


def _fd_points(name, rng):
    p = rng.uniform(-2, 2, 40)
    q = rng.uniform(-2, 2, 40)
    x = rng.uniform(-3, 3, 40)
    y = rng.uniform(-3, 3, 40)
    # stay away from kinks of sign/abs and from jumps of sign(cos x)
    keep = (np.abs(p) > 1e-3) & (np.abs(q) > 1e-3) & (np.abs(np.cos(x)) > 1e-3)
    return p[keep], q[keep], x[keep], y[keep]


@pytest.mark.parametrize("name", ONE_D)
def test_1d_derivative_matches_finite_differences(name, rng):
    m = catalog(name)
    p, _, x, _ = _fd_points(name, rng)
    h = 1e-5
    fd = (m.H(p + h, x) - m.H(p - h, x)) / (2 * h)
    assert np.allclose(m.H1(p, x), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("name", TWO_D)
def test_2d_derivatives_match_finite_differences(name, rng):
    m = catalog(name)
    p, q, x, y = _fd_points(name, rng)
    h = 1e-5
    fd1 = (m.H(p + h, q, x, y) - m.H(p - h, q, x, y)) / (2 * h)
    fd2 = (m.H(p, q + h, x, y) - m.H(p, q - h, x, y)) / (2 * h)
    assert np.allclose(m.H1(p, q, x, y), fd1, rtol=1e-6, atol=1e-8)
    assert np.allclose(m.H2(p, q, x, y), fd2, rtol=1e-6, atol=1e-8)


def test_directional_examples():
    b = directional(catalog("burgers2d"), (1.0, 0.0), (0.0, 1.0))
    assert b.Hn(0.3, 0.5, 0.0, 0.0) == pytest.approx(1.8)
    s = directional(catalog("surface"), (0.0, 1.0), (-1.0, 0.0))
    p, q = -0.4, 0.7       # gradient = pn * n + pt * t = (-pt, pn)
    assert s.Hn(q, -p, 0.0, 0.0) == pytest.approx(-q / np.sqrt(p * p + q * q + 1))


def test_directional_rejects_bad_frames():
    m = catalog("crossderiv")
    with pytest.raises(ValueError):
        directional(m, (1.0, 1.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        directional(m, (1.0, 0.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        directional(catalog("burgers1d"), (1.0, 0.0), (0.0, 1.0))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TWO_D), st.floats(0, 2 * np.pi), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(-2, 2), st.floats(-2, 2))
def test_frame_identity(name, theta, pn, pt, x, y):
    m = catalog(name)
    n = np.array([np.cos(theta), np.sin(theta)])
    t = np.array([-n[1], n[0]])
    d = directional(m, n, t)
    g = pn * n + pt * t
    assert d.H(pn, pt, x, y) == pytest.approx(m.H(g[0], g[1], x, y), abs=1e-13)
    h1, h2 = m.gradient(g[0], g[1], x, y)
    assert d.Hn(pn, pt, x, y) == pytest.approx(h1 * n[0] + h2 * n[1], abs=1e-12)


def test_rotated_frame_crossderiv():
    s = 1 / np.sqrt(2)
    d = directional(catalog("crossderiv"), (s, s), (-s, s))
    pn, pt = 0.8, -1.3
    p, q = pn * s - pt * s, pn * s + pt * s
    assert d.H(pn, pt, 0, 0) == pytest.approx(p * q, abs=1e-12)
    h = 1e-6
    fd = (d.H(pn + h, pt, 0, 0) - d.H(pn - h, pt, 0, 0)) / (2 * h)
    assert d.Hn(pn, pt, 0, 0) == pytest.approx(fd, rel=1e-7)


def test_one_sided_sign_cos():
    m = catalog("linnonsmth")
    x = np.pi / 2
    assert m.H1(1.0, x, -1) == 1.0 and m.H1(1.0, x, +1) == -1.0
    x = 3 * np.pi / 2
    assert m.H1(1.0, x, -1) == -1.0 and m.H1(1.0, x, +1) == 1.0


def test_embedding_and_diagonal_reduction():
    e = embed_1d(catalog("linsmth"))
    assert e.H(2.0, 5.0, 0.7, 1.0) == pytest.approx(np.sin(0.7) * 2.0)
    assert e.H2(2.0, 5.0, 0.7, 1.0) == 0.0
    r = reduce_diagonal(catalog("cos2d"))
    s = 0.3
    assert r.H(s, 0.0) == pytest.approx(-np.cos(2 * s + 1))
    assert r.H1(s, 0.0) == pytest.approx(2 * np.sin(2 * s + 1))

import numpy as np
import pytest

from holab.ambient import (AmbientSpace, Model, apply_J, curvature_tensor, inner, space_form_curvature, to_complex,
                           to_real, wedge)
from holab.errors import InvalidInputError, UnsupportedModelError

SPACES = [AmbientSpace(0, 2), AmbientSpace(4, 2), AmbientSpace(-4, 2)]


def unit(space, i):
    e = np.zeros(space.dim)
    e[i] = 1.0
    return e


def test_inner_basis_values():
    assert inner(AmbientSpace(4, 2), unit(AmbientSpace(4, 2), 0), unit(AmbientSpace(4, 2), 0)) == 1.0
    s = AmbientSpace(-4, 2)
    assert inner(s, unit(s, 0), unit(s, 0)) == -1.0
    f = AmbientSpace(0, 2)
    assert inner(f, unit(f, 0), unit(f, 1)) == 0.0


def test_inner_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        inner(AmbientSpace(4, 2), np.ones(6), np.ones(4))


def test_models_and_dimensions():
    assert AmbientSpace(0, 2).model is Model.FLAT and AmbientSpace(0, 2).dim == 4
    assert AmbientSpace(4, 2).dim == 6
    assert AmbientSpace(-4, 3).model is Model.HYPERBOLIC
    with pytest.raises(UnsupportedModelError):
        AmbientSpace(2, 2)
    with pytest.raises(InvalidInputError):
        AmbientSpace(4, 0)


def test_J_on_first_basis_vector():
    s = AmbientSpace(4, 2)
    out = apply_J(s, unit(s, 0))
    assert out[0] == 0.0 and out[1] == 1.0


@pytest.mark.parametrize("space", SPACES)
def test_J_squares_to_minus_one_and_is_skew(space, rng):
    v = rng.standard_normal(space.dim)
    assert np.allclose(apply_J(space, apply_J(space, v)), -v, atol=0, rtol=0)
    assert abs(inner(space, apply_J(space, v), v)) < 1e-14
    w = rng.standard_normal(space.dim)
    assert np.isclose(inner(space, apply_J(space, v), apply_J(space, w)), inner(space, v, w), atol=1e-13)


def test_complex_round_trip(rng):
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(to_complex(to_real(z)), z)
    assert np.allclose(to_real(1j * z), apply_J(AmbientSpace(4, 2), to_real(z)))


def test_flat_curvature_vanishes(rng):
    s = AmbientSpace(0, 3)
    X, Y, Z = rng.standard_normal((3, s.dim))
    assert np.all(curvature_tensor(s, X, Y, Z) == 0)


def _horizontal_frame(space, rng):
    """Point on the total space and an orthonormal horizontal pair (X, Y) with Y orthogonal to JX."""
    z = np.zeros(space.dim)
    z[0] = 1.0
    basis = [z, apply_J(space, z)]
    out = []
    for _ in range(3):
        v = rng.standard_normal(space.dim)
        for b in basis:
            v = v - inner(space, v, b) / inner(space, b, b) * b
        v /= np.sqrt(inner(space, v, v))
        out.append(v)
        basis += [v, apply_J(space, v)]
    return z, out


def test_sectional_curvatures_cp():
    s = AmbientSpace(4, 3)
    z, (X, Y, _) = _horizontal_frame(s, np.random.default_rng(1))
    assert np.allclose(curvature_tensor(s, X, Y, Y), X, atol=1e-12)
    JX = apply_J(s, X)
    assert np.allclose(curvature_tensor(s, X, JX, JX), 4 * X, atol=1e-12)
    assert abs(inner(s, curvature_tensor(s, X, Y, Y), X) - 1.0) < 1e-12
    assert abs(inner(s, curvature_tensor(s, X, JX, JX), X) - 4.0) < 1e-12


def test_sectional_curvatures_ch():
    s = AmbientSpace(-4, 3)
    z, (X, Y, _) = _horizontal_frame(s, np.random.default_rng(2))
    JX = apply_J(s, X)
    assert abs(inner(s, curvature_tensor(s, X, Y, Y), X) + 1.0) < 1e-12
    assert abs(inner(s, curvature_tensor(s, X, JX, JX), X) + 4.0) < 1e-12


@pytest.mark.parametrize("c", [4, -4])
def test_curvature_symmetries_and_bianchi(c, rng):
    s = AmbientSpace(c, 3)
    X, Y, Z, W = rng.standard_normal((4, s.dim))
    R = lambda a, b, d: curvature_tensor(s, a, b, d)
    assert np.allclose(R(X, Y, Z), -R(Y, X, Z), atol=1e-12)
    assert abs(inner(s, R(X, Y, Z), W) - inner(s, R(Z, W, X), Y)) < 1e-11
    assert np.allclose(R(X, Y, Z) + R(Y, Z, X) + R(Z, X, Y), 0, atol=1e-12)


def test_wedge_and_total_space_curvature(rng):
    s = AmbientSpace(4, 2)
    X, Y, Z = rng.standard_normal((3, s.dim))
    assert np.allclose(wedge(s, X, Y, Z), inner(s, Y, Z) * X - inner(s, X, Z) * Y)
    assert np.allclose(space_form_curvature(s, X, Y, Z), wedge(s, X, Y, Z))

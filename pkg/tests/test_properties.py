import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from holab import catalog
from holab.ambient import AmbientSpace, apply_J, curvature_tensor, inner
from holab.crtype import classify
from holab.holonomy import circle, parallel_transport
from holab.linalg import orthogonal_log, principal_angles
from holab.submanifold import Immersion, frame_at

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
models = st.sampled_from([0, 4, -4])


@given(models, arrays(float, (3, 6), elements=finite))
def test_J_is_an_isometry(c, V):
    s = AmbientSpace(c, 2)
    v, w = V[0, :s.dim], V[1, :s.dim]
    assert np.isclose(inner(s, apply_J(s, v), apply_J(s, w)), inner(s, v, w), atol=1e-9)


@given(st.sampled_from([4, -4]), arrays(float, (3, 6), elements=finite))
def test_first_bianchi(c, V):
    s = AmbientSpace(c, 2)
    X, Y, Z = V
    total = curvature_tensor(s, X, Y, Z) + curvature_tensor(s, Y, Z, X) + curvature_tensor(s, Z, X, Y)
    assert np.max(np.abs(total)) <= 1e-12 * max(1.0, np.max(np.abs(V)) ** 3)


@given(arrays(float, (6, 2), elements=st.floats(-1, 1)), arrays(float, (6, 3), elements=st.floats(-1, 1)))
def test_principal_angles_range_and_symmetry(A, B):
    if np.linalg.matrix_rank(A, 1e-6) < 2 or np.linalg.matrix_rank(B, 1e-6) < 3:
        return
    a = principal_angles(A, B)
    assert np.all(a >= 0) and np.all(a <= np.pi / 2 + 1e-12)
    assert np.allclose(np.sort(a), np.sort(principal_angles(B, A)), atol=1e-8)


@given(arrays(float, (3, 3), elements=st.floats(-0.4, 0.4)))
def test_log_inverts_exp_near_identity(X):
    X = 0.5 * (X - X.T)
    assert np.allclose(orthogonal_log(expm(X)), X, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.4), st.floats(0, 2 * np.pi), arrays(float, 4, elements=st.floats(-1, 1)))
def test_transport_is_an_isometry(radius, phase, coeffs):
    M = catalog.get("sphere-in-rp3-cp3").immersion
    center = np.array([1.5, 0.4])
    loop = circle(center, 0, 1, radius, 24, phase=phase)
    fr = frame_at(M, loop.start)
    if np.linalg.norm(coeffs) < 1e-3:
        return
    v = fr.normal @ coeffs
    w = parallel_transport(M, loop, v)
    assert abs(np.linalg.norm(w) - np.linalg.norm(v)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 3.0), arrays(float, 2, elements=st.floats(-0.3, 0.3)))
def test_classification_is_reparametrisation_invariant(scale, u):
    M = catalog.get("clifford-torus-cp2").immersion

    def jet(v):
        j = M.jets(scale * v)
        return j.point, scale * j.d1, scale ** 2 * j.d2

    N = Immersion(M.space, 2, lambda v: M(scale * v), jet)
    a, b = classify(M, scale * u), classify(N, u)
    assert a.label == b.label and np.allclose(a.angles, b.angles, atol=1e-8)

import numpy as np
import pytest
from dataclasses import replace

from holab import catalog
from holab.ambient import apply_J_columns
from holab.errors import DegenerateImmersionError, InvalidInputError
from holab.holonomy import (HolonomyConfig, ParamCurve, circle, constant, holonomy_algebra, line, loop_transport,
                            orthogonality_defect, parallel_transport, plaquette, polygon, script_R_tensor,
                            tangent_loop_transport)
from holab.hopf import lift_point, pullback
from holab.linalg import principal_angles, skew_to_vec
from holab.submanifold import frame_at, normal_curvature_coords
from holab.verify import period_loop

from conftest import entry, immersion, point


def test_constant_curve_is_identity():
    M = immersion("conic-cp2")
    u = point("conic-cp2")
    fr = frame_at(M, u)
    assert np.allclose(parallel_transport(M, constant(u), fr.normal), fr.normal, atol=1e-14)


def test_flat_plane_loops_are_trivial():
    M = immersion("plane-c2")
    G = loop_transport(M, circle([0.0, 0.0], 0, 1, 0.7))
    assert np.allclose(G, np.eye(2), atol=1e-13)


def test_clifford_plaquette_trivial():
    M = immersion("clifford-torus-cp2")
    G = loop_transport(M, plaquette(point("clifford-torus-cp2"), 0, 1, 0.3))
    assert np.max(np.abs(G - np.eye(2))) < 1e-4


def test_backtracking_loop_is_identity():
    M = immersion("sphere-in-rp3-cp3")
    u = point("sphere-in-rp3-cp3")
    go = line(u, u + [0.3, 0.5])
    G = loop_transport(M, go.then(go.reversed()))
    assert np.max(np.abs(G - np.eye(len(G)))) < 1e-9


def test_concatenation_is_a_product():
    M = immersion("sphere-in-rp3-cp3")
    u = point("sphere-in-rp3-cp3")
    a = plaquette(u, 0, 1, 0.2)
    b = circle(u - [0.1, 0.0], 0, 1, 0.1)
    fr = frame_at(M, u)
    Ga, Gb, Gab = loop_transport(M, a, fr), loop_transport(M, b, fr), loop_transport(M, a.then(b), fr)
    assert np.max(np.abs(Gab - Gb @ Ga)) < 1e-7


def test_plaquette_approximates_curvature():
    M = immersion("sphere-in-rp3-cp3")
    u = point("sphere-in-rp3-cp3")
    R = normal_curvature_coords(M, u)[0, 1]
    errs = []
    for r in (0.04, 0.02, 0.01):
        G = loop_transport(M, plaquette(u, 0, 1, r, 16))
        errs.append(np.max(np.abs((np.eye(len(G)) - G) / r ** 2 - R)))
    # first-order convergence in the radius
    assert errs[0] > errs[1] > errs[2]
    assert 1.6 < errs[0] / errs[1] < 2.4 and 1.6 < errs[1] / errs[2] < 2.4


def test_transport_preserves_norms_and_normality(rng):
    M = immersion("totally-real-surface-cp3")
    u = point("totally-real-surface-cp3")
    fr = frame_at(M, u)
    curve = polygon([u, u + [0.4, 0.1], u + [0.2, 0.5]])
    V = parallel_transport(M, curve, fr.normal)
    fr1 = frame_at(M, curve.end)
    G = fr1.normal_coords(V)
    assert orthogonality_defect(G) < 1e-7


def test_integrator_is_fourth_order():
    M = immersion("sphere-in-rp3-cp3")
    a, b = np.array([1.0, 0.4]), np.array([2.0, 1.5])
    fr = frame_at(M, a)
    ref = parallel_transport(M, line(a, b, 512), fr.normal)
    e8 = np.max(np.abs(parallel_transport(M, line(a, b, 8), fr.normal) - ref))
    e16 = np.max(np.abs(parallel_transport(M, line(a, b, 16), fr.normal) - ref))
    assert 3.5 <= np.log2(e8 / e16) <= 4.5


def test_input_errors():
    M = immersion("rp2-cp2")
    u = point("rp2-cp2")
    tangent = frame_at(M, u).tangent[:, 0]
    with pytest.raises(InvalidInputError):
        parallel_transport(M, line(u, u + 0.1), tangent)
    with pytest.raises(InvalidInputError):
        loop_transport(M, line(u, u + 0.1))
    with pytest.raises(InvalidInputError):
        ParamCurve(())


def test_degenerate_point_reports_curve_time():
    M = immersion("sphere-in-rp3-cp3")
    a, b = np.array([0.5, 0.4]), np.array([-0.5, 0.4])
    with pytest.raises(DegenerateImmersionError) as info:
        parallel_transport(M, line(a, b, 32), frame_at(M, a).normal)
    assert abs(info.value.t - 0.5) < 1e-12


def test_hypersurface_algebra_is_trivial():
    est = holonomy_algebra(immersion("geodesic-sphere-cp2"), point("geodesic-sphere-cp2"))
    assert est.flat and est.dim == 0


def test_complex_line_algebra_is_J():
    M = immersion("complex-line-cp3")
    u = [0.3, 0.1]
    est = holonomy_algebra(M, u)
    assert est.dim == 1
    fr = frame_at(M, u)
    JN = fr.normal_coords(apply_J_columns(fr.normal))
    angle = principal_angles(skew_to_vec(est.algebra[0])[:, None], skew_to_vec(JN)[:, None])[0]
    assert angle < 1e-3
    assert est.residuals["closure"] < 1e-8 and est.residuals["orthogonality"] < 1e-7
    # plaquette logs approach the curvature as the radius shrinks
    trend = [est.trend[r] for r in sorted(est.trend, reverse=True)]
    assert trend[0] > trend[-1]


def test_curve_algebra_with_period_loop():
    e = entry("rp1-in-rp2-cp2-circle")
    u = np.array(e.default_point)
    cfg = HolonomyConfig(extra_loops=(period_loop(u, e.ground_truth.period),))
    est = holonomy_algebra(e.immersion, u, cfg)
    assert est.dim == 1
    dims = sorted((b.dim, b.trivial) for b in est.invariant_blocks)
    assert dims == [(1, True), (2, False)]


def test_sphere_in_rp3_algebra():
    est = holonomy_algebra(immersion("sphere-in-rp3-cp3"), point("sphere-in-rp3-cp3"))
    assert est.dim == 3
    assert sorted(b.dim for b in est.invariant_blocks) == [1, 3]


def test_threads_give_the_same_estimate():
    M = immersion("rp2-cp2")
    u = point("rp2-cp2")
    a = holonomy_algebra(M, u, HolonomyConfig(radii=(0.05,)))
    b = holonomy_algebra(M, u, HolonomyConfig(radii=(0.05,), threads=3))
    assert np.array_equal(a.singular_values, b.singular_values)


def test_lagrangian_tangent_transport_rotates():
    M = immersion("rp2-cp2")
    G = tangent_loop_transport(M, plaquette(point("rp2-cp2"), 0, 1, 0.1))
    assert np.max(np.abs(G - np.eye(2))) > 1e-3


def test_script_R_basic_properties():
    Mh = pullback(immersion("rp2-cp2").space, immersion("rp2-cp2"))
    S = script_R_tensor(Mh, lift_point(point("rp2-cp2")))
    m = S.tensor.shape[0]
    x = np.ones(m) / np.sqrt(m)
    assert abs(S.sectional(x, x)) < 1e-14
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b = rng.standard_normal((2, m))
        assert S.sectional(a, b) <= 1e-12
    props = S.properties()
    assert max(props.values()) < 1e-9

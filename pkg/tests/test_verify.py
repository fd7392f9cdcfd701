import numpy as np
import pytest

from holab import catalog
from holab.catalog import real_chain_tangent
from holab.errors import InvalidInputError, PreconditionError
from holab.holonomy import line, loop_transport, plaquette, tangent_loop_transport
from holab.verify import (CheckReport, VerifyOptions, as_entry, bundle_from_chain, bundle_JTM, check_coisotropic_lemma,
                          check_complex_nullity, check_curve_pullback, check_holonomy_identification,
                          check_holonomy_injection, check_lagrangian_intertwiner, check_lift_identities, check_names,
                          check_reduction_conditions, check_script_r_tensor, check_structure_equations,
                          check_totally_real_splitting, check_vertical_parallelism, run_check, run_suite,
                          sample_loops)

from conftest import entry, immersion, point


def at(name):
    return [point(name)]


def loops(name, count=4, seed=0):
    return sample_loops(immersion(name), point(name), count, np.random.default_rng(seed))


def test_report_pass_flag_follows_residual():
    r = CheckReport("x", 1, 2e-6, 1e-6, True, [])
    assert not r.passed and r.status == "fail"
    d = CheckReport("x", 1, 0.0, 1e-6, False, []).as_dict()
    assert d["pass"] and d["status"] == "pass"


# coisotropic submanifolds

def test_coisotropic_lemma_examples():
    assert check_coisotropic_lemma(immersion("rp2-cp2"), at("rp2-cp2")).max_residual < 1e-10
    r = check_coisotropic_lemma(immersion("clifford-torus-cp2"), at("clifford-torus-cp2"))
    assert r.passed and r.details[0]["max_term"] > 0.1
    assert check_coisotropic_lemma(immersion("geodesic-sphere-cp2"), at("geodesic-sphere-cp2")).passed


def test_coisotropic_lemma_negative_control():
    M = immersion("totally-real-surface-cp3")
    with pytest.raises(PreconditionError) as info:
        check_coisotropic_lemma(M, at("totally-real-surface-cp3"))
    assert info.value.residual > 1e-2
    r = check_coisotropic_lemma(M, at("totally-real-surface-cp3"), require=False)
    assert r.max_residual > 10 * r.tolerance


def test_vertical_parallelism_both_directions():
    for name in ("rp2-cp2", "geodesic-sphere-cp2", "totally-real-surface-cp3", "latitude-circle-cp2"):
        r = check_vertical_parallelism(immersion(name), at(name))
        assert r.passed and all(d["agree"] for d in r.details)


@pytest.mark.parametrize("name", ["rp2-cp2", "geodesic-sphere-cp2", "clifford-torus-cp2"])
def test_holonomy_identification(name):
    assert check_holonomy_identification(immersion(name), loops(name)).passed


def test_holonomy_identification_negative_control():
    # complex line: not coisotropic, the normal transports differ by the fiber rotation
    name = "complex-line-cp3"
    with pytest.raises(PreconditionError):
        check_holonomy_identification(immersion(name), loops(name))
    r = check_holonomy_identification(immersion(name), loops(name), require=False)
    assert r.max_residual > 10 * r.tolerance


def test_script_r_tensor():
    r = check_script_r_tensor(immersion("rh2-ch2"), at("rh2-ch2"))
    assert r.passed and r.details[0]["max_sectional"] <= 1e-9
    r = check_script_r_tensor(immersion("circle-in-rh2-ch2"), at("circle-in-rh2-ch2"), require=False)
    assert r.details[0]["max_sectional"] > 1e-2 and not r.passed


# Lagrangian submanifolds

def test_lagrangian_intertwiner():
    name = "clifford-torus-cp2"
    M = immersion(name)
    lp = [plaquette(point(name), 0, 1, 0.2)]
    assert check_lagrangian_intertwiner(M, lp).passed
    assert np.max(np.abs(loop_transport(M, lp[0]) - np.eye(2))) < 1e-4
    name = "rp2-cp2"
    M = immersion(name)
    lp = [plaquette(point(name), 0, 1, 0.2)]
    assert check_lagrangian_intertwiner(M, lp).passed
    assert np.max(np.abs(tangent_loop_transport(M, lp[0]) - np.eye(2))) > 1e-2
    u = point(name)
    back = line(u, u + 0.2).then(line(u + 0.2, u))
    assert check_lagrangian_intertwiner(M, [back]).passed
    assert np.max(np.abs(tangent_loop_transport(M, back) - np.eye(2))) < 1e-9


def test_lagrangian_intertwiner_negative_control():
    name = "totally-real-surface-cp3"
    with pytest.raises(PreconditionError):
        check_lagrangian_intertwiner(immersion(name), loops(name))
    r = check_lagrangian_intertwiner(immersion(name), loops(name), require=False)
    assert r.max_residual > 10 * r.tolerance


# curves

def test_curve_pullback_predicates():
    r = check_curve_pullback(immersion("geodesic-cp2"), at("geodesic-cp2") + [np.array([1.7])])
    assert r.passed and r.info == {"flat": True, "shape_zero": True, "holomorphic_circle": True}
    r = check_curve_pullback(immersion("latitude-circle-cp2"), at("latitude-circle-cp2"))
    assert r.passed and r.info == {"flat": False, "shape_zero": False, "holomorphic_circle": False}
    assert r.details[0]["pullback_curvature"] > 1e-2


def test_curve_pullback_precondition():
    with pytest.raises(PreconditionError):
        check_curve_pullback(immersion("rp2-cp2"), at("rp2-cp2"))


# totally real submanifolds

def test_holonomy_injection():
    assert check_holonomy_injection(immersion("sphere-in-rp3-cp3"), loops("sphere-in-rp3-cp3")).passed
    with pytest.raises(PreconditionError):
        check_holonomy_injection(immersion("complex-line-cp3"), loops("complex-line-cp3"))
    r = check_holonomy_injection(immersion("complex-line-cp3"), loops("complex-line-cp3"), require=False)
    assert r.max_residual > 10 * r.tolerance


def test_reduction_conditions_examples():
    for name in ("rp1-in-rp2-cp2", "rp1-in-rp2-cp2-circle"):
        tN = entry(name).ground_truth.chain["tangent_N"]
        r = check_reduction_conditions(immersion(name), bundle_from_chain(tN), at(name))
        assert r.passed and r.info == {"parallel": True, "conditions": ["2"]}
    r = check_reduction_conditions(immersion("rp1-in-rp2-cp2"), bundle_JTM, at("rp1-in-rp2-cp2"))
    assert r.passed and "1" in r.info["conditions"]
    r = check_reduction_conditions(immersion("clifford-torus-cp2"), bundle_JTM, at("clifford-torus-cp2"))
    assert r.passed and r.info["parallel"] and "1" in r.info["conditions"]


def test_reduction_conditions_negative_and_errors():
    # J(TM) is not parallel along a non-geodesic circle
    r = check_reduction_conditions(immersion("rp1-in-rp2-cp2-circle"), bundle_JTM, at("rp1-in-rp2-cp2-circle"))
    assert not r.passed and not r.info["parallel"]

    def tangent(u, fr):
        return fr.tangent

    with pytest.raises(InvalidInputError):
        check_reduction_conditions(immersion("rp2-cp2"), tangent, at("rp2-cp2"))


@pytest.mark.parametrize("name,w,alg", [("rp1-in-rp2-cp2", 1, 0), ("rp1-in-rp2-cp2-circle", 2, 1)])
def test_totally_real_splitting(name, w, alg):
    r = run_check("totally-real-splitting", entry(name), VerifyOptions(seed=0))
    assert r.passed and r.info["W_rank"] == w and r.info["algebra_dim_on_W"] == alg


def test_splitting_rejects_bad_chain():
    name = "sphere-in-rp3-cp3"
    with pytest.raises(InvalidInputError):
        check_totally_real_splitting(immersion(name), None, at(name))
    bad = {"N": "RP^2", "dim_N": 2, "tangent_N": real_chain_tangent(2), "W_rank": None}
    with pytest.raises(InvalidInputError):
        check_totally_real_splitting(immersion(name), bad, at(name))


# complex submanifolds

def test_complex_nullity():
    r = check_complex_nullity(immersion("complex-line-cp3"), at("complex-line-cp3"))
    assert r.passed and r.details[0]["nullity"] == 2 and r.max_residual < 1e-8
    assert check_complex_nullity(immersion("complex-line-c2"), at("complex-line-c2")).passed
    r = check_complex_nullity(immersion("conic-cp2"), at("conic-cp2"))
    assert r.passed and r.status == "vacuous"
    r = check_complex_nullity(immersion("conic-cp2"), at("conic-cp2"), directions="all")
    assert r.max_residual > 10 * r.tolerance
    with pytest.raises(PreconditionError):
        check_complex_nullity(immersion("rp2-cp2"), at("rp2-cp2"))


def test_lift_identities_and_structure_equations():
    assert check_lift_identities(immersion("conic-cp2"), at("conic-cp2")).passed
    assert check_structure_equations(immersion("sphere-in-rp3-cp3"), at("sphere-in-rp3-cp3")).passed


# suite runner

def test_suite_skips_inapplicable_checks():
    reports, skipped = run_suite(entry("conic-cp2"), VerifyOptions(loops=2, samples=1))
    names = [r.check_name for r in reports] + [s["check"] for s in skipped]
    assert sorted(names) == check_names()
    assert [r.check_name for r in reports] == sorted(r.check_name for r in reports)
    assert all(r.passed for r in reports)
    assert any(s["check"] == "lagrangian-intertwiner" for s in skipped)


def test_suite_threads_are_deterministic():
    e = entry("rp2-cp2")
    a, _ = run_suite(e, VerifyOptions(loops=2, samples=1), ["lagrangian-intertwiner", "coisotropic-lemma"])
    b, _ = run_suite(e, VerifyOptions(loops=2, samples=1, threads=2), ["coisotropic-lemma", "lagrangian-intertwiner"])
    assert [r.as_dict() for r in a] == [r.as_dict() for r in b]


def test_unknown_check():
    with pytest.raises(InvalidInputError):
        run_check("no-such-check", entry("rp2-cp2"))


def test_bare_immersion_entry():
    e = as_entry(immersion("rp2-cp2"), point("rp2-cp2"))
    assert run_check("coisotropic-lemma", e, VerifyOptions(samples=1)).passed

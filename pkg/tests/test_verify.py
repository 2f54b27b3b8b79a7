import cmath
from dataclasses import replace
from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings

from collatz_gf.dynamics import step
from collatz_gf.errors import DomainViolation
from collatz_gf.presets import PRESETS, get_preset
from collatz_gf.quadrature import PolyCircle, choose_radius, contour_recursion_rhs
from collatz_gf.series import eval_series, orbit_series
from collatz_gf.verify import (
    DETERMINISTIC_1D,
    CheckSpec,
    TolerancePolicy,
    check_bivariate,
    check_bound,
    check_branch_invariance,
    check_contour,
    check_convergence,
    check_corollary_structure,
    check_delta_identity,
    check_recurrence,
    structure_hypotheses,
    default_sample_points,
    recurrence_rhs,
    run_check,
)

from strategies import collatz_maps

ZETA3 = cmath.exp(2j * cmath.pi / 3)
FAST = dict(ks=(1, 2), n_random=2)


def orbit_coeffs(preset, k, N):
    """c_k(n) = t^k(n) by plain iteration, independent of the vectorised tables."""
    cmap = get_preset(preset)
    out = []
    for n in range(N):
        v = (n,)
        for _ in range(k):
            v = step(cmap, v)
        out.append(v[0])
    return np.array(out, dtype=float)


def horner(c, z):
    acc = 0j
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def cbrt(z):
    return cmath.exp(cmath.log(z) / 3)


def oracle_3n_plus_1(c_prev, z):
    x = cbrt(z) ** 2
    odd = sum(ZETA3**l * horner(c_prev, x * ZETA3**l) for l in range(3))
    return horner(c_prev, z * z) + odd / (3 * cbrt(z))


def oracle_3n_minus_1(c_prev, z):
    x = cbrt(z) ** 2
    odd = sum(ZETA3 ** (-l) * horner(c_prev, x * ZETA3**l) for l in range(3))
    return horner(c_prev, z * z) + cbrt(z) * odd / 3


def f1_3n_plus_1_exact(z: Q) -> Q:
    # t(2q) = q, t(2q+1) = 3q+2
    s = z * z
    return s / (1 - s) ** 2 + z * (3 * s / (1 - s) ** 2 + 2 / (1 - s))


# ---- sample points -----------------------------------------------------------

def test_sample_points_deterministic():
    a = default_sample_points(1)
    assert a == default_sample_points(1)
    assert a[:4] == [(complex(v),) for v in DETERMINISTIC_1D]
    assert default_sample_points(1, seed=1) != a
    for p in default_sample_points(3, n_random=20):
        assert len(p) == 3
    for p in a[4:]:
        assert 0.1 <= abs(p[0]) <= 0.6


@pytest.mark.parametrize("bad", [(0.0,), (1.0,), (0.6 + 0.9j,)])
def test_points_outside_domain_rejected(bad):
    with pytest.raises(DomainViolation):
        check_recurrence(get_preset("3n+1"), CheckSpec("recurrence", sample_points=(bad,)))


def test_unknown_check_kind():
    with pytest.raises(ValueError):
        CheckSpec("nope")


# ---- independent oracles ---------------------------------------------------------

@pytest.mark.parametrize("preset,oracle", [("3n+1", oracle_3n_plus_1), ("3n-1", oracle_3n_minus_1)])
@pytest.mark.parametrize("z", [0.3, 0.2 + 0.4j, -0.5, 0.55j, -0.3 - 0.3j])
def test_oracle_matches_library(preset, oracle, z):
    N = 600
    cmap = get_preset(preset)
    for k in (1, 2, 3):
        c_prev = orbit_coeffs(preset, k - 1, N)
        want = oracle(c_prev, z)
        assert abs(horner(orbit_coeffs(preset, k, N), z) - want) <= 1e-9
        lib = recurrence_rhs(cmap, orbit_series(cmap, k - 1, (N,)), [z], k - 1)[0]
        assert abs(lib - want) <= 1e-11 * (1 + abs(want))


def test_frozen_first_iterate_value():
    exact = f1_3n_plus_1_exact(Q(3, 10))
    assert exact == Q(7170, 8281)
    cmap = get_preset("3n+1")
    f1 = orbit_series(cmap, 1, (400,))[0]
    assert abs(eval_series(f1, 0.3) - float(exact)) <= 1e-13
    assert abs(recurrence_rhs(cmap, orbit_series(cmap, 0, (400,)), [0.3])[0] - float(exact)) <= 1e-13


def test_oracle_triangle():
    # direct evaluation, residue form and contour quadrature agree pairwise
    cmap = get_preset("3n+1")
    N = 600
    z = 0.2 + 0.4j
    c0 = orbit_coeffs("3n+1", 1, N)
    a = oracle_3n_plus_1(c0, z)
    f1 = orbit_series(cmap, 1, (N,))
    b = recurrence_rhs(cmap, f1, [z], 1)[0]
    c = contour_recursion_rhs(cmap, f1, [z], PolyCircle(choose_radius(cmap, [z]), 512))[0]
    d = eval_series(orbit_series(cmap, 2, (N,))[0], z)
    for x, y in [(a, b), (b, c), (a, c), (c, d)]:
        assert abs(x - y) <= 1e-10


# ---- recurrence and contour -----------------------------------------------------

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_recurrence_passes(name):
    cmap = get_preset(name)
    lim = (400,) if cmap.d == 1 else (48, 48)
    rep = check_recurrence(cmap, CheckSpec("recurrence", limits=lim, **FAST))
    assert rep.all_pass, rep.max_residual
    assert {r.comparison for r in rep.records} == {"direct_vs_residue", "direct_vs_closed_form"}


def test_closed_form_source_at_k1():
    rep = check_recurrence(get_preset("3n-1"), CheckSpec("recurrence", ks=(1,)))
    cf = [r for r in rep.records if r.comparison == "direct_vs_closed_form"]
    assert len(cf) == 12 and max(r.abs_residual for r in cf) <= 1e-12


@pytest.mark.parametrize("name", ["3n+1", "3n-1", "shift-2"])
def test_contour_passes(name):
    rep = check_contour(get_preset(name), CheckSpec("contour", limits=(600,), **FAST))
    assert rep.all_pass, rep.max_residual
    assert rep.worst("quadrature_vs_residue") <= 1e-10
    assert rep.worst("radius_robustness") <= 1e-10


def test_contour_outer_radius_aliasing_is_reported():
    # lambda = 6 pushes the outer radius towards 1, where rho^M aliasing reaches ~1e-9 at M = 512;
    # the estimate accounts for it and doubling M removes it
    cmap = get_preset("classical")
    rep = check_contour(cmap, CheckSpec("contour", limits=(600,), **FAST))
    assert rep.all_pass and rep.worst("quadrature_vs_residue") <= 1e-10
    for r in rep.records:
        if r.comparison == "radius_robustness":
            assert r.abs_residual <= 1.01 * r.detail["quad_error"] + 1e-13
    fine = check_contour(cmap, CheckSpec("contour", limits=(600,), quad_nodes=1024, **FAST))
    assert fine.worst("radius_robustness") <= 1e-10


def test_tolerances_decompose_honestly():
    pol = TolerancePolicy()
    rep = check_contour(get_preset("3n+1"), CheckSpec("contour", limits=(600,), **FAST))
    for r in rep.records:
        tail = r.detail.get("z_tail", 0.0)
        quad = r.detail.get("quad_error", 0.0)
        assert r.tolerance == pytest.approx(pol.tolerance(tail, quad), rel=1e-12, abs=0)
    doubled = check_contour(get_preset("3n+1"), CheckSpec("contour", limits=(600,),
                            tolerance_policy=TolerancePolicy(scale=2.0), **FAST))
    for a, b in zip(rep.records, doubled.records):
        assert b.tolerance == pytest.approx(2 * a.tolerance)
        assert a.abs_residual == b.abs_residual


def test_tail_bound_is_honest_about_truncation():
    # with a deliberately short truncation the tail term dominates the tolerance and still covers the error
    rep = check_recurrence(get_preset("3n+1"), CheckSpec("recurrence", limits=(30,), ks=(1,), sample_points=((0.55j,),)))
    for r in rep.records:
        assert r.detail["z_tail"] > 1e-10
        assert r.abs_residual <= r.tolerance


def test_reports_are_deterministic():
    spec = CheckSpec("recurrence", limits=(300,), **FAST)
    a = check_recurrence(get_preset("3n+1"), spec).to_dict()
    b = check_recurrence(get_preset("3n+1"), spec).to_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


# ---- bivariate -----------------------------------------------------------------

def test_bivariate_w04():
    rep = check_bivariate(get_preset("3n+1"), CheckSpec("bivariate", w_values=(0.4, 0.4j), limits=(800,), n_random=2))
    assert rep.all_pass and rep.max_residual <= 1e-6


def test_bivariate_w0_reduces_to_f0():
    rep = check_bivariate(get_preset("3n+1"), CheckSpec("bivariate", w_values=(0,), limits=(800,), n_random=2))
    assert rep.all_pass and rep.max_residual <= 1e-12


def test_bivariate_rejects_w_outside_radius():
    with pytest.raises(DomainViolation):
        check_bivariate(get_preset("3n+1"), CheckSpec("bivariate", w_values=(0.7,)))


def test_bivariate_truncation_error_decays_geometrically():
    cmap = get_preset("3n+1")
    w = 0.9 * 2 / 3
    res = []
    for K in (8, 16, 24):
        rep = check_bivariate(cmap, CheckSpec("bivariate", w_values=(w,), K=K, limits=(1500,),
                                              sample_points=((0.3,),)))
        assert rep.all_pass
        res.append(rep.max_residual)
    assert res[0] > res[1] > res[2]


# ---- structure, bound, invariance, convergence, delta ---------------------------

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_corollary_structure_passes(name):
    rep = check_corollary_structure(get_preset(name))
    assert rep.all_pass


def test_structure_hypotheses_of_presets():
    assert structure_hypotheses(get_preset("3n+1")) == {"roots_only": True, "no_derivative_terms": True}
    assert structure_hypotheses(get_preset("classical")) == {"roots_only": True, "no_derivative_terms": True}
    assert structure_hypotheses(get_preset("shift-2")) == {"roots_only": False, "no_derivative_terms": False}
    assert structure_hypotheses(get_preset("coupled-2d")) == {"roots_only": False, "no_derivative_terms": True}
    rep = check_corollary_structure(get_preset("shift-2"))
    assert any(r.comparison == "ell_zero_iff_mu_at_most_lambda" and r.lhs == 0 and r.rhs == 0 for r in rep.records)


@given(collatz_maps())
def test_corollary_structure_random_maps(cmap):
    assert check_corollary_structure(cmap).all_pass


def test_bound_small_box():
    rep = check_bound(get_preset("3n+1"), 2000, 10)
    assert rep.all_pass and len(rep.records) == 11
    # equality is attained at n = 2^k - 1, whose orbit stays on the odd branch for k steps
    for r in rep.records[1:]:
        assert r.lhs.real == 1.0


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_bound_presets(name):
    cmap = get_preset(name)
    rep = check_bound(cmap, 300 if cmap.d == 1 else 40, 10)
    assert rep.all_pass
    assert all(r.detail["violations"] == 0 for r in rep.records)


@settings(max_examples=25)
@given(collatz_maps())
def test_bound_random_maps(cmap):
    assert check_bound(cmap, 60 if cmap.d == 1 else 12, 6).all_pass


@pytest.mark.parametrize("name", ["3n+1", "classical", "coupled-2d"])
def test_branch_invariance(name):
    cmap = get_preset(name)
    lim = (400,) if cmap.d == 1 else (48, 48)
    rep = check_branch_invariance(cmap, CheckSpec("branch_invariance", limits=lim, **FAST))
    assert rep.all_pass and rep.max_residual <= 1e-10
    assert len({tuple(r.inputs["shift"]) for r in rep.records}) == int(np.prod(cmap.lambda_max())) - 1


def test_convergence_ratio_for_3n_plus_1():
    rep = check_convergence(get_preset("3n+1"), CheckSpec("convergence", w_values=(0.5,), limits=(600,), n_random=4))
    assert rep.all_pass
    for r in rep.records:
        assert abs(r.lhs.real - 0.5) < 0.02
        assert r.lhs.real <= 0.8
        assert r.detail["k0_stride2"] <= 10


def test_convergence_plain_sequence_oscillates():
    # observed: orbits settle on the 2-cycle {1, 2}, so |f_k(z)| alternates when Re z < 0
    rep = check_convergence(get_preset("3n+1"), CheckSpec("convergence", w_values=(0.5,), limits=(600,),
                                                           sample_points=((-0.5,),)))
    (r,) = rep.records
    assert r.detail["k0"] == 39 and r.detail["k0_stride2"] <= 1


def test_convergence_rejects_large_w():
    with pytest.raises(DomainViolation):
        check_convergence(get_preset("3n+1"), CheckSpec("convergence", w_values=(0.65,)))


def test_delta_identity():
    rep = check_delta_identity()
    assert rep.all_pass and rep.max_residual <= 1e-14
    assert check_delta_identity(rho=0.8, d_values=(1,)).all_pass


def test_run_check_dispatch():
    cmap = get_preset("3n-1")
    rep = run_check(cmap, CheckSpec("delta_identity", quad_nodes=16))
    assert rep.check_kind == "delta_identity" and rep.all_pass
    assert run_check(cmap, CheckSpec("bound", n_max=50, k_max=5)).check_kind == "bound"

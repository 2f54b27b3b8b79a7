from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collatz_gf.dynamics import (
    coefficient_bound,
    direct_step,
    growth_bound,
    iterate,
    radius_R_w,
    residue_decompose,
    scalar_map,
    step,
    to_rational,
    validate_map,
)
from collatz_gf.errors import (
    ConditionCaViolated,
    ConditionCbViolated,
    MapValidationError,
    MissingResidueClass,
    NonDiagonalBranch,
)
from collatz_gf.presets import PRESETS, get_preset

from strategies import collatz_maps


def plain_3n_plus_1(n):
    return n // 2 if n % 2 == 0 else (3 * n + 1) // 2


def test_shortened_3n_plus_1_lambda_mu():
    c = get_preset("3n+1")
    assert [br.lam for br in c.branches] == [(1,), (3,)]
    assert [br.mu for br in c.branches] == [(0,), (2,)]


def test_shortened_3n_minus_1_lambda_mu():
    c = get_preset("3n-1")
    assert [br.lam for br in c.branches] == [(1,), (3,)]
    assert [br.mu for br in c.branches] == [(0,), (1,)]


def test_noninteger_lambda_rejected_at_r0():
    with pytest.raises(ConditionCaViolated) as exc:
        scalar_map(2, [Q(1, 3), Q(3, 2)], [0, Q(1, 2)])
    assert exc.value.r == (0,)
    assert exc.value.label == "C1.a"
    assert "C1.a" in str(exc.value) and "r=0" in str(exc.value)
    assert exc.value.value == Q(2, 3)


def test_noninteger_mu_rejected():
    with pytest.raises(ConditionCbViolated) as exc:
        scalar_map(2, [Q(1, 2), Q(3, 2)], [0, -1])
    assert exc.value.r == (1,) and exc.value.label == "C1.b"


def test_negative_mu_rejected():
    with pytest.raises(ConditionCbViolated) as exc:
        scalar_map(2, [Q(1, 2), Q(3, 2)], [-1, Q(1, 2)])
    assert exc.value.r == (0,)


def test_two_dimensional_labels_and_component():
    A = [[Q(1, 2), 0], [0, Q(1, 3)]]
    raw = {r: (A, [0, 0]) for r in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    with pytest.raises(ConditionCaViolated) as exc:
        validate_map(2, (2, 2), raw)
    assert exc.value.label == "C2.a" and exc.value.component == 1 and exc.value.r == (0, 0)


def test_missing_residue_class():
    with pytest.raises(MissingResidueClass) as exc:
        validate_map(1, (3,), {0: (Q(1, 3), 0), 1: (Q(1, 3), Q(-1, 3))})
    assert exc.value.r == (2,)


def test_off_diagonal_branch_rejected():
    A = [[Q(1, 2), Q(1, 2)], [0, Q(1, 2)]]
    raw = {r: (A, [0, 0]) for r in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    with pytest.raises(NonDiagonalBranch):
        validate_map(2, (2, 2), raw)


def test_bad_shapes_rejected():
    with pytest.raises(MapValidationError):
        validate_map(1, (0,), {})
    with pytest.raises(MapValidationError):
        validate_map(2, (2,), {})
    with pytest.raises(MapValidationError):
        validate_map(1, (1,), {0: (Q(1), 0), 5: (Q(1), 0)})


def test_rationals_are_exact():
    assert to_rational([6, 4]) == Q(3, 2)
    assert to_rational("3/2") == Q(3, 2)
    assert to_rational(Q(-2, 4)).denominator == 2
    with pytest.raises(TypeError):
        to_rational(0.5)
    with pytest.raises(ZeroDivisionError):
        to_rational([1, 0])


def test_step_examples():
    c = get_preset("3n+1")
    assert step(c, (3,)) == (5,)
    assert step(c, (6,)) == (3,)


def test_iterate_examples():
    assert iterate(get_preset("3n+1"), (3,), 4) == [(3,), (5,), (8,), (4,), (2,)]
    assert iterate(get_preset("3n-1"), (1,), 2) == [(1,), (1,), (1,)]
    assert iterate(get_preset("classical"), (3,), 2) == [(3,), (10,), (5,)]
    assert iterate(get_preset("3n+1"), (27,), 0) == [(27,)]


def test_iterate_rejects_negative():
    with pytest.raises(ValueError):
        iterate(get_preset("3n+1"), (-1,), 2)
    with pytest.raises(ValueError):
        iterate(get_preset("3n+1"), (1,), -1)


def test_residue_decompose_examples():
    assert residue_decompose((7,), (2,)) == ((3,), (1,))
    assert residue_decompose((5, 4), (2, 3)) == ((2, 1), (1, 1))


@settings(max_examples=1000)
@given(st.lists(st.integers(0, 10**30), min_size=1, max_size=3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(1, 50), min_size=len(n), max_size=len(n)))))
def test_residue_decompose_reconstructs(args):
    n, m = args
    q, r = residue_decompose(n, m)
    assert all(qj * mj + rj == nj and 0 <= rj < mj for qj, mj, rj, nj in zip(q, m, r, n))


@given(collatz_maps(), st.data())
def test_step_matches_direct_affine_evaluation(cmap, data):
    n = tuple(data.draw(st.integers(0, 10**12)) for _ in range(cmap.d))
    out = step(cmap, n)
    assert out == direct_step(cmap, n)
    assert all(isinstance(v, int) and v >= 0 for v in out)


@given(collatz_maps(), st.data(), st.integers(0, 10), st.integers(0, 10))
def test_semigroup_law(cmap, data, j, k):
    n = tuple(data.draw(st.integers(0, 10**6)) for _ in range(cmap.d))
    assert iterate(cmap, n, j + k)[j + k] == iterate(cmap, iterate(cmap, n, j)[j], k)[k]


@given(collatz_maps(d=1), st.integers(0, 10**9), st.integers(0, 12))
def test_scalar_reduction(cmap, n, k):
    # a_r n + b_r with r = n mod m, in plain rational arithmetic
    m = cmap.m[0]
    a = [br.A[0][0] for br in cmap.branches]
    b = [br.b[0] for br in cmap.branches]
    x = Q(n)
    for _ in range(k):
        r = int(x) % m
        x = a[r] * x + b[r]
    assert x.denominator == 1
    assert iterate(cmap, (n,), k)[k] == (int(x),)


def test_3n_plus_1_against_plain_loop():
    c = get_preset("3n+1")
    for n in range(500):
        x = n
        orbit = [x]
        for _ in range(20):
            x = plain_3n_plus_1(x)
            orbit.append(x)
        assert [v[0] for v in iterate(c, (n,), 20)] == orbit


def test_bound_closed_form_for_3n_plus_1():
    c = get_preset("3n+1")
    g = growth_bound(c)
    assert g.amax == Q(3, 2) and g.bmax == Q(1, 2) and g.chi == 1
    for n in (0, 1, 7, 100):
        for k in range(10):
            assert coefficient_bound(c, (n,), k) == Q(3, 2) ** k * (n + 1) - 1


def test_bound_at_k0():
    for name in PRESETS:
        c = get_preset(name)
        n = (5,) * c.d
        assert coefficient_bound(c, n, 0) >= 5
    # amax = 1 gives equality at k = 0
    assert get_preset("shift-2").growth.chi is None
    assert coefficient_bound(get_preset("shift-2"), (5,), 0) == 5
    assert coefficient_bound(get_preset("shift-2"), (5,), 3) == 11


@settings(max_examples=25)
@given(collatz_maps())
def test_bound_soundness_brute_force(cmap):
    top = 200 if cmap.d == 1 else 14
    import itertools
    for n in itertools.product(range(top + 1), repeat=cmap.d):
        orbit = iterate(cmap, n, 15)
        for k, t in enumerate(orbit):
            assert max(t) <= coefficient_bound(cmap, n, k)


def test_radius_examples():
    assert radius_R_w(get_preset("3n+1")) == Q(2, 3)
    assert radius_R_w(get_preset("double-3n+1")) == Q(1, 3)
    assert radius_R_w(get_preset("shift-2")) == 1
    assert radius_R_w(scalar_map(2, [Q(1, 2), Q(1, 2)], [0, Q(1, 2)])) == 1


def test_presets_valid_and_immutable():
    for name in PRESETS:
        c = get_preset(name)
        assert len(c.branches) == __import__("math").prod(c.m)
        with pytest.raises(Exception):
            c.d = 3
    with pytest.raises(KeyError):
        get_preset("nope")


def test_coupled_preset_is_coupled():
    c = get_preset("coupled-2d")
    # the first coordinate's branch changes with the parity of the second
    assert c.branch((1, 0)).lam[0] != c.branch((1, 1)).lam[0]
    assert c.branch((0, 1)).lam[1] != c.branch((1, 1)).lam[1]
    assert iterate(c, (7, 5), 3) == [(7, 5), (4, 8), (2, 4), (1, 2)]

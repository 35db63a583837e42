"""Coefficient families on filtration layers: construction, the additive
maps they induce, the certified lam solvers, and serialization."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liecover.gf import FieldAutomorphism, fixed_field, make_field
from liecover.solver import (
    NoCertificate,
    SurSolution,
    SurSpec,
    coefficient,
    f_map,
    image_of_index,
    is_surjective,
    kernel_size,
    meets_thresholds_a,
    meets_thresholds_b,
    solution_from_record,
    solve_a,
    solve_b,
    spec_from_record,
    summand,
    threshold_bounds_a,
    threshold_bounds_b,
    validate_solution,
)

F2 = make_field(2, 1)
F3 = make_field(3, 1)
F5 = make_field(5, 1)
F7 = make_field(7, 1)
F9 = make_field(3, 2)
HALF9 = fixed_field(F9, FieldAutomorphism(F9, 1))


def ident(field):
    return FieldAutomorphism(field, 0)


def frob(field):
    return FieldAutomorphism(field, 1)


def plain_spec(field, m, c=1, half=None):
    """m copies of the identity index with unit baseline."""
    return SurSpec(field, (ident(field),) * m, (1,) * m, (1,) * m, (c,) * m, 1, half)


# -- spec construction and validation


def test_spec_rejects_bad_index_data():
    with pytest.raises(ValueError):
        SurSpec(F7, (), (), (), (), 1)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F7),), (0,), (1,), (1,), 1)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F7),), (1, 1), (1,), (1,), 1)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F7),), (1,), (2,), (1,), 3)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F7),), (1,), (1,), (0,), 1)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F7),), (1,), (1,), (1,), 0)
    with pytest.raises(ValueError):
        SurSpec(F7, (ident(F9),), (1,), (1,), (1,), 1)


def test_spec_rejects_bad_half():
    sub5 = fixed_field(F5, ident(F5))
    with pytest.raises(ValueError):
        SurSpec(F9, (ident(F9),), (1,), (1,), (1,), 1, sub5)
    whole9 = fixed_field(F9, ident(F9))
    with pytest.raises(ValueError):
        SurSpec(F9, (ident(F9),), (1,), (1,), (1,), 1, whole9)
    SurSpec(F9, (ident(F9),), (1,), (1,), (1,), 1, HALF9)


def test_spec_exponent_and_extension():
    spec = SurSpec(F9, (frob(F9),), (2,), (2,), (1,), 2)
    assert spec.exponent(0).e == 2 % F9.f
    bigger = spec.extended(ident(F9), 5, 1, 3)
    assert bigger.m == 2
    assert bigger.mu == (2, 5)
    assert bigger.c_bound == 3
    assert bigger.q_bound == spec.q_bound


def test_spec_record_roundtrip():
    spec = SurSpec(F9, (frob(F9), ident(F9)), (4, 2), (1, 1), (2, 1), 1, HALF9)
    rec = spec.to_record()
    back = spec_from_record(rec)
    assert back.to_record() == rec
    assert back.field.q == 9 and back.half.degree == 1


def test_solution_record_roundtrip():
    sol = SurSolution((3, 1), (0,), "Case2", "coset-index", "a")
    assert solution_from_record(sol.to_record()) == sol


# -- the additive maps


def test_single_index_square_coefficient():
    # GF(7), mu=1, c=2: lam=3 collects to 3^2 = 2 and the map is t -> 2t - t
    spec = plain_spec(F7, 1, c=2)
    assert coefficient(spec, 0, 3) == 2
    g = summand(spec, 0, 3)
    assert [g(t) for t in range(7)] == list(range(7))
    assert kernel_size(spec, 0, 3) == 1
    assert image_of_index(spec, 0, 3) == frozenset(range(7))


def test_all_trivial_data_gives_zero_map():
    spec = plain_spec(F2, 2)
    f = f_map(spec, (1, 1))
    assert all(f((t1, t2)) == 0 for t1 in range(2) for t2 in range(2))
    assert image_of_index(spec, 0, 1) == frozenset({0})


def test_semilinear_kernel_sizes():
    # twisted index over GF(9): non-square baselines have zero kernel,
    # square ones pick up the full fiber
    spec = SurSpec(F9, (frob(F9),), (4,), (1,), (1,), 1)
    assert kernel_size(spec, 0, 1) == 1
    for mu in (4, 5, 7, 8):
        twisted = SurSpec(F9, (frob(F9),), (mu,), (1,), (1,), 1)
        assert kernel_size(twisted, 0, 1) == 1
        assert len(image_of_index(twisted, 0, 1)) == 9
    for mu in (1, 2, 3, 6):
        flat = SurSpec(F9, (frob(F9),), (mu,), (1,), (1,), 1)
        assert kernel_size(flat, 0, 1) == 3
        assert len(image_of_index(flat, 0, 1)) == 3


def test_f_map_input_validation():
    spec = plain_spec(F7, 2)
    with pytest.raises(ValueError):
        f_map(spec, (1,))
    with pytest.raises(ValueError):
        f_map(spec, (1, 0))
    f = f_map(spec, (1, 3))
    with pytest.raises(ValueError):
        f((1,))


# -- surjectivity checks


def test_is_surjective_direct():
    spec = plain_spec(F7, 1, c=2)
    assert is_surjective(spec, (3,))
    assert not is_surjective(spec, (1,))
    two = plain_spec(F7, 2)
    assert is_surjective(two, (1, 3), (1,))
    assert not is_surjective(two, (1, 1))


def test_is_surjective_refuses_oversized_field():
    big = make_field(2, 13)
    spec = plain_spec(big, 1)
    with pytest.raises(NoCertificate):
        is_surjective(spec, (1,))


def test_validate_solution_shape_checks():
    spec = plain_spec(F7, 2, c=2)
    good = solve_a(spec)
    assert validate_solution(spec, good)
    assert not validate_solution(spec, SurSolution((3,), (0,), "Case2", "coset-index", "a"))
    assert not validate_solution(spec, SurSolution((0, 1), (0,), "Case2", "coset-index", "a"))
    assert not validate_solution(spec, SurSolution((3, 1), (1, 0), "Case2", "coset-index", "a"))
    assert not validate_solution(spec, SurSolution((3, 1), (0, 5), "Case2", "coset-index", "a"))
    assert not validate_solution(spec, SurSolution((3, 1), (0,), "Case2", "coset-index", "b"))
    assert not validate_solution(spec, SurSolution((1, 1), (0, 1), "Case2", "coset-index", "a"))


def test_validate_solution_subfield_membership():
    spec = SurSpec(F9, (ident(F9),), (1,), (1,), (1,), 1, HALF9)
    sol = solve_b(spec)
    assert validate_solution(spec, sol)
    assert not validate_solution(spec, SurSolution((4,), (0,), "Case2", "brute-force", "b"))


# -- thresholds as predicates


def test_threshold_bounds_values():
    assert threshold_bounds_a(2, 2) == (10, 50)
    assert threshold_bounds_b(1, 1) == (6, 9)


def test_threshold_predicates():
    f53 = make_field(53, 1)
    above = plain_spec(f53, 11)
    assert meets_thresholds_a(above)
    # c=2 pushes the margin to M > 3, |F| > 6
    assert not meets_thresholds_a(plain_spec(F5, 3, c=2))
    below_b = SurSpec(F9, (ident(F9),) * 7, (1,) * 7, (1,) * 7, (1,) * 7, 1, HALF9)
    assert not meets_thresholds_b(below_b)


# -- certified solvers


def test_zero_kernel_case_on_nonsquare_baseline():
    spec = SurSpec(F9, (frob(F9),), (4,), (1,), (1,), 1)
    sol = solve_a(spec)
    assert sol.case == "Case1" and sol.certificate == "zero-kernel"
    assert sol.lam == (1,) and sol.J == (0,)
    assert validate_solution(spec, sol)


def test_generator_case_on_flat_family():
    spec = plain_spec(F5, 3)
    sol = solve_a(spec)
    assert sol.case == "Case2" and sol.certificate == "coset-index"
    assert sol.lam == (2, 1, 1)
    assert validate_solution(spec, sol)


def test_paired_case_when_singletons_fail():
    # square baselines kill Case 1; c=2 shrinks the fixed subfield below
    # the Case 2 margin; the paired bracket still certifies
    spec = SurSpec(F9, (frob(F9), frob(F9)), (2, 2), (1, 1), (2, 2), 1)
    sol = solve_a(spec)
    assert sol.case == "Case3" and sol.certificate == "witness-bracket"
    assert sol.lam == (4, 1) and sol.J == (0, 1)
    assert validate_solution(spec, sol)


def test_solver_is_deterministic():
    spec = SurSpec(F9, (frob(F9), ident(F9)), (2, 1), (1, 1), (2, 2), 1)
    assert solve_a(spec).to_record() == solve_a(spec).to_record()


def test_monotone_under_index_append():
    spec = SurSpec(F9, (frob(F9),), (4,), (1,), (1,), 1)
    sol = solve_a(spec)
    bigger = spec.extended(ident(F9), 1, 1, 1)
    grown = SurSolution(sol.lam + (1,), sol.J, sol.case, sol.certificate, sol.part)
    assert validate_solution(bigger, grown)
    assert validate_solution(bigger, solve_a(bigger))


def test_restricted_solver_needs_half():
    spec = plain_spec(F9, 1)
    with pytest.raises(ValueError):
        solve_b(spec)


def test_restricted_solver_draws_from_half():
    spec = plain_spec(F9, 1, half=HALF9)
    sol = solve_b(spec)
    assert sol.part == "b" and sol.lam == (2,)
    assert sol.case == "Case2" and sol.certificate == "brute-force"
    assert all(l in HALF9 for l in sol.lam)
    assert validate_solution(spec, sol)


def test_restricted_candidate_norm_lands_in_half():
    # the generator's norm to the index-2 subfield: g * theta(g) = g^4
    g = F9.generator
    cand = F9.mul(g, F9.frob(g, 1))
    assert cand == F9.pow(g, 4) == 2
    assert cand in HALF9


def test_restricted_nonsquare_baseline_prefers_zero_kernel():
    # the case order is fixed: a zero-kernel index wins even when the
    # subfield norm candidate exists
    spec = SurSpec(F9, (frob(F9),), (4,), (1,), (1,), 1, HALF9)
    sol = solve_b(spec)
    assert sol.case == "Case1" and sol.lam == (1,)
    assert validate_solution(spec, sol)


def test_honest_refusal_on_degenerate_family():
    # unit baselines with identity twist and even norm exponent over GF(3):
    # every summand is identically zero, so no lam vector can certify
    spec = SurSpec(F3, (ident(F3), ident(F3)), (1, 1), (1, 1), (2, 2), 1)
    with pytest.raises(NoCertificate):
        solve_a(spec)
    combos = [
        (lam, J)
        for lam in [(a, b) for a in (1, 2) for b in (1, 2)]
        for J in ((0,), (1,), (0, 1))
    ]
    assert all(not is_surjective(spec, lam, J) for lam, J in combos)


# -- property tests

SMALL_FIELDS = [(7, 1), (3, 2), (5, 1)]


@settings(max_examples=80, deadline=None)
@given(pf=st.sampled_from(SMALL_FIELDS), data=st.data())
def test_summand_rank_nullity(pf, data):
    field = make_field(*pf)
    e = data.draw(st.integers(0, field.f - 1))
    mu = data.draw(st.integers(1, field.q - 1))
    c = data.draw(st.integers(1, 3))
    lam = data.draw(st.integers(1, field.q - 1))
    spec = SurSpec(field, (FieldAutomorphism(field, e),), (mu,), (1,), (c,), 1)
    img = image_of_index(spec, 0, lam)
    assert kernel_size(spec, 0, lam) * len(img) == field.q
    # additive closure of the image
    assert all(field.add(a, b) in img for a in img for b in img)


@settings(max_examples=60, deadline=None)
@given(pf=st.sampled_from(SMALL_FIELDS), data=st.data())
def test_solver_sound_or_provably_stuck(pf, data):
    field = make_field(*pf)
    m = data.draw(st.integers(1, 2))
    es = [data.draw(st.integers(0, field.f - 1)) for _ in range(m)]
    mus = [data.draw(st.integers(1, field.q - 1)) for _ in range(m)]
    cs = [data.draw(st.integers(1, 2)) for _ in range(m)]
    spec = SurSpec(
        field,
        tuple(FieldAutomorphism(field, e) for e in es),
        tuple(mus),
        (1,) * m,
        tuple(cs),
        1,
    )
    try:
        sol = solve_a(spec)
    except NoCertificate:
        units = range(1, field.q)
        if m == 1:
            assert all(not is_surjective(spec, (l,), (0,)) for l in units)
        else:
            vectors = [(a, b) for a in units for b in units]
            assert all(
                not is_surjective(spec, lam, J)
                for lam in vectors
                for J in ((0,), (1,), (0, 1))
            )
    else:
        assert validate_solution(spec, sol)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_f_map_agrees_with_summands(data):
    m = data.draw(st.integers(1, 3))
    spec = SurSpec(
        F9,
        tuple(FieldAutomorphism(F9, data.draw(st.integers(0, 1))) for _ in range(m)),
        tuple(data.draw(st.integers(1, 8)) for _ in range(m)),
        (1,) * m,
        tuple(data.draw(st.integers(1, 2)) for _ in range(m)),
        1,
    )
    lam = tuple(data.draw(st.integers(1, 8)) for _ in range(m))
    ts = tuple(data.draw(st.integers(0, 8)) for _ in range(m))
    f = f_map(spec, lam)
    acc = 0
    for i in range(m):
        acc = F9.add(acc, summand(spec, i, lam[i])(ts[i]))
    assert f(ts) == acc

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian
from loewner_lab.errors import ApproximationError, ConstraintError
from loewner_lab.funcspec import catalog, eval_function, from_expression
from loewner_lab.linalg import apply_function, herm, loewner_compare
from loewner_lab.phimap import random_isometry
from loewner_lab.sandwich import (
    Polynomial,
    SandwichPair,
    build_sandwich,
    eval_poly_matrix,
    interpolate,
    omega_scalar,
    sup_error,
    tsallis_sandwich_polynomials,
)


@pytest.mark.parametrize("m,M", [(0, 1), (-3, 2), (1, 10)])
def test_interpolate_reproduces_square(m, M):
    p = interpolate(catalog("square"), m, M, 2)
    assert np.allclose(p.monomial(), [0, 0, 1], atol=1e-10)


def test_interpolate_constant():
    p = interpolate(catalog("const", c=5), 0, 1, 0)
    assert np.allclose(p.monomial(), [5])


def test_interpolate_exp_degree8():
    p = interpolate(catalog("exp"), 0, 1, 8)
    x = np.linspace(0, 1, 10_001)
    assert np.max(np.abs(p(x) - np.exp(x))) <= 1e-8


def test_sup_error_examples():
    sq = catalog("square")
    assert sup_error(sq, interpolate(sq, -1, 2, 2), -1, 2) <= 1e-10
    assert sup_error(catalog("identity"), Polynomial((0.0,)), 0, 1) == pytest.approx(1.0)


def test_sup_error_matches_fine_grid():
    f = catalog("exp")
    p = interpolate(f, 0, 1, 3)
    x = np.linspace(0, 1, 1_000_001)
    brute = np.max(np.abs(np.exp(x) - p(x)))
    assert abs(sup_error(f, p, 0, 1) - brute) <= 1e-9


def test_build_square_exact():
    sw = build_sandwich(catalog("square"), -1, 2, 1e-6)
    assert np.allclose(sw.lower.monomial(), [0, 0, 1], atol=1e-10)
    assert np.allclose(sw.upper.monomial(), [0, 0, 1], atol=1e-10)


def test_build_exp_low_degree():
    f = catalog("exp")
    sw = build_sandwich(f, 0, 1, 1e-3)
    assert sw.lower.degree <= 8
    violation, excess = sw.certify(f, np.random.default_rng(1).uniform(0, 1, 10_000))
    assert violation <= sw.slack(f) and excess <= sw.slack(f)


def test_build_abs():
    sw = build_sandwich(catalog("abs"), -1, 1, 1e-2)
    assert sw.epsilon <= 1e-2
    with pytest.raises(ApproximationError) as info:
        build_sandwich(catalog("abs"), -1, 1, 1e-12)
    assert info.value.best_delta > 1e-12 and info.value.degree == 256


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["exp", "sqrt", "log", "square", "x^3 - x", "exp(-x)*x^2"]),
    st.floats(0.5, 2.0),
    st.floats(0.5, 3.0),
    st.sampled_from([1e-2, 1e-3, 1e-5]),
    st.integers(0, 2**32 - 1),
)
def test_sandwich_invariant_on_fresh_grid(name, lo, width, eps, seed):
    f = catalog(name) if name.isalpha() else from_expression(name)
    sw = build_sandwich(f, lo, lo + width, eps)
    x = np.random.default_rng(seed).uniform(lo, lo + width, 10_000)
    up, low = sw.gaps(f, x)
    slack = sw.slack(f)
    assert up.min() >= -slack and low.min() >= -slack
    assert max(up.max(), low.max()) <= sw.epsilon + slack
    assert sw.epsilon <= eps


def test_eval_poly_matrix_examples(rng):
    a = random_hermitian(3, rng)
    assert np.allclose(eval_poly_matrix(Polynomial((2.5,)), a), 2.5 * np.eye(3))
    assert np.allclose(eval_poly_matrix(Polynomial((0.0, 1.0)), a), a)
    direct = np.eye(3) + 2 * np.asarray(a) + 3 * np.asarray(a) @ a
    assert np.max(np.abs(eval_poly_matrix(Polynomial((1.0, 2.0, 3.0)), a) - direct)) <= 1e-9


def test_eval_poly_matrix_chebyshev_matches_functional_calculus(rng):
    f = catalog("exp")
    p = interpolate(f, -1, 1, 20)
    a = random_hermitian(5, rng)
    via_fc = apply_function(lambda x: p(x), a)
    assert np.max(np.abs(eval_poly_matrix(p, a) - via_fc)) <= 1e-8 * (1 + np.max(np.abs(via_fc)))


def test_eval_poly_matrix_commutes_with_conjugation(rng):
    p = Polynomial((0.3, -1.0, 0.5, 0.25))
    a = random_hermitian(4, rng)
    u = random_isometry(4, 4, rng)
    lhs = eval_poly_matrix(p, herm(u @ a @ u.conj().T))
    rhs = u @ eval_poly_matrix(p, a) @ u.conj().T
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * (1 + np.max(np.abs(rhs)))


def test_sandwich_transfers_to_matrices(rng):
    f = catalog("exp")
    sw = build_sandwich(f, 0, 1, 1e-3)
    for _ in range(20):
        a = random_hermitian(4, rng, 0, 1)
        fa = apply_function(f, a)
        assert loewner_compare(eval_poly_matrix(sw.lower, a), fa).holds_leq
        assert loewner_compare(fa, eval_poly_matrix(sw.upper, a)).holds_leq


def test_polynomial_json_roundtrip():
    p = interpolate(catalog("exp"), 0, 1, 6)
    q = Polynomial.from_json(p.to_json())
    assert q == p
    assert Polynomial.from_json({"coeffs": [1, 2, 0]}).coeffs == (1.0, 2.0)


def test_sandwich_json_roundtrip():
    sw = build_sandwich(catalog("exp"), 0, 1, 1e-3)
    back = SandwichPair.from_json(sw.to_json())
    assert back.lower == sw.lower and back.upper == sw.upper and back.epsilon == sw.epsilon


def test_tsallis_pair_holds_on_grid():
    sw = tsallis_sandwich_polynomials(0.5, 2, 10)
    f = catalog("tsallis_dev", q=0.5)
    x = np.linspace(2, 10, 10_000)
    up, low = sw.gaps(f, x)
    assert up.min() >= -1e-12 and low.min() >= -1e-12


def test_tsallis_pair_q1_is_linear():
    sw = tsallis_sandwich_polynomials(1.0, 2, 10)
    omega, _ = omega_scalar(1.0, 2, 10)
    assert sw.lower.coefficient(2) == 0 and sw.upper.coefficient(2) == 0
    assert sw.lower.coefficient(1) == pytest.approx(1.0)
    assert sw.lower.coefficient(0) == pytest.approx(-1.0 + omega, abs=1e-15)
    assert sw.upper.coefficient(0) == pytest.approx(-1.0 - omega, abs=1e-15)


@pytest.mark.parametrize("q", [0.25, 0.5, 0.75])
def test_tsallis_quadratic_coefficient(q):
    sw = tsallis_sandwich_polynomials(q, 2, 10)
    assert sw.lower.coefficient(2) == -(1 - q) * 10 ** (q - 2) / 2
    assert sw.upper.coefficient(2) == -(1 - q) * 2 ** (q - 2) / 2


def test_tsallis_hypotheses():
    with pytest.raises(ConstraintError, match="m >= 2 and M >= 5m"):
        tsallis_sandwich_polynomials(0.5, 1, 10)
    with pytest.raises(ConstraintError, match="m >= 2 and M >= 5m"):
        tsallis_sandwich_polynomials(0.5, 2, 9)
    sw = tsallis_sandwich_polynomials(0.5, 1, 3, relax=True)
    assert sw.meta["outside_hypotheses"]


def test_omega_log_space():
    value, underflow = omega_scalar(0.5, 2, 10)
    assert not underflow
    assert value == pytest.approx(2**0.5 / 12**20, rel=1e-12)
    value, underflow = omega_scalar(0.5, 5, 50)
    assert value == 0.0 and underflow

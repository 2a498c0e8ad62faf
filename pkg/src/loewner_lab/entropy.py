"""Tsallis relative entropy and its operator bounds, with and without ``Phi``.

Notation: ``C = A^{-1/2} B A^{-1/2}``, ``g(x) = (x^q - 1)/q`` so that
``T_q(A||B) = A^{1/2} g(C) A^{1/2}``, and ``psi(x) = (x - m)(x - M)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cdj import BoundReport, kantorovich_on
from .errors import AssumptionError, ConstraintError, ParameterError, PositivityError
from .linalg import (
    LOEWNER_TOL,
    apply_function,
    eigvalsh,
    geometric_mean_q,
    herm,
    hermitian,
    loewner_compare,
    matrix_power_real,
    matrix_to_json,
    spectral_decompose,
)
from .phimap import phi_apply
from .sandwich import check_tsallis_hypotheses, eval_poly_matrix, omega_scalar, tsallis_sandwich_polynomials

COMMUTE_TOL = 1e-8


@dataclass(frozen=True)
class EntropyParams:
    q: float
    m: float
    M: float
    relax: bool = False

    def __post_init__(self):
        if not 0 < self.m < self.M:
            raise ConstraintError(f"need 0 < m < M, got m = {self.m}, M = {self.M}")

    def check(self):
        """Validate the lemma hypotheses; True when they only hold because of ``relax``."""
        return check_tsallis_hypotheses(self.q, self.m, self.M, self.relax)


# EntropyBoundReport carries the same fields as the Theorem 1 report.
EntropyBoundReport = BoundReport


@dataclass(frozen=True)
class BoundCheck:
    lower: np.ndarray
    upper: np.ndarray
    center: np.ndarray
    verdict_lower: object
    verdict_upper: object
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self):
        return self.verdict_lower.holds_leq and self.verdict_upper.holds_leq

    def to_json(self):
        return {
            "lower": matrix_to_json(self.lower),
            "center": matrix_to_json(self.center),
            "upper": matrix_to_json(self.upper),
            "verdict_lower": self.verdict_lower.to_json(),
            "verdict_upper": self.verdict_upper.to_json(),
            "meta": self.meta,
        }


def _check(lower, center, upper, meta, tol=LOEWNER_TOL):
    return BoundCheck(lower, upper, center, loewner_compare(lower, center, tol), loewner_compare(center, upper, tol), meta)


def tsallis_relative_entropy(a, b, q):
    """``T_q(A||B) = (A #_q B - A)/q``."""
    if not (-1 <= q <= 1) or q == 0:
        raise ParameterError(f"need -1 <= q <= 1 and q != 0, got q = {q}")
    a = hermitian(a)
    return herm((geometric_mean_q(a, b, q) - a) / q)


def _congruence_parts(a, b):
    a = hermitian(a)
    b = hermitian(b)
    dec = spectral_decompose(a)
    if not dec.eigenvalues[0] > 0:
        raise PositivityError("A must be positive definite", min_eigenvalue=float(dec.eigenvalues[0]))
    half = dec.reconstruct(np.sqrt(dec.eigenvalues))
    ihalf = dec.reconstruct(1.0 / np.sqrt(dec.eigenvalues))
    return half, herm(ihalf @ b @ ihalf)


def relative_operator_entropy(a, b):
    """``S(A||B) = A^{1/2} log(A^{-1/2} B A^{-1/2}) A^{1/2}``."""
    w_b = eigvalsh(b)
    if not w_b[0] > 0:
        raise PositivityError("B must be positive definite", min_eigenvalue=float(w_b[0]))
    half, c = _congruence_parts(a, b)
    w = eigvalsh(c)
    if not w[0] > 0:
        raise PositivityError("A^{-1/2} B A^{-1/2} must be positive definite", min_eigenvalue=float(w[0]))
    logc = apply_function(np.log, c)
    return herm(half @ logc @ half)


def _omega(a, q, m, M, meta):
    value, underflow = omega_scalar(q, m, M)
    if underflow:
        meta.setdefault("flags", []).append("omega underflowed to zero")
    meta["omega_scalar"] = value
    return herm(value * hermitian(a))


def gamma_psi_omega(a, b, params, meta=None):
    """The three ingredients of the Tsallis bounds.

    ``Gamma = -[(B - mA)(1 - M^q) + (MA - B)(1 - m^q)] / (q (M - m))``,
    ``Psi = A #_2 B - (M + m) B + M m A``, ``Omega = m^q A / (M + m)^(M m)``.
    """
    meta = {} if meta is None else meta
    q, m, M = params.q, params.m, params.M
    if q == 0:
        raise ParameterError("Gamma needs q != 0; use the q -> 0 limit path")
    a = hermitian(a)
    b = hermitian(b)
    gamma = -((b - m * a) * (1.0 - M**q) + (M * a - b) * (1.0 - m**q)) / (q * (M - m))
    psi = geometric_mean_q(a, b, 2) - (M + m) * b + M * m * a
    return herm(gamma), herm(psi), _omega(a, q, m, M, meta)


def _sandwich_condition(a, b, m, M, label):
    """Verify ``m A <= B <= M A``; return the failure text or None."""
    lo = loewner_compare(m * np.asarray(a), b)
    hi = loewner_compare(b, M * np.asarray(a))
    if lo.holds_leq and hi.holds_leq:
        return None
    if not lo.holds_leq:
        return (f"{label}: m*A <= B fails", lo.min_gap, lo.gap_spectrum)
    return (f"{label}: B <= M*A fails", hi.min_gap, hi.gap_spectrum)


def _require_sandwich(a, b, m, M, label="sandwich"):
    fail = _sandwich_condition(a, b, m, M, label)
    if fail is not None:
        raise AssumptionError(f"{fail[0]} (min gap eigenvalue {fail[1]:.3e})", measure=[float(g) for g in fail[2]])


def lemma4_bounds(a, b, params, tol=LOEWNER_TOL):
    """``Gamma - k_M Psi + Omega <= T_q(A||B) <= Gamma - k_m Psi - Omega``, ``k_t = (1-q) t^(q-2)/2``."""
    outside = params.check()
    a = hermitian(a)
    b = hermitian(b)
    _require_sandwich(a, b, params.m, params.M)
    meta = {"q": params.q, "m": params.m, "M": params.M, "outside_hypotheses": outside}
    q, m, M = params.q, params.m, params.M
    gamma, psi, omega = gamma_psi_omega(a, b, params, meta)
    lower = herm(gamma - (1.0 - q) * M ** (q - 2.0) / 2.0 * psi + omega)
    upper = herm(gamma - (1.0 - q) * m ** (q - 2.0) / 2.0 * psi - omega)
    return _check(lower, tsallis_relative_entropy(a, b, q), upper, meta, tol)


LIMIT_Q = 1e-6


def lemma5_bounds(a, b, m, M, relax=False, tol=LOEWNER_TOL):
    """Bounds on ``S(A||B)``: the secant of ``log`` minus ``Psi / (2 t^2)`` with ``-/+ Omega(A, 0)``.

    The distance to ``lemma4_bounds`` at ``q = 1e-6`` (a limit check) is
    stored in the metadata rather than enforced.
    """
    params = EntropyParams(LIMIT_Q, m, M, relax)
    outside = params.check()
    a = hermitian(a)
    b = hermitian(b)
    _require_sandwich(a, b, m, M)
    meta = {"m": m, "M": M, "outside_hypotheses": outside}
    secant = ((b - m * a) * math.log(M) + (M * a - b) * math.log(m)) / (M - m)
    psi = geometric_mean_q(a, b, 2) - (M + m) * b + M * m * a
    omega = _omega(a, 0.0, m, M, meta)
    lower = herm(secant - psi / (2.0 * M**2) + omega)
    upper = herm(secant - psi / (2.0 * m**2) - omega)
    limit = lemma4_bounds(a, b, params, tol)
    scale = 1.0 + max(float(np.max(np.abs(lower))), float(np.max(np.abs(upper))))
    dist = max(float(np.max(np.abs(limit.lower - lower))), float(np.max(np.abs(limit.upper - upper))))
    meta["q_limit"] = {"q": LIMIT_Q, "max_abs_diff": dist, "scale": scale, "within_1e-4": dist <= 1e-4 * scale}
    return _check(lower, relative_operator_entropy(a, b), upper, meta, tol)


def _phi_preconditions(phi, a, b, params, require_degree2=False):
    """Checks shared by the Phi-paths; returns a list of failure records."""
    fails = []
    if any(c < 0 for c in phi.coeffs):
        fails.append({"name": "phi coefficients nonnegative", "measure": min(phi.coeffs)})
    if require_degree2 and len(phi.coeffs) > 3:
        fails.append({"name": "phi is at most quadratic", "measure": len(phi.coeffs) - 1})
    pa = phi_apply(phi, a)
    pb = phi_apply(phi, b)
    for label, mat in (("Phi(A)", pa), ("Phi(B)", pb)):
        w0 = float(eigvalsh(mat)[0])
        if not w0 > 0:
            fails.append({"name": f"{label} positive definite", "measure": w0})
    cond = _sandwich_condition(pa, pb, params.m, params.M, "m Phi(A) <= Phi(B) <= M Phi(A)")
    if cond is not None:
        fails.append({"name": cond[0], "measure": float(cond[1])})
    return pa, pb, fails


def lemma6_bounds(a, b, params, phi, tol=LOEWNER_TOL):
    """``lemma4_bounds`` evaluated at ``(Phi(A), Phi(B))``."""
    params.check()
    a = hermitian(a)
    b = hermitian(b)
    pa, pb, fails = _phi_preconditions(phi, a, b, params)
    if fails:
        f = fails[0]
        raise AssumptionError(f"{f['name']} (measure {f['measure']})", measure=f["measure"])
    res = lemma4_bounds(pa, pb, params, tol)
    res.meta["phi"] = phi.to_json()
    return res


class _Lemma7Parts:
    """``A^{1/2}``, ``C``, ``p_L(C)``, ``p_U(C)`` and the Kantorovich constants."""

    def __init__(self, a, b, params, meta):
        self.half, self.c = _congruence_parts(a, b)
        self.a = hermitian(a)
        self.sandwich = tsallis_sandwich_polynomials(params.q, params.m, params.M, params.relax)
        self.pl = eval_poly_matrix(self.sandwich.lower, self.c)
        self.pu = eval_poly_matrix(self.sandwich.upper, self.c)
        self.meta = meta
        meta["omega_underflow"] = self.sandwich.meta["omega_underflow"]

    def k(self, which, r):
        mat = self.pl if which == "L" else self.pu
        return kantorovich_on(mat, r, f"p_{which}(C)", self.meta)

    def assemble(self, phi, poly, k1, k2):
        """``V* {a0 I + a1 k1 A^{1/2} P A^{1/2} + a2 k2 A P^2 A} V``."""
        coeffs = tuple(phi.coeffs) + (0.0,) * (3 - len(phi.coeffs))
        a0, a1, a2 = coeffs[:3]
        n = self.a.shape[0]
        inner = a0 * np.eye(n, dtype=complex)
        if a1 != 0:
            inner = inner + a1 * k1() * (self.half @ poly @ self.half)
        if a2 != 0:
            inner = inner + a2 * k2() * (self.a @ poly @ poly @ self.a)
        v = phi.V
        return herm(v.conj().T @ inner @ v)


def commutator_measure(a, b, q):
    """``||[A^{1/2}, C^q]||_2`` relative to ``||A^{1/2}|| ||C^q||``."""
    half, c = _congruence_parts(a, b)
    cq = matrix_power_real(c, q)
    comm = np.asarray(half) @ np.asarray(cq) - np.asarray(cq) @ np.asarray(half)
    scale = np.linalg.norm(half, 2) * np.linalg.norm(cq, 2)
    return float(np.linalg.norm(comm, 2) / scale)


def _lemma7_preconditions(a, b, params, phi):
    fails = []
    cond = _sandwich_condition(a, b, params.m, params.M, "m A <= B <= M A")
    if cond is not None:
        fails.append({"name": cond[0], "measure": float(cond[1])})
    if any(c < 0 for c in phi.coeffs):
        fails.append({"name": "phi coefficients nonnegative", "measure": min(phi.coeffs)})
    if len(phi.coeffs) > 3:
        fails.append({"name": "phi is at most quadratic", "measure": len(phi.coeffs) - 1})
    comm = commutator_measure(a, b, params.q)
    if comm > COMMUTE_TOL:
        fails.append({"name": "A^{1/2} commutes with C^q", "measure": comm})
    return fails, comm


def lemma7_phi_of_tsallis_bounds(a, b, params, phi, tol=LOEWNER_TOL):
    """Bracket ``Phi(T_q(A||B))`` through the quadratic bounds ``p_L <= g <= p_U`` on ``C``."""
    outside = params.check()
    a = hermitian(a)
    b = hermitian(b)
    fails, comm = _lemma7_preconditions(a, b, params, phi)
    if fails:
        f = fails[0]
        raise AssumptionError(f"{f['name']} (measure {f['measure']})", measure=f["measure"])
    meta = {"q": params.q, "m": params.m, "M": params.M, "outside_hypotheses": outside, "commutator": comm}
    parts = _Lemma7Parts(a, b, params, meta)
    lower = parts.assemble(phi, parts.pl, lambda: 1.0 / parts.k("L", 1), lambda: 1.0 / parts.k("L", 2))
    upper = parts.assemble(phi, parts.pu, lambda: parts.k("U", 1), lambda: parts.k("U", 2))
    center = phi_apply(phi, tsallis_relative_entropy(a, b, params.q))
    return _check(lower, center, upper, meta, tol)


def theorem2_sandwich(a, b, params, phi, tol=LOEWNER_TOL):
    """Two-sided bound on ``T_q(Phi(A)||Phi(B))`` with ``c = d = e = 1``.

    ``W`` pairs the ``p_U``-spectrum Kantorovich constants with ``p_L``
    matrices; the lemma-7 upper assembly is kept in the metadata for
    comparison.  Failed hypotheses are listed under
    ``meta["assumption_failures"]`` instead of raising.
    """
    a = hermitian(a)
    b = hermitian(b)
    meta = {"q": params.q, "m": params.m, "M": params.M, "scales": [1.0, 1.0, 1.0]}
    failures = []
    try:
        meta["outside_hypotheses"] = params.check()
    except ConstraintError as exc:
        failures.append({"name": "parameter hypotheses", "measure": str(exc)})
        meta["outside_hypotheses"] = True
    f7, comm = _lemma7_preconditions(a, b, params, phi)
    meta["commutator"] = comm
    pa, pb, f6 = _phi_preconditions(phi, a, b, params)
    seen = set()
    for f in f7 + f6:
        if f["name"] not in seen:
            seen.add(f["name"])
            failures.append(f)
    meta["assumption_failures"] = failures
    relaxed = EntropyParams(params.q, params.m, params.M, True)
    q, m, M = params.q, params.m, params.M

    parts = _Lemma7Parts(a, b, relaxed, meta)
    w_op = parts.assemble(phi, parts.pl, lambda: parts.k("U", 1), lambda: parts.k("U", 2))
    x_op = parts.assemble(phi, parts.pl, lambda: 1.0 / parts.k("L", 1), lambda: 1.0 / parts.k("L", 2))
    lemma7_upper = parts.assemble(phi, parts.pu, lambda: parts.k("U", 1), lambda: parts.k("U", 2))
    meta["lemma7_upper"] = matrix_to_json(lemma7_upper)
    meta["W_minus_lemma7_upper_max_abs"] = float(np.max(np.abs(w_op - lemma7_upper)))

    gamma, psi, omega = gamma_psi_omega(pa, pb, relaxed, meta)
    y_op = herm(gamma - (1.0 - q) * m ** (q - 2.0) / 2.0 * psi - omega)
    z_op = herm(gamma - (1.0 - q) * M ** (q - 2.0) / 2.0 * psi + omega)
    phi_t = phi_apply(phi, tsallis_relative_entropy(a, b, q))
    center = tsallis_relative_entropy(pa, pb, q)
    lower_op = herm(phi_t - (w_op - z_op))
    upper_op = herm(phi_t - (x_op - y_op))
    meta["phi_T"] = matrix_to_json(phi_t)
    alt = loewner_compare(herm(phi_t - (lemma7_upper - z_op)), center, tol)
    meta["lower_chain_with_lemma7_upper"] = {"relation": alt.relation.value, "min_gap": alt.min_gap}
    return EntropyBoundReport(
        lower_op,
        upper_op,
        center,
        w_op,
        x_op,
        y_op,
        z_op,
        loewner_compare(lower_op, center, tol),
        loewner_compare(center, upper_op, tol),
        None,
        meta,
    )


def scalar_tsallis_inequality_check(params, grid_size=10_000):
    """Evaluate the two scalar bounds on ``h(x) = (1 - x^q)/q`` over ``[m, M]``.

    ``lower_h = secant + k_m psi + omega <= h <= secant + k_M psi - omega``.
    A positive ``max_violation`` is a finding; its location is reported.
    """
    if grid_size < 2:
        raise ParameterError("grid size must be >= 2")
    q, m, M = params.q, params.m, params.M
    outside = params.check()
    x = np.linspace(m, M, grid_size)
    h = (1.0 - x**q) / q
    secant = ((x - m) * (1.0 - M**q) + (M - x) * (1.0 - m**q)) / (q * (M - m))
    psi = (x - m) * (x - M)
    omega, underflow = omega_scalar(q, m, M)
    lower_h = secant + (1.0 - q) * m ** (q - 2.0) / 2.0 * psi + omega
    upper_h = secant + (1.0 - q) * M ** (q - 2.0) / 2.0 * psi - omega
    v_lower = lower_h - h
    v_upper = h - upper_h
    i_lo = int(np.argmax(v_lower))
    i_up = int(np.argmax(v_upper))
    worst = max(float(v_lower[i_lo]), float(v_upper[i_up]))
    arg = float(x[i_lo]) if v_lower[i_lo] >= v_upper[i_up] else float(x[i_up])
    return {
        "q": q,
        "m": m,
        "M": M,
        "grid_size": grid_size,
        "omega": omega,
        "omega_underflow": underflow,
        "outside_hypotheses": outside,
        "max_violation_lower": float(v_lower[i_lo]),
        "argmax_lower": float(x[i_lo]),
        "max_violation_upper": float(v_upper[i_up]),
        "argmax_upper": float(x[i_up]),
        "max_violation": worst,
        "argmax": arg,
        "holds": worst <= 1e-12,
    }


__all__ = [
    "BoundCheck",
    "EntropyBoundReport",
    "EntropyParams",
    "commutator_measure",
    "gamma_psi_omega",
    "lemma4_bounds",
    "lemma5_bounds",
    "lemma6_bounds",
    "lemma7_phi_of_tsallis_bounds",
    "relative_operator_entropy",
    "scalar_tsallis_inequality_check",
    "theorem2_sandwich",
    "tsallis_relative_entropy",
]

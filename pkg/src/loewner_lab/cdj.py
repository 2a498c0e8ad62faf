"""Generalized Choi-Davis-Jensen bounds for ``Phi(X) = V* (sum a_i X^i) V``.

Pipeline for a continuous ``f``:

* power bounds ``K^-1 p_L(A)^i <= f(A)^i <= K p_U(A)^i`` with Kantorovich
  constants taken on the spectra of ``p_L(A)`` / ``p_U(A)``;
* the bracket ``LB <= Phi(f(A)) <= UB`` assembled from them;
* the bracket ``p~_L(Phi(A)) <= f(Phi(A)) <= p~_U(Phi(A))`` from a second
  sandwich on the spectral interval of ``Phi(A)``;
* the four operators ``W, X, Y, Z`` and the two-sided bound on
  ``f(Phi(A))`` for positive scales ``c, d, e``.

A bound that fails numerically is reported through its Loewner verdict,
never raised; only violated hypotheses raise.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AssumptionError, ParameterError, PositivityError
from .kantorovich import kantorovich_r
from .linalg import (
    LOEWNER_TOL,
    Relation,
    apply_function,
    eigvalsh,
    herm,
    hermitian,
    identity,
    loewner_compare,
    matrix_power_real,
    matrix_to_json,
    weak_majorization_leq,
)
from .phimap import identity_map, phi_apply
from .sandwich import build_sandwich, eval_poly_matrix

PSD_TOL = 1e-10
DEGENERATE_PAD = 1e-8


@dataclass(frozen=True)
class CdjScales:
    c: float = 1.0
    d: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.d > 0 and self.e > 0):
            raise ParameterError(f"scales must be positive, got c={self.c}, d={self.d}, e={self.e}")


@dataclass(frozen=True)
class Bracket:
    lower: np.ndarray
    upper: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class BoundReport:
    """Operators of the two-sided bound ``lower_op <= center <= upper_op``."""

    lower_op: np.ndarray
    upper_op: np.ndarray
    center: np.ndarray
    W: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    verdict_lower: object
    verdict_upper: object
    majorization: dict = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self):
        return self.verdict_lower.holds_leq and self.verdict_upper.holds_leq

    def to_json(self):
        out = {
            "lower_op": matrix_to_json(self.lower_op),
            "center": matrix_to_json(self.center),
            "upper_op": matrix_to_json(self.upper_op),
            "W": matrix_to_json(self.W),
            "X": matrix_to_json(self.X),
            "Y": matrix_to_json(self.Y),
            "Z": matrix_to_json(self.Z),
            "verdict_lower": self.verdict_lower.to_json(),
            "verdict_upper": self.verdict_upper.to_json(),
            "majorization": self.majorization,
            "meta": self.meta,
        }
        return out


def spectral_interval(a, meta=None, label="A"):
    """``[min, max]`` of the spectrum, padded when it collapses to a point."""
    w = eigvalsh(a)
    lo, hi = float(w[0]), float(w[-1])
    if hi - lo <= 1e-12 * (1.0 + abs(hi)):
        pad = DEGENERATE_PAD * (1.0 + abs(lo))
        lo, hi = lo - pad, hi + pad
        if meta is not None:
            meta.setdefault("flags", []).append(f"{label}: degenerate spectrum widened by {pad:.3e}")
    return lo, hi


def kantorovich_on(mat, r, label, meta):
    """``K(min spec, max spec, r)`` of ``mat``, recording what was used.

    ``r = 0`` gives 1 exactly.  ``r = 1`` is outside the constant's domain;
    the sandwich already brackets the first power, so 1 is used and flagged.
    """
    r = int(r)
    if r == 0:
        return 1.0
    if r == 1:
        meta.setdefault("flags", []).append(f"{label}: r=1: K:=1")
        return 1.0
    w = eigvalsh(mat)
    if not w[0] > 0:
        raise AssumptionError(
            f"Kantorovich constant on {label} needs a positive spectrum (min eigenvalue {w[0]:.3e})",
            measure=float(w[0]),
        )
    lo, hi = spectral_interval(mat, meta, label)
    if lo <= 0:
        lo = float(w[0]) / 2.0
    k = kantorovich_r(lo, hi, r)
    meta.setdefault("kantorovich", {})[f"{label}^{r}"] = {"m": lo, "M": hi, "K": k}
    return k


def _check_in_interval(a, sandwich):
    w = eigvalsh(a)
    lo, hi = sandwich.interval
    slack = 1e-10 * (1.0 + max(abs(lo), abs(hi)))
    if w[0] < lo - slack or w[-1] > hi + slack:
        raise AssumptionError(
            f"spectrum [{w[0]:.6g}, {w[-1]:.6g}] not inside sandwich interval [{lo:.6g}, {hi:.6g}]",
            measure=(float(w[0]), float(w[-1])),
        )


def _check_psd(mat, label):
    w = eigvalsh(mat)
    scale = 1.0 + max(abs(w[0]), abs(w[-1]))
    if w[0] < -PSD_TOL * scale:
        raise AssumptionError(f"{label} is not positive semidefinite (min eigenvalue {w[0]:.3e})", measure=float(w[0]))


def _int_power(mat, i, label):
    if i >= 0:
        return herm(np.linalg.matrix_power(np.asarray(mat), i))
    try:
        return matrix_power_real(mat, i)
    except PositivityError as exc:
        raise AssumptionError(f"negative power of {label} needs it positive definite: {exc}",
                              measure=exc.min_eigenvalue) from None


class _PolyImages:
    """``p_L(A)``, ``p_U(A)`` with cached powers and Kantorovich constants."""

    def __init__(self, sandwich, a, meta):
        self.meta = meta
        self.pl = eval_poly_matrix(sandwich.lower, a)
        self.pu = eval_poly_matrix(sandwich.upper, a)
        self._pow = {}
        self._k = {}

    def power(self, which, i):
        key = (which, i)
        if key not in self._pow:
            mat = self.pl if which == "L" else self.pu
            self._pow[key] = _int_power(mat, i, f"p_{which}(A)")
        return self._pow[key]

    def k(self, which, i):
        key = (which, i)
        if key not in self._k:
            mat = self.pl if which == "L" else self.pu
            self._k[key] = kantorovich_on(mat, i, f"p_{which}(A)", self.meta)
        return self._k[key]

    def lower_power(self, i):
        """``K^-1(p_L, i) p_L(A)^i``."""
        return self.power("L", i) / self.k("L", i)

    def upper_power(self, i):
        """``K(p_U, i) p_U(A)^i``."""
        return self.k("U", i) * self.power("U", i)


def lemma1_power_bounds(sandwich, a, i, sign="plus"):
    """Bracket ``f(A)^i`` between Kantorovich-scaled powers of ``p_L(A)`` and ``p_U(A)``.

    ``sign="plus"`` covers exponents of nonnegative coefficients (``i >= 0``);
    ``sign="minus"`` also admits negative exponents, which need positive
    definite polynomial images.
    """
    a = hermitian(a)
    if int(i) != i:
        raise ParameterError("exponent must be an integer")
    i = int(i)
    if sign not in ("plus", "minus"):
        raise ParameterError("sign must be 'plus' or 'minus'")
    if sign == "plus" and i < 0:
        raise ParameterError("negative exponents only with sign='minus'")
    _check_in_interval(a, sandwich)
    meta = {"i": i, "sign": sign}
    imgs = _PolyImages(sandwich, a, meta)
    _check_psd(imgs.pl, "p_L(A)")
    if i == 0:
        eye = identity(a.shape[0])
        return Bracket(eye, eye, meta)
    return Bracket(herm(imgs.lower_power(i)), herm(imgs.upper_power(i)), meta)


def lemma2_phi_f_bounds(phi, sandwich, a, meta=None):
    """``LB <= Phi(f(A)) <= UB`` from the power bounds, term by term.

    A negative coefficient swaps which side of the power bracket feeds which bound.
    """
    a = hermitian(a)
    _check_in_interval(a, sandwich)
    meta = {} if meta is None else meta
    imgs = _PolyImages(sandwich, a, meta)
    if any(ai != 0 and i >= 1 for i, ai in enumerate(phi.coeffs)):
        _check_psd(imgs.pl, "p_L(A)")
    n = a.shape[0]
    upper = np.zeros((n, n), dtype=complex)
    lower = np.zeros((n, n), dtype=complex)
    for i, ai in enumerate(phi.coeffs):
        if ai == 0:
            continue
        if i == 0:
            upper = upper + ai * np.eye(n)
            lower = lower + ai * np.eye(n)
        elif ai > 0:
            upper = upper + ai * imgs.upper_power(i)
            lower = lower + ai * imgs.lower_power(i)
        else:
            upper = upper + ai * imgs.lower_power(i)
            lower = lower + ai * imgs.upper_power(i)
    v = phi.V
    ub = herm(v.conj().T @ upper @ v)
    lb = herm(v.conj().T @ lower @ v)
    return Bracket(lb, ub, meta)


def lemma3_f_phi_bounds(phi, f, a, epsilon, tilde=None, meta=None):
    """``p~_L(Phi(A)) <= f(Phi(A)) <= p~_U(Phi(A))``.

    The sandwich is built on the spectral interval of ``Phi(A)`` unless
    ``tilde`` supplies one.
    """
    meta = {} if meta is None else meta
    x = phi_apply(phi, a)
    lo, hi = spectral_interval(x, meta, "Phi(A)")
    meta["phi_interval"] = [lo, hi]
    if tilde is None:
        tilde = build_sandwich(f, lo, hi, epsilon)
    else:
        tlo, thi = tilde.interval
        if lo < tlo or hi > thi:
            meta.setdefault("flags", []).append(
                f"supplied tilde sandwich [{tlo:.6g}, {thi:.6g}] does not cover spec(Phi(A)) [{lo:.6g}, {hi:.6g}]"
            )
    meta["tilde_sandwich"] = tilde.to_json()
    upper = eval_poly_matrix(tilde.upper, x)
    lower = eval_poly_matrix(tilde.lower, x)
    return Bracket(lower, upper, meta)


def theorem1_sandwich(phi, f, a, epsilon, scales=None, sandwich=None, tilde=None, tol=LOEWNER_TOL):
    """Two-sided bound on ``f(Phi(A))``.

    ``lower_op = e Phi(f(A)) - d (W - Z)`` and ``upper_op = e Phi(f(A)) - c (X - Y)``
    with ``W = (e/d) UB``, ``X = (e/c) LB``, ``Y = p~_U(Phi(A)) / c``,
    ``Z = p~_L(Phi(A)) / d``.
    """
    scales = scales or CdjScales()
    a = hermitian(a)
    meta = {"epsilon": epsilon, "scales": [scales.c, scales.d, scales.e]}
    if sandwich is None:
        lo, hi = spectral_interval(a, meta, "A")
        sandwich = build_sandwich(f, lo, hi, epsilon)
    meta["sandwich"] = sandwich.to_json()
    b2 = lemma2_phi_f_bounds(phi, sandwich, a, meta)
    b3 = lemma3_f_phi_bounds(phi, f, a, epsilon, tilde, meta)
    c, d, e = scales.c, scales.d, scales.e
    w_op = herm((e / d) * b2.upper)
    x_op = herm((e / c) * b2.lower)
    y_op = herm(b3.upper / c)
    z_op = herm(b3.lower / d)
    phi_f = phi_apply(phi, apply_function(f, a))
    center = apply_function(f, phi_apply(phi, a))
    lower_op = herm(e * phi_f - d * (w_op - z_op))
    upper_op = herm(e * phi_f - c * (x_op - y_op))
    meta["UB"] = matrix_to_json(b2.upper)
    meta["LB"] = matrix_to_json(b2.lower)
    meta["phi_f"] = matrix_to_json(phi_f)
    return BoundReport(
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


def corollary_majorization(report):
    """Attach the eigenvalue weak-majorization chain ``lower_op <=_w center <=_w upper_op``."""
    lam_l = np.sort(eigvalsh(report.lower_op))[::-1]
    lam_c = np.sort(eigvalsh(report.center))[::-1]
    lam_r = np.sort(eigvalsh(report.upper_op))[::-1]
    maj = {
        "lambda_lower": [float(v) for v in lam_l],
        "lambda_center": [float(v) for v in lam_c],
        "lambda_upper": [float(v) for v in lam_r],
        "lower_wk_center": weak_majorization_leq(lam_l, lam_c),
        "center_wk_upper": weak_majorization_leq(lam_c, lam_r),
    }
    return replace(report, majorization=maj)


def classical_cdj_check(v, f, a, tol=LOEWNER_TOL):
    """Verdict of ``f(V* A V) <= V* f(A) V``; LEQ/EQUAL means the inequality holds."""
    phi = identity_map(v)
    a = hermitian(a)
    lhs = apply_function(f, phi_apply(phi, a))
    rhs = phi_apply(phi, apply_function(f, a))
    return loewner_compare(lhs, rhs, tol)


__all__ = [
    "Bracket",
    "BoundReport",
    "CdjScales",
    "Relation",
    "classical_cdj_check",
    "corollary_majorization",
    "kantorovich_on",
    "lemma1_power_bounds",
    "lemma2_phi_f_bounds",
    "lemma3_f_phi_bounds",
    "spectral_interval",
    "theorem1_sandwich",
]

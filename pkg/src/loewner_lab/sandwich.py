"""One-sided polynomial approximants ``p_L <= f <= p_U`` on an interval.

A near-minimax interpolant at Chebyshev nodes is shifted down and up by
its measured sup error, so one-sidedness holds by construction up to the
resolution of the certification grid.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from scipy.optimize import minimize_scalar

from .errors import ApproximationError, ConstraintError, ParameterError
from .funcspec import catalog, eval_function
from .linalg import herm, hermitian

MAX_DEGREE = 256
GRID_PER_DEGREE = 1000
REFINE_CANDIDATES = 32


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial stored by its coefficients in ``basis``, ascending degree.

    ``basis="chebyshev"`` means ``sum c_k T_k(t)`` with ``t`` the affine image
    of ``domain`` on [-1, 1]; high-degree interpolants are only stable in
    that form.  :meth:`monomial` gives power-basis coefficients either way.
    """

    coeffs: tuple
    basis: str = "monomial"
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        c = [float(v) for v in self.coeffs] or [0.0]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not all(math.isfinite(v) for v in c):
            raise ParameterError("polynomial coefficients must be finite")
        if self.basis not in ("monomial", "chebyshev"):
            raise ParameterError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def coefficient(self, k):
        """Power-basis coefficient of ``x^k`` (zero above the degree)."""
        c = self.monomial()
        return c[k] if k < len(c) else 0.0

    def _window(self, x):
        a, b = self.domain
        return (2.0 * x - (a + b)) / (b - a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.basis == "monomial":
            return nppoly.polyval(x, self.coeffs)
        return npcheb.chebval(self._window(x), self.coeffs)

    def monomial(self):
        """Power-basis coefficients ``c_0 .. c_n``."""
        if self.basis == "monomial":
            return self.coeffs
        series = np.polynomial.Chebyshev(self.coeffs, domain=list(self.domain))
        return tuple(float(v) for v in series.convert(kind=np.polynomial.Polynomial).coef)

    def shift(self, delta):
        c = list(self.coeffs)
        c[0] += delta
        return Polynomial(tuple(c), self.basis, self.domain)

    def to_json(self):
        out = {"coeffs": list(self.monomial())}
        if self.basis == "chebyshev":
            out["chebyshev"] = {"coeffs": list(self.coeffs), "domain": list(self.domain)}
        return out

    @classmethod
    def from_json(cls, obj):
        if "chebyshev" in obj:
            ch = obj["chebyshev"]
            return cls(tuple(ch["coeffs"]), "chebyshev", tuple(ch["domain"]))
        return cls(tuple(obj["coeffs"]))


@dataclass(frozen=True)
class SandwichPair:
    lower: Polynomial
    upper: Polynomial
    interval: tuple
    epsilon: float
    grid_size: int
    meta: dict = field(default_factory=dict, compare=False)

    def gaps(self, f, x):
        """``(upper - f, f - lower)`` at the points ``x``."""
        fx = eval_function(f, x)
        return self.upper(x) - fx, fx - self.lower(x)

    def certify(self, f, x=None):
        """Largest one-sided violation and largest over-width on the points ``x``.

        Returns ``(violation, excess)``: ``violation`` is the most negative gap
        flipped to a positive number (0 when one-sided), ``excess`` how far a
        gap exceeds ``epsilon`` (0 when within).
        """
        if x is None:
            x = np.linspace(*self.interval, self.grid_size)
        up, lo = self.gaps(f, np.asarray(x, dtype=float))
        violation = max(0.0, -float(min(up.min(), lo.min())))
        excess = max(0.0, float(max(up.max(), lo.max())) - self.epsilon)
        return violation, excess

    def slack(self, f):
        fx = eval_function(f, np.linspace(*self.interval, 1001))
        return 1e-12 * (1.0 + float(np.max(np.abs(fx))))

    def to_json(self):
        return {
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "interval": list(self.interval),
            "epsilon": self.epsilon,
            "grid_size": self.grid_size,
            "omega_underflow": bool(self.meta.get("omega_underflow", False)),
            "meta": {k: v for k, v in self.meta.items() if k != "omega_underflow"},
        }

    @classmethod
    def from_json(cls, obj):
        meta = dict(obj.get("meta", {}))
        meta["omega_underflow"] = obj.get("omega_underflow", False)
        return cls(
            Polynomial.from_json(obj["lower"]),
            Polynomial.from_json(obj["upper"]),
            tuple(obj["interval"]),
            float(obj["epsilon"]),
            int(obj["grid_size"]),
            meta,
        )


def _check_interval(m, M):
    if not (math.isfinite(m) and math.isfinite(M) and m < M):
        raise ParameterError(f"need finite m < M, got [{m}, {M}]")


def chebyshev_nodes(m, M, degree):
    k = np.arange(degree + 1)
    t = np.cos(np.pi * (k + 0.5) / (degree + 1))
    return 0.5 * (m + M) + 0.5 * (M - m) * t, t


def interpolate(f, m, M, degree):
    """Interpolant of ``f`` at the ``degree + 1`` Chebyshev nodes of [m, M]."""
    _check_interval(m, M)
    if degree < 0:
        raise ParameterError("degree must be >= 0")
    x, t = chebyshev_nodes(m, M, degree)
    fx = np.asarray(eval_function(f, x), dtype=float)
    n = degree + 1
    # discrete orthogonality of T_j at the first-kind nodes
    theta = np.arccos(np.clip(t, -1.0, 1.0))
    coef = 2.0 / n * np.cos(np.outer(np.arange(n), theta)) @ fx
    coef[0] *= 0.5
    return Polynomial(tuple(coef), "chebyshev", (m, M))


def default_grid_size(degree):
    return GRID_PER_DEGREE * (degree + 1) + 1


def sup_error(f, p, m, M, grid_size=None):
    """``max |f - p|`` over [m, M]: dense grid, then local refinement of the top maxima."""
    _check_interval(m, M)
    n = grid_size or default_grid_size(p.degree)
    x = np.linspace(m, M, n)
    err = np.abs(eval_function(f, x) - p(x))
    best = float(err.max())
    if best == 0.0:
        return 0.0
    # local maxima of the sampled error, endpoints included
    left = np.concatenate(([True], err[1:] >= err[:-1]))
    right = np.concatenate((err[:-1] >= err[1:], [True]))
    peaks = np.flatnonzero(left & right)
    peaks = peaks[np.argsort(err[peaks])[::-1][:REFINE_CANDIDATES]]

    def neg_err(t):
        return -abs(float(eval_function(f, t)) - float(p(t)))

    for i in peaks:
        if err[i] < 0.5 * best:
            break
        lo = x[max(i - 1, 0)]
        hi = x[min(i + 1, n - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(neg_err, bounds=(lo, hi), method="bounded", options={"xatol": 1e-15 * (1 + abs(hi))})
        best = max(best, -float(res.fun))
    return best


def sandwich_from_polynomial(f, p, m, M, grid_size=None, meta=None):
    """Shift ``p`` by its measured sup error to get a one-sided pair."""
    n = grid_size or default_grid_size(p.degree)
    delta = sup_error(f, p, m, M, n)
    info = {"degree": p.degree, "delta": delta}
    info.update(meta or {})
    return SandwichPair(p.shift(-delta), p.shift(delta), (float(m), float(M)), 2.0 * delta, n, info)


def build_sandwich(f, m, M, epsilon, max_degree=MAX_DEGREE, start_degree=2):
    """Certified pair with ``upper - lower == 2 delta <= epsilon``.

    Degrees ``start_degree, 2*start_degree, ...`` are tried until the sup
    error of the Chebyshev interpolant is at most ``epsilon / 2``.
    """
    _check_interval(m, M)
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    degree = start_degree
    best = (math.inf, None)
    while degree <= max_degree:
        p = interpolate(f, m, M, degree)
        n = default_grid_size(degree)
        delta = sup_error(f, p, m, M, n)
        if delta < best[0]:
            best = (delta, degree)
        if delta <= epsilon / 2:
            return SandwichPair(
                p.shift(-delta),
                p.shift(delta),
                (float(m), float(M)),
                2.0 * delta,
                n,
                {"degree": degree, "delta": delta, "target_epsilon": epsilon},
            )
        degree *= 2
    raise ApproximationError(
        f"no interpolant of degree <= {max_degree} reaches sup error {epsilon / 2:.3e} "
        f"on [{m}, {M}] (best {best[0]:.3e} at degree {best[1]})",
        best_delta=best[0],
        degree=best[1],
    )


def eval_poly_matrix(p, a):
    """``p(A)`` in matrix arithmetic (Horner, or Clenshaw for the Chebyshev basis)."""
    a = hermitian(a)
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    c = p.coeffs
    if p.basis == "monomial":
        out = c[-1] * eye
        for coef in reversed(c[:-1]):
            out = out @ a + coef * eye
        return herm(out)
    lo, hi = p.domain
    t = (2.0 * a - (lo + hi) * eye) / (hi - lo)
    b1 = np.zeros_like(eye)
    b2 = np.zeros_like(eye)
    for coef in reversed(c[1:]):
        b1, b2 = coef * eye + 2.0 * (t @ b1) - b2, b1
    return herm(c[0] * eye + t @ b1 - b2)


def omega_scalar(q, m, M):
    """``m^q / (M + m)^(M m)`` evaluated in log space.

    Returns ``(value, underflowed)``.
    """
    if not m > 0:
        raise ParameterError("omega needs m > 0")
    log_value = q * math.log(m) - M * m * math.log(M + m)
    value = math.exp(log_value) if log_value > -745.2 else 0.0
    return value, value == 0.0


def check_tsallis_hypotheses(q, m, M, relax=False):
    """Validate ``0 < q <= 1``, ``0 < m < M``, ``m >= 2`` and ``M >= 5m``.

    With ``relax`` the last pair may fail; the return value then says the
    inputs sit outside the stated hypotheses.
    """
    if not 0 < q <= 1:
        raise ConstraintError(f"need 0 < q <= 1, got q = {q}")
    if not 0 < m < M:
        raise ConstraintError(f"need 0 < m < M, got m = {m}, M = {M}")
    inside = m >= 2 and M >= 5 * m
    if not inside and not relax:
        raise ConstraintError(f"m >= 2 and M >= 5m violated (m = {m}, M = {M})")
    return not inside


def tsallis_sandwich_polynomials(q, m, M, relax=False, grid_size=10_001):
    """Closed-form quadratic bounds for ``(x^q - 1)/q`` on [m, M].

    ``lower = secant - (1-q) M^(q-2)/2 * psi + omega`` and
    ``upper = secant - (1-q) m^(q-2)/2 * psi - omega`` with
    ``psi(x) = (x - m)(x - M)`` and ``omega = m^q / (M + m)^(M m)``.
    """
    outside = check_tsallis_hypotheses(q, m, M, relax)
    omega, underflow = omega_scalar(q, m, M)
    slope = (M**q - m**q) / (q * (M - m))
    intercept = (M * (m**q - 1.0) - m * (M**q - 1.0)) / (q * (M - m))
    psi = (M * m, -(M + m), 1.0)

    def quad(k, sign):
        return Polynomial(
            (intercept - k * psi[0] + sign * omega, slope - k * psi[1], -k * psi[2])
        )

    k_lower = (1.0 - q) * M ** (q - 2.0) / 2.0
    k_upper = (1.0 - q) * m ** (q - 2.0) / 2.0
    lower = quad(k_lower, +1.0)
    upper = quad(k_upper, -1.0)
    f = catalog("tsallis_dev", q=q)
    x = np.linspace(m, M, grid_size)
    fx = eval_function(f, x)
    up = upper(x) - fx
    lo = fx - lower(x)
    eps = float(max(up.max(), lo.max(), 0.0))
    meta = {
        "q": q,
        "omega": omega,
        "omega_underflow": underflow,
        "outside_hypotheses": outside,
        "min_upper_gap": float(up.min()),
        "min_lower_gap": float(lo.min()),
    }
    return SandwichPair(lower, upper, (float(m), float(M)), eps, grid_size, meta)

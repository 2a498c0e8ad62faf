"""The polynomial-congruence map ``Phi(X) = V* (sum_i a_i X^i) V``."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .linalg import congruence, herm, hermitian, identity, loewner_compare, matrix_from_json

ISOMETRY_TOL = 1e-10


def random_isometry(n, k, rng):
    """``n x k`` isometry from the QR factor of a complex Gaussian matrix.

    ``rng`` is a ``numpy.random.Generator`` or a seed.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n = {n}, k = {k}")
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(g)
    # make the factorization unique: positive real diagonal of R
    d = np.diagonal(r)
    q = q * (np.abs(d) / d)
    return q


@dataclass(frozen=True)
class PhiMap:
    V: np.ndarray
    coeffs: tuple

    def __post_init__(self):
        v = np.array(self.V, dtype=complex)
        if v.ndim != 2 or v.shape[1] > v.shape[0] or v.shape[1] < 1:
            raise DimensionError(f"V must be n x k with 1 <= k <= n, got {v.shape}")
        err = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))
        if err > ISOMETRY_TOL:
            raise ParameterError(f"V is not an isometry: max |V*V - I| = {err:.3e}")
        coeffs = tuple(float(a) for a in self.coeffs)
        if not coeffs:
            raise ParameterError("Phi needs at least one coefficient")
        v.setflags(write=False)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def k(self):
        return self.V.shape[1]

    @property
    def positive_idx(self):
        return tuple(i for i, a in enumerate(self.coeffs) if a >= 0)

    @property
    def negative_idx(self):
        return tuple(i for i, a in enumerate(self.coeffs) if a < 0)

    @property
    def is_square(self):
        return self.n == self.k

    def inner(self, x):
        """``sum_i a_i X^i`` before compression."""
        x = hermitian(x)
        if x.shape[0] != self.n:
            raise DimensionError(f"Phi acts on {self.n} x {self.n} matrices, got {x.shape}")
        out = np.zeros_like(x)
        for a in reversed(self.coeffs):
            out = out @ x + a * np.eye(self.n)
        return herm(out)

    def __call__(self, x):
        return phi_apply(self, x)

    def to_json(self):
        v = self.V
        return {
            "V": {"n": v.shape[0], "k": v.shape[1],
                  "entries": [[[float(z.real), float(z.imag)] for z in row] for row in v]},
            "coeffs": list(self.coeffs),
        }

    @classmethod
    def from_json(cls, obj):
        vobj = obj["V"]
        if "k" in vobj:
            v = np.array([[complex(z[0], z[1]) for z in row] for row in vobj["entries"]])
        else:
            v = np.asarray(matrix_from_json(vobj))
        return cls(v, tuple(obj["coeffs"]))


def identity_map(v):
    """The classical congruence ``X -> V* X V``."""
    return PhiMap(v, (0.0, 1.0))


def phi_apply(phi, x):
    """``V* (sum_i a_i X^i) V`` (``X^0 = I``)."""
    return congruence(phi.V, phi.inner(x))


def phi_power(phi, a, j):
    """``Phi(A)^j`` as a matrix power of ``Phi(A)``, not a j-fold composition."""
    if j < 0 or int(j) != j:
        raise ParameterError("j must be a nonnegative integer")
    if j == 0:
        return identity(phi.k)
    base = phi_apply(phi, a)
    return herm(np.linalg.matrix_power(np.asarray(base), int(j)))


@dataclass(frozen=True)
class NplCheck:
    ok: bool
    evidence: tuple


def _random_psd(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return herm(g @ g.conj().T / n)


def is_normalized_positive_linear(phi, trials=20, seed=0, tol=1e-9):
    """Check whether ``phi`` is a normalized positive linear map.

    Linearity and normalization are structural (only the identity polynomial
    qualifies) and are also probed numerically so the evidence explains any
    failure; positivity is sampled on ``trials`` random PSD pairs.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    evidence = []
    c = phi.coeffs
    structural = len(c) >= 2 and c[1] == 1.0 and all(a == 0.0 for i, a in enumerate(c) if i != 1)
    if not structural:
        evidence.append(f"coefficients {c} are not the identity polynomial (a_1 = 1, others 0)")
    eye = identity(phi.n)
    img = np.asarray(phi_apply(phi, eye))
    dev = float(np.max(np.abs(img - np.eye(phi.k))))
    if dev > tol:
        evidence.append(f"normalization fails: max |Phi(I) - I| = {dev:.3e}")
    x = _random_psd(phi.n, rng)
    scaled = np.asarray(phi_apply(phi, 2.0 * x)) - 2.0 * np.asarray(phi_apply(phi, x))
    lin = float(np.max(np.abs(scaled)))
    if lin > tol * (1 + float(np.max(np.abs(x)))):
        evidence.append(f"linearity fails: max |Phi(2X) - 2 Phi(X)| = {lin:.3e}")
    for t in range(trials):
        small = _random_psd(phi.n, rng)
        big = herm(small + _random_psd(phi.n, rng))
        verdict = loewner_compare(phi_apply(phi, small), phi_apply(phi, big), tol)
        if not verdict.holds_leq:
            evidence.append(f"positivity fails on trial {t}: min gap eigenvalue {verdict.min_gap:.3e}")
            break
    return NplCheck(structural and not evidence, tuple(evidence))

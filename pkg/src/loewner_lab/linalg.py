"""Dense Hermitian matrix substrate.

Matrices are plain complex ``numpy`` arrays.  :func:`hermitian` validates
an input and returns a read-only, exactly Hermitian copy; every public
function here accepts anything :func:`hermitian` accepts.

Eigendecompositions go through a cyclic complex Jacobi iteration so that
results (and therefore counterexamples) are bit-reproducible for a given
input.  ``method="lapack"`` switches to ``numpy.linalg.eigh``.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    NotHermitianError,
    PositivityError,
)

HERMITIAN_TOL = 1e-12
LOEWNER_TOL = 1e-9
MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-14


def hermitian(a, tol=HERMITIAN_TOL):
    """Return ``a`` as a validated, read-only complex Hermitian array."""
    arr = np.array(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotHermitianError("matrix has non-finite entries")
    skew = np.max(np.abs(arr - arr.conj().T))
    bound = tol * (1.0 + np.max(np.abs(arr)))
    if skew > bound:
        raise NotHermitianError(f"max |A - A*| = {skew:.3e} exceeds {bound:.3e}")
    arr = 0.5 * (arr + arr.conj().T)
    arr.setflags(write=False)
    return arr


def is_hermitian(a, tol=HERMITIAN_TOL):
    try:
        hermitian(a, tol)
    except (NotHermitianError, DimensionError):
        return False
    return True


def herm(a):
    """Symmetrize an array known to be Hermitian up to rounding."""
    a = np.asarray(a, dtype=complex)
    out = 0.5 * (a + a.conj().T)
    out.setflags(write=False)
    return out


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    basis: np.ndarray  # columns are eigenvectors
    sweeps: int = 0

    def reconstruct(self, values=None):
        w = self.eigenvalues if values is None else np.asarray(values)
        return herm((self.basis * w) @ self.basis.conj().T)


def _offdiag(a):
    iu = np.triu_indices(a.shape[0], 1)
    return math.sqrt(2.0 * float(np.sum(np.abs(a[iu]) ** 2)))


def _jacobi(a, max_sweeps=MAX_SWEEPS, tol=OFFDIAG_TOL):
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    if n == 1 or fro == 0.0:
        return a.diagonal().real.copy(), v, 0
    target = tol * fro
    off = _offdiag(a)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal mass {off:.3e})",
                residual=off,
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g == 0.0 or g < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                # skip rotations that cannot change the diagonal in floating point
                if sweeps > 3 and abs(app) + 100 * g == abs(app) and abs(aqq) + 100 * g == abs(aqq):
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / g
                tau = (aqq - app) / (2.0 * g)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                cp = phase.conjugate()
                j10 = -s * cp
                j11 = c * cp
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap + j10 * aq
                a[:, q] = s * ap + j11 * aq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp + j10.conjugate() * rq
                a[q, :] = s * rp + j11.conjugate() * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * g
                a[q, q] = aqq + t * g
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp + j10 * vq
                v[:, q] = s * vp + j11 * vq
        off = _offdiag(a)
    return a.diagonal().real.copy(), v, sweeps


def _fix_phases(basis):
    basis = basis.copy()
    for k in range(basis.shape[1]):
        col = basis[:, k]
        big = np.flatnonzero(np.abs(col) > 1e-12 * max(np.max(np.abs(col)), 1e-300))
        if big.size:
            z = col[big[0]]
            basis[:, k] = col * (abs(z) / z)
    return basis


def spectral_decompose(a, method="jacobi"):
    """Eigendecomposition with ascending eigenvalues and a fixed phase convention.

    Each eigenvector's first non-negligible component is made real positive.
    """
    a = hermitian(a)
    if method == "jacobi":
        w, u, sweeps = _jacobi(a)
    elif method == "lapack":
        w, u = np.linalg.eigh(a)
        sweeps = 0
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(w, kind="stable")
    w = w[order]
    u = _fix_phases(u[:, order])
    w.setflags(write=False)
    u.setflags(write=False)
    return SpectralDecomposition(w, u, sweeps)


def eigvalsh(a, method="jacobi"):
    return spectral_decompose(a, method).eigenvalues


def spectral_radius(a):
    w = eigvalsh(a)
    return float(max(abs(w[0]), abs(w[-1])))


def _clip_to_domain(w, f, scale):
    dom = getattr(f, "domain", None)
    if dom is None:
        return w
    w = w.copy()
    slack = 1e-12 * scale
    for i, x in enumerate(w):
        if dom.contains(x):
            continue
        # rounding just outside a closed endpoint
        if dom.lo_closed and dom.lo - slack <= x < dom.lo:
            w[i] = dom.lo
        elif dom.hi_closed and dom.hi < x <= dom.hi + slack:
            w[i] = dom.hi
        else:
            raise DomainError(f"eigenvalue {x!r} outside domain {dom} of {f}", value=float(x))
    return w


def apply_function(f, a):
    """``U diag(f(lambda)) U*`` for a scalar function ``f``.

    ``f`` is a :class:`~loewner_lab.funcspec.ScalarFunction` or any vectorized
    callable returning real values.
    """
    dec = spectral_decompose(a)
    w = dec.eigenvalues
    w = _clip_to_domain(w, f, 1.0 + float(np.max(np.abs(w))))
    fw = np.asarray(f(w), dtype=float)
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(fw)][0]
        raise DomainError(f"{f} is not finite at eigenvalue {bad!r}", value=float(bad))
    return dec.reconstruct(fw)


def _require_pd(a, what="matrix"):
    w = eigvalsh(a)
    norm = max(abs(w[0]), abs(w[-1]))
    if not w[0] > 1e-10 * norm:
        raise PositivityError(
            f"{what} is not positive definite (min eigenvalue {w[0]:.3e})", min_eigenvalue=float(w[0])
        )
    return w


def _is_nonneg_int(r):
    return float(r).is_integer() and r >= 0


def matrix_power_real(a, r):
    """``A^r`` by functional calculus; positive definiteness required unless ``r`` is a nonnegative integer."""
    a = hermitian(a)
    r = float(r)
    if _is_nonneg_int(r):
        return apply_function(lambda x: np.power(x, r), a)
    _require_pd(a)
    dec = spectral_decompose(a)
    return dec.reconstruct(np.power(dec.eigenvalues, r))


def sqrtm_pd(a):
    return matrix_power_real(a, 0.5)


class Relation(str, enum.Enum):
    LEQ = "LEQ"
    GEQ = "GEQ"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass(frozen=True)
class LoewnerVerdict:
    relation: Relation
    gap_spectrum: np.ndarray  # eigenvalues of B - A, ascending
    tolerance: float

    @property
    def holds_leq(self):
        return self.relation in (Relation.LEQ, Relation.EQUAL)

    @property
    def holds_geq(self):
        return self.relation in (Relation.GEQ, Relation.EQUAL)

    @property
    def min_gap(self):
        return float(self.gap_spectrum[0])

    def to_json(self):
        return {
            "relation": self.relation.value,
            "gap_spectrum": [float(x) for x in self.gap_spectrum],
            "tolerance": self.tolerance,
        }


def classify_gap(gaps, tol):
    """Loewner relation read off the ascending spectrum of ``B - A``."""
    gaps = np.asarray(gaps, dtype=float)
    norm = float(np.max(np.abs(gaps)))
    slack = tol * (1.0 + norm)
    leq = gaps[0] >= -slack
    geq = gaps[-1] <= slack
    if leq and geq:
        return Relation.EQUAL
    if leq:
        return Relation.LEQ
    if geq:
        return Relation.GEQ
    return Relation.INCOMPARABLE


def loewner_compare(a, b, tol=LOEWNER_TOL):
    """Compare ``A`` with ``B`` in Loewner order; LEQ means ``A <= B``."""
    a = hermitian(a)
    b = hermitian(b)
    _same_dim(a, b)
    gaps = eigvalsh(herm(b - a))
    return LoewnerVerdict(classify_gap(gaps, tol), gaps, tol)


def weak_majorization_leq(u, v, tol=1e-9):
    """True iff ``u`` is weakly submajorized by ``v``.

    Every partial sum of the k largest entries of ``u`` must not exceed the
    corresponding sum for ``v`` by more than ``tol * scale``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")
    su = np.cumsum(np.sort(u)[::-1])
    sv = np.cumsum(np.sort(v)[::-1])
    scale = 1.0 + max(np.max(np.abs(u), initial=0.0), np.max(np.abs(v), initial=0.0)) * max(len(u), 1)
    return bool(np.all(su <= sv + tol * scale))


def geometric_mean_q(a, b, q):
    """Weighted geometric mean ``A^{1/2} (A^{-1/2} B A^{-1/2})^q A^{1/2}``."""
    a = hermitian(a)
    b = hermitian(b)
    _same_dim(a, b)
    dec = spectral_decompose(a)
    if not dec.eigenvalues[0] > 1e-10 * max(abs(dec.eigenvalues[0]), abs(dec.eigenvalues[-1])):
        raise PositivityError("A must be positive definite", min_eigenvalue=float(dec.eigenvalues[0]))
    half = dec.reconstruct(np.sqrt(dec.eigenvalues))
    ihalf = dec.reconstruct(1.0 / np.sqrt(dec.eigenvalues))
    c = herm(ihalf @ b @ ihalf)
    if not _is_nonneg_int(q):
        _require_pd(b, "B")
    cq = matrix_power_real(c, q)
    return herm(half @ cq @ half)


def congruence(v, x):
    """``V* X V``."""
    v = np.asarray(v, dtype=complex)
    return herm(v.conj().T @ np.asarray(x) @ v)


def identity(n):
    out = np.eye(n, dtype=complex)
    out.setflags(write=False)
    return out


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    return {
        "n": int(a.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(obj):
    n = int(obj["n"])
    entries = obj["entries"]
    if len(entries) != n or any(len(row) != n for row in entries):
        raise DimensionError(f"entries do not form a {n}x{n} matrix")
    arr = np.array(
        [[complex(float(z[0]), float(z[1])) if isinstance(z, (list, tuple)) else complex(float(z), 0.0) for z in row] for row in entries],
        dtype=complex,
    )
    return hermitian(arr)

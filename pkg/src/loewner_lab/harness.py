"""Seeded instance generators and the falsification suite runner.

Per-trial seeds: ``seed_i = splitmix64((seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2^64)``.
Every trial draws all of its randomness from ``numpy.random.default_rng(seed_i)``,
so trials are independent and can run in any order or in parallel.
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cdj, entropy
from .errors import (
    ApproximationError,
    AssumptionError,
    ConfigError,
    ConvergenceError,
    DomainError,
    ParameterError,
    PositivityError,
)
from .funcspec import catalog
from .linalg import apply_function, herm, loewner_compare, matrix_to_json, sqrtm_pd
from .phimap import PhiMap, random_isometry
from .sandwich import build_sandwich, interpolate, sandwich_from_polynomial

SCHEMA = "loewner-lab/1"
MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

SCENARIOS = (
    "classical-cdj",
    "lemma1",
    "theorem1",
    "example2",
    "lemma4",
    "lemma6",
    "lemma7",
    "theorem2",
    "scalar-grid",
)


def splitmix64(x):
    x = (x + GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed, i):
    return splitmix64((int(seed) + (int(i) + 1) * GOLDEN) & MASK64)


def gen_hermitian_with_spectrum(n, m, M, seed):
    """``U diag(lam) U*`` with ``lam`` uniform on [m, M]; for n >= 2 the first two are pinned to m and M."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not m < M:
        raise ParameterError(f"need m < M, got {m}, {M}")
    rng = np.random.default_rng(seed)
    lam = rng.uniform(m, M, size=n)
    if n >= 2:
        lam[0], lam[1] = m, M
    u = random_isometry(n, n, rng)
    a = herm((u * lam) @ u.conj().T)
    w = np.linalg.eigvalsh(np.asarray(a))
    if w[0] < m - 1e-10 * (1 + abs(m)) or w[-1] > M + 1e-10 * (1 + abs(M)):
        raise AssertionError("generated spectrum escaped its interval")
    return a


def gen_sandwiched_pair(n, m, M, seed, commuting=False):
    """SPD ``A`` (spectrum in [1, 2]) and ``B = A^{1/2} C A^{1/2}`` with ``spec(C)`` in [m, M]."""
    if not 0 < m < M:
        raise ParameterError(f"need 0 < m < M, got {m}, {M}")
    if commuting:
        rng = np.random.default_rng(seed)
        a_vals = rng.uniform(1.0, 2.0, size=n)
        c_vals = rng.uniform(m, M, size=n)
        if n >= 2:
            c_vals[0], c_vals[1] = m, M
        u = random_isometry(n, n, rng)
        a = herm((u * a_vals) @ u.conj().T)
        b = herm((u * (a_vals * c_vals)) @ u.conj().T)
    else:
        a = gen_hermitian_with_spectrum(n, 1.0, 2.0, splitmix64(seed))
        c = gen_hermitian_with_spectrum(n, m, M, splitmix64(seed ^ 0x5DEECE66D))
        h = sqrtm_pd(a)
        b = herm(h @ c @ h)
    if not (loewner_compare(m * np.asarray(a), b).holds_leq and loewner_compare(b, M * np.asarray(a)).holds_leq):
        raise AssertionError("generated pair violates m A <= B <= M A")
    return a, b


@dataclass(frozen=True)
class CommutingInstance:
    """Jointly diagonal ``A``, ``B`` and a column-selecting ``V`` (all in one basis)."""

    a: np.ndarray
    b: np.ndarray
    phi: PhiMap
    a_vals: np.ndarray
    b_vals: np.ndarray
    selected: tuple


def _poly_scalar(coeffs, x):
    return sum(c * x**i for i, c in enumerate(coeffs))


def gen_commuting_entropy_instance(n, k, m, M, coeffs, seed, max_tries=10_000):
    """Admissible instance for the ``Phi``-entropy bounds.

    Per index, ``c = b/a`` is drawn in [m, M] until ``phi(b)/phi(a)`` also lies
    in [m, M], where ``phi`` is the scalar polynomial of the map.
    """
    rng = np.random.default_rng(seed)
    a_vals = rng.uniform(1.0, 2.0, size=n)
    c_vals = np.empty(n)
    for i in range(n):
        pa = _poly_scalar(coeffs, a_vals[i])
        for _ in range(max_tries):
            c = rng.uniform(m, M)
            ratio = _poly_scalar(coeffs, c * a_vals[i]) / pa
            if m <= ratio <= M:
                c_vals[i] = c
                break
        else:
            raise AssumptionError(f"no admissible ratio found for index {i} after {max_tries} draws")
    u = random_isometry(n, n, rng)
    sel = tuple(sorted(int(j) for j in rng.choice(n, size=k, replace=False)))
    phases = np.exp(2j * np.pi * rng.uniform(size=k))
    v = u[:, list(sel)] * phases
    b_vals = a_vals * c_vals
    a = herm((u * a_vals) @ u.conj().T)
    b = herm((u * b_vals) @ u.conj().T)
    return CommutingInstance(a, b, PhiMap(v, coeffs), a_vals, b_vals, sel)


@dataclass(frozen=True)
class SuiteConfig:
    scenario: str
    seed: int = 0
    trials: int = 10
    dimension_range: tuple = (2, 5)
    epsilons: tuple = (1e-2, 1e-3)
    q_values: tuple = (0.25, 0.5, 0.75, 1.0)
    m: float = 2.0
    M: float = 10.0
    coeff_range: tuple = (0.1, 1.0)
    tolerance: float = 1e-9
    relax: bool = False
    grid_size: int = 10_000

    def __post_init__(self):
        for name in ("dimension_range", "epsilons", "q_values", "coeff_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if not 0 <= int(self.seed) <= MASK64:
            raise ConfigError("seed must fit in 64 bits")
        if len(self.dimension_range) != 2 or not 1 <= self.dimension_range[0] <= self.dimension_range[1]:
            raise ConfigError("dimension_range must be [nMin, nMax] with 1 <= nMin <= nMax")
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons must be a non-empty list of positive numbers")
        if not self.q_values:
            raise ConfigError("q_values must be non-empty")
        if len(self.coeff_range) != 2 or not 0 < self.coeff_range[0] <= self.coeff_range[1]:
            raise ConfigError("coeff_range must be [lo, hi] with 0 < lo <= hi")
        if not 0 < self.m < self.M:
            raise ConfigError("need 0 < m < M")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")

    def to_json(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        if "scenario" not in obj:
            raise ConfigError("config needs a scenario")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class SuiteReport:
    config: SuiteConfig
    trials: list
    counterexamples: list
    wall_time: float = 0.0
    summary: dict = field(default_factory=dict)

    @property
    def violation_count(self):
        return len(self.counterexamples)

    @property
    def numerical_failures(self):
        return sum(1 for t in self.trials if t["status"] == "numerical_failure")

    def to_json(self, include_time=True):
        out = {
            "schema": SCHEMA,
            "config": self.config.to_json(),
            "trials": self.trials,
            "violation_count": self.violation_count,
            "counterexamples": self.counterexamples,
            "summary": self.summary,
        }
        if include_time:
            out["wall_time"] = self.wall_time
        return out

    def dumps(self, include_time=True):
        return json.dumps(self.to_json(include_time), sort_keys=True, indent=1)


def _verdicts(**named):
    return {k: v.relation.value for k, v in named.items()}, {k: v.min_gap for k, v in named.items()}, {
        k: [float(g) for g in v.gap_spectrum] for k, v in named.items()
    }


def _dim(cfg, rng):
    lo, hi = cfg.dimension_range
    return int(rng.integers(lo, hi + 1))


def _scenario_classical(cfg, rng):
    n = _dim(cfg, rng)
    k = int(rng.integers(1, n + 1))
    name = ("square", "inverse")[int(rng.integers(2))]
    a = gen_hermitian_with_spectrum(n, 0.5, 3.0, int(rng.integers(1 << 63)))
    v = random_isometry(n, k, rng)
    verdict = cdj.classical_cdj_check(v, catalog(name), a, cfg.tolerance)
    inputs = {"f": name, "A": matrix_to_json(a), "V": matrix_to_json_rect(v)}
    return inputs, {"cdj": verdict}, not verdict.holds_leq


LEMMA1_FUNCS = (("exp", 0.0, 1.0), ("sqrt", 1.0, 4.0), ("square", 1.0, 2.0), ("log", 2.0, 4.0))


def _scenario_lemma1(cfg, rng):
    n = _dim(cfg, rng)
    name, lo, hi = LEMMA1_FUNCS[int(rng.integers(len(LEMMA1_FUNCS)))]
    eps = float(cfg.epsilons[int(rng.integers(len(cfg.epsilons)))])
    i = int(rng.integers(2, 4))
    f = catalog(name)
    a = gen_hermitian_with_spectrum(n, lo, hi, int(rng.integers(1 << 63)))
    sw = build_sandwich(f, lo, hi, eps)
    br = cdj.lemma1_power_bounds(sw, a, i)
    fi = np.linalg.matrix_power(np.asarray(apply_function(f, a)), i)
    vl = loewner_compare(br.lower, herm(fi), cfg.tolerance)
    vu = loewner_compare(herm(fi), br.upper, cfg.tolerance)
    inputs = {"f": name, "interval": [lo, hi], "epsilon": eps, "i": i, "A": matrix_to_json(a)}
    return inputs, {"lower": vl, "upper": vu}, not (vl.holds_leq and vu.holds_leq)


def _random_coeffs(cfg, rng, signs):
    lo, hi = cfg.coeff_range
    return tuple(float(s * rng.uniform(lo, hi)) for s in signs)


def _scenario_theorem1(cfg, rng):
    n = _dim(cfg, rng)
    k = int(rng.integers(1, n + 1))
    name = ("exp", "square")[int(rng.integers(2))]
    eps = float(cfg.epsilons[int(rng.integers(len(cfg.epsilons)))])
    a1_sign = 1.0 if rng.uniform() < 0.5 else -1.0
    coeffs = _random_coeffs(cfg, rng, (1.0, a1_sign, 1.0))
    a = gen_hermitian_with_spectrum(n, 0.5, 2.0, int(rng.integers(1 << 63)))
    phi = PhiMap(random_isometry(n, k, rng), coeffs)
    rep = cdj.corollary_majorization(cdj.theorem1_sandwich(phi, catalog(name), a, eps, tol=cfg.tolerance))
    inputs = {"f": name, "epsilon": eps, "A": matrix_to_json(a), "phi": phi.to_json()}
    maj = rep.majorization
    extra = {"majorization": [maj["lower_wk_center"], maj["center_wk_upper"]]}
    return inputs, {"lower": rep.verdict_lower, "upper": rep.verdict_upper}, not rep.holds, extra


def example2_instance(n, seed, coeff_range=(0.1, 1.0), max_tries=1000):
    """Quadratic ``Phi`` with ``a0, a2 > 0 > a1``, square unitary ``V``, ``f = exp``.

    The sandwich is the shifted degree-2 Chebyshev interpolant on an interval
    covering both ``spec(A)`` and ``spec(Phi(A))``, and serves as both
    ``p`` and ``p~``.  Draws where ``p_L(A)`` is not positive definite are
    rejected, since the Kantorovich constants need a positive spectrum.
    """
    rng = np.random.default_rng(seed)
    lo, hi = coeff_range
    f = catalog("exp")
    for _ in range(max_tries):
        coeffs = (float(rng.uniform(lo, hi)), -float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))
        a = gen_hermitian_with_spectrum(n, 0.5, 2.0, int(rng.integers(1 << 63)))
        phi = PhiMap(random_isometry(n, n, rng), coeffs)
        wa = np.linalg.eigvalsh(np.asarray(a))
        wphi = _poly_scalar(coeffs, wa)
        j_lo = float(min(wa.min(), wphi.min()))
        j_hi = float(max(wa.max(), wphi.max()))
        p = interpolate(f, j_lo, j_hi, 2)
        sw = sandwich_from_polynomial(f, p, j_lo, j_hi)
        if np.min(sw.lower(wa)) > 0:
            return a, phi, f, sw
    raise AssumptionError(f"no draw with p_L(A) > 0 after {max_tries} tries")


def _scenario_example2(cfg, rng):
    n = _dim(cfg, rng)
    a, phi, f, sw = example2_instance(n, int(rng.integers(1 << 63)), cfg.coeff_range)
    rep = cdj.corollary_majorization(
        cdj.theorem1_sandwich(phi, f, a, sw.epsilon, sandwich=sw, tilde=sw, tol=cfg.tolerance)
    )
    inputs = {"f": "exp", "A": matrix_to_json(a), "phi": phi.to_json(), "sandwich": sw.to_json()}
    maj = rep.majorization
    extra = {"majorization": [maj["lower_wk_center"], maj["center_wk_upper"]]}
    return inputs, {"lower": rep.verdict_lower, "upper": rep.verdict_upper}, not rep.holds, extra


def _q(cfg, rng):
    return float(cfg.q_values[int(rng.integers(len(cfg.q_values)))])


def _scenario_lemma4(cfg, rng):
    n = _dim(cfg, rng)
    params = entropy.EntropyParams(_q(cfg, rng), cfg.m, cfg.M, cfg.relax)
    a, b = gen_sandwiched_pair(n, cfg.m, cfg.M, int(rng.integers(1 << 63)))
    res = entropy.lemma4_bounds(a, b, params, cfg.tolerance)
    inputs = {"q": params.q, "A": matrix_to_json(a), "B": matrix_to_json(b)}
    return inputs, {"lower": res.verdict_lower, "upper": res.verdict_upper}, not res.holds


def _commuting_phi_instance(cfg, rng):
    n = _dim(cfg, rng)
    k = int(rng.integers(1, n + 1))
    coeffs = _random_coeffs(cfg, rng, (1.0, 1.0, 1.0))
    inst = gen_commuting_entropy_instance(n, k, cfg.m, cfg.M, coeffs, int(rng.integers(1 << 63)))
    params = entropy.EntropyParams(_q(cfg, rng), cfg.m, cfg.M, cfg.relax)
    inputs = {"q": params.q, "A": matrix_to_json(inst.a), "B": matrix_to_json(inst.b), "phi": inst.phi.to_json()}
    return inst, params, inputs


def _scenario_lemma6(cfg, rng):
    inst, params, inputs = _commuting_phi_instance(cfg, rng)
    res = entropy.lemma6_bounds(inst.a, inst.b, params, inst.phi, cfg.tolerance)
    return inputs, {"lower": res.verdict_lower, "upper": res.verdict_upper}, not res.holds


def _scenario_lemma7(cfg, rng):
    inst, params, inputs = _commuting_phi_instance(cfg, rng)
    res = entropy.lemma7_phi_of_tsallis_bounds(inst.a, inst.b, params, inst.phi, cfg.tolerance)
    return inputs, {"lower": res.verdict_lower, "upper": res.verdict_upper}, not res.holds


def _scenario_theorem2(cfg, rng):
    inst, params, inputs = _commuting_phi_instance(cfg, rng)
    rep = entropy.theorem2_sandwich(inst.a, inst.b, params, inst.phi, cfg.tolerance)
    extra = {"assumption_failures": rep.meta["assumption_failures"]}
    return inputs, {"lower": rep.verdict_lower, "upper": rep.verdict_upper}, not rep.holds, extra


def _scenario_scalar_grid(cfg, rng):
    params = entropy.EntropyParams(_q(cfg, rng), cfg.m, cfg.M, cfg.relax)
    res = entropy.scalar_tsallis_inequality_check(params, cfg.grid_size)
    inputs = {"q": params.q, "grid_size": cfg.grid_size}
    return inputs, {}, not res["holds"], {"scalar": res}


RUNNERS = {
    "classical-cdj": _scenario_classical,
    "lemma1": _scenario_lemma1,
    "theorem1": _scenario_theorem1,
    "example2": _scenario_example2,
    "lemma4": _scenario_lemma4,
    "lemma6": _scenario_lemma6,
    "lemma7": _scenario_lemma7,
    "theorem2": _scenario_theorem2,
    "scalar-grid": _scenario_scalar_grid,
}


def matrix_to_json_rect(v):
    v = np.asarray(v)
    return {"n": v.shape[0], "k": v.shape[1], "entries": [[[float(z.real), float(z.imag)] for z in row] for row in v]}


def run_trial(cfg, i):
    """Run trial ``i``; returns ``(summary, counterexample or None)``."""
    seed = trial_seed(cfg.seed, i)
    rng = np.random.default_rng(seed)
    summary = {"trial": i, "seed": seed}
    try:
        out = RUNNERS[cfg.scenario](cfg, rng)
    except ConvergenceError as exc:
        summary.update(status="numerical_failure", message=str(exc))
        return summary, None
    except (AssumptionError, ParameterError, DomainError, PositivityError, ApproximationError) as exc:
        summary.update(status="assumption", message=f"{type(exc).__name__}: {exc}")
        return summary, None
    inputs, verdicts, violated = out[:3]
    extra = out[3] if len(out) > 3 else {}
    rel, gaps_min, spectra = _verdicts(**verdicts)
    summary.update(status="violation" if violated else "ok", verdicts=rel, min_gaps=gaps_min, gaps=spectra)
    summary.update(extra)
    record = None
    if violated:
        record = {
            "schema": SCHEMA,
            "scenario": cfg.scenario,
            "config": cfg.to_json(),
            "trial": i,
            "seed": seed,
            "inputs": inputs,
            "verdicts": rel,
            "min_gaps": gaps_min,
        }
        record.update(extra)
    return summary, record


def _run_trial_json(cfg_json, i):
    return run_trial(SuiteConfig.from_json(cfg_json), i)


def run_suite(cfg, jobs=1):
    """Run every trial; violations are collected, never raised."""
    start = time.perf_counter()
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial_json, [cfg.to_json()] * cfg.trials, range(cfg.trials)))
    else:
        results = [run_trial(cfg, i) for i in range(cfg.trials)]
    results.sort(key=lambda r: r[0]["trial"])
    trials = [r[0] for r in results]
    counterexamples = [r[1] for r in results if r[1] is not None]
    counts = {}
    for t in trials:
        counts[t["status"]] = counts.get(t["status"], 0) + 1
    return SuiteReport(cfg, trials, counterexamples, time.perf_counter() - start, {"status_counts": counts})


def replay(record):
    """Re-run the trial a counterexample record came from; returns ``(summary, reproduced)``."""
    try:
        cfg = SuiteConfig.from_json(record["config"])
        i = int(record["trial"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed counterexample record: {exc}") from None
    summary, _ = run_trial(cfg, i)
    reproduced = summary.get("verdicts") == record.get("verdicts") and summary["seed"] == record.get("seed")
    return summary, reproduced


__all__ = [
    "SCENARIOS",
    "SCHEMA",
    "CommutingInstance",
    "SuiteConfig",
    "SuiteReport",
    "example2_instance",
    "gen_commuting_entropy_instance",
    "gen_hermitian_with_spectrum",
    "gen_sandwiched_pair",
    "replay",
    "run_suite",
    "run_trial",
    "splitmix64",
    "trial_seed",
]

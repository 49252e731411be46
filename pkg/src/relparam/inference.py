"""Bayesian information gain of the encoding scenarios.

For a prior p(w) over the encoded cosines and likelihoods L_k(w) = P(k | w),
the average gain is computed in its prior-expectation form

    I_avg = E_p[ sum_k L_k log2(L_k / P_k) ],   P_k = E_p[L_k],

which equals sum_k P_k KL(p(.|k) || p) because the posterior is
p(w|k) = L_k(w) p(w) / P_k.  The per-outcome gain is
I_k = E_p[L_k log2 L_k] / P_k - log2 P_k.  Logs are base 2 and 0 log 0 = 0.

Estimators
----------
``mc``      Monte Carlo over the prior.  Samples are split into fixed-size
            chunks, chunk ``c`` drawing from ``SeedSequence(seed, spawn_key=(c,))``,
            so results depend on (seed, samples) only.  Chunk sums are reduced
            in chunk order unless ``fixed_order=False``.
``quad1d``  Gauss-Legendre over each pair cosine (method B only).
``quad3d``  Tensor Gauss-Legendre.  Method A is integrated over
            (cos(n,r), cos(m,r), relative azimuth) which pushes forward to the
            prior; method B over three independent cosines.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .protocols import Scenario, likelihood_arrays
from .spin_algebra import HalfInteger

__all__ = [
    "PriorModel",
    "Estimator",
    "EstimatorConfig",
    "InfoGainReport",
    "PairGain",
    "SweepRow",
    "EstimatorError",
    "sample_prior",
    "prior_normalization",
    "outcome_probabilities",
    "info_gain",
    "pair_info_gain",
    "single_cosine_gain",
    "posterior_kl_gain",
    "sweep_j",
    "mutual_information_discrete",
    "posterior_kl_discrete",
]

LN2 = math.log(2.0)
TINY = 1e-300
CHUNK = 1 << 16


class EstimatorError(RuntimeError):
    pass


def xlog2x(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    mask = a > TINY
    out[mask] = a[mask] * np.log2(a[mask])
    return out


def _log2_or_zero(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > TINY
    out[mask] = np.log2(p[mask])
    return out


# ----------------------------------------------------------------------------
# prior


class PriorKind(enum.Enum):
    HAAR_PRODUCT = "haar-product"


@dataclass(frozen=True)
class PriorModel:
    """Independent uniform directions for every transmitted spin.

    For three directions the pairwise cosines have the joint density
    1 / (4 pi sqrt(det G)) on det G > 0 and each cosine is uniform on [-1, 1].
    For method B the three pair cosines are independent and uniform.
    """

    kind: PriorKind = PriorKind.HAAR_PRODUCT

    @staticmethod
    def density(x, y, z) -> np.ndarray:
        x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
        det = 1 + 2 * x * y * z - x * x - y * y - z * z
        out = np.zeros(np.broadcast(x, y, z).shape)
        mask = det > 0
        out[mask] = 1.0 / (4 * math.pi * np.sqrt(det[mask]))
        return out


def _haar_directions(rng: np.random.Generator, size: int, count: int) -> np.ndarray:
    v = rng.standard_normal((size, count, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def sample_prior(rng: np.random.Generator, size: int | None = None, scenario: Scenario | None = None):
    """Draw directions from the prior and return them with their cosines.

    With ``size=None`` returns ``(directions, (x, y, z))`` for one draw;
    otherwise arrays of shape (size, k, 3) and three arrays of shape (size,).
    ``scenario`` fixes the angle pairing (default: three-qubit method A).
    """
    scenario = scenario or Scenario.a_qubits()
    n = 1 if size is None else size
    count = 3 if scenario.is_method_a else 6
    dirs = _haar_directions(rng, n, count)
    cos = [np.einsum("ni,ni->n", dirs[:, a], dirs[:, b]) for a, b in scenario.pairing]
    if size is None:
        return tuple(dirs[0]), tuple(float(c[0]) for c in cos)
    return dirs, tuple(cos)


def _chebyshev_x_rule(nodes: int):
    k = np.arange(1, nodes + 1)
    t = np.cos((2 * k - 1) * math.pi / (2 * nodes))
    return t, np.full(nodes, math.pi / nodes)


def prior_normalization(nodes: int = 64) -> float:
    """Integral of :meth:`PriorModel.density` over the realizable region.

    Gauss-Legendre in (y, z) and Gauss-Chebyshev in x across its allowed
    interval [yz - s, yz + s], s = sqrt((1-y^2)(1-z^2)).
    """
    u, wu = leggauss(nodes)
    t, wt = _chebyshev_x_rule(nodes)
    Y, Z, T = np.meshgrid(u, u, t, indexing="ij")
    W = np.einsum("i,j,k->ijk", wu, wu, wt)
    s = np.sqrt((1 - Y**2) * (1 - Z**2))
    X = Y * Z + s * T
    # Chebyshev weight 1/sqrt(1-t^2) is divided back out of the integrand
    integrand = PriorModel.density(X, Y, Z) * s * np.sqrt(1 - T**2)
    return float((W * integrand).sum())


# ----------------------------------------------------------------------------
# configuration and reports


class Estimator(enum.Enum):
    MONTE_CARLO = "mc"
    QUADRATURE_1D = "quad1d"
    QUADRATURE_3D = "quad3d"


DEFAULT_SAMPLES = 2_000_000
DEFAULT_NODES = {Estimator.QUADRATURE_1D: 256, Estimator.QUADRATURE_3D: 96}


@dataclass(frozen=True)
class EstimatorConfig:
    method: Estimator = Estimator.MONTE_CARLO
    samples: int = DEFAULT_SAMPLES
    nodes: int | None = None
    seed: int = 0
    workers: int = 1
    fixed_order: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Estimator(self.method))
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.nodes is None:
            object.__setattr__(self, "nodes", DEFAULT_NODES.get(self.method, 96))
        if self.nodes < 8:
            raise ValueError("node counts must be >= 8")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def default_for(cls, scenario: Scenario, **kw) -> "EstimatorConfig":
        method = Estimator.MONTE_CARLO if scenario.is_method_a else Estimator.QUADRATURE_1D
        return cls(method=kw.pop("method", method), **kw)

    @property
    def budget(self) -> int:
        return self.samples if self.method is Estimator.MONTE_CARLO else self.nodes

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        # worker count cannot change fixed-order results, so it is not part of the record
        d.pop("workers")
        if self.method is Estimator.MONTE_CARLO:
            d.pop("nodes")
        else:
            for k in ("samples", "fixed_order"):
                d.pop(k)
        return d


@dataclass(frozen=True)
class InfoGainReport:
    scenario: Scenario
    labels: tuple[str, ...]
    P: np.ndarray
    P_stderr: np.ndarray
    I_lambda: np.ndarray
    I_lambda_stderr: np.ndarray
    I_avg: float
    I_avg_stderr: float
    estimator: EstimatorConfig
    extras: dict = field(default_factory=dict)

    @property
    def n_spins(self) -> int:
        return self.scenario.n_spins

    @property
    def i(self) -> float:
        """Average gain per transmitted spin."""
        return self.I_avg / self.n_spins

    @property
    def i_stderr(self) -> float:
        return self.I_avg_stderr / self.n_spins

    def P_of(self, label: str) -> float:
        return float(self.P[self.labels.index(label)])

    def I_of(self, label: str) -> float:
        return float(self.I_lambda[self.labels.index(label)])

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.name,
            "j": str(self.scenario.j),
            "n_spins": self.n_spins,
            "labels": list(self.labels),
            "P_lambda": [float(v) for v in self.P],
            "P_lambda_stderr": [float(v) for v in self.P_stderr],
            "I_lambda": [float(v) for v in self.I_lambda],
            "I_lambda_stderr": [float(v) for v in self.I_lambda_stderr],
            "I_avg": float(self.I_avg),
            "I_avg_stderr": float(self.I_avg_stderr),
            "i": float(self.i),
            "i_stderr": float(self.i_stderr),
            "estimator": self.estimator.to_dict(),
            **self.extras,
        }


def _check_finite(name: str, *arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise EstimatorError(f"non-finite value in {name}: {a}")


def _gains_from_moments(P: np.ndarray, A: np.ndarray):
    """Per-outcome and average gain from P_k = E[L_k] and A_k = E[L_k log2 L_k]."""
    I_lambda = np.zeros_like(P)
    mask = P > TINY
    I_lambda[mask] = A[mask] / P[mask] - np.log2(P[mask])
    I_avg = float(A.sum() - xlog2x(P).sum())
    return I_lambda, I_avg


# ----------------------------------------------------------------------------
# Monte Carlo


def _mc_chunk(scenario: Scenario, seed: int, index: int, size: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    _, (x, y, z) = sample_prior(rng, size, scenario)
    L = likelihood_arrays(scenario, x, y, z)
    v = np.vstack([L, xlog2x(L)])
    return v.sum(axis=1), v @ v.T


def _mc_moments(scenario: Scenario, cfg: EstimatorConfig):
    n_chunks, rest = divmod(cfg.samples, CHUNK)
    sizes = [CHUNK] * n_chunks + ([rest] if rest else [])
    jobs = list(enumerate(sizes))

    def run(job):
        idx, size = job
        return _mc_chunk(scenario, cfg.seed, idx, size)

    s1 = s2 = None
    if cfg.workers == 1:
        parts = map(run, jobs)
    elif cfg.fixed_order:
        pool = ThreadPoolExecutor(max_workers=cfg.workers)
        parts = pool.map(run, jobs)
    else:
        pool = ThreadPoolExecutor(max_workers=cfg.workers)
        parts = (f.result() for f in as_completed([pool.submit(run, job) for job in jobs]))
    try:
        for a, b in parts:
            s1 = a if s1 is None else s1 + a
            s2 = b if s2 is None else s2 + b
    finally:
        if cfg.workers > 1:
            pool.shutdown()
    return cfg.samples, s1, s2


def _mc_report(scenario: Scenario, cfg: EstimatorConfig) -> InfoGainReport:
    n, s1, s2 = _mc_moments(scenario, cfg)
    k = len(scenario.labels)
    mu = s1 / n
    cov = (s2 / n - np.outer(mu, mu)) * (n / max(n - 1, 1))
    cov_mean = cov / n
    P, A = mu[:k], mu[k:]
    I_lambda, I_avg = _gains_from_moments(P, A)

    # delta method on (P, A)
    P_err = np.sqrt(np.clip(np.diag(cov_mean)[:k], 0, None))
    I_err = np.zeros(k)
    for lam in range(k):
        if P[lam] <= TINY:
            continue
        g = np.zeros(2 * k)
        g[k + lam] = 1 / P[lam]
        g[lam] = -A[lam] / P[lam] ** 2 - 1 / (P[lam] * LN2)
        I_err[lam] = math.sqrt(max(0.0, g @ cov_mean @ g))
    g = np.concatenate([-(_log2_or_zero(P) + 1 / LN2), np.ones(k)])
    I_avg_err = math.sqrt(max(0.0, g @ cov_mean @ g))
    _check_finite("monte-carlo gains", P, I_lambda, [I_avg])
    return InfoGainReport(scenario, scenario.labels, P, P_err, I_lambda, I_err, I_avg, I_avg_err, cfg)


# ----------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class PairGain:
    j: HalfInteger
    I: float
    P: np.ndarray
    I_lambda: np.ndarray
    nodes: int
    error: float
    converged: bool


def _pair_gain_at(spin: HalfInteger, nodes: int):
    c, w = leggauss(nodes)
    w = w / 2
    lo = spin.value * (1 - c) / (spin.twice_j + 1)
    L = np.array([lo, 1 - lo])
    P = L @ w
    A = xlog2x(L) @ w
    I_lambda, I = _gains_from_moments(P, A)
    return I, P, I_lambda


def pair_info_gain(j, nodes: int = 256, tol: float = 1e-9, max_nodes: int = 16384) -> PairGain:
    """Gain of one (1/2, j) pair under a uniform relative-angle cosine.

    Nodes are doubled until successive results differ by at most ``tol``;
    ``converged`` is False when the last change exceeds 1e-7.
    """
    if nodes < 16:
        raise ValueError("pair_info_gain needs at least 16 nodes")
    spin = HalfInteger.of(j)
    prev = _pair_gain_at(spin, nodes)
    n = nodes * 2
    while True:
        cur = _pair_gain_at(spin, n)
        err = abs(cur[0] - prev[0])
        if err <= tol or n >= max_nodes:
            break
        prev, n = cur, n * 2
    _check_finite("pair gain", cur[1], cur[2], [cur[0]])
    return PairGain(spin, cur[0], cur[1], cur[2], n, err, err <= 1e-7)


def single_cosine_gain(likelihood_of_cos, nodes: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """(P_k, I_k) for outcomes whose likelihood depends on one uniform cosine.

    ``likelihood_of_cos`` maps a cosine array to an array (k, N).
    """
    c, w = leggauss(nodes)
    w = w / 2
    L = np.atleast_2d(likelihood_of_cos(c))
    P = L @ w
    I_lambda, _ = _gains_from_moments(P, xlog2x(L) @ w)
    return P, I_lambda


def _method_a_grid(scenario: Scenario, nodes: int):
    """Yield (weights, x, y, z) slabs of the method-A quadrature grid."""
    u, wu = leggauss(nodes)
    wu = wu / 2
    p, wp = leggauss(nodes)
    phi = math.pi * (p + 1) / 2
    wp = wp / 2
    U2, PHI = np.meshgrid(u, phi, indexing="ij")
    W2 = np.outer(wu, wp)
    slot = {pair: idx for idx, pair in enumerate(scenario.pairing)}
    for a in range(nodes):
        c_nr = np.full(U2.shape, u[a])
        c_mr = U2
        c_nm = c_nr * c_mr + np.sqrt((1 - c_nr**2) * (1 - c_mr**2)) * np.cos(PHI)
        cos = [None, None, None]
        cos[slot[(0, 2)]] = c_nr
        cos[slot[(1, 2)]] = c_mr
        cos[slot[(0, 1)]] = c_nm
        yield (wu[a] * W2).ravel(), cos[0].ravel(), cos[1].ravel(), cos[2].ravel()


def _method_b_grid(nodes: int):
    u, wu = leggauss(nodes)
    wu = wu / 2
    Y, Z = np.meshgrid(u, u, indexing="ij")
    W2 = np.outer(wu, wu)
    for a in range(nodes):
        yield (wu[a] * W2).ravel(), np.full(Y.size, u[a]), Y.ravel(), Z.ravel()


def _quad3d_moments(scenario: Scenario, nodes: int):
    grid = _method_a_grid(scenario, nodes) if scenario.is_method_a else _method_b_grid(nodes)
    P = A = 0.0
    for w, x, y, z in grid:
        L = likelihood_arrays(scenario, x, y, z)
        P = P + L @ w
        A = A + xlog2x(L) @ w
    return P, A


def _quad3d_report(scenario: Scenario, cfg: EstimatorConfig) -> InfoGainReport:
    P, A = _quad3d_moments(scenario, cfg.nodes)
    P_c, A_c = _quad3d_moments(scenario, max(8, cfg.nodes // 2))
    I_lambda, I_avg = _gains_from_moments(P, A)
    I_lambda_c, I_avg_c = _gains_from_moments(P_c, A_c)
    _check_finite("quadrature gains", P, I_lambda, [I_avg])
    extras = {"error_estimate": "difference to half the nodes per axis"}
    if not scenario.is_method_a:
        extras["additivity"] = _additivity(scenario, cfg, I_avg)
    return InfoGainReport(
        scenario,
        scenario.labels,
        P,
        np.abs(P - P_c),
        I_lambda,
        np.abs(I_lambda - I_lambda_c),
        I_avg,
        abs(I_avg - I_avg_c),
        cfg,
        extras,
    )


def _pair_gains(scenario: Scenario, nodes: int) -> list[PairGain]:
    cache: dict[HalfInteger, PairGain] = {}
    out = []
    for spin in scenario.pair_spins:
        if spin not in cache:
            cache[spin] = pair_info_gain(spin, max(16, nodes))
        out.append(cache[spin])
    return out


def _additivity(scenario: Scenario, cfg: EstimatorConfig, joint: float) -> dict:
    pairs = _pair_gains(scenario, DEFAULT_NODES[Estimator.QUADRATURE_1D])
    total = sum(p.I for p in pairs)
    return {
        "pair_gains": [p.I for p in pairs],
        "sum_of_pair_gains": total,
        "joint_I_avg": joint,
        "deviation": abs(joint - total),
    }


def _quad1d_report(scenario: Scenario, cfg: EstimatorConfig) -> InfoGainReport:
    if scenario.is_method_a:
        raise ValueError("quad1d applies to method-B scenarios only")
    pairs = _pair_gains(scenario, cfg.nodes)
    P = np.einsum("i,j,k->ijk", *(p.P for p in pairs)).ravel()
    I_lambda = (
        pairs[0].I_lambda[:, None, None] + pairs[1].I_lambda[None, :, None] + pairs[2].I_lambda[None, None, :]
    ).ravel()
    I_avg = sum(p.I for p in pairs)
    err = sum(p.error for p in pairs)
    extras = {
        "error_estimate": "node-doubling difference of the pair integrals",
        "converged": all(p.converged for p in pairs),
        "additivity": {
            "pair_gains": [p.I for p in pairs],
            "sum_of_pair_gains": I_avg,
            "pair_nodes": [p.nodes for p in pairs],
        },
    }
    return InfoGainReport(
        scenario, scenario.labels, P, np.zeros_like(P), I_lambda, np.full_like(P, err), I_avg, err, cfg, extras
    )


# ----------------------------------------------------------------------------
# public entry points


def info_gain(scenario: Scenario, estimator: EstimatorConfig | None = None) -> InfoGainReport:
    """Outcome marginals, per-outcome gains and the average gain of a scenario."""
    cfg = estimator or EstimatorConfig.default_for(scenario)
    if cfg.method is Estimator.MONTE_CARLO:
        return _mc_report(scenario, cfg)
    if cfg.method is Estimator.QUADRATURE_3D:
        return _quad3d_report(scenario, cfg)
    return _quad1d_report(scenario, cfg)


def outcome_probabilities(scenario: Scenario, estimator: EstimatorConfig | None = None):
    """Prior-averaged likelihoods and their standard error (or quadrature error)."""
    report = info_gain(scenario, estimator)
    return report.P, report.P_stderr


def posterior_kl_gain(scenario: Scenario, nodes: int = 48) -> tuple[np.ndarray, np.ndarray, float]:
    """Average gain evaluated from posterior densities on a cosine grid.

    Works on the prior density directly: for each outcome the posterior
    density q_k = L_k p / P_k is formed and KL(q_k || p) integrated with the
    (Gauss-Legendre, Gauss-Legendre, Gauss-Chebyshev) rule of
    :func:`prior_normalization`.  Method A only.
    """
    if not scenario.is_method_a:
        raise ValueError("posterior_kl_gain is for method-A scenarios")
    u, wu = leggauss(nodes)
    t, wt = _chebyshev_x_rule(nodes)
    Y, Z, T = np.meshgrid(u, u, t, indexing="ij")
    W = np.einsum("i,j,k->ijk", wu, wu, wt).ravel()
    s = np.sqrt((1 - Y**2) * (1 - Z**2))
    X = Y * Z + s * T
    jac = (s * np.sqrt(1 - T**2)).ravel()
    X, Y, Z = X.ravel(), Y.ravel(), Z.ravel()
    prior = PriorModel.density(X, Y, Z)
    dmu = W * jac  # integrates densities over dx dy dz
    # the density is symmetric in its arguments, so any pairing of (x, y, z) works
    L = likelihood_arrays(scenario, X, Y, Z)
    P = (L * prior) @ dmu
    kl = np.zeros(len(P))
    for k in range(len(P)):
        if P[k] <= TINY:
            continue
        post = L[k] * prior / P[k]
        ratio = np.zeros_like(post)
        mask = (post > TINY) & (prior > TINY)
        ratio[mask] = np.log2(post[mask] / prior[mask])
        kl[k] = (post * ratio) @ dmu
    return P, kl, float(P @ kl)


@dataclass(frozen=True)
class SweepRow:
    j: HalfInteger
    a: InfoGainReport
    b: InfoGainReport


def sweep_j(
    j_values: Sequence,
    estimator_a: EstimatorConfig | None = None,
    estimator_b: EstimatorConfig | None = None,
    on_row=None,
) -> list[SweepRow]:
    """Method A and method B reports for every spin value (the per-spin curves)."""
    est_a = estimator_a or EstimatorConfig()
    est_b = estimator_b or EstimatorConfig(method=Estimator.QUADRATURE_1D)
    rows = []
    for j in j_values:
        spin = HalfInteger.of(j)
        row = SweepRow(spin, info_gain(Scenario.a_spinj(spin), est_a), info_gain(Scenario.b_spinj(spin), est_b))
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


# ----------------------------------------------------------------------------
# discrete identity used by the tests and the verify suite


def mutual_information_discrete(prior: np.ndarray, likelihood: np.ndarray) -> float:
    """sum_w p(w) sum_k L(k|w) log2(L(k|w)/P(k)) for likelihood shape (k, w)."""
    prior = np.asarray(prior, dtype=float)
    L = np.asarray(likelihood, dtype=float)
    P = L @ prior
    ratio = np.zeros_like(L)
    mask = L > TINY
    ratio[mask] = np.log2((L / P[:, None])[mask])
    return float(((L * ratio) @ prior).sum())


def posterior_kl_discrete(prior: np.ndarray, likelihood: np.ndarray) -> float:
    """sum_k P(k) KL(p(.|k) || p) via explicit posteriors."""
    prior = np.asarray(prior, dtype=float)
    L = np.asarray(likelihood, dtype=float)
    P = L @ prior
    total = 0.0
    for k in range(len(P)):
        post = L[k] * prior / P[k]
        mask = post > TINY
        total += P[k] * float((post[mask] * np.log2(post[mask] / prior[mask])).sum())
    return total

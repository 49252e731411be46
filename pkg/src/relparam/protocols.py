"""Encoding scenarios and their outcome likelihoods.

Angle pairing
-------------
A :class:`CosineTriple` holds ``(x, y, z) = (cos alpha, cos beta, cos gamma)``.
Which direction pair each angle belongs to depends on the scenario and is
recorded in :attr:`Scenario.pairing` as index pairs into the direction tuple
``(n, m, r)``:

* ``A_QUBITS``: alpha = (n, m), beta = (m, r), gamma = (n, r)
* ``A_SPINJ``:  alpha = (n, m), beta = (n, r), gamma = (m, r); r is the spin-j axis
* ``B_*``: three disjoint pairs, one per angle

Method-B triples are not Gram-constrained because the three pairs share no
spins; any point of [-1, 1]^3 is valid there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .povm import (
    ProjectorSet,
    coupled_projectors,
    pair_projectors,
    three_qubit_projectors,
)
from .spin_algebra import (
    HalfInteger,
    as_direction,
    clebsch_gordan,
    coherent_state,
    qubit_state,
    rotation_matrix,
    tensor,
)

__all__ = [
    "CosineTriple",
    "Method",
    "Scenario",
    "OutcomeDistribution",
    "PreconditionError",
    "encode_state",
    "realize_directions",
    "likelihood_A_qubits",
    "likelihood_A_spinj",
    "likelihood_B_pair",
    "likelihood_B",
    "likelihood",
    "likelihood_from_directions",
    "likelihood_arrays",
    "pair_likelihood_arrays",
    "rotation_invariance_check",
]

GRAM_TOL = 1e-12
_HALF = HalfInteger(1)


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class CosineTriple:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not (-1.0 - GRAM_TOL <= v <= 1.0 + GRAM_TOL):
                raise PreconditionError(f"cos {name}={v!r} outside [-1, 1]")
            object.__setattr__(self, name, min(1.0, max(-1.0, v)))

    @property
    def gram_det(self) -> float:
        x, y, z = self.x, self.y, self.z
        return 1 + 2 * x * y * z - x * x - y * y - z * z

    def is_realizable(self) -> bool:
        return self.gram_det >= -GRAM_TOL

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


class Method(enum.Enum):
    A_QUBITS = "a-qubits"
    B_QUBITS = "b-qubits"
    A_SPINJ = "a-spinj"
    B_SPINJ = "b-spinj"


_PAIRINGS = {
    Method.A_QUBITS: ((0, 1), (1, 2), (0, 2)),
    Method.A_SPINJ: ((0, 1), (0, 2), (1, 2)),
}


@dataclass(frozen=True)
class Scenario:
    method: Method
    j: HalfInteger = _HALF

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        spin = HalfInteger.of(self.j)
        if self.method in (Method.A_QUBITS, Method.B_QUBITS):
            if spin != _HALF:
                raise ValueError(f"{self.method.value} is defined for j = 1/2 only")
        elif spin.twice_j < 1:
            raise ValueError("spin-j scenarios need j >= 1/2")
        object.__setattr__(self, "j", spin)

    @classmethod
    def a_qubits(cls):
        return cls(Method.A_QUBITS)

    @classmethod
    def b_qubits(cls):
        return cls(Method.B_QUBITS)

    @classmethod
    def a_spinj(cls, j):
        return cls(Method.A_SPINJ, HalfInteger.of(j))

    @classmethod
    def b_spinj(cls, j):
        return cls(Method.B_SPINJ, HalfInteger.of(j))

    @property
    def name(self) -> str:
        return self.method.value

    @property
    def is_method_a(self) -> bool:
        return self.method in (Method.A_QUBITS, Method.A_SPINJ)

    @property
    def n_spins(self) -> int:
        return 3 if self.is_method_a else 6

    @property
    def pair_spins(self) -> tuple[HalfInteger, HalfInteger, HalfInteger]:
        """Spin of the partner of the qubit in each method-B pair."""
        if self.method is Method.B_QUBITS:
            return (_HALF, _HALF, _HALF)
        if self.method is Method.B_SPINJ:
            return (_HALF, self.j, self.j)
        raise ValueError("pair_spins is only defined for method B")

    @property
    def pairing(self) -> tuple[tuple[int, int], ...]:
        if self.is_method_a:
            return _PAIRINGS[self.method]
        return ((0, 1), (2, 3), (4, 5))

    @property
    def labels(self) -> tuple[str, ...]:
        if self.method is Method.A_QUBITS:
            return ("1/2'", "3/2", "1/2")
        if self.method is Method.A_SPINJ:
            return ("j'", "j-1", "j", "j+1")
        return tuple(f"{a}{b}{c}" for a in (0, 1) for b in (0, 1) for c in (0, 1))

    def projectors(self) -> ProjectorSet:
        if self.method is Method.A_QUBITS:
            return three_qubit_projectors()
        if self.method is Method.A_SPINJ:
            return coupled_projectors(self.j)
        raise ValueError("method-B projectors are per pair; see pair_projectors()")

    def __str__(self):
        if self.method in (Method.A_SPINJ, Method.B_SPINJ):
            return f"{self.name}(j={self.j})"
        return self.name


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(self.labels),):
            raise ValueError("labels and probabilities differ in length")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError(f"probability out of range: {p}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(self.labels, self.probabilities)}


def _require_realizable(c: CosineTriple) -> None:
    if not c.is_realizable():
        raise PreconditionError(
            f"cosines {c.as_tuple()} correspond to no direction triple (det G = {c.gram_det:.3e})"
        )


def realize_directions(scenario: Scenario, c: CosineTriple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One direction triple (n, m, r) with the given cosines.

    Gauge: r = z, m in the x-z half-plane with non-negative x, n azimuth in [0, pi].
    """
    if not scenario.is_method_a:
        raise ValueError("realize_directions is for method-A scenarios")
    _require_realizable(c)
    cos = dict(zip(scenario.pairing, c.as_tuple()))
    c_nr, c_mr, c_nm = cos[(0, 2)], cos[(1, 2)], cos[(0, 1)]
    s_nr = math.sqrt(max(0.0, 1 - c_nr * c_nr))
    s_mr = math.sqrt(max(0.0, 1 - c_mr * c_mr))
    denom = s_nr * s_mr
    cos_phi = 1.0 if denom < 1e-15 else min(1.0, max(-1.0, (c_nm - c_nr * c_mr) / denom))
    phi = math.acos(cos_phi)
    r = np.array([0.0, 0.0, 1.0])
    m = np.array([s_mr, 0.0, c_mr])
    n = np.array([s_nr * math.cos(phi), s_nr * math.sin(phi), c_nr])
    return n / np.linalg.norm(n), m / np.linalg.norm(m), r


def encode_state(scenario: Scenario, directions) -> np.ndarray:
    """|n> (x) |m> (x) |r_j> for method A."""
    if not scenario.is_method_a:
        raise ValueError("method-B states are built per pair; use pair encoding")
    n, m, r = (as_direction(d) for d in directions)
    return tensor([qubit_state(n), qubit_state(m), coherent_state(scenario.j, r)])


def _pair_state(j, a, b) -> np.ndarray:
    return tensor([qubit_state(a), coherent_state(j, b)])


def likelihood_A_qubits(c: CosineTriple) -> OutcomeDistribution:
    """Closed form over labels (1/2', 3/2, 1/2); x pairs qubits 1-2."""
    _require_realizable(c)
    x, y, z = c.as_tuple()
    p = np.array([
        0.25 - 0.25 * x,
        0.5 + (x + y + z) / 6,
        0.25 + x / 12 - y / 6 - z / 6,
    ])
    return OutcomeDistribution(Scenario.a_qubits().labels, np.clip(p, 0.0, 1.0))


@lru_cache(maxsize=128)
def _spinj_cg_table(twice_j: int):
    """Amplitude map from qubit-pair components to coupled blocks.

    Returns, per outcome label, a list of rows ``(weights, )`` where each row is
    one final (K, J, M) state and ``weights[a, b]`` multiplies the component with
    qubit 1 in state a and qubit 2 in state b (0 = up, 1 = down); the spin-j
    particle sits in |j, j>.
    """
    spin = HalfInteger(twice_j)
    j = spin.value
    blocks = {"j'": (j - 0.5, j), "j-1": (j - 0.5, j - 1), "j": (j + 0.5, j), "j+1": (j + 0.5, j + 1)}
    table = {}
    for label, (k, big_j) in blocks.items():
        rows = []
        if big_j < 0 or k < 0:
            table[label] = np.zeros((0, 2, 2))
            continue
        for big_m in (j + 1, j, j - 1):
            w = np.zeros((2, 2))
            for a, m1 in enumerate((0.5, -0.5)):
                mk = m1 + j
                c1 = clebsch_gordan(0.5, m1, j, j, k, mk)
                if c1 == 0.0:
                    continue
                for b, m2 in enumerate((0.5, -0.5)):
                    w[a, b] = c1 * clebsch_gordan(k, mk, 0.5, m2, big_j, big_m)
            if np.any(w):
                rows.append(w)
        table[label] = np.array(rows) if rows else np.zeros((0, 2, 2))
    return table


def _spinj_cg_path(j: HalfInteger, n: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Likelihoods (4, N) for qubit directions n, m of shape (N, 3) with r = z."""
    a1 = np.stack(_qubit_amplitudes(n), axis=-1)  # (N, 2)
    a2 = np.stack(_qubit_amplitudes(m), axis=-1)
    prod = a1[:, :, None] * a2[:, None, :]  # (N, 2, 2)
    table = _spinj_cg_table(j.twice_j)
    out = []
    for label in ("j'", "j-1", "j", "j+1"):
        w = table[label]
        if len(w) == 0:
            out.append(np.zeros(len(n)))
            continue
        amps = np.einsum("kab,nab->nk", w, prod)
        out.append((np.abs(amps) ** 2).sum(axis=1))
    return np.array(out)


def _qubit_amplitudes(v: np.ndarray):
    theta = np.arccos(np.clip(v[:, 2], -1.0, 1.0))
    phi = np.arctan2(v[:, 1], v[:, 0])
    return np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)


def likelihood_A_spinj(j, c: CosineTriple, path: str = "state") -> OutcomeDistribution:
    """Outcome distribution over (j', j-1, j, j+1).

    ``path="state"`` builds |n>|m>|r_j> in a realizing gauge and evaluates every
    projector of :func:`coupled_projectors`; ``path="cg"`` expands the same
    product state with Clebsch-Gordan amplitudes only.
    """
    scenario = Scenario.a_spinj(j)
    n, m, r = realize_directions(scenario, c)
    if path == "state":
        p = scenario.projectors().probabilities(encode_state(scenario, (n, m, r)))
    elif path == "cg":
        p = _spinj_cg_path(scenario.j, n[None, :], m[None, :])[:, 0]
    else:
        raise ValueError(f"unknown path {path!r}")
    return OutcomeDistribution(scenario.labels, np.clip(p, 0.0, 1.0))


def _pair_lower(j: HalfInteger, cos_b):
    return j.value * (1 - np.asarray(cos_b)) / (j.twice_j + 1)


def likelihood_B_pair(j, cos_b: float) -> OutcomeDistribution:
    """Pair outcome distribution over (j-1/2, j+1/2)."""
    spin = HalfInteger.of(j)
    if not (-1.0 - GRAM_TOL <= cos_b <= 1.0 + GRAM_TOL):
        raise PreconditionError(f"cosine {cos_b!r} outside [-1, 1]")
    cos_b = min(1.0, max(-1.0, float(cos_b)))
    lo = float(_pair_lower(spin, cos_b))
    return OutcomeDistribution((str(spin.shift(-1)), str(spin.shift(1))), np.array([lo, 1.0 - lo]))


def likelihood_B(scenario: Scenario, c: CosineTriple) -> OutcomeDistribution:
    """Product of the three pair distributions, labels ``ijk`` with 0 = lower spin."""
    if scenario.is_method_a:
        raise ValueError("likelihood_B needs a method-B scenario")
    pairs = [likelihood_B_pair(s, v).probabilities for s, v in zip(scenario.pair_spins, c.as_tuple())]
    joint = np.einsum("i,j,k->ijk", *pairs).ravel()
    return OutcomeDistribution(scenario.labels, joint)


def likelihood(scenario: Scenario, c: CosineTriple) -> OutcomeDistribution:
    if scenario.method is Method.A_QUBITS:
        return likelihood_A_qubits(c)
    if scenario.method is Method.A_SPINJ:
        return likelihood_A_spinj(scenario.j, c)
    return likelihood_B(scenario, c)


def _cosines_from_directions(scenario: Scenario, directions) -> CosineTriple:
    dirs = [as_direction(d) for d in directions]
    return CosineTriple(*(float(np.dot(dirs[a], dirs[b])) for a, b in scenario.pairing))


def likelihood_from_directions(scenario: Scenario, directions) -> OutcomeDistribution:
    """Likelihood evaluated on explicit states, never through the cosines.

    Method A takes ``(n, m, r)``; method B takes six directions, one pair per angle.
    """
    if scenario.is_method_a:
        if len(directions) != 3:
            raise ValueError("method A takes three directions")
        pset = scenario.projectors()
        probs = pset.probabilities(encode_state(scenario, directions))
        order = [pset.labels.index(lbl) for lbl in scenario.labels]
        return OutcomeDistribution(scenario.labels, probs[order])
    if len(directions) != 6:
        raise ValueError("method B takes six directions")
    pairs = []
    for spin, (a, b) in zip(scenario.pair_spins, scenario.pairing):
        psi = _pair_state(spin, directions[a], directions[b])
        pairs.append(pair_projectors(spin).probabilities(psi))
    joint = np.einsum("i,j,k->ijk", *pairs).ravel()
    return OutcomeDistribution(scenario.labels, joint)


def likelihood_arrays(scenario: Scenario, x, y, z) -> np.ndarray:
    """Vectorised likelihoods, shape (n_outcomes, N), for cosine arrays.

    Method A uses the closed form (qubits) or the Clebsch-Gordan path (spin j)
    in the realizing gauge; method B uses the product of pair formulas.
    """
    x, y, z = (np.clip(np.asarray(v, dtype=float).ravel(), -1.0, 1.0) for v in (x, y, z))
    if scenario.method is Method.A_QUBITS:
        return np.clip(
            np.array([0.25 - 0.25 * x, 0.5 + (x + y + z) / 6, 0.25 + x / 12 - y / 6 - z / 6]),
            0.0,
            1.0,
        )
    if scenario.method is Method.A_SPINJ:
        # x = n.m, y = n.r, z = m.r
        s_n = np.sqrt(np.clip(1 - y * y, 0.0, None))
        s_m = np.sqrt(np.clip(1 - z * z, 0.0, None))
        denom = s_n * s_m
        safe = np.where(denom > 1e-15, denom, 1.0)
        cos_phi = np.where(denom > 1e-15, np.clip((x - y * z) / safe, -1.0, 1.0), 1.0)
        sin_phi = np.sqrt(1 - cos_phi**2)
        n = np.stack([s_n * cos_phi, s_n * sin_phi, y], axis=1)
        m = np.stack([s_m, np.zeros_like(z), z], axis=1)
        return np.clip(_spinj_cg_path(scenario.j, n, m), 0.0, 1.0)
    pairs = pair_likelihood_arrays(scenario, x, y, z)
    return np.einsum("in,jn,kn->ijkn", *pairs).reshape(8, -1)


def pair_likelihood_arrays(scenario: Scenario, x, y, z) -> list[np.ndarray]:
    """Per-pair likelihood arrays of shape (2, N) for a method-B scenario."""
    out = []
    for spin, v in zip(scenario.pair_spins, (x, y, z)):
        lo = _pair_lower(spin, np.clip(np.asarray(v, dtype=float).ravel(), -1.0, 1.0))
        out.append(np.array([lo, 1.0 - lo]))
    return out


def rotation_invariance_check(scenario: Scenario, directions: Sequence, axis, angle: float) -> float:
    """Max change of any likelihood component when every direction is rotated together."""
    rot = rotation_matrix(axis, angle)
    before = likelihood_from_directions(scenario, directions).probabilities
    rotated = [rot @ as_direction(d) for d in directions]
    rotated = [v / np.linalg.norm(v) for v in rotated]
    after = likelihood_from_directions(scenario, rotated).probabilities
    return float(np.abs(after - before).max())

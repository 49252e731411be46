"""Total-spin projector families.

Every family is built twice: once analytically (Pauli expansions, the
three-equation linear solve, or polynomials in J.J) and once by the
spectral oracle :func:`spectral_total_spin_projectors`, which diagonalises
the coupling operators directly.  The test-suite checks the two agree.

Coupling keys
-------------
Each projector carries a key ``(K, J)``: ``K`` is the spin of the designated
intermediate pair and ``J`` the total spin.  For two-spin families the key
is just ``(J,)``.  Empty subspaces (the ``j-1`` block at j = 1/2) carry the
key ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spin_algebra import PAULI, HalfInteger, spin_operators, tensor

__all__ = [
    "ProjectorSet",
    "AppendixSolution",
    "PAULI_DOT_BASIS_LABELS",
    "pauli_dot",
    "three_qubit_projectors",
    "coupled_projectors",
    "pair_projectors",
    "solve_appendix_system",
    "spectral_total_spin_projectors",
    "spin_dot",
    "total_spin_squared",
    "SINGLET",
]

ALGEBRA_TOL = 1e-10
CLUSTER_TOL = 1e-8

SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class ProjectorSet:
    labels: tuple[str, ...]
    projectors: tuple[np.ndarray, ...]
    keys: tuple = field(default=())

    def __post_init__(self):
        if len(self.labels) != len(self.projectors):
            raise ValueError("labels and projectors differ in length")
        dims = {p.shape for p in self.projectors}
        if len(dims) != 1:
            raise ValueError(f"projectors have mismatched shapes {dims}")
        if self.keys and len(self.keys) != len(self.labels):
            raise ValueError("keys and labels differ in length")
        for p in self.projectors:
            p.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label: str) -> np.ndarray:
        return self.projectors[self.labels.index(label)]

    def by_key(self) -> dict:
        return {k: p for k, p in zip(self.keys, self.projectors) if k is not None}

    def traces(self) -> tuple[int, ...]:
        return tuple(int(round(np.trace(p).real)) for p in self.projectors)

    def residuals(self) -> dict[str, float]:
        """Max-abs violations of completeness, orthogonality, idempotence,
        Hermiticity and integer trace."""
        eye = np.eye(self.dim)
        out = {
            "completeness": float(np.abs(sum(self.projectors) - eye).max()),
            "orthogonality": 0.0,
            "idempotence": 0.0,
            "hermiticity": 0.0,
            "trace": 0.0,
        }
        for a, pa in enumerate(self.projectors):
            out["idempotence"] = max(out["idempotence"], float(np.abs(pa @ pa - pa).max()))
            out["hermiticity"] = max(out["hermiticity"], float(np.abs(pa - pa.conj().T).max()))
            tr = np.trace(pa)
            out["trace"] = max(out["trace"], float(abs(tr - round(tr.real))))
            for pb in self.projectors[a + 1:]:
                out["orthogonality"] = max(out["orthogonality"], float(np.abs(pa @ pb).max()))
        return out

    def check(self, tol: float = ALGEBRA_TOL) -> None:
        bad = {k: v for k, v in self.residuals().items() if v > tol}
        if bad:
            raise AssertionError(f"projector set {self.labels} violates invariants: {bad}")

    def probabilities(self, state: np.ndarray) -> np.ndarray:
        """<psi|P_k|psi> for every projector, clamped to [0, 1]."""
        psi = np.asarray(state)
        p = np.array([np.vdot(psi, proj @ psi).real for proj in self.projectors])
        return np.clip(p, 0.0, 1.0)


def _embed(ops: dict[int, np.ndarray], dims: Sequence[int]) -> np.ndarray:
    return tensor([ops.get(k, np.eye(d)) for k, d in enumerate(dims)])


def spin_dot(spins: Sequence, a: int, b: int) -> np.ndarray:
    """J_a . J_b on the tensor product of the given spins."""
    spins = [HalfInteger.of(s) for s in spins]
    dims = [s.dim for s in spins]
    ja, jb = spin_operators(spins[a]), spin_operators(spins[b])
    return sum(_embed({a: ja[i], b: jb[i]}, dims) for i in range(3))


def pauli_dot(a: int, b: int, n: int = 3) -> np.ndarray:
    """sigma_a . sigma_b on ``n`` qubits (factors counted from 0)."""
    return sum(_embed({a: PAULI[i], b: PAULI[i]}, [2] * n) for i in range(3))


def total_spin_squared(spins: Sequence, factors: Sequence[int] | None = None) -> np.ndarray:
    """(sum J_k)^2 over the listed factors (all by default)."""
    spins = [HalfInteger.of(s) for s in spins]
    dims = [s.dim for s in spins]
    if factors is None:
        factors = range(len(spins))
    total = [np.zeros((math.prod(dims),) * 2, dtype=complex) for _ in range(3)]
    for k in factors:
        ops = spin_operators(spins[k])
        for i in range(3):
            total[i] = total[i] + _embed({k: ops[i]}, dims)
    return sum(t @ t for t in total)


PAULI_DOT_BASIS_LABELS = ("I", "s1.s2", "s2.s3", "s1.s3")


def _pauli_basis() -> list[np.ndarray]:
    return [np.eye(8, dtype=complex), pauli_dot(0, 1), pauli_dot(1, 2), pauli_dot(0, 2)]


_HALF = HalfInteger(1)
_THREE_HALVES = HalfInteger(3)
_ZERO = HalfInteger(0)
_ONE = HalfInteger(2)


def three_qubit_projectors() -> ProjectorSet:
    """Total-spin POVM of three qubits from its Pauli expansion.

    The primed doublet is the one whose qubits 1 and 2 form a singlet.
    """
    eye, s12, s23, s13 = _pauli_basis()
    p_primed = (eye - s12) / 4
    p_quartet = eye / 2 + (s12 + s23 + s13) / 6
    p_doublet = eye - p_quartet - p_primed
    return ProjectorSet(
        labels=("1/2'", "1/2", "3/2"),
        projectors=(p_primed, p_doublet, p_quartet),
        keys=((_ZERO, _HALF), (_ONE, _HALF), (_ONE, _THREE_HALVES)),
    )


@dataclass(frozen=True)
class AppendixSolution:
    """Result of the three-equation solve for the three-qubit POVM."""

    projectors: ProjectorSet
    coefficients: dict[str, tuple[float, float, float, float]]
    """Expansion coefficients in the basis (I, s1.s2, s2.s3, s1.s3)."""


def _basis_coefficients(op: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    gram = np.array([[np.vdot(a, b).real for b in basis] for a in basis])
    rhs = np.array([np.vdot(a, op).real for a in basis])
    coeffs = np.linalg.solve(gram, rhs)
    recon = sum(c * b for c, b in zip(coeffs, basis))
    if np.abs(recon - op).max() > 1e-10:
        raise ValueError("operator is not in the span of the Pauli-dot basis")
    return coeffs


def solve_appendix_system() -> AppendixSolution:
    """Recover the three-qubit projectors from three operator equations.

    Inputs are the singlet-branch projector |psi-><psi-| (x) I and the total
    J.J.  The unknowns are the coefficients of the remaining two projectors in
    the basis (I, s1.s2, s2.s3, s1.s3); the equations are completeness and
    the spectral expansion J.J = 3/4 P_{1/2'} + 3/4 P_{1/2} + 15/4 P_{3/2}.
    """
    basis = _pauli_basis()
    singlet_proj = np.outer(SINGLET, SINGLET.conj())
    p_primed = tensor([singlet_proj, np.eye(2)])
    jj = total_spin_squared([_HALF] * 3)

    c_primed = _basis_coefficients(p_primed, basis)
    c_jj = _basis_coefficients(jj, basis)
    c_eye = np.array([1.0, 0.0, 0.0, 0.0])

    eig_doublet = _HALF.casimir
    eig_quartet = _THREE_HALVES.casimir
    # rows: completeness, J.J expansion; columns: P_{1/2}, P_{3/2}
    system = np.array([[1.0, 1.0], [eig_doublet, eig_quartet]])
    if abs(np.linalg.det(system)) < 1e-12:
        raise np.linalg.LinAlgError("appendix system is singular")
    rhs = np.vstack([c_eye - c_primed, c_jj - eig_doublet * c_primed])
    c_doublet, c_quartet = np.linalg.solve(system, rhs)

    projectors = tuple(sum(c * b for c, b in zip(cs, basis)) for cs in (c_primed, c_doublet, c_quartet))
    pset = ProjectorSet(
        labels=("1/2'", "1/2", "3/2"),
        projectors=projectors,
        keys=((_ZERO, _HALF), (_ONE, _HALF), (_ONE, _THREE_HALVES)),
    )
    coefficients = {
        label: tuple(float(c) for c in cs)
        for label, cs in zip(pset.labels, (c_primed, c_doublet, c_quartet))
    }
    return AppendixSolution(projectors=pset, coefficients=coefficients)


def _lagrange_projector(op: np.ndarray, target: float, others: Sequence[float], dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for ev in others:
        out = out @ (op - ev * np.eye(dim)) / (target - ev)
    return out


def pair_projectors(j) -> ProjectorSet:
    """Total-spin POVM of a spin-1/2 (first factor) and a spin-j (second factor)."""
    spin = HalfInteger.of(j)
    if spin.twice_j < 1:
        raise ValueError("pair_projectors needs j >= 1/2")
    dim = 2 * spin.dim
    jx, jy, jz = spin_operators(spin)
    sigma_dot_j = sum(np.kron(s, op) for s, op in zip(PAULI, (jx, jy, jz)))
    lower = (spin.value * np.eye(dim) - sigma_dot_j) / (spin.twice_j + 1)
    upper = np.eye(dim) - lower
    lo, hi = spin.shift(-1), spin.shift(1)
    return ProjectorSet(labels=(str(lo), str(hi)), projectors=(lower, upper), keys=((lo,), (hi,)))


def coupled_projectors(j) -> ProjectorSet:
    """Four-outcome POVM on qubit (x) qubit (x) spin-j, labels (j', j-1, j, j+1).

    Qubit 1 is first coupled with the spin-j particle (intermediate spin
    K = j -/+ 1/2) and qubit 2 is then added.  ``j'`` is total spin j reached
    through K = j - 1/2, unprimed ``j`` is total spin j through K = j + 1/2.
    Each block is K-projector times a Lagrange polynomial in total J.J.
    For j = 1/2 the ``j-1`` block is the zero matrix.
    """
    spin = HalfInteger.of(j)
    if spin.twice_j < 1:
        raise ValueError("coupled_projectors needs j >= 1/2")
    spins = [_HALF, _HALF, spin]
    dim = 4 * spin.dim
    jval = spin.value

    jx, jy, jz = spin_operators(spin)
    sigma1_dot_j = sum(_embed({0: s, 2: op}, [2, 2, spin.dim]) for s, op in zip(PAULI, (jx, jy, jz)))
    k_lower = (jval * np.eye(dim) - sigma1_dot_j) / (spin.twice_j + 1)
    k_upper = np.eye(dim) - k_lower
    jj = total_spin_squared(spins)

    # K = j + 1/2 holds total J in {j, j+1}; K = j - 1/2 holds {j-1, j}
    cas_j, cas_jp1 = spin.casimir, spin.shift(2).casimir
    p_j = k_upper @ _lagrange_projector(jj, cas_j, [cas_jp1], dim)
    p_jp1 = k_upper @ _lagrange_projector(jj, cas_jp1, [cas_j], dim)
    if spin.twice_j >= 2:
        cas_jm1 = spin.shift(-2).casimir
        p_jprime = k_lower @ _lagrange_projector(jj, cas_j, [cas_jm1], dim)
        p_jm1 = k_lower @ _lagrange_projector(jj, cas_jm1, [cas_j], dim)
        key_jm1 = (spin.shift(-1), spin.shift(-2))
    else:
        p_jprime = k_lower
        p_jm1 = np.zeros((dim, dim), dtype=complex)
        key_jm1 = None

    return ProjectorSet(
        labels=("j'", "j-1", "j", "j+1"),
        projectors=(p_jprime, p_jm1, p_j, p_jp1),
        keys=(
            (spin.shift(-1), spin),
            key_jm1,
            (spin.shift(1), spin),
            (spin.shift(1), spin.shift(2)),
        ),
    )


def _casimir_to_spin(value: float, tol: float) -> HalfInteger:
    twice = -1 + math.sqrt(max(0.0, 1 + 4 * value))
    cand = HalfInteger(int(round(twice)))
    if abs(cand.casimir - value) > tol:
        raise ValueError(f"eigenvalue {value!r} is not J(J+1) for any half-integer J")
    return cand


def _eigen_clusters(op: np.ndarray, tol: float):
    vals, vecs = np.linalg.eigh(op)
    groups: list[list[int]] = []
    for idx in range(len(vals)):
        if groups and abs(vals[idx] - vals[groups[-1][0]]) <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    for g in groups:
        yield float(np.mean(vals[g])), vecs[:, g]


def spectral_total_spin_projectors(
    spins: Sequence,
    intermediate: tuple[int, int] | None = (0, 1),
    tol: float = CLUSTER_TOL,
) -> ProjectorSet:
    """Projectors onto joint eigenspaces of (J_K.J_K, J_total.J_total).

    ``intermediate`` names the pair of factors whose coupled spin K splits
    degenerate total-spin values; it is ignored for two spins.  Labels are
    ``"K,J"`` (or ``"J"`` for pairs) and keys are HalfInteger tuples.
    Raises ValueError when an eigenvalue cluster is not J(J+1) for a
    half-integer J within ``tol``.
    """
    spins = [HalfInteger.of(s) for s in spins]
    if len(spins) not in (2, 3):
        raise ValueError("spectral oracle supports two or three spins")
    jj = total_spin_squared(spins)
    dim = jj.shape[0]
    results: list[tuple[tuple, np.ndarray]] = []
    if len(spins) == 2 or intermediate is None:
        for val, vecs in _eigen_clusters(jj, tol):
            results.append(((_casimir_to_spin(val, tol),), vecs @ vecs.conj().T))
    else:
        kk = total_spin_squared(spins, intermediate)
        for kval, kvecs in _eigen_clusters(kk, tol):
            kspin = _casimir_to_spin(kval, tol)
            restricted = kvecs.conj().T @ jj @ kvecs
            for val, sub in _eigen_clusters(restricted, tol):
                full = kvecs @ sub
                results.append(((kspin, _casimir_to_spin(val, tol)), full @ full.conj().T))
    results.sort(key=lambda item: tuple(h.twice_j for h in item[0]))
    if sum(int(round(np.trace(p).real)) for _, p in results) != dim:
        raise AssertionError("spectral projectors do not cover the space")
    labels = tuple(",".join(str(h) for h in key) for key, _ in results)
    return ProjectorSet(
        labels=labels,
        projectors=tuple(p for _, p in results),
        keys=tuple(key for key, _ in results),
    )

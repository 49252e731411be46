"""Invariant suites run by ``relparam verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .povm import (
    coupled_projectors,
    pair_projectors,
    solve_appendix_system,
    spectral_total_spin_projectors,
    three_qubit_projectors,
)
from .protocols import (
    CosineTriple,
    Scenario,
    likelihood_A_qubits,
    likelihood_A_spinj,
    likelihood_from_directions,
    rotation_invariance_check,
)
from .spin_algebra import (
    HalfInteger,
    clebsch_gordan,
    coherent_state,
    collective_rotation,
    direction,
    rotation_matrix,
    rotation_operator,
    spin_operators,
)

J_VALUES = ("1/2", "1", "3/2", "2", "5", "10", "25")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, value: float, tol: float) -> Check:
    return Check(name, bool(value <= tol), f"{value:.3e} (tol {tol:.0e})")


def _random_axis(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def suite_projector_algebra() -> list[Check]:
    out = []
    sets = [("three-qubit", three_qubit_projectors()), ("appendix", solve_appendix_system().projectors)]
    for j in J_VALUES:
        sets.append((f"coupled j={j}", coupled_projectors(j)))
        sets.append((f"pair j={j}", pair_projectors(j)))
    for name, pset in sets:
        worst = max(pset.residuals().values())
        out.append(_check(f"{name} invariants", worst, 1e-10))
    return out


def suite_spectral_equivalence() -> list[Check]:
    out = []
    pairs = [("three-qubit", three_qubit_projectors(), spectral_total_spin_projectors(["1/2"] * 3, (0, 1)))]
    for j in J_VALUES:
        pairs.append((f"coupled j={j}", coupled_projectors(j), spectral_total_spin_projectors(["1/2", "1/2", j], (0, 2))))
        pairs.append((f"pair j={j}", pair_projectors(j), spectral_total_spin_projectors(["1/2", j])))
    for name, analytic, oracle in pairs:
        ref = oracle.by_key()
        keyed = analytic.by_key()
        if set(keyed) != set(ref):
            out.append(Check(f"{name} labels", False, f"{sorted(map(str, keyed))} vs {sorted(map(str, ref))}"))
            continue
        dev = max(float(np.abs(p - ref[k]).max()) for k, p in keyed.items())
        out.append(_check(f"{name} vs spectral", dev, 1e-10))
    return out


def suite_appendix() -> list[Check]:
    sol = solve_appendix_system()
    expected = {"1/2'": (0.25, -0.25, 0.0, 0.0), "3/2": (0.5, 1 / 6, 1 / 6, 1 / 6)}
    out = []
    for label, coeffs in expected.items():
        dev = max(abs(a - b) for a, b in zip(sol.coefficients[label], coeffs))
        out.append(_check(f"coefficients of {label}", dev, 1e-12))
    dev = max(float(np.abs(a - b).max()) for a, b in zip(sol.projectors.projectors, three_qubit_projectors().projectors))
    out.append(_check("solved set equals Pauli expansion", dev, 1e-12))
    return out


def suite_clebsch_gordan() -> list[Check]:
    out = []
    for j1, j2 in [(0.5, 0.5), (0.5, 3.5), (1, 1), (2.5, 1.5), (1, 6)]:
        worst = 0.0
        for twice_m in range(-int(2 * (j1 + j2)), int(2 * (j1 + j2)) + 1, 2):
            M = twice_m / 2
            m1s = [m for m in np.arange(-j1, j1 + 0.5) if abs(M - m) <= j2]
            Js = np.arange(abs(j1 - j2), j1 + j2 + 0.5)
            mat = np.array([[clebsch_gordan(j1, m1, j2, M - m1, J, M) for J in Js] for m1 in m1s])
            if mat.size:
                worst = max(worst, float(np.abs(mat @ mat.T - np.eye(len(m1s))).max()))
        out.append(_check(f"unitarity j1={j1} j2={j2}", worst, 1e-12))
    dev = abs(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) - 1 / math.sqrt(2))
    dev = max(dev, abs(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) + 1 / math.sqrt(2)))
    out.append(_check("singlet coefficients", dev, 1e-15))
    return out


def suite_rotation_invariance(trials: int = 100, seed: int = 11) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    scenarios = [Scenario.a_qubits(), Scenario.a_spinj(3), Scenario.b_qubits(), Scenario.b_spinj(2)]
    for sc in scenarios:
        worst = 0.0
        for _ in range(trials):
            count = 3 if sc.is_method_a else 6
            dirs = [_random_axis(rng) for _ in range(count)]
            worst = max(worst, rotation_invariance_check(sc, dirs, _random_axis(rng), rng.uniform(0, 2 * np.pi)))
        out.append(_check(f"likelihoods of {sc}", worst, 1e-10))
    for j in ("1/2", "2", "5"):
        pset = coupled_projectors(j)
        worst = 0.0
        for _ in range(5):
            rot = collective_rotation(_random_axis(rng), rng.uniform(0, 2 * np.pi), ["1/2", "1/2", j])
            worst = max(worst, max(float(np.abs(rot @ p - p @ rot).max()) for p in pset.projectors))
        out.append(_check(f"projectors commute with rotations j={j}", worst, 1e-10))
    return out


def suite_oracle_equivalence(samples: int = 1000, seed: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    sc = Scenario.a_qubits()
    for _ in range(samples):
        dirs = [_random_axis(rng) for _ in range(3)]
        c = CosineTriple(dirs[0] @ dirs[1], dirs[1] @ dirs[2], dirs[0] @ dirs[2])
        worst = max(worst, float(np.abs(likelihood_A_qubits(c).probabilities - likelihood_from_directions(sc, dirs).probabilities).max()))
    out.append(_check("three-qubit closed form vs states", worst, 1e-10))
    for j in ("1", "5/2", "10"):
        worst = 0.0
        for _ in range(50):
            d = [_random_axis(rng) for _ in range(3)]
            c = CosineTriple(d[0] @ d[1], d[0] @ d[2], d[1] @ d[2])
            a = likelihood_A_spinj(j, c, "state").probabilities
            b = likelihood_A_spinj(j, c, "cg").probabilities
            worst = max(worst, float(np.abs(a - b).max()))
        out.append(_check(f"spin-j state vs Clebsch-Gordan path j={j}", worst, 1e-10))
    worst = 0.0
    for _ in range(200):
        d = [_random_axis(rng) for _ in range(3)]
        c = CosineTriple(d[0] @ d[1], d[0] @ d[2], d[1] @ d[2])
        spinj = likelihood_A_spinj("1/2", c)
        # at j = 1/2 qubit 1 pairs with the third spin, so alpha and beta trade places
        qub = likelihood_A_qubits(CosineTriple(c.y, c.z, c.x))
        mapped = np.array([qub["1/2'"], 0.0, qub["1/2"], qub["3/2"]])
        worst = max(worst, float(np.abs(spinj.probabilities - mapped).max()))
    out.append(_check("spin-j reduction at j=1/2", worst, 1e-10))
    return out


def suite_coherent_states(seed: int = 3) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for twice_j in range(1, 7):
        worst = 0.0
        j = HalfInteger(twice_j)
        up = coherent_state(j, [0, 0, 1])
        jx, jy, jz = spin_operators(j)
        for _ in range(20):
            theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
            n = direction(theta, phi)
            psi = coherent_state(j, n)
            overlap = abs(np.vdot(up, psi)) ** 2
            worst = max(worst, abs(overlap - ((1 + math.cos(theta)) / 2) ** twice_j))
            op = n[0] * jx + n[1] * jy + n[2] * jz
            worst = max(worst, float(np.abs(op @ psi - j.value * psi).max()))
            axis = _random_axis(rng)
            angle = rng.uniform(0, 2 * np.pi)
            rotated = coherent_state(j, rotation_matrix(axis, angle) @ n)
            moved = rotation_operator(j, axis, angle) @ psi
            worst = max(worst, float(np.abs(np.outer(rotated, rotated.conj()) - np.outer(moved, moved.conj())).max()))
        out.append(_check(f"coherent states j={j}", worst, 1e-10))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "projector-algebra": suite_projector_algebra,
    "spectral-equivalence": suite_spectral_equivalence,
    "appendix-system": suite_appendix,
    "clebsch-gordan": suite_clebsch_gordan,
    "rotation-invariance": suite_rotation_invariance,
    "oracle-equivalence": suite_oracle_equivalence,
    "coherent-states": suite_coherent_states,
}


def run_all() -> dict[str, list[Check]]:
    results = {}
    for name, fn in SUITES.items():
        try:
            results[name] = fn()
        except Exception as exc:  # a crashing suite is a failed suite
            results[name] = [Check(name, False, f"{type(exc).__name__}: {exc}")]
    return results

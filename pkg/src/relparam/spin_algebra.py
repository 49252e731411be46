"""Angular-momentum algebra on dense matrices.

States are 1-D complex numpy arrays and operators are 2-D complex arrays.
Every spin-j factor uses the basis |j, m> with m running from j down to -j,
so index 0 is always the stretched state |j, j>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

__all__ = [
    "HalfInteger",
    "half",
    "as_direction",
    "direction",
    "spin_operators",
    "coherent_state",
    "qubit_state",
    "clebsch_gordan",
    "tensor",
    "rotation_matrix",
    "rotation_operator",
    "collective_rotation",
    "PAULI",
]

_UNIT_TOL = 1e-12


@dataclass(frozen=True, order=True)
class HalfInteger:
    """Non-negative spin quantum number stored as ``2j`` so dimensions are exact."""

    twice_j: int

    def __post_init__(self):
        if not isinstance(self.twice_j, (int, np.integer)) or isinstance(self.twice_j, bool):
            raise TypeError(f"twice_j must be an integer, got {self.twice_j!r}")
        if self.twice_j < 0:
            raise ValueError(f"spin must be non-negative, got twice_j={self.twice_j}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @classmethod
    def of(cls, value) -> "HalfInteger":
        """Build from a number, a Fraction, another HalfInteger, or a string
        such as ``"3/2"`` or ``"1.5"``.  Anything that is not an exact
        multiple of 1/2 is rejected."""
        if isinstance(value, HalfInteger):
            return value
        if isinstance(value, str):
            text = value.strip()
            try:
                frac = Fraction(text)
            except ValueError as exc:
                raise ValueError(f"not a half-integer: {value!r}") from exc
        elif isinstance(value, (int, np.integer)):
            frac = Fraction(int(value))
        elif isinstance(value, Fraction):
            frac = value
        else:
            x = float(value)
            if not math.isfinite(x) or abs(2 * x - round(2 * x)) > 1e-9:
                raise ValueError(f"not a half-integer: {value!r}")
            frac = Fraction(round(2 * x), 2)
        twice = 2 * frac
        if twice.denominator != 1:
            raise ValueError(f"not a half-integer: {value!r}")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_j / 2

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def casimir(self) -> float:
        """j(j+1)"""
        return self.twice_j * (self.twice_j + 2) / 4

    def shift(self, twice_delta: int) -> "HalfInteger":
        """Return j + twice_delta/2.  Raises ValueError when the result is negative."""
        return HalfInteger(self.twice_j + twice_delta)

    def __add__(self, other):
        return HalfInteger(self.twice_j + HalfInteger.of(other).twice_j)

    def __float__(self):
        return self.value

    def __str__(self):
        if self.twice_j % 2 == 0:
            return str(self.twice_j // 2)
        return f"{self.twice_j}/2"


def half(value) -> HalfInteger:
    """Shorthand for :meth:`HalfInteger.of`."""
    return HalfInteger.of(value)


def as_direction(vec) -> np.ndarray:
    """Validate a unit 3-vector and return it as a float array."""
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"direction is not a unit vector (norm={norm!r})")
    return v


def direction(theta: float, phi: float = 0.0) -> np.ndarray:
    """Unit vector with polar angle ``theta`` and azimuth ``phi`` (radians)."""
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


@lru_cache(maxsize=256)
def _spin_operators_cached(twice_j: int):
    dim = twice_j + 1
    m = (twice_j - 2 * np.arange(dim)) / 2
    j = twice_j / 2
    jz = np.diag(m).astype(complex)
    # <j, m+1| J+ |j, m> sits one row above the diagonal in descending-m order.
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    for op in (jx, jy, jz):
        op.setflags(write=False)
    return jx, jy, jz


def spin_operators(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Jx, Jy, Jz) for spin ``j``.

    The arrays are cached and read-only; copy before mutating.
    """
    return _spin_operators_cached(HalfInteger.of(j).twice_j)


PAULI = tuple(2 * op for op in spin_operators(HalfInteger(1)))
for _op in PAULI:
    _op.setflags(write=False)


def coherent_state(j, dir) -> np.ndarray:
    """Spin coherent state along ``dir``: the eigenvector of J.dir with eigenvalue j.

    Amplitudes follow the closed form
    ``sqrt(C(2j, j-m)) cos^{j+m}(theta/2) sin^{j-m}(theta/2) exp(i (j-m) phi)``,
    which makes the |j, j> amplitude real and non-negative.  For dir = -z that
    amplitude vanishes and the state is |j, -j> with a real positive amplitude.
    """
    spin = HalfInteger.of(j)
    n = as_direction(dir)
    theta = math.acos(min(1.0, max(-1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    two_j = spin.twice_j
    k = np.arange(two_j + 1)  # k = j - m
    log_binom = np.array(
        [math.lgamma(two_j + 1) - math.lgamma(i + 1) - math.lgamma(two_j - i + 1) for i in k]
    )
    mag = np.exp(0.5 * log_binom) * np.power(c, two_j - k) * np.power(s, k)
    return mag * np.exp(1j * k * phi)


def qubit_state(dir) -> np.ndarray:
    """Eigenvector of sigma.dir with eigenvalue +1."""
    return coherent_state(HalfInteger(1), dir)


def _twice(x) -> int:
    if isinstance(x, HalfInteger):
        return x.twice_j
    t = 2 * Fraction(x) if isinstance(x, (int, Fraction)) else 2 * float(x)
    r = round(t)
    if abs(t - r) > 1e-9:
        raise ValueError(f"not a multiple of 1/2: {x!r}")
    return int(r)


def _logfact(n2: int) -> float:
    """log((n2/2)!) for an even, non-negative n2."""
    return math.lgamma(n2 // 2 + 1)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley coefficient <j1 m1; j2 m2 | J M>.

    Evaluated with Racah's single-sum formula in log-factorial form.  Returns 0
    for a violated triangle rule, an out-of-range projection, M != m1 + m2, or
    an integer/half-integer parity mismatch.  Arguments may be HalfInteger,
    int, Fraction or float (multiples of 1/2); projections may be negative.
    """
    a, am, b, bm, c, cm = (_twice(v) for v in (j1, m1, j2, m2, J, M))
    if min(a, b, c) < 0:
        return 0.0
    if am + bm != cm:
        return 0.0
    if abs(am) > a or abs(bm) > b or abs(cm) > c:
        return 0.0
    if (a + am) % 2 or (b + bm) % 2 or (c + cm) % 2:
        return 0.0
    if c < abs(a - b) or c > a + b or (a + b + c) % 2:
        return 0.0

    log_delta = (
        _logfact(a + b - c)
        + _logfact(a - b + c)
        + _logfact(-a + b + c)
        - _logfact(a + b + c + 2)
    )
    log_pref = 0.5 * (
        math.log(c + 1)
        + log_delta
        + _logfact(a + am)
        + _logfact(a - am)
        + _logfact(b + bm)
        + _logfact(b - bm)
        + _logfact(c + cm)
        + _logfact(c - cm)
    )
    # all bounds below are in units of 1 (not 1/2)
    k_min = max(0, (b - c - am) // 2, (a - c + bm) // 2)
    k_max = min((a + b - c) // 2, (a - am) // 2, (b + bm) // 2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        log_term = (
            math.lgamma(k + 1)
            + _logfact(a + b - c - 2 * k)
            + _logfact(a - am - 2 * k)
            + _logfact(b + bm - 2 * k)
            + _logfact(c - b + am + 2 * k)
            + _logfact(c - a - bm + 2 * k)
        )
        sign = -1.0 if k % 2 else 1.0
        total += sign * math.exp(log_pref - log_term)
    return total


def tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of states or of operators, left to right."""
    factors = [np.asarray(f) for f in factors]
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    ndims = {f.ndim for f in factors}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise ValueError("tensor() factors must be all vectors or all matrices")
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """SO(3) matrix for a right-handed rotation by ``angle`` about ``axis``."""
    k = as_direction(axis)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)


def rotation_operator(j, axis, angle: float) -> np.ndarray:
    """exp(-i angle J.axis) on a single spin-j factor."""
    k = as_direction(axis)
    jx, jy, jz = spin_operators(j)
    return expm(-1j * angle * (k[0] * jx + k[1] * jy + k[2] * jz))


def collective_rotation(axis, angle: float, spins: Sequence) -> np.ndarray:
    """The same rotation applied to every factor of a multi-spin system."""
    if len(spins) == 0:
        raise ValueError("collective_rotation() needs at least one spin")
    return tensor([rotation_operator(s, axis, angle) for s in spins])

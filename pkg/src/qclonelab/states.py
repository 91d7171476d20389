"""Constructors for qubit bases, singlets, overlap-prescribed kets, and Gram matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Ket, SubsystemSignature, inner, signature
from .tolerances import ASSERT_TOL


@dataclass(frozen=True)
class BasisPair:
    """Orthonormal qubit pair {primary, complement} at Bloch angles (theta, phi).

    primary    = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    complement = -e^{-i phi} sin(theta/2)|0> + cos(theta/2)|1>

    The complement phase is fixed so that the singlet built from any pair has
    bit-identical amplitudes; state equality elsewhere is always up to global
    phase (compare |inner| = 1, never amplitudes).
    """

    theta: float
    phi: float
    primary: Ket
    complement: Ket

    def __post_init__(self):
        if abs(inner(self.primary, self.complement)) > 1e-12:
            raise ValueError("basis pair is not orthogonal")


def qubit_basis(theta: float, phi: float = 0.0, label: str = "q") -> BasisPair:
    """Orthonormal qubit basis pair from Bloch angles."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    if not 0.0 <= phi < 2.0 * math.pi:
        raise ValueError(f"phi must lie in [0, 2*pi), got {phi!r}")
    sig = signature((label, 2))
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    w = complex(math.cos(phi), math.sin(phi))
    primary = Ket(sig, np.array([c, w * s], dtype=complex))
    complement = Ket(sig, np.array([-np.conj(w) * s, c], dtype=complex))
    return BasisPair(float(theta), float(phi), primary, complement)


def singlet(basis: BasisPair, labels: tuple[str, str]) -> Ket:
    """(|psi psibar> - |psibar psi>)/sqrt(2) over the two labels."""
    l0, l1 = labels
    if l0 == l1:
        raise ValueError(f"duplicate subsystem label {l0!r}")
    p = basis.primary.amplitudes
    q = basis.complement.amplitudes
    amp = (np.kron(p, q) - np.kron(q, p)) / math.sqrt(2.0)
    return Ket(signature((l0, 2), (l1, 2)), amp)


@dataclass(frozen=True)
class StateFamily:
    """Ordered list of normalized kets over one shared signature."""

    members: tuple[Ket, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("state family must not be empty")
        sig = members[0].signature
        for k in members:
            if k.signature != sig:
                raise ValueError("all family members must share one signature")
            k.require_normalized()

    @property
    def signature(self) -> SubsystemSignature:
        return self.members[0].signature

    def __len__(self) -> int:
        return len(self.members)


def gram(family: StateFamily) -> np.ndarray:
    """Matrix of pairwise inner products G[i][j] = <member_i|member_j>."""
    stack = np.stack([k.amplitudes for k in family.members])
    return stack.conj() @ stack.T


def has_orthogonal_pair(family: StateFamily, tol: float = ASSERT_TOL) -> bool:
    g = gram(family)
    n = len(family)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(g[i, j]) < tol:
                return True
    return False


def kets_with_overlap(
    target: complex, dimension: int, label: str = "r"
) -> tuple[Ket, Ket]:
    """Deterministic pair of normalized kets with <first|second> = target.

    first = e0, second = target*e0 + sqrt(1-|target|^2)*e1.
    """
    target = complex(target)
    if abs(target) > 1.0 + 1e-12:
        raise ValueError(f"overlap modulus {abs(target)!r} exceeds 1")
    if dimension < 2:
        raise ValueError("need dimension >= 2 to realize an arbitrary overlap")
    sig = signature((label, dimension))
    first = np.zeros(dimension, dtype=complex)
    first[0] = 1.0
    second = np.zeros(dimension, dtype=complex)
    second[0] = target
    second[1] = math.sqrt(max(1.0 - abs(target) ** 2, 0.0))
    return Ket(sig, first), Ket(sig, second)

"""Entanglement bookkeeping for the strong cloner acting on one share.

Alice holds one qubit of an entangled state whose Bob-side branches carry a
source state and a supplementary register with prescribed overlaps (a, b).
Bob runs the strong cloner branch by branch (its declared rules tag the two
branches exactly).  Alice's reduced state before and after has closed-form
leading eigenvalues 1/2 + |a||b|/2 and 1/2 + |a|^2|c|/2; any physical
(isometric) machine would leave her state untouched, so a change in these
monotones certifies that no isometry realizes the declared rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    Ket,
    density_of,
    eig_hermitian,
    entropy,
    inner,
    partial_trace,
    signature,
)
from .machines import LinearMachine, MachineSpec, isometry_matrix_from_pairs, preset_strong_cloner
from .states import StateFamily, gram, kets_with_overlap
from .tolerances import ASSERT_TOL, RESIDUAL_TOL

ALICE_LABEL = "A"
BOB_LABELS = ("bp", "br")


class GramMismatch(ValueError):
    """The two families' Gram matrices differ; no unitary can relate them."""

    def __init__(self, max_deviation: float):
        super().__init__(f"Gram matrices differ by {max_deviation:g}")
        self.max_deviation = max_deviation


@dataclass(frozen=True)
class ConservationScenario:
    """Shared state sqrt(w)|0>|psi_i>|alpha_i> + sqrt(1-w)|1>|psi_j>|alpha_j>."""

    a: complex
    b: complex
    c: complex
    alice_label: str
    bob_labels: tuple[str, str]
    shared: Ket
    machine: MachineSpec
    branch_weight: float
    ancilla_dim: int


@dataclass(frozen=True)
class EntanglementDelta:
    delta_lambda: float
    delta_entropy: float


def build_conservation(
    a: complex,
    b: complex,
    c: complex,
    ancilla_dim: int = 4,
    branch_weight: float = 0.5,
) -> ConservationScenario:
    """Realize overlaps (a, b, c) with deterministic kets and attach the cloner.

    ``branch_weight`` generalizes the equal-amplitude shared state; the
    closed-form eigenvalue helpers take the same parameter.
    """
    for name, z in (("a", a), ("b", b), ("c", c)):
        if abs(complex(z)) > 1.0 + 1e-12:
            raise ValueError(f"overlap {name} has modulus {abs(complex(z))!r} > 1")
    if not 0.0 <= branch_weight <= 1.0:
        raise ValueError(f"branch weight must lie in [0, 1], got {branch_weight!r}")
    psi_pair = kets_with_overlap(a, 2, label=BOB_LABELS[0])
    alpha_pair = kets_with_overlap(b, 2, label=BOB_LABELS[1])
    anc_pair = kets_with_overlap(c, 2 * ancilla_dim, label="env")
    machine = preset_strong_cloner(psi_pair, alpha_pair, anc_pair, ancilla_dim)

    p = math.sqrt(branch_weight)
    q = math.sqrt(1.0 - branch_weight)
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    amp = p * np.kron(e0, np.kron(psi_pair[0].amplitudes, alpha_pair[0].amplitudes))
    amp += q * np.kron(e1, np.kron(psi_pair[1].amplitudes, alpha_pair[1].amplitudes))
    shared = Ket(
        signature((ALICE_LABEL, 2), (BOB_LABELS[0], 2), (BOB_LABELS[1], 2)), amp
    )

    for want, got in ((a, inner(*psi_pair)), (b, inner(*alpha_pair)), (c, inner(*anc_pair))):
        if abs(complex(want) - got) > RESIDUAL_TOL:
            raise ArithmeticError(f"realized overlap {got!r} misses requested {want!r}")
    return ConservationScenario(
        complex(a), complex(b), complex(c),
        ALICE_LABEL, BOB_LABELS, shared, machine, float(branch_weight), ancilla_dim,
    )


def _checked_marginal(s: ConservationScenario, state: Ket, off_diagonal: complex) -> DensityMatrix:
    marginal = partial_trace(density_of(state), (s.alice_label,))
    w = s.branch_weight
    pq = math.sqrt(w * (1.0 - w))
    expected = np.array(
        [[w, pq * np.conj(off_diagonal)], [pq * off_diagonal, 1.0 - w]], dtype=complex
    )
    dev = float(np.max(np.abs(marginal.entries - expected)))
    if dev > RESIDUAL_TOL:
        raise ArithmeticError(f"marginal deviates from its closed form by {dev:g}")
    return marginal


def alice_marginal_before(s: ConservationScenario) -> DensityMatrix:
    """Alice's reduced state of the shared state; cross-checked entrywise."""
    return _checked_marginal(s, s.shared, s.a * s.b)


def after_state(s: ConservationScenario) -> Ket:
    """Shared state after Bob applies his declared rules branch by branch."""
    p = math.sqrt(s.branch_weight)
    q = math.sqrt(1.0 - s.branch_weight)
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    y_i = s.machine.pairs[0][1]
    y_j = s.machine.pairs[1][1]
    amp = p * np.kron(e0, y_i.amplitudes) + q * np.kron(e1, y_j.amplitudes)
    sig = signature((s.alice_label, 2)).concat(s.machine.output_signature)
    return Ket(sig, amp)


def alice_marginal_after(s: ConservationScenario) -> DensityMatrix:
    """Alice's reduced state after the branchwise cloner; cross-checked."""
    return _checked_marginal(s, after_state(s), s.a * s.a * s.c)


def _lambda_max(offdiag_modulus: float, branch_weight: float) -> float:
    w = branch_weight
    return 0.5 + math.sqrt((w - 0.5) ** 2 + w * (1.0 - w) * offdiag_modulus**2)


def lambda_before(a: complex, b: complex, branch_weight: float = 0.5) -> float:
    """Closed-form largest eigenvalue of Alice's pre-machine marginal.

    Equal branch weights give 1/2 + |a||b|/2.
    """
    return _lambda_max(abs(complex(a)) * abs(complex(b)), branch_weight)


def lambda_after(a: complex, c: complex, branch_weight: float = 0.5) -> float:
    """Closed-form largest eigenvalue after the cloner: 1/2 + |a|^2|c|/2 at equal weights."""
    return _lambda_max(abs(complex(a)) ** 2 * abs(complex(c)), branch_weight)


def entanglement_delta(s: ConservationScenario) -> EntanglementDelta:
    """Change in Alice's leading eigenvalue and entropy across the machine.

    Both vanish iff the machine preserves the Gram matrix (|b| = |a||c| for
    overlap moduli realized here, away from the a = 0 corner).
    """
    before = alice_marginal_before(s)
    after = alice_marginal_after(s)
    return EntanglementDelta(
        delta_lambda=eig_hermitian(after).largest - eig_hermitian(before).largest,
        delta_entropy=entropy(after) - entropy(before),
    )


def equivalence_unitary(
    f: StateFamily,
    g: StateFamily,
    tol: float = ASSERT_TOL,
    residual_tol: float = 1e-8,
) -> LinearMachine:
    """Constructive isometry U with U f_k = g_k for Gram-equal families."""
    if len(f) != len(g):
        raise ValueError(f"family sizes differ: {len(f)} vs {len(g)}")
    if g.signature.dim < f.signature.dim:
        raise ValueError(
            f"target dimension {g.signature.dim} is smaller than source {f.signature.dim}"
        )
    dev = float(np.max(np.abs(gram(f) - gram(g))))
    if dev > tol:
        raise GramMismatch(dev)
    mat = isometry_matrix_from_pairs(
        [k.amplitudes for k in f.members],
        [k.amplitudes for k in g.members],
        f.signature.dim,
        g.signature.dim,
        tol,
    )
    lm = LinearMachine(mat, f.signature, g.signature)
    worst = max(
        float(np.max(np.abs(mat @ x.amplitudes - y.amplitudes)))
        for x, y in zip(f.members, g.members)
    )
    if worst > residual_tol:
        raise ArithmeticError(f"member reconstruction residual {worst:g} exceeds {residual_tol:g}")
    return lm

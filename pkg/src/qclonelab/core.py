"""Dense complex linear algebra over labeled tensor-product spaces.

States are amplitude vectors indexed row-major over an ordered list of
labeled subsystems, so ``|q0 q1>`` puts the q0 index on the slow axis.
Everything here is immutable after construction and every operation is a
pure function, so values can be shared freely between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tolerances import (
    ASSERT_TOL,
    JACOBI_MAX_SWEEPS,
    JACOBI_OFFDIAG_THRESHOLD,
    RESIDUAL_TOL,
)


def _frozen(array: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SubsystemSignature:
    """Ordered list of (label, dimension) factors of a tensor-product space."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        entries = tuple((str(lab), int(dim)) for lab, dim in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("signature needs at least one subsystem")
        seen = set()
        for label, dim in entries:
            if label in seen:
                raise ValueError(f"duplicate subsystem label {label!r}")
            seen.add(label)
            if dim < 1:
                raise ValueError(f"subsystem {label!r} has non-positive dimension {dim}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.entries)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.entries)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def axis_of(self, label: str) -> int:
        for k, (lab, _) in enumerate(self.entries):
            if lab == label:
                return k
        raise ValueError(f"unknown subsystem label {label!r}")

    def concat(self, other: "SubsystemSignature") -> "SubsystemSignature":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise ValueError(f"duplicate subsystem label {sorted(clash)[0]!r}")
        return SubsystemSignature(self.entries + other.entries)

    def keep(self, labels) -> "SubsystemSignature":
        """Sub-signature of the given labels, in this signature's order."""
        wanted = set(labels)
        unknown = wanted - set(self.labels)
        if unknown:
            raise ValueError(f"unknown subsystem label {sorted(unknown)[0]!r}")
        kept = tuple(e for e in self.entries if e[0] in wanted)
        if not kept:
            raise ValueError("must keep at least one subsystem")
        return SubsystemSignature(kept)


def signature(*entries: tuple[str, int]) -> SubsystemSignature:
    return SubsystemSignature(tuple(entries))


@dataclass(frozen=True)
class Ket:
    """State vector over a signature; row-major amplitude order.

    Physical states are unit norm; intermediates produced inside operations
    may be unnormalized, and operations that require normalization check it.
    """

    signature: SubsystemSignature
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != self.signature.dim:
            raise ValueError(
                f"amplitude length {amp.shape[0]} does not match signature dimension {self.signature.dim}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_normalized(self, tol: float = ASSERT_TOL) -> "Ket":
        if abs(self.norm - 1.0) > tol:
            raise ValueError(f"ket is not normalized (norm={self.norm!r})")
        return self

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.signature.dims)


def basis_ket(sig: SubsystemSignature, index: int) -> Ket:
    amp = np.zeros(sig.dim, dtype=complex)
    amp[index] = 1.0
    return Ket(sig, amp)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian unit-trace operator over a signature.

    Construction checks Hermiticity and trace; positivity is a mathematical
    consequence for everything built here and is verified by the test suite
    rather than re-diagonalizing on every construction.
    """

    signature: SubsystemSignature
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        d = self.signature.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match signature dimension {d}")
        herm_dev = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_dev > ASSERT_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_dev:g})")
        trace_dev = abs(complex(np.trace(mat)) - 1.0)
        if trace_dev > ASSERT_TOL:
            raise ValueError(f"matrix trace deviates from 1 by {trace_dev:g}")
        object.__setattr__(self, "entries", _frozen(mat))


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[0])


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product; signatures must have disjoint labels."""
    sig = a.signature.concat(b.signature)
    return Ket(sig, np.kron(a.amplitudes, b.amplitudes))


def tensor_all(*kets: Ket) -> Ket:
    out = kets[0]
    for k in kets[1:]:
        out = tensor(out, k)
    return out


def inner(a: Ket, b: Ket) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.signature != b.signature:
        raise ValueError(
            f"signature mismatch: {a.signature.entries} vs {b.signature.entries}"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def density_of(k: Ket, tol: float = ASSERT_TOL) -> DensityMatrix:
    """Rank-1 projector |k><k| of a normalized ket."""
    n = k.norm
    if n == 0.0:
        raise ValueError("cannot form a density matrix from a zero ket")
    if abs(n - 1.0) > tol:
        raise ValueError(f"ket is not normalized (norm={n!r})")
    amp = k.amplitudes
    return DensityMatrix(k.signature, np.outer(amp, amp.conj()))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix on the kept labels, original order preserved."""
    kept_sig = rho.signature.keep(keep)
    kept = set(kept_sig.labels)
    dims = rho.signature.dims
    n = len(dims)
    tensorized = rho.entries.reshape(dims + dims)

    # Row axes get fresh letters; traced column axes reuse the row letter.
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = letters[:n]
    col = []
    next_free = n
    keep_axes = []
    for axis, (label, _) in enumerate(rho.signature.entries):
        if label in kept:
            col.append(letters[next_free])
            next_free += 1
            keep_axes.append(axis)
        else:
            col.append(row[axis])
    out_sub = "".join(row[a] for a in keep_axes) + "".join(col[a] for a in keep_axes)
    reduced = np.einsum(f"{row}{''.join(col)}->{out_sub}", tensorized)
    d = kept_sig.dim
    return DensityMatrix(kept_sig, reduced.reshape(d, d))


def _require_hermitian(mat: np.ndarray, tol: float) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    dev = float(np.max(np.abs(mat - mat.conj().T)))
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (deviation {dev:g})")
    return 0.5 * (mat + mat.conj().T)


def _eig_2x2(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = mat[0, 0].real
    d = mat[1, 1].real
    b = mat[0, 1]
    tr = a + d
    disc = math.sqrt(max((a - d) ** 2 + 4.0 * abs(b) ** 2, 0.0))
    hi = 0.5 * (tr + disc)
    lo = 0.5 * (tr - disc)
    if abs(b) == 0.0:
        vecs = np.eye(2, dtype=complex)
        if a >= d:
            return np.array([a, d]), vecs
        return np.array([d, a]), vecs[:, ::-1]
    v_hi = np.array([b, hi - a], dtype=complex)
    v_lo = np.array([b, lo - a], dtype=complex)
    v_hi /= np.linalg.norm(v_hi)
    v_lo /= np.linalg.norm(v_lo)
    return np.array([hi, lo]), np.stack([v_hi, v_lo], axis=1)


def _jacobi(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix."""
    a = np.array(mat, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                off = max(off, mag)
                if mag <= JACOBI_OFFDIAG_THRESHOLD:
                    continue
                w = apq / mag
                phi = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
                c = math.cos(phi)
                s = math.sin(phi)
                # Right-multiply by the plane rotation, then left by its adjoint.
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(w) * col_q
                a[:, q] = s * w * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * w * row_q
                a[q, :] = s * np.conj(w) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vol_p = v[:, p].copy()
                vol_q = v[:, q].copy()
                v[:, p] = c * vol_p - s * np.conj(w) * vol_q
                v[:, q] = s * w * vol_p + c * vol_q
        if off <= JACOBI_OFFDIAG_THRESHOLD:
            break
    return np.real(np.diag(a)), v


def eig_hermitian(
    h,
    tol: float = ASSERT_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix (or density matrix).

    Uses the closed form for 2x2 inputs and cyclic Jacobi sweeps otherwise;
    raises if the reconstruction residual exceeds ``residual_tol``.
    """
    if isinstance(h, DensityMatrix):
        h = h.entries
    mat = _require_hermitian(h, tol)
    n = mat.shape[0]
    if n == 1:
        vals = np.array([mat[0, 0].real])
        vecs = np.ones((1, 1), dtype=complex)
    elif n == 2:
        vals, vecs = _eig_2x2(mat)
    else:
        vals, vecs = _jacobi(mat)
        order = np.argsort(-vals, kind="stable")
        vals = vals[order]
        vecs = vecs[:, order]
    # Deterministic column phases: largest-magnitude entry made real positive.
    for k in range(n):
        col = vecs[:, k]
        pivot = col[int(np.argmax(np.abs(col)))]
        if abs(pivot) > 0.0:
            vecs[:, k] = col * (np.conj(pivot) / abs(pivot))
    residual = float(np.max(np.abs(mat - (vecs * vals) @ vecs.conj().T)))
    if residual > residual_tol:
        raise ArithmeticError(
            f"eigendecomposition residual {residual:g} exceeds {residual_tol:g}"
        )
    return Spectrum(vals, vecs)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma.

    The difference is formed in a canonical argument order so the result is
    bitwise symmetric.
    """
    if rho.signature != sigma.signature:
        raise ValueError(
            f"signature mismatch: {rho.signature.entries} vs {sigma.signature.entries}"
        )
    if sigma.entries.tobytes() < rho.entries.tobytes():
        rho, sigma = sigma, rho
    diff = rho.entries - sigma.entries
    spec = eig_hermitian(diff, tol=10 * ASSERT_TOL)
    return 0.5 * float(np.sum(np.abs(spec.eigenvalues)))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits, with 0*log(0) taken as 0."""
    vals = eig_hermitian(rho).eigenvalues
    vals = np.clip(vals, 0.0, None)
    nz = vals[vals > 0.0]
    return float(-np.sum(nz * np.log2(nz)))

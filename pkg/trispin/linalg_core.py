"""Dense complex linear algebra for few-qubit states and operators"""
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Tolerances
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-13
OFFDIAG_TOL = 1e-13
CLUSTER_TOL = 1e-9

# Six qubits; each Jacobi sweep runs dim*(dim-1)/2 rotations in Python
MAX_DIM = 2 ** 6
MAX_SWEEPS = 64

# Amplitudes are plain Python complex numbers; finiteness is enforced at construction.
ComplexScalar = complex


class LinalgError(ValueError):
    """Invalid vector or matrix input"""


class ConvergenceError(RuntimeError):
    """Eigensolver ran out of sweeps before the off-diagonal norm fell below tolerance"""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != ndim:
        raise LinalgError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError("NaN or Inf entries are not admitted")
    arr.setflags(write=False)
    return arr


def _check_dim(dim: int) -> None:
    if dim < 1 or dim & (dim - 1):
        raise LinalgError(f"dimension {dim} is not a power of 2")
    if dim > MAX_DIM:
        raise LinalgError(f"dimension {dim} exceeds the supported maximum {MAX_DIM}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Amplitude vector over the computational basis of n qubits.

    Basis order is big-endian: for |q_A q_B q_C> the index is 4*q_A + 2*q_B + q_C.
    When `normalized` is set the squared norm is checked against 1 to NORM_TOL.
    """

    amps: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen_array(self.amps, 1)
        _check_dim(amps.size)
        if self.normalized:
            norm_sq = float(np.vdot(amps, amps).real)
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise LinalgError(f"state flagged normalized has squared norm {norm_sq!r}")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps: Iterable, normalize: bool = False) -> "StateVector":
        """Build a state, optionally rescaling it to unit norm first"""
        arr = np.array(list(amps), dtype=np.complex128)
        if normalize:
            norm = float(np.linalg.norm(arr))
            if norm == 0.0:
                raise LinalgError("cannot normalize the zero vector")
            arr = arr / norm
        return cls(arr)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        dim = 2 ** n_qubits
        if not 0 <= index < dim:
            raise LinalgError(f"basis index {index} out of range for {n_qubits} qubits")
        arr = np.zeros(dim, dtype=np.complex128)
        arr[index] = 1.0
        return cls(arr)

    @property
    def dim(self) -> int:
        return int(self.amps.size)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim}, normalized={self.normalized})"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix on a qubit register; optionally certified Hermitian"""

    entries: np.ndarray
    hermitian_certified: bool = False

    def __post_init__(self):
        entries = _frozen_array(self.entries, 2)
        rows, cols = entries.shape
        if rows != cols:
            raise LinalgError(f"operator matrix must be square, got {entries.shape}")
        _check_dim(rows)
        if self.hermitian_certified:
            deviation = float(np.max(np.abs(entries - entries.conj().T)))
            if deviation > HERMITIAN_TOL:
                raise LinalgError(f"matrix is not Hermitian (max |A - A^H| = {deviation:.3e})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def hermitian(cls, entries) -> "OperatorMatrix":
        return cls(entries, hermitian_certified=True)

    @classmethod
    def general(cls, entries) -> "OperatorMatrix":
        return cls(entries, hermitian_certified=False)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.dim else 0.0

    def apply(self, x: StateVector) -> np.ndarray:
        if x.dim != self.dim:
            raise LinalgError(f"dimension mismatch: operator {self.dim}, state {x.dim}")
        return self.entries @ x.amps

    def __repr__(self) -> str:
        return f"OperatorMatrix(dim={self.dim}, hermitian_certified={self.hermitian_certified})"


def tensor_product(xs: Sequence[StateVector]) -> StateVector:
    """Kronecker product with the first factor as the most significant party"""
    if not xs:
        raise LinalgError("empty tensor product")
    amps = reduce(np.kron, (x.amps for x in xs))
    return StateVector(amps, normalized=all(x.normalized for x in xs))


def inner_product(x: StateVector, y: StateVector) -> ComplexScalar:
    """<x|y>, conjugate-linear in x"""
    if x.dim != y.dim:
        raise LinalgError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return complex(np.vdot(x.amps, y.amps))


def projector(x: StateVector) -> OperatorMatrix:
    """Rank-one projector |x><x|"""
    return OperatorMatrix.hermitian(np.outer(x.amps, x.amps.conj()))


def expectation(h: OperatorMatrix, x: StateVector) -> float:
    return float(np.vdot(x.amps, h.apply(x)).real)


# =============================================================================
# Spectra
# =============================================================================

@dataclass(frozen=True)
class SpectralPair:
    eigenvalue: float
    eigenvector: StateVector
    label: Optional[int] = None


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenpairs sorted ascending by eigenvalue, plus groups of indices whose
    eigenvalues agree within CLUSTER_TOL * max|E|. Inside a group the individual
    eigenvectors are gauge-ambiguous; compare groups through cluster_projector.
    """

    pairs: Tuple[SpectralPair, ...]
    degeneracy_clusters: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[SpectralPair]) -> "Spectrum":
        ordered = sorted(pairs, key=lambda pair: pair.eigenvalue)
        if not ordered:
            raise LinalgError("spectrum needs at least one eigenpair")
        values = [pair.eigenvalue for pair in ordered]
        tol = CLUSTER_TOL * max(abs(v) for v in values)
        clusters = [[0]]
        for k in range(1, len(values)):
            if values[k] - values[k - 1] <= tol:
                clusters[-1].append(k)
            else:
                clusters.append([k])
        return cls(tuple(ordered), tuple(tuple(group) for group in clusters))

    @property
    def dim(self) -> int:
        return self.pairs[0].eigenvector.dim

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([pair.eigenvalue for pair in self.pairs])

    @property
    def labels(self) -> Tuple[Optional[int], ...]:
        return tuple(pair.label for pair in self.pairs)

    def vectors(self) -> np.ndarray:
        """Eigenvectors as the columns of a dim x dim matrix"""
        return np.column_stack([pair.eigenvector.amps for pair in self.pairs])

    def cluster_projector(self, cluster: int) -> np.ndarray:
        return self._projector(self.degeneracy_clusters[cluster])

    def projector_near(self, value: float, tol: float) -> np.ndarray:
        indices = [k for k, pair in enumerate(self.pairs) if abs(pair.eigenvalue - value) <= tol]
        return self._projector(indices)

    def reconstruct(self) -> np.ndarray:
        u = self.vectors()
        return (u * self.eigenvalues) @ u.conj().T

    def _projector(self, indices: Sequence[int]) -> np.ndarray:
        result = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in indices:
            amps = self.pairs[k].eigenvector.amps
            result += np.outer(amps, amps.conj())
        return result


def spectral_projector_residual(first: Spectrum, second: Spectrum) -> float:
    """
    Largest entry-wise difference between matching spectral projectors of two spectra.
    Each cluster of one spectrum is compared with the projector the other spectrum
    assigns to the same eigenvalue (zero if it has none there), in both directions.
    """
    if first.dim != second.dim:
        raise LinalgError(f"dimension mismatch: {first.dim} vs {second.dim}")
    scale = max(np.max(np.abs(first.eigenvalues)), np.max(np.abs(second.eigenvalues)))
    tol = CLUSTER_TOL * float(scale)
    residual = 0.0
    for own, other in ((first, second), (second, first)):
        for k, cluster in enumerate(own.degeneracy_clusters):
            value = float(np.mean([own.pairs[i].eigenvalue for i in cluster]))
            delta = own.cluster_projector(k) - other.projector_near(value, tol)
            residual = max(residual, float(np.max(np.abs(delta))))
    return residual


# =============================================================================
# Cyclic Jacobi eigensolver
# =============================================================================

def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a phase-adjusted Jacobi rotation, in place"""
    apq = complex(a[p, q])
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    app = float(a[p, p].real)
    aqq = float(a[q, q].real)
    diff = aqq - app
    if mag < abs(diff) * 1.0e-36:
        t = mag / diff
    else:
        theta = diff / (2.0 * mag)
        t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
    c = 1.0 / math.hypot(t, 1.0)
    s = t * c
    w = phase.conjugate()

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * w * col_q
    a[:, q] = s * col_p + c * w * col_q

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * phase * row_q
    a[q, :] = s * row_p + c * phase * row_q

    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * w * vec_q
    v[:, q] = s * vec_p + c * w * vec_q


def hermitian_eigendecomposition(h: OperatorMatrix, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """
    Diagonalize a Hermitian-certified matrix with cyclic complex Jacobi sweeps.

    Sweeps visit every (p, q), p < q, in row order, so the result depends only on
    the input. Iteration stops once the off-diagonal Frobenius norm is at most
    OFFDIAG_TOL * ||H||_F.
    """
    if not h.hermitian_certified:
        raise LinalgError("eigendecomposition requires a Hermitian-certified matrix")

    n = h.dim
    a = np.array(h.entries, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    target = OFFDIAG_TOL * float(np.linalg.norm(a))

    sweeps = 0
    off = _off_diagonal_norm(a)
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e}, target {target:.3e})",
                residual=off,
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
        sweeps += 1
        off = _off_diagonal_norm(a)

    logger.debug(f"Jacobi converged after {sweeps} sweeps on dim {n} (off-diagonal {off:.3e})")
    values = np.real(np.diag(a))
    pairs = [SpectralPair(float(values[k]), StateVector(v[:, k])) for k in range(n)]
    return Spectrum.from_pairs(pairs)

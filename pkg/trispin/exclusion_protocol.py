"""Preparations, measurement bases and certification of the exclusion structure"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .hamiltonian import PRINTED_KETS, printed_ket
from .linalg_core import (
    LinalgError,
    OperatorMatrix,
    StateVector,
    inner_product,
    projector,
    tensor_product,
)

logger = logging.getLogger(__name__)

ZERO_AMPLITUDE_TOL = 1e-12
ZERO_PROBABILITY_TOL = 1e-24
BASIS_TOL = 1e-12
GRID_POINTS = 99

NAMED_THETAS: Dict[str, float] = {
    "pi/6": math.pi / 6,
    "pi/4": math.pi / 4,
    "pi/3": math.pi / 3,
}

# Per party, the two single-qubit states a preparation chooses between (A, B, C).
PARTY_STATES = (("m", "n"), ("m", "nbar"), ("mbar", "nbar"))
TWO_QUBIT_PARTY_STATES = (("0", "+"), ("0", "+"))


class PreparationRangeError(ValueError):
    """theta outside the open interval (0, pi/2)"""


class NoExclusionMatchingError(RuntimeError):
    """The zero-amplitude graph has no perfect matching"""

    def __init__(self, message: str, amplitudes: np.ndarray):
        super().__init__(message)
        self.amplitudes = amplitudes


# =============================================================================
# Preparations
# =============================================================================

def single_qubit_states(theta: float) -> Dict[str, StateVector]:
    """|m>, |n> and their orthogonal complements |mbar>, |nbar>"""
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return {
        "m": StateVector(np.array([c, -s])),
        "n": StateVector(np.array([c, s])),
        "mbar": StateVector(np.array([s, c])),
        "nbar": StateVector(np.array([-s, c])),
    }


@dataclass(frozen=True)
class PreparationFamily:
    theta: float
    states: Dict[str, StateVector]
    labels: Tuple[Tuple[str, ...], ...]
    preparations: Tuple[StateVector, ...]
    party_states: Tuple[Tuple[str, ...], ...] = PARTY_STATES

    @property
    def m(self) -> StateVector:
        return self.states["m"]

    @property
    def n(self) -> StateVector:
        return self.states["n"]

    @property
    def mbar(self) -> StateVector:
        return self.states["mbar"]

    @property
    def nbar(self) -> StateVector:
        return self.states["nbar"]


def build_preparations(theta: float) -> PreparationFamily:
    """
    The eight product preparations, A in {m, n}, B in {m, nbar}, C in {mbar, nbar},
    enumerated with C varying fastest.
    """
    if not 0.0 < theta < math.pi / 2:
        raise PreparationRangeError(
            f"theta={theta!r} is outside the open interval (0, pi/2); the nonoverlap regime is excluded"
        )
    states = single_qubit_states(theta)
    labels = tuple(itertools.product(*PARTY_STATES))
    preparations = tuple(tensor_product([states[name] for name in combo]) for combo in labels)
    return PreparationFamily(theta, states, labels, preparations)


# =============================================================================
# Measurement bases
# =============================================================================

@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-one projective measurement; outcome k is |outcomes[k]><outcomes[k]|"""

    labels: Tuple[str, ...]
    outcomes: Tuple[StateVector, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.outcomes):
            raise LinalgError("one label per outcome required")
        dims = {x.dim for x in self.outcomes}
        if len(dims) != 1 or dims.pop() != len(self.outcomes):
            raise LinalgError("a complete basis needs exactly dim outcome vectors of equal dimension")
        error = self.orthonormality_error()
        if error > BASIS_TOL:
            raise LinalgError(f"measurement vectors are not orthonormal (max deviation {error:.3e})")

    @classmethod
    def from_states(cls, labels: Sequence[str], states: Sequence[StateVector]) -> "MeasurementBasis":
        return cls(tuple(labels), tuple(states))

    @classmethod
    def analytic(cls) -> "MeasurementBasis":
        """Printed eigenkets e1..e8, in printed order"""
        return cls(tuple(f"e{k}" for k in PRINTED_KETS), tuple(printed_ket(k) for k in PRINTED_KETS))

    @property
    def dim(self) -> int:
        return len(self.outcomes)

    @property
    def projectors(self) -> Tuple[OperatorMatrix, ...]:
        return tuple(projector(x) for x in self.outcomes)

    def matrix(self) -> np.ndarray:
        return np.column_stack([x.amps for x in self.outcomes])

    def orthonormality_error(self) -> float:
        u = self.matrix()
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))

    def projector_algebra_error(self) -> float:
        """max deviation of sum_i M_i = I and M_i M_j = delta_ij M_i"""
        mats = [p.entries for p in self.projectors]
        error = float(np.max(np.abs(sum(mats) - np.eye(self.dim))))
        for i, j in itertools.product(range(self.dim), repeat=2):
            expected = mats[i] if i == j else 0.0
            error = max(error, float(np.max(np.abs(mats[i] @ mats[j] - expected))))
        return error


# =============================================================================
# Born-rule tables
# =============================================================================

def born_probability(state: StateVector, outcome: StateVector) -> float:
    """|<outcome|state>|^2"""
    if not (state.normalized and outcome.normalized):
        raise LinalgError("born_probability requires normalized vectors")
    return abs(inner_product(outcome, state)) ** 2


def _states(preparations) -> Sequence[StateVector]:
    return preparations.preparations if hasattr(preparations, "preparations") else preparations


def amplitude_table(preparations, basis: MeasurementBasis) -> np.ndarray:
    """amplitudes[i, k] = <outcome_k|preparation_i>"""
    states = _states(preparations)
    return np.array([[inner_product(e, psi) for e in basis.outcomes] for psi in states])


def probability_table(family, basis: MeasurementBasis) -> np.ndarray:
    """Rows index preparations, columns outcomes"""
    return np.abs(amplitude_table(family, basis)) ** 2


def identity_pairing_failures(table: np.ndarray, tol: float = ZERO_PROBABILITY_TOL) -> List[Tuple[int, float]]:
    """(i, P(outcome i | preparation i)) for every 1-based i whose diagonal entry is not zero"""
    return [(i + 1, float(table[i, i])) for i in range(min(table.shape)) if table[i, i] > tol]


# =============================================================================
# Exclusion matching
# =============================================================================

@dataclass(frozen=True, eq=False)
class ExclusionMatching:
    """pairs[i - 1] is the 1-based preparation that outcome i excludes"""

    pairs: Tuple[int, ...]
    certified_amplitude: float
    amplitudes: np.ndarray

    @property
    def certified_probability(self) -> float:
        return self.certified_amplitude ** 2

    def excluded_by(self, outcome: int) -> int:
        return self.pairs[outcome - 1]

    def forbidden_outcome(self, preparation: int) -> int:
        return self.pairs.index(preparation) + 1

    def as_dict(self, outcome_labels: Optional[Sequence[str]] = None) -> Dict[str, int]:
        labels = outcome_labels or [f"e{k}" for k in range(1, len(self.pairs) + 1)]
        return {label: prep for label, prep in zip(labels, self.pairs)}


def _smallest_perfect_matching(adjacency: np.ndarray) -> Optional[Tuple[int, ...]]:
    """Lexicographically smallest row -> column perfect matching, by ordered backtracking"""
    n = adjacency.shape[0]
    used = [False] * n
    chosen: List[int] = []

    def extend(row: int) -> bool:
        if row == n:
            return True
        for col in range(n):
            if adjacency[row, col] and not used[col]:
                used[col] = True
                chosen.append(col)
                if extend(row + 1):
                    return True
                used[col] = False
                chosen.pop()
        return False

    return tuple(chosen) if extend(0) else None


def find_exclusion_matching(family, basis: MeasurementBasis) -> ExclusionMatching:
    """
    Pair every outcome with a preparation it excludes (|amplitude| <= 1e-12), as a
    perfect matching on the zero-amplitude graph.
    """
    amplitudes = amplitude_table(family, basis)
    if amplitudes.shape[0] != amplitudes.shape[1]:
        raise LinalgError(f"need as many preparations as outcomes, got {amplitudes.shape}")
    zero_edges = np.abs(amplitudes.T) <= ZERO_AMPLITUDE_TOL
    assignment = _smallest_perfect_matching(zero_edges)
    if assignment is None:
        raise NoExclusionMatchingError(
            f"no perfect exclusion matching among {int(zero_edges.sum())} zero-amplitude pairs",
            amplitudes,
        )
    pairs = tuple(prep + 1 for prep in assignment)
    certified = max(abs(amplitudes[prep, outcome]) for outcome, prep in enumerate(assignment))
    return ExclusionMatching(pairs, float(certified), amplitudes)


# =============================================================================
# Theta scans
# =============================================================================

def theta_grid(points: int = GRID_POINTS) -> np.ndarray:
    """`points` equally spaced interior points of (0, pi/2)"""
    if points < 1:
        raise ValueError(f"grid needs at least one point, got {points}")
    return np.linspace(0.0, math.pi / 2, points + 2)[1:-1]


@dataclass(frozen=True)
class ExclusionScan:
    thetas: Tuple[float, ...]
    tables: Tuple[np.ndarray, ...]
    matchings: Tuple[ExclusionMatching, ...]

    @property
    def stable(self) -> bool:
        return len({m.pairs for m in self.matchings}) == 1

    @property
    def permutation(self) -> Optional[Tuple[int, ...]]:
        return self.matchings[0].pairs if self.stable else None

    @property
    def max_certified_probability(self) -> float:
        return max(m.certified_probability for m in self.matchings)


def _scan_point(theta: float, basis: MeasurementBasis) -> Tuple[np.ndarray, ExclusionMatching]:
    family = build_preparations(theta)
    return probability_table(family, basis), find_exclusion_matching(family, basis)


def scan_exclusion(thetas: Sequence[float], basis: Optional[MeasurementBasis] = None, workers: int = 1) -> ExclusionScan:
    """Probability tables and matchings over a theta grid; output order follows `thetas`"""
    basis = basis or MeasurementBasis.analytic()
    thetas = tuple(float(t) for t in thetas)
    if not thetas:
        raise ValueError("empty theta grid")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda t: _scan_point(t, basis), thetas))
    scan = ExclusionScan(thetas, tuple(r[0] for r in results), tuple(r[1] for r in results))
    if scan.stable:
        logger.info(f"Exclusion matching {scan.permutation} stable over {len(thetas)} theta values")
    else:
        logger.warning(f"Exclusion matching changes across the theta grid ({len(thetas)} points)")
    return scan


# =============================================================================
# Two-qubit game
# =============================================================================

@dataclass(frozen=True)
class TwoQubitProtocol:
    labels: Tuple[Tuple[str, ...], ...]
    preparations: Tuple[StateVector, ...]
    basis: MeasurementBasis
    matching: ExclusionMatching
    party_states: Tuple[Tuple[str, ...], ...] = TWO_QUBIT_PARTY_STATES

    @property
    def table(self) -> np.ndarray:
        return probability_table(self.preparations, self.basis)


def _qubit(label: str) -> StateVector:
    r = 1 / math.sqrt(2)
    return {
        "0": StateVector(np.array([1.0, 0.0])),
        "1": StateVector(np.array([0.0, 1.0])),
        "+": StateVector(np.array([r, r])),
        "-": StateVector(np.array([r, -r])),
    }[label]


def _pair_superposition(first: Tuple[str, str], second: Tuple[str, str]) -> StateVector:
    amps = tensor_product([_qubit(x) for x in first]).amps + tensor_product([_qubit(x) for x in second]).amps
    return StateVector(amps / math.sqrt(2))


def pbr_two_qubit_protocol() -> TwoQubitProtocol:
    """Preparations |00>, |0+>, |+0>, |++> and the entangled basis xi_1..xi_4"""
    labels = tuple(itertools.product(*TWO_QUBIT_PARTY_STATES))
    preparations = tuple(tensor_product([_qubit(x) for x in combo]) for combo in labels)
    xis = (
        _pair_superposition(("0", "1"), ("1", "0")),
        _pair_superposition(("0", "-"), ("1", "+")),
        _pair_superposition(("+", "1"), ("-", "0")),
        _pair_superposition(("+", "-"), ("-", "+")),
    )
    basis = MeasurementBasis(("xi1", "xi2", "xi3", "xi4"), xis)
    matching = find_exclusion_matching(preparations, basis)
    return TwoQubitProtocol(labels, preparations, basis, matching)

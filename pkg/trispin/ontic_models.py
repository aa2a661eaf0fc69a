"""
Finite ontological models over a product ontic space, checked against the
quantum exclusion statistics.

A preparation picks one state label per party; under preparation independence its
distribution over joint ontic points is the product of the parties' epistemic
distributions. Joint points are enumerated with the last party varying fastest,
matching both itertools.product and numpy's C-order ravel.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .exclusion_protocol import (
    PARTY_STATES,
    TWO_QUBIT_PARTY_STATES,
    ZERO_PROBABILITY_TOL,
    ExclusionMatching,
    MeasurementBasis,
    find_exclusion_matching,
    probability_table,
)
from .rng import SeededRNG, cumulative_weights, sample_categorical

logger = logging.getLogger(__name__)

DISTRIBUTION_TOL = 1e-12
TOY_POINTS = ("only_first", "shared", "only_second")


class OnticModelError(ValueError):
    """Malformed ontic model or invalid model parameters"""


def _probability_vector(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise OnticModelError(f"{what}: expected a non-empty probability vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise OnticModelError(f"{what}: entries must be finite and non-negative")
    if abs(float(arr.sum()) - 1.0) > DISTRIBUTION_TOL:
        raise OnticModelError(f"{what}: sums to {float(arr.sum())!r}, not 1")
    arr.setflags(write=False)
    return arr


# =============================================================================
# Model types
# =============================================================================

@dataclass(frozen=True)
class OnticSpace:
    """Per party, the labels of its ontic points"""

    points: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        points = tuple(tuple(str(p) for p in party) for party in self.points)
        if not points:
            raise OnticModelError("ontic space needs at least one party")
        for index, party in enumerate(points):
            if not party:
                raise OnticModelError(f"party {index} has no ontic points")
            if len(set(party)) != len(party):
                raise OnticModelError(f"party {index} repeats an ontic point label")
        object.__setattr__(self, "points", points)

    @property
    def n_parties(self) -> int:
        return len(self.points)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(party) for party in self.points)

    @property
    def n_joint(self) -> int:
        return math.prod(self.sizes)

    def joint_points(self) -> List[Tuple[str, ...]]:
        return list(itertools.product(*self.points))


@dataclass(frozen=True, eq=False)
class EpistemicState:
    """
    For each party, the state labels a preparation chooses between and the
    distribution each of them induces over that party's ontic points.
    """

    party_states: Tuple[Tuple[str, ...], ...]
    distributions: Tuple[Dict[str, np.ndarray], ...]

    def __post_init__(self):
        party_states = tuple(tuple(labels) for labels in self.party_states)
        if len(party_states) != len(self.distributions):
            raise OnticModelError("one distribution map per party required")
        distributions = []
        for index, (labels, given) in enumerate(zip(party_states, self.distributions)):
            missing = [label for label in labels if label not in given]
            if missing:
                raise OnticModelError(f"party {index} has no distribution for {missing}")
            distributions.append(
                {label: _probability_vector(given[label], f"party {index} state {label!r}") for label in labels}
            )
        object.__setattr__(self, "party_states", party_states)
        object.__setattr__(self, "distributions", tuple(distributions))

    def distribution(self, party: int, label: str) -> np.ndarray:
        return self.distributions[party][label]


@dataclass(frozen=True, eq=False)
class ResponseFunction:
    """table[joint point, outcome]; every row is a probability vector"""

    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2 or 0 in table.shape:
            raise OnticModelError(f"response table must be a non-empty matrix, got shape {table.shape}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise OnticModelError("response probabilities must be finite and non-negative")
        worst = float(np.max(np.abs(table.sum(axis=1) - 1.0)))
        if worst > DISTRIBUTION_TOL:
            raise OnticModelError(f"response rows must sum to 1 (worst deviation {worst:.3e})")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n_outcomes(self) -> int:
        return int(self.table.shape[1])


@dataclass(frozen=True, eq=False)
class OnticModel:
    space: OnticSpace
    epistemic: EpistemicState
    response: ResponseFunction
    name: str = "model"

    def __post_init__(self):
        if len(self.epistemic.party_states) != self.space.n_parties:
            raise OnticModelError(
                f"epistemic state covers {len(self.epistemic.party_states)} parties, space has {self.space.n_parties}"
            )
        for index, size in enumerate(self.space.sizes):
            for label, dist in self.epistemic.distributions[index].items():
                if dist.size != size:
                    raise OnticModelError(
                        f"party {index} state {label!r} has {dist.size} weights for {size} ontic points"
                    )
        if self.response.table.shape[0] != self.space.n_joint:
            raise OnticModelError(
                f"response table has {self.response.table.shape[0]} rows for {self.space.n_joint} joint points"
            )

    @property
    def n_preparations(self) -> int:
        return math.prod(len(labels) for labels in self.epistemic.party_states)

    @property
    def n_outcomes(self) -> int:
        return self.response.n_outcomes

    def preparation_labels(self, preparation: int) -> Tuple[str, ...]:
        """State labels of the 1-based preparation, last party varying fastest"""
        if not 1 <= preparation <= self.n_preparations:
            raise OnticModelError(f"preparation index {preparation} outside 1..{self.n_preparations}")
        return list(itertools.product(*self.epistemic.party_states))[preparation - 1]

    def preparation_distribution(self, preparation: int) -> np.ndarray:
        """Product distribution over joint ontic points"""
        labels = self.preparation_labels(preparation)
        factors = [self.epistemic.distribution(party, label) for party, label in enumerate(labels)]
        return reduce(np.multiply.outer, factors).ravel()

    def overlap_regions(self) -> Tuple[Tuple[int, ...], ...]:
        """Per party, the points where all of its states are strictly positive"""
        regions = []
        for party, labels in enumerate(self.epistemic.party_states):
            positive = np.all([self.epistemic.distribution(party, label) > 0 for label in labels], axis=0)
            regions.append(tuple(int(k) for k in np.flatnonzero(positive)))
        return tuple(regions)

    @property
    def overlap_mass(self) -> Tuple[float, ...]:
        """Per party, the smallest mass any of its states puts on the overlap region"""
        masses = []
        for party, region in enumerate(self.overlap_regions()):
            labels = self.epistemic.party_states[party]
            idx = list(region)
            masses.append(min(float(self.epistemic.distribution(party, label)[idx].sum()) for label in labels))
        return tuple(masses)

    @property
    def joint_overlap_mass(self) -> float:
        return math.prod(self.overlap_mass)

    def to_dict(self) -> Dict[str, Any]:
        return OnticModelFile(
            name=self.name,
            parties=[list(party) for party in self.space.points],
            party_states=[list(labels) for labels in self.epistemic.party_states],
            epistemic=[
                {label: [float(x) for x in dist] for label, dist in party.items()}
                for party in self.epistemic.distributions
            ],
            response={str(k): [float(x) for x in row] for k, row in enumerate(self.response.table)},
        ).model_dump()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OnticModel":
        try:
            parsed = OnticModelFile.model_validate(data)
        except ValidationError as e:
            raise OnticModelError(f"invalid ontic model file: {e}") from e
        space = OnticSpace(tuple(tuple(party) for party in parsed.parties))
        expected = [str(k) for k in range(space.n_joint)]
        if sorted(parsed.response, key=int) != expected:
            raise OnticModelError(f"response must be keyed by joint point indices 0..{space.n_joint - 1}")
        party_states = parsed.party_states or [list(party) for party in parsed.epistemic]
        epistemic = EpistemicState(tuple(tuple(x) for x in party_states), tuple(parsed.epistemic))
        response = ResponseFunction(np.array([parsed.response[key] for key in expected]))
        return cls(space, epistemic, response, parsed.name)


class OnticModelFile(BaseModel):
    """JSON schema of an ontic model file"""

    name: str = Field(default="model", description="Model name echoed in reports")
    parties: List[List[str]] = Field(..., description="Per party, the ontic point labels")
    party_states: Optional[List[List[str]]] = Field(
        default=None,
        description="Per party, the state labels preparations choose between; defaults to the epistemic keys",
    )
    epistemic: List[Dict[str, List[float]]] = Field(
        ..., description="Per party, state label -> probability array over that party's points"
    )
    response: Dict[str, List[float]] = Field(
        ..., description="Joint point index -> outcome probability array"
    )


# =============================================================================
# Predictions
# =============================================================================

def model_prediction(model: OnticModel, preparation: int) -> np.ndarray:
    """sum over joint points of mu_A mu_B mu_C times the response row, summed exactly"""
    return model.preparation_distribution(preparation) @ model.response.table


def prediction_table(model: OnticModel) -> np.ndarray:
    return np.array([model_prediction(model, i) for i in range(1, model.n_preparations + 1)])


def forbidden_outcome_probabilities(model: OnticModel, matching: ExclusionMatching) -> np.ndarray:
    """Entry i - 1 is the predicted probability of preparation i's forbidden outcome"""
    if len(matching.pairs) != model.n_preparations:
        raise OnticModelError(
            f"matching covers {len(matching.pairs)} preparations, model has {model.n_preparations}"
        )
    return np.array([
        model_prediction(model, prep)[matching.forbidden_outcome(prep) - 1]
        for prep in range(1, model.n_preparations + 1)
    ])


def forbidden_outcome_bound(model: OnticModel, matching: ExclusionMatching) -> float:
    """Largest predicted probability of an outcome the quantum statistics forbid"""
    return float(np.max(forbidden_outcome_probabilities(model, matching)))


def pigeonhole_floor(model: OnticModel) -> float:
    """
    Lower bound on forbidden_outcome_bound for any response table: the mass every
    preparation shares at a joint point must go to some outcome, and each outcome
    is forbidden to one preparation.
    """
    distributions = np.array([model.preparation_distribution(i) for i in range(1, model.n_preparations + 1)])
    return float(distributions.min(axis=0).sum()) / model.n_outcomes


# =============================================================================
# Model builders
# =============================================================================

def build_psi_ontic_model(family, basis: MeasurementBasis) -> OnticModel:
    """
    One ontic point per state label and party, delta distributions, and the Born
    row of the matching product preparation as the response. Probabilities at or
    below ZERO_PROBABILITY_TOL are certified zeros and are stored as 0.
    """
    party_states = family.party_states
    space = OnticSpace(party_states)
    distributions = tuple(
        {label: np.eye(len(labels))[k] for k, label in enumerate(labels)} for labels in party_states
    )
    table = probability_table(family, basis)
    table = np.where(table <= ZERO_PROBABILITY_TOL, 0.0, table)
    table = table / table.sum(axis=1, keepdims=True)
    return OnticModel(space, EpistemicState(party_states, distributions), ResponseFunction(table), "psi-ontic")


def _toy_party_states(parties: int) -> Tuple[Tuple[str, ...], ...]:
    if parties == 3:
        return PARTY_STATES
    if parties == 2:
        return TWO_QUBIT_PARTY_STATES
    raise OnticModelError(f"overlap toy model supports 2 or 3 parties, got {parties}")


def build_overlap_toy_model(q: float, parties: int = 3, response: Optional[np.ndarray] = None) -> OnticModel:
    """
    Each party has points (only_first, shared, only_second); its first state is
    (1 - q, q, 0) and its second (0, q, 1 - q). The response defaults to uniform.
    """
    if not (math.isfinite(q) and 0.0 < q <= 1.0):
        raise OnticModelError(f"overlap mass q must lie in (0, 1], got {q}")
    party_states = _toy_party_states(parties)
    space = OnticSpace((TOY_POINTS,) * parties)
    first = [1.0 - q, q, 0.0]
    second = [0.0, q, 1.0 - q]
    distributions = tuple({labels[0]: first, labels[1]: second} for labels in party_states)
    n_outcomes = 2 ** parties
    if response is None:
        response = np.full((space.n_joint, n_outcomes), 1.0 / n_outcomes)
    return OnticModel(space, EpistemicState(party_states, distributions), ResponseFunction(response), f"overlap-q{q:g}")


def random_response(n_joint: int, n_outcomes: int, generator: np.random.Generator) -> np.ndarray:
    """Response table with independent flat-Dirichlet rows"""
    return generator.dirichlet(np.ones(n_outcomes), size=n_joint)


# =============================================================================
# Consistency
# =============================================================================

@dataclass(frozen=True)
class ForbiddenViolation:
    preparation: int
    outcome: int
    probability: float


@dataclass(frozen=True)
class ConsistencyReport:
    max_deviation: float
    violations: Tuple[ForbiddenViolation, ...]
    eps: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.eps


def consistency_check(model: OnticModel, family, basis: MeasurementBasis, eps: float) -> ConsistencyReport:
    """
    Compare every model prediction with the Born table. Passes iff the largest
    deviation is at most eps; forbidden outcomes predicted above eps are listed.
    """
    if not eps > 0:
        raise OnticModelError(f"eps must be positive, got {eps}")
    quantum = probability_table(family, basis)
    predicted = prediction_table(model)
    if predicted.shape != quantum.shape:
        raise OnticModelError(f"model predicts shape {predicted.shape}, quantum table is {quantum.shape}")
    max_deviation = float(np.max(np.abs(predicted - quantum)))
    matching = find_exclusion_matching(family, basis)
    violations = tuple(
        ForbiddenViolation(prep, matching.forbidden_outcome(prep), float(p))
        for prep, p in enumerate(forbidden_outcome_probabilities(model, matching), start=1)
        if p > eps
    )
    report = ConsistencyReport(max_deviation, violations, eps)
    if report.passed:
        logger.info(f"✓ {model.name} consistent with quantum statistics (max deviation {max_deviation:.3e})")
    else:
        logger.info(
            f"✗ {model.name} inconsistent: max deviation {max_deviation:.3e}, "
            f"{len(violations)} forbidden outcomes above eps={eps:g}"
        )
    return report


# =============================================================================
# Monte Carlo
# =============================================================================

def _shard_sizes(samples: int, shards: int) -> List[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def _sample_counts(model: OnticModel, preparation: int, size: int, generator: np.random.Generator) -> np.ndarray:
    """Draw lambda per party, then an outcome from the response row at lambda"""
    labels = model.preparation_labels(preparation)
    party_draws = [
        sample_categorical(generator, model.epistemic.distribution(party, label), size)
        for party, label in enumerate(labels)
    ]
    joint = np.ravel_multi_index(party_draws, model.space.sizes)
    cdf = cumulative_weights(model.response.table)
    u = generator.random(size)
    outcomes = np.sum(u[:, None] >= cdf[joint], axis=1)
    return np.bincount(outcomes, minlength=model.n_outcomes)


def monte_carlo_run(
    model: OnticModel,
    preparation: int,
    samples: int,
    seed: int,
    shards: int = 1,
    workers: int = 1,
) -> np.ndarray:
    """
    Empirical outcome frequencies from `samples` independent draws. Shard k uses the
    stream keyed (seed, preparation, k), so results depend on seed and shard count
    but never on the worker count.
    """
    if samples < 1:
        raise OnticModelError(f"samples must be at least 1, got {samples}")
    if shards < 1 or shards > samples:
        raise OnticModelError(f"shards must lie in 1..{samples}, got {shards}")
    model.preparation_labels(preparation)
    streams = SeededRNG(seed).fork(preparation, count=shards)
    sizes = _shard_sizes(samples, shards)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        counts = list(executor.map(
            lambda args: _sample_counts(model, preparation, args[0], args[1]),
            zip(sizes, streams),
        ))
    total = np.sum(counts, axis=0)
    logger.debug(f"Monte Carlo {model.name} prep {preparation}: {samples} samples in {shards} shards")
    return total / samples

"""Edge-server trust ledger for cameras."""

from dataclasses import dataclass, field
from typing import Dict, Tuple

from .exceptions import InvalidAgreementError, OutOfRangeError, ScenarioError
from .logging_config import get_logger

logger = get_logger(__name__)

# (lower bound, description, label); bands are midpoints between anchor scores
TRUST_BANDS = (
    (0.85, "Completely Trustworthy", "Completely Safe"),
    (0.60, "Trustworthy", "Safe"),
    (0.40, "Semi-trust", "Semi-Safe"),
    (0.15, "Risk trust", "Risky"),
    (0.0, "Completely untrustworthy", "Extremely harmful"),
)


@dataclass(frozen=True)
class TrustParams:
    enabled: bool = False
    learning_rate: float = 0.1
    initial_score: float = 0.5
    min_trust: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ScenarioError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if not 0.0 <= self.initial_score <= 1.0:
            raise ScenarioError(f"initial_score must lie in [0, 1], got {self.initial_score}")
        if not 0.0 <= self.min_trust <= 1.0:
            raise ScenarioError(f"min_trust must lie in [0, 1], got {self.min_trust}")


@dataclass
class TrustLedger:
    """Per-camera trust scores kept as an exponential moving average of agreement."""

    scores: Dict[str, float] = field(default_factory=dict)
    learning_rate: float = 0.1
    initial_score: float = 0.5

    @classmethod
    def from_params(cls, params: TrustParams) -> "TrustLedger":
        return cls({}, params.learning_rate, params.initial_score)

    def score(self, camera_id: str) -> float:
        return self.scores.get(camera_id, self.initial_score)

    def update(self, camera_id: str, agreement: float) -> float:
        """Blend one agreement observation into the camera's score and return it."""
        if not 0.0 <= agreement <= 1.0:
            raise InvalidAgreementError(agreement)
        current = self.score(camera_id)
        updated = (1.0 - self.learning_rate) * current + self.learning_rate * agreement
        self.scores[camera_id] = min(1.0, max(0.0, updated))
        return self.scores[camera_id]

    def copy(self) -> "TrustLedger":
        return TrustLedger(dict(self.scores), self.learning_rate, self.initial_score)


def update_trust(ledger: TrustLedger, camera_id: str, agreement: float) -> TrustLedger:
    """Return a new ledger with one agreement observation applied."""
    updated = ledger.copy()
    updated.update(camera_id, agreement)
    return updated


def trust_label(score: float) -> Tuple[str, str]:
    """Map a score to its (description, label) band.

    Raises:
        OutOfRangeError: If the score is outside [0, 1]
    """
    if not 0.0 <= score <= 1.0:
        raise OutOfRangeError(score)
    for lower, description, label in TRUST_BANDS:
        if score >= lower:
            return description, label
    raise OutOfRangeError(score)


def gate_by_trust(ledger: TrustLedger, camera_id: str, min_trust: float = 0.4) -> bool:
    """True when the camera is trusted enough for its boxes to enter fusion."""
    return ledger.score(camera_id) >= min_trust

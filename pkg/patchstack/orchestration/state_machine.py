"""
State machine for one stacking episode
"""

from enum import Enum
from typing import List

import structlog

from patchstack.core.constants import Outcome
from patchstack.core.exceptions import PatchStackError

logger = structlog.get_logger(__name__)


class EpisodePhase(Enum):
    INITIAL = "initial"
    PROBING = "probing"
    ESTIMATING = "estimating"
    UPDATING = "updating"
    ASSESSING = "assessing"
    MOVING = "moving"
    RELEASED = "released"
    RELEASED_STABLE = "released-stable"
    RELEASED_UNSTABLE = "released-unstable"
    MAX_PROBES_EXCEEDED = "max-probes-exceeded"


TERMINAL_PHASES = {
    EpisodePhase.RELEASED_STABLE: Outcome.RELEASED_STABLE,
    EpisodePhase.RELEASED_UNSTABLE: Outcome.RELEASED_UNSTABLE,
    EpisodePhase.MAX_PROBES_EXCEEDED: Outcome.MAX_PROBES_EXCEEDED,
}


class InvalidTransition(PatchStackError):
    """Raised on a transition the episode loop must never make"""


class EpisodeStateMachine:
    """Tracks the probe -> estimate -> update -> assess loop of one episode"""

    def __init__(self):
        self.current_state = EpisodePhase.INITIAL
        self.state_history = [EpisodePhase.INITIAL]

        # Define valid transitions
        self.transitions = {
            # release_immediately skips probing; max_probes = 0 ends at once
            EpisodePhase.INITIAL: [EpisodePhase.PROBING, EpisodePhase.RELEASED, EpisodePhase.MAX_PROBES_EXCEEDED],
            EpisodePhase.PROBING: [EpisodePhase.ESTIMATING],
            EpisodePhase.ESTIMATING: [EpisodePhase.UPDATING],
            EpisodePhase.UPDATING: [EpisodePhase.ASSESSING],
            EpisodePhase.ASSESSING: [EpisodePhase.RELEASED, EpisodePhase.MOVING, EpisodePhase.MAX_PROBES_EXCEEDED],
            EpisodePhase.MOVING: [EpisodePhase.PROBING],
            EpisodePhase.RELEASED: [EpisodePhase.RELEASED_STABLE, EpisodePhase.RELEASED_UNSTABLE],
            EpisodePhase.RELEASED_STABLE: [],
            EpisodePhase.RELEASED_UNSTABLE: [],
            EpisodePhase.MAX_PROBES_EXCEEDED: [],
        }

    def can_transition_to(self, target_state: EpisodePhase) -> bool:
        """Check if transition to target state is valid"""
        return target_state in self.transitions.get(self.current_state, [])

    def transition_to(self, target_state: EpisodePhase) -> None:
        if not self.can_transition_to(target_state):
            logger.error("invalid transition", source=self.current_state.value, target=target_state.value)
            raise InvalidTransition(
                f"Invalid transition from {self.current_state.value} to {target_state.value}",
                details={"history": [s.value for s in self.state_history]},
            )

        logger.debug("transition", source=self.current_state.value, target=target_state.value)
        self.current_state = target_state
        self.state_history.append(target_state)

    def get_state_history(self) -> List[EpisodePhase]:
        return list(self.state_history)

    def is_terminal_state(self) -> bool:
        return self.current_state in TERMINAL_PHASES

    def outcome(self) -> Outcome:
        if not self.is_terminal_state():
            raise InvalidTransition(f"episode has not finished (phase {self.current_state.value})")
        return TERMINAL_PHASES[self.current_state]

import pytest

from patchstack.core.constants import Outcome
from patchstack.orchestration import EpisodePhase, EpisodeStateMachine, InvalidTransition

PROBE_CYCLE = [EpisodePhase.PROBING, EpisodePhase.ESTIMATING, EpisodePhase.UPDATING, EpisodePhase.ASSESSING]


def drive(sm, phases):
    for phase in phases:
        sm.transition_to(phase)


def test_two_probes_then_stable_release():
    sm = EpisodeStateMachine()
    drive(sm, PROBE_CYCLE + [EpisodePhase.MOVING] + PROBE_CYCLE)
    drive(sm, [EpisodePhase.RELEASED, EpisodePhase.RELEASED_STABLE])
    assert sm.is_terminal_state()
    assert sm.outcome() == Outcome.RELEASED_STABLE
    history = sm.get_state_history()
    assert history[0] == EpisodePhase.INITIAL
    assert history.count(EpisodePhase.PROBING) == 2


def test_immediate_release_and_zero_budget():
    sm = EpisodeStateMachine()
    drive(sm, [EpisodePhase.RELEASED, EpisodePhase.RELEASED_UNSTABLE])
    assert sm.outcome() == Outcome.RELEASED_UNSTABLE
    assert EpisodePhase.PROBING not in sm.get_state_history()

    sm = EpisodeStateMachine()
    sm.transition_to(EpisodePhase.MAX_PROBES_EXCEEDED)
    assert sm.outcome() == Outcome.MAX_PROBES_EXCEEDED


@pytest.mark.parametrize(
    "path, bad",
    [
        ([], EpisodePhase.ESTIMATING),
        ([EpisodePhase.PROBING], EpisodePhase.ASSESSING),
        (PROBE_CYCLE, EpisodePhase.PROBING),
        (PROBE_CYCLE + [EpisodePhase.MOVING], EpisodePhase.RELEASED),
        ([EpisodePhase.RELEASED, EpisodePhase.RELEASED_STABLE], EpisodePhase.PROBING),
    ],
)
def test_invalid_transitions_raise(path, bad):
    sm = EpisodeStateMachine()
    drive(sm, path)
    assert not sm.can_transition_to(bad)
    with pytest.raises(InvalidTransition) as exc:
        sm.transition_to(bad)
    assert "history" in exc.value.details
    assert sm.current_state == (path[-1] if path else EpisodePhase.INITIAL)


def test_outcome_requires_terminal_phase():
    sm = EpisodeStateMachine()
    drive(sm, PROBE_CYCLE)
    with pytest.raises(InvalidTransition):
        sm.outcome()


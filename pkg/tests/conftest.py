import numpy as np
import pytest

from mmcast.topology import generate_scenario, scenario_from_positions

# Six-node example: source plus five receivers, in abstract units.
SAMPLE_LAYOUT = [(0.0, 0.0), (1.8, 0.5), (2.3, 1.1), (-0.5, 1.5), (0.6, 2.1), (-2.0, 2.4)]

# Same lobe structure, nudged and scaled to metres, with node 2 shadowed
# from every potential relay so that it can only be served by the source.
SCHEDULE_LAYOUT = [(0.0, 0.0), (1.7, 0.3), (2.3, 1.0), (-0.5, 1.2), (0.6, 2.2), (-2.3, 2.6)]
SCHEDULE_SCALE_M = 30.0
SCHEDULE_BLOCKED = [(1, 2), (2, 3), (2, 4), (2, 5)]


@pytest.fixture
def sample_scenario():
    return scenario_from_positions(SAMPLE_LAYOUT, 45.0)


@pytest.fixture
def schedule_scenario():
    pos = np.asarray(SCHEDULE_LAYOUT) * SCHEDULE_SCALE_M
    return scenario_from_positions(pos, 45.0, blocked=SCHEDULE_BLOCKED)


@pytest.fixture
def small_scenarios():
    return [generate_scenario(n, 45.0, seed) for n in (1, 2, 3, 4) for seed in range(5)]


def structure(schedule):
    """Slot-by-slot ``(pn, sorted children)`` pairs."""
    return [sorted((t.pn, tuple(sorted(t.cns))) for t in slot) for slot in schedule.slots]

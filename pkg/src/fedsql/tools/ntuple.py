"""Event-analysis test data: tables where variables are columns and each
event is a row."""

import random
from dataclasses import dataclass

from ..catalog import DataType
from ..executor import FixtureTable


@dataclass(frozen=True)
class NtupleSpec:
    n_events: int
    n_vars: int
    seed: int = 0

    def __post_init__(self):
        if self.n_events < 1 or self.n_vars < 1:
            raise ValueError("an ntuple needs at least one event and one variable")


def generate_ntuple(spec: NtupleSpec, name: str = "events") -> FixtureTable:
    """Deterministic fixture: integer `event_id` plus `v0..v{n-1}` reals,
    uniform in [0, 1), reproducible from the seed."""
    rng = random.Random(spec.seed)
    columns = [("event_id", DataType.INTEGER)]
    columns += [("v%d" % i, DataType.REAL) for i in range(spec.n_vars)]
    rows = [
        [event_id] + [rng.random() for _ in range(spec.n_vars)]
        for event_id in range(1, spec.n_events + 1)
    ]
    return FixtureTable(name, columns, rows)

"""Interface erosion on square-tiled surfaces."""

from .dynamics import (ErosionEvent, PoissonClocks, RoundRobin, RunResult,
                       ScriptedSteps, Simulation, next_event_time, run,
                       single_event, walk_until_crossing)
from .energy import discrete_energy, green_matrix
from .interface import Interface, boundary_walk, remove_slits, winding_interior
from .io import (SNAPSHOT_SCHEMA, dumps_json, event_log_csv, from_snapshot,
                 to_snapshot)
from .state import (FREE, ErosionState, Source, check_invariants, from_cells,
                    init_circles)

__all__ = [
    "ErosionEvent", "PoissonClocks", "RoundRobin", "RunResult", "ScriptedSteps",
    "Simulation", "next_event_time", "run", "single_event", "walk_until_crossing",
    "discrete_energy", "green_matrix", "Interface", "boundary_walk", "remove_slits",
    "winding_interior", "SNAPSHOT_SCHEMA", "dumps_json", "event_log_csv",
    "from_snapshot", "to_snapshot", "FREE", "ErosionState", "Source",
    "check_invariants", "from_cells", "init_circles",
]

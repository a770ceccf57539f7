"""Metaplectic qutrit state synthesis over the Eisenstein integers."""

from __future__ import annotations

import json
from importlib import resources

from .eisenstein import OMEGA, EisensteinInt, euclid_div, gcd
from .enumerate import EnumStats, brute_force_enumerate, em_feasible, ip_enumerate
from .geometry import (
    Candidate,
    Meniscus,
    ScaledLatticeBasis,
    TwoLevelState,
    distance,
    embed,
    enclosing_polytope,
    in_meniscus,
    iota,
)
from .householder import decompose_su3
from .norm_solver import NormOutcome, Status, k_feasible, solve
from .p9 import approximate_phi, p9_emulation_report, projected_lattice_basis, table1_fixtures
from .polytope import RationalPolytope
from .search import (
    ApproxResult,
    BudgetExhaustedError,
    Mode,
    SearchConfig,
    SearchException,
    approximate_state,
    candidate_order,
    reflection_budget,
)

__version__ = "0.1.0"


def load_schema(name: str) -> dict:
    """A bundled JSON schema, e.g. ``load_schema("approx_result")``."""
    text = resources.files(__name__).joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


__all__ = [
    "OMEGA",
    "ApproxResult",
    "BudgetExhaustedError",
    "Candidate",
    "EisensteinInt",
    "EnumStats",
    "Meniscus",
    "Mode",
    "NormOutcome",
    "RationalPolytope",
    "ScaledLatticeBasis",
    "SearchConfig",
    "SearchException",
    "Status",
    "TwoLevelState",
    "approximate_phi",
    "approximate_state",
    "brute_force_enumerate",
    "candidate_order",
    "decompose_su3",
    "distance",
    "em_feasible",
    "embed",
    "enclosing_polytope",
    "euclid_div",
    "gcd",
    "in_meniscus",
    "iota",
    "ip_enumerate",
    "k_feasible",
    "load_schema",
    "p9_emulation_report",
    "projected_lattice_basis",
    "reflection_budget",
    "solve",
    "table1_fixtures",
]

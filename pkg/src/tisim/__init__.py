"""Offer and confirmation waves through beam-splitter networks, checked against the Born rule."""

from .amplitude import (
    BRA,
    KET,
    TOL,
    VACUUM,
    AtomState,
    BasisLabel,
    StateVector,
    dagger,
    inner,
    label,
    render,
    spin_basis_transform,
    tensor,
)
from .builtins import list_builtins, load_builtin
from .elements import AtomInteraction, BeamSplitter, DualSource, Mirror, Relabel, dual_source_prepare
from .engine import (
    born_probability,
    component_sum_check,
    full_confirmation_check,
    outcomes,
    ti_probability,
    transaction_report,
)
from .lang import parse_scenario, serialize
from .network import (
    AbsorberConfig,
    ContingentScenario,
    Scenario,
    Stage,
    propagate_confirmation,
    propagate_offer,
    run_contingent,
    validate,
)

__version__ = "0.1.0"

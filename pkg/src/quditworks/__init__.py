"""Dense simulation of qudit teleportation, cloning and entanglement broadcasting."""

from .broadcast import (BroadcastInput, SeparabilityRegion, broadcast_conditions,
                        broadcast_fidelity, local_broadcast, nonlocal_entangled_clone,
                        telebroadcast_run)
from .cloner import (HeisenbergMachine, apply_cloner, clone_fidelities, closed_form_clones,
                     gamma_from_beta, optimal_machine, werner_fidelity)
from .errors import QuditError
from .linalg import (DensityOperator, QuditRegister, fidelity, partial_trace,
                     partial_transpose_check, tensor, trace_distance)
from .teleclone import build_telecloning_channel, run_telecloning
from .teleport import EncodingBasis, entanglement_cost, run_many_to_many
from .weyl import bell_measurement, bell_state, error_operator, recovery_operator

__version__ = "0.1.0"

__all__ = [
    "BroadcastInput", "DensityOperator", "EncodingBasis", "HeisenbergMachine", "QuditError",
    "QuditRegister", "SeparabilityRegion", "apply_cloner", "bell_measurement", "bell_state",
    "broadcast_conditions", "broadcast_fidelity", "build_telecloning_channel",
    "clone_fidelities", "closed_form_clones", "entanglement_cost", "error_operator",
    "fidelity", "gamma_from_beta", "local_broadcast", "nonlocal_entangled_clone",
    "optimal_machine", "partial_trace", "partial_transpose_check", "recovery_operator",
    "run_many_to_many", "run_telecloning", "telebroadcast_run", "tensor", "trace_distance",
    "werner_fidelity",
]

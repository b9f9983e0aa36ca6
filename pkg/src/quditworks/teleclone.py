"""Asymmetric telecloning of qudits.

Alice holds ``A`` of the channel ``(1/sqrt d) sum_j |j>_A |phi_j>_{BCD}``,
where ``|phi_j>`` are the optimal cloner's basis states. After her Bell
measurement the receivers each apply a single-qudit correction and end up
holding exactly the output of the cloner.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cloner import (CLONE_LABELS, HeisenbergMachine, apply_cloner, machine_basis_matrix,
                     optimal_machine)
from .linalg import DensityOperator, QuditRegister, trace_distance
from .teleport import EncodingBasis, ProtocolTranscript, run_many_to_many
from .weyl import recovery_operator


@dataclass(frozen=True, eq=False)
class TelecloningChannel:
    d: int
    machine: HeisenbergMachine
    state: QuditRegister


def telecloning_basis(machine: HeisenbergMachine) -> EncodingBasis:
    d = machine.d
    return EncodingBasis(d, machine_basis_matrix(machine), (d, d, d),
                         phi_labels=CLONE_LABELS)


def build_telecloning_channel(d: int, p: float) -> TelecloningChannel:
    machine = optimal_machine(d, p)
    phi = machine_basis_matrix(machine)
    amps = sum(np.kron(np.eye(d)[j], phi[j]) for j in range(d)) / math.sqrt(d)
    return TelecloningChannel(d, machine,
                              QuditRegister(("A",) + CLONE_LABELS, (d,) * 4, amps))


def lruo_factors(d: int, m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-qudit corrections for Bob, Charlie and Daniel.

    Bob and Charlie apply ``sum_j w^{jn}|j><j+m|``; Daniel applies the same
    shift with the conjugate phase.
    """
    v = recovery_operator(d, m, n)
    return v, v, recovery_operator(d, m, (-n) % d)


def telecloning_lruo(d: int, m: int, n: int) -> np.ndarray:
    """``V^B (x) V^C (x) V^D`` as a ``d**3 x d**3`` matrix."""
    vb, vc, vd = lruo_factors(d, m, n)
    return np.kron(np.kron(vb, vc), vd)


class TelecloneOutcome(NamedTuple):
    rho_B: DensityOperator
    rho_C: DensityOperator
    rho_D: DensityOperator
    transcript: ProtocolTranscript
    final: QuditRegister


def _psi_amplitudes(psi, d: int) -> np.ndarray:
    amps = psi.amplitudes if isinstance(psi, QuditRegister) else np.asarray(psi, dtype=complex)
    return amps.reshape(-1)


def run_telecloning(d: int, p: float, psi, mode: str = "enumerate", seed=None):
    """Teleclone ``psi`` to Bob and Charlie.

    Returns a list of :class:`TelecloneOutcome` (one per Bell outcome) in
    ``"enumerate"`` mode, or a single outcome in ``"sample"`` mode. Each
    transcript's ``fidelity`` is the overlap with the directly cloned state.
    """
    machine = optimal_machine(d, p)
    alpha = _psi_amplitudes(psi, d)
    basis = telecloning_basis(machine)

    def correction(m, n_list):
        return telecloning_lruo(d, m, n_list[0])

    runs = run_many_to_many(d, 1, 3, alpha, basis, mode, seed, correction=correction)
    wrap = lambda fr: TelecloneOutcome(fr[0].reduced("B"), fr[0].reduced("C"),
                                       fr[0].reduced("D"), fr[1], fr[0])
    if mode == "sample":
        return wrap(runs)
    return [wrap(r) for r in runs]


def max_deviation_from_direct(d: int, p: float, psi) -> float:
    """Largest trace distance between telecloned and directly cloned B/C states."""
    direct = apply_cloner(optimal_machine(d, p), _psi_amplitudes(psi, d))
    worst = 0.0
    for out in run_telecloning(d, p, psi):
        worst = max(worst, trace_distance(out.rho_B, direct.rho_B),
                    trace_distance(out.rho_C, direct.rho_C))
    return worst

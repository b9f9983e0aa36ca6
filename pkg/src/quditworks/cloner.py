"""Asymmetric Heisenberg cloning machines for qudits.

A machine is fixed by a ``d x d`` coefficient matrix ``beta``. The first
clone ``B`` leaves through the Heisenberg channel with probabilities
``|beta_{m,n}|**2``; the second clone ``C`` through the channel with
probabilities ``|gamma_{m,n}|**2``, where ``gamma`` is a discrete Fourier
transform of ``beta``. Output registers are ordered ``(B, C, D)``: clone 1,
clone 2, ancilla.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import NormalizationError, ParameterError, ShapeError
from .linalg import NORM_TOL, DensityOperator, QuditRegister
from .weyl import error_operator

CLONE_LABELS = ("B", "C", "D")


def _fourier(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * (np.outer(k, k) % d) / d)


def _checked_beta(beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=complex)
    if beta.ndim != 2 or beta.shape[0] != beta.shape[1] or beta.shape[0] < 2:
        raise ShapeError(f"beta must be a square d x d matrix with d >= 2, got {beta.shape}")
    total = np.sum(np.abs(beta) ** 2)
    if abs(total - 1.0) > NORM_TOL:
        raise NormalizationError(f"sum |beta|^2 = {total!r}, expected 1")
    return beta


def gamma_from_beta(beta) -> np.ndarray:
    """``gamma_{m,n} = (1/d) sum_{x,y} w^{nx - my} beta_{x,y}``.

    The transform is an involution, so ``gamma_from_beta`` applied to
    ``gamma`` recovers ``beta``.
    """
    beta = _checked_beta(beta)
    d = beta.shape[0]
    w = _fourier(d)
    # gamma[m, n] = sum_{x,y} conj(w)[m, y] beta[x, y] w[n, x] / d
    return np.einsum("my,xy,nx->mn", w.conj(), beta, w) / d


def b_coefficients(beta) -> np.ndarray:
    """``b_{m,r} = (1/sqrt d) sum_n beta_{m,n} w^{-rn}``."""
    beta = _checked_beta(beta)
    d = beta.shape[0]
    return beta @ _fourier(d).conj() / math.sqrt(d)


@dataclass(frozen=True, eq=False)
class HeisenbergMachine:
    """A ``1 -> 2`` Heisenberg cloner given by its ``beta`` matrix."""

    beta: np.ndarray
    d: int = field(init=False)

    def __post_init__(self):
        beta = _checked_beta(self.beta).copy()
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "d", beta.shape[0])

    @cached_property
    def gamma(self) -> np.ndarray:
        return gamma_from_beta(self.beta)

    @cached_property
    def b(self) -> np.ndarray:
        return b_coefficients(self.beta)

    def swapped(self) -> "HeisenbergMachine":
        """Machine whose ``beta`` is this machine's ``gamma``; the clones trade places."""
        return HeisenbergMachine(self.gamma)


@dataclass(frozen=True)
class OptimalMachineParams:
    """``beta_{0,0} = nu`` and every other entry ``mu`` for asymmetry ``p``."""

    d: int
    p: float

    def __post_init__(self):
        _check_p(self.p)
        if self.d < 2:
            raise ParameterError(f"dimension must be >= 2, got {self.d}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def scale(self) -> float:
        # s = nu + (d-1) mu, fixed by the normalization of beta; s > 0
        d, p, q = self.d, self.p, self.q
        return 1.0 / math.sqrt(p * p + q * q + 2 * p * q / d)

    @property
    def mu(self) -> float:
        return self.q * self.scale / self.d

    @property
    def nu(self) -> float:
        return self.p * self.scale + self.mu


def _check_p(p: float) -> None:
    if not (0.0 <= p <= 1.0) or not math.isfinite(p):
        raise ParameterError(f"asymmetry parameter p must lie in [0, 1], got {p!r}")


def optimal_machine(d: int, p: float) -> HeisenbergMachine:
    """Optimal universal asymmetric cloner; ``p = 1`` makes clone B perfect."""
    params = OptimalMachineParams(d, p)
    beta = np.full((d, d), params.mu, dtype=complex)
    beta[0, 0] = params.nu
    # renormalize away the last ulp of rounding
    beta /= np.linalg.norm(beta)
    return HeisenbergMachine(beta)


def machine_basis_states(machine: HeisenbergMachine) -> list[QuditRegister]:
    """``|phi_j> = sum_{m,r} b_{m,r} |j+m>_B |j+r>_C |j+r+m>_D`` for each ``j``."""
    d, b = machine.d, machine.b
    m, r = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    states = []
    for j in range(d):
        t = np.zeros((d, d, d), dtype=complex)
        np.add.at(t, ((j + m) % d, (j + r) % d, (j + r + m) % d), b)
        states.append(QuditRegister(CLONE_LABELS, (d, d, d), t.reshape(-1)))
    return states


def machine_basis_matrix(machine: HeisenbergMachine) -> np.ndarray:
    """The ``|phi_j>`` as rows of a ``(d, d**3)`` array."""
    return np.stack([s.amplitudes for s in machine_basis_states(machine)])


class CloneOutput(NamedTuple):
    Pi: QuditRegister
    rho_B: DensityOperator
    rho_C: DensityOperator
    rho_D: DensityOperator


def _single_qudit(psi, d: int) -> np.ndarray:
    amps = psi.amplitudes if isinstance(psi, QuditRegister) else np.asarray(psi, dtype=complex)
    if amps.shape != (d,):
        raise ShapeError(f"input must be a single qudit of dimension {d}, got shape {amps.shape}")
    if isinstance(psi, QuditRegister) and len(psi.dims) != 1:
        raise ShapeError("input must be a single-qudit register")
    if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
        raise NormalizationError("input state is not normalized")
    return amps


def apply_cloner(machine: HeisenbergMachine, psi) -> CloneOutput:
    """Clone ``psi``: returns ``|Pi> = sum_j alpha_j |phi_j>`` and its three marginals."""
    alpha = _single_qudit(psi, machine.d)
    Pi = QuditRegister(CLONE_LABELS, (machine.d,) * 3,
                       alpha @ machine_basis_matrix(machine))
    return CloneOutput(Pi, Pi.reduced("B"), Pi.reduced("C"), Pi.reduced("D"))


def heisenberg_channel(weights: np.ndarray, psi, label: str = "B") -> DensityOperator:
    """``sum_{m,n} weights[m,n] U_{m,n}|psi><psi|U_{m,n}^dagger``."""
    weights = np.asarray(weights, dtype=float)
    d = weights.shape[0]
    alpha = _single_qudit(psi, d)
    rho = np.zeros((d, d), dtype=complex)
    for m in range(d):
        for n in range(d):
            v = error_operator(d, m, n) @ alpha
            rho += weights[m, n] * np.outer(v, v.conj())
    return DensityOperator((label,), (d,), rho)


def closed_form_clones(machine: HeisenbergMachine, psi) -> tuple[DensityOperator, DensityOperator]:
    """Clone states as Heisenberg-channel mixtures weighted by ``|beta|^2`` and ``|gamma|^2``."""
    return (heisenberg_channel(np.abs(machine.beta) ** 2, psi, "B"),
            heisenberg_channel(np.abs(machine.gamma) ** 2, psi, "C"))


def clone_fidelities(d: int, p: float) -> tuple[float, float]:
    """Closed-form fidelities ``(F_B, F_C)`` of the optimal machine."""
    _check_p(p)
    q = 1.0 - p
    den = 1.0 + (d - 1) * (p * p + q * q)
    return (1.0 + (d - 1) * p * p) / den, (1.0 + (d - 1) * q * q) / den


def werner_fidelity(N: int, M: int, d: int) -> float:
    """Optimal symmetric ``N -> M`` cloning fidelity for qudits."""
    if not (1 <= N <= M) or d < 2:
        raise ParameterError(f"need 1 <= N <= M and d >= 2, got N={N}, M={M}, d={d}")
    return (N * (d + M - 1) + M) / (M * (d + N))


def fidelity_sum_profile(d: int, p_grid: Sequence[float]) -> list[tuple[float, float]]:
    """``(p, F_B + F_C)`` for each grid value."""
    p_grid = list(p_grid)
    if not p_grid:
        raise ParameterError("empty p grid")
    out = []
    for p in p_grid:
        _check_p(p)
        out.append((float(p), 1.0 + 1.0 / (1.0 + (d - 1) * (p * p + (1 - p) ** 2))))
    return out


def profile_argmax(profile: Sequence[tuple[float, float]]) -> float:
    """Grid point of the maximal sum; ties go to the point nearest 1/2."""
    best = max(v for _, v in profile)
    winners = [p for p, v in profile if v >= best - 1e-15]
    return min(winners, key=lambda p: abs(p - 0.5))

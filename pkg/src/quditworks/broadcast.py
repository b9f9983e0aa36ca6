"""Broadcasting of entanglement with asymmetric cloners.

Alice and Bob share ``alpha|00> + beta|11>`` on particles 1 and 2 and each
run the optimal ``d=2`` asymmetric cloner: particle 1 (or 2) becomes the
first clone, blank 3 (or 4) the second clone and 5 (or 6) the ancilla. Odd
labels are Alice's, even labels Bob's. The nonlocal pairs are written with
Alice's qubit first: ``rho_14`` on ``(1, 4)`` and ``rho_23`` on ``(3, 2)``.

The nonlocal variant instead clones the pair as one ququart with the
``d=4`` machine, using the level map ``|ab> -> 2a + b``.

Telebroadcasting distributes the locally broadcast six-qubit state to six
receivers ``B1..B6`` with the many-to-many protocol (two senders).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Real
from typing import NamedTuple, Optional

import numpy as np

from .cloner import apply_cloner, clone_fidelities, machine_basis_matrix, optimal_machine
from .errors import ParameterError
from .linalg import (DensityOperator, QuditRegister, SeparabilityReport, fidelity,
                     partial_transpose_check)
from .teleport import EncodingBasis, ProtocolTranscript, run_many_to_many

BOUNDARY_BAND = 1e-6
SIX = tuple(str(i) for i in range(1, 7))
RECEIVERS = tuple(f"B{i}" for i in range(1, 7))

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class BroadcastInput:
    """Real amplitude ``alpha`` of ``alpha|00> + beta|11>`` and cloner asymmetry ``p``."""

    alpha: float
    p: float

    def __post_init__(self):
        if not isinstance(self.alpha, Real) or not isinstance(self.p, Real):
            raise ParameterError("alpha and p must be real numbers")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")

    @classmethod
    def from_alpha_sq(cls, alpha_sq: float, p: float) -> "BroadcastInput":
        if not isinstance(alpha_sq, Real) or not 0.0 <= alpha_sq <= 1.0:
            raise ParameterError(f"alpha^2 must lie in [0, 1], got {alpha_sq!r}")
        return cls(math.sqrt(alpha_sq), p)

    @property
    def beta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.alpha ** 2))

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def alpha_sq(self) -> float:
        return self.alpha ** 2

    def pair_state(self, labels=("1", "2")) -> QuditRegister:
        return QuditRegister(tuple(labels), (2, 2), [self.alpha, 0, 0, self.beta])


@dataclass(frozen=True)
class SeparabilityRegion:
    """An ``alpha^2`` interval at fixed ``p``, and the ``p`` range where such intervals exist.

    ``alpha_sq_low``/``alpha_sq_high`` are ``None`` when the region is empty.
    """

    alpha_sq_low: Optional[float]
    alpha_sq_high: Optional[float]
    p_low: float
    p_high: float
    kind: str

    @property
    def empty(self) -> bool:
        return self.alpha_sq_low is None

    def contains(self, alpha_sq: float) -> bool:
        return not self.empty and self.alpha_sq_low <= alpha_sq <= self.alpha_sq_high

    def contains_region(self, other: "SeparabilityRegion", slack: float = 0.0) -> bool:
        if other.empty:
            return True
        return (not self.empty and self.alpha_sq_low <= other.alpha_sq_low + slack
                and other.alpha_sq_high <= self.alpha_sq_high + slack)


def _interval(c: float) -> Optional[tuple[float, float]]:
    """Solutions of ``a(1-a) >= c`` in ``[0, 1]``."""
    disc = 1.0 - 4.0 * c
    if not math.isfinite(c) or disc < 0:
        return None
    r = math.sqrt(disc)
    return 0.5 * (1.0 - r), 0.5 * (1.0 + r)


# ---------------------------------------------------------------------------
# local broadcasting
# ---------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _six_qubit_code(p: float) -> np.ndarray:
    phi = machine_basis_matrix(optimal_machine(2, p)).real
    out = []
    for j in range(2):
        # (1,3,5) x (2,4,6) -> (1,...,6)
        t = np.kron(phi[j], phi[j]).reshape((2,) * 6)
        out.append(np.transpose(t, (0, 3, 1, 4, 2, 5)).reshape(-1))
    arr = np.stack(out)
    arr.setflags(write=False)
    return arr


def six_qubit_code(p: float) -> np.ndarray:
    """Rows ``|phi_0>``, ``|phi_1>`` = ``U(x)U |jj>`` on qubits ``1..6``."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    return _six_qubit_code(float(p))


class LocalBroadcast(NamedTuple):
    Pi_prime: QuditRegister
    rho_13: DensityOperator
    rho_24: DensityOperator
    rho_14: DensityOperator
    rho_23: DensityOperator


def local_broadcast(inp: BroadcastInput) -> LocalBroadcast:
    code = six_qubit_code(inp.p)
    Pi = QuditRegister(SIX, (2,) * 6, inp.alpha * code[0] + inp.beta * code[1])
    return LocalBroadcast(Pi, Pi.reduced(("1", "3")), Pi.reduced(("2", "4")),
                          Pi.reduced(("1", "4")), Pi.reduced(("2", "3")).permute(("3", "2")))


def _proj(i: int, j: int) -> np.ndarray:
    m = np.zeros((4, 4))
    m[i, j] = 1.0
    return m


def closed_form_local(inp: BroadcastInput) -> np.ndarray:
    """``rho_13 = rho_24`` from the analytic expansion (basis 00, 01, 10, 11)."""
    a2, b2, p, q = inp.alpha_sq, inp.beta ** 2, inp.p, inp.q
    n = 1 + p * p + q * q
    rho = (a2 * n * _proj(0, 0) + b2 * n * _proj(3, 3)
           + (p*p*q*q + b2*q**4 + b2*q*q + a2*p**4 + a2*p*p) * _proj(1, 1)
           + (p*p*q*q + b2*p**4 + b2*p*p + a2*q**4 + a2*q*q) * _proj(2, 2)
           + (p*q + p**3*q + p*q**3) * (_proj(1, 2) + _proj(2, 1)))
    return rho / n ** 2


def _nonlocal(inp: BroadcastInput, swap: bool) -> np.ndarray:
    a2, b2, p, q = inp.alpha_sq, inp.beta ** 2, inp.p, inp.q
    ab = inp.alpha * inp.beta
    n = 1 + p * p + q * q
    u = b2*q**4 + b2*q*q + a2*p**4 + a2*p*p
    v = b2*p**4 + b2*p*p + a2*q**4 + a2*q*q
    if swap:
        u, v = v, u
    rho = ((p*p*q*q + a2*n) * _proj(0, 0) + (p*p*q*q + b2*n) * _proj(3, 3)
           + 4*p*q*ab * (_proj(0, 3) + _proj(3, 0)) + u * _proj(1, 1) + v * _proj(2, 2))
    return rho / n ** 2


def closed_form_rho14(inp: BroadcastInput) -> np.ndarray:
    return _nonlocal(inp, swap=False)


def closed_form_rho23(inp: BroadcastInput) -> np.ndarray:
    return _nonlocal(inp, swap=True)


def local_margin(inp: BroadcastInput) -> float:
    """``alpha^2 beta^2 - p^2 q^2``; the local pairs are separable iff it is ``>= 0``."""
    return inp.alpha_sq * inp.beta ** 2 - (inp.p * inp.q) ** 2


def nonlocal_polynomial(inp: BroadcastInput) -> float:
    """Determinant-type condition; the nonlocal pairs are entangled iff it is ``<= 0``."""
    a2, b2, p, q = inp.alpha_sq, inp.beta ** 2, inp.p, inp.q
    u = b2*p**4 + b2*p*p + a2*q**4 + a2*q*q
    v = b2*q**4 + b2*q*q + a2*p**4 + a2*p*p
    return u * v - 16 * a2 * b2 * p * p * q * q


def lambda_param(p: float) -> float:
    """Threshold on ``alpha^2 beta^2`` above which the nonlocal pairs are entangled.

    Returns ``inf`` when no threshold exists (the pairs stay separable).
    """
    q = 1.0 - p
    num = p**4*q**4 + p*p*q**4 + p**4*q*q + p*p*q*q
    den = (2*p**4*q**4 + 2*p**4*q*q + 2*p*p*q**4 - q**8 - 2*q**6 - q**4
           - p**8 - 2*p**6 - p**4 + 18*p*p*q*q)
    if den <= 0:
        return math.inf
    return num / den


def broadcast_p_range() -> tuple[float, float]:
    """Asymmetries for which broadcasting works."""
    r = math.sqrt(-9.0 + 2.0 * math.sqrt(21.0))
    return 0.5 * (1.0 - r), 0.5 * (1.0 + r)


def local_region(p: float) -> SeparabilityRegion:
    lo, hi = broadcast_p_range()
    iv = _interval((p * (1.0 - p)) ** 2)
    return SeparabilityRegion(*(iv or (None, None)), lo, hi, "local-separable")


def nonlocal_region(p: float) -> SeparabilityRegion:
    lo, hi = broadcast_p_range()
    iv = _interval(lambda_param(p))
    return SeparabilityRegion(*(iv or (None, None)), lo, hi, "nonlocal-inseparable")


def _verdict(margin: float, sign: int) -> Optional[bool]:
    """Closed-form PPT verdict, or ``None`` inside the boundary band."""
    if abs(margin) <= BOUNDARY_BAND:
        return None
    return sign * margin > 0


def local_ppt_closed_form(inp: BroadcastInput) -> Optional[bool]:
    return _verdict(local_margin(inp), +1)


def nonlocal_ppt_closed_form(inp: BroadcastInput) -> Optional[bool]:
    """PPT verdict for ``rho_14`` from the ``lambda`` interval.

    ``None`` when the point lies in the boundary band of the underlying
    polynomial.
    """
    if abs(nonlocal_polynomial(inp)) <= BOUNDARY_BAND:
        return None
    return not nonlocal_region(inp.p).contains(inp.alpha_sq)


class BroadcastConditions(NamedTuple):
    local_sep: tuple[SeparabilityReport, SeparabilityReport]
    nonlocal_insep: tuple[SeparabilityReport, SeparabilityReport]
    regions: tuple[SeparabilityRegion, SeparabilityRegion]

    @property
    def broadcast(self) -> bool:
        """Local pairs separable and nonlocal pairs entangled (numeric verdicts)."""
        return (all(r.ppt for r in self.local_sep)
                and not any(r.ppt for r in self.nonlocal_insep))


def broadcast_conditions(inp: BroadcastInput, tolerance: float = 1e-10) -> BroadcastConditions:
    out = local_broadcast(inp)
    loc = local_ppt_closed_form(inp)
    nl = nonlocal_ppt_closed_form(inp)
    return BroadcastConditions(
        (partial_transpose_check(out.rho_13, "3", tolerance, closed_form_verdict=loc),
         partial_transpose_check(out.rho_24, "4", tolerance, closed_form_verdict=loc)),
        (partial_transpose_check(out.rho_14, "4", tolerance, closed_form_verdict=nl),
         partial_transpose_check(out.rho_23, "3", tolerance, closed_form_verdict=nl)),
        (local_region(inp.p), nonlocal_region(inp.p)))


def broadcast_fidelity(inp: BroadcastInput) -> float:
    """Closed-form fidelity of ``rho_14`` (and ``rho_23``) with the input pair."""
    a2, b2, p, q = inp.alpha_sq, inp.beta ** 2, inp.p, inp.q
    n = 1 + p * p + q * q
    return (p*p*q*q / n**2 + (a2*a2 + b2*b2) / n + 8*a2*b2*p*q / n**2)


def simulated_broadcast_fidelity(inp: BroadcastInput) -> tuple[float, float]:
    out = local_broadcast(inp)
    return (fidelity(inp.pair_state(("1", "4")), out.rho_14),
            fidelity(inp.pair_state(("3", "2")), out.rho_23))


def scaled_form_reduction(p: float) -> float:
    """Isotropic weight ``pq/(1-pq)^2`` of ``rho_14`` for a maximally entangled input."""
    lo, hi = broadcast_p_range()
    if not lo <= p <= hi:
        raise ParameterError(f"p={p!r} is outside the broadcastable range [{lo}, {hi}]")
    return p * (1 - p) / (1 - p * (1 - p)) ** 2


def scaled_form_residual(inp: BroadcastInput) -> float:
    """Frobenius distance of ``rho_14`` from ``eta|psi><psi| + (1-eta) I/4``."""
    eta = inp.p * inp.q / (1 - inp.p * inp.q) ** 2
    psi = inp.pair_state().amplitudes
    target = eta * np.outer(psi, psi.conj()) + (1 - eta) * np.eye(4) / 4
    return float(np.linalg.norm(local_broadcast(inp).rho_14.matrix - target))


# ---------------------------------------------------------------------------
# nonlocal cloning of the pair as one ququart
# ---------------------------------------------------------------------------

def nonlocal_p_range() -> tuple[float, float]:
    return 1.0 / 3.0, 2.0 / 3.0


def mu_params(p: float) -> tuple[float, float]:
    """Thresholds on ``alpha^2 beta^2`` for entanglement of clone 1 and clone 2."""
    q = 1.0 - p
    mu1 = q**4 / (4 * p * p * (p + 1) ** 2) if p > 0 else math.inf
    mu2 = p**4 / (4 * q * q * (q + 1) ** 2) if q > 0 else math.inf
    return mu1, mu2


def nonlocal_clone_regions(p: float) -> tuple[SeparabilityRegion, SeparabilityRegion]:
    lo, hi = nonlocal_p_range()
    return tuple(SeparabilityRegion(*(_interval(mu) or (None, None)), lo, hi,
                                    f"nonlocal-clone-{j}")
                 for j, mu in enumerate(mu_params(p), start=1))


def nonlocal_interval(p: float) -> SeparabilityRegion:
    """The ``alpha^2`` range quoted for the nonlocal cloner at asymmetry ``p``.

    For ``p < 1/2`` this is clone 2's entanglement region, otherwise clone 1's.
    """
    lo, hi = nonlocal_p_range()
    if not lo <= p <= hi:
        raise ParameterError(f"p={p!r} is outside [{lo}, {hi}]")
    r1, r2 = nonlocal_clone_regions(p)
    return r2 if p < 0.5 else r1


def closed_form_nonlocal_clones(inp: BroadcastInput) -> tuple[np.ndarray, np.ndarray]:
    p, q = inp.p, inp.q
    psi = inp.pair_state().amplitudes
    proj = np.outer(psi, psi)
    n = 1 + 3 * (p * p + q * q)
    return (((1 - q*q + 3*p*p) * proj + q*q * np.eye(4)) / n,
            ((1 - p*p + 3*q*q) * proj + p*p * np.eye(4)) / n)


class NonlocalClone(NamedTuple):
    rho_1: DensityOperator
    rho_2: DensityOperator
    regions: tuple[SeparabilityRegion, SeparabilityRegion]
    fidelities: tuple[float, float]
    closed_fidelities: tuple[float, float]


def nonlocal_entangled_clone(inp: BroadcastInput) -> NonlocalClone:
    ququart = np.array([inp.alpha, 0, 0, inp.beta], dtype=complex)
    out = apply_cloner(optimal_machine(4, inp.p), ququart)
    rho_1 = DensityOperator(("1a", "1b"), (2, 2), out.rho_B.matrix)
    rho_2 = DensityOperator(("2a", "2b"), (2, 2), out.rho_C.matrix)
    return NonlocalClone(
        rho_1, rho_2, nonlocal_clone_regions(inp.p),
        (fidelity(inp.pair_state(("1a", "1b")), rho_1),
         fidelity(inp.pair_state(("2a", "2b")), rho_2)),
        clone_fidelities(4, inp.p))


# ---------------------------------------------------------------------------
# telebroadcasting
# ---------------------------------------------------------------------------

def _product(*factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def ubip_factors(m: int, n1: int, n2: int, as_printed: bool = False) -> tuple:
    """Single-qubit factors of the receivers' correction on ``B1..B6``.

    Odd receivers hold Alice's clone pair and ancilla, even receivers Bob's.
    The printed table lists ``I`` on Bob's qubits for ``m=1`` with odd
    ``n1+n2``; that operator does not map the code correctly, because the
    shift must act on both halves. ``as_printed=True`` reproduces it for
    comparison.
    """
    if m not in (0, 1) or n1 not in (0, 1) or n2 not in (0, 1):
        raise ParameterError(f"qubit indices must be 0 or 1, got {(m, n1, n2)}")
    odd = (n1 + n2) % 2
    if m == 0:
        return (SZ, I2) * 3 if odd else (I2,) * 6
    if not odd:
        return (SX,) * 6
    return (SX @ SZ, I2 if as_printed else SX) * 3


def ubip_operator(m: int, n1: int, n2: int, as_printed: bool = False) -> np.ndarray:
    return _product(*ubip_factors(m, n1, n2, as_printed))


def telebroadcast_basis(p: float) -> EncodingBasis:
    return EncodingBasis(2, six_qubit_code(p), (2,) * 6, phi_labels=RECEIVERS)


class TelebroadcastOutcome(NamedTuple):
    final: QuditRegister
    rho_B1B4: DensityOperator
    rho_B2B3: DensityOperator
    transcript: ProtocolTranscript


def telebroadcast_run(inp: BroadcastInput, mode: str = "enumerate", seed=None,
                      as_printed: bool = False):
    """Two senders ``A1, A2`` telebroadcast their pair to ``B1..B6``.

    Each transcript's ``fidelity`` is the overlap with the locally broadcast
    six-qubit state.
    """
    basis = telebroadcast_basis(inp.p)

    def correction(m, n_list):
        return ubip_operator(m, n_list[0], n_list[1], as_printed)

    runs = run_many_to_many(2, 2, 6, [inp.alpha, inp.beta], basis, mode, seed,
                            correction=correction)
    wrap = lambda r: TelebroadcastOutcome(
        r[0], r[0].reduced(("B1", "B4")), r[0].reduced(("B2", "B3")).permute(("B3", "B2")), r[1])
    if mode == "sample":
        return wrap(runs)
    return [wrap(r) for r in runs]

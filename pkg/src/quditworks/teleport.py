"""Many-to-many teleportation, with one-to-one and one-to-many as special cases.

``N`` senders share ``sum_k alpha_k |psi_k>^{(x)N}``. The channel is
``(1/sqrt d) sum_j |pi_j>^{(x)N} |phi_j>`` shared with ``M`` receivers. Each
sender measures (input, channel half) in the generalized Bell basis; all
senders see a common ``m`` and the receivers undo the outcome with one
recovery unitary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import BasisError, NormalizationError, ParameterError
from .linalg import NORM_TOL, QuditRegister, fidelity, tensor
from .weyl import BellIndex, bell_measurement

Correction = Callable[[int, Sequence[int]], np.ndarray]


def _family(states, d: int, dims, name: str) -> np.ndarray:
    arr = np.asarray(states, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != d:
        raise BasisError(f"{name} must hold {d} states, got shape {arr.shape}")
    if arr.shape[1] != math.prod(dims):
        raise BasisError(f"{name} states have length {arr.shape[1]}, dims {tuple(dims)}")
    gram = arr.conj() @ arr.T
    if np.max(np.abs(gram - np.eye(d))) > 1e-10:
        raise BasisError(f"{name} family is not orthonormal")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EncodingBasis:
    """Basis families used by the protocol.

    Attributes:
        d: Dimension of the encoded system.
        phi: ``(d, D)`` receiver code states, one per row.
        phi_dims: Per-particle dimensions of a receiver code state.
        psi, pi: Sender input and channel families (computational if omitted).
        phi_labels: Receiver labels; ``B1..BM`` by default.
    """

    d: int
    phi: np.ndarray
    phi_dims: tuple
    psi: Optional[np.ndarray] = None
    psi_dims: Optional[tuple] = None
    pi: Optional[np.ndarray] = None
    pi_dims: Optional[tuple] = None
    phi_labels: Optional[tuple] = None

    def __post_init__(self):
        d = self.d
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("phi_dims", tuple(self.phi_dims))
        set_("phi", _family(self.phi, d, self.phi_dims, "phi"))
        for fam, dims in (("psi", "psi_dims"), ("pi", "pi_dims")):
            if getattr(self, fam) is None:
                set_(fam, np.eye(d, dtype=complex))
                set_(dims, (d,))
            set_(dims, tuple(getattr(self, dims)))
            set_(fam, _family(getattr(self, fam), d, getattr(self, dims), fam))
        if self.phi_labels is None:
            set_("phi_labels", tuple(f"B{r + 1}" for r in range(len(self.phi_dims))))
        elif len(self.phi_labels) != len(self.phi_dims):
            raise BasisError("one receiver label per receiver particle is required")
        set_("phi_labels", tuple(self.phi_labels))

    @property
    def carriers(self) -> dict:
        """Particle counts of the sender input, sender channel and receiver states."""
        return {"psi": len(self.psi_dims), "pi": len(self.pi_dims), "phi": len(self.phi_dims)}

    @classmethod
    def computational(cls, d: int) -> "EncodingBasis":
        return cls(d, np.eye(d), (d,))

    @classmethod
    def repetition(cls, d: int, M: int) -> "EncodingBasis":
        """Receiver states ``|j>^{(x)M}`` (GHZ-like code)."""
        phi = np.zeros((d, d ** M), dtype=complex)
        for j in range(d):
            phi[j, np.ravel_multi_index((j,) * M, (d,) * M)] = 1.0
        return cls(d, phi, (d,) * M)


@dataclass(frozen=True)
class ProtocolTranscript:
    """Per-sender outcomes, their joint probability and the correction applied."""

    outcomes: tuple
    joint_probability: float
    correction: str
    fidelity: float = float("nan")

    @property
    def common_m(self) -> Optional[int]:
        ms = {o.m for o in self.outcomes}
        return ms.pop() if len(ms) == 1 else None


def _group_labels(prefix: str, i: int, count: int) -> tuple:
    if count == 1:
        return (f"{prefix}{i}",)
    return tuple(f"{prefix}{i}.{t}" for t in range(count))


def sender_labels(N: int, basis: EncodingBasis) -> list[tuple[tuple, tuple]]:
    """``[(input group, channel group), ...]`` for senders ``1..N``."""
    c = basis.carriers
    return [(_group_labels("A", i, c["psi"]), _group_labels("A'", i, c["pi"]))
            for i in range(1, N + 1)]


def _validate(d: int, N: int, M: int, basis: EncodingBasis) -> None:
    if d < 2 or N < 1 or M < 1:
        raise ParameterError(f"need d >= 2, N >= 1, M >= 1; got d={d}, N={N}, M={M}")
    if basis.d != d:
        raise BasisError(f"basis is for d={basis.d}, protocol for d={d}")
    if len(basis.phi_dims) != M:
        raise BasisError(f"receiver code uses {len(basis.phi_dims)} particles, M={M}")


def build_mtm_channel(d: int, N: int, M: int, basis: EncodingBasis) -> QuditRegister:
    """``(1/sqrt d) sum_j |pi_j>_{A'_1}...|pi_j>_{A'_N} |phi_j>_{B}``."""
    _validate(d, N, M, basis)
    labels = tuple(l for _, ch in sender_labels(N, basis) for l in ch) + basis.phi_labels
    dims = basis.pi_dims * N + basis.phi_dims
    amps = 0
    for j in range(d):
        v = basis.pi[j]
        for _ in range(N - 1):
            v = np.kron(v, basis.pi[j])
        amps = amps + np.kron(v, basis.phi[j])
    return QuditRegister(labels, dims, np.asarray(amps) / math.sqrt(d))


def _checked_alpha(alpha, d: int) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex).reshape(-1)
    if alpha.size != d:
        raise BasisError(f"need {d} coefficients, got {alpha.size}")
    norm = np.linalg.norm(alpha)
    if abs(norm - 1.0) > NORM_TOL:
        raise NormalizationError(f"coefficient vector has norm {norm!r}")
    return alpha


def sender_input(alpha, N: int, basis: EncodingBasis) -> QuditRegister:
    """``sum_k alpha_k |psi_k>_{A_1}...|psi_k>_{A_N}``."""
    alpha = _checked_alpha(alpha, basis.d)
    labels = tuple(l for inp, _ in sender_labels(N, basis) for l in inp)
    amps = 0
    for k in range(basis.d):
        v = basis.psi[k]
        for _ in range(N - 1):
            v = np.kron(v, basis.psi[k])
        amps = amps + alpha[k] * v
    return QuditRegister(labels, basis.psi_dims * N, amps)


def target_state(alpha, basis: EncodingBasis) -> QuditRegister:
    """``sum_j alpha_j |phi_j>``, the state the receivers should end up with."""
    alpha = _checked_alpha(alpha, basis.d)
    return QuditRegister(basis.phi_labels, basis.phi_dims, alpha @ basis.phi)


def lruo_operator(m: int, n_list: Sequence[int], basis: EncodingBasis) -> np.ndarray:
    """Recovery unitary ``V|phi_k> = w^{k(n_1+...+n_N)} |phi_{k-m}>``.

    Outside the code space the operator is the identity.
    """
    d = basis.d
    if not 0 <= m < d or any(not 0 <= n < d for n in n_list):
        raise ParameterError(f"indices out of range for d={d}: m={m}, n={list(n_list)}")
    s = sum(n_list) % d
    k = np.arange(d)
    phase = np.exp(2j * np.pi * ((k * s) % d) / d)
    phi = basis.phi
    code = phi[(k - m) % d].T @ (phase[:, None] * phi.conj())
    return code + np.eye(phi.shape[1]) - phi.T @ phi.conj()


def _describe(m: int, n_list: Sequence[int]) -> str:
    return f"V[m={m}; n={','.join(str(n) for n in n_list)}]"


def _branches(state: QuditRegister, pairs, basis: EncodingBasis, prefix=(), prob=1.0):
    """Depth-first enumeration of every sender-outcome sequence.

    Yields ``(outcomes, joint_probability, post_state)``; impossible branches
    carry ``post_state=None`` and are not expanded further.
    """
    if not pairs:
        yield prefix, prob, state
        return
    outs = bell_measurement(state, pairs[0], "enumerate", families=(basis.psi, basis.pi))
    for o in outs:
        if o.post_state is None:
            yield from _dead(prefix + (o.index,), prob * o.probability, pairs[1:], basis.d)
        else:
            yield from _branches(o.post_state, pairs[1:], basis, prefix + (o.index,),
                                 prob * o.probability)


def _dead(prefix, prob, pairs, d):
    if not pairs:
        yield prefix, prob, None
        return
    for m in range(d):
        for n in range(d):
            yield from _dead(prefix + (BellIndex(m, n, d),), 0.0, pairs[1:], d)


def _full_state(d, N, M, alpha, basis) -> QuditRegister:
    _validate(d, N, M, basis)
    return tensor(sender_input(alpha, N, basis), build_mtm_channel(d, N, M, basis))


def outcome_distribution(d: int, N: int, M: int, alpha, basis: EncodingBasis) -> dict:
    """Joint probability of every ``d**(2N)`` sender-outcome sequence."""
    state = _full_state(d, N, M, alpha, basis)
    pairs = sender_labels(N, basis)
    return {tuple((o.m, o.n) for o in outs): p
            for outs, p, _ in _branches(state, pairs, basis)}


def _finish(post: QuditRegister, outs, prob, basis, target, correction):
    m = outs[0].m
    n_list = [o.n for o in outs]
    if correction is None:
        v = lruo_operator(m, n_list, basis)
    else:
        v = correction(m, n_list)
    post = post.permute(basis.phi_labels)
    final = QuditRegister(post.labels, post.dims, v @ post.amplitudes)
    return final, ProtocolTranscript(tuple(outs), float(prob), _describe(m, n_list),
                                     fidelity(target, final))


def run_many_to_many(d: int, N: int, M: int, alpha, basis: EncodingBasis,
                     mode: str = "enumerate",
                     seed: Union[int, np.random.Generator, None] = None,
                     correction: Optional[Correction] = None):
    """Run the protocol.

    Args:
        d, N, M: Dimension, number of senders, number of receiver particles.
        alpha: Encoded coefficients, normalized.
        basis: Encoding families.
        mode: ``"enumerate"`` returns ``[(final, transcript), ...]`` over every
            outcome of nonzero probability; ``"sample"`` returns a single
            ``(final, transcript)`` drawn with ``seed``.
        correction: Optional ``(m, n_list) -> matrix`` replacing the generic
            recovery operator, e.g. an explicit local product.
    """
    state = _full_state(d, N, M, alpha, basis)
    target = target_state(alpha, basis)
    pairs = sender_labels(N, basis)
    if mode == "enumerate":
        return [_finish(post, outs, p, basis, target, correction)
                for outs, p, post in _branches(state, pairs, basis) if post is not None]
    if mode == "sample":
        if seed is None:
            raise ValueError("sample mode needs a seed or generator")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        outs, prob = [], 1.0
        for pair in pairs:
            o = bell_measurement(state, pair, "sample", rng, families=(basis.psi, basis.pi))
            outs.append(o.index)
            prob *= o.probability
            state = o.post_state
        return _finish(state, outs, prob, basis, target, correction)
    raise ValueError(f"unknown mode {mode!r}")


def entanglement_cost(d: int, N: int, M: int) -> tuple[float, float]:
    """Entanglement in bits: ``M`` separate teleportations vs the shared channel."""
    if d < 2 or M < 1:
        raise ParameterError(f"need d >= 2 and M >= 1, got d={d}, M={M}")
    return M * math.log2(d), math.log2(d)

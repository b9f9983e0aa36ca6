"""Generalized Bell states, Weyl-Heisenberg operators and Bell measurements.

Sampling uses :func:`numpy.random.default_rng`, i.e. the PCG64 bit
generator seeded with the caller's 64-bit integer seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

from .errors import BellIndexError, LabelError, MeasurementError, ShapeError
from .linalg import QuditRegister, _as_label_tuple

# outcomes with probability at or below this are treated as impossible
ZERO_PROBABILITY = 1e-13


class BellIndex(NamedTuple):
    m: int
    n: int
    d: int

    @classmethod
    def checked(cls, d: int, m: int, n: int) -> "BellIndex":
        _check_index(d, m, n)
        return cls(int(m), int(n), int(d))

    @property
    def flat(self) -> int:
        return self.m * self.d + self.n


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    """One branch of a Bell measurement.

    ``post_state`` is ``None`` for outcomes of (numerically) zero probability.
    """

    index: BellIndex
    probability: float
    post_state: Optional[QuditRegister]


def _check_index(d: int, m: int, n: int) -> None:
    if d < 2:
        raise BellIndexError(f"dimension must be >= 2, got {d}")
    if not (0 <= m < d and 0 <= n < d):
        raise BellIndexError(f"indices ({m}, {n}) out of range for d={d}")


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def _phase(d: int, k) -> np.ndarray:
    # exact integer reduction before exponentiating keeps phases accurate
    return np.exp(2j * np.pi * (np.asarray(k) % d) / d)


def error_operator(d: int, m: int, n: int) -> np.ndarray:
    """``U_{m,n} = sum_k w^{kn} |k+m><k|``; the Pauli matrices for ``d=2``."""
    _check_index(d, m, n)
    k = np.arange(d)
    u = np.zeros((d, d), dtype=complex)
    u[(k + m) % d, k] = _phase(d, k * n)
    return u


def recovery_operator(d: int, m: int, n: int) -> np.ndarray:
    """``V_{m;n} = sum_j w^{jn} |j><j+m|``, Bob's correction after outcome (m, n)."""
    _check_index(d, m, n)
    j = np.arange(d)
    v = np.zeros((d, d), dtype=complex)
    v[j, (j + m) % d] = _phase(d, j * n)
    return v


def bell_vector(d: int, m: int, n: int, first: Optional[np.ndarray] = None,
                second: Optional[np.ndarray] = None) -> np.ndarray:
    """Amplitudes of ``(1/sqrt d) sum_k w^{kn} |f_k>|s_{k+m}>``.

    ``first`` and ``second`` are optional ``(d, D)`` arrays whose rows are
    orthonormal basis families; the computational basis is the default.
    """
    _check_index(d, m, n)
    first = np.eye(d) if first is None else np.asarray(first)
    second = np.eye(d) if second is None else np.asarray(second)
    k = np.arange(d)
    coeff = _phase(d, k * n) / math.sqrt(d)
    return np.einsum("k,ka,kb->ab", coeff, first, second[(k + m) % d]).reshape(-1)


def bell_vectors(d: int, first: Optional[np.ndarray] = None,
                 second: Optional[np.ndarray] = None) -> np.ndarray:
    """All ``d**2`` Bell vectors as rows, row ``m*d + n`` holding ``Phi_{m,n}``."""
    return np.stack([bell_vector(d, m, n, first, second)
                     for m in range(d) for n in range(d)])


@lru_cache(maxsize=None)
def _computational_bell_vectors(d: int) -> np.ndarray:
    v = bell_vectors(d)
    v.setflags(write=False)
    return v


def bell_state(d: int, m: int, n: int, labels=("A", "B")) -> QuditRegister:
    """Two-qudit generalized Bell state ``|Phi_{m,n}>``."""
    return QuditRegister(_as_label_tuple(labels), (d, d), bell_vector(d, m, n))


PairSpec = Union[str, Iterable[str]]


def _project(state: QuditRegister, pair, vectors: np.ndarray):
    a, b = (_as_label_tuple(p) for p in pair)
    measured = a + b
    if len(set(measured)) != len(measured):
        raise LabelError(f"measured groups {pair} overlap")
    axes = [state.index(lab) for lab in measured]
    rest = [i for i in range(len(state.labels)) if i not in axes]
    da = math.prod(state.dims[state.index(l)] for l in a)
    db = math.prod(state.dims[state.index(l)] for l in b)
    if vectors.shape[1] != da * db:
        raise ShapeError(f"measurement vectors of length {vectors.shape[1]} "
                         f"do not fit subsystems of size {da}x{db}")
    mat = np.transpose(state.as_tensor(), axes + rest).reshape(da * db, -1)
    branches = vectors.conj() @ mat
    rest_labels = tuple(state.labels[i] for i in rest)
    rest_dims = tuple(state.dims[i] for i in rest)
    return branches, rest_labels, rest_dims


def bell_measurement(state: QuditRegister, pair, mode: str = "enumerate",
                     seed: Union[int, np.random.Generator, None] = None, *,
                     families: Optional[tuple] = None):
    """Measure two subsystems (or subsystem groups) in the Bell basis.

    Args:
        state: The register to measure.
        pair: ``(a, b)`` where each entry is a label or a tuple of labels.
            The first tensor factor of the Bell vector acts on ``a``.
        mode: ``"enumerate"`` returns every outcome in ``(m, n)`` order;
            ``"sample"`` draws one outcome using ``seed``.
        seed: Integer seed or an existing generator, for ``"sample"``.
        families: Optional ``(first, second)`` basis families for the
            generalized Bell basis ``sum_k w^{kn}|psi_k>|pi_{k+m}>``; each is a
            ``(d, D)`` array. Without it both sides must be single qudits of
            equal dimension.

    The measured subsystems are contracted away, so each post-state lives on
    the remaining labels only.
    """
    a, b = (_as_label_tuple(p) for p in pair)
    if families is None:
        if len(a) != 1 or len(b) != 1:
            raise ShapeError("grouped subsystems need explicit basis families")
        da, db = state.dims[state.index(a[0])], state.dims[state.index(b[0])]
        if da != db:
            raise ShapeError(f"Bell measurement needs equal dimensions, got {da} and {db}")
        d = da
        vectors = _computational_bell_vectors(d)
    else:
        first, second = (np.asarray(f) for f in families)
        if first.shape[0] != second.shape[0]:
            raise ShapeError("basis families must have the same number of states")
        d = first.shape[0]
        vectors = bell_vectors(d, first, second)
    branches, rest_labels, rest_dims = _project(state, (a, b), vectors)
    probs = np.sum(np.abs(branches) ** 2, axis=1)

    def outcome(flat: int) -> MeasurementOutcome:
        idx = BellIndex(flat // d, flat % d, d)
        p = float(probs[flat])
        if p <= ZERO_PROBABILITY:
            return MeasurementOutcome(idx, p, None)
        post = QuditRegister(rest_labels, rest_dims, branches[flat] / math.sqrt(p))
        return MeasurementOutcome(idx, p, post)

    if mode == "enumerate":
        return [outcome(i) for i in range(d * d)]
    if mode == "sample":
        if seed is None:
            raise ValueError("sample mode needs a seed or generator")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        p = probs / probs.sum()
        return outcome(int(rng.choice(d * d, p=p)))
    raise ValueError(f"unknown mode {mode!r}")


def project_bell(state: QuditRegister, pair, m: int, n: int, *,
                 families: Optional[tuple] = None) -> MeasurementOutcome:
    """Single branch of a Bell measurement; raises if it cannot occur."""
    outcomes = bell_measurement(state, pair, "enumerate", families=families)
    d = outcomes[0].index.d
    _check_index(d, m, n)
    out = outcomes[m * d + n]
    if out.post_state is None:
        raise MeasurementError(f"outcome ({m}, {n}) has probability {out.probability!r}")
    return out

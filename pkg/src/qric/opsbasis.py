"""Weyl phase-shift operators, generalized Bell/GHZ states, symmetric
clone-basis states, and stabilizer-group elements.

Conventions (fixed throughout the package):
  U^{m,n} = sum_k omega^{km} |k+n mod d><k|        (phase index m, shift n)
  R^{m,n} = sum_j omega^{jm} |j><j+n mod d|        (= adjoint of U^{-m,n})
  |B^{m,n}> = (I (x) U^{m,n}) (1/sqrt d) sum_j |jj>
so the first Bell index is the phase index and the shift acts on the
second listed qudit of the pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import statealg
from .errors import DimensionError, LabelError
from .statealg import DensityOperator, PureState, Register


def omega_power(d: int, k: int) -> complex:
    """exp(2*pi*i*k/d), computed directly per power to avoid drift."""
    return complex(np.exp(2j * np.pi * (k % d) / d))


@dataclass(frozen=True)
class WeylOp:
    """Symbolic single-qudit Weyl operator."""

    d: int
    m: int
    n: int
    kind: str = "U"  # "U" or "R"

    def __post_init__(self):
        if self.kind not in ("U", "R"):
            raise DimensionError(f"kind must be 'U' or 'R', got {self.kind!r}")
        if not (0 <= self.m < self.d and 0 <= self.n < self.d):
            raise DimensionError(f"indices ({self.m},{self.n}) out of range for d={self.d}")


def weyl_u(d: int, m: int, n: int) -> np.ndarray:
    """U^{m,n} as a dense d x d matrix (indices taken mod d)."""
    M = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        M[(k + n) % d, k] = omega_power(d, k * m)
    return M


def weyl_r(d: int, m: int, n: int) -> np.ndarray:
    """R^{m,n} = (U^{-m,n})^dagger."""
    M = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        M[j, (j + n) % d] = omega_power(d, j * m)
    return M


def weyl_matrix(op: WeylOp) -> np.ndarray:
    if op.kind == "U":
        return weyl_u(op.d, op.m, op.n)
    return weyl_r(op.d, op.m, op.n)


def bell_vector(d: int, m: int, n: int) -> np.ndarray:
    """Amplitudes of |B^{m,n}> over the pair's d^2 basis strings."""
    if not (0 <= m < d and 0 <= n < d):
        raise DimensionError(f"Bell indices ({m},{n}) out of range for d={d}")
    v = np.zeros(d * d, dtype=np.complex128)
    for j in range(d):
        v[j * d + (j + n) % d] = omega_power(d, j * m)
    return v / np.sqrt(d)


def bell_state(d: int, m: int, n: int, labels: tuple[str, str]) -> PureState:
    """|B^{m,n}> on an ordered label pair; the shift acts on labels[1]."""
    if len(labels) != 2:
        raise LabelError("bell_state needs exactly two labels")
    return PureState(Register(d, tuple(labels)), bell_vector(d, m, n), validate=False)


def ghz_vector(d: int, legs: int, m: int, n: int) -> np.ndarray:
    """|G^{m,n}> amplitudes: leg 0 untouched, legs 1..L shifted by n, leg 1 phased."""
    if legs < 2:
        raise DimensionError("GHZ needs at least two legs")
    if not (0 <= m < d and 0 <= n < d):
        raise DimensionError(f"GHZ indices ({m},{n}) out of range for d={d}")
    v = np.zeros(d**legs, dtype=np.complex128)
    for j in range(d):
        idx = j
        shifted = (j + n) % d
        for _ in range(legs - 1):
            idx = idx * d + shifted
        v[idx] = omega_power(d, j * m)
    return v / np.sqrt(d)


def ghz_state(d: int, labels, m: int = 0, n: int = 0) -> PureState:
    """Generalized GHZ state (I (x) U^{m,n} (x) U^{0,n} (x) ...) |G^{0,0}>."""
    labels = tuple(labels)
    return PureState(Register(d, labels), ghz_vector(d, len(labels), m, n), validate=False)


@dataclass(frozen=True)
class OccupationVector:
    """Particle counts per basis state; sum is the particle number N."""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise DimensionError("occupation counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)


def symmetric_vector(d: int, counts) -> np.ndarray:
    """Equal-weight superposition over all orderings of the occupation multiset."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != d:
        raise DimensionError(f"need {d} occupation counts, got {len(counts)}")
    N = sum(counts)
    if N < 1:
        raise DimensionError("occupation must place at least one particle")
    letters = []
    for j, c in enumerate(counts):
        letters.extend([j] * c)
    v = np.zeros(d**N, dtype=np.complex128)
    seen = 0
    for p in set(itertools.permutations(letters)):
        idx = 0
        for x in p:
            idx = idx * d + x
        v[idx] = 1.0
        seen += 1
    return v / np.sqrt(seen)


def symmetric_state(d: int, occupation: OccupationVector | tuple, labels) -> PureState:
    counts = occupation.counts if isinstance(occupation, OccupationVector) else tuple(occupation)
    labels = tuple(labels)
    if sum(counts) != len(labels):
        raise DimensionError("occupation total must match the number of labels")
    return PureState(Register(d, labels), symmetric_vector(d, counts), validate=False)


def alpha_coeff(d: int, N: int, n_j: int) -> float:
    """sqrt(n_j d! (N-1)! / (N+d-1)!) - weight of the n_j-occupied clone branch."""
    if not 1 <= n_j <= N:
        raise DimensionError(f"n_j must be in 1..{N}, got {n_j}")
    return float(np.sqrt(n_j * factorial(d) * factorial(N - 1) / factorial(N + d - 1)))


def phi_vector(d: int, N: int, j: int) -> np.ndarray:
    """Clone-basis state amplitudes on (clones 1..N, ancillas A_1..A_{N-1}).

    Sum over occupation vectors with n_j >= 1 of alpha_{n_j} times the
    symmetric clone state tensored with the one-fewer-j ancilla state.
    """
    if not 0 <= j < d:
        raise DimensionError(f"j={j} out of range for d={d}")
    out = np.zeros(d ** (2 * N - 1), dtype=np.complex128)
    for occ in itertools.product(range(N + 1), repeat=d):
        if sum(occ) != N or occ[j] < 1:
            continue
        anc = list(occ)
        anc[j] -= 1
        clone = symmetric_vector(d, occ)
        if N > 1:
            part = np.kron(clone, symmetric_vector(d, anc))
        else:
            part = clone
        out += alpha_coeff(d, N, occ[j]) * part
    return out


def clone_labels(N: int) -> tuple[str, ...]:
    """Labels of the (2N-1)-qudit clone register: 1..N then A_1..A_{N-1}."""
    return tuple(str(s) for s in range(1, N + 1)) + tuple(f"A_{s}" for s in range(1, N))


def phi_state(d: int, N: int, j: int) -> PureState:
    return PureState(Register(d, clone_labels(N)), phi_vector(d, N, j), validate=False)


# ---------------------------------------------------------------------------
# stabilizer elements

@dataclass(frozen=True)
class StabilizerElement:
    """S^{mn}: U^{-m,n} on minus_labels, U^{m,n} on plus_labels."""

    d: int
    m: int
    n: int
    minus_labels: tuple[str, ...]
    plus_labels: tuple[str, ...]

    def __post_init__(self):
        if set(self.minus_labels) & set(self.plus_labels):
            raise LabelError("stabilizer group assignment overlaps")

    def apply(self, state: PureState) -> PureState:
        out = state
        for l in self.minus_labels:
            out = statealg.apply_local(out, weyl_u(self.d, -self.m, self.n), l)
        for l in self.plus_labels:
            out = statealg.apply_local(out, weyl_u(self.d, self.m, self.n), l)
        return out


def stabilizer_expectation(
    state: PureState | DensityOperator,
    m: int,
    n: int,
    minus_labels,
    plus_labels,
) -> complex:
    """tr(S^{mn} rho) with U^{-m,n} on minus_labels and U^{m,n} on plus_labels."""
    minus_labels = tuple(minus_labels)
    plus_labels = tuple(plus_labels)
    labels = set(minus_labels) | set(plus_labels)
    if labels != set(state.register.labels):
        raise LabelError("group assignment must cover the register")
    if isinstance(state, PureState):
        elem = StabilizerElement(state.d, m % state.d, n % state.d, minus_labels, plus_labels)
        return statealg.overlap(state, elem.apply(state))
    # density: apply the local unitaries on the left and take the trace
    d = state.d
    reg = state.register
    t = state.mat.reshape([d] * (2 * reg.n))
    for l in minus_labels + plus_labels:
        op = weyl_u(d, -m if l in minus_labels else m, n)
        pos = reg.position(l)
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [pos])), 0, pos)
    return complex(np.trace(t.reshape(state.dim, state.dim)))

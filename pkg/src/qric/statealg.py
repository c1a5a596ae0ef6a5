"""Labeled multi-qudit pure states and density operators.

Dense representations only. Basis indexing is big-endian: the register's
first label is the most significant dit, so the amplitude index of dit
string (j_0, ..., j_{n-1}) is sum_k j_k * d**(n-1-k).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, LabelError, NormalizationError, SizeGuardError

TOL = 1e-10
PURE_DIM_LIMIT = 2**22
DENSITY_DIM_LIMIT = 2**12


def _pure_limit() -> int:
    env = os.environ.get("QRIC_MAX_DIM")
    return int(env) if env else PURE_DIM_LIMIT


def _density_limit() -> int:
    env = os.environ.get("QRIC_MAX_DIM")
    return int(env) if env else DENSITY_DIM_LIMIT


@dataclass(frozen=True)
class Register:
    """An ordered collection of same-dimension qudits with unique labels."""

    d: int
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.d < 2:
            raise DimensionError(f"qudit dimension must be >= 2, got {self.d}")
        if not isinstance(self.labels, tuple):
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) == 0:
            raise LabelError("register needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise LabelError(f"duplicate labels in {self.labels}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.d**self.n

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"label {label!r} not in register {self.labels}") from None

    def positions(self, labels) -> list[int]:
        return [self.position(l) for l in labels]

    def stride(self, label: str) -> int:
        return self.d ** (self.n - 1 - self.position(label))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class PureState:
    """Immutable dense amplitude vector over a labeled register."""

    def __init__(self, register: Register, amps: np.ndarray, *, validate: bool = True):
        if register.dim > _pure_limit():
            raise SizeGuardError(
                f"pure state dim {register.dim} exceeds guard {_pure_limit()} "
                "(set QRIC_MAX_DIM to override)"
            )
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1).copy()
        if amps.shape[0] != register.dim:
            raise DimensionError(f"expected {register.dim} amplitudes, got {amps.shape[0]}")
        if validate:
            nrm = float(np.sum(np.abs(amps) ** 2))
            if abs(nrm - 1.0) > TOL:
                raise NormalizationError(f"state norm^2 = {nrm}, not 1")
        self.register = register
        self.amps = _freeze(amps)

    @property
    def d(self) -> int:
        return self.register.d

    @property
    def dim(self) -> int:
        return self.register.dim

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def amplitude(self, dits) -> complex:
        """Amplitude of the basis string (one dit per register label, in order)."""
        idx = 0
        for j in dits:
            idx = idx * self.d + int(j)
        return complex(self.amps[idx])

    def to_density(self) -> "DensityOperator":
        reg = self.register
        if reg.dim > _density_limit():
            raise SizeGuardError(
                f"density dim {reg.dim} exceeds guard {_density_limit()}"
            )
        return DensityOperator(reg, np.outer(self.amps, self.amps.conj()), validate=False)

    def __repr__(self):
        return f"PureState(d={self.d}, labels={self.register.labels})"


class DensityOperator:
    """Immutable dense Hermitian trace-one operator over a labeled register."""

    def __init__(self, register: Register, mat: np.ndarray, *, validate: bool = True):
        if register.dim > _density_limit():
            raise SizeGuardError(
                f"density dim {register.dim} exceeds guard {_density_limit()} "
                "(set QRIC_MAX_DIM to override)"
            )
        mat = np.asarray(mat, dtype=np.complex128).copy()
        if mat.shape != (register.dim, register.dim):
            raise DimensionError(f"expected {register.dim}x{register.dim} matrix")
        if validate:
            if np.abs(mat - mat.conj().T).max() > TOL:
                raise NormalizationError("matrix not Hermitian")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TOL:
                raise NormalizationError(f"trace = {tr}, not 1")
            if np.linalg.eigvalsh(mat).min() < -TOL:
                raise NormalizationError("matrix has negative eigenvalues")
        self.register = register
        self.mat = _freeze(mat)

    @property
    def d(self) -> int:
        return self.register.d

    @property
    def dim(self) -> int:
        return self.register.dim

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def __repr__(self):
        return f"DensityOperator(d={self.d}, labels={self.register.labels})"


@dataclass(frozen=True)
class Cut:
    """Bipartition of a register's labels."""

    groupA: tuple[str, ...]
    groupB: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "groupA", tuple(self.groupA))
        object.__setattr__(self, "groupB", tuple(self.groupB))
        if not self.groupA or not self.groupB:
            raise LabelError("both cut groups must be non-empty")
        if set(self.groupA) & set(self.groupB):
            raise LabelError("cut groups overlap")

    def validate(self, register: Register):
        if set(self.groupA) | set(self.groupB) != set(register.labels):
            raise LabelError("cut does not cover the register")


# ---------------------------------------------------------------------------
# constructors

def basis_state(d: int, dits, labels) -> PureState:
    """Computational-basis state |dits> on the given labels."""
    reg = Register(d, tuple(labels))
    if len(dits) != reg.n:
        raise DimensionError("one dit per label required")
    amps = np.zeros(reg.dim, dtype=np.complex128)
    idx = 0
    for j in dits:
        if not 0 <= int(j) < d:
            raise DimensionError(f"dit {j} out of range for d={d}")
        idx = idx * d + int(j)
    amps[idx] = 1.0
    return PureState(reg, amps, validate=False)


def from_amplitudes(d: int, amps, labels, *, validate: bool = True) -> PureState:
    return PureState(Register(d, tuple(labels)), np.asarray(amps), validate=validate)


def random_qudit(d: int, rng: np.random.Generator, label: str = "t") -> PureState:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return PureState(Register(d, (label,)), v, validate=False)


# ---------------------------------------------------------------------------
# operations

def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker composition; registers must share d and have disjoint labels."""
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    if set(a.register.labels) & set(b.register.labels):
        raise LabelError("tensor factors share labels")
    reg = Register(a.d, a.register.labels + b.register.labels)
    return PureState(reg, np.kron(a.amps, b.amps), validate=False)


def tensor_many(states) -> PureState:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def apply_local(state: PureState, op: np.ndarray, target: str, *, check_unitary: bool = False) -> PureState:
    """Apply a single-qudit operator on `target` via stride arithmetic."""
    op = np.asarray(op, dtype=np.complex128)
    d = state.d
    if op.shape != (d, d):
        raise DimensionError(f"operator must be {d}x{d}, got {op.shape}")
    if check_unitary and np.abs(op @ op.conj().T - np.eye(d)).max() > TOL:
        raise DimensionError("operator is not unitary")
    stride = state.register.stride(target)
    out = kernels.apply_single(state.amps, op, d, stride)
    return PureState(state.register, out, validate=False)


def apply_local_density(rho: DensityOperator, op: np.ndarray, target: str) -> DensityOperator:
    """op rho op^dagger on a single qudit."""
    op = np.asarray(op, dtype=np.complex128)
    d = rho.d
    if op.shape != (d, d):
        raise DimensionError(f"operator must be {d}x{d}")
    n = rho.register.n
    pos = rho.register.position(target)
    t = rho.mat.reshape([d] * (2 * n))
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [pos])), 0, pos)
    t = np.moveaxis(np.tensordot(op.conj(), t, axes=([1], [n + pos])), 0, n + pos)
    return DensityOperator(rho.register, t.reshape(rho.dim, rho.dim), validate=False)


def project_pair(state: PureState, pair_amps: np.ndarray, pair: tuple[str, str]) -> np.ndarray:
    """<pair_amps|_{pair} state: unnormalized residual with the pair removed.

    `pair_amps` indexes (first label, second label) big-endian.
    """
    d = state.d
    p1, p2 = state.register.position(pair[0]), state.register.position(pair[1])
    if p1 == p2:
        raise LabelError("pair labels must be distinct")
    P = np.asarray(pair_amps, dtype=np.complex128).reshape(d, d)
    if p1 > p2:  # kernel wants the left qudit first
        P = P.T
        p1, p2 = p2, p1
    s1 = d ** (state.register.n - 1 - p1)
    s2 = d ** (state.register.n - 1 - p2)
    return kernels.project_pair(state.amps, P.reshape(-1), d, s1, s2, state.dim // (d * d))


def drop_labels(register: Register, labels) -> Register:
    keep = tuple(l for l in register.labels if l not in set(labels))
    return Register(register.d, keep)


def partial_trace(state: PureState | DensityOperator, keep) -> DensityOperator:
    """Reduced density operator on `keep` (kept labels stay in register order)."""
    keep = list(keep)
    if not keep:
        raise LabelError("keep must be non-empty")
    reg = state.register
    keep_pos = sorted(reg.positions(keep))
    out_pos = [p for p in range(reg.n) if p not in keep_pos]
    d = reg.d
    dk = d ** len(keep_pos)
    new_reg = Register(d, tuple(reg.labels[p] for p in keep_pos))
    if new_reg.dim > _density_limit():
        raise SizeGuardError(f"reduced density dim {new_reg.dim} exceeds guard")
    if isinstance(state, PureState):
        t = state.amps.reshape([d] * reg.n)
        t = np.transpose(t, keep_pos + out_pos).reshape(dk, -1)
        return DensityOperator(new_reg, t @ t.conj().T, validate=False)
    t = state.mat.reshape([d] * (2 * reg.n))
    perm = keep_pos + out_pos
    t = np.transpose(t, perm + [reg.n + p for p in perm])
    dt = d ** len(out_pos)
    red = np.einsum("iaja->ij", t.reshape(dk, dt, dk, dt))
    return DensityOperator(new_reg, red, validate=False)


def reorder(state: PureState, new_order) -> PureState:
    """Permute the register to the given label order (same label set)."""
    reg = state.register
    new_order = tuple(new_order)
    if set(new_order) != set(reg.labels) or len(new_order) != reg.n:
        raise LabelError("new_order must be a permutation of the register labels")
    perm = reg.positions(new_order)
    t = state.amps.reshape([reg.d] * reg.n)
    return PureState(Register(reg.d, new_order), np.transpose(t, perm).reshape(-1), validate=False)


def reorder_density(rho: DensityOperator, new_order) -> DensityOperator:
    reg = rho.register
    new_order = tuple(new_order)
    if set(new_order) != set(reg.labels) or len(new_order) != reg.n:
        raise LabelError("new_order must be a permutation of the register labels")
    perm = reg.positions(new_order)
    n = reg.n
    t = rho.mat.reshape([reg.d] * (2 * n))
    t = np.transpose(t, perm + [n + p for p in perm])
    return DensityOperator(Register(reg.d, new_order), t.reshape(reg.dim, reg.dim), validate=False)


def rename(state: PureState, mapping: dict) -> PureState:
    """Rename labels in place (positions and amplitudes untouched)."""
    new_labels = tuple(mapping.get(l, l) for l in state.register.labels)
    return PureState(Register(state.d, new_labels), state.amps, validate=False)


def permute(state: PureState | DensityOperator, relabeling: dict):
    """Move subsystem contents according to a bijective relabeling.

    The output register keeps the input's label sequence; the content that
    was at label l ends up at label relabeling[l]. If the relabeling maps
    onto fresh label names, the renamed register is returned as-is.
    """
    reg = state.register
    unknown = set(relabeling) - set(reg.labels)
    if unknown:
        raise LabelError(f"relabeling of unknown labels: {sorted(unknown)}")
    values = [relabeling.get(l, l) for l in reg.labels]
    if len(set(values)) != len(values):
        raise LabelError("relabeling is not a bijection")
    new_labels = tuple(values)
    if isinstance(state, PureState):
        renamed = PureState(Register(reg.d, new_labels), state.amps, validate=False)
        if set(new_labels) == set(reg.labels):
            return reorder(renamed, reg.labels)
        return renamed
    renamed = DensityOperator(Register(reg.d, new_labels), state.mat, validate=False)
    if set(new_labels) == set(reg.labels):
        return reorder_density(renamed, reg.labels)
    return renamed


def overlap(a: PureState, b: PureState) -> complex:
    """<a|b>; registers must carry the same labels (order is aligned)."""
    if a.d != b.d:
        raise DimensionError("dimension mismatch")
    if set(a.register.labels) != set(b.register.labels):
        raise LabelError("registers carry different labels")
    if a.register.labels != b.register.labels:
        b = reorder(b, a.register.labels)
    return complex(np.vdot(a.amps, b.amps))


def equal_up_to_phase(a: PureState, b: PureState, tol: float = TOL) -> bool:
    return abs(overlap(a, b)) >= 1.0 - tol


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2."""
    return abs(overlap(a, b)) ** 2


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Entropy in bits."""
    vals = np.linalg.eigvalsh(rho.mat)
    vals = vals[vals > 1e-14]
    return float(-np.sum(vals * np.log2(vals)))


def entropy_across_cut(state: PureState, cut: Cut) -> float:
    """Von Neumann entropy (bits) of the reduced state on cut.groupB."""
    cut.validate(state.register)
    return von_neumann_entropy(partial_trace(state, cut.groupB))


def dense_local_operator(register: Register, op: np.ndarray, target: str) -> np.ndarray:
    """Full dim x dim embedding of a single-qudit operator (test oracle only)."""
    d = register.d
    mats = [np.eye(d, dtype=np.complex128)] * register.n
    mats[register.position(target)] = np.asarray(op, dtype=np.complex128)
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out

"""Entangled resource states for telecloning and RIC.

RIC channels live on the 2N labels A'_1, 1', A'_2, 2', ..., A'_N, N'.
Bell pairs (A'_s, s') for s < N are built in the canonical orientation;
the last pair is built on the ordered pair (N', A'_N), which is what makes
the plain outcome-sum corrections deterministic for every d (for d = 2 the
two orientations agree projector-by-projector). Tuple constraints are
sum of odd-position indices = u and sum of even-position indices = v, both
mod d, over the as-built pair indices.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import opsbasis, statealg
from .errors import ConstraintError, DimensionError, SizeGuardError
from .statealg import DensityOperator, PureState, Register

WEIGHT_TOL = 1e-9

KINDS = (
    "telecloning",
    "general-pure",
    "ghz",
    "beta-weighted",
    "product-bell",
    "mixed",
    "smolin-like",
)

PRESETS = ("telecloning", "ghz", "beta", "bell-product", "smolin", "mixed-uniform")


def channel_labels(N: int) -> tuple[str, ...]:
    """A'_1, 1', A'_2, 2', ..., A'_N, N' (N' is spelled <N>')."""
    out = []
    for s in range(1, N + 1):
        out += [f"A'_{s}", f"{s}'"]
    return tuple(out)


def telecloning_labels(N: int) -> tuple[str, ...]:
    return ("t'",) + opsbasis.clone_labels(N)


@dataclass(frozen=True)
class BetaVector:
    """Non-negative branch weights with sum of squares 1."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(v < 0 for v in vals):
            raise ConstraintError("beta entries must be non-negative")
        if abs(sum(v * v for v in vals) - 1.0) > statealg.TOL * len(vals) * 10:
            raise ConstraintError(f"sum beta^2 = {sum(v*v for v in vals)}, not 1")

    @property
    def d(self) -> int:
        return len(self.values)


def enumerate_constrained_tuples(d: int, N: int, u: int, v: int) -> list[tuple[int, ...]]:
    """All 2N-index tuples with sum(k_odd) = u and sum(k_even) = v mod d.

    Exactly d^(2(N-1)) tuples, in lexicographic order: the free indices are
    k_1..k_{2N-2}; the last pair is determined by the residues.
    """
    u %= d
    v %= d
    out = []
    for head in itertools.product(range(d), repeat=2 * (N - 1)):
        k_last_odd = (u - sum(head[0::2])) % d
        k_last_even = (v - sum(head[1::2])) % d
        out.append(head + (k_last_odd, k_last_even))
    out.sort()
    return out


def _check_tuple(k, d: int, N: int, u: int, v: int):
    if len(k) != 2 * N:
        raise ConstraintError(f"tuple {k} must have {2*N} entries")
    if any(not 0 <= int(x) < d for x in k):
        raise ConstraintError(f"tuple {k} has entries outside 0..{d-1}")
    if sum(k[0::2]) % d != u % d or sum(k[1::2]) % d != v % d:
        raise ConstraintError(
            f"tuple {k} violates the (u,v)=({u},{v}) residue constraints"
        )


@dataclass
class ChannelSpec:
    """Declarative channel description; `build` materializes the state.

    table entries are (tuple, weight) with weights interpreted as
    probabilities P (pure superposition uses sqrt(P)) or mixture weights C.
    """

    kind: str
    d: int
    N: int
    u: int = 0
    v: int = 0
    table: list = field(default_factory=list)
    c: tuple | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConstraintError(f"unknown channel kind {self.kind!r}")
        if self.d < 2 or self.N < 2:
            raise ConstraintError("channel needs d >= 2 and N >= 2")
        self.u %= self.d
        self.v %= self.d
        if self.c is not None:
            self.c = tuple(int(x) for x in self.c)
            _check_tuple(self.c, self.d, self.N, self.u, self.v)
        if self.table:
            norm = []
            total = 0.0
            for k, wgt in self.table:
                k = tuple(int(x) for x in k)
                _check_tuple(k, self.d, self.N, self.u, self.v)
                if wgt < 0:
                    raise ConstraintError(f"negative weight for tuple {k}")
                norm.append((k, float(wgt)))
                total += float(wgt)
            if total <= 0:
                raise ConstraintError("table weights sum to zero")
            if abs(total - 1.0) > WEIGHT_TOL:
                warnings.warn(
                    f"channel table weights sum to {total}; renormalizing", stacklevel=2
                )
            self.table = [(k, wgt / total) for k, wgt in norm]

    @property
    def is_mixed(self) -> bool:
        return self.kind in ("mixed", "smolin-like")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "d": self.d,
            "N": self.N,
            "u": self.u,
            "v": self.v,
        }
        if self.table:
            doc["table"] = [{"k": list(k), "w": wgt} for k, wgt in self.table]
        if self.c is not None:
            doc["c"] = list(self.c)
        if self.seed is not None:
            doc["seed"] = self.seed
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChannelSpec":
        doc = json.loads(text)
        table = [(tuple(e["k"]), float(e["w"])) for e in doc.get("table", [])]
        return cls(
            kind=doc["kind"],
            d=int(doc["d"]),
            N=int(doc["N"]),
            u=int(doc.get("u", 0)),
            v=int(doc.get("v", 0)),
            table=table,
            c=tuple(doc["c"]) if "c" in doc else None,
            seed=doc.get("seed"),
        )

    # -- materialization ----------------------------------------------------

    def build(self):
        """PureState for pure kinds, DensityOperator for mixed kinds."""
        if self.kind == "telecloning":
            return telecloning_channel(self.d, self.N)
        if self.kind == "ghz":
            return ghz_channel(self.d, self.N)
        if self.kind == "beta-weighted":
            return beta_weighted_channel(self.d, self.N)
        if self.kind == "product-bell":
            if self.c is None:
                raise ConstraintError("product-bell channel needs the c tuple")
            return product_bell_channel(self.d, self.N, self.c)
        if self.kind == "general-pure":
            return general_pure_channel(self)
        if self.kind == "mixed":
            return mixed_channel(self)
        return smolin_like(self.d, self.N)

    def sample(self, rng: np.random.Generator):
        """(tuple, PureState) drawn from the mixture; pure kinds return their state."""
        if self.kind == "mixed":
            return sample_mixed(self, rng)
        if self.kind == "smolin-like":
            tuples = enumerate_constrained_tuples(self.d, self.N, 0, 0)
            k = tuples[int(rng.integers(0, len(tuples)))]
            return k, product_bell_channel(self.d, self.N, k)
        state = self.build()
        return self.c, state


# ---------------------------------------------------------------------------
# constructors

def telecloning_channel(d: int, N: int) -> PureState:
    """(1/sqrt d) sum_j |j>_{t'} |phi_j> on labels t', 1..N, A_1..A_{N-1}."""
    if d < 2 or N < 2:
        raise DimensionError("telecloning channel needs d >= 2 and N >= 2")
    reg = Register(d, telecloning_labels(N))
    if reg.dim > statealg._pure_limit():
        raise SizeGuardError(f"telecloning channel dim {reg.dim} exceeds guard")
    sub = d ** (2 * N - 1)
    amps = np.zeros(d**(2 * N), dtype=np.complex128)
    for j in range(d):
        amps[j * sub:(j + 1) * sub] = opsbasis.phi_vector(d, N, j)
    return PureState(reg, amps / np.sqrt(d), validate=False)


def _pair_states(d: int, N: int, k) -> list[PureState]:
    """Bell factors for one tuple: (A'_s, s') canonical, last pair on (N', A'_N)."""
    labels = channel_labels(N)
    parts = []
    for s in range(N - 1):
        parts.append(
            opsbasis.bell_state(d, k[2 * s], k[2 * s + 1], (labels[2 * s], labels[2 * s + 1]))
        )
    parts.append(
        opsbasis.bell_state(d, k[2 * N - 2], k[2 * N - 1], (labels[2 * N - 1], labels[2 * N - 2]))
    )
    return parts


def product_bell_channel(d: int, N: int, c) -> PureState:
    """Product of N generalized Bell pairs for a fixed index tuple."""
    c = tuple(int(x) for x in c)
    if len(c) != 2 * N:
        raise ConstraintError(f"need a {2*N}-tuple, got {c}")
    if any(not 0 <= x < d for x in c):
        raise ConstraintError(f"tuple {c} out of range for d={d}")
    state = statealg.tensor_many(_pair_states(d, N, c))
    return statealg.reorder(state, channel_labels(N))


def general_pure_channel(spec: ChannelSpec) -> PureState:
    """sqrt(P)-weighted superposition of constrained Bell-product tuples."""
    if spec.kind != "general-pure":
        raise ConstraintError("spec kind must be general-pure")
    if not spec.table:
        raise ConstraintError("general-pure channel needs a non-empty table")
    out = None
    for k, p in spec.table:
        comp = product_bell_channel(spec.d, spec.N, k)
        vec = comp.amps * np.sqrt(p)
        out = vec if out is None else out + vec
    return PureState(Register(spec.d, channel_labels(spec.N)), out)


def ghz_channel(d: int, N: int) -> PureState:
    """(1/sqrt d) sum_j |j>^(2N) on the channel labels."""
    return opsbasis.ghz_state(d, channel_labels(N), 0, 0)


def beta_weighted_channel(d: int, N: int, beta: BetaVector | None = None, family=None) -> PureState:
    """Clone-decomposition channel: (1/sqrt d) sum_{x,y} beta_y Bbar_{xy} |B^{-x,-y}>.

    Bbar states come from the Appendix-A extraction of the telecloning clone
    family, transplanted onto the channel labels by s -> s', A_s -> A'_s; the
    last pair is built canonically on (A'_N, N'). This lands in the RIC-valid
    family because the transplant swaps each pair's slots.
    """
    from .protocols import extract_clone_decomposition

    if family is None:
        family = extract_clone_decomposition(d, N)
    if beta is None:
        beta = family.beta
    if beta.d != d:
        raise ConstraintError("beta length must equal d")
    mapping = {str(s): f"{s}'" for s in range(1, N)}
    mapping.update({f"A_{s}": f"A'_{s}" for s in range(1, N)})
    front_labels = channel_labels(N)[: 2 * (N - 1)]
    out = None
    for x in range(d):
        for y in range(d):
            front = statealg.permute(family.bbar[(x, y)], mapping)
            front = statealg.reorder(front, front_labels)
            last = opsbasis.bell_state(d, (-x) % d, (-y) % d, (f"A'_{N}", f"{N}'"))
            vec = beta.values[y] * np.kron(front.amps, last.amps)
            out = vec if out is None else out + vec
    out /= np.sqrt(d)
    return PureState(Register(d, channel_labels(N)), out)


def mixed_channel(spec: ChannelSpec) -> DensityOperator:
    """C-weighted mixture of Bell-product projectors (density form)."""
    if spec.kind not in ("mixed", "smolin-like"):
        raise ConstraintError("spec kind must be mixed or smolin-like")
    table = spec.table
    if spec.kind == "smolin-like" and not table:
        tuples = enumerate_constrained_tuples(spec.d, spec.N, 0, 0)
        table = [(k, 1.0 / len(tuples)) for k in tuples]
    if not table:
        raise ConstraintError("mixed channel needs a non-empty table")
    dim = spec.d ** (2 * spec.N)
    if dim > statealg._density_limit():
        raise SizeGuardError(f"mixed channel density dim {dim} exceeds guard")
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for k, cw in table:
        comp = product_bell_channel(spec.d, spec.N, k)
        mat += cw * np.outer(comp.amps, comp.amps.conj())
    return DensityOperator(Register(spec.d, channel_labels(spec.N)), mat, validate=False)


def sample_mixed(spec: ChannelSpec, rng: np.random.Generator):
    """Draw (tuple, PureState) with probability C - the purification shortcut."""
    if not spec.table:
        raise ConstraintError("mixed channel needs a non-empty table")
    weights = np.array([wgt for _, wgt in spec.table])
    idx = int(rng.choice(len(weights), p=weights / weights.sum()))
    k = spec.table[idx][0]
    return k, product_bell_channel(spec.d, spec.N, k)


def smolin_like(d: int, N: int) -> DensityOperator:
    """Uniform mixture over all u=v=0 constrained Bell-product projectors."""
    return mixed_channel(ChannelSpec(kind="smolin-like", d=d, N=N))


# ---------------------------------------------------------------------------
# presets

def preset_spec(name: str, d: int, N: int, seed: int | None = None) -> ChannelSpec:
    """Named channel presets, all with u = v = 0."""
    if name == "telecloning":
        return ChannelSpec(kind="telecloning", d=d, N=N, seed=seed)
    if name == "ghz":
        return ChannelSpec(kind="ghz", d=d, N=N, seed=seed)
    if name == "beta":
        return ChannelSpec(kind="beta-weighted", d=d, N=N, seed=seed)
    if name == "bell-product":
        return ChannelSpec(kind="product-bell", d=d, N=N, c=(0,) * (2 * N), seed=seed)
    if name == "smolin":
        return ChannelSpec(kind="smolin-like", d=d, N=N, seed=seed)
    if name == "mixed-uniform":
        tuples = enumerate_constrained_tuples(d, N, 0, 0)
        table = [(k, 1.0 / len(tuples)) for k in tuples]
        return ChannelSpec(kind="mixed", d=d, N=N, table=table, seed=seed)
    raise ConstraintError(f"unknown preset {name!r}; choose from {PRESETS}")


def load_channel(source: str, d: int, N: int, seed: int | None = None) -> ChannelSpec:
    """Resolve a preset name or a JSON file path into a ChannelSpec."""
    if source in PRESETS:
        return preset_spec(source, d, N, seed)
    try:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConstraintError(f"cannot read channel file {source!r}: {exc}") from exc
    return ChannelSpec.from_json(text)

"""LOCC protocols: 1->N telecloning, the clone-state decomposition, many-to-one
RIC over every channel kind, and the two many-to-many variants.

Measured pairs are ordered; outcomes are canonical Bell indices of that
ordered pair. The RIC plan is Bob_s: (s, s'), Charlie_s: (A'_s, A_s),
Bob_N: (N, A'_N), and Diana's corrections are the plain outcome sums
x = u'' + u' - u, y = v'' + v' - v (mod d).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from math import log2

import numpy as np

from . import channels, measurement, opsbasis, statealg
from .channels import BetaVector, ChannelSpec, channel_labels
from .errors import NormalizationError, ProtocolError, SizeGuardError
from .opsbasis import clone_labels, weyl_r, weyl_u
from .statealg import PureState, Register

BRANCH_BUDGET = 10_000
PROTOCOL_DIM_LIMIT = 2**18


def _guard_joint_dim(d: int, n_qudits: int, what: str):
    """Protocol runs cap the joint register size below the raw state guard."""
    env = os.environ.get("QRIC_MAX_DIM")
    limit = int(env) if env else PROTOCOL_DIM_LIMIT
    if d**n_qudits > limit:
        raise SizeGuardError(
            f"{what} joint dimension {d}^{n_qudits} exceeds guard {limit} "
            "(set QRIC_MAX_DIM to override)"
        )


# ---------------------------------------------------------------------------
# parties and transcripts

@dataclass(frozen=True)
class PartyRegistry:
    """Ownership map: party name -> labels held."""

    roles: dict

    def validate_partition(self, labels):
        owned = [l for ls in self.roles.values() for l in ls]
        if len(owned) != len(set(owned)):
            raise ProtocolError("registry assigns a label to two parties")
        if set(owned) != set(labels):
            raise ProtocolError("registry does not partition the register labels")

    def holder(self, label: str) -> str:
        for party, ls in self.roles.items():
            if label in ls:
                return party
        raise ProtocolError(f"no party holds {label!r}")


def default_ric_registry(N: int) -> PartyRegistry:
    roles = {}
    for s in range(1, N):
        roles[f"Bob_{s}"] = (str(s), f"{s}'")
        roles[f"Charlie_{s}"] = (f"A_{s}", f"A'_{s}")
    roles[f"Bob_{N}"] = (str(N), f"A'_{N}")
    roles["Diana"] = (f"{N}'",)
    return PartyRegistry(roles)


@dataclass
class Message:
    sender: str
    recipient: str
    m: int
    n: int
    bits: float


@dataclass
class Transcript:
    """Ordered classical-communication log of one protocol run."""

    parties: dict
    messages: list = field(default_factory=list)
    correction: tuple | None = None
    corrections: list | None = None  # per-leg, many-to-many runs only
    branch_probability: float = 1.0
    fidelity: float | None = None

    def total_bits(self) -> float:
        return sum(msg.bits for msg in self.messages)

    def to_json_dict(self) -> dict:
        doc = {
            "parties": {p: list(ls) for p, ls in self.parties.items()},
            "messages": [
                {"from": m.sender, "to": m.recipient, "m": m.m, "n": m.n, "bits": m.bits}
                for m in self.messages
            ],
            "branch_probability": self.branch_probability,
        }
        if self.correction is not None:
            doc["correction"] = {"x": self.correction[0], "y": self.correction[1]}
        if self.corrections is not None:
            doc["corrections"] = [{"x": x, "y": y} for x, y in self.corrections]
        if self.fidelity is not None:
            doc["fidelity"] = self.fidelity
        return doc


# ---------------------------------------------------------------------------
# measurement-plan execution

def _plan_sample(joint: PureState, plan, rng):
    outcomes = []
    prob = 1.0
    state = joint
    for pair in plan:
        br = measurement.gbm_sample(state, pair, rng, remove=True)
        if br.null:
            raise ProtocolError("sampled a null branch")  # pragma: no cover
        outcomes.append((br.outcome.m, br.outcome.n))
        prob *= br.outcome.probability
        state = br.post_state
    return outcomes, prob, state


def _plan_branches(joint: PureState, plan, budget=BRANCH_BUDGET, rng=None):
    """All non-null branches of the plan, depth-first.

    If the full tree exceeds `budget` leaves, the first pairs are expanded
    exhaustively and the tail is sampled once per prefix (stratified);
    returns (branches, coverage) with coverage = explored / total.
    """
    d2 = joint.d**2
    total = d2 ** len(plan)
    exhaustive_depth = len(plan)
    if total > budget:
        exhaustive_depth = 0
        while d2 ** (exhaustive_depth + 1) <= budget and exhaustive_depth < len(plan):
            exhaustive_depth += 1
        if rng is None:
            rng = np.random.default_rng(0)
    results = []

    def expand(state, idx, outs, prob):
        if idx == len(plan):
            results.append((outs, prob, state))
            return
        if idx < exhaustive_depth:
            for br in measurement.gbm_branches(state, plan[idx], remove=True):
                if br.null:
                    continue
                expand(
                    br.post_state,
                    idx + 1,
                    outs + [(br.outcome.m, br.outcome.n)],
                    prob * br.outcome.probability,
                )
        else:
            br = measurement.gbm_sample(state, plan[idx], rng, remove=True)
            expand(
                br.post_state,
                idx + 1,
                outs + [(br.outcome.m, br.outcome.n)],
                prob * br.outcome.probability,
            )

    expand(joint, 0, [], 1.0)
    coverage = 1.0 if total <= budget else len(results) / total
    return results, coverage


# ---------------------------------------------------------------------------
# telecloning

def clone_state(x, d: int, N: int) -> PureState:
    """sum_j x_j |phi_j> on labels 1..N, A_1..A_{N-1}."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.shape[0] != d:
        raise ProtocolError(f"need {d} input amplitudes, got {x.shape[0]}")
    if abs(np.sum(np.abs(x) ** 2) - 1.0) > 1e-8:
        raise NormalizationError("input amplitudes not normalized")
    amps = np.zeros(d ** (2 * N - 1), dtype=np.complex128)
    for j in range(d):
        amps += x[j] * opsbasis.phi_vector(d, N, j)
    return PureState(Register(d, clone_labels(N)), amps, validate=False)


def telecloning_registry(N: int) -> PartyRegistry:
    roles = {"Alice": ("t", "t'")}
    for s in range(1, N + 1):
        roles[f"Bob_{s}"] = (str(s),)
    for s in range(1, N):
        roles[f"Charlie_{s}"] = (f"A_{s}",)
    return PartyRegistry(roles)


def _teleclone_branch(joint, d, N, m, n, prob, correct_ancillas, registry):
    state = joint
    for s in range(1, N + 1):
        state = statealg.apply_local(state, weyl_r(d, m, n), str(s))
    if correct_ancillas:
        for s in range(1, N):
            state = statealg.apply_local(state, weyl_r(d, -m, n), f"A_{s}")
    transcript = Transcript(parties=dict(registry.roles), branch_probability=prob)
    bits = 2.0 * log2(d)
    for s in range(1, N + 1):
        transcript.messages.append(Message("Alice", f"Bob_{s}", m, n, bits))
    if correct_ancillas:
        for s in range(1, N):
            transcript.messages.append(Message("Alice", f"Charlie_{s}", m, n, bits))
    transcript.correction = (m, n)
    return state, transcript


def run_telecloning(
    input_state: PureState,
    d: int,
    N: int,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
    *,
    correct_ancillas: bool = True,
):
    """Teleclone one unknown qudit to N receivers.

    mode="sample" returns (clone-register state, Transcript); "all-branches"
    returns the list over Alice's d^2 outcomes.
    """
    if input_state.register.n != 1 or input_state.d != d:
        raise ProtocolError("input must be a single qudit of dimension d")
    _guard_joint_dim(d, 2 * N + 1, "telecloning")
    inp = statealg.permute(input_state, {input_state.register.labels[0]: "t"})
    joint = statealg.tensor(inp, channels.telecloning_channel(d, N))
    registry = telecloning_registry(N)
    if mode == "sample":
        if rng is None:
            rng = np.random.default_rng(0)
        br = measurement.gbm_sample(joint, ("t", "t'"), rng, remove=True)
        return _teleclone_branch(
            br.post_state, d, N, br.outcome.m, br.outcome.n,
            br.outcome.probability, correct_ancillas, registry,
        )
    if mode != "all-branches":
        raise ProtocolError(f"unknown mode {mode!r}")
    out = []
    for br in measurement.gbm_branches(joint, ("t", "t'"), remove=True):
        if br.null:
            continue
        out.append(
            _teleclone_branch(
                br.post_state, d, N, br.outcome.m, br.outcome.n,
                br.outcome.probability, correct_ancillas, registry,
            )
        )
    return out


# ---------------------------------------------------------------------------
# clone-state decomposition (Appendix-A extraction)

@dataclass
class CloneFamily:
    """Numerically extracted clone decomposition for one (d, N).

    lambdas[(j, n)] are unit vectors on the front register (1..N-1, A_*);
    bbar[(m, n)] are their Fourier transforms over j and carry the
    decomposition weights as their norms (mutually orthogonal, not unit).
    """

    d: int
    N: int
    beta: BetaVector
    front_labels: tuple
    lambdas: dict
    bbar: dict

    def bbar_state(self, m: int, n: int) -> PureState:
        return self.bbar[(m, n)]

    def bbar_weight(self, m: int, n: int) -> float:
        return float(np.linalg.norm(self.bbar[(m, n)].amps))


def _front_register(d: int, N: int) -> Register:
    labels = tuple(str(s) for s in range(1, N)) + tuple(f"A_{s}" for s in range(1, N))
    return Register(d, labels)


@lru_cache(maxsize=32)
def extract_clone_decomposition(d: int, N: int) -> CloneFamily:
    """Factor the last clone qudit out of every |phi_j> and Fourier-build Bbar.

    Raises ProtocolError if the reconstruction of the clone state from the
    extracted family misses by more than 1e-9 (implementation bug signal).
    """
    front = _front_register(d, N)
    half = d ** (N - 1)
    lambdas = {}
    beta = np.zeros(d)
    for j in range(d):
        block = opsbasis.phi_vector(d, N, j).reshape(half, d, half)
        for n in range(d):
            vec = block[:, (j + n) % d, :].reshape(-1)
            nrm = float(np.linalg.norm(vec))
            if j == 0:
                beta[n] = nrm
            elif abs(nrm - beta[n]) > 1e-9:
                raise ProtocolError(f"beta_{n} depends on j: {nrm} vs {beta[n]}")
            lambdas[(j, n)] = PureState(front, vec / nrm, validate=False)
    bbar = {}
    for m in range(d):
        for n in range(d):
            acc = np.zeros(half * half, dtype=np.complex128)
            for j in range(d):
                acc += opsbasis.omega_power(d, j * m) * lambdas[(j, n)].amps
            bbar[(m, n)] = PureState(front, acc / np.sqrt(d), validate=False)
    family = CloneFamily(d, N, BetaVector(tuple(beta)), front.labels, lambdas, bbar)
    rng = np.random.default_rng(1234)
    for _ in range(3):
        x = rng.normal(size=d) + 1j * rng.normal(size=d)
        x /= np.linalg.norm(x)
        dev = reconstruction_deviation(family, x)
        if dev > 1e-9:
            raise ProtocolError(f"clone reconstruction off by {dev}")
    return family


def reconstruction_deviation(family: CloneFamily, x) -> float:
    """Max amplitude deviation of clone_state(x) from its Bbar expansion."""
    d, N = family.d, family.N
    x = np.asarray(x, dtype=np.complex128)
    direct = clone_state(x, d, N)
    acc = np.zeros(d ** (2 * N - 1), dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            tail = weyl_u(d, -m, n) @ x
            acc += family.beta.values[n] * np.kron(family.bbar[(m, n)].amps, tail)
    acc /= np.sqrt(d)
    # expansion register order: (1..N-1, A_*, N) -> reorder to clone labels
    labels = family.front_labels + (str(N),)
    expanded = PureState(Register(d, labels), acc, validate=False)
    expanded = statealg.reorder(expanded, clone_labels(N))
    return float(np.abs(direct.amps - expanded.amps).max())


# ---------------------------------------------------------------------------
# many-to-one RIC

def deduce_correction(bob_charlie_outcomes, bobN_outcome, u: int, v: int, d: int):
    """Diana's correction: x = u'' + u' - u, y = v'' + v' - v (mod d)."""
    for mm, nn in list(bob_charlie_outcomes) + [bobN_outcome]:
        if not (0 <= mm < d and 0 <= nn < d):
            raise ProtocolError(f"outcome ({mm},{nn}) out of range for d={d}")
    up = sum(mm for mm, _ in bob_charlie_outcomes) % d
    vp = sum(nn for _, nn in bob_charlie_outcomes) % d
    upp, vpp = bobN_outcome
    return (upp + up - u) % d, (vpp + vp - v) % d


def ric_measurement_plan(N: int) -> list:
    plan = [(str(s), f"{s}'") for s in range(1, N)]
    plan += [(f"A'_{s}", f"A_{s}") for s in range(1, N)]
    plan.append((str(N), f"A'_{N}"))
    return plan


def _ric_transcript(registry, N, d, outcomes, prob, corr):
    transcript = Transcript(parties=dict(registry.roles), branch_probability=prob)
    bits = 2.0 * log2(d)
    senders = [f"Bob_{s}" for s in range(1, N)]
    senders += [f"Charlie_{s}" for s in range(1, N)]
    senders.append(f"Bob_{N}")
    for party, (mm, nn) in zip(senders, outcomes):
        transcript.messages.append(Message(party, "Diana", mm, nn, bits))
    transcript.correction = corr
    return transcript


def _resolve_channel(channel, rng):
    """ChannelSpec | PureState -> (pure channel state, u, v)."""
    if isinstance(channel, PureState):
        return channel, 0, 0
    if not isinstance(channel, ChannelSpec):
        raise ProtocolError("channel must be a ChannelSpec or PureState")
    if channel.is_mixed:
        if rng is None:
            rng = np.random.default_rng(channel.seed or 0)
        _, state = channel.sample(rng)
        return state, channel.u, channel.v
    state = channel.build()
    if not isinstance(state, PureState):  # pragma: no cover
        raise ProtocolError("channel did not materialize to a pure state")
    return state, channel.u, channel.v


def run_ric(
    clone: PureState,
    channel,
    registry: PartyRegistry | None = None,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
):
    """Concentrate the clone-state information onto Diana's qudit N'.

    mode="sample" draws one measurement branch and returns
    (Diana's PureState, Transcript); "all-branches" returns
    (list of such pairs, coverage). Mixed channels are sampled per run
    (the untouched-purification argument makes this exact).
    """
    d = clone.d
    if isinstance(channel, ChannelSpec):
        if channel.d != d:
            raise ProtocolError("channel dimension does not match the clone state")
        if channel.kind == "telecloning":
            raise ProtocolError(
                "the telecloning resource is not a 2N-label RIC channel; "
                "use ghz, beta, bell-product, smolin, or mixed-uniform"
            )
        N = channel.N
    else:
        N = len(channel.register.labels) // 2
    if tuple(clone.register.labels) != clone_labels(N):
        raise ProtocolError(
            f"clone state must live on labels {clone_labels(N)}"
        )
    if registry is None:
        registry = default_ric_registry(N)
    _guard_joint_dim(d, 4 * N - 1, "RIC")
    chan_state, u, v = _resolve_channel(channel, rng)
    if tuple(chan_state.register.labels) != channel_labels(N):
        chan_state = statealg.reorder(chan_state, channel_labels(N))
    registry.validate_partition(clone.register.labels + chan_state.register.labels)
    joint = statealg.tensor(clone, chan_state)
    plan = ric_measurement_plan(N)

    def finish(outcomes, prob, residual):
        corr = deduce_correction(outcomes[:-1], outcomes[-1], u, v, d)
        out = statealg.apply_local(residual, weyl_r(d, corr[0], corr[1]), f"{N}'")
        nrm = out.norm()
        out = PureState(out.register, out.amps / nrm, validate=False) if abs(nrm - 1) > 1e-12 else out
        return out, _ric_transcript(registry, N, d, outcomes, prob, corr)

    if mode == "sample":
        if rng is None:
            rng = np.random.default_rng(0)
        outcomes, prob, residual = _plan_sample(joint, plan, rng)
        return finish(outcomes, prob, residual)
    if mode != "all-branches":
        raise ProtocolError(f"unknown mode {mode!r}")
    branches, coverage = _plan_branches(joint, plan, rng=rng)
    return [finish(o, p, s) for o, p, s in branches], coverage


# ---------------------------------------------------------------------------
# teleportation-step identity

def teleport_identity_check(d: int, m: int, n: int, k: int, kp: int, rng=None) -> float:
    """Max amplitude deviation of the single-pair teleportation expansion.

    LHS: U^{-m,n}|phi>_N (x) |B^{k,k'}> built on (N', A'_N).
    RHS: (1/d) sum_{x,y} w^{n(m-k)+ky-nx} |B^{x+k-m, y+k'-n}>_{(N, A'_N)}
         (x) U^{-x,y}|phi>_{N'}.
    """
    if rng is None:
        rng = np.random.default_rng(7)
    phi = rng.normal(size=d) + 1j * rng.normal(size=d)
    phi /= np.linalg.norm(phi)
    order = ("N", "A'", "N'")
    left = PureState(Register(d, ("N",)), weyl_u(d, -m, n) @ phi, validate=False)
    pair = opsbasis.bell_state(d, k, kp, ("N'", "A'"))
    lhs = statealg.reorder(statealg.tensor(left, pair), order)
    rhs = np.zeros(d**3, dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            bell_part = opsbasis.bell_state(d, (x + k - m) % d, (y + kp - n) % d, ("N", "A'"))
            tail = PureState(Register(d, ("N'",)), weyl_u(d, -x, y) @ phi, validate=False)
            term = statealg.reorder(statealg.tensor(bell_part, tail), order)
            rhs += opsbasis.omega_power(d, n * (m - k) + k * y - n * x) * term.amps
    rhs /= d
    return float(np.abs(lhs.amps - rhs).max())


# ---------------------------------------------------------------------------
# many-to-many: GHZ-terminated channel (L receivers)

def mm_ghz_labels(N: int, L: int) -> tuple:
    front = channel_labels(N)[: 2 * (N - 1)]
    return front + (f"A'_{N}",) + tuple(f"{N}'_{i}" for i in range(1, L + 1))


def _ghz_last_state(d: int, N: int, L: int, kappa: int, sigma: int) -> PureState:
    """GHZ factor with legs N'_1..N'_L unshifted and the shift on A'_N."""
    labels = tuple(f"{N}'_{i}" for i in range(1, L + 1)) + (f"A'_{N}",)
    v = np.zeros(d ** (L + 1), dtype=np.complex128)
    for a in range(d):
        idx = 0
        for _ in range(L):
            idx = idx * d + a
        idx = idx * d + (a + sigma) % d
        v[idx] = opsbasis.omega_power(d, a * kappa)
    return PureState(Register(d, labels), v / np.sqrt(d), validate=False)


def mm_ghz_channel(d: int, N: int, L: int, spec: ChannelSpec | None = None) -> PureState:
    """RIC channel with the last Bell pair replaced by an (L+1)-leg GHZ state."""
    if spec is None:
        spec = channels.preset_spec("bell-product", d, N)
    if spec.kind == "product-bell":
        table = [(spec.c, 1.0)]
    elif spec.kind == "general-pure":
        table = spec.table
    else:
        raise ProtocolError("mm-ghz channel needs a product-bell or general-pure spec")
    labels = mm_ghz_labels(N, L)
    out = np.zeros(d ** (2 * N - 1 + L), dtype=np.complex128)
    front_labels = labels[: 2 * (N - 1)]
    for ktup, p in table:
        parts = []
        for s in range(N - 1):
            parts.append(
                opsbasis.bell_state(d, ktup[2 * s], ktup[2 * s + 1],
                                    (front_labels[2 * s], front_labels[2 * s + 1]))
            )
        parts.append(_ghz_last_state(d, N, L, ktup[2 * N - 2], ktup[2 * N - 1]))
        comp = statealg.reorder(statealg.tensor_many(parts), labels)
        out += np.sqrt(p) * comp.amps
    return PureState(Register(d, labels), out)


def run_mm_ghz(
    clone: PureState,
    d: int,
    N: int,
    L: int,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
    spec: ChannelSpec | None = None,
):
    """Concentrate clone-state information onto L GHZ-correlated receiver qudits."""
    if L < 1:
        raise ProtocolError("L must be >= 1")
    if tuple(clone.register.labels) != clone_labels(N):
        raise ProtocolError(f"clone state must live on labels {clone_labels(N)}")
    if spec is None:
        spec = channels.preset_spec("bell-product", d, N)
    u, v = spec.u, spec.v
    _guard_joint_dim(d, (2 * N - 1) + (2 * N - 1 + L), "mm-ghz RIC")
    chan = mm_ghz_channel(d, N, L, spec)
    registry_roles = dict(default_ric_registry(N).roles)
    registry_roles["Diana"] = tuple(f"{N}'_{i}" for i in range(1, L + 1))
    registry = PartyRegistry(registry_roles)
    joint = statealg.tensor(clone, chan)
    plan = ric_measurement_plan(N)
    leg_labels = [f"{N}'_{i}" for i in range(1, L + 1)]

    def finish(outcomes, prob, residual):
        x, y = deduce_correction(outcomes[:-1], outcomes[-1], u, v, d)
        out = statealg.apply_local(residual, weyl_r(d, x, y), leg_labels[0])
        for leg in leg_labels[1:]:
            out = statealg.apply_local(out, weyl_r(d, 0, y), leg)
        return out, _ric_transcript(registry, N, d, outcomes, prob, (x, y))

    if mode == "sample":
        if rng is None:
            rng = np.random.default_rng(0)
        outcomes, prob, residual = _plan_sample(joint, plan, rng)
        return finish(outcomes, prob, residual)
    if mode != "all-branches":
        raise ProtocolError(f"unknown mode {mode!r}")
    branches, coverage = _plan_branches(joint, plan, rng=rng)
    return [finish(o, p, s) for o, p, s in branches], coverage


def ghz_correlated_state(x, d: int, L: int, labels=None) -> PureState:
    """sum_j x_j |j>^(x L) - the L-receiver target of the first mm variant."""
    x = np.asarray(x, dtype=np.complex128)
    if labels is None:
        labels = tuple(f"t_{i}" for i in range(1, L + 1))
    v = np.zeros(d**L, dtype=np.complex128)
    for j in range(d):
        idx = 0
        for _ in range(L):
            idx = idx * d + j
        v[idx] = x[j]
    return PureState(Register(d, tuple(labels)), v)


# ---------------------------------------------------------------------------
# many-to-many: multiqudit concentration over |B^{00}>^(x N)

def mm_multi_labels(N: int, L: int) -> tuple:
    front = tuple(str(s) for s in range(1, N - L + 1))
    front += tuple(f"A_{s}" for s in range(1, N - L + 1))
    legs = tuple(str(s) for s in range(N - L + 1, N + 1))
    return front + legs


def synth_distributed_state(
    x,
    d: int,
    N: int,
    L: int,
    beta: BetaVector | None = None,
    bbar_source="clone-family",
    rng: np.random.Generator | None = None,
) -> PureState:
    """(1/sqrt d) sum_{m,n} beta_n Bbar_{mn} (x) (U^{-m,n}|phi>)^(x L).

    The Bbar set must satisfy the clone-family covariance on 2(N-L) qudits;
    sources: "clone-family" (extraction for N-L+1 clones, with its beta) or
    "random-orthonormal" (random unit vectors in the covariance eigenspaces).
    For L = N the Bbar register is empty and the state degenerates to
    |phi>^(x L).
    """
    if not 1 <= L <= N:
        raise ProtocolError("need 1 <= L <= N")
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if abs(np.sum(np.abs(x) ** 2) - 1.0) > 1e-8:
        raise NormalizationError("input amplitudes not normalized")
    labels = mm_multi_labels(N, L)
    leg_labels = labels[2 * (N - L):]
    if L == N:
        if beta is not None and any(
            abs(b - (1.0 if i == 0 else 0.0)) > 1e-12 for i, b in enumerate(beta.values)
        ):
            raise ProtocolError("L = N admits only the trivial beta = e_0")
        legs = [PureState(Register(d, (l,)), x) for l in leg_labels]
        return statealg.tensor_many(legs)
    if bbar_source == "clone-family":
        family = extract_clone_decomposition(d, N - L + 1)
        bbar = {mn: st.amps for mn, st in family.bbar.items()}
        if beta is None:
            beta = family.beta
    elif bbar_source == "random-orthonormal":
        if rng is None:
            rng = np.random.default_rng(0)
        bbar = random_covariant_bbar(d, N - L, rng)
        if beta is None:
            vals = np.ones(d) / np.sqrt(d)
            beta = BetaVector(tuple(vals))
    else:
        family = bbar_source  # a CloneFamily
        bbar = {mn: st.amps for mn, st in family.bbar.items()}
        if beta is None:
            beta = family.beta
    check_bbar_covariance(bbar, d, N - L)
    front_dim = d ** (2 * (N - L))
    out = np.zeros(front_dim * d**L, dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            tail = weyl_u(d, -m, n) @ x
            legs = tail
            for _ in range(L - 1):
                legs = np.kron(legs, tail)
            out += beta.values[n] * np.kron(bbar[(m, n)], legs)
    out /= np.sqrt(d)
    return PureState(Register(d, labels), out)


def _covariance_ops(d: int, pairs: int, k: int, ell: int):
    """R^{k,l} on the first-slot qudits, R^{-k,l} on the second-slot qudits."""
    return [weyl_r(d, k, ell)] * pairs + [weyl_r(d, -k, ell)] * pairs


def check_bbar_covariance(bbar: dict, d: int, pairs: int, tol: float = 1e-9):
    """Verify R^{k,l}-tensor covariance with eigenvalue w^{lm-nk}."""
    if pairs == 0:
        return
    dim = d ** (2 * pairs)
    reg = Register(d, tuple(f"q{i}" for i in range(2 * pairs)))
    for (m, n), vec in bbar.items():
        st = PureState(reg, vec, validate=False)
        for k, ell in ((1, 0), (0, 1), (1, 1)):
            moved = st
            for pos, op in enumerate(_covariance_ops(d, pairs, k, ell)):
                moved = statealg.apply_local(moved, op, reg.labels[pos])
            want = opsbasis.omega_power(d, ell * m - n * k) * st.amps
            if np.abs(moved.amps - want).max() > tol:
                raise ProtocolError(
                    f"Bbar_({m},{n}) violates the covariance for (k,l)=({k},{ell})"
                )


def random_covariant_bbar(d: int, pairs: int, rng: np.random.Generator) -> dict:
    """Orthonormal covariant set: project random vectors onto each eigenspace."""
    dim = d ** (2 * pairs)
    reg = Register(d, tuple(f"q{i}" for i in range(2 * pairs)))
    out = {}
    for m in range(d):
        for n in range(d):
            raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            acc = np.zeros(dim, dtype=np.complex128)
            for k in range(d):
                for ell in range(d):
                    moved = PureState(reg, raw / np.linalg.norm(raw), validate=False)
                    for pos, op in enumerate(_covariance_ops(d, pairs, k, ell)):
                        moved = statealg.apply_local(moved, op, reg.labels[pos])
                    acc += opsbasis.omega_power(d, -(ell * m - n * k)) * moved.amps
            nrm = np.linalg.norm(acc)
            if nrm < 1e-8:  # pragma: no cover - eigenspaces are never empty here
                raise ProtocolError("eigenspace projection vanished; retry with a new seed")
            out[(m, n)] = acc / nrm
    return out


def run_mm_multiqudit(
    distributed: PureState,
    d: int,
    N: int,
    L: int,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
):
    """Concentrate L-fold distributed information back onto L receiver qudits.

    Channel is |B^{0,0}>^(x N): senders hold every A'_s plus s' for
    s <= N-L; the receiver holds (N-L+1)'..N'.
    """
    if not 1 <= L <= N:
        raise ProtocolError("need 1 <= L <= N")
    labels = mm_multi_labels(N, L)
    if tuple(distributed.register.labels) != labels:
        raise ProtocolError(f"distributed state must live on labels {labels}")
    _guard_joint_dim(d, (2 * N - L) + 2 * N, "mm-multi RIC")
    chan = channels.product_bell_channel(d, N, (0,) * (2 * N))
    joint = statealg.tensor(distributed, chan)
    plan = [(str(s), f"{s}'") for s in range(1, N - L + 1)]
    plan += [(f"A'_{s}", f"A_{s}") for s in range(1, N - L + 1)]
    plan += [(str(s), f"A'_{s}") for s in range(N - L + 1, N + 1)]
    receiver = [f"{s}'" for s in range(N - L + 1, N + 1)]
    roles = {}
    for s in range(1, N - L + 1):
        roles[f"Bob_{s}"] = (str(s), f"{s}'")
        roles[f"Charlie_{s}"] = (f"A_{s}", f"A'_{s}")
    for i, s in enumerate(range(N - L + 1, N + 1), start=1):
        roles[f"Leg_{i}"] = (str(s), f"A'_{s}")
    roles["Receiver"] = tuple(receiver)
    registry = PartyRegistry(roles)

    n_front = 2 * (N - L)

    def finish(outcomes, prob, residual):
        front = outcomes[:n_front]
        up = sum(mm for mm, _ in front) % d
        vp = sum(nn for _, nn in front) % d
        corrections = []
        out = residual
        for i, (l_i, mu_i) in enumerate(outcomes[n_front:]):
            xc = (l_i + up) % d
            yc = (mu_i + vp) % d
            corrections.append((xc, yc))
            out = statealg.apply_local(out, weyl_r(d, xc, yc), receiver[i])
        out = statealg.reorder(out, receiver)
        transcript = Transcript(parties=dict(registry.roles), branch_probability=prob)
        bits = 2.0 * log2(d)
        senders = [f"Bob_{s}" for s in range(1, N - L + 1)]
        senders += [f"Charlie_{s}" for s in range(1, N - L + 1)]
        senders += [f"Leg_{i}" for i in range(1, L + 1)]
        for party, (mm, nn) in zip(senders, outcomes):
            transcript.messages.append(Message(party, "Receiver", mm, nn, bits))
        transcript.corrections = corrections
        transcript.correction = corrections[0]
        return out, transcript

    if mode == "sample":
        if rng is None:
            rng = np.random.default_rng(0)
        outcomes, prob, residual = _plan_sample(joint, plan, rng)
        return finish(outcomes, prob, residual)
    if mode != "all-branches":
        raise ProtocolError(f"unknown mode {mode!r}")
    branches, coverage = _plan_branches(joint, plan, rng=rng)
    return [finish(o, p, s) for o, p, s in branches], coverage

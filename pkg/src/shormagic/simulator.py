"""Sparse exact simulation of the semiclassical order-finding circuit.

One QFT qubit (stored as the top bit of each basis-state key) is reused
for t rounds against an n-qubit register holding integers mod N. Each
round applies H on the QFT qubit, a controlled modular multiplication by
a^(2^(t-tau)), an outcome-conditioned feedback phase, H again, and a
projective measurement with reset. States are kept as bitstring->amplitude
maps: the register only ever visits the multiplicative orbit of 1 under a,
so the support stays bounded by 2r.

Two engines exist: the map-based `step`/`run` path (the reference, able to
snapshot probe states for magic evaluation) and an orbit-indexed kernel
path used by `run` when no snapshots are requested (see shormagic.kernels).
`dense_reference` re-implements the same circuit on a full 2^L vector as an
independent validation oracle.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from shormagic import kernels
from shormagic.numtheory import (
    PeriodDecomposition,
    RecoveryResult,
    multiplicative_order,
    recover_period,
    split_period,
)

__all__ = [
    "ShorInstance",
    "SparseState",
    "StepTrace",
    "RunRecord",
    "init_state",
    "controlled_modmul",
    "feedback_phase",
    "step",
    "run",
    "dense_reference",
    "qft_entanglement_entropy",
    "write_trace_jsonl",
]

PRUNE_TOL = 1e-14
NORM_TOL = 1e-10
DENSE_MAX_QUBITS = 12

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ShorInstance:
    """One order-finding problem: modulus N, base a, circuit geometry."""

    N: int
    a: int
    n: int
    t: int
    L: int
    decomposition: PeriodDecomposition

    @classmethod
    def from_modulus(cls, N: int, a: int, t: int | None = None) -> "ShorInstance":
        """Build an instance with n = ceil(log2 N), L = n+1, default t = 2n+1.

        a = 1 (order 1) is accepted as the trivial instance so that the
        full period set of N, including r = 1, can be swept.
        """
        if N < 3:
            raise ValueError(f"modulus must be >= 3, got {N}")
        if not 1 <= a < N:
            raise ValueError(f"base must satisfy 1 <= a < N, got a={a}")
        if gcd(a, N) != 1:
            raise ValueError(f"gcd({a}, {N}) != 1: N is already factored")
        n = (N - 1).bit_length()
        if t is None:
            t = 2 * n + 1
        if t < 1:
            raise ValueError(f"step count must be >= 1, got {t}")
        decomposition = split_period(multiplicative_order(a, N))
        return cls(N=N, a=a, n=n, t=t, L=n + 1, decomposition=decomposition)

    @property
    def r(self) -> int:
        return self.decomposition.r

    def qft_mask(self) -> int:
        return 1 << self.n


@dataclass
class SparseState:
    """L-qubit pure state as a support map basis-key -> amplitude.

    Key layout: bit L-1 is the QFT qubit, bits 0..n-1 the register value.
    """

    L: int
    amplitudes: dict[int, complex] = field(default_factory=dict)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def support(self) -> list[int]:
        return sorted(self.amplitudes)

    def support_size(self) -> int:
        return len(self.amplitudes)

    def prune(self, tol: float = PRUNE_TOL) -> "SparseState":
        self.amplitudes = {k: v for k, v in self.amplitudes.items() if abs(v) >= tol}
        return self

    def copy(self) -> "SparseState":
        return SparseState(self.L, dict(self.amplitudes))

    def to_dense(self) -> np.ndarray:
        vec = np.zeros(1 << self.L, dtype=np.complex128)
        for k, v in self.amplitudes.items():
            vec[k] = v
        return vec

    @classmethod
    def from_dense(cls, vec: np.ndarray, tol: float = PRUNE_TOL) -> "SparseState":
        L = int(len(vec)).bit_length() - 1
        if (1 << L) != len(vec):
            raise ValueError("dense vector length must be a power of two")
        amps = {int(k): complex(vec[k]) for k in np.flatnonzero(np.abs(vec) >= tol)}
        return cls(L, amps)


@dataclass
class StepTrace:
    """Per-step record: probe snapshot (taken before the second Hadamard),
    measured bit, and the Born probability of that bit."""

    tau: int
    state_at_probe: SparseState | None
    outcome: int
    outcome_probability: float


@dataclass
class RunRecord:
    """Outcome record of one full circuit execution."""

    outcomes: tuple[int, ...]
    x_num: int
    x: Fraction
    success: bool
    found_period: int | None
    seed: object

    @property
    def t(self) -> int:
        return len(self.outcomes)


def init_state(instance: ShorInstance) -> SparseState:
    """|0> on the QFT qubit, integer 1 in the register."""
    return SparseState(instance.L, {1: 1.0 + 0.0j})


def controlled_modmul(state: SparseState, a: int, e: int, N: int) -> SparseState:
    """Map |1>|y> -> |1>|a^e * y mod N>, leave the |0> branch untouched."""
    n = state.L - 1
    mask = 1 << n
    mult = pow(a, e, N)
    out: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        if key & mask:
            y = key ^ mask
            if y >= N:
                raise ValueError(f"register value {y} >= modulus {N}: corrupt state")
            out[mask | (mult * y % N)] = amp
        else:
            out[key] = amp
    return SparseState(state.L, out)


def feedback_phase(tau: int, prior_outcomes) -> float:
    """Accumulated semiclassical rotation before step tau's probe point.

    phi_tau = -pi * sum_{j<tau} m_j / 2^(tau-j); this weighting makes the
    measured bits assemble the phase estimate x = sum_j m_j 2^(j-t-1),
    least significant bit first.
    """
    return -math.pi * sum(m / (1 << (tau - j)) for j, m in enumerate(prior_outcomes, start=1) if m)


def _hadamard_qft(state: SparseState) -> SparseState:
    mask = 1 << (state.L - 1)
    out: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        a = amp * _SQRT_HALF
        if key & mask:
            reg = key ^ mask
            out[reg] = out.get(reg, 0.0) + a
            out[key] = out.get(key, 0.0) - a
        else:
            out[key] = out.get(key, 0.0) + a
            up = key | mask
            out[up] = out.get(up, 0.0) + a
    return SparseState(state.L, out)


def step(
    state: SparseState,
    instance: ShorInstance,
    tau: int,
    prior_outcomes,
    sampler,
) -> tuple[SparseState, StepTrace]:
    """One circuit round; returns the post-measurement state and its trace.

    sampler is either a numpy Generator (Born-rule draw) or an int 0/1
    forcing that outcome. The incoming state must have the QFT qubit in
    |0>; the returned state does too (measure-and-reset convention).
    """
    if not 1 <= tau <= instance.t:
        raise ValueError(f"step index {tau} outside [1, {instance.t}]")
    mask = instance.qft_mask()
    if any(key & mask for key in state.amplitudes):
        raise ValueError("incoming state must have the QFT qubit reset to |0>")

    work = _hadamard_qft(state)
    work = controlled_modmul(work, instance.a, 1 << (instance.t - tau), instance.N)
    phi = feedback_phase(tau, prior_outcomes)
    if phi != 0.0:
        rot = cmath.exp(1j * phi)
        for key in work.amplitudes:
            if key & mask:
                work.amplitudes[key] *= rot
    probe = work.copy().prune()

    work = _hadamard_qft(work)
    q0 = sum(abs(a) ** 2 for k, a in work.amplitudes.items() if not k & mask)
    q1 = sum(abs(a) ** 2 for k, a in work.amplitudes.items() if k & mask)
    total = q0 + q1
    if abs(total - 1.0) > NORM_TOL:
        raise ArithmeticError(f"norm drifted to {math.sqrt(total)} at step {tau}")
    p1 = q1 / total
    if isinstance(sampler, (int, np.integer)):
        outcome = int(sampler)
        if outcome not in (0, 1):
            raise ValueError(f"forced outcome must be 0 or 1, got {sampler}")
    else:
        outcome = 1 if sampler.random() < p1 else 0
    q = q1 if outcome else q0
    p = p1 if outcome else 1.0 - p1
    if q <= NORM_TOL**2:
        raise ArithmeticError(f"projection onto outcome {outcome} at step {tau} annihilates the state")

    scale = 1.0 / math.sqrt(q)
    want = mask if outcome else 0
    post = SparseState(
        instance.L,
        {key ^ want: amp * scale for key, amp in work.amplitudes.items() if (key & mask) == want},
    )
    post.prune()
    return post, StepTrace(tau=tau, state_at_probe=probe, outcome=outcome, outcome_probability=p)


def _rng_for(seed) -> np.random.Generator:
    """Counter-based per-run stream. Accepts ints or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _finish_record(instance: ShorInstance, outcomes, seed) -> RunRecord:
    x_num = sum(1 << (j - 1) for j, m in enumerate(outcomes, start=1) if m)
    recovery: RecoveryResult = recover_period(x_num, instance.t, instance.a, instance.N, instance.r)
    return RunRecord(
        outcomes=tuple(int(m) for m in outcomes),
        x_num=x_num,
        x=Fraction(x_num, 1 << instance.t),
        success=recovery.success,
        found_period=recovery.found,
        seed=seed,
    )


def run(
    instance: ShorInstance,
    seed,
    probe: bool = False,
    forced_outcomes=None,
) -> tuple[RunRecord, list[StepTrace] | None]:
    """Execute all t steps and post-process the measured bits.

    With probe=True every step's pre-Hadamard snapshot is kept (map-based
    engine); otherwise the orbit kernel runs the same circuit without
    materializing states. Identical seeds give identical records on
    either path. forced_outcomes replays a fixed bit list deterministically.
    """
    t = instance.t
    if forced_outcomes is not None and len(forced_outcomes) != t:
        raise ValueError(f"forced outcome list must have length {t}")
    if probe or forced_outcomes is not None:
        rng = _rng_for(seed)
        state = init_state(instance)
        outcomes: list[int] = []
        traces: list[StepTrace] = []
        for tau in range(1, t + 1):
            sampler = forced_outcomes[tau - 1] if forced_outcomes is not None else rng
            state, trace = step(state, instance, tau, outcomes, sampler)
            outcomes.append(trace.outcome)
            if not probe:
                trace.state_at_probe = None
            traces.append(trace)
        return _finish_record(instance, outcomes, seed), traces

    r = instance.r
    shifts = np.array([pow(2, t - tau, r) for tau in range(1, t + 1)], dtype=np.int64)
    u = _rng_for(seed).random(t)
    outcomes, _probs = kernels.run_orbit(r, shifts, u, None, False)
    return _finish_record(instance, outcomes, seed), None


def dense_reference(instance: ShorInstance, seed, probe: bool = False, forced_outcomes=None):
    """Full 2^L state-vector twin of `run`, for validation (L <= 12).

    Consumes one uniform per step from the same seeded stream as `run`,
    so matched seeds must reproduce identical outcome records.
    """
    if instance.L > DENSE_MAX_QUBITS:
        raise ValueError(f"dense reference limited to L <= {DENSE_MAX_QUBITS}, got L={instance.L}")
    t, N, n = instance.t, instance.N, instance.n
    dim = 1 << n
    rng = _rng_for(seed)
    if forced_outcomes is not None and len(forced_outcomes) != t:
        raise ValueError(f"forced outcome list must have length {t}")

    v0 = np.zeros(dim, dtype=np.complex128)
    v1 = np.zeros(dim, dtype=np.complex128)
    v0[1] = 1.0
    y = np.arange(dim)
    outcomes: list[int] = []
    traces: list[StepTrace] = []
    for tau in range(1, t + 1):
        w0 = (v0 + v1) * _SQRT_HALF
        w1 = (v0 - v1) * _SQRT_HALF
        mult = pow(instance.a, 1 << (t - tau), N)
        perm = np.where(y < N, mult * y % N, y)
        permuted = np.zeros_like(w1)
        permuted[perm] = w1
        w1 = permuted * cmath.exp(1j * feedback_phase(tau, outcomes))
        if probe:
            traces_state = SparseState.from_dense(np.concatenate([w0, w1]))
        v0, v1 = (w0 + w1) * _SQRT_HALF, (w0 - w1) * _SQRT_HALF
        q0 = float(np.vdot(v0, v0).real)
        q1 = float(np.vdot(v1, v1).real)
        p1 = q1 / (q0 + q1)
        if forced_outcomes is not None:
            m = int(forced_outcomes[tau - 1])
        else:
            m = 1 if rng.random() < p1 else 0
        q = q1 if m else q0
        p = p1 if m else 1.0 - p1
        if q <= NORM_TOL**2:
            raise ArithmeticError(f"projection onto outcome {m} at step {tau} annihilates the state")
        v0 = (v1 if m else v0) / math.sqrt(q)
        v1 = np.zeros_like(v0)
        outcomes.append(m)
        traces.append(StepTrace(tau, traces_state if probe else None, m, p))
    return _finish_record(instance, outcomes, seed), traces


def qft_entanglement_entropy(state: SparseState) -> float:
    """Von Neumann entropy (nats) of the QFT qubit's reduced state."""
    mask = 1 << (state.L - 1)
    rho00 = rho11 = 0.0
    rho01 = 0.0 + 0.0j
    amp0: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        if key & mask:
            rho11 += abs(amp) ** 2
        else:
            rho00 += abs(amp) ** 2
            amp0[key] = amp
    for key, amp in state.amplitudes.items():
        if key & mask:
            partner = amp0.get(key ^ mask)
            if partner is not None:
                rho01 += partner * amp.conjugate()
    total = rho00 + rho11
    # eigenvalues of the 2x2 reduced density matrix
    half_gap = math.sqrt(max((rho00 - rho11) ** 2 / 4.0 + abs(rho01) ** 2, 0.0))
    lams = ((total / 2.0 + half_gap) / total, (total / 2.0 - half_gap) / total)
    return -sum(lam * math.log(lam) for lam in lams if lam > 1e-15)


def write_trace_jsonl(traces: list[StepTrace], path) -> None:
    """Stable per-step trace dump: {tau, outcome, probability, support_size}."""
    with open(path, "w", encoding="utf-8") as fh:
        for tr in traces:
            rec = {
                "tau": tr.tau,
                "outcome": tr.outcome,
                "probability": tr.outcome_probability,
                "support_size": tr.state_at_probe.support_size() if tr.state_at_probe else None,
            }
            fh.write(json.dumps(rec) + "\n")

"""Stabilizer Renyi entropy (SRE) machinery.

Three routes to M2 = -log(sum_P <P>^4 / 2^L), all in nats:

* `sre_bruteforce`: the definition, summed over all 4^L Pauli strings on a
  dense vector (fast Walsh-Hadamard over the z index). Validation oracle,
  L <= 12.
* `sre_sparse_exact`: algebraically identical value from the support only.
  Resolving the XOR-quadruplet constraint m+n+p+q = 0 through the pair
  difference d = m+n = p+q gives exp(-M2) = sum_{x,d} |G_x(d)|^2 with
  G_x(d) = sum_m a*_m a_{m+x} a*_{m+d} a_{m+d+x}, every index ranging over
  the difference set of the support. No 2^L anywhere.
* the structured-superposition model: for uniform-magnitude random-phase
  states, M2 = 4 log D - log(4*Lambda + 6D^2 - 5D) (0 when D <= 2), with
  Lambda the count of ordered distinct support quadruplets XOR-ing to zero,
  computed exactly from pair counts or estimated by the random-bitstring
  closed form D(D-1)(D-2)(D-3)/2^width.

The regime schedule for D along the circuit (2^tau ramp, r_odd plateau on
the register only, late doubling for even periods) lives here too, plus
materialization of the actual support sets it predicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from shormagic import kernels
from shormagic.numtheory import PeriodDecomposition
from shormagic.simulator import ShorInstance, SparseState

__all__ = [
    "SupportSet",
    "MagicModelInput",
    "CurvePoint",
    "MagicCurve",
    "TauSupport",
    "sre_bruteforce",
    "sre_sparse_exact",
    "lambda_exact",
    "lambda_closed",
    "m2_structured",
    "d_schedule",
    "support_schedule",
    "final_probe_support",
    "m2_curve_analytic",
    "m2_final_asymptotes",
    "structured_state_sample",
    "haar_average_m2",
]

BRUTE_MAX_QUBITS = 12
DIFF_SET_MAX = 4096

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class SupportSet:
    """Sorted set of distinct basis strings carrying amplitude."""

    width: int
    strings: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.strings)) != len(self.strings):
            raise ValueError("support strings must be distinct")
        if self.strings and not 0 <= min(self.strings) <= max(self.strings) < (1 << self.width):
            raise ValueError(f"support strings must fit in {self.width} bits")
        object.__setattr__(self, "strings", tuple(sorted(self.strings)))

    @property
    def D(self) -> int:
        return len(self.strings)


@dataclass(frozen=True)
class MagicModelInput:
    """Inputs of the structured-superposition formula at one step."""

    D: int
    L_eff: int
    Lambda: int
    regime: str

    def validate(self) -> None:
        if self.D < 4 and self.Lambda != 0:
            raise ValueError("Lambda must vanish for D < 4")
        if self.Lambda < 0 or self.Lambda > self.D * (self.D - 1) * (self.D - 2):
            raise ValueError("Lambda outside [0, D(D-1)(D-2)]")
        if self.Lambda % 8:
            raise ValueError("Lambda must be divisible by 8")


@dataclass(frozen=True)
class CurvePoint:
    tau: int
    m2_analytic: float
    m2_exact: float | None
    regime: str


@dataclass(frozen=True)
class MagicCurve:
    instance: ShorInstance
    entries: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class TauSupport:
    """Materialized support the analytic model assigns to one probe point.

    In ramp/late regimes `strings` are L-bit probe strings (QFT bit on
    top); in the plateau window they are the n-bit register orbit.
    """

    tau: int
    regime: str
    D: int
    width: int
    strings: tuple[int, ...]


def _fwht_last_axis(a: np.ndarray) -> None:
    """In-place fast Walsh-Hadamard transform along the last axis."""
    n = a.shape[-1]
    h = 1
    while h < n:
        b = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        u = b[..., 0, :] + b[..., 1, :]
        v = b[..., 0, :] - b[..., 1, :]
        b[..., 0, :] = u
        b[..., 1, :] = v
        h *= 2


def sre_bruteforce(state: SparseState) -> float:
    """M2 by direct summation over all 4^L Pauli strings (L <= 12).

    Pauli strings are parameterized as P_{z,x}; for fixed x the z sum
    is the Walsh-Hadamard transform of m -> a*_m a_{m^x}, and the phase
    i^{-z.x} drops out of the fourth power, so |f|^4 is summed directly.
    """
    L = state.L
    if L > BRUTE_MAX_QUBITS:
        raise ValueError(f"brute-force SRE limited to L <= {BRUTE_MAX_QUBITS}, got {L}")
    psi = state.to_dense()
    nrm = np.linalg.norm(psi)
    if nrm < 1e-12:
        raise ValueError("state has zero norm")
    psi = psi / nrm
    dim = 1 << L
    idx = np.arange(dim)
    conj = psi.conj()
    acc = 0.0
    block = max(1, (1 << 21) // dim)
    for x0 in range(0, dim, block):
        xs = np.arange(x0, min(x0 + block, dim))
        c = conj[None, :] * psi[idx[None, :] ^ xs[:, None]]
        _fwht_last_axis(c)
        mag2 = c.real**2 + c.imag**2
        acc += float(np.sum(mag2 * mag2))
    return -math.log(acc / dim)


def _difference_set(keys: np.ndarray, bound: int) -> np.ndarray:
    found: set[int] = {0}
    D = len(keys)
    block = max(1, (1 << 21) // max(D, 1))
    for i0 in range(0, D, block):
        xs = np.unique(keys[i0 : i0 + block, None] ^ keys[None, :])
        found.update(xs.tolist())
        if len(found) > bound:
            raise ValueError(
                f"difference set exceeds {bound} strings; use the analytic model for supports this large"
            )
    return np.array(sorted(found), dtype=np.int64)


def sre_sparse_exact(state: SparseState, max_diff_set: int = DIFF_SET_MAX) -> float:
    """M2 from the support map alone; equals sre_bruteforce to float precision."""
    if not state.amplitudes:
        raise ValueError("state has empty support")
    keys = np.array(state.support(), dtype=np.int64)
    amps = np.array([state.amplitudes[int(k)] for k in keys], dtype=np.complex128)
    amps = amps / np.linalg.norm(amps)
    D = len(keys)
    diffs = _difference_set(keys, max_diff_set)
    total = 0.0
    gre = np.empty(len(diffs))
    gim = np.empty(len(diffs))
    for x in diffs.tolist():
        partners = keys ^ x
        pos = np.searchsorted(keys, partners)
        pos[pos >= D] = D - 1
        valid = keys[pos] == partners
        mk = keys[valid]
        c = amps[valid].conj() * amps[pos[valid]]
        dvals = (mk[:, None] ^ mk[None, :]).ravel()
        didx = np.searchsorted(diffs, dvals)
        prods = (c[:, None] * c[None, :]).ravel()
        gre.fill(0.0)
        gim.fill(0.0)
        np.add.at(gre, didx, prods.real)
        np.add.at(gim, didx, prods.imag)
        total += float(np.dot(gre, gre) + np.dot(gim, gim))
    return -math.log(total)


def lambda_exact(support: SupportSet) -> int:
    """Exact geometric term: ordered distinct quadruplets with zero XOR.

    Grouped over pair XOR values: Lambda = 4 sum_x A(x)(A(x)-1), an
    O(D^2) pair count (compiled kernel when available).
    """
    if support.D < 4:
        return 0
    return kernels.xor_pair_lambda(np.array(support.strings, dtype=np.int64), support.width)


def lambda_closed(D: int, width: int) -> float:
    """Random-bitstring estimate D(D-1)(D-2)(D-3)/2^width of lambda_exact."""
    if D < 0:
        raise ValueError(f"support size must be >= 0, got {D}")
    return D * (D - 1) * (D - 2) * (D - 3) / float(2**width)


def m2_structured(D: int, Lambda: float) -> float:
    """SRE of a uniform-magnitude random-phase superposition of D strings.

    Piecewise: identically 0 for D <= 2 (a single basis state, and the
    dynamically reachable two-string states, are stabilizers), otherwise
    4 log D - log(4*Lambda + 6 D^2 - 5 D).
    """
    if D < 1:
        raise ValueError(f"support size must be >= 1, got {D}")
    if Lambda < 0:
        raise ValueError(f"Lambda must be >= 0, got {Lambda}")
    if D <= 2:
        return 0.0
    return 4.0 * math.log(D) - math.log(4.0 * Lambda + 6.0 * D * D - 5.0 * D)


def d_schedule(decomposition: PeriodDecomposition, t: int, tau: int, L: int):
    """Support size, effective qubit count, and regime label at step tau.

    D = 2^tau while tau <= tau*, r_odd in the plateau window (register
    only, L_eff = L-1), r/2^(t-tau) in the final k steps. The window
    (tau*, tau*+4) is labeled plateau-transient: the model is only
    qualitative there. When t < tau* + k the published schedule does not
    apply; the late branch is then capped at the 2^tau doubling limit.
    """
    if not 1 <= tau <= t:
        raise ValueError(f"step index {tau} outside [1, {t}]")
    k, r_odd, tau_star = decomposition.k, decomposition.r_odd, decomposition.tau_star
    if tau <= tau_star and tau <= t - k:
        return 1 << tau, L, "ramp"
    if tau <= t - k:
        # r_odd = 1 plateaus hold a single basis string: exact, never transient
        transient = tau - tau_star < 4 and r_odd > 1
        return r_odd, L - 1, "plateau-transient" if transient else "plateau"
    D = min(decomposition.r >> (t - tau), 1 << min(tau, 62))
    return D, L, "late"


def support_schedule(instance: ShorInstance) -> list[TauSupport]:
    """Materialize the support set the analytic model uses at each step.

    Evolves the reachable register set S (orbit growth under the step
    multipliers) and emits, per probe point, either the L-bit branch
    support {0}xS + {1}xPi(S) (ramp/late) or the register orbit
    (plateau). Sizes are checked against d_schedule and a mismatch
    raises, as that would falsify the schedule itself.
    """
    N, a, t, n = instance.N, instance.a, instance.t, instance.n
    dec = instance.decomposition
    mask = 1 << n
    S = {1}
    out: list[TauSupport] = []
    for tau in range(1, t + 1):
        mult = pow(a, 1 << (t - tau), N)
        branch1 = {mult * y % N for y in S}
        D, L_eff, regime = d_schedule(dec, t, tau, instance.L)
        if regime in ("plateau", "plateau-transient"):
            strings = tuple(sorted(S | branch1))
            width = n
        else:
            strings = tuple(sorted(S) + [mask | y for y in sorted(branch1)])
            width = instance.L
        if len(strings) != D:
            raise ArithmeticError(
                f"schedule mismatch at tau={tau}: materialized {len(strings)} strings, predicted D={D}"
            )
        out.append(TauSupport(tau=tau, regime=regime, D=D, width=width, strings=strings))
        S |= branch1
    return out


def final_probe_support(instance: ShorInstance) -> TauSupport:
    """Support at the last probe point, without evolving all t steps.

    Once 2^(t-1) >= r (always true at the default t = 2n+1) the set
    reachable after t-1 steps is the full even-exponent subgroup of the
    orbit, so the final branches split the orbit by exponent parity for
    even r and both cover it for odd r. Falls back to the full schedule
    for truncated depths.
    """
    r = instance.r
    t = instance.t
    if (1 << (t - 1)) < r:
        return support_schedule(instance)[-1]
    N, a, n = instance.N, instance.a, instance.n
    orbit = [1]
    y = 1
    for _ in range(r - 1):
        y = y * a % N
        orbit.append(y)
    D, _, regime = d_schedule(instance.decomposition, t, t, instance.L)
    if instance.decomposition.k == 0:
        strings = tuple(sorted(orbit))
        width = n
    else:
        mask = 1 << n
        strings = tuple(sorted(orbit[0::2]) + [mask | v for v in sorted(orbit[1::2])])
        width = instance.L
    if len(strings) != D:
        raise ArithmeticError(f"final support size {len(strings)} != scheduled D={D}")
    return TauSupport(tau=t, regime=regime, D=D, width=width, strings=strings)


def m2_curve_analytic(instance: ShorInstance, mode: str = "exact-lambda") -> MagicCurve:
    """Analytic M2(tau) for a full run of `instance`.

    mode="exact-lambda" materializes each step's support and counts
    Lambda exactly; mode="closed-lambda" uses the random-bitstring
    closed form. Simulated SRE values are merged in by the experiment
    layer, not here.
    """
    if mode not in ("exact-lambda", "closed-lambda"):
        raise ValueError(f"unknown mode {mode!r}")
    entries: list[CurvePoint] = []
    if mode == "exact-lambda":
        for sup in support_schedule(instance):
            lam = lambda_exact(SupportSet(width=sup.width, strings=sup.strings))
            m2 = m2_structured(sup.D, lam)
            entries.append(CurvePoint(sup.tau, m2, None, sup.regime))
    else:
        for tau in range(1, instance.t + 1):
            D, L_eff, regime = d_schedule(instance.decomposition, instance.t, tau, instance.L)
            m2 = m2_structured(D, lambda_closed(D, L_eff))
            entries.append(CurvePoint(tau, m2, None, regime))
    return MagicCurve(instance=instance, entries=tuple(entries))


def m2_final_asymptotes(r: int, L: int, epsilon: int) -> tuple[float, float]:
    """(small-r law, large-r saturation law) for the final-step SRE.

    small-r: log(r^3/(6r-5)), the Lambda->0 limit; saturation:
    (L-2-eps) log 2 - 3*2^(L-eps-1)/r^2. Callers pick by r vs 2^(L/2).
    The exact D=2 -> 0 rule takes precedence over the small-r value at
    r = 2.
    """
    if r < 1:
        raise ValueError(f"period must be >= 1, got {r}")
    small = math.log(r**3 / (6.0 * r - 5.0))
    saturation = (L - 2 - epsilon) * LOG2 - 3.0 * 2 ** (L - epsilon - 1) / float(r) ** 2
    return small, saturation


def structured_state_sample(support: SupportSet, seed) -> SparseState:
    """Uniform-magnitude state over `support` with i.i.d. uniform phases."""
    if support.D < 1:
        raise ValueError("support must be non-empty")
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=support.D)
    amp = 1.0 / math.sqrt(support.D)
    return SparseState(
        support.width,
        {s: amp * complex(math.cos(th), math.sin(th)) for s, th in zip(support.strings, thetas)},
    )


def haar_average_m2(L: int) -> float:
    """Annealed Haar average -log E[sum_P <P>^4 / 2^L].

    E[<P>^4] = 3/((2^L+1)(2^L+3)) for each non-identity Pauli string;
    tends to L log 2 - log 4 for large L. (The quenched average E[M2]
    differs from this at O(4^-L).)
    """
    if L < 1:
        raise ValueError(f"qubit count must be >= 1, got {L}")
    d = 2**L
    mean_p4 = (1.0 + 3.0 * (d * d - 1.0) / ((d + 1.0) * (d + 3.0))) / d
    return -math.log(mean_p4)

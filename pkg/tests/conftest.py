"""Shared test oracles, all independent of the package's hot paths."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from shormagic.simulator import SparseState


def mod_pow_naive(a: int, e: int, N: int) -> int:
    """Repeated-multiplication oracle for mod_pow."""
    out = 1 % N
    base = a % N
    for _ in range(e):
        out = out * base % N
    return out


def order_naive(a: int, N: int) -> int:
    y = a % N
    r = 1
    while y != 1:
        y = y * a % N
        r += 1
    return r


def lambda_quadruplets_naive(strings) -> int:
    """O(D^3) ordered-distinct-quadruplet count with zero XOR."""
    ss = set(strings)
    lst = list(strings)
    count = 0
    for i, m in enumerate(lst):
        for j, n in enumerate(lst):
            if j == i:
                continue
            for k, p in enumerate(lst):
                if k in (i, j):
                    continue
                q = m ^ n ^ p
                if q in ss and q not in (m, n, p):
                    count += 1
    return count


def random_sparse_state(rng, L: int, D: int) -> SparseState:
    keys = rng.choice(1 << L, size=D, replace=False)
    amps = rng.normal(size=D) + 1j * rng.normal(size=D)
    amps /= np.linalg.norm(amps)
    return SparseState(L, {int(k): complex(v) for k, v in zip(keys, amps)})


# ---------------------------------------------------------------------------
# independent dense semiclassical circuit (oracle for outcome distributions)


class DenseCircuitOracle:
    """From-scratch dense implementation of the t-step circuit.

    Kept deliberately primitive (explicit branch vectors, Python loops for
    the permutation) so it shares no code with the production engines.
    """

    def __init__(self, N: int, a: int, t: int):
        self.N, self.a, self.t = N, a, t
        self.n = (N - 1).bit_length()

    def initial(self) -> np.ndarray:
        dim = 1 << self.n
        v = np.zeros(2 * dim, dtype=complex)
        v[1] = 1.0  # QFT qubit 0, register 1
        return v

    def step_branches(self, v: np.ndarray, tau: int, prior) -> tuple[np.ndarray, np.ndarray]:
        """Return the two post-measurement candidates (unnormalized)."""
        dim = 1 << self.n
        lo, hi = v[:dim].copy(), v[dim:].copy()
        # first Hadamard
        lo, hi = (lo + hi) / math.sqrt(2), (lo - hi) / math.sqrt(2)
        # controlled multiplication by a^(2^(t-tau))
        mult = pow(self.a, 1 << (self.t - tau), self.N)
        new_hi = np.zeros_like(hi)
        for y in range(dim):
            target = mult * y % self.N if y < self.N else y
            new_hi[target] += hi[y]
        # feedback phase
        phi = -math.pi * sum(m * 2.0 ** -(tau - j) for j, m in enumerate(prior, start=1))
        hi = new_hi * cmath.exp(1j * phi)
        # second Hadamard, then project (reset folds outcome into the low block)
        out0 = (lo + hi) / math.sqrt(2)
        out1 = (lo - hi) / math.sqrt(2)
        return out0, out1

    def probe(self, v: np.ndarray, tau: int, prior) -> np.ndarray:
        """State right before the second Hadamard (unit norm)."""
        dim = 1 << self.n
        lo, hi = v[:dim].copy(), v[dim:].copy()
        lo, hi = (lo + hi) / math.sqrt(2), (lo - hi) / math.sqrt(2)
        mult = pow(self.a, 1 << (self.t - tau), self.N)
        new_hi = np.zeros_like(hi)
        for y in range(dim):
            target = mult * y % self.N if y < self.N else y
            new_hi[target] += hi[y]
        phi = -math.pi * sum(m * 2.0 ** -(tau - j) for j, m in enumerate(prior, start=1))
        hi = new_hi * cmath.exp(1j * phi)
        return np.concatenate([lo, hi])

    def outcome_tree(self, min_prob: float = 1e-15):
        """Yield (outcomes, probability) over all measurement paths."""
        dim = 1 << self.n
        stack = [(self.initial(), (), 1.0)]
        while stack:
            v, path, prob = stack.pop()
            tau = len(path) + 1
            out0, out1 = self.step_branches(v, tau, path)
            for bit, branch in ((0, out0), (1, out1)):
                q = float(np.vdot(branch, branch).real)
                p_here = prob * q
                if p_here < min_prob:
                    continue
                nxt = np.concatenate([branch / math.sqrt(q), np.zeros(dim, dtype=complex)])
                new_path = path + (bit,)
                if tau == self.t:
                    yield new_path, p_here
                else:
                    stack.append((nxt, new_path, p_here))

    def step_marginals(self) -> np.ndarray:
        """Exact P(m_tau = 1) for each step."""
        totals = np.zeros(self.t)
        for path, prob in self.outcome_tree():
            for i, bit in enumerate(path):
                if bit:
                    totals[i] += prob
        return totals


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(987654321)))

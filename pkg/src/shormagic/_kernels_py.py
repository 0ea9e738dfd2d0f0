"""Numpy implementations of the hot kernels.

These are the reference/fallback backends; shormagic._kernels holds the
compiled twins with identical semantics. Both operate on the multiplicative
orbit picture: register values live on the orbit {a^j mod N}, so every
circuit step is a cyclic index shift plus elementwise updates on a length-r
complex vector.
"""

from __future__ import annotations

import numpy as np

PRUNE_TOL = 1e-14


def run_orbit(
    r: int,
    shifts: np.ndarray,
    u: np.ndarray,
    forced: np.ndarray | None = None,
    trace: bool = False,
):
    """Run the full t-step semiclassical circuit on the orbit amplitudes.

    shifts[i] is the orbit shift 2^(t-tau) mod r of step tau = i+1, u[i]
    the uniform draw deciding that step's measurement. forced entries
    >= 0 override the draw. Returns (outcomes, probs) and, with
    trace=True, additionally (n0, n1, n_union, cross): branch support
    sizes at the probe point, their union over register positions, and
    the QFT-qubit coherence <v0|v1>.

    The state enters each step with the QFT qubit reset to 0, so only
    the register amplitude vector v is carried; the step produces the
    branch pair (v, shifted-and-phased v)/sqrt(2) at the probe, then
    interferes them with the second Hadamard and projects.
    """
    t = len(shifts)
    v = np.zeros(r, dtype=np.complex128)
    v[0] = 1.0
    outcomes = np.empty(t, dtype=np.int8)
    probs = np.empty(t, dtype=np.float64)
    if trace:
        n0 = np.empty(t, dtype=np.int64)
        n1 = np.empty(t, dtype=np.int64)
        n_union = np.empty(t, dtype=np.int64)
        cross = np.empty(t, dtype=np.complex128)
    theta = 0.0  # running feedback angle: phi_tau = -pi * theta
    for i in range(t):
        b1 = np.roll(v, int(shifts[i]))
        if theta != 0.0:
            b1 = b1 * np.exp(-1j * np.pi * theta)
        if trace:
            m0 = np.abs(v) > PRUNE_TOL
            m1 = np.abs(b1) > PRUNE_TOL
            n0[i] = int(m0.sum())
            n1[i] = int(m1.sum())
            n_union[i] = int((m0 | m1).sum())
            cross[i] = complex(np.vdot(v, b1))
        w0 = 0.5 * (v + b1)
        w1 = 0.5 * (v - b1)
        q0 = float(np.vdot(w0, w0).real)
        q1 = float(np.vdot(w1, w1).real)
        p1 = q1 / (q0 + q1)
        if forced is not None and forced[i] >= 0:
            m = int(forced[i])
        else:
            m = 1 if u[i] < p1 else 0
        p = p1 if m else 1.0 - p1
        q = q1 if m else q0
        if q <= 0.0:
            raise ZeroDivisionError(f"forced outcome {m} has zero probability at step {i + 1}")
        v = (w1 if m else w0) / np.sqrt(q)
        v[np.abs(v) < PRUNE_TOL] = 0.0
        outcomes[i] = m
        probs[i] = p
        theta = 0.5 * (theta + m)
    if trace:
        return outcomes, probs, n0, n1, n_union, cross
    return outcomes, probs


def xor_pair_lambda(values: np.ndarray, width: int) -> int:
    """Quadruplet count Lambda = 4 * sum_x A(x)(A(x)-1) over pair XORs.

    A(x) counts unordered pairs of distinct support strings with XOR x.
    Counting ordered pairs c(x) = 2 A(x) instead lets the whole D x D
    XOR table feed one bincount: Lambda = sum_{x != 0} c(x)(c(x) - 2).
    """
    v = np.asarray(values, dtype=np.int64)
    D = len(v)
    if D < 4:
        return 0
    if width <= 22:
        counts = np.zeros(1 << width, dtype=np.int64)
        block = max(1, (1 << 23) // D)
        for i0 in range(0, D, block):
            blk = v[i0 : i0 + block, None] ^ v[None, :]
            counts += np.bincount(blk.ravel(), minlength=1 << width)
        c = counts[1:]
        return int(np.dot(c, c) - 2 * c.sum())
    # wide strings: accumulate sparse counts instead of a 2^width table
    acc: dict[int, int] = {}
    block = max(1, (1 << 23) // D)
    for i0 in range(0, D, block):
        blk = (v[i0 : i0 + block, None] ^ v[None, :]).ravel()
        uniq, cnt = np.unique(blk, return_counts=True)
        for x, c in zip(uniq.tolist(), cnt.tolist()):
            acc[x] = acc.get(x, 0) + c
    return sum(c * (c - 2) for x, c in acc.items() if x != 0)

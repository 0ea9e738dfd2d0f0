"""Quick oracle-equivalence battery behind the `selftest` CLI subcommand.

Cross-checks the independent computation routes on small instances:
sparse-support SRE against the 4^L brute force, the sparse engine against
the dense state-vector reference, the pair-count Lambda against direct
quadruplet enumeration, and (when built) the compiled kernels against the
numpy fallbacks.
"""

from __future__ import annotations

import itertools

import numpy as np

from shormagic import _kernels_py, kernels
from shormagic.magic import SupportSet, lambda_exact, sre_bruteforce, sre_sparse_exact, structured_state_sample
from shormagic.simulator import ShorInstance, SparseState, dense_reference, run


def lambda_quadruplet_bruteforce(strings) -> int:
    """O(D^3) count of ordered distinct quadruplets with zero XOR."""
    ss = set(strings)
    count = 0
    for m, n, p in itertools.permutations(strings, 3):
        q = m ^ n ^ p
        if q in ss and q not in (m, n, p):
            count += 1
    return count


def _check(name: str, ok: bool, detail: str, failures: list[str], verbose: bool) -> None:
    if verbose:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if not ok:
        failures.append(f"{name}: {detail}")


def run_selftest(verbose: bool = True) -> bool:
    failures: list[str] = []
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(20240901)))

    # sparse-exact SRE vs brute force on random sparse states
    worst = 0.0
    for _ in range(40):
        L = int(rng.integers(2, 9))
        D = int(rng.integers(1, min(2**L, 24) + 1))
        keys = rng.choice(2**L, size=D, replace=False)
        amps = rng.normal(size=D) + 1j * rng.normal(size=D)
        state = SparseState(L, {int(k): complex(a) for k, a in zip(keys, amps)})
        worst = max(worst, abs(sre_sparse_exact(state) - sre_bruteforce(state)))
    _check("sre random states", worst < 1e-9, f"max |sparse - brute| = {worst:.2e}", failures, verbose)

    # ... and on actual probe states
    worst = 0.0
    for N, a in ((15, 7), (21, 2), (33, 5)):
        instance = ShorInstance.from_modulus(N, a)
        for seed in range(2):
            _, traces = run(instance, seed, probe=True)
            for tr in traces:
                worst = max(worst, abs(sre_sparse_exact(tr.state_at_probe) - sre_bruteforce(tr.state_at_probe)))
    _check("sre probe states", worst < 1e-9, f"max |sparse - brute| = {worst:.2e}", failures, verbose)

    # sparse engine vs dense reference
    mismatches = 0
    for N, a in ((15, 7), (21, 2), (33, 10)):
        instance = ShorInstance.from_modulus(N, a)
        for seed in range(5):
            rec_sparse, _ = run(instance, seed)
            rec_dense, _ = dense_reference(instance, seed)
            if rec_sparse.outcomes != rec_dense.outcomes:
                mismatches += 1
    _check("sparse vs dense outcomes", mismatches == 0, f"{mismatches} mismatched runs", failures, verbose)

    # pair-count Lambda vs quadruplet enumeration
    worst_pair = None
    for _ in range(5):
        D = int(rng.integers(4, 40))
        strings = tuple(int(s) for s in rng.choice(2**12, size=D, replace=False))
        fast = lambda_exact(SupportSet(12, strings))
        slow = lambda_quadruplet_bruteforce(strings)
        if fast != slow:
            worst_pair = (fast, slow)
    _check("lambda pair counts", worst_pair is None, f"mismatch {worst_pair}" if worst_pair else "all equal", failures, verbose)

    # structured sample sanity: stabilizer for D = 1
    state = structured_state_sample(SupportSet(6, (13,)), seed=7)
    m2 = sre_bruteforce(state)
    _check("single-string stabilizer", abs(m2) < 1e-12, f"M2 = {m2:.2e}", failures, verbose)

    # compiled kernels agree with the numpy fallbacks
    if kernels.BACKEND == "cython":
        vals = np.sort(rng.choice(2**16, size=200, replace=False)).astype(np.int64)
        lam_c = kernels.xor_pair_lambda(vals, 16)
        lam_py = _kernels_py.xor_pair_lambda(vals, 16)
        shifts = np.array([pow(2, 13 - tau, 12) for tau in range(1, 14)], dtype=np.int64)
        u = np.random.Generator(np.random.Philox(1)).random(13)
        out_c, p_c = kernels.run_orbit(12, shifts, u, None, False)
        out_py, p_py = _kernels_py.run_orbit(12, shifts, u, None, False)
        ok = lam_c == lam_py and np.array_equal(out_c, out_py) and np.allclose(p_c, p_py, atol=1e-12)
        _check("compiled vs numpy kernels", ok, f"backend={kernels.BACKEND}", failures, verbose)
    elif verbose:
        print(f"SKIP  compiled kernels not built (backend={kernels.BACKEND})")

    if verbose:
        print("selftest:", "PASS" if not failures else f"FAIL ({len(failures)} checks)")
    return not failures

"""Batch runners for the four quantitative studies.

Each experiment writes one CSV (UTF-8, header row, '.' decimal) plus a
manifest JSON capturing config, seed, code version, and wall time. Rows
are sorted by their key columns and every random draw descends from the
single experiment seed through indexed SeedSequence children, so outputs
are byte-identical across re-runs and thread counts (manifest timing
fields aside).
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from shormagic import __version__, kernels
from shormagic.magic import (
    LOG2,
    SupportSet,
    final_probe_support,
    haar_average_m2,
    lambda_exact,
    m2_curve_analytic,
    m2_final_asymptotes,
    m2_structured,
    sre_sparse_exact,
)
from shormagic.numtheory import coprimes_by_period, order_spectrum, recover_period
from shormagic.simulator import ShorInstance, _rng_for, run

__all__ = [
    "SuccessStats",
    "PlateauPair",
    "ExperimentResult",
    "estimate_p_succ",
    "exp_magic_vs_tau",
    "exp_magic_vs_r",
    "exp_success_rate",
    "exp_plateau",
    "fit_success_slope",
    "thread_count",
]

S_NORM_FLOOR = 1e-3


@dataclass(frozen=True)
class SuccessStats:
    N: int
    L: int
    r: int
    a_count: int
    g: float
    p_succ: float
    ci_low: float
    ci_high: float
    S: float
    S_norm: float
    m2_final: float
    m2_ratio: float


@dataclass(frozen=True)
class PlateauPair:
    a: int
    r: int
    t_max: int
    delta_tau_m2: int
    delta_tau_psucc: int
    censored: bool


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    csv_path: Path
    manifest_path: Path
    rows: list
    extras: dict


def thread_count() -> int:
    env = os.environ.get("SHORMAGIC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _pool_map(fn, items):
    """Map preserving item order; thread count never affects results."""
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _children(seed, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float, float]:
    if n <= 0:
        return 0.0, 0.0, 1.0
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    return phat, max(0.0, center - half), min(1.0, center + half)


def _count_successes(N: int, a: int, r: int, t: int, reps: int, seed) -> int:
    """Monte Carlo success count via the orbit kernel."""
    shifts = np.array([pow(2, t - tau, r) for tau in range(1, t + 1)], dtype=np.int64)
    weights = 1 << np.arange(t, dtype=np.int64)
    u = _rng_for(seed).random((reps, t))
    wins = 0
    for i in range(reps):
        outcomes, _ = kernels.run_orbit(r, shifts, u[i], None, False)
        x_num = int(np.dot(outcomes.astype(np.int64), weights))
        if recover_period(x_num, t, a, N, r).success:
            wins += 1
    return wins


def estimate_p_succ(instance: ShorInstance, t: int, reps: int, seed) -> tuple[float, float, float]:
    """Success probability at depth t with a Wilson 95% interval.

    Deterministic under a fixed (seed, reps) pair regardless of
    parallelism; when no run succeeds, ci_high is the exact one-sided
    95% bound 1 - 0.05^(1/reps).
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    wins = _count_successes(instance.N, instance.a, instance.r, t, reps, seed)
    p, lo, hi = wilson_interval(wins, reps)
    if wins == 0:
        hi = 1.0 - 0.05 ** (1.0 / reps)
    return p, lo, hi


# ---------------------------------------------------------------------------
# output plumbing


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])


def _finish(
    name: str,
    out_dir,
    fieldnames: list[str],
    rows: list[dict],
    config: dict,
    seed,
    context: dict,
    extras: dict,
    started: float,
) -> ExperimentResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    manifest_path = out_dir / f"{name}.manifest.json"
    _write_csv(csv_path, fieldnames, rows)
    manifest = {
        "experiment": name,
        "config": config,
        "seed": seed,
        "code_version": __version__,
        "backend": kernels.BACKEND,
        "csv": csv_path.name,
        "rows": len(rows),
        "context": context,
        "extras": extras,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return ExperimentResult(name, csv_path, manifest_path, rows, extras)


def _pick_coprimes(table: dict[int, list[int]], r: int, count: int, rng) -> list[int]:
    pool = table[r]
    if count >= len(pool):
        return list(pool)
    picked = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in sorted(picked.tolist())]


# ---------------------------------------------------------------------------
# experiment 1: magic vs discrete time


def exp_magic_vs_tau(
    N: int,
    coprimes: list[int],
    reps: int,
    seed,
    out_dir,
    exact_sre: str = "auto",
) -> ExperimentResult:
    """M2(tau) curves: analytic (exact and closed Lambda) plus, when the
    instance is small enough, the simulated SRE averaged over `reps`
    runs. exact_sre: "auto" (L <= 12 only), "on", or "off"."""
    started = time.perf_counter()
    rows: list[dict] = []
    specs = sorted(coprimes)
    children = _children(seed, len(specs))
    instance0 = None

    def one(job):
        a, child = job
        instance = ShorInstance.from_modulus(N, a)
        exact_curve = m2_curve_analytic(instance, "exact-lambda")
        closed_curve = m2_curve_analytic(instance, "closed-lambda")
        simulate = exact_sre == "on" or (exact_sre == "auto" and instance.L <= 12)
        sums = np.zeros(instance.t)
        counts = np.zeros(instance.t, dtype=np.int64)
        if simulate:
            for rep_seed in child.spawn(reps):
                _, traces = run(instance, rep_seed, probe=True)
                for tr in traces:
                    try:
                        m2 = sre_sparse_exact(tr.state_at_probe)
                    except ValueError:
                        continue
                    sums[tr.tau - 1] += m2
                    counts[tr.tau - 1] += 1
        out = []
        for pt_exact, pt_closed in zip(exact_curve.entries, closed_curve.entries):
            tau = pt_exact.tau
            m2_sim = float(sums[tau - 1] / counts[tau - 1]) if counts[tau - 1] else None
            out.append(
                {
                    "r": instance.r,
                    "a": a,
                    "tau": tau,
                    "m2_analytic_exactLambda": pt_exact.m2_analytic,
                    "m2_analytic_closedLambda": pt_closed.m2_analytic,
                    "m2_exact": m2_sim,
                    "regime": pt_exact.regime,
                }
            )
        return instance, out

    for instance, chunk in _pool_map(one, list(zip(specs, children))):
        rows.extend(chunk)
        instance0 = instance
    rows.sort(key=lambda row: (row["r"], row["a"], row["tau"]))
    fieldnames = [
        "r",
        "a",
        "tau",
        "m2_analytic_exactLambda",
        "m2_analytic_closedLambda",
        "m2_exact",
        "regime",
    ]
    context = {
        "N": N,
        "L": instance0.L,
        "t": instance0.t,
        "haar_m2": haar_average_m2(instance0.L),
        "l_log2": instance0.L * LOG2,
    }
    config = {"N": N, "coprimes": specs, "reps": reps, "exact_sre": exact_sre}
    return _finish("magic_vs_tau", out_dir, fieldnames, rows, config, seed, context, {}, started)


# ---------------------------------------------------------------------------
# experiment 2: final magic vs period


def exp_magic_vs_r(N: int, samples_per_r: int, seed, out_dir) -> ExperimentResult:
    """Final-step analytic M2 (exact Lambda) for up to samples_per_r random
    coprimes of every period of N, with both asymptotic laws alongside."""
    started = time.perf_counter()
    table = coprimes_by_period(N)
    periods = sorted(table)
    children = _children(seed, len(periods))
    jobs = []
    for r, child in zip(periods, children):
        rng = np.random.Generator(np.random.Philox(child))
        for a in _pick_coprimes(table, r, samples_per_r, rng):
            jobs.append((r, a))

    def one(job):
        r, a = job
        instance = ShorInstance.from_modulus(N, a)
        sup = final_probe_support(instance)
        lam = lambda_exact(SupportSet(width=sup.width, strings=sup.strings))
        m2 = m2_structured(sup.D, lam)
        small, sat = m2_final_asymptotes(r, instance.L, instance.decomposition.epsilon)
        return {
            "r": r,
            "a": a,
            "m2_final_exactLambda": m2,
            "m2_small_r_asymptote": small,
            "m2_saturation_asymptote": sat,
        }

    rows = _pool_map(one, jobs)
    rows.sort(key=lambda row: (row["r"], row["a"]))
    instance = ShorInstance.from_modulus(N, jobs[0][1])
    fieldnames = ["r", "a", "m2_final_exactLambda", "m2_small_r_asymptote", "m2_saturation_asymptote"]
    context = {
        "N": N,
        "L": instance.L,
        "t": instance.t,
        "haar_m2": haar_average_m2(instance.L),
        "l_log2": instance.L * LOG2,
        "periods": len(periods),
    }
    config = {"N": N, "samples_per_r": samples_per_r}
    return _finish("magic_vs_r", out_dir, fieldnames, rows, config, seed, context, {}, started)


# ---------------------------------------------------------------------------
# experiment 3: conditional success rate


def exp_success_rate(
    N_list: list[int],
    reps_per_a: int,
    coprimes_per_r: int,
    seed,
    out_dir,
) -> ExperimentResult:
    """SuccessStats per (N, r): S = g * p_succ with p_succ pooled over up
    to coprimes_per_r sampled coprimes times reps_per_a runs each, and the
    exact-Lambda analytic M2 averaged over the same coprimes."""
    started = time.perf_counter()
    N_list = sorted(N_list)
    jobs = []
    spectra = {}
    master = np.random.SeedSequence(seed)
    for idx_n, N in enumerate(N_list):
        spectra[N] = order_spectrum(N)
        table = coprimes_by_period(N)
        for idx_r, r in enumerate(sorted(table)):
            pick_seed = np.random.SeedSequence(entropy=master.entropy, spawn_key=(idx_n, idx_r))
            rng = np.random.Generator(np.random.Philox(pick_seed))
            sample = _pick_coprimes(table, r, coprimes_per_r, rng)
            jobs.append((N, r, sample, pick_seed))

    def one(job):
        N, r, sample, pick_seed = job
        wins = 0
        total = 0
        m2_sum = 0.0
        instance = None
        for j, a in enumerate(sample):
            instance = ShorInstance.from_modulus(N, a)
            run_seed = np.random.SeedSequence(entropy=pick_seed.entropy, spawn_key=pick_seed.spawn_key + (j,))
            wins += _count_successes(N, a, r, instance.t, reps_per_a, run_seed)
            total += reps_per_a
            sup = final_probe_support(instance)
            m2_sum += m2_structured(sup.D, lambda_exact(SupportSet(sup.width, sup.strings)))
        p, lo, hi = wilson_interval(wins, total)
        if wins == 0:
            hi = 1.0 - 0.05 ** (1.0 / total)
        m2_final = m2_sum / len(sample)
        return {
            "N": N,
            "L": instance.L,
            "r": r,
            "a_count": len(sample),
            "g": float(spectra[N].entries[r]),
            "p_succ": p,
            "ci_low": lo,
            "ci_high": hi,
            "S": float(spectra[N].entries[r]) * p,
            "S_norm": 0.0,  # filled after the per-N maximum is known
            "m2_final": m2_final,
            "m2_ratio": m2_final / (instance.L * LOG2),
        }

    rows = _pool_map(one, jobs)
    for N in N_list:
        s_max = max(row["S"] for row in rows if row["N"] == N)
        for row in rows:
            if row["N"] == N:
                row["S_norm"] = row["S"] / s_max if s_max > 0 else 0.0
    rows.sort(key=lambda row: (row["N"], row["r"]))
    slope = fit_success_slope(rows)
    fieldnames = [
        "N",
        "L",
        "r",
        "a_count",
        "g",
        "p_succ",
        "ci_low",
        "ci_high",
        "S",
        "S_norm",
        "m2_final",
        "m2_ratio",
    ]
    context = {"N_list": N_list, "L_values": sorted({row["L"] for row in rows})}
    config = {"N_list": N_list, "reps_per_a": reps_per_a, "coprimes_per_r": coprimes_per_r}
    extras = {"loglog_slope_top_decade": slope}
    return _finish("success_rate", out_dir, fieldnames, rows, config, seed, context, extras, started)


def fit_success_slope(rows: list[dict]) -> float | None:
    """Least-squares slope of log S_norm vs log (r/N) over the top decade
    of r/N, excluding floor rows with S_norm <= 1e-3."""
    pts = [
        (row["r"] / row["N"], row["S_norm"])
        for row in rows
        if row["S_norm"] > S_NORM_FLOOR
    ]
    if not pts:
        return None
    xmax = max(x for x, _ in pts)
    pts = [(x, y) for x, y in pts if x >= xmax / 10.0]
    if len(pts) < 3:
        return None
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, _intercept = np.polyfit(lx, ly, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# experiment 4: plateau length vs success decay


def exp_plateau(
    N: int,
    coprimes: list[int],
    t_range,
    reps: int,
    seed,
    out_dir,
) -> ExperimentResult:
    """Magic plateau length vs success-probability decay interval.

    For each coprime, sweeps the depth t downward from t_max and records
    the largest t at which no run out of `reps` succeeds;
    delta_tau_psucc = t_max - that t. The magic interval
    delta_tau_m2 = t_max - ceil(log2 r) comes from the analytic schedule
    alone. Rows where p_succ never hits zero in the swept range are
    marked censored (degenerate small-r cases).
    """
    started = time.perf_counter()
    n = (N - 1).bit_length()
    t_max = 2 * n + 1
    t_values = sorted(set(t_range)) if t_range is not None else list(range(2, t_max + 1))
    if any(t < 1 or t > t_max for t in t_values):
        raise ValueError(f"t_range must lie within [1, {t_max}]")
    specs = sorted(coprimes)
    children = _children(seed, len(specs))

    def one(job):
        a, child = job
        instance = ShorInstance.from_modulus(N, a)
        r = instance.r
        t_zero = None
        sweep = [t for t in t_values if t <= t_max]
        for idx, t in enumerate(sorted(sweep, reverse=True)):
            t_seed = np.random.SeedSequence(entropy=child.entropy, spawn_key=child.spawn_key + (idx,))
            wins = _count_successes(N, a, r, t, reps, t_seed)
            if wins == 0:
                t_zero = t
                break
        censored = t_zero is None
        if censored:
            t_zero = min(sweep) - 1
        return PlateauPair(
            a=a,
            r=r,
            t_max=t_max,
            delta_tau_m2=t_max - (r - 1).bit_length(),
            delta_tau_psucc=t_max - t_zero,
            censored=censored,
        )

    pairs = _pool_map(one, list(zip(specs, children)))
    pairs.sort(key=lambda pr: (pr.r, pr.a))
    rows = [
        {
            "a": pr.a,
            "r": pr.r,
            "t_max": pr.t_max,
            "delta_tau_m2": pr.delta_tau_m2,
            "delta_tau_psucc": pr.delta_tau_psucc,
            "censored": pr.censored,
        }
        for pr in pairs
    ]
    fieldnames = ["a", "r", "t_max", "delta_tau_m2", "delta_tau_psucc", "censored"]
    context = {"N": N, "t_max": t_max, "t_values": t_values, "reps": reps}
    config = {"N": N, "coprimes": specs, "reps": reps, "t_values": t_values}
    return _finish("plateau", out_dir, fieldnames, rows, config, seed, context, {}, started)

"""Command-line entry point.

Subcommands: run, magic-curve, magic-vs-r, success-rate, plateau,
spectrum, selftest. Every experiment accepts --seed, --out and --config
(a flat `key = value` text file; explicit flags win over file values).
Thread count for the experiment runners comes from SHORMAGIC_THREADS
(default: min(4, cpu count)); results never depend on it.

Exit codes: 0 success, 1 runtime failure (diagnostic names the failing
module), 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from fractions import Fraction
from pathlib import Path

import numpy as np

from shormagic import __version__
from shormagic.experiments import (
    exp_magic_vs_tau,
    exp_magic_vs_r,
    exp_plateau,
    exp_success_rate,
)
from shormagic.numtheory import coprimes_by_period, order_spectrum
from shormagic.simulator import ShorInstance, run, write_trace_jsonl

# six semiprimes spanning L = 9..13, chosen with generic lambda (lambda/N ~ 0.45)
# and the richest realized period sets per size bracket
DEFAULT_SUCCESS_N = "209,407,899,923,1763,3503"


def _load_config(path: str) -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment; keys match flag names."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, key: str, default, cast):
    """flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return cast(flag)
    config = getattr(args, "_config_values", {})
    if key in config:
        return cast(config[key])
    return default


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).replace(",", " ").split()]


def _pick_coprimes_for_periods(N: int, r_list: list[int], seed: int) -> list[int]:
    table = coprimes_by_period(N)
    picked = []
    for idx, r in enumerate(sorted(set(r_list))):
        if r not in table:
            raise ValueError(f"no coprime of {N} has period {r}; available: {sorted(table)}")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(idx,))))
        pool = table[r]
        picked.append(pool[int(rng.integers(len(pool)))])
    return picked


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--out", type=str, default=None, help="output directory (default ./out)")
    parser.add_argument("--config", type=str, default=None, help="flat key=value config file; flags override it")


def _cmd_run(args) -> int:
    N = _resolve(args, "N", None, int)
    a = _resolve(args, "a", None, int)
    if N is None or a is None:
        raise ValueError("run requires --N and --a")
    t = _resolve(args, "t", None, int)
    seed = _resolve(args, "seed", 0, int)
    out = Path(_resolve(args, "out", "out", str))
    instance = ShorInstance.from_modulus(N, a, t)
    record, traces = run(instance, seed, probe=bool(args.trace))
    summary = {
        "N": N,
        "a": a,
        "r": instance.r,
        "t": instance.t,
        "L": instance.L,
        "seed": seed,
        "outcomes": list(record.outcomes),
        "x_num": record.x_num,
        "x": float(Fraction(record.x_num, 1 << instance.t)),
        "success": record.success,
        "found_period": record.found_period,
    }
    print(json.dumps(summary, sort_keys=True))
    if args.trace:
        out.mkdir(parents=True, exist_ok=True)
        trace_path = out / f"run_N{N}_a{a}_seed{seed}.trace.jsonl"
        write_trace_jsonl(traces, trace_path)
        print(f"trace: {trace_path}", file=sys.stderr)
    return 0


def _cmd_magic_curve(args) -> int:
    N = _resolve(args, "N", None, int)
    if N is None:
        raise ValueError("magic-curve requires --N")
    seed = _resolve(args, "seed", 0, int)
    out = _resolve(args, "out", "out", str)
    reps = _resolve(args, "reps", 150, int)
    exact_sre = _resolve(args, "exact_sre", "auto", str)
    a_list = _resolve(args, "a", None, _int_list)
    r_list = _resolve(args, "r", None, _int_list)
    if a_list and r_list:
        raise ValueError("pass either --a or --r, not both")
    if a_list is None:
        if r_list is None:
            r_list = sorted(order_spectrum(N).entries)
        a_list = _pick_coprimes_for_periods(N, r_list, seed)
    result = exp_magic_vs_tau(N, a_list, reps, seed, out, exact_sre=exact_sre)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows)")
    return 0


def _cmd_magic_vs_r(args) -> int:
    N = _resolve(args, "N", None, int)
    if N is None:
        raise ValueError("magic-vs-r requires --N")
    seed = _resolve(args, "seed", 0, int)
    out = _resolve(args, "out", "out", str)
    samples = _resolve(args, "samples_per_r", 10, int)
    result = exp_magic_vs_r(N, samples, seed, out)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows)")
    return 0


def _cmd_success_rate(args) -> int:
    N_list = _resolve(args, "N", _int_list(DEFAULT_SUCCESS_N), _int_list)
    seed = _resolve(args, "seed", 0, int)
    out = _resolve(args, "out", "out", str)
    reps = _resolve(args, "reps_per_a", 100, int)
    coprimes = _resolve(args, "coprimes_per_r", 10, int)
    result = exp_success_rate(N_list, reps, coprimes, seed, out)
    slope = result.extras.get("loglog_slope_top_decade")
    print(f"wrote {result.csv_path} ({len(result.rows)} rows); top-decade slope = {slope}")
    return 0


def _cmd_plateau(args) -> int:
    N = _resolve(args, "N", 18923, int)
    seed = _resolve(args, "seed", 0, int)
    out = _resolve(args, "out", "out", str)
    reps = _resolve(args, "reps", 2000, int)
    t_min = _resolve(args, "t_min", 2, int)
    a_list = _resolve(args, "a", None, _int_list)
    r_list = _resolve(args, "r", None, _int_list)
    if a_list and r_list:
        raise ValueError("pass either --a or --r, not both")
    if a_list is None:
        if r_list is None:
            raise ValueError("plateau requires --a or --r")
        a_list = _pick_coprimes_for_periods(N, r_list, seed)
    n = (N - 1).bit_length()
    result = exp_plateau(N, a_list, range(t_min, 2 * n + 2), reps, seed, out)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows)")
    return 0


def _cmd_spectrum(args) -> int:
    N = _resolve(args, "N", None, int)
    if N is None:
        raise ValueError("spectrum requires --N")
    out = _resolve(args, "out", None, str)
    spectrum = order_spectrum(N)
    total = Fraction(0)
    print(f"N = {N}  (coprimes counted: {spectrum.total_coprimes})")
    print("r,count,g")
    for r, g in spectrum.entries.items():
        total += g
        print(f"{r},{g.numerator * spectrum.total_coprimes // g.denominator},{float(g)!r}")
    print(f"sum g = {total}")
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"spectrum_N{N}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("r,count,g\n")
            for r, g in spectrum.entries.items():
                fh.write(f"{r},{g.numerator * spectrum.total_coprimes // g.denominator},{float(g)!r}\n")
        print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_selftest(args) -> int:
    from shormagic.selftest import run_selftest

    return 0 if run_selftest(verbose=True) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shormagic",
        description="Shor order-finding simulation and non-stabilizerness analysis",
    )
    parser.add_argument("--version", action="version", version=f"shormagic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single circuit execution, optional step trace")
    p.add_argument("--N", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--t", type=int, help="override the default depth 2n+1")
    p.add_argument("--trace", action="store_true", help="write a per-step JSONL trace")
    _add_common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("magic-curve", help="M2 vs step (Fig. 2a analogue)")
    p.add_argument("--N", type=int)
    p.add_argument("--a", type=str, help="comma-separated coprimes")
    p.add_argument("--r", type=str, help="comma-separated target periods (random coprime each)")
    p.add_argument("--reps", type=int, help="simulated realizations per coprime (default 150)")
    p.add_argument("--exact-sre", dest="exact_sre", choices=("auto", "on", "off"))
    _add_common(p)
    p.set_defaults(func=_cmd_magic_curve, a=None, r=None)

    p = sub.add_parser("magic-vs-r", help="final M2 vs period (Fig. 2b analogue)")
    p.add_argument("--N", type=int)
    p.add_argument("--samples-per-r", dest="samples_per_r", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_magic_vs_r)

    p = sub.add_parser("success-rate", help="conditional success rate S = g*p_succ (Fig. 3 analogue)")
    p.add_argument("--N", type=str, help=f"comma-separated moduli (default {DEFAULT_SUCCESS_N})")
    p.add_argument("--reps-per-a", dest="reps_per_a", type=int)
    p.add_argument("--coprimes-per-r", dest="coprimes_per_r", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_success_rate, N=None)

    p = sub.add_parser("plateau", help="magic plateau vs p_succ decay intervals (Fig. 4 analogue)")
    p.add_argument("--N", type=int)
    p.add_argument("--a", type=str, help="comma-separated coprimes")
    p.add_argument("--r", type=str, help="comma-separated target periods (random coprime each)")
    p.add_argument("--reps", type=int)
    p.add_argument("--t-min", dest="t_min", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_plateau, a=None, r=None)

    p = sub.add_parser("spectrum", help="order-occurrence spectrum g(r)")
    p.add_argument("--N", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("selftest", help="oracle-equivalence battery")
    _add_common(p)
    p.set_defaults(func=_cmd_selftest)

    return parser


def _failing_module(exc: BaseException) -> str:
    module = "shormagic"
    for frame in traceback.extract_tb(exc.__traceback__):
        if "shormagic" in frame.filename:
            stem = Path(frame.filename).stem
            module = f"shormagic.{stem}"
    return module


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config_values = _load_config(args.config) if getattr(args, "config", None) else {}
        return args.func(args)
    except Exception as exc:
        print(f"error in {_failing_module(exc)}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

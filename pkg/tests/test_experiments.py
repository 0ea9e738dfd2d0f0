import json
import math

import numpy as np
import pytest

from shormagic.experiments import (
    estimate_p_succ,
    exp_magic_vs_r,
    exp_magic_vs_tau,
    exp_plateau,
    exp_success_rate,
    fit_success_slope,
    wilson_interval,
)
from shormagic.simulator import ShorInstance


def manifest_without_timing(path):
    data = json.loads(path.read_text())
    data.pop("wall_time_s")
    data.pop("created_utc")
    return data


class TestWilson:
    def test_basic_shape(self):
        p, lo, hi = wilson_interval(50, 100)
        assert lo < p == 0.5 < hi

    def test_edge_counts(self):
        _, lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and hi > 0
        _, lo, hi = wilson_interval(50, 50)
        assert hi == 1.0 and lo < 1.0

    def test_width_scaling(self):
        _, lo1, hi1 = wilson_interval(200, 1000)
        _, lo2, hi2 = wilson_interval(400, 2000)
        ratio = (hi2 - lo2) / (hi1 - lo1)
        assert abs(ratio - 1 / math.sqrt(2)) < 0.02


class TestEstimatePSucc:
    def test_one_bit_depth_cannot_encode_period(self):
        inst = ShorInstance.from_modulus(15, 7)  # r = 4 > 2
        p, lo, hi = estimate_p_succ(inst, 1, 500, seed=0)
        assert p == 0.0 and lo == 0.0
        assert abs(hi - (1 - 0.05 ** (1 / 500))) < 1e-12

    def test_full_depth_exceeds_quarter(self):
        inst = ShorInstance.from_modulus(15, 7)
        p, lo, _ = estimate_p_succ(inst, 9, 2000, seed=0)
        assert p >= 0.25
        assert lo > 0.25  # exact value is 0.5

    def test_deterministic(self):
        inst = ShorInstance.from_modulus(21, 2)
        assert estimate_p_succ(inst, 11, 400, seed=5) == estimate_p_succ(inst, 11, 400, seed=5)

    def test_ci_shrinks_with_reps(self):
        inst = ShorInstance.from_modulus(21, 2)
        _, lo1, hi1 = estimate_p_succ(inst, 11, 500, seed=1)
        _, lo2, hi2 = estimate_p_succ(inst, 11, 2000, seed=1)
        assert (hi2 - lo2) < (hi1 - lo1) / 1.6  # ~1/2 expected


class TestMagicVsTau:
    def test_full_period_set_of_15(self, tmp_path):
        res = exp_magic_vs_tau(15, [1, 4, 7], reps=10, seed=0, out_dir=tmp_path)
        rs = {row["r"] for row in res.rows}
        assert rs == {1, 2, 4}
        assert len(res.rows) == 3 * 9
        for row in res.rows:
            assert row["m2_exact"] is not None  # L = 5 <= 12: simulated column filled
            if row["r"] in (1, 2):
                assert abs(row["m2_analytic_exactLambda"]) < 1e-12
                assert abs(row["m2_exact"]) < 1e-9
        assert res.csv_path.exists() and res.manifest_path.exists()
        header = res.csv_path.read_text().splitlines()[0]
        assert header == "r,a,tau,m2_analytic_exactLambda,m2_analytic_closedLambda,m2_exact,regime"

    def test_plateau_sits_below_ramp_peak_for_odd_r(self, tmp_path):
        res = exp_magic_vs_tau(33, [4], reps=0, seed=0, out_dir=tmp_path, exact_sre="off")
        ramp_peak = max(
            row["m2_analytic_exactLambda"] for row in res.rows if row["regime"] == "ramp"
        )
        plateau = [
            row["m2_analytic_exactLambda"] for row in res.rows if row["regime"] == "plateau"
        ]
        assert plateau and max(plateau) < ramp_peak

    def test_big_modulus_analytic_only(self, tmp_path):
        res = exp_magic_vs_tau(18923, [18922], reps=5, seed=0, out_dir=tmp_path)
        assert all(row["m2_exact"] is None for row in res.rows)
        assert all(abs(row["m2_analytic_exactLambda"]) < 1e-12 for row in res.rows)  # r = 2

    def test_haar_context_present(self, tmp_path):
        res = exp_magic_vs_tau(15, [7], reps=0, seed=0, out_dir=tmp_path, exact_sre="off")
        manifest = json.loads(res.manifest_path.read_text())
        assert manifest["context"]["haar_m2"] > 0
        assert manifest["context"]["l_log2"] == pytest.approx(5 * math.log(2))


class TestMagicVsR:
    def test_n15(self, tmp_path):
        res = exp_magic_vs_r(15, samples_per_r=2, seed=0, out_dir=tmp_path)
        assert {row["r"] for row in res.rows} == {2, 4}
        for row in res.rows:
            if row["r"] == 2:
                assert row["m2_final_exactLambda"] == 0.0
            if row["r"] == 4:
                # Lambda = 0 here, so the exact value equals the small-r law
                assert row["m2_final_exactLambda"] == pytest.approx(row["m2_small_r_asymptote"])

    def test_respects_sample_budget(self, tmp_path):
        res = exp_magic_vs_r(57, samples_per_r=2, seed=0, out_dir=tmp_path)
        counts = {}
        for row in res.rows:
            counts[row["r"]] = counts.get(row["r"], 0) + 1
        assert all(c <= 2 for c in counts.values())


class TestSuccessRate:
    def test_small_pair(self, tmp_path):
        res = exp_success_rate([15, 21], reps_per_a=40, coprimes_per_r=3, seed=0, out_dir=tmp_path)
        for N in (15, 21):
            rows = [row for row in res.rows if row["N"] == N]
            assert abs(sum(row["g"] for row in rows) - 1.0) < 1e-12
            assert max(row["S_norm"] for row in rows) == 1.0
        for row in res.rows:
            assert 0.0 <= row["p_succ"] <= 1.0
            assert row["ci_low"] <= row["p_succ"] <= row["ci_high"]
            assert row["S"] <= row["g"] + 1e-15

    def test_slope_fit_on_synthetic_rows(self):
        rows = [
            {"N": 1000, "r": r, "S_norm": (r / 1000.0) ** 1.2}
            for r in (40, 80, 160, 320, 640, 900)
        ]
        slope = fit_success_slope(rows)
        assert slope == pytest.approx(1.2, abs=1e-9)

    def test_slope_ignores_floor_rows(self):
        rows = [
            {"N": 1000, "r": r, "S_norm": (r / 1000.0)}
            for r in (200, 400, 800)
        ] + [{"N": 1000, "r": 2, "S_norm": 1e-9}]
        assert fit_success_slope(rows) == pytest.approx(1.0, abs=1e-9)


class TestPlateau:
    def test_r2_is_censored_easy_case(self, tmp_path):
        res = exp_plateau(15, [4, 7], range(2, 10), reps=300, seed=0, out_dir=tmp_path)
        by_r = {row["r"]: row for row in res.rows}
        assert by_r[2]["censored"] is True  # one-bit estimates already find r = 2
        assert by_r[2]["delta_tau_m2"] == 9 - 1
        assert by_r[4]["delta_tau_m2"] == 9 - 2
        assert all(row["t_max"] == 9 for row in res.rows)

    def test_rejects_bad_range(self, tmp_path):
        with pytest.raises(ValueError):
            exp_plateau(15, [7], range(0, 5), reps=10, seed=0, out_dir=tmp_path)


class TestDeterminism:
    def test_rerun_is_byte_identical(self, tmp_path):
        a = exp_success_rate([15, 21], 30, 2, seed=42, out_dir=tmp_path / "a")
        b = exp_success_rate([15, 21], 30, 2, seed=42, out_dir=tmp_path / "b")
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
        assert manifest_without_timing(a.manifest_path) == manifest_without_timing(b.manifest_path)

    def test_thread_count_does_not_change_output(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SHORMAGIC_THREADS", "1")
        a = exp_plateau(21, [2, 5, 13], range(2, 12), reps=100, seed=9, out_dir=tmp_path / "t1")
        monkeypatch.setenv("SHORMAGIC_THREADS", "4")
        b = exp_plateau(21, [2, 5, 13], range(2, 12), reps=100, seed=9, out_dir=tmp_path / "t4")
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a = exp_success_rate([15], 30, 2, seed=1, out_dir=tmp_path / "s1")
        b = exp_success_rate([15], 30, 2, seed=2, out_dir=tmp_path / "s2")
        assert a.csv_path.read_bytes() != b.csv_path.read_bytes()

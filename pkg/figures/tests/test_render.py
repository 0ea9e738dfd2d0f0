import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from figures.cli import main
from figures.render import FigureSpec, SchemaError, render


def _primary(*args):
    out = subprocess.run(
        [sys.executable, "-m", "shormagic.cli", *args],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    return out


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    """Acceptance-style CSVs produced through the primary CLI only."""
    root = tmp_path_factory.mktemp("csvs")
    _primary(
        "magic-curve", "--N", "18923", "--r", "2,259,1036", "--reps", "0",
        "--exact-sre", "off", "--seed", "3", "--out", str(root / "curve"),
    )
    _primary("magic-vs-r", "--N", "57", "--samples-per-r", "2", "--seed", "3", "--out", str(root / "vsr"))
    _primary(
        "success-rate", "--N", "15,21", "--reps-per-a", "20", "--coprimes-per-r", "2",
        "--seed", "3", "--out", str(root / "succ"),
    )
    _primary(
        "plateau", "--N", "15", "--a", "4,7", "--reps", "200", "--seed", "3",
        "--out", str(root / "plat"),
    )
    return root


ALL_KINDS = [
    ("magic-vs-tau", "curve/magic_vs_tau.csv"),
    ("magic-vs-r", "vsr/magic_vs_r.csv"),
    ("success-rate", "succ/success_rate.csv"),
    ("plateau", "plat/plateau.csv"),
]


class TestSmoke:
    def test_all_kinds_render_quickly(self, csv_dir, tmp_path):
        started = time.perf_counter()
        for kind, rel in ALL_KINDS:
            spec = FigureSpec(kind, csv_dir / rel, tmp_path / f"{kind}.png")
            _, written = render(spec)
            for path in written:
                assert path.exists() and path.stat().st_size > 1000, (kind, path)
            assert {p.suffix for p in written} == {".png", ".svg"}
        elapsed = time.perf_counter() - started
        print(f"\nACCEPTANCE [secondary] figures: PASS  four kinds rendered in {elapsed:.1f}s")
        assert elapsed < 30

    def test_cli_roundtrip(self, csv_dir, tmp_path, capsys):
        rc = main(
            [
                "plateau",
                "--in",
                str(csv_dir / "plat/plateau.csv"),
                "--out",
                str(tmp_path / "plat.png"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 2 and all(Path(line).exists() for line in out)


class TestMagicVsTauStructure:
    def test_shows_ramp_plateau_late_rise_and_flat_r2(self, csv_dir, tmp_path):
        spec = FigureSpec("magic-vs-tau", csv_dir / "curve/magic_vs_tau.csv", tmp_path / "curve.png")
        fig, _ = render(spec)
        lines = {ln.get_label(): np.asarray(ln.get_ydata()) for ln in fig.axes[0].lines if ln.get_label().startswith("r=")}
        r2 = next(v for k, v in lines.items() if k.startswith("r=2 "))
        assert np.allclose(r2, 0.0, atol=1e-12)  # flat stabilizer line
        big = next(v for k, v in lines.items() if k.startswith("r=1036"))
        # ramp: strictly increasing over the first steps (tau* = 9 for r = 1036)
        assert all(np.diff(big[2:9]) > 0)
        # plateau: flat mid-section
        plateau = big[13:29]
        assert plateau.max() - plateau.min() < 1e-6
        # late rise: last k = 2 steps grow above the plateau
        assert big[-1] > big[-2] > plateau.mean()
        # Haar baseline drawn
        labels = [ln.get_label() for ln in fig.axes[0].lines]
        assert "Haar average" in labels

    def test_requires_manifest(self, csv_dir, tmp_path):
        lonely = tmp_path / "lonely.csv"
        lonely.write_text((csv_dir / "curve/magic_vs_tau.csv").read_text())
        with pytest.raises(ValueError, match="manifest"):
            render(FigureSpec("magic-vs-tau", lonely, tmp_path / "x.png"))


class TestFailureModes:
    def test_missing_columns_schema_error(self, csv_dir, tmp_path):
        src = (csv_dir / "plat/plateau.csv").read_text().splitlines()
        butchered = tmp_path / "bad.csv"
        butchered.write_text("\n".join(line.rsplit(",", 1)[0] for line in src) + "\n")
        with pytest.raises(SchemaError, match="censored"):
            render(FigureSpec("plateau", butchered, tmp_path / "x.png"))
        rc = main(["plateau", "--in", str(butchered), "--out", str(tmp_path / "x.png")])
        assert rc == 1

    def test_empty_csv_is_loud(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("a,r,t_max,delta_tau_m2,delta_tau_psucc,censored\n")
        with pytest.raises(ValueError, match="no data rows"):
            render(FigureSpec("plateau", empty, tmp_path / "x.png"))
        assert main(["plateau", "--in", str(empty), "--out", str(tmp_path / "x.png")]) == 1
        assert not (tmp_path / "x.png").exists()

    def test_headerless_file(self, tmp_path):
        blank = tmp_path / "blank.csv"
        blank.write_text("")
        with pytest.raises(SchemaError):
            render(FigureSpec("plateau", blank, tmp_path / "x.png"))

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kind"):
            FigureSpec("pie-chart", tmp_path / "x.csv", tmp_path / "x.png")


class TestDeterminism:
    def test_rerender_is_byte_identical(self, csv_dir, tmp_path):
        for kind, rel in ALL_KINDS:
            paths = []
            for sub in ("one", "two"):
                spec = FigureSpec(kind, csv_dir / rel, tmp_path / sub / f"{kind}.png")
                _, written = render(spec)
                paths.append(sorted(written))
            for p1, p2 in zip(*paths):
                assert p1.read_bytes() == p2.read_bytes(), (kind, p1.suffix)

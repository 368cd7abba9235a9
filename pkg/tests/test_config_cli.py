import csv
import hashlib
import json
import math
import textwrap

import pytest

from dispecho.cli import main
from dispecho.config import ConfigError, load_config, parse_config
from dispecho.runner import fmt, run_echo_sweep

SMALL = textwrap.dedent(
    """
    # tiny sweep used by the CLI tests
    [grid]
    N = 128
    [dynamics]
    K = 10.09, 50.09
    [ensemble]
    size = 4
    seed = 99
    n_max = 8
    [displacements]
    m = 0, 3
    np_over_2pi = 0.5
    [analysis]
    fit_start = 1
    fit_end = 4
    tail_start = 5
    tail_end = 8
    [output]
    tag = small
    """
)


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_parse_defaults_and_lists():
    cfg = parse_config(SMALL)
    assert cfg.N == 128
    assert cfg.K_list == (10.09, 50.09)
    assert cfg.np_over_2pi == (0.0, 3.0, 0.5)
    assert cfg.P_list[1] == pytest.approx(3 * 2 * math.pi / 128)
    assert cfg.sigma is None and cfg.width == pytest.approx(math.sqrt(2 * math.pi / 128))
    assert cfg.tail_window == (5, 8)
    assert cfg.theory_rate == "analytic"


@pytest.mark.parametrize(
    "text,line",
    [
        ("[grid]\nN = 64\nM = 3\n", 3),
        ("[grid]\nN = 64\n[bogus]\n", 3),
        ("N = 64\n", 1),
        ("[grid]\nN = 63\n[dynamics]\nK=1\n[ensemble]\nn_max=3\n[displacements]\nm=1\n", 2),
        ("[grid]\nN = 64\nN = 64\n", 3),
        ("[grid]\nN = sixty\n", 2),
        ("[grid]\nN 64\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as err:
        parse_config(text, source="x.cfg")
    assert err.value.line == line
    assert f"x.cfg:{line}:" in str(err.value)


def test_missing_displacements():
    with pytest.raises(ConfigError, match="displacements"):
        parse_config("[grid]\nN=64\n[dynamics]\nK=1\n[ensemble]\nn_max=3\n")


def test_fmt_is_lossless():
    for x in (math.pi, 1 / 3, 1e-300, -2.5e17):
        assert float(fmt(x)) == x
    assert fmt(3) == "3" and fmt(True) == "1"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_echo_sweep_outputs(small_config, tmp_path):
    result = run_echo_sweep(small_config, root=tmp_path / "runs")
    names = set(result.manifest["outputs"])
    assert "fits.csv" in names and len(names) == 7
    assert result.run_dir.name.endswith("-small")
    for name, digest in result.manifest["outputs"].items():
        data = (result.run_dir / name).read_bytes()
        assert hashlib.sha256(data).hexdigest() == digest
        assert b"\r" not in data
    rows = read_csv(result.run_dir / "echo_K10.09_np0.csv")
    assert list(rows[0]) == ["n", "mean_MD", "stderr_MD", "re_mean_I", "im_mean_I", "theory_decay", "theory_freeze"]
    assert all(float(r["mean_MD"]) == pytest.approx(1.0, abs=1e-10) for r in rows)
    assert len(read_csv(result.run_dir / "fits.csv")) == 6
    manifest = json.loads((result.run_dir / "manifest.json").read_text())
    assert manifest["seed"] == 99 and manifest["command"] == "echo-sweep"


def test_reruns_identical(small_config, tmp_path):
    a = run_echo_sweep(small_config, root=tmp_path / "runs")
    b = run_echo_sweep(small_config, root=tmp_path / "runs", workers=2)
    assert a.run_dir != b.run_dir
    assert a.manifest["outputs"] == b.manifest["outputs"]


def test_cli_subcommands(small_config, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DISPECHO_OUTPUT_ROOT", str(tmp_path / "env_runs"))
    assert main(["echo-sweep", str(small_config)]) == 0
    assert main(["saturation-scan", str(small_config)]) == 0
    assert main(["theory-curve", str(small_config)]) == 0
    runs = sorted((tmp_path / "env_runs").iterdir())
    assert len(runs) == 3
    sat = [p for p in runs if (p / "saturation_K10.09.csv").exists()][0]
    rows = read_csv(sat / "saturation_K10.09.csv")
    assert list(rows[0])[:4] == ["NP_over_2pi", "tail_mean", "tail_stderr", "theory"]
    assert float(rows[0]["tail_mean"]) == pytest.approx(1.0, abs=1e-10)
    theory_rows = read_csv([p for p in runs if (p / "theory_K10.09_np0.5.csv").exists()][0] / "theory_K10.09_np0.5.csv")
    assert float(theory_rows[0]["predicted"]) == 1.0
    capsys.readouterr()

    assert main(["lyapunov", "--K", "10.09", "--steps", "20000", "--seed", "3"]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert float(values["lyapunov"]) == pytest.approx(math.log(10.09 / 2), rel=0.1)


def test_cli_config_error_leaves_nothing(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[grid]\nN = 64\nbananas = 3\n")
    root = tmp_path / "runs"
    assert main(["echo-sweep", str(bad), "--output-root", str(root)]) == 1
    assert "bad.cfg:3:" in capsys.readouterr().err
    assert not root.exists() or not any(root.iterdir())
    assert main(["echo-sweep", str(tmp_path / "missing.cfg"), "--output-root", str(root)]) == 1


def test_theory_curve_rejects_fitted_rate(tmp_path):
    path = tmp_path / "f.cfg"
    path.write_text(SMALL.replace("tail_end = 8", "tail_end = 8\ntheory_rate = fitted"))
    assert main(["theory-curve", str(path), "--output-root", str(tmp_path)]) == 1


def test_oracle_suite_cli(capsys):
    assert main(["oracle-suite"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert lines[-1]["summary"]["failed"] == 0
    dense = [l for l in lines[:-1] if l["name"].startswith("dense_vs_fast")]
    assert {int(l["name"].split()[1][2:]) for l in dense} == {8, 16, 32}
    assert all(l["observed"] < 1e-10 for l in dense)


def test_oracle_suite_detects_fault(capsys):
    assert main(["oracle-suite", "--inject-fault"]) == 2
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    failed = [l for l in lines[:-1] if not l["passed"]]
    assert any(l["name"].startswith("dense_vs_fast") and l["observed"] > 1e-6 for l in failed)


def test_shipped_configs_parse():
    from pathlib import Path

    configs = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))
    assert configs
    for path in configs:
        config = load_config(path)
        assert config.seed == 12345

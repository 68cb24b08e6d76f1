import json
import os

import numpy as np
import pytest

from birkhoff_rre.cli import figure2_errors, main
from birkhoff_rre.config import WORKERS_ENV_VAR, load_config
from birkhoff_rre.errors import ConfigError


def write_config(path, body):
    path.write_text(body)
    return str(path)


BASE = """
[map]
name = standard-map
k = 0.7
observable = embedding

[algorithm]
epsilon = 0
gamma = 3
delta_adapt = 1e-10
k_init = 50
k_max = 200
delta_k = 50

[seeds]
mode = list
seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05

[output]
table = {table}
"""


def read_body(path):
    """CSV contents with the version-stamp header stripped."""
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# birkhoff-rre ")
    return "\n".join(lines[1:])


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "bad.ini", BASE.format(table="t.csv") + "\n[algorithm]\n")
        bad = cfg.replace("bad.ini", "bad2.ini")
        (tmp_path / "bad2.ini").write_text(
            BASE.format(table="t.csv").replace("epsilon = 0", "epsilonn = 0")
        )
        with pytest.raises(ConfigError, match="epsilonn"):
            load_config(bad)

    def test_unknown_section_rejected(self, tmp_path):
        cfg = write_config(tmp_path / "bad.ini",
                           BASE.format(table="t.csv") + "\n[plotting]\nstyle = dark\n")
        with pytest.raises(ConfigError, match="plotting"):
            load_config(cfg)

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.ini"))

    def test_exit_code_two_on_bad_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "bad.ini",
                           BASE.format(table="t.csv").replace("k = 0.7", "k = seven"))
        assert main(["classify", cfg]) == 2
        assert "config error" in capsys.readouterr().err

    def test_line_seed_grid(self, tmp_path):
        body = BASE.format(table="t.csv").replace(
            "mode = list\nseeds = 0.0 0.0; 0.1 0.0; 0.5 0.05",
            "mode = line\nx = 0.05\ny_min = 0.0\ny_max = 0.6\ncount = 4",
        )
        cfg = load_config(write_config(tmp_path / "line.ini", body))
        assert np.allclose(cfg.seeds,
                           [(0.05, 0.0), (0.05, 0.2), (0.05, 0.4), (0.05, 0.6)],
                           atol=1e-15)

    def test_workers_env_override(self, tmp_path, monkeypatch):
        cfg = load_config(write_config(tmp_path / "ok.ini", BASE.format(table="t.csv")))
        assert cfg.effective_workers() == 1
        monkeypatch.setenv(WORKERS_ENV_VAR, "3")
        assert cfg.effective_workers() == 3
        monkeypatch.setenv(WORKERS_ENV_VAR, "zero")
        with pytest.raises(ConfigError):
            cfg.effective_workers()


class TestClassifyCommand:
    def test_rows_and_determinism(self, tmp_path):
        table = tmp_path / "out.csv"
        circles = tmp_path / "circles"
        cfg = write_config(
            tmp_path / "run.ini",
            BASE.format(table=table) + f"circles = {circles}\n",
        )
        assert main(["classify", cfg]) == 0
        body_one = read_body(table)
        lines = body_one.splitlines()
        assert lines[0] == ("seed_x,seed_y,class,period,rotation,R,R_G,R_p,K,N,flags")
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 3
        by_seed = {(row[0], row[1]): row for row in rows}
        fixed = by_seed[("0", "0")]
        assert fixed[2] == "integrable" and fixed[3] == "1"
        assert "fixed_point" in fixed[10]
        circle_row = by_seed[("0.10000000000000001", "0")]
        assert circle_row[2] == "integrable"
        assert abs(float(circle_row[4]) - 0.1330925) < 1e-4
        assert float(circle_row[7]) < 1e-2  # validation residual
        chaos_row = by_seed[("0.5", "0.050000000000000003")]
        assert chaos_row[2] == "chaotic"
        assert chaos_row[4] == ""
        # rerun: byte-identical body
        assert main(["classify", cfg]) == 0
        assert read_body(table) == body_one
        # circle JSON for the two integrable seeds only
        files = sorted(os.listdir(circles))
        assert files == ["circle_0000.json", "circle_0001.json"]
        payload = json.loads((circles / "circle_0001.json").read_text())
        assert payload["period"] == 1
        assert payload["L"] >= 1
        assert len(payload["coefficients"]) == 1  # one island block
        assert len(payload["coefficients"][0]) == 2 * payload["L"] + 1
        assert len(payload["coefficients"][0][0]) == 2  # D components, [re, im] each

    def test_parallel_output_identical(self, tmp_path, monkeypatch):
        table = tmp_path / "out.csv"
        cfg = write_config(tmp_path / "run.ini", BASE.format(table=table))
        assert main(["classify", cfg]) == 0
        serial = read_body(table)
        monkeypatch.setenv(WORKERS_ENV_VAR, "2")
        assert main(["classify", cfg]) == 0
        assert read_body(table) == serial

    def test_budget_accounting_scalar_observable(self, tmp_path):
        table = tmp_path / "out.csv"
        body = BASE.format(table=table).replace(
            "observable = embedding", "observable = y"
        ).replace("gamma = 3", "gamma = 2").replace(
            "seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05", "seeds = 0.1 0.0"
        )
        cfg = write_config(tmp_path / "run.ini", body)
        assert main(["classify", cfg]) == 0
        row = read_body(table).splitlines()[1].split(",")
        k, n = int(row[8]), int(row[9])
        # N map evaluations is one less than the (2+gamma)K+1 samples
        assert n + 1 == (2 + 2) * k + 1

    def test_seed_error_recorded_not_raised(self, tmp_path, monkeypatch):
        table = tmp_path / "out.csv"
        cfg = write_config(tmp_path / "run.ini", BASE.format(table=table))
        import birkhoff_rre.cli as cli_module

        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(cli_module, "classify_trajectory", boom)
        assert main(["classify", cfg]) == 3
        rows = [line.split(",") for line in read_body(table).splitlines()[1:]]
        assert all(row[2] == "error" for row in rows)
        assert all("synthetic failure" in row[10] for row in rows)


class TestConvergeCommand:
    def test_columns_and_budget(self, tmp_path):
        table = tmp_path / "conv.csv"
        body = BASE.format(table=table).replace(
            "seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05", "seeds = 0.1 0.0"
        ).replace("gamma = 3", "gamma = 2") + "\n"
        body = body.replace("delta_adapt = 1e-10",
                            "delta_adapt = 1e-10\nk_values = 25 50")
        cfg = write_config(tmp_path / "run.ini", body)
        assert main(["converge", cfg]) == 0
        lines = open(table).read().splitlines()
        assert lines[1] == "seed_x,seed_y,K,N,R_rre,R_wba"
        rows = [line.split(",") for line in lines[2:]]
        assert [int(r[2]) for r in rows] == [25, 50]
        for row in rows:
            k, n = int(row[2]), int(row[3])
            assert n == k + 2 * k + 1  # T = ceil(2K/2) = K for D = 2
            assert float(row[4]) < 1e-11   # integrable: filter side converged
            assert float(row[5]) > 0.0

    def test_chaotic_seed_neither_method_converges(self, tmp_path):
        table = tmp_path / "conv.csv"
        body = BASE.format(table=table).replace(
            "seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05", "seeds = 0.5 0.05"
        ).replace("delta_adapt = 1e-10", "delta_adapt = 1e-10\nk_values = 100 200")
        cfg = write_config(tmp_path / "run.ini", body)
        assert main(["converge", cfg]) == 0
        for line in open(table).read().splitlines()[2:]:
            row = line.split(",")
            # the doubling residual sits in the chaotic band; the filter
            # residual fluctuates but never approaches the 1e-11
            # integrable gate
            assert float(row[4]) > 1e-8
            assert float(row[5]) > 1e-5

    def test_fixed_point_rre_zero_at_first_k(self, tmp_path):
        table = tmp_path / "conv.csv"
        body = BASE.format(table=table).replace(
            "seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05", "seeds = 0.0 0.0"
        ).replace("delta_adapt = 1e-10", "delta_adapt = 1e-10\nk_values = 25")
        cfg = write_config(tmp_path / "run.ini", body)
        assert main(["converge", cfg]) == 0
        row = open(table).read().splitlines()[2].split(",")
        assert float(row[4]) == 0.0


class TestAverageCommand:
    def test_twist_y_average_is_exact(self, tmp_path):
        table = tmp_path / "avg.csv"
        body = BASE.format(table=table).replace("k = 0.7", "k = 0.0")
        body = body.replace("observable = embedding", "observable = y")
        body = body.replace("seeds = 0.0 0.0; 0.1 0.0; 0.5 0.05",
                            "seeds = 0.1 0.6180339887498949")
        body = body.replace("delta_adapt = 1e-10", "delta_adapt = 1e-10\nn_samples = 2000")
        cfg = write_config(tmp_path / "run.ini", body)
        assert main(["average", cfg]) == 0
        lines = open(table).read().splitlines()
        assert lines[1] == "seed_x,seed_y,n,avg_0"
        row = lines[2].split(",")
        assert int(row[2]) == 2000
        assert abs(float(row[3]) - 0.6180339887498949) < 1e-14


class TestFigure2Command:
    def test_reported_errors(self, capsys):
        assert main(["figure2"]) == 0
        output = capsys.readouterr().out
        assert output.count("[pass]") == 3
        errors = figure2_errors()
        assert abs(errors["all-ones"] - 7.11e-2) <= 0.05 * 7.11e-2
        assert abs(errors["wba"] - 7.38e-3) <= 0.05 * 7.38e-3
        assert abs(errors["tuned"] - 2.72e-5) <= 0.05 * 2.72e-5

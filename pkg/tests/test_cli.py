import csv
import os

import pytest

from hashalloc.cli import main
from hashalloc.oracle import mine_chain, write_headers

TOY_DIFFICULTY = 64.0 / 2.0 ** 32


@pytest.fixture()
def scenario_file(tmp_path):
    path = tmp_path / "tiny.scn"
    path.write_text(
        "chain_a.target_block_time_s = 600\n"
        "chain_a.coins_per_block = 12.5\n"
        "chain_b.target_block_time_s = 600\n"
        "chain_b.coins_per_block = 12.5\n"
        "population.loyal_a = 0.05\n"
        "population.loyal_b = 0.05\n"
        "population.policy = eps_greedy\n"
        "population.epsilon = 1e-3\n"
        "duration_days = 3\n"
        "warmup_days = 0.5\n"
        "rng_seed = 2\n")
    return str(path)


class TestEquilibriumCommand:
    def test_symmetric(self, capsys):
        assert main(["equilibrium", "--ta", "600", "--tb", "600", "--r", "0.5"]) == 0
        assert capsys.readouterr().out.split() == ["0.5", "0.5"]

    def test_from_prices(self, capsys):
        code = main(["equilibrium", "--ta", "600", "--tb", "600",
                     "--pa", "11000", "--pb", "400", "--ca", "12.5",
                     "--cb", "12.5"])
        assert code == 0
        share_a, share_b = map(float, capsys.readouterr().out.split())
        assert share_b == pytest.approx(400 / 11400, rel=1e-9)

    def test_out_of_range_reward_is_domain_error(self, capsys):
        assert main(["equilibrium", "--ta", "600", "--tb", "600",
                     "--r", "1.5"]) == 3

    def test_missing_inputs_is_input_error(self, capsys):
        assert main(["equilibrium", "--ta", "600", "--tb", "600"]) == 2

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["equilibrium", "--ta", "600", "--tb", "600", "--frob", "1"])
        assert exc.value.code == 1


class TestAttackCostCommand:
    def test_single_point(self, capsys):
        code = main(["attack-cost", "--alpha", "0.036364", "--c", "12.5",
                     "--pa", "11000", "--pb", "400", "--gamma", "1.000001",
                     "--beta", "0"])
        assert code == 0
        cost = float(capsys.readouterr().out)
        assert cost == pytest.approx(181.8, abs=1.0)

    def test_curve_csv(self, capsys, tmp_path):
        out = str(tmp_path / "curve.csv")
        code = main(["attack-cost", "--alpha", "0.036364", "--c", "12.5",
                     "--pa", "11000", "--pb", "400", "--budgets", "10,15",
                     "--gammas", "1.1:3.0:5", "--out", out])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 10
        fixed_budget = [float(r["cost_per_block"]) for r in rows
                        if r["budget"] == "15"]
        assert fixed_budget == sorted(fixed_budget)

    def test_invalid_scenario_is_domain_error(self):
        assert main(["attack-cost", "--alpha", "0.5", "--c", "12.5",
                     "--pa", "11000", "--pb", "400", "--gamma", "3",
                     "--beta", "0"]) == 3


class TestIssuanceCommand:
    def test_price_impact(self, capsys):
        assert main(["issuance", "--market-cap", "1000", "--issued", "100",
                     "--delta", "100"]) == 0
        assert "delta_price=-5" in capsys.readouterr().out

    def test_equilibrium_shift(self, capsys):
        assert main(["issuance", "--k", "2", "--alpha", "0.036",
                     "--beta", "1.08", "--gamma", "1.2"]) == 0
        out = capsys.readouterr().out
        assert "w_B=0.0608" in out

    def test_no_arguments_is_input_error(self):
        assert main(["issuance"]) == 2


class TestSimulateAndMetrics:
    def test_trace_file_and_metrics(self, scenario_file, tmp_path, capsys):
        trace_path = str(tmp_path / "trace.csv")
        assert main(["simulate", "--scenario", scenario_file,
                     "--out", trace_path, "--engine", "python"]) == 0
        assert os.path.exists(trace_path)
        assert main(["metrics", "--trace", trace_path,
                     "--warmup-days", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "mean_abs_dev=" in out and "amplitude=" in out

    def test_stdout_trace(self, scenario_file, capsys):
        assert main(["simulate", "--scenario", scenario_file, "--out", "-",
                     "--engine", "python"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("tau,time_s,chain,")
        assert len(lines) > 100

    def test_seed_override_changes_trace(self, scenario_file, tmp_path):
        p1 = str(tmp_path / "a.csv")
        p2 = str(tmp_path / "b.csv")
        main(["simulate", "--scenario", scenario_file, "--out", p1,
              "--engine", "python"])
        main(["simulate", "--scenario", scenario_file, "--out", p2,
              "--seed", "77", "--engine", "python"])
        assert open(p1).read() != open(p2).read()

    def test_multi_seed_parallel(self, scenario_file, tmp_path):
        out_dir = str(tmp_path / "batch")
        assert main(["simulate", "--scenario", scenario_file,
                     "--seeds", "1,2", "--out-dir", out_dir,
                     "--engine", "python"]) == 0
        assert sorted(os.listdir(out_dir)) == ["trace_seed1.csv", "trace_seed2.csv"]

    def test_unknown_scenario_is_input_error(self):
        assert main(["simulate", "--scenario", "not_a_thing"]) == 2

    def test_missing_trace_is_input_error(self):
        assert main(["metrics", "--trace", "/nonexistent/trace.csv"]) == 2


class TestOracleVerifyCommand:
    def test_valid_fixture_query(self, tmp_path, capsys):
        alpha = 0.25
        a_path = str(tmp_path / "a_headers.csv")
        b_path = str(tmp_path / "b_headers.csv")
        write_headers(a_path, mine_chain(4, 1e-7))
        write_headers(b_path, mine_chain(4, alpha * 1e-7))
        code = main(["oracle-verify", "--a-headers", a_path,
                     "--b-headers", b_path, "--height-a", "3",
                     "--height-b", "3"])
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(alpha, rel=1e-9)

    def test_tampered_fixture_is_domain_error(self, tmp_path, capsys):
        a_path = str(tmp_path / "a_headers.csv")
        b_path = str(tmp_path / "b_headers.csv")
        write_headers(a_path, mine_chain(4, 1e-7))
        headers = mine_chain(4, 1e-7)
        headers[2], headers[3] = headers[3], headers[2]
        write_headers(b_path, headers)
        code = main(["oracle-verify", "--a-headers", a_path,
                     "--b-headers", b_path, "--height-a", "2",
                     "--height-b", "2"])
        assert code == 3
        assert "HeightGap" in capsys.readouterr().err


class TestIngestCompareCommand:
    def test_end_to_end(self, tmp_path, capsys):
        prices = tmp_path / "prices.csv"
        difficulty = tmp_path / "difficulty.csv"
        lines_p = ["timestamp,price_A,price_B"]
        lines_d = ["timestamp,difficulty_A,difficulty_B"]
        for i in range(6):
            ts = 3600 * i
            lines_p.append(f"{ts},11000,396")
            lines_d.append(f"{ts},{26.5e12},{1e12}")
        prices.write_text("\n".join(lines_p) + "\n")
        difficulty.write_text("\n".join(lines_d) + "\n")
        code = main(["ingest-compare", "--prices", str(prices),
                     "--difficulty", str(difficulty), "--cadence", "3600"])
        assert code == 0
        out_lines = capsys.readouterr().out.strip().splitlines()
        assert out_lines[0] == "timestamp_s,w_A_actual,w_eA,deviation,flagged"
        assert len(out_lines) == 7
        deviations = [float(line.split(",")[3]) for line in out_lines[1:]]
        assert max(deviations) < 0.005

    def test_bad_file_is_input_error(self, tmp_path):
        prices = tmp_path / "prices.csv"
        prices.write_text("0,1\n")
        assert main(["ingest-compare", "--prices", str(prices),
                     "--difficulty", str(prices), "--cadence", "60"]) == 2

import io
import json
import random

import pytest

from treelect.cli import main as cli_main
from treelect.harness import (
    SweepSpec,
    random_tree,
    random_tree_with_diameter,
    run_election,
    sweep,
    verify_outputs,
    write_records_csv,
)
from treelect.tree import build_tree, diameter_and_center
from treelect.unbounded import advice_unbounded


class TestGenerators:
    def test_random_tree_seeded_deterministic(self):
        t1 = random_tree(40, random.Random(7))
        t2 = random_tree(40, random.Random(7))
        assert t1.nbr == t2.nbr

    def test_random_tree_with_diameter(self):
        rng = random.Random(3)
        for n, d in [(30, 5), (50, 25), (80, 79), (64, 8)]:
            t = random_tree_with_diameter(n, d, rng)
            assert t.n == n
            assert diameter_and_center(t).diameter == d


class TestVerify:
    def test_all_empty_outputs_fail(self):
        t = build_tree([(0, 0, 1, 0)])
        all_simple, common, _ = verify_outputs(t, {0: (), 1: ()})
        assert all_simple and not common

    def test_correct_outputs_pass(self):
        t = build_tree([(0, 0, 1, 0)])
        all_simple, common, elected = verify_outputs(t, {0: (), 1: (0,)})
        assert all_simple and common and elected == 0

    def test_non_simple_detected(self):
        t = build_tree([(0, 0, 1, 0), (1, 1, 2, 0)])
        all_simple, _, _ = verify_outputs(t, {0: (0, 0), 1: (), 2: (0,)})
        assert not all_simple


class TestRunElection:
    def test_deterministic_across_threads(self, monkeypatch):
        rng = random.Random(5)
        t = random_tree(60, rng)
        advice = advice_unbounded(t, 3)
        one = run_election(t, advice, "unbounded", 3)
        monkeypatch.setenv("TREELECT_THREADS", "4")
        four = run_election(t, advice, "unbounded", 3)
        assert one.outputs == four.outputs and four.ok

    def test_measures_reported(self):
        t = build_tree([(0, 0, 1, 0)])
        advice = advice_unbounded(t, 1)
        outcome = run_election(t, advice, "unbounded", 1)
        assert (outcome.advice_size, outcome.advice_valency) == (1, 2)


class TestSweep:
    def test_empty_grid(self):
        assert sweep(SweepSpec(sizes=())) == []

    def test_small_grid_all_pass(self):
        records = sweep(SweepSpec(sizes=(10, 16), taus=(0, 1, 2), seed=9))
        assert records and all(r.ok for r in records)

    def test_csv_emission(self):
        records = sweep(SweepSpec(sizes=(8,), taus=(1,), seed=2))
        buf = io.StringIO()
        write_records_csv(records, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0].startswith("scheme,n,D,tau")
        assert len(lines) == len(records) + 1


class TestCli:
    def test_gen_advise_elect_verify(self, tmp_path):
        tree = tmp_path / "t.tree"
        adv = tmp_path / "t.adv"
        out = tmp_path / "t.json"
        assert cli_main(["gen", "random", "--nodes", "40", "--seed", "5", "--out", str(tree)]) == 0
        assert cli_main([
            "advise", "--scheme", "unbounded", "--tree", str(tree),
            "--tau", "2", "--out", str(adv),
        ]) == 0
        assert cli_main([
            "elect", "--scheme", "unbounded", "--tree", str(tree),
            "--advice", str(adv), "--tau", "2", "--out", str(out),
        ]) == 0
        assert cli_main(["verify", "--tree", str(tree), "--outputs", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["equals_root"] is True

    def test_xi_guard_and_search(self, tmp_path, capsys):
        tree = tmp_path / "t.tree"
        assert cli_main(["gen", "random", "--nodes", "6", "--seed", "1", "--out", str(tree)]) == 0
        capsys.readouterr()
        assert cli_main(["xi", "--tree", str(tree), "--tau-max", "3"]) == 0
        report = json.loads(capsys.readouterr().out.strip())
        assert report["found"] is True
        assert cli_main(["xi", "--tree", str(tree), "--max-n", "4"]) == 2

    def test_betas_csv(self, tmp_path):
        out = tmp_path / "b.csv"
        assert cli_main(["betas", "--lambda", "2", "--c-grid", "5", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "c,lambda,beta1,beta2,gap"
        assert len(lines) == 6

    def test_sweep_spec(self, tmp_path):
        spec = tmp_path / "spec.json"
        out = tmp_path / "records.csv"
        spec.write_text(json.dumps({"sizes": [12], "taus": [0, 1], "seed": 3}))
        assert cli_main(["sweep", "--spec", str(spec), "--out", str(out)]) == 0
        assert len(out.read_text().strip().splitlines()) == 3

    def test_line_family_gen(self, tmp_path):
        tree = tmp_path / "fam.tree"
        rc = cli_main([
            "gen", "line-family", "--nodes", "12", "--diameter", "4",
            "--tau", "1", "--member", "2", "--out", str(tree),
        ])
        assert rc == 0


class TestMeasureExamples:
    def test_five_line_tau1_size(self):
        from treelect.harness import measure_advice

        t = build_tree([(0, 0, 1, 0), (1, 1, 2, 0), (2, 1, 3, 0), (3, 1, 4, 0)])
        advice = advice_unbounded(t, 1)
        size, valency = measure_advice(advice)
        assert size == 9  # packed (0,0,0,"1001")

    def test_all_empty_strings(self):
        from treelect.harness import measure_advice
        from treelect.tree import AdviceAssignment

        adv = AdviceAssignment(2, {0: "", 1: ""})
        assert measure_advice(adv) == (0, 1)

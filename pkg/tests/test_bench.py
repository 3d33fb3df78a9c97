import csv
import math

import numpy as np
import pytest

from chainbreak import io
from chainbreak.bench import (
    DEFAULT_K_VALUES,
    ProblemResult,
    aggregate,
    cell_seed,
    prob_broken,
    prob_success,
    ratio_broken,
    run_sweep,
    score,
    significantly_greater,
    write_sweep,
)
from chainbreak.chimera import build_chimera, clique_embed, embed_model
from chainbreak.decode import DecodedSampleSet, decode_batch
from chainbreak.errors import DataError
from chainbreak.ising import GroundStateReport, IsingModel, brute_force_solve
from chainbreak.portfolio import SuiteConfig, generate_suite
from chainbreak.sampler import AnnealSchedule, sample


def pr(success=(), broken=None, n_broken=None, n_chains=8):
    s = np.asarray(success, dtype=bool)
    b = np.zeros(len(s), bool) if broken is None else np.asarray(broken, dtype=bool)
    c = np.zeros(len(s), int) if n_broken is None else np.asarray(n_broken)
    return ProblemResult("p", s, b, c, n_chains)


class TestMetrics:
    def test_success(self):
        assert prob_success(pr([1, 1, 0, 0])) == 0.5
        assert prob_success(pr([1, 1, 1])) == 1.0

    def test_all_discarded_count_as_failures(self):
        model = IsingModel(2, [1.0, 1.0])
        ground = brute_force_solve(model)
        dec = DecodedSampleSet(np.zeros((5, 2), np.int8), np.ones(5, bool), np.ones((5, 2), bool), "discard")
        assert prob_success(score(dec, model, ground)) == 0.0

    def test_degenerate_ground_states_all_succeed(self):
        model = IsingModel(2, [0.0, 0.0], {(0, 1): 1.0})
        ground = brute_force_solve(model)
        states = np.array([[1, -1], [-1, 1], [1, 1]], np.int8)
        dec = DecodedSampleSet(states, np.zeros(3, bool), np.zeros((3, 2), bool), "majority")
        assert list(score(dec, model, ground).success) == [True, True, False]

    def test_broken(self):
        assert prob_broken(pr([0] * 4)) == 0.0
        assert prob_broken(pr([0] * 4, [1, 0, 1, 0])) == 0.5

    def test_ratio(self):
        assert ratio_broken(pr([0], [1], [2])) == 0.25
        assert ratio_broken(pr([0, 0])) == 0.0
        assert ratio_broken(pr([0, 0], [1, 1], [8, 8])) == 1.0

    def test_aggregate(self):
        assert aggregate([pr([1, 0, 0, 0, 0]), pr([1, 1, 1, 1, 0])])[0] == pytest.approx(0.5)
        single = pr([1, 0], [1, 0], [3, 0])
        assert aggregate([single]) == (prob_success(single), prob_broken(single), ratio_broken(single))
        assert aggregate([pr([1, 0, 0, 0])] * 1000)[0] == pytest.approx(0.25)
        # equal weight per problem regardless of sample count
        assert aggregate([pr([1]), pr([0, 0, 0, 0])])[0] == 0.5

    def test_empty_errors(self):
        with pytest.raises(DataError):
            prob_success(pr([]))
        with pytest.raises(DataError):
            aggregate([])

    def test_result_invariants(self):
        with pytest.raises(DataError):
            pr([1, 0], [1], [0, 0])
        with pytest.raises(DataError):
            pr([1], [1], [9])

    def test_significance(self):
        assert significantly_greater(0.6, 1000, 0.4, 1000)
        assert not significantly_greater(0.51, 100, 0.5, 100)
        assert not significantly_greater(0.0, 10, 0.0, 10)
        assert not significantly_greater(0.4, 1000, 0.6, 1000)


def test_k0_analytic_broken_probability():
    """Decoupled two-spin chains: P(any break) = 1 - 2^-4 for four chains."""
    model = IsingModel(4, np.zeros(4))
    emb = clique_embed(4, build_chimera(16, 16, 4))
    em = embed_model(model, emb, 0.0)
    N = 4000
    ss = sample(em, N, seed=21)
    res = score(decode_batch(ss.samples, em, "discard"), model, brute_force_solve(model))
    expected = 1 - 2.0 ** -4
    assert abs(prob_broken(res) - expected) <= 3 * math.sqrt(expected * (1 - expected) / N)
    assert abs(ratio_broken(res) - 0.5) <= 3 * math.sqrt(0.25 / (4 * N))


def test_cell_seed_distinct():
    seeds = {cell_seed(0, 8, i, k) for i in range(5) for k in DEFAULT_K_VALUES}
    assert len(seeds) == 30


@pytest.fixture(scope="module")
def small_suite():
    cfg = SuiteConfig(m=1, seed=3)
    models = generate_suite(cfg, 3)
    return [io.Problem(f"p{i}", m, brute_force_solve(m)) for i, m in enumerate(models)]


class TestSweep:
    def test_smoke_resume_and_outputs(self, small_suite, tmp_path):
        sched = AnnealSchedule(sweeps=200)
        log = []
        kw = dict(n_samples=40, out_dir=tmp_path / "run", progress=log.append)
        res = run_sweep(small_suite, (0.0, -0.5, -2.0), sched, seed=1, **kw)
        assert res.complete
        assert len(res.cells) == 3 * 3
        for c in res.cells:
            assert c.n_problems == 3 and c.n_samples == 40
            assert 0 <= c.p_s <= 1 and 0 <= c.p_b <= 1 and 0 <= c.r_b <= 1
            assert c.p_b >= c.r_b
        for k in (0.0, -0.5, -2.0):
            cells = [res.cell(4, k, s) for s in res.strategies]
            assert len({c.p_b for c in cells}) == 1
            if cells[0].p_b == 0:
                assert len({c.p_s for c in cells}) == 1
        assert res.cell(4, 0.0, "discard").p_b > 0.5

        files = write_sweep(tmp_path / "run", res, {"note": "x"})
        names = sorted(p.name for p in files)
        assert names == ["heatmap_n4_k-0.5.csv", "heatmap_n4_k-2.csv", "heatmap_n4_k0.csv",
                         "manifest.json", "sweep.csv"]
        rows = list(csv.DictReader((tmp_path / "run" / "sweep.csv").open()))
        assert len(rows) == 9 and rows[0]["k"] == "0.0"

        log.clear()
        again = run_sweep(small_suite, (0.0, -0.5, -2.0), sched, seed=1, **kw)
        assert all("reused checkpoint" in line for line in log)
        before = (tmp_path / "run" / "sweep.csv").read_bytes()
        write_sweep(tmp_path / "run", again, {"note": "x"})
        assert (tmp_path / "run" / "sweep.csv").read_bytes() == before

        log.clear()
        run_sweep(small_suite, (0.0,), sched, seed=2, **kw)
        assert "reused" not in log[0]

    def test_missing_ground_is_computed(self, small_suite):
        bare = [io.Problem(p.id, p.model) for p in small_suite[:1]]
        res = run_sweep(bare, (-1.0,), AnnealSchedule(sweeps=100), n_samples=10)
        assert res.complete

    def test_uncomputable_ground_recorded(self):
        big = IsingModel(28, np.zeros(28))
        res = run_sweep([io.Problem("big", big)], (-1.0,), AnnealSchedule(sweeps=5), n_samples=2)
        assert not res.complete
        assert res.errors and "big" in res.errors[0]
        assert all(c.n_problems == 0 for c in res.cells)

    def test_heatmap_k(self, small_suite):
        res = run_sweep(small_suite, (-0.5,), AnnealSchedule(sweeps=100), n_samples=30)
        prof = res.profiles[(4, -0.5)]
        assert prof.chain_lengths == [2] * 4

    def test_validation(self, small_suite):
        with pytest.raises(ValueError):
            run_sweep(small_suite, (0.0,), strategies=("nope",))
        with pytest.raises(DataError):
            run_sweep([], (0.0,))


def test_score_uses_energy_tolerance():
    model = IsingModel(1, [1.0])
    ground = GroundStateReport(-1.0 + 5e-10, np.array([[-1]], np.int8))
    dec = DecodedSampleSet(np.array([[-1]], np.int8), np.zeros(1, bool), np.zeros((1, 1), bool), "majority")
    assert score(dec, model, ground).success[0]

import numpy as np
import pytest

from decint import css, e2e, scheduler
from decint.noise import NoiseParams
from decint.tableau import Tableau


@pytest.fixture(scope="module")
def steane_setup():
    fam = css.steane_family()
    consts = scheduler.measured_constants(fam)
    sched = scheduler.build_schedule(fam, 2, 1, h=3, constants=consts)
    return fam, sched


@pytest.fixture(scope="module")
def toy_setup():
    fam = css.toy_family()
    consts = scheduler.measured_constants(fam)
    sched = scheduler.build_schedule(fam, 3, 1, h=2, constants=consts)
    return fam, sched


class TestChainSteps:
    def test_tree_structure(self, toy_setup):
        fam, sched = toy_setup
        stages = e2e.chain_steps(sched, 0)
        assert len(stages) == 2
        assert len(stages[0]) == 1 and stages[0][0].level == 3
        assert len(stages[1]) == 2 and all(s.level == 2 for s in stages[1])

    def test_waits_follow_position(self, steane_setup):
        fam, sched = steane_setup
        first = e2e.chain_steps(sched, 0)[0][0]
        last = e2e.chain_steps(sched, 2)[0][0]
        assert first.pre_wait == 0
        assert last.pre_wait == sched.stages[0].n_layers - 1
        assert last.post_wait == 0


class TestTableauChain:
    def test_clean_run_all_blocks(self, steane_setup):
        fam, sched = steane_setup
        logical = Tableau.zero_state([0])
        logical.apply_x(0)
        for block in range(3):
            res = e2e.run_block_chain_tableau(fam, sched, block, logical)
            assert res.state_matches and not res.heralds
            assert list(res.output_bits) == [1]

    def test_single_injections_subset(self, steane_setup):
        fam, sched = steane_setup
        logical = Tableau.zero_state([0])
        for case in [(0, "X"), (3, "Z"), (6, "Y")]:
            res = e2e.run_block_chain_tableau(fam, sched, 1, logical, injection=case)
            assert res.state_matches and not res.heralds, case
            assert list(res.output_bits) == [0]

    def test_toy_multilevel_chain(self, toy_setup):
        fam, sched = toy_setup
        logical = Tableau.zero_state(list(range(4)))
        logical.apply_x(0)
        logical.apply_h(2)
        logical.apply_cnot(2, 3)
        res = e2e.run_block_chain_tableau(fam, sched, 0, logical)
        assert res.state_matches and not res.heralds


class TestFrameChain:
    def test_zero_delta_no_errors(self, steane_setup):
        fam, sched = steane_setup
        res = e2e.run_block_chain_frames(
            fam, sched, 0, NoiseParams(delta=0.0, seed=1), trials=300
        )
        assert res.error_bits.sum() == 0 and res.heralds.sum() == 0

    def test_deterministic(self, steane_setup):
        fam, sched = steane_setup
        p = NoiseParams(delta=0.01, seed=9)
        a = e2e.run_block_chain_frames(fam, sched, 1, p, trials=500)
        b = e2e.run_block_chain_frames(fam, sched, 1, p, trials=500)
        assert np.array_equal(a.error_bits, b.error_bits)

    def test_blocks_draw_independent_noise(self, steane_setup):
        fam, sched = steane_setup
        p = NoiseParams(delta=0.05, seed=9)
        a = e2e.run_block_chain_frames(fam, sched, 0, p, trials=500)
        b = e2e.run_block_chain_frames(fam, sched, 1, p, trials=500)
        assert not np.array_equal(a.error_bits, b.error_bits)

    def test_input_frames_propagate(self, steane_setup):
        fam, sched = steane_setup
        # A logical X on the input (weight-3 representative) survives EC and
        # decoding, flipping the output qubit deterministically at delta=0.
        code = fam.level(2)
        lx = code.lx.row(0).to_array()
        fx = np.tile(lx, (50, 1)).astype(np.uint8)
        fz = np.zeros_like(fx)
        res = e2e.run_block_chain_frames(
            fam, sched, 0, NoiseParams(delta=0.0, seed=2), trials=50, input_frames=(fx, fz)
        )
        assert res.error_bits.all()


class TestE2EStats:
    def test_zero_delta_all_clean(self, steane_setup):
        fam, sched = steane_setup
        stats = e2e.run_e2e_frames(fam, sched, NoiseParams(delta=0.0, seed=3), trials=200)
        assert stats.any_error_rate == 0.0
        assert stats.logical_error_marginals.shape == (3,)

    def test_marginals_grow_with_delta(self, steane_setup):
        fam, sched = steane_setup
        lo = e2e.run_e2e_frames(fam, sched, NoiseParams(delta=0.001, seed=5), trials=4000)
        hi = e2e.run_e2e_frames(fam, sched, NoiseParams(delta=0.01, seed=5), trials=4000)
        assert hi.mean_marginal() > lo.mean_marginal()

    def test_input_ls_noise_injected(self, steane_setup):
        fam, sched = steane_setup
        stats = e2e.run_e2e_frames(
            fam, sched, NoiseParams(delta=0.0, seed=7), trials=2000, input_ls_delta=0.01
        )
        # Single-qubit input errors are corrected at delta = 0 (d = 3);
        # only multi-qubit input patterns can leak through.
        assert stats.any_error_rate < 0.01


class TestFitConstants:
    def test_recovers_synthetic_constants(self):
        k1, k2 = 3.0, 0.5
        deltas = [0.02, 0.01, 0.005]
        singles = [(k1 * d) ** k2 for d in deltas]
        pairs = [(k1 * d) ** (2 * k2) for d in deltas]
        fit = e2e.fit_ls_constants(deltas, singles, pairs)
        assert fit is not None
        assert fit[0] == pytest.approx(k1, rel=1e-6)
        assert fit[1] == pytest.approx(k2, rel=1e-6)

    def test_degenerate_grid_rejected(self):
        assert e2e.fit_ls_constants([0.01], [0.1], [0.01]) is None
        assert e2e.fit_ls_constants([0.01, 0.02], [0.0, 0.0], [0.0, 0.0]) is None

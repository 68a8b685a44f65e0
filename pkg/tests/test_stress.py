import math
from multiprocessing.pool import ThreadPool

import pyblanket
from pyblanket import OptimizerConfig, SpinChainConfig, SweepConfig, choi_of_channel
from pyblanket.experiments import empirical_contiguity, figure3_sweep, spin_chain_channel


def _blanket_at(t):
    choi = choi_of_channel(spin_chain_channel(SpinChainConfig(n_total=8, t=t)))
    report = pyblanket.greedy_blanket(choi.state, choi.reference, 1, 3, OptimizerConfig())
    return choi, report


class TestFullScaleChain:
    def test_certificate(self, full_scale):
        choi, report = _blanket_at(1.0)
        report.check_invariants()
        cert = pyblanket.theorem1_certificate(
            choi, report.blanket, report.measurement, 1, workers=full_scale,
        )
        for row in cert.rows:
            assert row.passed
            assert row.distance <= row.alpha_bound + 1e-3
            assert row.distance <= cert.theorem_bound + 1e-3

    def test_threaded_times(self, full_scale):
        times = [0.5, 1.0, 1.5, 2.0]
        pool = ThreadPool(full_scale)
        reports = pool.map(lambda t: _blanket_at(t)[1], times)
        pool.close()
        pool.join()
        for report in reports:
            report.check_invariants()
            assert report.alpha_q_bits <= report.bound_bits + 1e-3

    def test_sweep(self, full_scale):
        rows = figure3_sweep(SweepConfig(), OptimizerConfig(), workers=full_scale)
        assert len(rows) == 13 * 8
        assert not any(row.violation for row in rows)
        infeasible = [row for row in rows if row.error]
        assert {row.q for row in infeasible} == {8}
        assert all(math.isnan(row.alpha_q_bits) for row in infeasible)
        contiguity = empirical_contiguity(rows)
        assert len(contiguity) == 13 * 7

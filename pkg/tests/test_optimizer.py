import numpy as np
import pytest

import pyblanket
from pyblanket import (
    BlanketErrno,
    BlanketError,
    OptimizerConfig,
    Region,
    measured_cmi,
    optimize_measurement,
    optimize_unitary,
)
from pyblanket.optimizer import restart_rngs


def off_diagonal_weight(u):
    return float(abs(u[0, 1]) ** 2)


class TestOptimizerConfig:
    def test_defaults(self):
        cfg = OptimizerConfig()
        assert cfg.restarts == 8
        assert cfg.slack == 1e-3

    @pytest.mark.parametrize(
        "kwargs",
        [{"restarts": 0}, {"max_iters": 0}, {"tolerance": 0.0}, {"seed": -1}, {"slack": -1.0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(BlanketError) as exc_info:
            OptimizerConfig(**kwargs)
        assert exc_info.value.errcode == BlanketErrno.INVALID_ARGUMENT


class TestRestartStreams:
    def test_deterministic(self):
        cfg = OptimizerConfig(restarts=3, seed=11)
        a = [g.random() for g in restart_rngs(cfg, (1, 2))]
        b = [g.random() for g in restart_rngs(cfg, (1, 2))]
        assert a == b

    def test_independent_of_restart_count(self):
        few = restart_rngs(OptimizerConfig(restarts=2, seed=5), (0,))
        many = restart_rngs(OptimizerConfig(restarts=6, seed=5), (0,))
        assert few[1].random() == many[1].random()

    def test_keys_differ(self):
        cfg = OptimizerConfig(restarts=1, seed=5)
        assert restart_rngs(cfg, (0,))[0].random() != restart_rngs(cfg, (1,))[0].random()


class TestOptimizeUnitary:
    def test_finds_maximum(self, cfg):
        best = optimize_unitary(off_diagonal_weight, 2, cfg)
        assert best.value > 0.99
        assert best.value == pytest.approx(off_diagonal_weight(best.unitary))

    def test_never_below_identity(self, cfg):
        def objective(u):
            return float(abs(u[0, 0]) ** 2)

        assert optimize_unitary(objective, 2, cfg).value >= 1.0 - 1e-12

    def test_dimension_one(self, cfg):
        best = optimize_unitary(lambda u: 0.25, 1, cfg)
        assert best.value == 0.25
        assert best.unitary.shape == (1, 1)

    def test_deterministic_across_workers(self, cfg):
        one = optimize_unitary(off_diagonal_weight, 2, cfg, key=(3,))
        two = optimize_unitary(off_diagonal_weight, 2, cfg, key=(3,), workers=2)
        assert one.value == two.value
        assert np.array_equal(one.unitary, two.unitary)


class TestOptimizeMeasurement:
    def test_bell(self, cfg):
        s = pyblanket.bell_state()
        a, r = Region.of(0), Region.of(1)
        best = optimize_measurement(
            lambda m: measured_cmi(s, a, r, m_r=m), r, (2,), cfg,
        )
        assert best.measurement.region == r
        assert best.value == pytest.approx(1.0, abs=1e-9)

    def test_helstrom(self, cfg):
        delta = np.diag([1.0, 0.0]) - np.full((2, 2), 0.5)

        def distinguishability(m):
            u = m.unitary
            return float(np.abs(np.diag(u.conj().T @ delta @ u)).sum())

        best = optimize_measurement(distinguishability, Region.of(0), (2,), cfg)
        assert best.value >= 1.414 - 1e-3
        assert best.value <= np.sqrt(2) + 1e-9

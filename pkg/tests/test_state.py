import math

import numpy as np
import pytest

import pyblanket
from pyblanket import (
    BlanketErrno,
    BlanketError,
    MultipartiteState,
    ProjectiveMeasurement,
    Region,
    chain_rule_check,
    conditional_mutual_information,
    measured_cmi,
    mutual_information,
    partial_trace,
    random_measurement,
    random_state,
    relative_entropy,
    von_neumann_entropy,
)
from pyblanket.channels import apply_qc_channel
from pyblanket.linalg import trace_norm

HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


class TestRegion:
    def test_sorted(self):
        assert Region((2, 0, 1)).indices == (0, 1, 2)
        assert str(Region.of(2, 0)) == "{0,2}"

    def test_duplicates(self):
        with pytest.raises(BlanketError) as exc_info:
            Region.of(1, 1)
        assert exc_info.value.errcode == BlanketErrno.INVALID_ARGUMENT

    def test_negative(self):
        with pytest.raises(BlanketError) as exc_info:
            Region.of(-1)
        assert exc_info.value.errcode == BlanketErrno.REGION_OUT_OF_RANGE

    def test_set_operations(self):
        r = Region.of(0, 2)
        assert r.union(Region.of(1), Region.of(3)) == Region.of(0, 1, 2, 3)
        assert r.difference(Region.of(2)) == Region.of(0)
        assert r.complement(4) == Region.of(1, 3)
        assert r.isdisjoint(Region.of(1))
        assert 2 in r and len(r) == 2

    def test_disjoint_union(self):
        assert pyblanket.disjoint_union(Region.of(1), Region.of(0)) == Region.of(0, 1)
        with pytest.raises(BlanketError) as exc_info:
            pyblanket.disjoint_union(Region.of(0, 1), Region.of(1))
        assert exc_info.value.errcode == BlanketErrno.REGION_OVERLAP


class TestMultipartiteState:
    def test_default_labels(self):
        s = pyblanket.maximally_mixed((2, 3))
        assert s.labels == ("S0", "S1")
        assert s.dim == 6
        assert s.n_subsystems == 2

    def test_label_count(self):
        with pytest.raises(BlanketError) as exc_info:
            MultipartiteState(np.eye(2) / 2, (2,), ("A", "B"))
        assert exc_info.value.errcode == BlanketErrno.DIM_MISMATCH

    def test_purity(self):
        assert pyblanket.maximally_mixed((2,)).purity() == pytest.approx(0.5)
        assert pyblanket.bell_state().purity() == pytest.approx(1.0)

    def test_random_state_valid(self, rng):
        s = random_state((2, 2, 2), rng)
        assert np.trace(s.rho).real == pytest.approx(1.0)
        assert s.eigenvalues()[0] > -1e-12

    def test_pure_state_normalizes(self):
        s = pyblanket.pure_state([3, 4], (2,))
        assert np.trace(s.rho).real == pytest.approx(1.0)

    def test_product_state(self):
        s = pyblanket.product_state(pyblanket.bell_state(), pyblanket.maximally_mixed((2,)))
        assert s.dims == (2, 2, 2)
        assert s.labels == ("A", "B", "S0")


class TestEntropy:
    def test_partial_trace_bell(self):
        rho_a = partial_trace(pyblanket.bell_state(), Region.of(0))
        assert np.allclose(rho_a.rho, np.eye(2) / 2)
        assert rho_a.labels == ("A",)

    def test_partial_trace_order(self, rng):
        a = random_state((2,), rng)
        b = random_state((3,), rng)
        s = pyblanket.product_state(a, b)
        assert np.allclose(partial_trace(s, Region.of(1)).rho, b.rho)

    def test_von_neumann(self):
        assert von_neumann_entropy(pyblanket.maximally_mixed((2, 2))) == pytest.approx(2.0)
        assert von_neumann_entropy(pyblanket.bell_state()) == pytest.approx(0.0, abs=1e-12)

    def test_von_neumann_biased_qubit(self):
        s = MultipartiteState(np.diag([0.25, 0.75]), (2,))
        assert von_neumann_entropy(s) == pytest.approx(0.8112781244591328, abs=1e-12)

    def test_additivity(self, rng):
        for _ in range(10):
            a = random_state((2,), rng)
            b = random_state((2, 3), rng)
            joint = pyblanket.product_state(a, b)
            expected = von_neumann_entropy(a) + von_neumann_entropy(b)
            assert von_neumann_entropy(joint) == pytest.approx(expected, abs=1e-9)

    def test_mutual_information_bell(self):
        s = pyblanket.bell_state()
        assert mutual_information(s, Region.of(0), Region.of(1)) == pytest.approx(2.0)

    def test_cmi_ghz(self):
        s = pyblanket.ghz_state(3)
        x, y, z = Region.of(0), Region.of(1), Region.of(2)
        assert conditional_mutual_information(s, x, y, z) == pytest.approx(1.0)
        assert conditional_mutual_information(s, x, y) == pytest.approx(
            mutual_information(s, x, y),
        )

    def test_strong_subadditivity(self, rng):
        for _ in range(20):
            s = random_state((2, 2, 2, 2), rng)
            value = conditional_mutual_information(
                s, Region.of(0), Region.of(2), Region.of(1, 3),
            )
            assert value >= -1e-9

    def test_chain_rule(self, rng):
        s = random_state((2, 2, 2, 2), rng)
        parts = [Region.of(3), Region.of(1), Region.of(2)]
        assert chain_rule_check(s, Region.of(0), parts) < 1e-9


class TestRelativeEntropy:
    def test_self(self, rng):
        s = random_state((2, 2), rng)
        assert relative_entropy(s, s) == pytest.approx(0.0, abs=1e-9)

    def test_support_violation(self):
        zero = pyblanket.pure_state([1, 0], (2,))
        one = pyblanket.pure_state([0, 1], (2,))
        assert relative_entropy(zero, one) == math.inf

    def test_against_mixed(self):
        zero = pyblanket.pure_state([1, 0], (2,))
        assert relative_entropy(zero, pyblanket.maximally_mixed((2,))) == pytest.approx(1.0)

    def test_pinsker(self, rng):
        for _ in range(10):
            rho = random_state((2, 2), rng)
            sigma = random_state((2, 2), rng)
            lhs = trace_norm(rho.rho - sigma.rho) ** 2 / (2 * math.log(2))
            assert lhs <= relative_entropy(rho, sigma) + 1e-9

    def test_dims(self):
        with pytest.raises(BlanketError) as exc_info:
            relative_entropy(pyblanket.maximally_mixed((4,)), pyblanket.maximally_mixed((2, 2)))
        assert exc_info.value.errcode == BlanketErrno.DIM_MISMATCH


class TestMeasuredCMI:
    def test_ghz_screened_by_z(self):
        s = pyblanket.ghz_state(3)
        z = ProjectiveMeasurement.computational(Region.of(2), (2,))
        assert measured_cmi(s, Region.of(0), Region.of(1), [z]) == pytest.approx(0.0, abs=1e-12)

    def test_measured_r(self):
        s = pyblanket.ghz_state(3)
        a, r = Region.of(0), Region.of(1)
        in_z = ProjectiveMeasurement.computational(r, (2,))
        in_x = ProjectiveMeasurement(r, (2,), HADAMARD)
        assert measured_cmi(s, a, r, m_r=in_z) == pytest.approx(1.0)
        assert measured_cmi(s, a, r, m_r=in_x) == pytest.approx(0.0, abs=1e-12)

    def test_matches_dephased_state(self, rng):
        s = random_state((2, 2, 2), rng)
        a, r, q = Region.of(0), Region.of(1), Region.of(2)
        m_q = random_measurement(q, (2,), rng)
        m_r = random_measurement(r, (2,), rng)

        once = apply_qc_channel(s, m_q)
        assert measured_cmi(s, a, r, [m_q]) == pytest.approx(
            conditional_mutual_information(once, a, r, q), abs=1e-9,
        )
        twice = apply_qc_channel(once, m_r)
        assert measured_cmi(s, a, r, [m_q], m_r) == pytest.approx(
            conditional_mutual_information(twice, a, r, q), abs=1e-9,
        )

    def test_measurement_region(self, rng):
        s = random_state((2, 2, 2), rng)
        m = random_measurement(Region.of(2), (2,), rng)
        with pytest.raises(BlanketError) as exc_info:
            measured_cmi(s, Region.of(0), Region.of(1), m_r=m)
        assert exc_info.value.errcode == BlanketErrno.REGION_OVERLAP

    def test_conditional_ensemble(self):
        s = pyblanket.ghz_state(3)
        z = ProjectiveMeasurement.computational(Region.of(2), (2,))
        ens = pyblanket.conditional_ensemble(s, Region.of(0, 1), z)
        assert np.allclose(ens.probabilities, [0.5, 0.5])
        assert np.allclose(ens.states[0].rho, np.diag([1, 0, 0, 0]))
        assert np.allclose(ens.states[1].rho, np.diag([0, 0, 0, 1]))

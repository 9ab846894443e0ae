import math

import numpy as np
import pytest

from entlock.channels import dephase_subsystem
from entlock.densop import DensityOperator, Ensemble, convex_mix, tensor
from entlock.measures import (
    binary_entropy,
    concurrence_two_qubit,
    eof_two_qubit,
    log_negativity,
    mixing_gap,
    ppt_check,
    relative_entropy,
    renyi_entropy,
    resolve_functional,
    shannon_entropy,
    von_neumann_entropy,
)
from entlock.sampling import random_density, random_ensemble, random_unitary
from entlock.states import (
    LockingFamilyParams,
    bell_state,
    locking_state,
    max_correlated,
)

# frozen scalar references computed from the defining formulas
VN_09_01 = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))          # 0.46899559...
RENYI_HALF_09_01 = 2 * math.log2(math.sqrt(0.9) + math.sqrt(0.1))  # 0.67807190...


class TestShannon:
    def test_half_half(self):
        assert abs(shannon_entropy([0.5, 0.5]) - 1.0) < 1e-14

    def test_deterministic(self):
        assert shannon_entropy([1.0, 0.0]) == 0.0

    def test_uniform_four(self):
        assert abs(shannon_entropy([0.25] * 4) - 2.0) < 1e-14

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            shannon_entropy([0.5, 0.2])


class TestVonNeumann:
    def test_pure_state_zero(self):
        assert von_neumann_entropy(bell_state(2)) < 1e-12

    def test_maximally_mixed(self):
        for d in (2, 3, 8):
            rho = DensityOperator(np.eye(d) / d, (d,), ("A",))
            assert abs(von_neumann_entropy(rho) - math.log2(d)) < 1e-12

    def test_two_point_spectrum(self):
        rho = DensityOperator(np.diag([0.9, 0.1]), (2,), ("A",))
        assert abs(von_neumann_entropy(rho) - VN_09_01) < 1e-12
        assert abs(VN_09_01 - 0.46900) < 5e-6


class TestRenyi:
    def test_uniform_any_alpha(self):
        for alpha in (0.0, 0.3, 0.7):
            assert abs(renyi_entropy([0.25] * 4, alpha) - 2.0) < 1e-12

    def test_alpha_zero_counts_rank(self):
        rho = DensityOperator(np.diag([0.6, 0.4, 0.0, 0.0]), (4,), ("A",))
        assert abs(renyi_entropy(rho, 0.0) - 1.0) < 1e-12

    def test_half_alpha_formula(self):
        assert abs(renyi_entropy([0.9, 0.1], 0.5) - RENYI_HALF_09_01) < 1e-12
        assert abs(RENYI_HALF_09_01 - 0.67807) < 5e-6

    def test_dominates_von_neumann(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            rho = random_density(rng, (4,), ("A",))
            s = von_neumann_entropy(rho)
            for alpha in (0.0, 0.25, 0.5, 0.9):
                assert renyi_entropy(rho, alpha) >= s - 1e-10

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            renyi_entropy([0.5, 0.5], 1.0)


class TestRelativeEntropy:
    def test_self_is_zero(self):
        rng = np.random.default_rng(1)
        rho = random_density(rng, (3,), ("A",))
        assert abs(relative_entropy(rho, rho)) < 1e-10

    def test_pure_vs_maximally_mixed(self):
        zero = DensityOperator(np.diag([1.0, 0.0]), (2,), ("A",))
        mixed = DensityOperator(np.eye(2) / 2, (2,), ("A",))
        assert abs(relative_entropy(zero, mixed) - 1.0) < 1e-12

    def test_support_mismatch_is_infinite(self):
        zero = DensityOperator(np.diag([1.0, 0.0]), (2,), ("A",))
        one = DensityOperator(np.diag([0.0, 1.0]), (2,), ("A",))
        assert relative_entropy(zero, one) == math.inf

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = random_density(rng, (3,), ("A",))
            b = random_density(rng, (3,), ("A",))
            assert relative_entropy(a, b) >= -1e-10


class TestLogNegativity:
    def test_max_correlated_zero(self):
        assert log_negativity(max_correlated(3)) == 0.0

    def test_bell_is_one(self):
        assert abs(log_negativity(bell_state(2)) - 1.0) <= 1e-12

    def test_locking_state_closed_form(self):
        rho = locking_state(LockingFamilyParams.hadamard(4))
        assert abs(log_negativity(rho) - math.log2(3)) <= 1e-8

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            rho = random_density(rng, (2, 3), ("A", "B"))
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 3))
            rotated = DensityOperator(u @ rho.matrix @ u.conj().T, rho.dims, rho.party)
            assert abs(log_negativity(rotated) - log_negativity(rho)) < 1e-10


class TestPPTCheck:
    def test_product_state(self):
        rng = np.random.default_rng(4)
        rho = tensor(random_density(rng, (2,), ("A",)), random_density(rng, (3,), ("B",)))
        assert ppt_check(rho).passed

    def test_bell_fails_with_minus_half(self):
        check = ppt_check(bell_state(2))
        assert not check.passed
        assert abs(check.min_eigenvalue + 0.5) < 1e-12

    def test_dephased_locking_state(self):
        rho = locking_state(LockingFamilyParams.hadamard(2))
        assert ppt_check(dephase_subsystem(rho, 0)).passed


class TestEof:
    def test_bell_is_one(self):
        assert abs(eof_two_qubit(bell_state(2)) - 1.0) < 1e-12
        assert abs(concurrence_two_qubit(bell_state(2)) - 1.0) < 1e-12

    def test_product_state_zero(self):
        rng = np.random.default_rng(5)
        rho = tensor(random_density(rng, (2,), ("A",)), random_density(rng, (2,), ("B",)))
        assert eof_two_qubit(rho) < 1e-10

    def test_isotropic_boundary(self):
        # concurrence max(0, (3p-1)/2) vanishes at p = 1/3
        p = 1.0 / 3.0
        rho = convex_mix(
            [(p, bell_state(2)),
             (1 - p, DensityOperator(np.eye(4) / 4, (2, 2), ("A", "B")))]
        )
        assert eof_two_qubit(rho) < 1e-10

    def test_rejects_wrong_dims(self):
        with pytest.raises(ValueError):
            eof_two_qubit(max_correlated(3))

    def test_binary_entropy_edges(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert abs(binary_entropy(0.5) - 1.0) < 1e-14


class TestMixingGap:
    def test_orthogonal_equality_case(self):
        zero = DensityOperator(np.diag([1.0, 0.0]), (2,), ("A",))
        one = DensityOperator(np.diag([0.0, 1.0]), (2,), ("A",))
        ens = Ensemble(((0.5, zero), (0.5, one)))
        assert abs(mixing_gap(ens) - 1.0) < 1e-12

    def test_identical_members(self):
        rho = DensityOperator(np.eye(2) / 2, (2,), ("A",))
        ens = Ensemble(((0.4, rho), (0.6, rho)))
        assert abs(mixing_gap(ens)) < 1e-12

    def test_random_sweep_bounded_by_shannon(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            members = int(rng.integers(2, 4))
            ens = random_ensemble(rng, (2,), ("A",), members)
            gap = mixing_gap(ens)
            assert -1e-9 <= gap <= shannon_entropy(ens.probabilities()) + 1e-9


class TestRegistry:
    def test_tags_resolve(self):
        rho = DensityOperator(np.diag([0.9, 0.1]), (2,), ("A",))
        assert abs(resolve_functional("von_neumann")(rho) - VN_09_01) < 1e-12
        assert abs(resolve_functional("renyi:0.5")(rho) - RENYI_HALF_09_01) < 1e-12
        assert abs(resolve_functional("renyi", alpha=0.5)(rho) - RENYI_HALF_09_01) < 1e-12

    def test_expectation_is_linear(self):
        rng = np.random.default_rng(7)
        obs = np.diag([1.0, -1.0])
        f = resolve_functional("expectation", observable=obs)
        a = random_density(rng, (2,), ("A",))
        b = random_density(rng, (2,), ("A",))
        mix = convex_mix([(0.3, a), (0.7, b)])
        assert abs(f(mix) - 0.3 * f(a) - 0.7 * f(b)) < 1e-12

    def test_unknown_tag(self):
        with pytest.raises(KeyError):
            resolve_functional("nope")

import math

import numpy as np
import pytest

from spencerflow import cartan as ca
from spencerflow import liealg as la


@pytest.fixture(scope="module")
def su2():
    return la.preset("su2")


@pytest.fixture(scope="module")
def so3():
    return la.preset("so3")


@pytest.fixture(scope="module")
def ab2():
    return la.preset("abelian2")


E3 = la.LieVector((0.0, 0.0, 1.0))
LAM0 = la.DualVector((1.0, 0.0, 0.0))


class TestRhs:
    def test_abelian_vanishes(self, ab2):
        out = ca.cartan_rhs(ab2, la.LieVector((2.0, 3.0)), la.DualVector((1.0, -1.0)))
        assert out.coeffs == (0.0, 0.0)

    def test_su2_rotation_generator(self, su2):
        # d lam1/ds = -lam2, d lam2/ds = +lam1 at lam = (1, 0, 0)
        out = ca.cartan_rhs(su2, E3, LAM0)
        assert np.allclose(out.coeffs, (0.0, 1.0, 0.0))

    def test_zero_lambda(self, su2):
        out = ca.cartan_rhs(su2, E3, la.DualVector((0.0, 0.0, 0.0)))
        assert out.coeffs == (0.0, 0.0, 0.0)

    def test_so3_rigid_body_cross_product(self, so3):
        # dJ/ds = omega x J componentwise under this coadjoint sign convention
        rng = np.random.default_rng(1)
        for _ in range(10):
            w = rng.standard_normal(3)
            J = rng.standard_normal(3)
            out = ca.cartan_rhs(so3, la.LieVector(tuple(w)), la.DualVector(tuple(J)))
            assert np.allclose(out.coeffs, np.cross(w, J), atol=1e-14)


class TestCFL:
    def test_abelian_unbounded(self, ab2):
        assert ca.cfl_bound(ab2, la.LieVector((1.0, 1.0))) == math.inf

    def test_su2_unit(self, su2):
        assert ca.cfl_bound(su2, E3) == 1.0

    def test_linear_scaling(self, su2):
        assert ca.cfl_bound(su2, la.LieVector((0.0, 0.0, 2.0))) == 0.5

    def test_gate_rejects_before_mutation(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        state = ca.CharacteristicState(0.0, (0.0,), LAM0)
        with pytest.raises(ca.CFLViolation):
            ca.step(su2, state, A, (1.0,), 1.0)
        with pytest.raises(ca.CFLViolation):
            ca.step(su2, state, A, (1.0,), 1.5, scheme="rk4")


class TestStep:
    def test_abelian_identity(self, ab2):
        A = ca.ConnectionSampler.abelian_zero(2)
        state = ca.CharacteristicState(0.0, (0.0,), la.DualVector((1.0, 2.0)))
        out = ca.step(ab2, state, A, (1.0,), 0.3)
        assert out.lam.coeffs == (1.0, 2.0)
        assert out.s == pytest.approx(0.3)

    def test_euler_paper_update(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        state = ca.CharacteristicState(0.0, (0.0,), LAM0)
        out = ca.step(su2, state, A, (1.0,), 0.1, "euler_paper")
        assert out.lam.coeffs == (1.0, 0.1, 0.0)

    def test_euler_paper_renormalized(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        state = ca.CharacteristicState(0.0, (0.0,), LAM0)
        out = ca.step(su2, state, A, (1.0,), 0.1, "euler_paper", renormalize=True)
        expect = np.array([1.0, 0.1, 0.0]) / math.sqrt(1.01)
        assert np.allclose(out.lam.coeffs, expect, atol=1e-15)

    def test_linearity_of_euler_step(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        rng = np.random.default_rng(4)
        for _ in range(10):
            l1 = rng.standard_normal(3)
            l2 = rng.standard_normal(3)
            s1 = ca.step(su2, ca.CharacteristicState(0.0, (0.0,), la.DualVector(tuple(l1))), A, (1.0,), 0.05)
            s2 = ca.step(su2, ca.CharacteristicState(0.0, (0.0,), la.DualVector(tuple(l2))), A, (1.0,), 0.05)
            s12 = ca.step(su2, ca.CharacteristicState(0.0, (0.0,), la.DualVector(tuple(l1 + l2))), A, (1.0,), 0.05)
            assert np.allclose(
                np.array(s12.lam.coeffs),
                np.array(s1.lam.coeffs) + np.array(s2.lam.coeffs),
                atol=1e-12,
            )

    def test_rk4_quarter_turn(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        states = ca.integrate(su2, LAM0, A, (1.0,), 1e-3, math.pi / 2, "rk4")
        assert np.allclose(states[-1].lam.coeffs, (0.0, 1.0, 0.0), atol=1e-10)


class TestExactFlow:
    def test_s_zero_identity(self, su2):
        out = ca.coadjoint_flow_exact(su2, E3, LAM0, 0.0)
        assert np.allclose(out.coeffs, LAM0.coeffs)

    def test_quarter_turn(self, su2):
        out = ca.coadjoint_flow_exact(su2, E3, LAM0, math.pi / 2)
        assert np.allclose(out.coeffs, (0.0, 1.0, 0.0), atol=1e-13)

    def test_abelian_constant(self, ab2):
        lam = la.DualVector((3.0, -1.0))
        out = ca.coadjoint_flow_exact(ab2, la.LieVector((5.0, 2.0)), lam, 7.0)
        assert np.allclose(out.coeffs, lam.coeffs)

    def test_norm_preserved_compact(self, su2, so3):
        rng = np.random.default_rng(8)
        for g in (su2, so3):
            a = la.LieVector(tuple(rng.standard_normal(3)))
            lam = la.DualVector(tuple(rng.standard_normal(3)))
            for s in (0.5, 2.0, 10.0):
                out = ca.coadjoint_flow_exact(g, a, lam, s)
                assert abs(
                    np.linalg.norm(out.coeffs) - np.linalg.norm(lam.coeffs)
                ) < 1e-13


class TestConvergenceOrders:
    def test_rk4_long_run_accuracy_and_norm(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        states = ca.integrate(su2, LAM0, A, (1.0,), 1e-3, 2 * math.pi, "rk4")
        ref = ca.coadjoint_flow_exact(su2, E3, LAM0, 2 * math.pi)
        dev = np.max(np.abs(np.array(states[-1].lam.coeffs) - np.array(ref.coeffs)))
        assert dev <= 1e-8
        drift = abs(np.linalg.norm(states[-1].lam.coeffs) - 1.0)
        assert drift <= 1e-10

    def test_euler_first_order(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        errs = []
        for ds in (1e-3, 5e-4):
            states = ca.integrate(su2, LAM0, A, (1.0,), ds, 1.0, "euler_paper")
            ref = ca.coadjoint_flow_exact(su2, E3, LAM0, 1.0)
            errs.append(
                np.max(np.abs(np.array(states[-1].lam.coeffs) - np.array(ref.coeffs)))
            )
        order = math.log2(errs[0] / errs[1])
        assert 0.9 <= order <= 1.1

    def test_rk4_fourth_order(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        errs = []
        for ds in (0.05, 0.025):
            states = ca.integrate(su2, LAM0, A, (1.0,), ds, 1.0, "rk4")
            ref = ca.coadjoint_flow_exact(su2, E3, LAM0, 1.0)
            errs.append(
                np.max(np.abs(np.array(states[-1].lam.coeffs) - np.array(ref.coeffs)))
            )
        order = math.log2(errs[0] / errs[1])
        assert order >= 3.7


class TestResidual:
    @staticmethod
    def _rotating_samples(h, n):
        return [
            la.DualVector((math.cos(k * h), math.sin(k * h), 0.0)) for k in range(n)
        ]

    def test_abelian_constant_zero(self, ab2):
        A = ca.ConnectionSampler.abelian_zero(2)
        samples = [la.DualVector((1.0, 2.0))] * 5
        assert ca.cartan_residual(ab2, A, samples, 0.1) <= 1e-14

    def test_second_order_on_exact_solution(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        r1 = ca.cartan_residual(su2, A, self._rotating_samples(0.01, 101), 0.01)
        r2 = ca.cartan_residual(su2, A, self._rotating_samples(0.005, 201), 0.005)
        assert 3.6 <= r1 / r2 <= 4.4

    def test_wrong_constant_lambda(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        samples = [la.DualVector((1.0, 0.0, 0.0))] * 5
        assert ca.cartan_residual(su2, A, samples, 0.1) == pytest.approx(1.0)

    def test_degenerate_grid_rejected(self, su2):
        A = ca.ConnectionSampler.constant(E3)
        with pytest.raises(ValueError):
            ca.cartan_residual(su2, A, [la.DualVector((1.0, 0.0, 0.0))] * 2, 0.1)


class TestMonopole:
    def test_zero_charge(self):
        assert ca.monopole_radial_check(0.0, 1.0, 1e-4) == (0.0, 0.0, 0.0)

    def test_closed_form(self):
        _, exact, _ = ca.monopole_radial_check(1.0, 2.0, 1e-4)
        assert exact == pytest.approx(-0.25)

    def test_second_order_difference(self):
        _, _, diff = ca.monopole_radial_check(1.0, 1.0, 1e-4)
        assert diff <= 1e-7

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            ca.monopole_radial_check(1.0, 1e-5, 1e-4)

    def test_wu_yang_sampler(self):
        A = ca.ConnectionSampler.wu_yang_monopole(2.0)
        # at the equator theta = pi/2: A_phi = q
        val = A.sample((1.0, math.pi / 2, 0.0), 2)
        assert val.coeffs[0] == pytest.approx(2.0)
        assert A.sample((1.0, 0.5, 0.0), 0).coeffs[0] == 0.0


class TestNonholonomy:
    def test_orthogonal(self, su2):
        assert ca.nonholonomy_coefficient(su2, la.DualVector((1.0, 0.0, 0.0)), E3) == 0.0

    def test_aligned_unit(self, su2):
        assert ca.nonholonomy_coefficient(su2, la.DualVector((0.0, 0.0, 1.0)), E3) == 1.0

    def test_scaling(self, su2):
        assert ca.nonholonomy_coefficient(su2, la.DualVector((0.0, 0.0, 2.0)), E3) == 0.5

    def test_zero_lambda_rejected(self, su2):
        with pytest.raises(ValueError):
            ca.nonholonomy_coefficient(su2, la.DualVector((0.0, 0.0, 0.0)), E3)

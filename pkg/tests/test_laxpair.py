import numpy as np
import pytest

from ncpain import (GridFunction, MatrixElement, PiiState, SymState,
                    anticommutator, build_A, build_B, build_L, build_P,
                    first_integral, integrate_symmetric,
                    lax_residual_symmetric, normalize_first_integral,
                    pii_from_zero_curvature, pii_residual_exact,
                    pii_residual_grid, reduction_check, symmetric_rhs,
                    zero_curvature_residual)

from conftest import gaussian_element

LAMBDAS = (1.0 + 0j, 1j, 2 - 3j)


def random_pii_state(rng, d, lam=1j):
    return PiiState(
        v=gaussian_element(rng, d),
        v_z=gaussian_element(rng, d),
        v_zz=gaussian_element(rng, d),
        z=complex(rng.standard_normal(), rng.standard_normal()),
        lam=lam,
        C=complex(rng.standard_normal(), rng.standard_normal()),
    )


def rational_state(d, z, lam, sign=1):
    one = MatrixElement.eye(d)
    return PiiState(v=(sign / z) * one, v_z=(-sign / z ** 2) * one,
                    v_zz=(2 * sign / z ** 3) * one, z=z, lam=lam,
                    C=4.0 * sign)


class TestSpectralMatrices:
    def test_A_entries_scalar_case(self):
        # v = 1, v_z = 1, z = 0, lam = 1, C = 4, from the printed entries
        s = PiiState(MatrixElement.scalar(1), MatrixElement.scalar(1),
                     MatrixElement.scalar(0), z=0.0, lam=1.0, C=4.0)
        a = build_A(s)
        assert a.entry(0, 0).allclose(MatrixElement.scalar(9j))
        assert a.entry(0, 1).allclose(MatrixElement.scalar(-3 - 1j))
        assert a.entry(1, 0).allclose(MatrixElement.scalar(-3 + 1j))
        assert a.entry(1, 1).allclose(MatrixElement.scalar(-9j))

    def test_A_zero_field(self):
        zero = MatrixElement.zeros(2)
        s = PiiState(zero, zero, zero, z=0.5, lam=2.0, C=0.0)
        a = build_A(s)
        expected = (8j * 4 - 1j) * MatrixElement.eye(2)
        assert a.entry(0, 0).allclose(expected)
        assert a.entry(0, 1).norm() == 0.0

    def test_A_is_tracefree(self, rng):
        s = random_pii_state(rng, 3)
        a = build_A(s)
        assert (a.entry(0, 0) + a.entry(1, 1)).norm() == 0.0

    def test_A_requires_nonzero_lambda(self, rng):
        s = random_pii_state(rng, 2, lam=0.0)
        with pytest.raises(ValueError):
            build_A(s)

    def test_B_zero_field(self):
        b = build_B(MatrixElement.zeros(2), 0.5)
        assert b.entry(0, 0).allclose(-1j * MatrixElement.eye(2))
        assert b.entry(1, 1).allclose(1j * MatrixElement.eye(2))

    def test_B_offdiagonal_symmetric(self, rng):
        v = gaussian_element(rng, 2)
        b = build_B(v, 1.3)
        assert b.entry(0, 1).allclose(b.entry(1, 0))

    def test_B_at_lambda_i(self):
        one = MatrixElement.eye(2)
        b = build_B(one, 1j)
        assert b.entry(0, 0).allclose(2 * one)
        assert b.entry(1, 1).allclose(-2 * one)


class TestZeroCurvature:
    def test_diagonal_entries_vanish(self, rng):
        for d in (1, 2, 3, 4):
            s = random_pii_state(rng, d)
            res = zero_curvature_residual(s)
            scale = max(1.0, build_A(s).norm() * build_B(s.v, s.lam).norm())
            assert res.entry(0, 0).norm() <= 1e-12 * scale
            assert res.entry(1, 1).norm() <= 1e-12 * scale

    def test_offdiagonal_entries_carry_the_equation(self, rng):
        for d in (1, 2, 3):
            s = random_pii_state(rng, d)
            res = zero_curvature_residual(s)
            pii = pii_residual_exact(s.v, s.v_zz, s.z, s.C)
            scale = max(1.0, build_A(s).norm() * build_B(s.v, s.lam).norm())
            assert (res.entry(0, 1) + 1j * pii).norm() <= 1e-12 * scale
            assert (res.entry(1, 0) - 1j * pii).norm() <= 1e-12 * scale

    def test_lambda_independence(self, rng):
        base = random_pii_state(rng, 3)
        extracted = []
        for lam in LAMBDAS:
            s = PiiState(base.v, base.v_z, base.v_zz, base.z, lam, base.C)
            extracted.append(pii_from_zero_curvature(
                zero_curvature_residual(s)))
        scale = max(1.0, extracted[0].norm())
        for other in extracted[1:]:
            assert (extracted[0] - other).norm() <= 1e-12 * scale

    @pytest.mark.parametrize("sign", [1, -1])
    def test_rational_seed_exact(self, sign):
        for d in (1, 2):
            for lam in LAMBDAS:
                s = rational_state(d, 1.37, lam, sign)
                res = zero_curvature_residual(s)
                assert res.norm() <= 1e-12


class TestPiiResidual:
    def test_zero_solves_homogeneous(self):
        zero = MatrixElement.zeros(2)
        assert pii_residual_exact(zero, zero, 0.8, 0.0).norm() == 0.0

    @pytest.mark.parametrize("sign,c_val", [(1, 4.0), (-1, -4.0)])
    def test_rational_solution_exact(self, sign, c_val):
        one = MatrixElement.eye(2)
        for z in (1.0, 1.31, 2.0):
            v = (sign / z) * one
            v_zz = (2 * sign / z ** 3) * one
            assert pii_residual_exact(v, v_zz, z, c_val).norm() <= 1e-14

    def test_grid_residual_of_rational_seed(self):
        one = MatrixElement.eye(1)
        f = GridFunction.sample(lambda z: (1.0 / z) * one, 1.0, 1e-3, 1001)
        res = pii_residual_grid(f, 4.0)
        # stencil error ~ v'''' h^2 / 12 = 2 h^2 / z^5, about 2e-6 at z = 1
        assert res.sup_norm() <= 1e-5
        assert res.sup_norm() >= 1e-8

    def test_grid_too_short(self):
        one = MatrixElement.eye(1)
        f = GridFunction.sample(lambda z: one, 1.0, 0.1, 4)
        with pytest.raises(ValueError):
            pii_residual_grid(f, 0.0)

    def test_anticommutator_route_matches_scalar_z(self, rng):
        v = gaussian_element(rng, 3)
        z = 0.9
        direct = anticommutator(z * v.one_like(), v)
        assert direct.allclose((2 * z) * v)


class TestSymmetricSystem:
    def test_rhs_fixed_point(self, rng):
        v = gaussian_element(rng, 2)
        s = SymState(v, v, v.zero_like(), 0.0, 0.0)
        assert all(r.norm() == 0.0 for r in symmetric_rhs(s))

    def test_rhs_frozen_scalars(self):
        s = SymState(MatrixElement.scalar(1), MatrixElement.scalar(2),
                     MatrixElement.scalar(3), 0.0, 0.0)
        d0, d1, d2 = symmetric_rhs(s)
        assert d0.allclose(MatrixElement.scalar(6))
        assert d1.allclose(MatrixElement.scalar(-12))
        assert d2.allclose(MatrixElement.scalar(1))

    def test_first_integral_derivative_identity(self, rng):
        for d in (1, 2, 3):
            s = SymState(gaussian_element(rng, d), gaussian_element(rng, d),
                         gaussian_element(rng, d),
                         complex(rng.standard_normal()),
                         complex(rng.standard_normal()))
            d0, d1, d2 = symmetric_rhs(s)
            lhs = d0 + d1 + s.v2 * d2 + d2 * s.v2
            rhs = (s.alpha0 + s.alpha1) * s.v0.one_like()
            assert (lhs - rhs).norm() <= 1e-12 * max(1.0, lhs.norm())

    def test_L_P_frozen_blocks(self):
        one = MatrixElement.eye(2)
        s = SymState(one, one, one, 0.0, 0.0)
        ell = build_L(s)
        pee = build_P(s)
        # rho1 = rho2 = -1, sigma = 2
        assert pee.entry(0, 0).allclose(-one)
        assert pee.entry(2, 2).allclose(one)
        assert pee.entry(5, 4).allclose(-one)
        assert ell.entry(1, 0).allclose(-one)
        # off-diagonal 2x2 blocks are zero
        for i in range(6):
            for j in range(6):
                if i // 2 != j // 2:
                    assert ell.entry(i, j).norm() == 0.0
                    assert pee.entry(i, j).norm() == 0.0

    def test_L_blocks_are_involutions(self, rng):
        s = SymState(gaussian_element(rng, 2), gaussian_element(rng, 2),
                     gaussian_element(rng, 2), 0.3, -0.4)
        ell = build_L(s)
        sq = ell @ ell
        assert sq.allclose(ell.identity_like())

    def test_lax_residual_vanishes_random(self, rng):
        from ncpain import random_invertible
        for d in (1, 2, 3):
            s = SymState(random_invertible(rng, d), random_invertible(rng, d),
                         gaussian_element(rng, d),
                         complex(rng.standard_normal(),
                                 rng.standard_normal()),
                         complex(rng.standard_normal(),
                                 rng.standard_normal()))
            res = lax_residual_symmetric(s)
            scale = max(1.0, build_L(s).norm() * build_P(s).norm())
            assert res.norm() <= 1e-12 * scale

    def test_lax_residual_frozen_scalars(self):
        s = SymState(MatrixElement.scalar(1), MatrixElement.scalar(2),
                     MatrixElement.scalar(3), 1.0, 1.0)
        assert lax_residual_symmetric(s).norm() <= 1e-14

    def test_lax_residual_fixed_point_both_sides_zero(self):
        one = MatrixElement.eye(2)
        s = SymState(one, one, one.zero_like(), 0.0, 0.0)
        ell = build_L(s)
        pee = build_P(s)
        assert (pee @ ell - ell @ pee).norm() <= 1e-14
        assert lax_residual_symmetric(s).norm() <= 1e-14

    def test_perturbation_sensitivity_is_linear(self, rng):
        s = SymState(MatrixElement.scalar(1.0), MatrixElement.scalar(2.0),
                     MatrixElement.scalar(3.0), 1.0, 1.0)
        d0, d1, d2 = symmetric_rhs(s)
        for eps in (1e-3, 1e-6):
            perturbed = (d0 + eps * d0.one_like(), d1, d2)
            res = lax_residual_symmetric(s, rhs=perturbed)
            assert res.norm() == pytest.approx(eps, rel=1e-9)


class TestFlow:
    def test_fixed_point_constant(self):
        one = MatrixElement.eye(2)
        s0 = SymState(one, one, one.zero_like(), 0.0, 0.0)
        flow = integrate_symmetric(s0, 0.5, 1e-2)
        assert not flow.truncated
        for s in flow.states:
            assert (s.v0 - one).norm() <= 1e-14
            assert s.v2.norm() <= 1e-14

    def test_first_integral_drift(self):
        s0 = SymState(MatrixElement.scalar(1.0), MatrixElement.scalar(1.0),
                      MatrixElement.scalar(1.0), 1.0, 1.0)
        flow = integrate_symmetric(s0, 1.0, 1e-3)
        assert not flow.truncated
        f0 = first_integral(flow.states[0])
        drift = max((first_integral(s) - f0).norm() for s in flow.states)
        assert drift <= 1e-8

    def test_fourth_order_convergence(self):
        s0 = SymState(MatrixElement.scalar(0.4), MatrixElement.scalar(-0.3),
                      MatrixElement.scalar(0.2), 0.7, 1.3)

        def endpoint(h):
            return integrate_symmetric(s0, 1.0, h).states[-1].v2

        ref = endpoint(1.25e-4)
        e_coarse = (endpoint(2e-3) - ref).norm()
        e_fine = (endpoint(1e-3) - ref).norm()
        assert 12.0 <= e_coarse / e_fine <= 20.0

    def test_near_singular_truncation(self):
        s0 = SymState(MatrixElement.scalar(-0.05), MatrixElement.scalar(1.0),
                      MatrixElement.scalar(0.0), 1.0, 0.0)
        flow = integrate_symmetric(s0, 1.0, 1e-3, min_condition=1e-2)
        assert flow.truncated
        assert "v0" in flow.reason
        assert len(flow.states) < 1001

    def test_blowup_truncation(self):
        # steep data drives v2 into a finite-time pole
        s0 = normalize_first_integral(
            SymState(MatrixElement.scalar(0.1), MatrixElement.scalar(1.0),
                     MatrixElement.scalar(-3.0), 0.5, 1.5))
        with np.errstate(over="ignore", invalid="ignore"):
            flow = integrate_symmetric(s0, 2.0, 1e-3)
        assert flow.truncated


class TestReduction:
    def _normalized_flow(self, v0=0.1, v2=0.3, alpha0=0.5, alpha1=1.5):
        s0 = normalize_first_integral(
            SymState(MatrixElement.scalar(v0), MatrixElement.scalar(1.0),
                     MatrixElement.scalar(v2), alpha0, alpha1, 0.0))
        return integrate_symmetric(s0, 1.0, 1e-3)

    def test_normalized_scalar_trajectory(self):
        flow = self._normalized_flow()
        assert not flow.truncated
        residual = reduction_check(flow.states)
        assert residual.sup_norm() <= 1e-5

    def test_normalized_matrix_trajectory(self):
        v0 = MatrixElement([[0.12, 0.03], [0.0, 0.18]])
        v2 = MatrixElement([[0.25, 0.1], [-0.05, 0.3]])
        s0 = normalize_first_integral(
            SymState(v0, MatrixElement.eye(2), v2, 0.5, 1.5, 0.0))
        flow = integrate_symmetric(s0, 1.0, 1e-3)
        assert not flow.truncated
        assert reduction_check(flow.states).sup_norm() <= 1e-5

    def test_unnormalized_control_does_not_vanish(self):
        s0 = SymState(MatrixElement.scalar(0.1), MatrixElement.scalar(1.0),
                      MatrixElement.scalar(0.3), 0.5, 1.5, 0.0)
        flow = integrate_symmetric(s0, 1.0, 1e-3)
        normalized = self._normalized_flow()
        bad = reduction_check(flow.states).sup_norm()
        good = reduction_check(normalized.states).sup_norm()
        assert bad > 1e3 * good

    def test_constant_shift_knob_compensates(self):
        # first integral = k != 0 solves the equation in z = t + k/2
        s0 = SymState(MatrixElement.scalar(0.1), MatrixElement.scalar(1.0),
                      MatrixElement.scalar(0.3), 0.5, 1.5, 0.0)
        k = complex(first_integral(s0).data[0, 0]).real
        flow = integrate_symmetric(s0, 1.0, 1e-3)
        residual = reduction_check(flow.states, integration_constant=k)
        assert residual.sup_norm() <= 1e-5

    def test_alpha_sum_precondition(self):
        s0 = SymState(MatrixElement.scalar(1.0), MatrixElement.scalar(1.0),
                      MatrixElement.scalar(0.0), 0.0, 0.0, 0.0)
        flow = integrate_symmetric(s0, 0.1, 1e-3)
        with pytest.raises(ValueError):
            reduction_check(flow.states)

import numpy as np
import pytest

import maxprod_kantorovich as mk

# Closed-form catalog facts, frozen from hand evaluation:
#   sigma_logistic(1) = 1/(1+e^-1); kernel values are half-differences of
#   sigma at +-1 around the argument.
SIGMA_L_1 = 0.7310585786300049
PHI_L_0 = 0.2310585786300049        # (sigma_l(1) - sigma_l(-1)) / 2
PHI_L_2 = 0.1107577740962142        # ((1+e^-3)^-1 - (1+e^-1)^-1) / 2
SIGMA_H_1 = 0.8807970779778824      # (tanh 1 + 1) / 2
PHI_H_0 = 0.3807970779778824        # tanh(1) / 2
PHI_H_2 = 0.0583651494327414        # (tanh 3 - tanh 1) / 4


class TestCatalogSigmoids:
    def test_logistic_values(self):
        s = mk.make_logistic()
        assert s(0.0) == pytest.approx(0.5, abs=1e-15)
        assert s(1.0) == pytest.approx(SIGMA_L_1, abs=1e-12)

    def test_logistic_odd_symmetry(self):
        s = mk.make_logistic()
        xs = np.linspace(-30, 30, 1001)
        np.testing.assert_allclose(s(xs) + s(-xs), 1.0, atol=1e-12)

    def test_tanh_values(self):
        s = mk.make_tanh()
        assert s(0.0) == pytest.approx(0.5, abs=1e-15)
        assert s(1.0) == pytest.approx(SIGMA_H_1, abs=1e-12)

    def test_ramp_values(self):
        s = mk.make_ramp()
        assert s(0.0) == 0.5
        assert s(-2.0) == 0.0
        assert s(2.0) == 1.0
        assert s.breakpoints == (-1.5, 1.5)

    def test_step_values(self):
        s = mk.make_step()
        assert s(0.0) == 0.5
        assert s(-2.0) == 0.5
        assert s(2.5) == 1.0

    def test_non_monotone_rejected(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            mk.SigmoidalFunction("bad", lambda x: np.sin(x) * 0.5 + 0.5, alpha=2.0)

    def test_bad_tail_rejected(self):
        with pytest.raises(ValueError, match="tails"):
            mk.SigmoidalFunction("flat", lambda x: np.full_like(x, 0.4), alpha=2.0)


class TestDensityKernel:
    def test_cached_values(self, kernels):
        np.testing.assert_allclose(kernels["logistic"].value_at_zero, PHI_L_0, atol=1e-12)
        np.testing.assert_allclose(kernels["logistic"].value_at_two, PHI_L_2, atol=1e-12)
        np.testing.assert_allclose(kernels["tanh"].value_at_zero, PHI_H_0, atol=1e-12)
        np.testing.assert_allclose(kernels["tanh"].value_at_two, PHI_H_2, atol=1e-12)
        np.testing.assert_allclose(kernels["ramp"].value_at_zero, 1.0 / 3.0, atol=1e-12)
        np.testing.assert_allclose(kernels["ramp"].value_at_two, 1.0 / 12.0, atol=1e-12)
        assert kernels["step"].value_at_zero == 0.0
        np.testing.assert_allclose(kernels["step"].value_at_two, 0.25, atol=1e-15)

    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp", "step"])
    def test_unit_mass(self, kernels, name):
        np.testing.assert_allclose(kernels[name].l1_norm, 1.0, atol=1e-6)

    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp", "step"])
    def test_nonnegative_on_dense_grid(self, kernels, name):
        xs = np.linspace(-8, 8, 20001)
        assert np.asarray(kernels[name].evaluator(xs)).min() >= 0.0

    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp", "step"])
    def test_even_symmetry(self, kernels, name):
        """Kernels of odd-symmetric sigmoids are even functions."""
        xs = np.linspace(0.0, 8.0, 4001)
        k = kernels[name].evaluator
        np.testing.assert_allclose(k(xs), k(-xs), atol=1e-12)

    def test_breakpoints_shifted(self, kernels):
        assert kernels["ramp"].breakpoints == (-2.5, -0.5, 0.5, 2.5)
        assert kernels["step"].breakpoints == (-3.0, -1.0, 1.0, 3.0)

    def test_admissibility(self, kernels):
        assert all(kernels[n].admissible for n in kernels)

    def test_low_alpha_rejected(self):
        with pytest.raises(mk.QuadratureError):
            mk.make_density_kernel(mk.make_logistic(alpha=1.0))


class TestAssumptions:
    def test_logistic_all_pass(self, kernels):
        rep = kernels["logistic"].assumptions
        assert rep.sigma1 and rep.sigma2 and rep.sigma3
        assert rep.witnesses == {}

    def test_tanh_ramp_all_pass(self, kernels):
        assert kernels["tanh"].assumptions.all_pass
        assert kernels["ramp"].assumptions.all_pass

    def test_step_fails_unimodality_with_witness(self, kernels):
        rep = kernels["step"].assumptions
        assert rep.sigma1 and rep.sigma3
        assert not rep.sigma2
        lo, hi = rep.witnesses["sigma2"]
        k = kernels["step"].evaluator
        # The witness pair must exhibit the increase away from the center.
        assert abs(hi) > abs(lo)
        assert k(hi) > k(lo)

    def test_tabulated_sigmoid_roundtrip(self, tmp_path):
        xs = np.linspace(-6, 6, 241)
        ys = np.clip(xs / 3.0 + 0.5, 0.0, 1.0)
        path = tmp_path / "table.csv"
        path.write_text("x,sigma\n" + "\n".join(f"{x},{y}" for x, y in zip(xs, ys)))
        sig = mk.load_sigmoid_csv(path, alpha=4.0)
        kern = mk.make_density_kernel(sig)
        np.testing.assert_allclose(kern.value_at_zero, 1.0 / 3.0, atol=1e-12)
        np.testing.assert_allclose(kern.l1_norm, 1.0, atol=1e-6)

    def test_unknown_name_rejected(self):
        with pytest.raises(KeyError):
            mk.load_kernel("gaussian")


class TestMoments:
    def test_order_zero_is_peak_value(self, kernels):
        """Unimodal kernels attain the order-0 sup at the center."""
        rep = mk.moment(kernels["logistic"], 0.0)
        np.testing.assert_allclose(rep.value, PHI_L_0, atol=1e-9)

    def test_ramp_order_one_exact(self, kernels):
        """Hand value: max of t*(5/2-t)/6 at t=5/4 gives 25/96."""
        rep = mk.moment(kernels["ramp"], 1.0)
        np.testing.assert_allclose(rep.value, 25.0 / 96.0, atol=1e-9)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp"])
    def test_moment_chain(self, kernels, name, beta):
        kernel = kernels[name]
        value = mk.moment(kernel, beta).value
        assert value <= kernel.value_at_zero + 1e-6
        assert kernel.value_at_zero <= 0.5 + 1e-12

    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp", "step"])
    def test_moment_dominates_value_at_two(self, kernels, name):
        value = mk.moment(kernels[name], 0.0).value
        assert value >= kernels[name].value_at_two - 1e-12

    def test_step_breaks_moment_chain(self, kernels):
        """The non-unimodal kernel violates the chain: sup is 1/4 > value at 0."""
        rep = mk.moment(kernels["step"], 0.0)
        np.testing.assert_allclose(rep.value, 0.25, atol=1e-9)
        assert rep.value > kernels["step"].value_at_zero

    def test_order_above_alpha_rejected(self, kernels):
        with pytest.raises(ValueError, match="unbounded"):
            mk.moment(kernels["logistic"], kernels["logistic"].alpha + 0.5)

    def test_negative_order_rejected(self, kernels):
        with pytest.raises(ValueError):
            mk.moment(kernels["ramp"], -0.1)

    @pytest.mark.parametrize("name", ["logistic", "tanh", "ramp", "step"])
    @pytest.mark.parametrize("beta", [0.0, 1.0])
    def test_against_dense_scan_oracle(self, kernels, name, beta):
        """Independent check: the double sup collapses to sup over t of
        kernel(t) |t|**beta, scanned on a dense t grid."""
        kernel = kernels[name]
        ts = np.linspace(0.0, 40.0, 400_001)
        oracle = float((np.asarray(kernel.evaluator(ts)) * ts**beta).max())
        rep = mk.moment(kernel, beta)
        assert rep.value >= oracle - 1e-9
        assert rep.value <= oracle + 1e-4  # oracle grid is the coarser one

    def test_shift_reduction(self, kernels):
        """The inner max is invariant under integer shifts of x with a
        matched k-window."""
        from maxprod_kantorovich.sigmoids import _moment_inner

        kernel = kernels["logistic"]
        xs = np.linspace(0.0, 1.0, 101)
        base = _moment_inner(kernel, 1.0, xs, 12)
        for j in (1, 2, -3):
            # shifting x by j and recentering the window reproduces base
            shifted = _moment_inner(kernel, 1.0, xs + j, 12 + abs(j))
            np.testing.assert_allclose(shifted, base, atol=1e-12)

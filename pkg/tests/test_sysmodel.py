import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nfpf
from nfpf import systems
from nfpf.errors import EquilibriumError, NotAtEquilibriumError, SchemaError
from nfpf.sysmodel import electrical_power, model_from_dict, quadratize_finite_diff

OMEGA_S = 2.0 * np.pi * 60.0


class TestQuadraticModel:
    def test_symmetrizes_hessian(self):
        H = np.zeros((2, 2, 2))
        H[0, 0, 1] = 4.0
        model = nfpf.QuadraticModel(A=np.eye(2), H=H, x_eq=np.zeros(2), labels=["a", "b"])
        assert model.H[0, 0, 1] == model.H[0, 1, 0] == 2.0

    def test_rejects_nonfinite(self):
        A = np.array([[np.nan, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="non-finite"):
            nfpf.QuadraticModel(A=A, H=np.zeros((2, 2, 2)), x_eq=np.zeros(2), labels=["a", "b"])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError, match="distinct"):
            nfpf.QuadraticModel(
                A=np.eye(2), H=np.zeros((2, 2, 2)), x_eq=np.zeros(2), labels=["a", "a"]
            )

    def test_rhs_includes_quadratic_term(self):
        model = systems.cascade_model()
        x = np.array([0.5, 2.0])
        np.testing.assert_allclose(model.rhs(x), [-0.5 + 4.0, -6.0])

    def test_arrays_immutable(self):
        model = systems.cascade_model()
        with pytest.raises(ValueError):
            model.A[0, 0] = 1.0


class TestQuadratizeFiniteDiff:
    def test_linear_system_has_zero_hessian(self):
        model = quadratize_finite_diff(lambda x: np.array([-x[0], -3.0 * x[1]]), np.zeros(2))
        np.testing.assert_allclose(model.A, np.diag([-1.0, -3.0]), atol=1e-9)
        np.testing.assert_allclose(model.H, 0.0, atol=1e-6)

    def test_cascade_hessian_entry(self):
        model = quadratize_finite_diff(
            lambda x: np.array([-x[0] + x[1] ** 2, -3.0 * x[1]]), np.zeros(2), step=1e-3
        )
        np.testing.assert_allclose(model.A, np.diag([-1.0, -3.0]), atol=1e-9)
        expected = np.zeros((2, 2, 2))
        expected[0, 1, 1] = 2.0
        np.testing.assert_allclose(model.H, expected, atol=1e-8)

    def test_rejects_non_equilibrium(self):
        with pytest.raises(NotAtEquilibriumError) as err:
            quadratize_finite_diff(lambda x: np.array([1e-3, 0.0]), np.zeros(2))
        assert err.value.residual_norm == pytest.approx(1e-3)

    def test_rejects_nonfinite_evaluations(self):
        def f(x):
            return np.array([np.inf * x[0], -x[1]]) if abs(x[0]) > 1e-7 else np.zeros(2)

        with pytest.raises(ValueError, match="non-finite"):
            quadratize_finite_diff(f, np.zeros(2))

    @settings(max_examples=25, deadline=None)
    @given(
        coeffs=st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=12, max_size=12),
        shift=st.floats(min_value=-0.5, max_value=0.5),
    )
    def test_exact_on_degree_two_polynomials(self, coeffs, shift):
        """Central differences recover any quadratic vector field exactly."""
        c = np.array(coeffs).reshape(2, 6)
        x_eq = np.array([shift, -shift])

        def f(x):
            d = x - x_eq
            basisvals = np.array([d[0], d[1], d[0] ** 2, d[0] * d[1], d[1] ** 2, 0.0])
            return c @ basisvals

        model = quadratize_finite_diff(f, x_eq, step=1e-3)
        A_exact = c[:, :2]
        H_exact = np.array(
            [[[2 * ck[2], ck[3]], [ck[3], 2 * ck[4]]] for ck in c]
        )
        scale = max(1.0, np.abs(A_exact).max(), np.abs(H_exact).max())
        assert np.max(np.abs(model.A - A_exact)) <= 1e-6 * scale
        assert np.max(np.abs(model.H - H_exact)) <= 1e-6 * scale


class TestSwingParams:
    def test_rejects_nonpositive_inertia(self):
        with pytest.raises(ValueError, match="inertia"):
            systems.two_machine().__class__(
                inertia=np.array([5.0, 0.0]),
                damping=np.ones(2),
                p_mech=np.zeros(2),
                emf=np.ones(2),
                Y=np.zeros((2, 2), dtype=complex),
                omega_s=OMEGA_S,
            )

    def test_rejects_asymmetric_network(self):
        Y = np.array([[0.0, 1.0j], [0.5j, 0.0]])
        with pytest.raises(ValueError, match="symmetric"):
            nfpf.SwingParams(
                inertia=np.ones(2),
                damping=np.ones(2),
                p_mech=np.zeros(2),
                emf=np.ones(2),
                Y=Y,
                omega_s=OMEGA_S,
            )


class TestSolveEquilibrium:
    def test_symmetric_unloaded_pair_has_zero_relative_angle(self):
        params = systems.two_machine(p_transfer=0.0)
        delta = nfpf.solve_equilibrium(params, np.zeros(2))
        assert delta[0] - delta[1] == pytest.approx(0.0, abs=1e-12)

    def test_machine_against_stiff_partner_matches_arcsin(self):
        # P = |E||V| B sin(delta) with |E||V|B = 1: delta = arcsin(0.5)
        params = systems.two_machine(p_transfer=0.5, b_tie=1.0)
        delta = nfpf.solve_equilibrium(params, np.zeros(2))
        assert delta[0] - delta[1] == pytest.approx(np.arcsin(0.5), abs=1e-10)
        residual = params.p_mech - electrical_power(params, delta)
        assert np.max(np.abs(residual)) <= 1e-10

    def test_transfer_beyond_network_limit_fails(self):
        params = systems.two_machine(p_transfer=1.5, b_tie=1.0)
        with pytest.raises(EquilibriumError):
            nfpf.solve_equilibrium(params, np.zeros(2))


class TestBuildSwingModel:
    def test_two_machine_mode_structure(self):
        model = nfpf.build_swing_model(systems.two_machine())
        assert model.n == 3
        eigs = np.linalg.eigvals(model.A)
        oscillatory = eigs[np.abs(eigs.imag) > 1e-9]
        real_modes = eigs[np.abs(eigs.imag) <= 1e-9]
        assert len(oscillatory) == 2
        assert len(real_modes) == 1
        assert real_modes[0].real < 0

    def test_undamped_pair_sits_on_imaginary_axis(self):
        params = systems.two_machine(damping=0.0)
        model = nfpf.build_swing_model(params)
        eigs = np.linalg.eigvals(model.A)
        pair = eigs[np.abs(eigs.imag) > 1e-9]
        np.testing.assert_allclose(pair.real, 0.0, atol=1e-12)

    def test_two_area_has_expected_mode_bands(self, two_area):
        _, model, basis, _ = two_area
        assert model.n == 7
        freqs = sorted(basis.freq_hz[i] for i in basis.representatives if basis.freq_hz[i] > 1e-9)
        assert len(freqs) == 3
        assert freqs[0] < 1.0
        assert all(0.9 <= f <= 1.8 for f in freqs[1:])

    def test_equilibrium_is_exact_fixed_point(self, two_area):
        _, model, _, _ = two_area
        np.testing.assert_array_equal(model.rhs(np.zeros(model.n)), np.zeros(model.n))

    def test_analytic_matches_finite_difference(self, two_area):
        params, model, _, _ = two_area
        field = nfpf.swing_deviation_field(params, model.x_eq)
        fd = quadratize_finite_diff(field, np.zeros(model.n))
        assert np.max(np.abs(model.A - fd.A)) <= 1e-6
        assert np.max(np.abs(model.H - fd.H)) <= 1e-4


class TestModelFiles:
    def test_quadratic_roundtrip(self, tmp_path):
        model = systems.cascade_model()
        path = tmp_path / "m.json"
        nfpf.save_model(model, path)
        loaded = nfpf.load_model(path)
        np.testing.assert_array_equal(loaded.A, model.A)
        np.testing.assert_array_equal(loaded.H, model.H)
        assert loaded.labels == model.labels

    def test_swing_file_builds_model(self, tmp_path, two_area):
        params, model, _, _ = two_area
        path = tmp_path / "s.json"
        nfpf.save_model(params, path)
        loaded = nfpf.load_model(path)
        np.testing.assert_allclose(loaded.A, model.A, atol=1e-12)

    def test_bundled_files_match_constructors(self):
        for name, ctor in systems.BUNDLED.items():
            bundled = json.loads(systems.data_path(name).read_text())
            assert bundled == ctor().to_dict(), name

    @pytest.mark.parametrize(
        "mutate, path_fragment",
        [
            (lambda d: d.pop("A"), "A"),
            (lambda d: d.update(A=[[0.0]]), "A"),
            (lambda d: d.update(extra=1), "extra"),
            (lambda d: d.update(kind="other"), "kind"),
            (lambda d: d["H"][0].__setitem__(0, [1.0, "x"]), "H[0][0][1]"),
        ],
    )
    def test_schema_violations_carry_field_path(self, mutate, path_fragment):
        data = systems.cascade_model().to_dict()
        mutate(data)
        with pytest.raises(SchemaError) as err:
            model_from_dict(data)
        assert path_fragment in str(err.value)

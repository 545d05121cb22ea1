import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvedqit.hilbert import (
    FockSpace,
    basis_state,
    expectation,
    identity,
    number_op,
    random_density_matrix,
    random_unitary,
    trace_distance,
)
from curvedqit.povm import NotPositiveError, probabilities, validate_povm
from curvedqit.unruh import (
    AlphaTooLargeError,
    SqueezingParams,
    compare_representations,
    conjugate_povm,
    detector_povm,
    reduced_state_distance,
    rindler_thermal_state,
    squeezing_unitary,
    truncation_tail,
    two_mode_squeezed_state,
)

from conftest import MEAN_UNIT, X_UNIT, geometric_mean_occupation

UNIT = SqueezingParams(2 * math.pi, 1.0)


class TestParams:
    def test_unit_case(self):
        assert UNIT.temperature == pytest.approx(1.0)
        assert UNIT.tanh_r == pytest.approx(math.exp(-0.5))
        assert UNIT.x == pytest.approx(X_UNIT)
        assert math.tanh(UNIT.r) ** 2 == pytest.approx(UNIT.x)
        assert UNIT.mean_occupation() == pytest.approx(MEAN_UNIT)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            SqueezingParams(0.0, 1.0)


class TestSqueezedState:
    def test_weak_squeezing_is_vacuum(self):
        # tanh r = exp(-pi w / a) = 1e-8
        params = SqueezingParams(math.pi / math.log(1e8), 1.0)
        assert params.tanh_r == pytest.approx(1e-8)
        s = FockSpace(2, 5)
        rho = two_mode_squeezed_state(s, params)
        fid = expectation(rho, basis_state(s, (0, 0))).real
        assert 1 - fid < 1e-15

    def test_series_coefficients(self):
        cutoff = 30
        s = FockSpace(2, cutoff)
        rho = two_mode_squeezed_state(s, UNIT, "series")
        # pure state with real nonnegative coefficients: sqrt of the diagonal
        for n in range(cutoff + 1):
            i = s.index((n, n))
            coeff = math.sqrt(rho.entries[i, i].real)
            assert coeff == pytest.approx(math.sqrt(1 - X_UNIT) * X_UNIT ** (n / 2), abs=1e-9)

    def test_methods_agree(self):
        s = FockSpace(2, 30)
        d = trace_distance(
            two_mode_squeezed_state(s, UNIT, "series"),
            two_mode_squeezed_state(s, UNIT, "generator"),
        )
        assert d < 1e-6

    def test_overlap_bound(self):
        s = FockSpace(2, 12)
        a = two_mode_squeezed_state(s, UNIT, "series")
        b = two_mode_squeezed_state(s, UNIT, "generator")
        overlap = expectation(a, b).real
        assert overlap > 1 - 10 * truncation_tail(UNIT.x, 12)

    def test_generator_pure(self):
        rho = two_mode_squeezed_state(FockSpace(2, 6), UNIT, "generator")
        assert np.trace(rho.entries @ rho.entries).real == pytest.approx(1, abs=1e-12)

    def test_requires_two_modes(self):
        with pytest.raises(ValueError):
            two_mode_squeezed_state(FockSpace(1, 3), UNIT)
        with pytest.raises(ValueError):
            two_mode_squeezed_state(FockSpace(2, 3), UNIT, "magic")


class TestThermal:
    def test_cold_limit(self):
        rho = rindler_thermal_state(FockSpace(1, 5), SqueezingParams(1e-3, 1.0))
        assert rho.allclose(basis_state(FockSpace(1, 5), (0,)), atol=1e-15)

    def test_mean_occupation(self):
        s = FockSpace(1, 30)
        n = expectation(rindler_thermal_state(s, UNIT), number_op(s)).real
        assert n == pytest.approx(geometric_mean_occupation(X_UNIT, 30), abs=1e-14)
        assert abs(n - MEAN_UNIT) < 1e-9

    def test_entries(self):
        s = FockSpace(1, 4)
        x = UNIT.x
        expected = [(1 - x) * x**n / (1 - x**5) for n in range(5)]
        assert_allclose(np.diag(rindler_thermal_state(s, UNIT).entries).real, expected, atol=1e-15)

    @pytest.mark.parametrize("cutoff", [3, 10, 30])
    def test_is_reduced_squeezed_state(self, cutoff):
        assert reduced_state_distance(FockSpace(2, cutoff), UNIT) < 1e-9

    def test_requires_one_mode(self):
        with pytest.raises(ValueError):
            rindler_thermal_state(FockSpace(2, 3), UNIT)


class TestDetector:
    def test_boundary_alpha(self):
        s = FockSpace(1, 8)
        det = detector_povm(s, 1 / 8)
        assert abs(det.povm.effects[1].eigvalsh()[0]) < 1e-12

    def test_alpha_too_large(self):
        with pytest.raises(AlphaTooLargeError) as info:
            detector_povm(FockSpace(1, 8), 0.2)
        assert info.value.cutoff == 8

    def test_one_quantum(self):
        s = FockSpace(1, 5)
        p = probabilities(detector_povm(s, 0.01).povm, basis_state(s, (1,)))
        assert p[0] == pytest.approx(0.01, abs=1e-15)

    def test_thermal_click_probability(self):
        s = FockSpace(1, 30)
        p = probabilities(detector_povm(s, 0.01).povm, rindler_thermal_state(s, UNIT))
        assert abs(p[0] - 0.01 / (math.e - 1)) < 1e-9

    def test_sums_to_identity(self):
        s = FockSpace(2, 3)
        det = detector_povm(s, 0.1, [0.6, 0.8j])
        total = det.povm.effects[0] + det.povm.effects[1]
        assert total.allclose(identity(s), atol=1e-15)
        assert det.povm.outcomes == ("click", "no_click")

    def test_multimode_overflow_detected(self):
        # for balanced chi, a(chi)^dag a(chi) exceeds n_max on the truncated space
        s = FockSpace(2, 2)
        with pytest.raises(NotPositiveError):
            detector_povm(s, 0.5, [1, 1])

    def test_validity_sweep(self):
        s = FockSpace(1, 6)
        for alpha in np.linspace(1e-3, 1 / 6, 7):
            validate_povm(detector_povm(s, alpha).povm.effects)


class TestConjugation:
    def test_identity(self):
        s = FockSpace(1, 3)
        det = detector_povm(s, 0.1)
        out = conjugate_povm(identity(s), det.povm)
        for e, f in zip(det.povm.effects, out.effects):
            assert e.allclose(f)

    def test_covariance(self, rng):
        s = FockSpace(1, 4)
        u = random_unitary(s, rng)
        povm = detector_povm(s, 0.2).povm
        rho = random_density_matrix(s, rng)
        moved = u @ rho @ u.adjoint()
        p1 = probabilities(conjugate_povm(u, povm), moved)
        assert np.max(np.abs(p1 - probabilities(povm, rho))) < 1e-10

    def test_squeezing_completeness(self):
        s = FockSpace(2, 30)
        u = squeezing_unitary(s, UNIT.r)
        out = conjugate_povm(u, detector_povm(s, 0.01, [1, 0]).povm)
        total = out.effects[0] + out.effects[1]
        assert np.linalg.norm(total.entries - np.eye(s.dim), 2) < 1e-10

    def test_non_unitary(self):
        s = FockSpace(1, 2)
        with pytest.raises(ValueError):
            conjugate_povm(identity(s) * 2, detector_povm(s, 0.1).povm)


class TestCompare:
    def test_unit_sweep(self):
        cmp = compare_representations(UNIT, 0.01, [1.0], (5, 10, 20, 30))
        d13 = [r.d13 for r in cmp.rows]
        assert all(r.d12 < 1e-9 for r in cmp.rows)
        assert all(b < a for a, b in zip(d13, d13[1:]))
        assert d13[-1] < 1e-6
        assert cmp.ok
        # closed form alpha x / (1 - x), up to the truncation tail
        assert cmp.rows[-1].p_thermal == pytest.approx(0.01 * X_UNIT / (1 - X_UNIT), abs=1e-11)

    def test_no_squeezing(self):
        params = SqueezingParams(math.pi / math.log(1e8), 1.0)
        cmp = compare_representations(params, 0.01, [1.0], (3, 6))
        for r in cmp.rows:
            assert max(r.p_thermal, r.p_series, r.p_generator) < 1e-12

    def test_csv_header(self):
        cmp = compare_representations(UNIT, 0.01, [1.0], (4,))
        lines = cmp.to_csv().splitlines()
        assert lines[0] == "cutoff,p_thermal,p_series,p_generator,d12,d13,tail"
        assert lines[1].startswith("4,")

    def test_requires_cutoffs(self):
        with pytest.raises(ValueError):
            compare_representations(UNIT, 0.01, [1.0], [])

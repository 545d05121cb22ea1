import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from curvedqit.hilbert import (
    DimensionMismatchError,
    FockSpace,
    NotHermitianError,
    Operator,
    ProductSpace,
    basis_state,
    identity,
    ket,
    maximally_mixed,
    number_op,
    pure_state,
    random_density_matrix,
    random_hermitian,
)
from curvedqit.povm import (
    IncompletenessError,
    NotPositiveError,
    POVMError,
    check_povm,
    neumark_dilate,
    probabilities,
    random_povm,
    simulate_frequencies,
    spectral_pvm,
    validate_povm,
)
from curvedqit.unruh import detector_povm

from conftest import X_UNIT


def projector(space, occ):
    return basis_state(space, occ)


class TestValidate:
    def test_single_identity(self):
        s = FockSpace(1, 2)
        povm = validate_povm([identity(s)])
        assert povm.outcomes == ("0",)

    def test_halves(self):
        s = FockSpace(2, 1)
        povm = validate_povm({"a": identity(s) * 0.5, "b": identity(s) * 0.5})
        assert povm.outcomes == ("a", "b")

    def test_negative_effect(self):
        s = FockSpace(1, 1)
        with pytest.raises(NotPositiveError) as info:
            validate_povm({"up": identity(s) * 1.2, "down": identity(s) * -0.2})
        assert info.value.label == "down"
        assert info.value.min_eigenvalue == pytest.approx(-0.2)

    def test_incomplete(self):
        s = FockSpace(1, 1)
        with pytest.raises(IncompletenessError) as info:
            validate_povm([identity(s) * 0.5, identity(s) * 0.4])
        assert info.value.residual == pytest.approx(0.1)

    def test_non_hermitian(self):
        s = ProductSpace((2,))
        m = np.array([[0.5, 0.3], [0.0, 0.5]])
        with pytest.raises(POVMError):
            validate_povm([Operator(s, m), Operator(s, np.eye(2) - m)])

    def test_report_lists_everything(self):
        s = FockSpace(1, 1)
        v = check_povm([identity(s) * 1.5, identity(s) * -0.2])
        assert [x.axiom for x in v] == ["positivity", "completeness"]
        assert v[1].magnitude == pytest.approx(0.3)

    def test_mixed_spaces(self):
        with pytest.raises(DimensionMismatchError):
            validate_povm([identity(FockSpace(1, 1)), identity(FockSpace(1, 2))])

    def test_duplicate_labels(self):
        s = FockSpace(1, 1)
        with pytest.raises(ValueError):
            validate_povm([identity(s) * 0.5] * 2, labels=["x", "x"])


class TestProbabilities:
    def test_trivial(self):
        s = FockSpace(1, 3)
        rho = random_density_matrix(s, np.random.default_rng(1))
        assert_allclose(probabilities(validate_povm([identity(s)]), rho), [1.0])

    def test_vacuum_projector(self):
        s = FockSpace(1, 2)
        p0 = projector(s, (0,))
        povm = validate_povm([p0, identity(s) - p0])
        assert_allclose(probabilities(povm, p0), [1.0, 0.0], atol=1e-15)

    def test_detector_on_thermal(self):
        cutoff = 30
        s = FockSpace(1, cutoff)
        w = np.array([X_UNIT**n for n in range(cutoff + 1)])
        rho = Operator(s, np.diag(w / w.sum()))
        p = probabilities(detector_povm(s, 0.01).povm, rho)
        # oracle: alpha * sum n x^n / sum x^n, summed directly
        oracle = 0.01 * sum(n * x for n, x in enumerate(w)) / w.sum()
        assert p[0] == pytest.approx(oracle, abs=1e-15)
        assert p[0] == pytest.approx(0.01 / (math.e - 1), abs=1e-9)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            probabilities(validate_povm([identity(FockSpace(1, 1))]), maximally_mixed(FockSpace(1, 2)))

    def test_event_additivity(self, rng):
        s = ProductSpace((4,))
        povm = random_povm(s, 4, rng)
        rho = random_density_matrix(s, rng)
        merged = povm.coarse_grain({"ab": ["0", "1"], "c": ["2"], "d": ["3"]})
        p = probabilities(povm, rho)
        q = probabilities(merged, rho)
        assert q[0] == pytest.approx(p[0] + p[1], abs=1e-15)
        assert povm.effect(povm.outcomes).allclose(identity(s), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 6))
    def test_probabilities_normalized(self, seed, d, m):
        rng = np.random.default_rng(seed)
        s = ProductSpace((d,))
        p = probabilities(random_povm(s, m, rng), random_density_matrix(s, rng, rank=1))
        assert np.all(p >= 0)
        assert abs(p.sum() - 1) < 1e-10


class TestSpectral:
    def test_number_operator(self):
        s = FockSpace(1, 2)
        pvm, values = spectral_pvm(number_op(s))
        assert_allclose(values, [0, 1, 2], atol=1e-14)
        for k, p in enumerate(pvm.effects):
            assert p.allclose(projector(s, (k,)), atol=1e-12)

    def test_identity_single_outcome(self):
        s = FockSpace(2, 2)
        pvm, values = spectral_pvm(identity(s))
        assert len(pvm) == 1
        assert values[0] == pytest.approx(1)
        assert pvm.effects[0].allclose(identity(s), atol=1e-12)

    def test_degenerate_total_number(self):
        s = FockSpace(2, 2)
        pvm, values = spectral_pvm(number_op(s))
        assert_allclose(values, [0, 1, 2, 3, 4], atol=1e-12)
        assert [round(p.trace().real) for p in pvm.effects] == [1, 2, 3, 2, 1]

    def test_random_reconstruction(self, rng):
        a = random_hermitian(ProductSpace((8,)), rng)
        pvm, values = spectral_pvm(a)
        recon = sum(v * p.entries for v, p in zip(values, pvm.effects))
        assert np.max(np.abs(recon - a.entries)) < 1e-10
        validate_povm(pvm.effects)
        for i, p in enumerate(pvm.effects):
            assert p.is_projection()
            for q in pvm.effects[i + 1:]:
                assert np.max(np.abs(p.entries @ q.entries)) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            spectral_pvm(Operator(ProductSpace((2,)), [[0, 1], [0, 0]]))


class TestNeumark:
    def test_trivial(self):
        s = FockSpace(1, 2)
        dil = neumark_dilate(validate_povm([identity(s)]))
        assert_allclose(dil.isometry, np.eye(3), atol=0)
        assert dil.pvm.effects[0].allclose(identity(dil.dilation_space))

    def test_halves(self, rng):
        s = ProductSpace((2,))
        povm = validate_povm([identity(s) * 0.5, identity(s) * 0.5])
        dil = neumark_dilate(povm)
        assert dil.dilation_space.dims == (2, 2)
        assert_allclose(dil.probabilities(random_density_matrix(s, rng)), [0.5, 0.5], atol=1e-15)

    def test_pvm_is_projective(self, rng):
        dil = neumark_dilate(random_povm(ProductSpace((3,)), 4, rng))
        validate_povm(dil.pvm.effects)
        assert all(p.is_projection() for p in dil.pvm.effects)
        assert dil.isometry.shape == (12, 3)

    def test_rejects_non_positive(self):
        s = FockSpace(1, 1)
        from curvedqit.povm import POVM

        bad = POVM(s, ("a", "b"), (identity(s) * 1.2, identity(s) * -0.2))
        with pytest.raises(NotPositiveError):
            neumark_dilate(bad)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 6))
    def test_round_trip(self, seed, d, m):
        rng = np.random.default_rng(seed)
        s = ProductSpace((d,))
        povm = random_povm(s, m, rng)
        dil = neumark_dilate(povm)
        rho = random_density_matrix(s, rng)
        assert dil.isometry_residual() < 1e-12
        assert dil.compression_residual() < 1e-10
        assert np.max(np.abs(dil.probabilities(rho) - probabilities(povm, rho))) < 1e-10


class TestFrequencies:
    def test_deterministic_povm(self):
        s = FockSpace(1, 2)
        rep = simulate_frequencies(validate_povm([identity(s)]), maximally_mixed(s), 17, seed=3)
        assert rep.frequencies.tolist() == [1.0]
        assert rep.ok

    def test_balanced(self):
        s = FockSpace(1, 1)
        povm = validate_povm([projector(s, (0,)), projector(s, (1,))])
        plus = pure_state(s, ket(s, (0,)) + ket(s, (1,)))
        rep = simulate_frequencies(povm, plus, 100_000, seed=11)
        assert abs(rep.frequencies[0] - 0.5) < 5 * math.sqrt(0.25 / 1e5)
        assert rep.counts.sum() == 100_000
        assert rep.ok

    def test_reproducible(self):
        s = ProductSpace((2,))
        povm = validate_povm([Operator(s, np.diag([0.9, 0.9])), Operator(s, np.diag([0.1, 0.1]))])
        rho = maximally_mixed(s)
        r1 = simulate_frequencies(povm, rho, 10_000, seed=42)
        r2 = simulate_frequencies(povm, rho, 10_000, seed=42)
        assert np.array_equal(r1.counts, r2.counts)
        assert_allclose(r1.probabilities, [0.9, 0.1])

    def test_flags_violation(self):
        from curvedqit.povm import FrequencyReport

        rep = FrequencyReport(
            ("a", "b"), np.array([0.5, 0.5]), np.array([90, 10]), 100,
            np.array([0.9, 0.1]), 5 * np.sqrt(np.array([0.25, 0.25]) / 100),
        )
        assert rep.violated.tolist() == [True, True]
        assert not rep.ok

    def test_csv(self):
        s = FockSpace(1, 1)
        rep = simulate_frequencies(validate_povm([identity(s)]), maximally_mixed(s), 5, seed=0)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "label,p,count,w,epsilon,violated"
        assert lines[1] == "0,1,5,1,0,false"

    def test_rejects_zero_shots(self):
        s = FockSpace(1, 1)
        with pytest.raises(ValueError):
            simulate_frequencies(validate_povm([identity(s)]), maximally_mixed(s), 0)

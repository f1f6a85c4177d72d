import math

import numpy as np
import pytest

import cvsteer.sampler as sampler_mod
from cvsteer import (
    MeasurementSet,
    MeasurementSetting,
    SampleBatch,
    campaign_batches,
    canonical_settings,
    criteria_report,
    measure_campaign,
    reconstruct,
    sample_quadratures,
    sample_variance,
    samples_to_csv,
    vacuum_state,
)

X_DIFF = MeasurementSetting.joint(1.0, -1.0)
P_SUM = MeasurementSetting.joint(1.0, 1.0, math.pi / 2, math.pi / 2)


class TestSettings:
    def test_canonical_labels(self):
        labels = [s.label() for s in canonical_settings()]
        assert labels == ["x_a", "p_a", "x_b", "p_b", "x_a-x_b", "p_a+p_b"]

    def test_projection_vectors(self):
        np.testing.assert_allclose(X_DIFF.projection_vector(), [1, 0, -1, 0], atol=1e-15)
        np.testing.assert_allclose(P_SUM.projection_vector(), [0, 1, 0, 1], atol=1e-12)
        np.testing.assert_allclose(MeasurementSetting.single(1, 0.0).projection_vector(),
                                   [0, 0, 1, 0], atol=1e-15)

    def test_dark_factor_counts_detectors(self):
        assert MeasurementSetting.single(0).dark_factor() == 1.0
        assert X_DIFF.dark_factor() == 2.0
        assert MeasurementSetting.joint(0.5, -0.5).dark_factor() == 0.5

    def test_joint_needs_a_nonzero_coefficient(self):
        with pytest.raises(ValueError):
            MeasurementSetting.joint(0.0, 0.0)


class TestSampleQuadratures:
    def test_vacuum_variance_within_band(self):
        n = 10 ** 6
        batch = sample_quadratures(vacuum_state(2), MeasurementSetting.single(0), n, seed=1)
        assert sample_variance(batch) == pytest.approx(1.0, abs=0.01)

    def test_reference_joint_variance_within_band(self, ref_state):
        n = 10 ** 6
        batch = sample_quadratures(ref_state, X_DIFF, n, seed=2)
        sigma = 0.21 * math.sqrt(2.0 / n)
        assert abs(sample_variance(batch) - 0.21) <= 3.0 * sigma

    def test_fixed_seed_is_deterministic(self, ref_state):
        b1 = sample_quadratures(ref_state, P_SUM, 1000, seed=9, dark_noise=0.006)
        b2 = sample_quadratures(ref_state, P_SUM, 1000, seed=9, dark_noise=0.006)
        assert np.array_equal(b1.values, b2.values)
        b3 = sample_quadratures(ref_state, P_SUM, 1000, seed=10, dark_noise=0.006)
        assert not np.array_equal(b1.values, b3.values)

    def test_unphysical_state_rejected(self):
        import cvsteer.gaussian as g
        bad = object.__new__(g.CovarianceMatrix)
        object.__setattr__(bad, "n_modes", 2)
        object.__setattr__(bad, "entries", np.diag([0.2, 0.2, 1.0, 1.0]))
        with pytest.raises(ValueError, match="unphysical"):
            sample_quadratures(bad, X_DIFF, 100, seed=0)

    def test_needs_two_samples(self, ref_state):
        with pytest.raises(ValueError):
            sample_quadratures(ref_state, X_DIFF, 1, seed=0)

    def test_joint_equals_combined_marginals_at_same_seed(self, ref_state):
        # same seed -> same latent quadrature vectors, so the joint batch is
        # the sample-by-sample combination of the two single batches
        n = 20000
        xa = sample_quadratures(ref_state, MeasurementSetting.single(0), n, seed=5)
        xb = sample_quadratures(ref_state, MeasurementSetting.single(1), n, seed=5)
        joint = sample_quadratures(ref_state, X_DIFF, n, seed=5)
        np.testing.assert_allclose(joint.values, xa.values - xb.values,
                                   rtol=0, atol=1e-9)
        composed_var = np.var(xa.values - xb.values, ddof=1)
        assert sample_variance(joint) == pytest.approx(composed_var, rel=1e-9)


class TestSampleVariance:
    def test_constant_batch(self):
        b = SampleBatch(MeasurementSetting.single(0), np.array([2.0, 2.0, 2.0]), 0, 3)
        assert sample_variance(b) == 0.0

    def test_two_point_batch(self):
        b = SampleBatch(MeasurementSetting.single(0), np.array([-1.0, 1.0]), 0, 2)
        assert sample_variance(b) == pytest.approx(2.0, abs=1e-15)

    def test_batch_validation(self):
        with pytest.raises(ValueError):
            SampleBatch(MeasurementSetting.single(0), np.array([1.0]), 0, 1)
        with pytest.raises(ValueError):
            SampleBatch(MeasurementSetting.single(0), np.array([1.0, 2.0]), 0, 3)

    def test_estimator_consistency_over_seeds(self, ref_state):
        n = 10 ** 4
        bound = 5.0 * math.sqrt(2.0 / n)
        hits = 0
        for seed in range(100):
            batch = sample_quadratures(ref_state, MeasurementSetting.single(1, math.pi / 2),
                                       n, seed=seed)
            hits += abs(sample_variance(batch) / 35.49 - 1.0) <= bound
        assert hits >= 99


class TestMeasureCampaign:
    def test_relative_error_matches_five_percent_at_n800(self, ref_state):
        ms = measure_campaign(ref_state, 800, seed=0)
        assert ms.relative_error == pytest.approx(0.05, abs=1e-12)
        assert ms.metadata["seed"] == 0
        assert ms.metadata["n_per_setting"] == 800

    def test_determinism(self, ref_state):
        m1 = measure_campaign(ref_state, 5000, seed=77, dark_noise=0.006)
        m2 = measure_campaign(ref_state, 5000, seed=77, dark_noise=0.006)
        assert m1.values() == m2.values()

    def test_chunking_does_not_change_results(self, ref_state, monkeypatch):
        before = measure_campaign(ref_state, 50000, seed=13)
        monkeypatch.setattr(sampler_mod, "_CHUNK", 999)
        after = measure_campaign(ref_state, 50000, seed=13)
        np.testing.assert_allclose(after.values(), before.values(), rtol=1e-10)

    def test_large_campaign_reconstructs_entries(self, ref_state):
        ms = measure_campaign(ref_state, 10 ** 7, seed=3)
        back = reconstruct(ms)
        rel = np.abs(back.entries - ref_state.entries) / np.maximum(
            np.abs(ref_state.entries), 1e-12)
        nonzero = ref_state.entries != 0
        assert np.max(rel[nonzero]) <= 0.002

    def test_dark_noise_shifts_singles_not_covariances(self, ref_state):
        dark = 10 ** -2.2
        n = 10 ** 6
        clean = measure_campaign(ref_state, n, seed=21)
        noisy = measure_campaign(ref_state, n, seed=21, dark_noise=dark)
        # shared signal stream cancels in the difference, but the
        # signal-dark cross term leaves ~2 sigma_sig sigma_dark / sqrt(n)
        for name in ("var_xa", "var_pa", "var_xb", "var_pb"):
            shift = getattr(noisy, name) - getattr(clean, name)
            assert shift == pytest.approx(dark, abs=4e-3)
        cov_clean = reconstruct(clean).entries[0, 2]
        cov_noisy = reconstruct(noisy).entries[0, 2]
        assert cov_noisy == pytest.approx(cov_clean, abs=5e-3)

    def test_dark_noise_reid_shift_matches_analytic(self, ref_state):
        # adding diag dark noise d to the reference matrix moves the optimal
        # B|A product from 0.039208 to 0.044281; the sampled pipeline must
        # reproduce that +0.00507 shift
        dark = 10 ** -2.2
        n = 10 ** 6
        base = criteria_report(reconstruct(measure_campaign(ref_state, n, seed=0)))
        noisy = criteria_report(reconstruct(measure_campaign(ref_state, n, seed=0,
                                                             dark_noise=dark)))
        shift = noisy.reid_b_given_a - base.reid_b_given_a
        assert shift == pytest.approx(0.005073, abs=1.5e-3)

    def test_pipeline_closure_smoke(self, ref_state):
        ref = criteria_report(ref_state)
        for seed in (101, 202, 303):
            rep = criteria_report(reconstruct(measure_campaign(ref_state, 10 ** 6, seed)))
            assert rep.reid_b_given_a == pytest.approx(ref.reid_b_given_a, rel=0.01)
            assert rep.reid_a_given_b == pytest.approx(ref.reid_a_given_b, rel=0.01)
            assert rep.duan_sum == pytest.approx(ref.duan_sum, rel=0.01)


class TestCampaignBatches:
    def test_batch_variances_match_campaign(self, ref_state):
        n = 20000
        ms = measure_campaign(ref_state, n, seed=8, dark_noise=0.005)
        batches = campaign_batches(ref_state, n, seed=8, dark_noise=0.005)
        got = [sample_variance(b) for b in batches]
        np.testing.assert_allclose(got, ms.values(), rtol=1e-10)

    def test_csv_export_shape(self, ref_state):
        batches = campaign_batches(ref_state, 10, seed=0)
        text = samples_to_csv(batches)
        lines = text.strip().split("\n")
        assert lines[0] == "setting,value"
        assert len(lines) == 1 + 6 * 10
        assert lines[1].startswith("x_a,")
        value = float(lines[1].split(",")[1])
        assert math.isfinite(value)

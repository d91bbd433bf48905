import math

import numpy as np
import pytest
from scipy.stats import norm

from helpers import epsilon_for_factor, toeplitz_cover
from stegbound import (
    Codebook,
    CodebookTooLargeError,
    DegenerateCodebookError,
    DimensionMismatchError,
    GaussianModel,
    H0,
    H1,
    QuantizationSpec,
    build_codebook,
    decode,
    embed,
    lrt_decide,
    message_params,
    run_coding,
    run_detection,
    run_detector_comparison,
    sample,
    total_variation_1d,
)


def unit_cover(n):
    return GaussianModel(np.zeros(n), np.eye(n))


class TestLrtDecide:
    def test_cover_mean_favors_h0(self):
        cover = unit_cover(3)
        stego = GaussianModel(np.zeros(3), 2.0 * np.eye(3))
        assert lrt_decide(np.zeros(3), cover, stego) == H0

    def test_tie_breaks_to_h0(self):
        cover = unit_cover(2)
        assert lrt_decide([5.0, -3.0], cover, cover) == H0

    def test_scalar_threshold(self):
        # With variances (1, e) the log ratio crosses zero at
        # x^2 = e/(e-1) ~= 1.58198.
        cover = unit_cover(1)
        stego = GaussianModel([0.0], [[math.e]])
        for x in (1.26, -1.26):
            assert lrt_decide([x], cover, stego) == H1
        for x in (1.25, -1.25, 0.0):
            assert lrt_decide([x], cover, stego) == H0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lrt_decide([0.0, 0.0], unit_cover(1), unit_cover(1))


class TestRunDetection:
    def test_zero_budget_trivial(self):
        report = run_detection(unit_cover(4), 0.0, 1000, 3)
        assert report.p_e == 1.0
        assert report.p_E == 0.5
        assert report.alpha == 0.0 and report.beta == 1.0
        assert report.trials == 0 and report.mc_stderr == 0.0

    def test_deterministic_per_seed(self):
        cover = unit_cover(2)
        a = run_detection(cover, 0.4, 5000, 11)
        b = run_detection(cover, 0.4, 5000, 11)
        c = run_detection(cover, 0.4, 5000, 12)
        assert a == b
        assert a != c

    def test_batch_partition_fixed_counts(self):
        # Identical (seed, trials, batch_size) must reproduce; a different
        # partition may legitimately differ.
        cover = unit_cover(2)
        a = run_detection(cover, 0.4, 5000, 11, batch_size=512)
        b = run_detection(cover, 0.4, 5000, 11, batch_size=512)
        assert a == b

    def test_scalar_euler_error_rate(self):
        report = run_detection(unit_cover(1), math.sqrt(math.e - 2.0) / 2.0, 100_000, 7)
        assert 0.75 <= report.p_e <= 0.78
        assert report.p_e >= report.p_e_floor - 3.0 * report.mc_stderr

    def test_one_dim_consistency_with_quadrature(self):
        epsilon = epsilon_for_factor(math.e, 1)
        report = run_detection(unit_cover(1), epsilon, 100_000, 19)
        expected = 1.0 - total_variation_1d(1.0, math.e)
        assert abs(report.p_e - expected) <= 3.0 * report.mc_stderr

    def test_floor_respected_on_grid(self):
        for n in (1, 4, 16):
            for a in (1.2, math.e):
                epsilon = epsilon_for_factor(a, n)
                report = run_detection(toeplitz_cover(n), epsilon, 20_000, 5)
                assert report.p_e >= report.p_e_floor - 3.0 * report.mc_stderr
                assert report.kl_theoretical == pytest.approx(2.0 * epsilon**2, rel=1e-12)

    def test_quantization_probe(self):
        epsilon = epsilon_for_factor(math.e, 1)
        spec = QuantizationSpec(bits=6, step=0.25, origin=-8.0)
        continuous = run_detection(unit_cover(1), epsilon, 50_000, 23)
        quantized = run_detection(unit_cover(1), epsilon, 50_000, 23, quantization=spec)
        # Quantized observations cannot make optimal detection easier.
        combined = 3.0 * math.hypot(continuous.mc_stderr, quantized.mc_stderr)
        assert quantized.p_e >= continuous.p_e - combined

    def test_rejects_bad_trials(self):
        with pytest.raises(ValueError):
            run_detection(unit_cover(1), 0.1, 0, 1)


class TestDetectorComparison:
    def test_energy_matches_lrt_for_isotropic_scalar(self):
        epsilon = epsilon_for_factor(math.e, 1)
        lrt, energy = run_detector_comparison(unit_cover(1), epsilon, 20_000, 2)
        assert lrt.alpha == energy.alpha and lrt.beta == energy.beta
        assert energy.detector == "energy"

    def test_lrt_dominates_on_correlated_cover(self):
        cover = toeplitz_cover(8, rho=0.7)
        epsilon = epsilon_for_factor(1.5, 8)
        lrt, energy = run_detector_comparison(cover, epsilon, 30_000, 91)
        combined = math.hypot(lrt.mc_stderr, energy.mc_stderr)
        assert lrt.p_e <= energy.p_e + 3.0 * combined


class TestTotalVariation:
    def test_identity_factor(self):
        assert total_variation_1d(1.0, 1.0) == 0.0

    def test_euler_factor_value(self):
        assert total_variation_1d(1.0, math.e) == pytest.approx(0.2370623619, abs=1e-9)

    def test_matches_gaussian_tail_closed_form(self):
        for var, a in ((1.0, math.e), (4.0, 1.5), (0.25, 9.0)):
            x_star = math.sqrt(var * a * math.log(a) / (a - 1.0))
            closed = 2.0 * (
                norm.cdf(x_star / math.sqrt(var)) - norm.cdf(x_star / math.sqrt(a * var))
            )
            assert total_variation_1d(var, a) == pytest.approx(closed, rel=1e-9)

    def test_bounded_by_kl_pinsker_form(self):
        for a in (1.2, math.e, 5.0):
            divergence = 0.5 * (a - math.log(a) - 1.0)
            assert total_variation_1d(1.0, a) <= math.sqrt(divergence / 2.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            total_variation_1d(0.0, 2.0)
        with pytest.raises(ValueError):
            total_variation_1d(1.0, 0.5)


class TestCodebook:
    def test_zero_rate_single_codeword(self):
        message = message_params(unit_cover(4), 0.5)
        book = build_codebook(4, 0.0, message, 1)
        assert book.size == 1

    def test_size_from_rate(self):
        message = message_params(unit_cover(8), 1.0)
        book = build_codebook(8, math.log(2.0), message, 1)
        assert book.size == 256
        assert book.n == 8

    def test_degenerate_message_rejected(self):
        message = message_params(unit_cover(4), 0.0)
        with pytest.raises(DegenerateCodebookError):
            build_codebook(4, 0.5, message, 1)
        # Zero rate is fine: the single all-zero codeword is decodable.
        assert build_codebook(4, 0.0, message, 1).size == 1

    def test_size_cap(self):
        message = message_params(unit_cover(8), 1.0)
        with pytest.raises(CodebookTooLargeError):
            build_codebook(8, 3.0, message, 1, max_codewords=1000)

    def test_unrepresentable_rate(self):
        message = message_params(unit_cover(8), 1.0)
        with pytest.raises(CodebookTooLargeError):
            build_codebook(8, 100.0, message, 1)


class TestEmbedDecode:
    def test_zero_codeword_identity(self):
        cover = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(embed(cover, np.zeros(3)), cover)

    def test_componentwise_sum(self):
        assert np.array_equal(embed([1.0, 2.0], [0.5, -0.5]), [1.5, 1.5])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            embed([1.0], [1.0, 2.0])

    def test_stego_covariance_converges(self):
        cov = np.array([[2.0, 0.6], [0.6, 1.0]])
        cover = GaussianModel([1.0, -2.0], cov)
        epsilon = epsilon_for_factor(1.8, 2)
        message = message_params(cover, epsilon)
        trials = 100_000
        stegos = sample(cover, trials, 31) + sample(message, trials, 32)
        observed = np.cov(stegos.T)
        target = 1.8 * cov
        stderr = np.sqrt(
            (np.outer(np.diag(target), np.diag(target)) + target**2) / trials
        )
        assert np.all(np.abs(observed - target) <= 5.0 * stderr)

    def test_single_codeword_decodes_to_zero(self):
        cover = unit_cover(3)
        book = Codebook(codewords=np.zeros((1, 3)), rate_nats_per_element=0.0, seed=0)
        assert decode([4.0, -1.0, 0.5], book, cover) == 0

    def test_noiseless_decode_recovers_index(self):
        cover = GaussianModel([5.0, 5.0], np.eye(2))
        message = message_params(cover, 1.0)
        book = build_codebook(2, 0.8, message, 3)
        for j in (0, book.size // 2, book.size - 1):
            stego = cover.mean + book.codewords[j]
            assert decode(stego, book, cover) == j

    def test_tie_breaks_to_lowest_index(self):
        cover = unit_cover(2)
        duplicated = Codebook(
            codewords=np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]]),
            rate_nats_per_element=0.5,
            seed=0,
        )
        assert decode([1.0, 1.0], duplicated, cover) == 0


class TestRunCoding:
    def test_zero_fraction_never_errs(self):
        cover = unit_cover(8)
        (report,) = run_coding(cover, 1.0, [0.0], 50, 1)
        assert report.p_B == 0.0
        assert report.K == 1

    def test_deterministic_per_seed(self):
        cover = unit_cover(16)
        a = run_coding(cover, 1.5, [0.2, 0.6], 100, 77)
        b = run_coding(cover, 1.5, [0.2, 0.6], 100, 77)
        assert a == b

    def test_error_rate_grows_with_rate(self):
        cover = unit_cover(32)
        epsilon = epsilon_for_factor(math.e, 32)
        low, high = run_coding(cover, epsilon, [0.2, 1.5], 200, 20240601)
        assert low.method == "exact" and high.method == "analytic-min"
        assert low.p_B < high.p_B
        assert high.p_B > 0.8

    def test_error_rate_shrinks_with_dimension(self):
        epsilon16 = epsilon_for_factor(math.e, 16)
        epsilon256 = epsilon_for_factor(math.e, 256)
        (small,) = run_coding(unit_cover(16), epsilon16, [0.2], 300, 20240601)
        (large,) = run_coding(unit_cover(256), epsilon256, [0.2], 300, 20240601)
        combined = math.hypot(small.stderr, large.stderr)
        assert large.p_B <= small.p_B + 3.0 * combined

    def test_rate_fraction_reported(self):
        cover = unit_cover(8)
        reports = run_coding(cover, 1.0, [0.3, 0.7], 10, 5)
        assert [r.rate_fraction for r in reports] == [0.3, 0.7]

    def test_rejects_negative_fraction(self):
        with pytest.raises(ValueError):
            run_coding(unit_cover(4), 1.0, [-0.5], 10, 1)

    def test_zero_budget_zero_rate(self):
        # epsilon = 0 collapses every fraction to K = 1.
        reports = run_coding(unit_cover(4), 0.0, [0.2, 1.5], 10, 1)
        assert all(r.K == 1 and r.p_B == 0.0 for r in reports)

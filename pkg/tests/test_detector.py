import itertools
import math

import numpy as np
import pytest

from heraldstats import ClickDetectorArray, Truncation, povm_diagonal, povm_weight


def occupancy_probability(num_detectors, efficiency, clicks, photons):
    """Exhaustive oracle: each photon survives with probability `efficiency`
    and lands in a uniformly random detector; count occupied detectors."""
    total = 0.0
    for survival in itertools.product((0, 1), repeat=photons):
        p_surv = math.prod(
            efficiency if s else 1.0 - efficiency for s in survival
        )
        survivors = sum(survival)
        for bins in itertools.product(range(num_detectors), repeat=survivors):
            if len(set(bins)) == clicks:
                total += p_surv / num_detectors**survivors
    return total


class TestPovmWeight:
    def test_no_clicks_no_dark_counts(self):
        det = ClickDetectorArray(efficiency=0.37, num_detectors=4, dark_count_prob=0.0)
        for n in (0, 1, 5, 20):
            assert povm_weight(det, 0, n) == pytest.approx((1 - 0.37) ** n, rel=1e-14)

    def test_blind_detector_never_clicks(self):
        det = ClickDetectorArray(efficiency=0.0, num_detectors=4, dark_count_prob=0.0)
        for k in (1, 2, 3, 4):
            for n in (0, 1, 7):
                assert povm_weight(det, k, n) == 0.0

    def test_two_photons_one_click_perfect_detectors(self):
        # oracle: 2 photons land in the same one of 4 detectors in 4 of 16 ways
        det = ClickDetectorArray(efficiency=1.0, num_detectors=4, dark_count_prob=0.0)
        assert occupancy_probability(4, 1.0, 1, 2) == pytest.approx(0.25, abs=1e-15)
        assert povm_weight(det, 1, 2) == pytest.approx(0.25, abs=1e-12)

    def test_two_photons_two_clicks_half_efficiency(self):
        det = ClickDetectorArray(efficiency=0.5, num_detectors=4, dark_count_prob=0.0)
        expected = occupancy_probability(4, 0.5, 2, 2)
        assert expected == pytest.approx(0.1875, abs=1e-15)
        assert povm_weight(det, 2, 2) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("efficiency", [0.3, 0.8])
    @pytest.mark.parametrize("clicks", [0, 1, 2, 3, 4])
    def test_enumeration_oracle_grid(self, efficiency, clicks):
        det = ClickDetectorArray(efficiency=efficiency, num_detectors=4, dark_count_prob=0.0)
        for photons in range(5):
            expected = occupancy_probability(4, efficiency, clicks, photons)
            assert povm_weight(det, clicks, photons) == pytest.approx(expected, abs=1e-12)

    def test_single_detector_complement(self):
        det = ClickDetectorArray(efficiency=0.42, num_detectors=1, dark_count_prob=0.0)
        for n in (0, 1, 3, 9):
            assert povm_weight(det, 1, n) == pytest.approx(1 - (1 - 0.42) ** n, rel=1e-13)

    def test_dark_click_law_on_vacuum(self):
        # with no photons, each detector clicks independently with 1 - exp(-nu/N)
        for nu in (1e-5, 5e-4, 0.01, 0.5):
            det = ClickDetectorArray(efficiency=0.6, num_detectors=4, dark_count_prob=nu)
            p_click = 1.0 - math.exp(-nu / 4)
            for k in range(5):
                binomial = math.comb(4, k) * p_click**k * (1 - p_click) ** (4 - k)
                assert povm_weight(det, k, 0) == pytest.approx(binomial, abs=1e-12)

    def test_click_count_domain(self):
        det = ClickDetectorArray(efficiency=0.5, num_detectors=4)
        with pytest.raises(ValueError):
            povm_weight(det, 5, 1)
        with pytest.raises(ValueError):
            povm_weight(det, -1, 1)
        with pytest.raises(ValueError):
            povm_weight(det, 0, -1)


class TestPovmProperties:
    MU_GRID = (0.0, 0.3, 0.6, 1.0)
    NU_GRID = (0.0, 5e-4, 0.01)

    def test_completeness(self):
        for mu, nu in itertools.product(self.MU_GRID, self.NU_GRID):
            det = ClickDetectorArray(efficiency=mu, num_detectors=4, dark_count_prob=nu)
            trunc = Truncation.fixed(200)
            total = sum(povm_diagonal(det, k, trunc).weights for k in range(5))
            np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_range_bounds(self):
        for mu, nu in itertools.product(self.MU_GRID, self.NU_GRID):
            det = ClickDetectorArray(efficiency=mu, num_detectors=4, dark_count_prob=nu)
            for k in range(5):
                for n in (0, 1, 2, 5, 50, 200):
                    w = povm_weight(det, k, n)
                    assert -1e-12 <= w <= 1 + 1e-12

    def test_diagonal_matches_scalar(self):
        det = ClickDetectorArray(efficiency=0.6, num_detectors=4, dark_count_prob=5e-4)
        diag = povm_diagonal(det, 2, Truncation.fixed(30))
        for n in range(31):
            assert diag.weights[n] == pytest.approx(povm_weight(det, 2, n), abs=1e-13)

    def test_diagonal_needs_concrete_cutoff(self):
        det = ClickDetectorArray(efficiency=0.6)
        with pytest.raises(ValueError):
            povm_diagonal(det, 1, Truncation.adaptive())


class TestClickDetectorArray:
    def test_validation(self):
        with pytest.raises(ValueError):
            ClickDetectorArray(efficiency=1.2)
        with pytest.raises(ValueError):
            ClickDetectorArray(efficiency=-0.1)
        with pytest.raises(ValueError):
            ClickDetectorArray(efficiency=0.5, num_detectors=0)
        with pytest.raises(ValueError):
            ClickDetectorArray(efficiency=0.5, dark_count_prob=-1e-3)

    def test_defaults(self):
        det = ClickDetectorArray(efficiency=0.5)
        assert det.num_detectors == 4
        assert det.dark_count_prob == 5e-4

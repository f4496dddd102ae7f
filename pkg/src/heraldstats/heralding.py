"""Conditioning the signal beam on a k-click outcome in the idler arm.

Because both the reduced twin-beam state and the click measurement are
diagonal in photon number, the heralded signal state is fully described by
its photon-number distribution

    p_n  propto  w_n(k) * P_n(nbar),

and the normalization sum is exactly the per-pulse probability of the
heralding outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import ClickDetectorArray, povm_diagonal
from .fock import (
    DEFAULT_TRUNCATION,
    PhotonStatistics,
    Truncation,
    TwinBeamSource,
    thermal_distribution,
)

__all__ = [
    "ImpossibleHeraldError",
    "HeraldConfig",
    "HeraldedState",
    "herald",
    "success_probability",
]


class ImpossibleHeraldError(ValueError):
    """The requested click outcome has zero probability; no state to normalize."""


@dataclass(frozen=True)
class HeraldConfig:
    """One heralding arrangement: source, detector array, click count, cutoff."""

    source: TwinBeamSource
    detector: ClickDetectorArray
    clicks: int
    trunc: Truncation = DEFAULT_TRUNCATION

    def __post_init__(self):
        if not 0 <= self.clicks <= self.detector.num_detectors:
            raise ValueError(
                f"click count {self.clicks} outside 0..{self.detector.num_detectors}"
            )


class HeraldedState:
    """Lossless heralded signal statistics plus the herald success probability."""

    __slots__ = ("statistics", "success_probability", "config")

    def __init__(
        self, statistics: PhotonStatistics, success_probability: float, config: HeraldConfig
    ):
        if not 0.0 <= success_probability <= 1.0:
            raise ValueError(f"success probability {success_probability!r} outside [0, 1]")
        self.statistics = statistics
        self.success_probability = success_probability
        self.config = config

    def __repr__(self) -> str:
        return (
            f"HeraldedState(clicks={self.config.clicks}, "
            f"success_probability={self.success_probability:.6g})"
        )


def _unnormalized(config: HeraldConfig) -> np.ndarray:
    # The cutoff authority is the source distribution; the click weights are
    # evaluated pointwise to the same n_max.
    thermal = thermal_distribution(config.source, config.trunc)
    outcome = povm_diagonal(
        config.detector, config.clicks, Truncation.fixed(thermal.n_max)
    )
    return outcome.weights * thermal.probabilities


def herald(config: HeraldConfig) -> HeraldedState:
    """Heralded signal statistics for a k-click outcome.

    Raises :class:`ImpossibleHeraldError` when the outcome has zero
    probability (for example a click demanded from a dark-count-free
    detector seeing vacuum), rather than returning NaNs.
    """
    unnormalized = _unnormalized(config)
    total = float(unnormalized.sum())
    if total <= 0.0:
        raise ImpossibleHeraldError(
            f"herald outcome clicks={config.clicks} has zero probability for "
            f"nbar={config.source.mean_photon_number!r}, "
            f"efficiency={config.detector.efficiency!r}, "
            f"dark_count_prob={config.detector.dark_count_prob!r}"
        )
    statistics = PhotonStatistics.from_unnormalized(unnormalized)
    return HeraldedState(statistics, min(total, 1.0), config)


def success_probability(config: HeraldConfig) -> float:
    """Per-pulse probability of the heralding outcome.

    Cheap standalone version of :func:`herald` that skips normalization and
    returns 0 for impossible heralds.  Structurally independent of the
    signal-arm efficiency: no such parameter exists here.
    """
    total = float(_unnormalized(config).sum())
    return min(max(total, 0.0), 1.0)

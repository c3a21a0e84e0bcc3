"""Adaptive, edge-aware measurement noise for feature observations.

A feature's noise scale grows with the inverse of its predictor confidence
and is multiplied by a penalty factor when the pixel sits within a margin of
the image boundary, where the robust tracking head tends to park features
that have actually left the field of view. The same sigma feeds frontend
pose estimation and backend bundle adjustment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfidenceError, InvalidObservationError


class TrackSource(enum.Enum):
    PRIMARY = "primary-tracker"
    ROBUST = "robust-tracker"


@dataclass(frozen=True)
class NoiseConfig:
    """Noise model parameters; distances and sigmas are in pixels."""

    width: int
    height: int
    sigma_b: float = 1.0
    k_p: float = 10.0
    delta: float = 20.0

    def __post_init__(self):
        if self.sigma_b <= 0:
            raise ValueError("sigma_b must be positive")
        if self.k_p < 1:
            raise ValueError("k_p must be >= 1")
        if not (0 <= self.delta < min(self.width, self.height) / 2):
            raise ValueError("delta must satisfy 0 <= delta < min(width, height)/2")


def boundary_distance(pixel, config: NoiseConfig) -> float:
    """Minimum pixel distance to any of the four image edges."""
    x, y = float(pixel[0]), float(pixel[1])
    return min(x, y, config.width - x, config.height - y)


def edge_penalty(pixel, config: NoiseConfig) -> float:
    """k_p within the boundary margin, 1 otherwise (strict `< delta`)."""
    d = boundary_distance(pixel, config)
    if d < 0:
        raise InvalidObservationError(f"pixel {tuple(pixel)} outside image bounds")
    return config.k_p if d < config.delta else 1.0


def adaptive_sigma(u: float, pixel, config: NoiseConfig) -> float:
    """Noise scale sigma = (1/u) * sigma_b * edge_penalty(pixel)."""
    if not (0.0 < u <= 1.0):
        raise InvalidConfidenceError(f"confidence {u} outside (0, 1]")
    return (1.0 / u) * config.sigma_b * edge_penalty(pixel, config)


def observation_covariance(sigma: float) -> np.ndarray:
    """Isotropic 2x2 pixel covariance diag(sigma^2, sigma^2)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return np.diag([sigma * sigma, sigma * sigma])


@dataclass(frozen=True)
class Observation:
    """One 2D feature measurement with its derived noise scale.

    Primary-tracker features carry confidence 1: the confidence term models
    the dense predictor's self-assessment, which the classical tracker lacks.
    """

    pixel: np.ndarray
    confidence: float
    source: TrackSource
    sigma: float = field(default=0.0)

    @staticmethod
    def make(pixel, confidence: float, source: TrackSource, config: NoiseConfig) -> "Observation":
        pixel = np.asarray(pixel, dtype=float)
        if source is TrackSource.PRIMARY and confidence != 1.0:
            raise InvalidObservationError(
                "primary-tracker observations must carry confidence 1"
            )
        sigma = adaptive_sigma(confidence, pixel, config)
        return Observation(pixel, confidence, source, sigma)

    def covariance(self) -> np.ndarray:
        return observation_covariance(self.sigma)

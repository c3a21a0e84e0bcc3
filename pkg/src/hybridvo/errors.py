"""Exception types raised by the estimation engine."""


class HybridVoError(Exception):
    """Base class for all package-specific errors."""


class BehindCameraError(HybridVoError):
    """Point has non-positive depth in the camera frame."""


class InsufficientParallaxError(HybridVoError):
    """Triangulation rays are too close to parallel."""


class DegenerateConfigurationError(HybridVoError):
    """Point configuration is rank deficient (coincident or collinear)."""


class CorrespondenceError(HybridVoError):
    """Two trajectory segments do not cover the same keyframe ids."""


class EmptyAssociationError(HybridVoError):
    """No timestamp pairs could be associated between two trajectories."""


class InvalidObservationError(HybridVoError):
    """Observation violates its construction invariants (e.g. pixel out of bounds)."""


class InvalidConfidenceError(HybridVoError):
    """Confidence value outside (0, 1]."""


class InsufficientDataError(HybridVoError):
    """Fewer correspondences than the minimal solver requires."""


class ConsensusFailureError(HybridVoError):
    """RANSAC found no hypothesis with enough inliers."""


class RefinementFailureError(HybridVoError):
    """Iterative pose refinement diverged; caller should keep its initial value."""


class SolverFailureError(HybridVoError):
    """Nonlinear solve failed (rank-deficient or indefinite normal equations)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StructureError(HybridVoError):
    """Factor problem construction received structurally invalid inputs."""


class InvalidScaleError(HybridVoError):
    """Scale value must be strictly positive."""


class ScenarioError(HybridVoError):
    """Scenario or pipeline configuration is invalid."""

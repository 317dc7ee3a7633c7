"""Exception types shared across the package."""


class SplitGasError(Exception):
    """Base class for all package errors."""


class ConfigError(SplitGasError):
    """Invalid physical configuration or scenario file."""


class ConvergenceError(SplitGasError):
    """A numerical procedure did not converge to the requested tolerance."""


class DetectionError(SplitGasError):
    """A feature-detection step (front, recurrence) found nothing."""

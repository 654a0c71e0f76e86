"""Exception types shared across the package."""


class AchievementError(ValueError):
    """Base class for invalid-input errors (mapped to exit code 2 by the CLI)."""


class DomainError(AchievementError):
    """An argument lies outside the domain where the quantity is defined."""


class CapExceededError(AchievementError):
    """A size cap (depth, alphabet length) would be exceeded."""


class HypothesisViolation(AchievementError):
    """The inputs do not satisfy the hypothesis of the requested construction."""

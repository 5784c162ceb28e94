"""Exception types shared across the package."""


class PhysicsRejection(ValueError):
    """Input is well-formed but violates a physical constraint."""


class EhrenfestViolation(PhysicsRejection):
    """Screen moments break the mean-dynamics consistency condition (xi != 0)."""


class UnphysicalCovariance(PhysicsRejection):
    """Covariance matrix violates the uncertainty principle."""

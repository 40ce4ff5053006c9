"""Exception taxonomy.

Every physics failure carries a stable ``kind`` string so that the CLI can
emit machine-readable error records.
"""


class MetasurfError(Exception):
    kind = "error"


class DomainError(MetasurfError, ValueError):
    kind = "domain_error"


class WoodAnomaly(MetasurfError, ArithmeticError):
    """A diffraction order grazes the surface (some beta_n == 0)."""

    kind = "wood_anomaly"

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class ConvergenceFailure(MetasurfError, ArithmeticError):
    """An accelerated series did not reach its tolerance.

    The best available estimate is kept on ``best`` together with its
    error estimate.
    """

    kind = "convergence_failure"

    def __init__(self, message, best=None, error=None, terms=None):
        super().__init__(message)
        self.best = best
        self.error = error
        self.terms = terms


class LatticeResonance(MetasurfError, ArithmeticError):
    """The multiple-scattering system (1 - S Sigma) is (nearly) singular."""

    kind = "lattice_resonance"


class DegenerateJump(MetasurfError, ArithmeticError):
    kind = "degenerate_jump"


class RegimeError(MetasurfError, ValueError):
    kind = "regime_error"


class LatticePointError(DomainError):
    """Evaluation point coincides with a scatterer position."""

    kind = "lattice_point"


class RegimeWarning(UserWarning):
    """An asymptotic formula is used outside its validity regime."""

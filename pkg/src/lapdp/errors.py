"""Exception hierarchy shared across the package."""


class LapDPError(ValueError):
    """Base class for all library errors."""


class DegenerateParameterError(LapDPError):
    """A mechanism parameter sits on a degenerate boundary (e.g. kappa <= 0)."""


class SingularOrderError(LapDPError):
    """A Rényi order hits a singular value (q = 0 or q = 1)."""


class DivergenceError(LapDPError):
    """A transform or moment does not converge at the requested point."""


class EmptyROCError(DivergenceError):
    """No order converges: the pair is absolutely continuous in neither direction."""


class NonConvergenceError(LapDPError):
    """A numerical inversion failed to reach its tolerance."""


class ReconstructionError(LapDPError):
    """A privacy loss kernel does not reproduce the profile it was built from."""


class BookOverflowError(LapDPError):
    """The atom book of a composition exceeded its configured cap."""


class NoCrossingError(LapDPError):
    """The requested delta budget is not attained inside the search bracket."""


class GridMismatchError(LapDPError):
    """Two gridded distributions live on incompatible lattices."""


class SupportOverflowError(LapDPError):
    """An explicit product distribution would exceed the support cap."""


class InvalidPLDError(LapDPError):
    """A privacy loss distribution violates its invariants."""


class ImaginaryResidueWarning(RuntimeWarning):
    """An inverse transform left a non-negligible imaginary part."""


class SpecError(LapDPError):
    """A composition spec is malformed or has out-of-range parameters."""


class InapplicableMethodError(LapDPError):
    """The requested method cannot handle the given spec."""

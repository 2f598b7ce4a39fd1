"""Exception taxonomy shared across the package.

Every failure mode that callers are expected to handle gets its own class so
tests (and the CLI exit-code mapping) can discriminate without string matching.
"""


class LdgError(Exception):
    """Base class for all package-specific errors."""


# --- tensor algebra ---------------------------------------------------------

class ZeroTensor(LdgError):
    """Operation undefined on the zero tensor (|Q| below threshold)."""


class NotUnitNorm(LdgError):
    """Input tensor required to lie on the unit sphere of S0."""


class NotUnitVector(LdgError):
    """Director must be a unit 3-vector."""


class NonPositiveParam(LdgError):
    """Material parameters must be strictly positive."""


class NumericalOvershoot(LdgError):
    """A quantity left its mathematically guaranteed range by more than the
    clamping tolerance; indicates corrupted input rather than roundoff."""


# --- harmonic-sphere catalog ------------------------------------------------

class InvalidSpec(LdgError):
    """Malformed sphere-catalog entry (zero parameter, bad degree, ...)."""


class BothZero(LdgError):
    """Homogeneous coordinate pair [z0, z1] = [0, 0] is not a point."""


class ZeroVector(LdgError):
    """Projective point needs a nonzero representative."""


class QuadratureUnderResolved(LdgError):
    """Successive quadrature refinements failed to settle within tolerance."""


class PoleProximity(LdgError):
    """Finite-difference stencil would cross a coordinate pole."""


class DegenerateJet(LdgError):
    """All four lift derivative entries vanished; no twistor lift there."""


# --- second variation -------------------------------------------------------

class OriginEvaluation(LdgError):
    """Tangent maps are 0-homogeneous and have no value at the origin."""


class SupportOverflow(LdgError):
    """Test field support sticks out of the quadrature domain."""


# --- solver -----------------------------------------------------------------

class NormViolation(LdgError):
    """Hard-constraint field has a node off the unit sphere."""


class Diverged(LdgError):
    """Line search collapsed / energy blew up; descent cannot continue."""


class BadBoundary(LdgError):
    """Boundary trace incompatible with the grid or not unit norm."""


class Unconverged(LdgError):
    """Diagnostic requested on a run that did not reach its gradient tolerance."""


class BallOutsideDomain(LdgError):
    """Monotonicity ball is not contained in the computational domain."""


class TooCloseToBoundary(LdgError):
    """Tangent-map fit annulus touches the domain boundary."""


# --- boundary data ----------------------------------------------------------

class BadEndpoints(LdgError):
    """Angle function must map both poles into {0, pi}."""


# --- topology ---------------------------------------------------------------

class SingularValue(LdgError):
    """Level value failed the regular-value screening."""


class EmptyLevel(LdgError):
    """Level set is empty on the sampled grid."""


class MissingRing(LdgError):
    """Linking check requires a detected biaxial ring."""


class MissingArtifacts(LdgError):
    """Analysis input directory lacks the required solver artifacts."""


# --- cli --------------------------------------------------------------------

class ConfigError(LdgError):
    """Config file failed schema validation; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line

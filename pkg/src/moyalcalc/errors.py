"""Exception types shared across the calculus engine."""


class CalcError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(CalcError):
    """Operands live on phase spaces of different dimension."""


class TruncationError(CalcError):
    """A coefficient beyond the stored truncation order was requested."""


class EllipticityError(CalcError):
    """Principal symbol fails the ellipticity floor on the working region."""


class RegionError(CalcError):
    """Region is unusable for the requested operation (e.g. not simply
    connected where one-form integration requires it)."""


class ConventionError(CalcError):
    """Quantization convention cannot be realized, e.g. cat-map parity
    obstruction at the given grid size."""


class PartitionError(CalcError):
    """Cutoff family fails to sum to one on the designated region."""


class OracleError(CalcError):
    """Isomorphism oracle violates an audited contract (order preservation,
    multiplicativity, route cross-check)."""


class NotADerivationError(OracleError):
    """Level data extracted from the oracle fails the derivation identities
    or the closedness relations."""


class IdealClassificationError(CalcError):
    """Ideal classification could not certify either class at the requested
    tolerances."""


class ConfigError(CalcError):
    """CLI configuration file is missing, malformed, or inconsistent."""

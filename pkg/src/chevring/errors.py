"""Exceptions shared across the package.

The CLI maps these to exit codes: verification failures exit 1,
configuration problems exit 2, exceeded enumeration caps exit 3.
"""


class ChevringError(Exception):
    """Base class for every error raised by this package."""


class NilpotentDenominator(ChevringError):
    """Localisation at a nilpotent element would produce the zero ring."""


class NotUnitIdeal(ChevringError):
    """The given powers do not generate the unit ideal, so no partition of 1 exists."""


class AmbientMismatch(ChevringError):
    """Two ideals (or an ideal and an element) live in different rings."""


class UnsupportedLacing(ChevringError):
    """The requested certificate needs rewriting identities that only exist
    for simply-laced systems; doubly and triply laced inputs are rejected."""


class UnsupportedRank(ChevringError):
    """Requested root system is outside the supported type/rank table."""


class OppositeOrEqual(ChevringError):
    """Root chains and commutator data need alpha != +-beta."""


class CapExceeded(ChevringError):
    """An enumeration grew past the configured cap."""


class VerificationFailed(ChevringError):
    """A brute-force check contradicted the claim it was asked to verify."""


class RelationFailure(VerificationFailed):
    """A defining relation failed on a concrete instance; carries the witness."""


class BudgetTooSmall(ChevringError):
    """Requested divisibility levels cannot be met with the given exponent budget."""

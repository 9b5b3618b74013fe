"""Exception hierarchy shared by every latticeforge module.

Two intermediate classes group the errors by how the CLI reports them:
InputError and ResourceError both end with exit code 2, every other
LatticeForgeError is a mathematical precondition failure.
"""

from typing import Any, Optional


class LatticeForgeError(Exception):
    """Base exception for latticeforge errors."""


class InputError(LatticeForgeError):
    """Raised when user-supplied data cannot be turned into a valid object."""


class ResourceError(LatticeForgeError):
    """Raised when an operation would exceed a configured limit."""


class NotAPosetError(InputError):
    """Raised when an order relation is not antisymmetric."""

    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class NotALatticeError(InputError):
    """Raised when some pair of elements lacks a unique meet or join."""

    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class ParseError(InputError):
    """Raised when a lattice, measure, identity or term text is malformed."""


class BadParamsError(InputError):
    """Raised when command parameters are inconsistent or out of range."""


class SizeLimitError(ResourceError):
    """Raised when a structure would be larger than the configured guard."""


class BudgetExceededError(ResourceError):
    """Raised when an exhaustive scan would exceed its evaluation budget."""


class NotJoinIrreducibleError(LatticeForgeError):
    """Raised when an operation needs a join-irreducible element."""


class NotACongruenceError(LatticeForgeError):
    """Raised when a partition is not compatible with meet and join."""

    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class TrivialLatticeError(LatticeForgeError):
    """Raised for the one-element lattice where a nontrivial one is needed."""


class BadIntervalError(LatticeForgeError):
    """Raised when an interval [a, b] has a not below b."""


class NotClopenError(LatticeForgeError):
    """Raised when a pair set is not both transitive and co-transitive."""


class NotInFnError(LatticeForgeError):
    """Raised when (a, b, U) does not index a join-irreducible of P(n)."""


class NotInTamariError(LatticeForgeError):
    """Raised when a pair set is not an element of the Tamari lattice."""


class NotABracketFunctionError(LatticeForgeError):
    """Raised when a map [n] -> [n] violates the bracketing conditions."""


class NotSubsemilatticeError(LatticeForgeError):
    """Raised when a subset is not a (join, 0, 1)-subsemilattice."""


class ArityMismatchError(LatticeForgeError):
    """Raised when an assignment does not match the number of variables."""


class NotPolarizedError(LatticeForgeError):
    """Raised when a measure breaks the triangle or polarity conditions."""

    def __init__(self, message: str, triple: Optional[tuple[Any, Any, Any]] = None):
        super().__init__(message)
        self.triple = triple


class NotMeetHomError(LatticeForgeError):
    """Raised when a map does not preserve finite meets and the top."""


class DualityViolatedError(LatticeForgeError):
    """Raised when measure-side and map-side properties disagree."""


class GeneratorsDontGenerateError(LatticeForgeError):
    """Raised when proposed generators do not generate the whole lattice."""


class NotSubdirectlyIrreducibleError(LatticeForgeError):
    """Raised when a lattice has no monolith."""

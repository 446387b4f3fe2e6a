"""Exception hierarchy for the simulator.

Every failure a transaction can hit is a subclass of :class:`SimError`; the
class name doubles as the outcome label written to the transaction log.
"""


class SimError(Exception):
    """Base class for all simulated-chain failures."""

    @property
    def code(self) -> str:
        return type(self).__name__


# ledger
class DuplicateAddress(SimError):
    pass


class UnknownAccount(SimError):
    pass


class NegativeDelta(SimError):
    pass


class InsufficientGasFunds(SimError):
    pass


class UnknownOp(SimError):
    pass


class ReservedAddress(SimError):
    """Direct mints and transfers may not target the contract account."""


# token
class DuplicateTokenId(SimError):
    pass


class UnknownToken(SimError):
    pass


class NotOwner(SimError):
    pass


class InsufficientRnt(SimError):
    pass


class NegativeAmount(SimError):
    pass


# rental
class UnknownOrder(SimError):
    pass


class NonPositivePrice(SimError):
    pass


class NonPositiveDuration(SimError):
    pass


class DurationExceedsMax(SimError):
    pass


class NonPositiveMaxLikes(SimError):
    pass


class NonPositiveIncrement(SimError):
    pass


class DepositOverflow(SimError):
    pass


class SelfRental(SimError):
    pass


class WrongState(SimError):
    pass


class NotLender(SimError):
    pass


class NotRenter(SimError):
    pass


class NotExhibitor(SimError):
    pass


class Expired(SimError):
    pass


class LikeLimitReached(SimError):
    pass


class AlreadyClaimed(SimError):
    pass


class LikesExceedMax(SimError):
    pass


# exhibitor
class OutOfOrderClick(SimError):
    pass


# economics
class NonPositiveInput(SimError):
    pass


class InvalidCounts(SimError):
    pass


# harness
class ParseError(SimError):
    pass

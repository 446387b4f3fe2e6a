"""Collateral-free NFT rental contract with pay-per-like pricing.

A lender lists a token with a price per like and a maximum duration. A renter
escrows ``max_like_count * price_per_like`` RNT up front; the registered
exhibitor bumps the like counter while the rental runs; once the rental is
completed (renter stop or expiry) the lender claims the token plus the earned
rent and the renter claims the unused part of the deposit.

The token never leaves contract custody while an order is open.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from likerent.errors import (
    AlreadyClaimed,
    DepositOverflow,
    DurationExceedsMax,
    Expired,
    InsufficientRnt,
    LikeLimitReached,
    LikesExceedMax,
    NonPositiveDuration,
    NonPositiveIncrement,
    NonPositiveMaxLikes,
    NonPositivePrice,
    NotExhibitor,
    NotLender,
    NotOwner,
    NotRenter,
    SelfRental,
    UnknownAccount,
    UnknownOrder,
    WrongState,
)
from likerent.ledger import SECONDS_PER_DAY, Ledger
from likerent.token import TokenRegistry

UINT256_MAX = 2**256 - 1


class OrderState(str, enum.Enum):
    LISTED = "Listed"
    RENTED = "Rented"
    COMPLETED = "Completed"
    CANCELLED = "Cancelled"


# Every legal (from, to) pair; anything else is a state-machine violation.
TRANSITIONS = frozenset(
    {
        (OrderState.LISTED, OrderState.RENTED),
        (OrderState.LISTED, OrderState.CANCELLED),
        (OrderState.RENTED, OrderState.COMPLETED),
    }
)


@dataclass(frozen=True)
class Settlement:
    final_rent: int
    refund: int


def settlement_amounts(like_count: int, max_like_count: int, price_per_like: int) -> Settlement:
    """Split a deposit into earned rent and refund."""
    if like_count > max_like_count:
        raise LikesExceedMax(f"{like_count} > {max_like_count}")
    final_rent = like_count * price_per_like
    return Settlement(final_rent, max_like_count * price_per_like - final_rent)


@dataclass
class RentAgreement:
    renter: str
    duration: int
    max_like_count: int
    deposit: int
    start_time: int
    like_count: int = 0
    renter_refunded: bool = False
    settlement: Optional[Settlement] = None

    @property
    def end_time(self) -> int:
        return self.start_time + self.duration


@dataclass
class LendOrder:
    order_id: int
    token_id: int
    lender: str
    price_per_like: int
    max_duration: int
    state: OrderState = OrderState.LISTED
    agreement: Optional[RentAgreement] = None
    lender_claimed: bool = False
    expired: bool = False


class RentalContract:
    def __init__(self, ledger: Ledger, tokens: TokenRegistry, exhibitor: str) -> None:
        if not ledger.has_account(exhibitor):
            raise UnknownAccount(exhibitor)
        self.ledger = ledger
        self.tokens = tokens
        self.exhibitor = exhibitor
        self.address = ledger.contract_address
        self.orders: list[LendOrder] = []

    @classmethod
    def deploy(cls, ledger: Ledger, tokens: TokenRegistry, deployer: str, exhibitor: str) -> "RentalContract":
        """Charge the deployment fee to ``deployer`` and return the contract."""
        contract = cls(ledger, tokens, exhibitor)
        ledger.charge_gas(deployer, "deploy", args=(exhibitor,))
        return contract

    # -- queries ----------------------------------------------------------------

    def order(self, order_id: int) -> LendOrder:
        if not 0 <= order_id < len(self.orders):
            raise UnknownOrder(order_id)
        return self.orders[order_id]

    def observe_expiry(self, order_id: int) -> OrderState:
        """Apply lazy expiry. No gas; a no-op unless the rental has run out."""
        order = self.order(order_id)
        if order.state is OrderState.RENTED and self.ledger.now >= order.agreement.end_time:
            order.expired = True
            self._complete(order)
        return order.state

    def escrowed(self) -> int:
        """RNT the contract still owes across all orders."""
        total = 0
        for order in self.orders:
            ag = order.agreement
            if ag is None:
                continue
            if ag.settlement is None:
                total += ag.deposit
                continue
            if not order.lender_claimed:
                total += ag.settlement.final_rent
            if not ag.renter_refunded:
                total += ag.settlement.refund
        return total

    # -- transactions -----------------------------------------------------------

    def create_lend_order(self, lender: str, token_id: int, price_per_like: int, max_days: int) -> LendOrder:
        def body() -> LendOrder:
            if self.tokens.owner_of(token_id) != lender:
                raise NotOwner(f"{lender} does not own token {token_id}")
            if price_per_like <= 0:
                raise NonPositivePrice(price_per_like)
            if max_days <= 0:
                raise NonPositiveDuration(max_days)
            self.tokens.move_nft(token_id, lender, self.address)
            order = LendOrder(
                order_id=len(self.orders),
                token_id=token_id,
                lender=lender,
                price_per_like=price_per_like,
                max_duration=max_days * SECONDS_PER_DAY,
            )
            self.orders.append(order)
            return order

        return self.ledger.execute(
            lender, "create_lend_order", body, args=(token_id, price_per_like, max_days)
        )

    def stop_lend_order(self, lender: str, order_id: int) -> None:
        def body() -> None:
            order = self.order(order_id)
            if order.lender != lender:
                raise NotLender(lender)
            if order.state is not OrderState.LISTED:
                raise WrongState(order.state.value)
            self.tokens.move_nft(order.token_id, self.address, lender)
            order.state = OrderState.CANCELLED

        self.ledger.execute(lender, "stop_lend_order", body, args=(order_id,))

    def rent(self, renter: str, order_id: int, days: int, max_like_count: int) -> RentAgreement:
        def body() -> RentAgreement:
            order = self.order(order_id)
            if order.state is not OrderState.LISTED:
                raise WrongState(order.state.value)
            if renter == order.lender:
                raise SelfRental(renter)
            if days <= 0:
                raise NonPositiveDuration(days)
            duration = days * SECONDS_PER_DAY
            if duration > order.max_duration:
                raise DurationExceedsMax(f"{duration} > {order.max_duration}")
            if max_like_count <= 0:
                raise NonPositiveMaxLikes(max_like_count)
            deposit = max_like_count * order.price_per_like
            if deposit > UINT256_MAX:
                raise DepositOverflow(deposit)
            if self.tokens.rnt_balance_of(renter) < deposit:
                raise InsufficientRnt(f"{renter} cannot escrow {deposit} RNT")
            self.tokens.move_rnt(renter, self.address, deposit)
            order.agreement = RentAgreement(
                renter=renter,
                duration=duration,
                max_like_count=max_like_count,
                deposit=deposit,
                start_time=self.ledger.now,
            )
            order.state = OrderState.RENTED
            return order.agreement

        return self.ledger.execute(renter, "rent", body, args=(order_id, days, max_like_count))

    def increase_count(self, caller: str, order_id: int, increment: int = 1) -> int:
        def body() -> int:
            if caller != self.exhibitor:
                raise NotExhibitor(caller)
            if increment < 1:
                raise NonPositiveIncrement(increment)
            order = self.order(order_id)
            self.observe_expiry(order_id)
            if order.expired:
                raise Expired(order_id)
            if order.state is not OrderState.RENTED:
                raise WrongState(order.state.value)
            ag = order.agreement
            if ag.like_count + increment > ag.max_like_count:
                raise LikeLimitReached(f"{ag.like_count} + {increment} > {ag.max_like_count}")
            ag.like_count += increment
            return ag.like_count

        return self.ledger.execute(caller, "increase_count", body, args=(order_id, increment))

    def stop_rent(self, renter: str, order_id: int) -> Settlement:
        def body() -> Settlement:
            order = self.order(order_id)
            self.observe_expiry(order_id)
            if order.agreement is None or order.agreement.renter != renter:
                raise NotRenter(renter)
            if order.state is not OrderState.RENTED:
                raise WrongState(order.state.value)
            return self._complete(order)

        return self.ledger.execute(renter, "stop_rent", body, args=(order_id,))

    def claim_nft_and_funds(self, lender: str, order_id: int) -> tuple[int, int]:
        """Return ``(token_id, rnt_paid)`` after moving both to the lender."""

        def body() -> tuple[int, int]:
            order = self.order(order_id)
            self.observe_expiry(order_id)
            if order.lender != lender:
                raise NotLender(lender)
            if order.state is not OrderState.COMPLETED:
                raise WrongState(order.state.value)
            if order.lender_claimed:
                raise AlreadyClaimed(f"order {order_id} lender side")
            paid = order.agreement.settlement.final_rent
            self.tokens.move_nft(order.token_id, self.address, lender)
            self.tokens.move_rnt(self.address, lender, paid)
            order.lender_claimed = True
            return order.token_id, paid

        return self.ledger.execute(lender, "claim_nft_and_funds", body, args=(order_id,))

    def claim_refunds(self, renter: str, order_id: int) -> int:
        def body() -> int:
            order = self.order(order_id)
            self.observe_expiry(order_id)
            ag = order.agreement
            if ag is None or ag.renter != renter:
                raise NotRenter(renter)
            if order.state is not OrderState.COMPLETED:
                raise WrongState(order.state.value)
            if ag.renter_refunded:
                raise AlreadyClaimed(f"order {order_id} renter side")
            self.tokens.move_rnt(self.address, renter, ag.settlement.refund)
            ag.renter_refunded = True
            return ag.settlement.refund

        return self.ledger.execute(renter, "claim_refunds", body, args=(order_id,))

    def _complete(self, order: LendOrder) -> Settlement:
        ag = order.agreement
        ag.settlement = settlement_amounts(ag.like_count, ag.max_like_count, order.price_per_like)
        order.state = OrderState.COMPLETED
        return ag.settlement

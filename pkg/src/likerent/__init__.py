"""Deterministic simulator of pay-per-like NFT rentals on an account-based chain."""

from likerent.economics import BINANCE_LIKE, ETHEREUM, ChainProfile, GasSchedule, default_gas_schedule
from likerent.exhibitor import ClickEvent, Exhibitor, FraudVerdict, PolicySet, RateLimit
from likerent.ledger import CONTRACT_ADDRESS, Ledger, TxRecord
from likerent.rental import LendOrder, OrderState, RentAgreement, RentalContract, Settlement, settlement_amounts
from likerent.token import TokenRecord, TokenRegistry

__all__ = [
    "BINANCE_LIKE",
    "CONTRACT_ADDRESS",
    "ETHEREUM",
    "ChainProfile",
    "ClickEvent",
    "Exhibitor",
    "FraudVerdict",
    "GasSchedule",
    "LendOrder",
    "Ledger",
    "OrderState",
    "PolicySet",
    "RateLimit",
    "RentAgreement",
    "RentalContract",
    "Settlement",
    "TokenRecord",
    "TokenRegistry",
    "TxRecord",
    "default_gas_schedule",
    "settlement_amounts",
]

"""NFT registry with ERC-721-style custody, plus the fungible rental token RNT.

RNT balances live on ledger accounts; this module only moves them. Internal
``move_*`` helpers are used by the rental contract inside its own transaction
and therefore charge no gas of their own.
"""

from __future__ import annotations

from dataclasses import dataclass

from likerent.errors import (
    DuplicateTokenId,
    InsufficientRnt,
    NegativeAmount,
    NotOwner,
    ReservedAddress,
    UnknownAccount,
    UnknownToken,
)
from likerent.ledger import Ledger


@dataclass
class TokenRecord:
    token_id: int
    owner: str
    metadata_ref: str = ""


class TokenRegistry:
    def __init__(self, ledger: Ledger) -> None:
        self.ledger = ledger
        self._nfts: dict[int, TokenRecord] = {}

    # -- NFTs -----------------------------------------------------------------

    def mint_nft(self, owner: str, token_id: int, metadata_ref: str = "") -> TokenRecord:
        """Create a token at world setup. Minting is not a gas-bearing call."""
        if token_id in self._nfts:
            raise DuplicateTokenId(token_id)
        if not self.ledger.has_account(owner):
            raise UnknownAccount(owner)
        if owner == self.ledger.contract_address:
            raise ReservedAddress(owner)
        rec = TokenRecord(token_id, owner, metadata_ref)
        self._nfts[token_id] = rec
        return rec

    def record(self, token_id: int) -> TokenRecord:
        try:
            return self._nfts[token_id]
        except KeyError:
            raise UnknownToken(token_id) from None

    def __contains__(self, token_id: object) -> bool:
        return token_id in self._nfts

    def owner_of(self, token_id: int) -> str:
        return self.record(token_id).owner

    def token_ids(self) -> list[int]:
        return sorted(self._nfts)

    def move_nft(self, token_id: int, from_: str, to: str) -> TokenRecord:
        rec = self.record(token_id)
        if rec.owner != from_:
            raise NotOwner(f"{from_} does not own token {token_id}")
        if not self.ledger.has_account(to):
            raise UnknownAccount(to)
        rec.owner = to
        return rec

    def transfer_nft(self, caller: str, token_id: int, to: str) -> TokenRecord:
        def body() -> TokenRecord:
            self._check_recipient(to)
            return self.move_nft(token_id, caller, to)

        return self.ledger.execute(caller, "transfer_nft", body, args=(token_id, to))

    def _check_recipient(self, to: str) -> None:
        # only the rental contract itself may put assets into escrow
        if to == self.ledger.contract_address:
            raise ReservedAddress(to)

    # -- RNT ------------------------------------------------------------------

    def rnt_balance_of(self, address: str) -> int:
        return self.ledger.account(address).rnt_balance

    def total_supply(self) -> int:
        return self.ledger.rnt_minted

    def move_rnt(self, from_: str, to: str, amount: int) -> None:
        if amount < 0:
            raise NegativeAmount(amount)
        src = self.ledger.account(from_)
        dst = self.ledger.account(to)
        if src.rnt_balance < amount:
            raise InsufficientRnt(f"{from_} holds {src.rnt_balance} RNT, needs {amount}")
        src.rnt_balance -= amount
        dst.rnt_balance += amount

    def transfer_rnt(self, from_: str, to: str, amount: int) -> None:
        def body() -> None:
            self._check_recipient(to)
            self.move_rnt(from_, to, amount)

        self.ledger.execute(from_, "transfer_rnt", body, args=(to, amount))

"""Single-chain world state: accounts, gas charging, simulated clock, tx log."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterator, Mapping, TypeVar

from likerent.errors import (
    DuplicateAddress,
    InsufficientGasFunds,
    NegativeDelta,
    ReservedAddress,
    SimError,
    UnknownAccount,
    UnknownOp,
)

T = TypeVar("T")

CONTRACT_ADDRESS = "rental-contract"
SUCCESS = "success"
WEI_PER_GWEI = 10**9
SECONDS_PER_DAY = 86_400


@dataclass
class Account:
    address: str
    native_balance: int = 0
    rnt_balance: int = 0


@dataclass(frozen=True)
class TxRecord:
    seq: int
    sender: str
    op_name: str
    gas_used: int
    fee_wei: int
    timestamp: int
    outcome: str
    args: tuple = ()

    @property
    def ok(self) -> bool:
        return self.outcome == SUCCESS


class Ledger:
    """Deterministic ledger. Gas is burned, never paid to anyone.

    ``gas_schedule`` maps operation names to gas units and ``gas_price_wei``
    is the fixed price per unit. The contract account is created up front and
    never pays gas.
    """

    def __init__(
        self,
        gas_schedule: Mapping[str, int],
        gas_price_wei: int,
        contract_address: str = CONTRACT_ADDRESS,
    ) -> None:
        if gas_price_wei < 0:
            raise ValueError("gas price must be non-negative")
        self.gas_schedule = dict(gas_schedule)
        self.gas_price_wei = gas_price_wei
        self.contract_address = contract_address
        self.now = 0
        self.native_minted = 0
        self.rnt_minted = 0
        self.gas_burned = 0
        self._accounts: dict[str, Account] = {
            contract_address: Account(contract_address)
        }
        self._log: list[TxRecord] = []

    # -- accounts -------------------------------------------------------------

    def open_account(self, address: str, native_funding: int = 0, rnt_funding: int = 0) -> Account:
        if address in self._accounts:
            raise DuplicateAddress(address)
        if native_funding < 0 or rnt_funding < 0:
            raise ValueError("funding must be non-negative")
        acct = Account(address, native_funding, rnt_funding)
        self._accounts[address] = acct
        self.native_minted += native_funding
        self.rnt_minted += rnt_funding
        return acct

    def account(self, address: str) -> Account:
        try:
            return self._accounts[address]
        except KeyError:
            raise UnknownAccount(address) from None

    def has_account(self, address: str) -> bool:
        return address in self._accounts

    def accounts(self) -> Iterator[Account]:
        return iter(self._accounts.values())

    def mint_rnt(self, address: str, amount: int) -> None:
        """World-setup minting of RNT; the only way RNT supply grows."""
        if amount < 0:
            raise ValueError("amount must be non-negative")
        if address == self.contract_address:
            raise ReservedAddress(address)
        self.account(address).rnt_balance += amount
        self.rnt_minted += amount

    # -- time -----------------------------------------------------------------

    def advance_time(self, delta: int) -> int:
        if delta < 0:
            raise NegativeDelta(delta)
        self.now += delta
        return self.now

    # -- gas ------------------------------------------------------------------

    @property
    def tx_log(self) -> tuple[TxRecord, ...]:
        return tuple(self._log)

    def gas_for(self, op_name: str) -> int:
        try:
            return self.gas_schedule[op_name]
        except KeyError:
            raise UnknownOp(op_name) from None

    def fee_for(self, op_name: str) -> int:
        return self.gas_for(op_name) * self.gas_price_wei

    def charge_gas(self, sender: str, op_name: str, outcome: str = SUCCESS, args: tuple = ()) -> TxRecord:
        """Burn the fee for ``op_name`` from ``sender`` and log the transaction.

        An unaffordable fee logs the failure with ``fee_wei=0`` and raises
        :class:`InsufficientGasFunds`.
        """
        acct = self.account(sender)
        gas = self.gas_for(op_name)
        fee = gas * self.gas_price_wei
        if acct.native_balance < fee:
            self._append(sender, op_name, gas, 0, InsufficientGasFunds.__name__, args)
            raise InsufficientGasFunds(f"{sender} cannot pay {fee} wei for {op_name}")
        acct.native_balance -= fee
        self.gas_burned += fee
        return self._append(sender, op_name, gas, fee, outcome, args)

    def execute(self, sender: str, op_name: str, body: Callable[[], T], args: tuple = ()) -> T:
        """Run ``body`` as one gas-bearing transaction sent by ``sender``.

        Gas affordability is checked before ``body`` runs. If ``body`` raises a
        :class:`SimError` the fee is still burned and the error name becomes
        the logged outcome; ``body`` must validate before mutating so that a
        failure leaves everything else untouched.
        """
        acct = self.account(sender)
        if acct.native_balance < self.fee_for(op_name):
            self.charge_gas(sender, op_name, args=args)  # logs and raises
        try:
            result = body()
        except SimError as exc:
            self.charge_gas(sender, op_name, outcome=exc.code, args=args)
            raise
        self.charge_gas(sender, op_name, args=args)
        return result

    def _append(self, sender: str, op_name: str, gas: int, fee: int, outcome: str, args: tuple) -> TxRecord:
        rec = TxRecord(
            seq=len(self._log),
            sender=sender,
            op_name=op_name,
            gas_used=gas,
            fee_wei=fee,
            timestamp=self.now,
            outcome=outcome,
            args=args,
        )
        self._log.append(rec)
        return rec

    # -- views ----------------------------------------------------------------

    def total_native(self) -> int:
        return sum(a.native_balance for a in self._accounts.values())

    def total_rnt(self) -> int:
        return sum(a.rnt_balance for a in self._accounts.values())

    def snapshot(self) -> dict[str, Any]:
        return {
            "now": self.now,
            "accounts": {
                a.address: {"native": a.native_balance, "rnt": a.rnt_balance}
                for a in sorted(self._accounts.values(), key=lambda a: a.address)
            },
            "native_minted": self.native_minted,
            "rnt_minted": self.rnt_minted,
            "gas_burned": self.gas_burned,
        }

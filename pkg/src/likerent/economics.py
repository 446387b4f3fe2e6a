"""Gas-to-USD cost model and the fee analyses built on it.

All USD math is done in :class:`~decimal.Decimal` at full precision; only
:func:`round_cents` rounds, and only for display.

The default gas units are back-solved from USD figures observed at 7 gwei and
1,597.70 USD/ETH, since only dollar amounts were published for that point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Optional

from likerent.errors import InvalidCounts, NonPositiveInput, ParseError, UnknownOp

GWEI = Decimal("1e-9")
CENT = Decimal("0.01")

LENDER_OPS = ("create_lend_order", "stop_lend_order", "claim_nft_and_funds")
RENTER_OPS = ("rent", "stop_rent", "claim_refunds")
OP_ROLES = {
    **{op: "lender" for op in LENDER_OPS},
    **{op: "renter" for op in RENTER_OPS},
    "increase_count": "exhibitor",
    "record_click_metadata": "exhibitor",
    "deploy": "deployer",
}
ROLES = ("lender", "renter", "exhibitor", "deployer")


@dataclass(frozen=True)
class ChainProfile:
    name: str
    gas_price_gwei: Decimal
    eth_usd: Decimal
    rnt_usd: Decimal = Decimal(1)

    def __post_init__(self) -> None:
        for attr in ("gas_price_gwei", "eth_usd", "rnt_usd"):
            value = Decimal(str(getattr(self, attr)))
            if value <= 0:
                raise NonPositiveInput(f"{attr} must be positive, got {value}")
            object.__setattr__(self, attr, value)

    @property
    def gas_price_wei(self) -> int:
        wei = self.gas_price_gwei * 10**9
        if wei != wei.to_integral_value():
            raise NonPositiveInput(f"gas price {self.gas_price_gwei} gwei is not a whole number of wei")
        return int(wei)

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ChainProfile":
        try:
            return cls(
                str(obj["name"]),
                Decimal(str(obj["gas_price_gwei"])),
                Decimal(str(obj["eth_usd"])),
                Decimal(str(obj.get("rnt_usd", 1))),
            )
        except (KeyError, ArithmeticError, TypeError) as exc:
            raise ParseError(f"bad chain profile: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ChainProfile":
        return cls.from_dict(_load_json(path))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gas_price_gwei": str(self.gas_price_gwei),
            "eth_usd": str(self.eth_usd),
            "rnt_usd": str(self.rnt_usd),
        }


ETHEREUM = ChainProfile("ethereum", Decimal(7), Decimal("1597.70"))
# Same gas units, cheaper fee environment: the USD cost of any op is 68.72/2.46
# times lower than on ETHEREUM (to 4 significant digits).
BINANCE_LIKE = ChainProfile("binance-like", Decimal(5), Decimal("80.07"))
BUNDLED_PROFILES = {p.name: p for p in (ETHEREUM, BINANCE_LIKE)}


class GasSchedule(dict):
    """Mapping of op name to gas units; every entry must be positive."""

    def __init__(self, entries: Mapping[str, int] = (), **kw: int) -> None:
        super().__init__(entries, **kw)
        for op, gas in self.items():
            if not isinstance(gas, int) or isinstance(gas, bool) or gas <= 0:
                raise NonPositiveInput(f"gas for {op} must be a positive integer, got {gas!r}")

    def gas(self, op_name: str) -> int:
        try:
            return self[op_name]
        except KeyError:
            raise UnknownOp(op_name) from None

    @classmethod
    def load(cls, path: str | Path) -> "GasSchedule":
        obj = _load_json(path)
        if not isinstance(obj, dict):
            raise ParseError("gas schedule must be a JSON object")
        merged = dict(default_gas_schedule())
        merged.update(obj)
        return cls(merged)


def default_gas_schedule() -> GasSchedule:
    return GasSchedule(
        deploy=2_510_746,  # $28.08
        create_lend_order=184_193,  # $2.06, top of the observed per-call range
        rent=178_829,  # $2.00
        increase_count=40_236,  # $0.45, bottom of the range
        stop_lend_order=80_000,  # $0.89
        stop_rent=80_000,
        claim_nft_and_funds=80_000,
        claim_refunds=80_000,
        transfer_nft=60_000,  # $0.67
        transfer_rnt=50_000,  # $0.56
        record_click_metadata=45_000,  # $0.50, a counter bump plus storage
    )


def _load_json(path: str | Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_float=Decimal)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


# -- single transactions ----------------------------------------------------------


def tx_cost_usd(gas_units: int, profile: ChainProfile) -> Decimal:
    if gas_units <= 0:
        raise NonPositiveInput(f"gas_units must be positive, got {gas_units}")
    return gas_units * profile.gas_price_gwei * GWEI * profile.eth_usd


def wei_to_usd(wei: int, profile: ChainProfile) -> Decimal:
    return Decimal(wei) * GWEI * GWEI * profile.eth_usd


def gas_for_usd(usd: Decimal, profile: ChainProfile) -> int:
    """Inverse of :func:`tx_cost_usd`, rounded to the nearest gas unit."""
    usd = Decimal(str(usd))
    if usd <= 0:
        raise NonPositiveInput(f"usd must be positive, got {usd}")
    return int((usd / (profile.gas_price_gwei * GWEI * profile.eth_usd)).to_integral_value(ROUND_HALF_UP))


def round_cents(usd: Decimal) -> Decimal:
    return Decimal(usd).quantize(CENT, rounding=ROUND_HALF_UP)


# -- cost reports -------------------------------------------------------------------


@dataclass
class LineItem:
    op_name: str
    role: str
    count: int
    gas_units: int
    usd: Decimal


@dataclass
class CostReport:
    profile: ChainProfile
    items: list[LineItem] = field(default_factory=list)
    rnt_income: int = 0

    def add(self, op_name: str, role: str, count: int, gas_per_tx: int) -> None:
        if count <= 0:
            return
        gas = gas_per_tx * count
        self.items.append(LineItem(op_name, role, count, gas, tx_cost_usd(gas, self.profile)))

    def role_totals(self) -> dict[str, Decimal]:
        totals = {role: Decimal(0) for role in ROLES}
        for item in self.items:
            totals[item.role] = totals.get(item.role, Decimal(0)) + item.usd
        return totals

    @property
    def total_usd(self) -> Decimal:
        return sum((item.usd for item in self.items), Decimal(0))

    @property
    def lender_profit_usd(self) -> Decimal:
        return self.rnt_income * self.profile.rnt_usd - self.role_totals()["lender"]

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.name,
            "items": [
                {"op": i.op_name, "role": i.role, "count": i.count, "gas": i.gas_units, "usd": str(round_cents(i.usd))}
                for i in self.items
            ],
            "role_usd": {role: str(round_cents(v)) for role, v in self.role_totals().items()},
            "total_usd": str(round_cents(self.total_usd)),
            "lender_rnt_income": self.rnt_income,
            "lender_profit_usd": str(round_cents(self.lender_profit_usd)),
        }


def order_lifecycle_cost(
    profile: ChainProfile,
    schedule: Mapping[str, int],
    role: str,
    likes: int = 0,
    k: int = 1,
    include_stop: bool = False,
) -> CostReport:
    """Gas bill for one side of a single order.

    Lender: create + claim. Renter: rent (+ stop_rent) + claim_refunds.
    Exhibitor: one increase_count per started batch of ``k`` likes.
    """
    if likes < 0 or k < 1:
        raise NonPositiveInput(f"likes={likes}, k={k}")
    schedule = GasSchedule(schedule)
    report = CostReport(profile)
    if role == "lender":
        report.add("create_lend_order", role, 1, schedule.gas("create_lend_order"))
        report.add("claim_nft_and_funds", role, 1, schedule.gas("claim_nft_and_funds"))
    elif role == "renter":
        report.add("rent", role, 1, schedule.gas("rent"))
        if include_stop:
            report.add("stop_rent", role, 1, schedule.gas("stop_rent"))
        report.add("claim_refunds", role, 1, schedule.gas("claim_refunds"))
    elif role == "exhibitor":
        report.add("increase_count", role, math.ceil(likes / k), schedule.gas("increase_count"))
    else:
        raise NonPositiveInput(f"unknown role {role!r}")
    return report


def cost_report_from_log(tx_log: Iterable, profile: ChainProfile, rnt_income: int = 0) -> CostReport:
    """Aggregate paid fees from a ledger tx log into per-op, per-role lines.

    Records whose fee could not be paid are skipped.
    """
    counts: dict[str, list[int]] = {}
    for rec in tx_log:
        if rec.fee_wei == 0:
            continue
        n_gas = counts.setdefault(rec.op_name, [0, 0])
        n_gas[0] += 1
        n_gas[1] += rec.gas_used
    report = CostReport(profile, rnt_income=rnt_income)
    for op in sorted(counts):
        n, gas = counts[op]
        report.items.append(LineItem(op, OP_ROLES.get(op, "other"), n, gas, tx_cost_usd(gas, profile)))
    return report


# -- analyses -------------------------------------------------------------------------


def break_even_price_per_like(
    profile: ChainProfile, schedule: Mapping[str, int], expected_likes: int
) -> int:
    """Smallest whole RNT price at which the lender's income covers their gas."""
    if expected_likes < 1:
        raise NonPositiveInput(f"expected_likes must be >= 1, got {expected_likes}")
    cost = order_lifecycle_cost(profile, schedule, "lender").total_usd
    per_rnt = expected_likes * profile.rnt_usd
    return max(1, int((cost / per_rnt).to_integral_value(rounding=ROUND_CEILING)))


@dataclass(frozen=True)
class TrustCostCurve:
    counter_batched: Decimal
    counter_unbatched: Decimal
    full_metadata: Decimal

    def rows(self) -> list[tuple[str, Decimal]]:
        return [
            ("counter_batched", self.counter_batched),
            ("counter_unbatched", self.counter_unbatched),
            ("full_metadata", self.full_metadata),
        ]

    @property
    def trust_cost(self) -> Decimal:
        """Extra spend of recording every click over the batched counter."""
        return self.full_metadata - self.counter_batched

    @property
    def factor(self) -> Optional[Decimal]:
        if self.counter_batched == 0:
            return None
        return self.full_metadata / self.counter_batched


def trust_cost_curve(
    profile: ChainProfile,
    schedule: Mapping[str, int],
    total_clicks: int,
    verified_likes: int,
    k: int = 10,
) -> TrustCostCurve:
    if not 0 <= verified_likes <= total_clicks or k < 1:
        raise InvalidCounts(f"total={total_clicks}, verified={verified_likes}, k={k}")
    schedule = GasSchedule(schedule)

    def usd(n_tx: int, op: str) -> Decimal:
        return tx_cost_usd(n_tx * schedule.gas(op), profile) if n_tx else Decimal(0)

    return TrustCostCurve(
        counter_batched=usd(math.ceil(verified_likes / k), "increase_count"),
        counter_unbatched=usd(verified_likes, "increase_count"),
        full_metadata=usd(total_clicks, "record_click_metadata"),
    )


def compare_chains(
    schedule: Mapping[str, int], profile_a: ChainProfile, profile_b: ChainProfile, op_name: str
) -> Decimal:
    """How many times more ``op_name`` costs in USD on ``profile_a`` than on ``profile_b``."""
    gas = GasSchedule(schedule).gas(op_name)
    return tx_cost_usd(gas, profile_a) / tx_cost_usd(gas, profile_b)

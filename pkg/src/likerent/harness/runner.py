"""Drive scenarios through the real ledger, contract and exhibitor."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from likerent.economics import (
    ETHEREUM,
    ChainProfile,
    CostReport,
    cost_report_from_log,
    default_gas_schedule,
    round_cents,
    wei_to_usd,
)
from likerent.errors import SimError
from likerent.exhibitor import REASONS, ClickEvent, Exhibitor, PolicySet
from likerent.harness.scenario import Scenario, Step
from likerent.ledger import Ledger
from likerent.rental import OrderState, RentalContract
from likerent.token import TokenRegistry

DEPLOYER = "deployer"
EXHIBITOR = "exhibitor"
OPERATOR_FUNDING = 10**24  # wei, enough that operators never run dry


class World:
    """One ledger with a deployed rental contract and its exhibitor."""

    def __init__(
        self,
        profile: ChainProfile = ETHEREUM,
        schedule: Optional[Mapping[str, int]] = None,
        batch_k: int = 1,
        policies: Optional[PolicySet] = None,
    ) -> None:
        self.profile = profile
        self.schedule = dict(schedule if schedule is not None else default_gas_schedule())
        self.ledger = Ledger(self.schedule, profile.gas_price_wei)
        self.ledger.open_account(DEPLOYER, OPERATOR_FUNDING)
        self.ledger.open_account(EXHIBITOR, OPERATOR_FUNDING)
        self.tokens = TokenRegistry(self.ledger)
        self.contract = RentalContract.deploy(self.ledger, self.tokens, DEPLOYER, EXHIBITOR)
        self.exhibitor = Exhibitor(
            self.contract, batch_k, policies if policies is not None else PolicySet()
        )

    def apply(self, step: Step) -> Any:
        return getattr(self, "_step_" + step.name)(**step.kwargs)

    def _step_open_account(self, address: str, native: int, rnt: int):
        return self.ledger.open_account(address, native, rnt)

    def _step_mint_nft(self, owner: str, token_id: int, metadata: str):
        return self.tokens.mint_nft(owner, token_id, metadata)

    def _step_mint_rnt(self, to: str, amount: int):
        return self.ledger.mint_rnt(to, amount)

    def _step_lend(self, lender: str, token_id: int, price_per_like: int, max_days: int):
        return self.contract.create_lend_order(lender, token_id, price_per_like, max_days)

    def _step_stop_lend(self, lender: str, order: int):
        return self.contract.stop_lend_order(lender, order)

    def _step_rent(self, renter: str, order: int, days: int, max_likes: int):
        return self.contract.rent(renter, order, days, max_likes)

    def _step_click(self, user: str, order: int, auth: bool, t: Optional[int]):
        ts = self.ledger.now if t is None else t
        return self.exhibitor.submit_click(ClickEvent(user, order, ts, auth))

    def _step_flush(self, order: int):
        return self.exhibitor.flush_pending(order)

    def _step_increase_count(self, caller: str, order: int, increment: int):
        return self.contract.increase_count(caller, order, increment)

    def _step_stop_rent(self, renter: str, order: int):
        # verified likes must reach the chain before the counter freezes
        if 0 <= order < len(self.contract.orders):
            o = self.contract.order(order)
            if self.contract.observe_expiry(order) is OrderState.RENTED and o.agreement.renter == renter:
                self.exhibitor.flush_pending(order)
        return self.contract.stop_rent(renter, order)

    def _step_claim_lender(self, lender: str, order: int):
        return self.contract.claim_nft_and_funds(lender, order)

    def _step_claim_renter(self, renter: str, order: int):
        return self.contract.claim_refunds(renter, order)

    def _step_advance_time(self, seconds: int):
        if seconds >= 0:
            self.exhibitor.flush_expiring(self.ledger.now + seconds)
        return self.ledger.advance_time(seconds)

    def _step_transfer_nft(self, caller: str, token_id: int, to: str):
        return self.tokens.transfer_nft(caller, token_id, to)

    def _step_transfer_rnt(self, sender: str, to: str, amount: int):
        return self.tokens.transfer_rnt(sender, to, amount)


@dataclass
class StepError:
    index: int
    step: str
    error: str
    message: str

    def to_dict(self) -> dict:
        return {"index": self.index, "step": self.step, "error": self.error, "message": self.message}


@dataclass
class RunReport:
    now: int
    balances: dict[str, dict[str, int]]
    orders: list[dict[str, Any]]
    tokens: dict[int, str]
    gas: dict[str, dict[str, Any]]
    verdicts: dict[str, int]
    dropped_likes: int
    pending_likes: dict[int, int]
    flush_txs: int
    costs: CostReport
    errors: list[StepError] = field(default_factory=list)
    halted: bool = False

    def to_dict(self) -> dict:
        return {
            "now": self.now,
            "balances": self.balances,
            "orders": self.orders,
            "tokens": {str(k): v for k, v in self.tokens.items()},
            "gas": self.gas,
            "verdicts": self.verdicts,
            "dropped_likes": self.dropped_likes,
            "pending_likes": {str(k): v for k, v in self.pending_likes.items()},
            "flush_txs": self.flush_txs,
            "costs": self.costs.to_dict(),
            "errors": [e.to_dict() for e in self.errors],
            "halted": self.halted,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"time: {self.now}s", "", f"{'account':<20} {'native (wei)':>28} {'RNT':>12}"]
        for addr, bal in self.balances.items():
            lines.append(f"{addr:<20} {bal['native']:>28} {bal['rnt']:>12}")
        lines += ["", f"{'order':>5} {'token':>6} {'state':<10} {'likes':>6} {'max':>6} {'rent':>8} {'refund':>8}"]
        for o in self.orders:
            s = o["settlement"] or {}
            lines.append(
                f"{o['order_id']:>5} {o['token_id']:>6} {o['state']:<10} {o['like_count'] if o['like_count'] is not None else '-':>6} "
                f"{o['max_like_count'] if o['max_like_count'] is not None else '-':>6} "
                f"{s.get('final_rent', '-'):>8} {s.get('refund', '-'):>8}"
            )
        lines += ["", f"{'sender':<20} {'txs':>5} {'gas':>12} {'USD':>10}"]
        for addr, g in self.gas.items():
            lines.append(f"{addr:<20} {g['txs']:>5} {g['gas_units']:>12} {g['usd']:>10}")
        costs = self.costs.to_dict()
        lines += ["", "USD by role: " + ", ".join(f"{r}={v}" for r, v in costs["role_usd"].items())]
        lines.append(f"lender profit: {costs['lender_profit_usd']} USD")
        lines.append("verdicts: " + ", ".join(f"{k}={v}" for k, v in self.verdicts.items()))
        lines.append(f"flush txs: {self.flush_txs}, dropped likes: {self.dropped_likes}")
        if self.errors:
            lines += ["", "errors:"]
            lines += [f"  #{e.index} {e.step}: {e.error} {e.message}" for e in self.errors]
        return "\n".join(lines) + "\n"


def gas_by_sender(tx_log, profile: ChainProfile) -> dict[str, dict[str, Any]]:
    out: dict[str, dict[str, Any]] = {}
    for rec in tx_log:
        g = out.setdefault(rec.sender, {"txs": 0, "failed": 0, "gas_units": 0, "fee_wei": 0})
        g["txs"] += 1
        g["failed"] += not rec.ok
        if rec.fee_wei:
            g["gas_units"] += rec.gas_used
            g["fee_wei"] += rec.fee_wei
    for g in out.values():
        g["usd"] = str(round_cents(wei_to_usd(g["fee_wei"], profile)))
    return dict(sorted(out.items()))


def _order_row(order) -> dict[str, Any]:
    ag = order.agreement
    return {
        "order_id": order.order_id,
        "token_id": order.token_id,
        "lender": order.lender,
        "price_per_like": order.price_per_like,
        "max_duration": order.max_duration,
        "state": order.state.value,
        "renter": ag.renter if ag else None,
        "deposit": ag.deposit if ag else None,
        "max_like_count": ag.max_like_count if ag else None,
        "like_count": ag.like_count if ag else None,
        "settlement": (
            {"final_rent": ag.settlement.final_rent, "refund": ag.settlement.refund}
            if ag and ag.settlement
            else None
        ),
        "lender_claimed": order.lender_claimed,
        "renter_refunded": ag.renter_refunded if ag else False,
    }


def build_report(world: World, errors: Optional[list[StepError]] = None, halted: bool = False) -> RunReport:
    contract = world.contract
    for order in contract.orders:
        contract.observe_expiry(order.order_id)
    income = sum(
        o.agreement.settlement.final_rent for o in contract.orders if o.lender_claimed
    )
    ex = world.exhibitor
    return RunReport(
        now=world.ledger.now,
        balances={
            a.address: {"native": a.native_balance, "rnt": a.rnt_balance}
            for a in sorted(world.ledger.accounts(), key=lambda a: a.address)
        },
        orders=[_order_row(o) for o in contract.orders],
        tokens={tid: world.tokens.owner_of(tid) for tid in world.tokens.token_ids()},
        gas=gas_by_sender(world.ledger.tx_log, world.profile),
        verdicts={r: ex.verdicts.get(r, 0) for r in REASONS},
        dropped_likes=ex.dropped,
        pending_likes=dict(sorted(ex.pending.items())),
        flush_txs=ex.flush_txs,
        costs=cost_report_from_log(world.ledger.tx_log, world.profile, rnt_income=income),
        errors=list(errors or []),
        halted=halted,
    )


def run_scenario(
    scenario: Scenario,
    profile: ChainProfile = ETHEREUM,
    schedule: Optional[Mapping[str, int]] = None,
    batch_k: int = 1,
    policies: Optional[PolicySet] = None,
    strict: bool = False,
) -> RunReport:
    """Apply every step in order and report the final state.

    Step failures are recorded and skipped. With ``strict`` the first failure
    stops the run and is re-raised with the partial report on ``exc.report``.
    """
    world = World(profile, schedule, batch_k, policies)
    errors: list[StepError] = []
    for i, step in enumerate(scenario):
        try:
            world.apply(step)
        except SimError as exc:
            errors.append(StepError(i, step.name, exc.code, str(exc)))
            if strict:
                exc.report = build_report(world, errors, halted=True)
                raise
    return build_report(world, errors)

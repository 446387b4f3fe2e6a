"""Replay oracle: recompute a scenario's outcome without the contract code.

Everything here is derived directly from the rules of the rental game using
plain dicts: an order's state is a function of the clock (no lazy expiry),
click verdicts come from brute-force scans over the full click history, and
settlement is ``likes * price`` with the remainder refunded. Nothing from
``likerent.rental``, ``likerent.token`` or ``likerent.exhibitor`` is used, so
agreement with :func:`run_scenario` is evidence, not tautology.
"""

from __future__ import annotations

from typing import Any, Mapping, Optional

from likerent.economics import ETHEREUM, ChainProfile, default_gas_schedule
from likerent.exhibitor import PolicySet
from likerent.harness.runner import DEPLOYER, EXHIBITOR, OPERATOR_FUNDING, RunReport
from likerent.harness.scenario import Scenario
from likerent.ledger import CONTRACT_ADDRESS

DAY = 86_400
MAX_DEPOSIT = 2**256 - 1


class _Replay:
    def __init__(self, profile: ChainProfile, schedule: Mapping[str, int], k: int, policies: PolicySet):
        self.price = int(profile.gas_price_gwei * 10**9)
        self.schedule = schedule
        self.k = k
        self.policies = policies
        self.now = 0
        self.native = {CONTRACT_ADDRESS: 0, DEPLOYER: OPERATOR_FUNDING, EXHIBITOR: OPERATOR_FUNDING}
        self.rnt = {CONTRACT_ADDRESS: 0, DEPLOYER: 0, EXHIBITOR: 0}
        self.owner: dict[int, str] = {}
        self.orders: list[dict[str, Any]] = []
        self.clicks: list[tuple[str, int, int, bool]] = []  # user, order, t, accepted
        self.last_t: Optional[int] = None
        self.pending: dict[int, int] = {}
        self.dropped = 0
        self.pay(DEPLOYER, "deploy")

    # fees ----------------------------------------------------------------------

    def pay(self, who: str, op: str) -> bool:
        """Burn the fee if affordable. Unknown senders and broke senders send nothing."""
        if who not in self.native:
            return False
        fee = self.schedule[op] * self.price
        if self.native[who] < fee:
            return False
        self.native[who] -= fee
        return True

    # order state as a pure function of time ------------------------------------

    def state(self, o: dict) -> str:
        if o["state"] == "Rented" and self.now >= o["start"] + o["duration"]:
            return "Completed"
        return o["state"]

    def order(self, i: int) -> Optional[dict]:
        return self.orders[i] if 0 <= i < len(self.orders) else None

    def settle(self, o: dict) -> tuple[int, int]:
        rent = o["likes"] * o["price"]
        return rent, o["deposit"] - rent

    # steps ----------------------------------------------------------------------

    def open_account(self, address, native, rnt):
        if address not in self.native:
            self.native[address] = native
            self.rnt[address] = rnt

    def mint_nft(self, owner, token_id, metadata):
        if token_id not in self.owner and owner in self.native and owner != CONTRACT_ADDRESS:
            self.owner[token_id] = owner

    def mint_rnt(self, to, amount):
        if to in self.rnt and to != CONTRACT_ADDRESS:
            self.rnt[to] += amount

    def lend(self, lender, token_id, price_per_like, max_days):
        if not self.pay(lender, "create_lend_order"):
            return
        if self.owner.get(token_id) == lender and price_per_like > 0 and max_days > 0:
            self.owner[token_id] = CONTRACT_ADDRESS
            self.orders.append(
                {"token": token_id, "lender": lender, "price": price_per_like,
                 "max_duration": max_days * DAY, "state": "Listed", "renter": None,
                 "likes": 0, "max_likes": 0, "deposit": 0, "start": 0, "duration": 0,
                 "lender_claimed": False, "renter_refunded": False}
            )

    def stop_lend(self, lender, order):
        if not self.pay(lender, "stop_lend_order"):
            return
        o = self.order(order)
        if o and o["lender"] == lender and self.state(o) == "Listed":
            o["state"] = "Cancelled"
            self.owner[o["token"]] = lender

    def rent(self, renter, order, days, max_likes):
        if not self.pay(renter, "rent"):
            return
        o = self.order(order)
        if not o or self.state(o) != "Listed" or renter == o["lender"]:
            return
        deposit = max_likes * o["price"]
        if not (0 < days * DAY <= o["max_duration"]) or max_likes <= 0:
            return
        if deposit > MAX_DEPOSIT or self.rnt[renter] < deposit:
            return
        self.rnt[renter] -= deposit
        self.rnt[CONTRACT_ADDRESS] += deposit
        o.update(state="Rented", renter=renter, max_likes=max_likes, deposit=deposit,
                 start=self.now, duration=days * DAY)

    def click(self, user, order, auth, t):
        o = self.order(order)
        if o is None:
            return
        t = self.now if t is None else t
        if self.last_t is not None and t < self.last_t:
            return
        self.last_t = t
        ok = self.state(o) == "Rented"
        p = self.policies
        if ok and p.authenticated_only and not auth:
            ok = False
        if ok and p.dedupe and any(u == user and oid == order and acc for u, oid, _, acc in self.clicks):
            ok = False
        if ok and p.rate_limit is not None:
            w = p.rate_limit.window
            recent = sum(1 for u, _, ct, _ in self.clicks if u == user and t - w < ct <= t)
            ok = recent < p.rate_limit.max_clicks
        self.clicks.append((user, order, t, ok))
        if ok:
            self.pending[order] = self.pending.get(order, 0) + 1
            if self.pending[order] >= self.k:
                self.flush(order)

    def flush(self, order):
        o = self.order(order)
        if o is None:
            return
        n = self.pending.get(order, 0)
        if n == 0:
            return
        room = o["max_likes"] - o["likes"] if self.state(o) == "Rented" else 0
        send = min(n, room)
        if send and not self.pay(EXHIBITOR, "increase_count"):
            return
        o["likes"] += send
        self.dropped += n - send
        del self.pending[order]

    def increase_count(self, caller, order, increment):
        if not self.pay(caller, "increase_count"):
            return
        o = self.order(order)
        if caller != EXHIBITOR or increment < 1 or not o or self.state(o) != "Rented":
            return
        if o["likes"] + increment <= o["max_likes"]:
            o["likes"] += increment

    def stop_rent(self, renter, order):
        o = self.order(order)
        if o and self.state(o) == "Rented" and o["renter"] == renter:
            self.flush(order)
        if not self.pay(renter, "stop_rent"):
            return
        if o and o["renter"] == renter and self.state(o) == "Rented":
            o["state"] = "Completed"

    def claim_lender(self, lender, order):
        if not self.pay(lender, "claim_nft_and_funds"):
            return
        o = self.order(order)
        if o and o["lender"] == lender and self.state(o) == "Completed" and not o["lender_claimed"]:
            rent, _ = self.settle(o)
            self.owner[o["token"]] = lender
            self.rnt[CONTRACT_ADDRESS] -= rent
            self.rnt[lender] += rent
            o["lender_claimed"] = True

    def claim_renter(self, renter, order):
        if not self.pay(renter, "claim_refunds"):
            return
        o = self.order(order)
        if o and o["renter"] == renter and self.state(o) == "Completed" and not o["renter_refunded"]:
            _, refund = self.settle(o)
            self.rnt[CONTRACT_ADDRESS] -= refund
            self.rnt[renter] += refund
            o["renter_refunded"] = True

    def advance_time(self, seconds):
        if seconds < 0:
            return
        for oid in sorted(self.pending):
            o = self.orders[oid]
            if o["state"] == "Rented" and o["start"] + o["duration"] <= self.now + seconds:
                self.flush(oid)
        self.now += seconds

    def transfer_nft(self, caller, token_id, to):
        if self.pay(caller, "transfer_nft") and self.owner.get(token_id) == caller and to in self.native and to != CONTRACT_ADDRESS:
            self.owner[token_id] = to

    def transfer_rnt(self, sender, to, amount):
        if not self.pay(sender, "transfer_rnt"):
            return
        if to in self.rnt and to != CONTRACT_ADDRESS and 0 <= amount <= self.rnt[sender]:
            self.rnt[sender] -= amount
            self.rnt[to] += amount

    # result -----------------------------------------------------------------------

    def result(self) -> dict[str, Any]:
        orders = []
        for i, o in enumerate(self.orders):
            state = self.state(o)
            rented = o["renter"] is not None
            rent, refund = self.settle(o)
            orders.append({
                "order_id": i,
                "state": state,
                "like_count": o["likes"] if rented else None,
                "deposit": o["deposit"] if rented else None,
                "settlement": {"final_rent": rent, "refund": refund} if state == "Completed" else None,
            })
        return {
            "rnt": dict(sorted(self.rnt.items())),
            "native": dict(sorted(self.native.items())),
            "tokens": dict(sorted(self.owner.items())),
            "orders": orders,
            "dropped_likes": self.dropped,
        }


def replay_oracle(
    scenario: Scenario,
    batch_k: int = 1,
    policies: Optional[PolicySet] = None,
    profile: ChainProfile = ETHEREUM,
    schedule: Optional[Mapping[str, int]] = None,
) -> dict[str, Any]:
    """Expected balances, token owners, like counts and settlements."""
    r = _Replay(
        profile,
        schedule if schedule is not None else default_gas_schedule(),
        batch_k,
        policies if policies is not None else PolicySet(),
    )
    for step in scenario:
        getattr(r, step.name)(**step.kwargs)
    return r.result()


def comparable(report: RunReport) -> dict[str, Any]:
    """Project an engine report onto the oracle's output shape."""
    return {
        "rnt": {a: b["rnt"] for a, b in report.balances.items()},
        "native": {a: b["native"] for a, b in report.balances.items()},
        "tokens": dict(report.tokens),
        "orders": [
            {k: o[k] for k in ("order_id", "state", "like_count", "deposit", "settlement")}
            for o in report.orders
        ],
        "dropped_likes": report.dropped_likes,
    }

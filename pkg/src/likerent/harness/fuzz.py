"""Seeded random step sequences with invariant checks after every step."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from likerent.errors import SimError
from likerent.exhibitor import PolicySet, RateLimit
from likerent.harness.runner import DEPLOYER, EXHIBITOR, World
from likerent.harness.scenario import Scenario, Step
from likerent.rental import TRANSITIONS, OrderState

USERS = ("a0", "a1", "a2", "a3")
CLICKERS = tuple(f"u{i}" for i in range(8))
TOKENS = (1, 2, 3)


def random_scenario(rng: random.Random, max_ops: int, k: int = 1, policies: Optional[PolicySet] = None) -> Scenario:
    """Mostly plausible steps with a steady share of invalid ones mixed in.

    A shadow world follows along so that most arguments (token owners, order
    parties, affordable deposits) fit the current state; about a quarter of
    the picks ignore it and are random.
    """
    shadow = World(batch_k=k, policies=policies or PolicySet())
    steps: Scenario = []

    def emit(step: Step) -> None:
        steps.append(step)
        try:
            shadow.apply(step)
        except SimError:
            pass

    for user in USERS:
        if rng.random() < 0.9:
            native = rng.choice((10**16, 10**18, 10**18, 10**20)) if rng.random() < 0.95 else 0
            emit(Step.make("open_account", address=user, native=native, rnt=rng.randint(0, 400)))
    for tid in TOKENS:
        emit(Step.make("mint_nft", owner=rng.choice(USERS), token_id=tid))
    for _ in range(rng.randint(max(1, max_ops // 2), max(1, max_ops))):
        emit(_random_step(rng, shadow))
    return steps


def _random_step(rng: random.Random, world: World) -> Step:
    orders = world.contract.orders
    fuzzy = rng.random() < 0.25

    def who() -> str:
        return rng.choice(USERS) if rng.random() < 0.93 else rng.choice((EXHIBITOR, DEPLOYER, "ghost"))

    def pick(state: Optional[OrderState] = None):
        cands = [o for o in orders if state is None or world.contract.observe_expiry(o.order_id) is state]
        if fuzzy or not cands:
            return None
        return rng.choice(cands)

    def any_order() -> int:
        return rng.randrange(len(orders) + 1) if rng.random() < 0.95 else rng.choice((-1, 99))

    kind = rng.choices(
        ("lend", "stop_lend", "rent", "click", "flush", "increase_count", "stop_rent",
         "claim_lender", "claim_renter", "advance_time", "transfer_nft", "transfer_rnt",
         "mint_rnt", "open_account", "mint_nft"),
        weights=(8, 2, 8, 35, 2, 3, 5, 6, 6, 10, 2, 2, 2, 1, 1),
    )[0]
    if kind == "click" and not fuzzy and pick(OrderState.RENTED) is None:
        # nothing to click on yet: push the lifecycle forward instead
        kind = "rent" if pick(OrderState.LISTED) is not None else "lend"
    if kind == "lend":
        tid = rng.choice(TOKENS + (9,))
        known = tid in world.tokens
        lender = world.tokens.owner_of(tid) if known and not fuzzy else who()
        return Step.make("lend", lender=lender, token_id=tid,
                         price_per_like=rng.choice((0, 1, 2, 3, 5) if fuzzy else (1, 2, 3, 5)),
                         max_days=rng.choice((0, 1, 2, 5) if fuzzy else (1, 2, 5)))
    if kind == "stop_lend":
        o = pick(OrderState.LISTED)
        return Step.make("stop_lend", lender=o.lender if o else who(), order=o.order_id if o else any_order())
    if kind == "rent":
        o = pick(OrderState.LISTED)
        if o is None:
            return Step.make("rent", renter=who(), order=any_order(), days=rng.choice((-1, 0, 1, 2, 3, 6)),
                             max_likes=rng.choice((-2, 0, 1, 3, 10, 40, 2**255)))
        renter = rng.choice([u for u in USERS if u != o.lender])
        budget = world.ledger.account(renter).rnt_balance if world.ledger.has_account(renter) else 0
        max_likes = max(1, min(rng.choice((1, 3, 10, 40)), budget // o.price_per_like))
        return Step.make("rent", renter=renter, order=o.order_id,
                         days=rng.randint(1, o.max_duration // 86_400), max_likes=max_likes)
    if kind == "click":
        o = pick(OrderState.RENTED)
        return Step.make("click", user=rng.choice(CLICKERS), order=o.order_id if o else any_order(),
                         auth=rng.random() < 0.9)
    if kind == "flush":
        o = pick()
        return Step.make("flush", order=o.order_id if o else any_order())
    if kind == "increase_count":
        o = pick(OrderState.RENTED)
        caller = EXHIBITOR if rng.random() < 0.6 else who()
        return Step.make("increase_count", caller=caller, order=o.order_id if o else any_order(),
                         increment=rng.choice((0, 1, 1, 2, 7)))
    if kind == "stop_rent":
        o = pick(OrderState.RENTED)
        return Step.make("stop_rent", renter=o.agreement.renter if o else who(),
                         order=o.order_id if o else any_order())
    if kind == "claim_lender":
        o = pick(OrderState.COMPLETED)
        return Step.make("claim_lender", lender=o.lender if o else who(), order=o.order_id if o else any_order())
    if kind == "claim_renter":
        o = pick(OrderState.COMPLETED)
        return Step.make("claim_renter", renter=o.agreement.renter if o else who(),
                         order=o.order_id if o else any_order())
    if kind == "advance_time":
        return Step.make("advance_time", seconds=rng.choice((-5, 0, 1, 30, 61, 3600, 43_200, 86_399, 86_400, 172_800)))
    if kind == "transfer_nft":
        return Step.make("transfer_nft", caller=who(), token_id=rng.choice(TOKENS), to=who())
    if kind == "transfer_rnt":
        return Step.make("transfer_rnt", sender=who(), to=who(), amount=rng.choice((-1, 0, 5, 50, 1000)))
    if kind == "mint_rnt":
        return Step.make("mint_rnt", to=who(), amount=rng.randint(0, 200))
    if kind == "open_account":
        return Step.make("open_account", address=who(), native=10**18, rnt=rng.randint(0, 100))
    return Step.make("mint_nft", owner=who(), token_id=rng.choice(TOKENS + (4,)))


def random_config(rng: random.Random) -> tuple[int, PolicySet]:
    k = rng.choice((1, 1, 2, 3, 10))
    policies = PolicySet(
        authenticated_only=rng.random() < 0.8,
        dedupe=rng.random() < 0.7,
        rate_limit=RateLimit(rng.choice((1, 2, 5)), rng.choice((1, 60, 3600))) if rng.random() < 0.6 else None,
    )
    return k, policies


# -- invariants -----------------------------------------------------------------------


class InvariantViolation(AssertionError):
    def __init__(self, name: str, detail: str) -> None:
        super().__init__(f"{name}: {detail}")
        self.name = name


class InvariantChecker:
    """Tracks what must hold between consecutive steps of one world."""

    def __init__(self, world: World) -> None:
        self.world = world
        self.states: dict[int, OrderState] = {}
        self.flags: dict[int, tuple[bool, bool]] = {}
        self.tokens = set(world.tokens.token_ids())
        self.seen_tx = 0
        self.last_ts = 0

    def check(self, step: Optional[Step] = None) -> None:
        w = self.world
        ledger, contract, tokens = w.ledger, w.contract, w.tokens

        def fail(name: str, detail: str) -> None:
            raise InvariantViolation(name, detail)

        if ledger.total_native() + ledger.gas_burned != ledger.native_minted:
            fail("native_conservation", f"{ledger.total_native()} + {ledger.gas_burned} != {ledger.native_minted}")
        if ledger.total_rnt() != ledger.rnt_minted:
            fail("rnt_conservation", f"{ledger.total_rnt()} != {ledger.rnt_minted}")
        if any(a.native_balance < 0 or a.rnt_balance < 0 for a in ledger.accounts()):
            fail("no_overdraft", "negative balance")

        ids = set(tokens.token_ids())
        if step is not None and step.name == "mint_nft":
            if not self.tokens <= ids or len(ids - self.tokens) > 1:
                fail("nft_conservation", f"{sorted(self.tokens)} -> {sorted(ids)}")
        elif ids != self.tokens:
            fail("nft_conservation", f"{sorted(self.tokens)} -> {sorted(ids)}")
        self.tokens = ids
        for tid in ids:
            if not ledger.has_account(tokens.owner_of(tid)):
                fail("custody", f"token {tid} owned by unknown {tokens.owner_of(tid)}")

        escrowed_tokens: list[int] = []
        for order in contract.orders:
            oid, ag = order.order_id, order.agreement
            prev = self.states.get(oid, OrderState.LISTED)
            if order.state is not prev and (prev, order.state) not in TRANSITIONS:
                fail("state_machine", f"order {oid}: {prev.value} -> {order.state.value}")
            self.states[oid] = order.state
            flags = (order.lender_claimed, bool(ag and ag.renter_refunded))
            old = self.flags.get(oid, (False, False))
            if old[0] > flags[0] or old[1] > flags[1]:
                fail("state_machine", f"order {oid}: claim flag reverted")
            if any(flags) and order.state is not OrderState.COMPLETED:
                fail("state_machine", f"order {oid}: claimed while {order.state.value}")
            self.flags[oid] = flags
            if (order.state is OrderState.LISTED) != (ag is None) and order.state is not OrderState.CANCELLED:
                fail("state_machine", f"order {oid}: agreement presence vs {order.state.value}")

            open_ = order.state in (OrderState.LISTED, OrderState.RENTED) or (
                order.state is OrderState.COMPLETED and not order.lender_claimed
            )
            if open_:
                escrowed_tokens.append(order.token_id)
                if tokens.owner_of(order.token_id) != contract.address:
                    fail("custody", f"order {oid}: token {order.token_id} not in escrow")
            if ag is None:
                continue
            if tokens.owner_of(order.token_id) == ag.renter and open_:
                fail("custody", f"order {oid}: renter holds the token")
            if not 0 <= ag.like_count <= ag.max_like_count:
                fail("solvency", f"order {oid}: like_count {ag.like_count} > {ag.max_like_count}")
            if ag.deposit != ag.max_like_count * order.price_per_like:
                fail("solvency", f"order {oid}: deposit {ag.deposit}")
            if not 0 < ag.duration <= order.max_duration:
                fail("solvency", f"order {oid}: duration {ag.duration}")
            s = ag.settlement
            if order.state is OrderState.COMPLETED:
                if s is None:
                    fail("solvency", f"order {oid}: completed without settlement")
                if s.final_rent + s.refund != ag.deposit or s.final_rent != ag.like_count * order.price_per_like:
                    fail("solvency", f"order {oid}: settlement {s} vs deposit {ag.deposit}")
        if len(escrowed_tokens) != len(set(escrowed_tokens)):
            fail("custody", f"token in two open orders: {escrowed_tokens}")
        for tid in ids:
            if tokens.owner_of(tid) == contract.address and tid not in escrowed_tokens:
                fail("custody", f"token {tid} stuck in contract")

        held = ledger.account(contract.address).rnt_balance
        if held != contract.escrowed():
            fail("escrow_conservation", f"contract holds {held}, owes {contract.escrowed()}")

        log = ledger.tx_log
        for rec in log[self.seen_tx:]:
            if rec.timestamp < self.last_ts:
                fail("time_monotonic", f"tx {rec.seq} at {rec.timestamp} < {self.last_ts}")
            self.last_ts = rec.timestamp
            if rec.op_name == "increase_count" and rec.ok:
                ag = contract.order(rec.args[0]).agreement
                if rec.timestamp >= ag.end_time:
                    fail("no_like_after_end", f"tx {rec.seq} at {rec.timestamp} >= {ag.end_time}")
            if rec.fee_wei not in (0, rec.gas_used * ledger.gas_price_wei):
                fail("gas_accounting", f"tx {rec.seq} fee {rec.fee_wei}")
        self.seen_tx = len(log)

        for oid, n in w.exhibitor.pending.items():
            if n >= w.exhibitor.k and contract.order(oid).state is OrderState.RENTED:
                # only a failed gas payment can leave a full batch behind
                if w.ledger.account(EXHIBITOR).native_balance >= ledger.fee_for("increase_count"):
                    fail("batching", f"order {oid}: {n} pending with k={w.exhibitor.k}")


# -- driver -------------------------------------------------------------------------------


@dataclass
class Violation:
    seed: int
    sequence: int
    invariant: str
    detail: str
    step_index: int
    steps: Scenario
    batch_k: int
    policies: PolicySet

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sequence": self.sequence,
            "invariant": self.invariant,
            "detail": self.detail,
            "step_index": self.step_index,
            "batch_k": self.batch_k,
            "steps": [s.to_json() for s in self.steps],
        }


@dataclass
class FuzzReport:
    seed: int
    sequences: int
    steps_run: int = 0
    step_errors: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sequences": self.sequences,
            "steps_run": self.steps_run,
            "step_errors": self.step_errors,
            "violations": [v.to_dict() for v in self.violations],
        }


WorldFactory = Callable[[int, PolicySet], World]


def _default_world(k: int, policies: PolicySet) -> World:
    return World(batch_k=k, policies=policies)


def check_sequence(
    steps: Scenario, k: int, policies: PolicySet, make_world: WorldFactory = _default_world
) -> tuple[Optional[tuple[int, InvariantViolation]], int]:
    """Run ``steps`` on a fresh world; return the first violation and the error count."""
    world = make_world(k, policies)
    checker = InvariantChecker(world)
    errors = 0
    try:
        checker.check()
    except InvariantViolation as exc:
        return (-1, exc), errors
    for i, step in enumerate(steps):
        try:
            world.apply(step)
        except SimError:
            errors += 1
        try:
            checker.check(step)
        except InvariantViolation as exc:
            return (i, exc), errors
    return None, errors


def minimize(steps: Scenario, k: int, policies: PolicySet, invariant: str,
             make_world: WorldFactory = _default_world) -> Scenario:
    """Greedily drop steps while the same invariant still breaks."""

    def still_fails(candidate: Scenario) -> bool:
        found, _ = check_sequence(candidate, k, policies, make_world)
        return found is not None and found[1].name == invariant

    steps = list(steps)
    changed = True
    while changed:
        changed = False
        i = len(steps) - 1
        while i >= 0:
            candidate = steps[:i] + steps[i + 1:]
            if still_fails(candidate):
                steps = candidate
                changed = True
            i -= 1
    return steps


def sequence_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"likerent:{seed}:{index}")


def fuzz(seed: int, n_sequences: int, max_ops: int = 40,
         make_world: WorldFactory = _default_world) -> FuzzReport:
    report = FuzzReport(seed, n_sequences)
    for i in range(n_sequences):
        rng = sequence_rng(seed, i)
        k, policies = random_config(rng)
        steps = random_scenario(rng, max_ops, k, policies)
        found, errors = check_sequence(steps, k, policies, make_world)
        report.step_errors += errors
        if found is None:
            report.steps_run += len(steps)
            continue
        idx, exc = found
        report.steps_run += idx + 1
        report.violations.append(
            Violation(seed, i, exc.name, str(exc), idx,
                      minimize(steps[: idx + 1], k, policies, exc.name, make_world), k, policies)
        )
    return report

"""State-machine properties: hypothesis stateful runs plus an exhaustive small model."""

import itertools

import hypothesis.strategies as st
from hypothesis import HealthCheck, settings
from hypothesis.stateful import RuleBasedStateMachine, invariant, rule

from likerent.errors import SimError
from likerent.exhibitor import PolicySet
from likerent.harness.fuzz import InvariantChecker
from likerent.harness.runner import World
from likerent.harness.scenario import Step

ACTORS = ["alice", "bob", "exhibitor"]


def fresh_world():
    w = World(policies=PolicySet.none())
    for name, rnt in (("alice", 50), ("bob", 50)):
        w.ledger.open_account(name, 10**18, rnt)
    w.tokens.mint_nft("alice", 1)
    return w


class RentalMachine(RuleBasedStateMachine):
    def __init__(self):
        super().__init__()
        self.world = fresh_world()
        self.checker = InvariantChecker(self.world)
        self.renter_paid = {}

    def _do(self, step):
        try:
            self.world.apply(step)
        except SimError:
            pass
        self.checker.check(step)

    @rule(lender=st.sampled_from(ACTORS), price=st.integers(0, 4), days=st.integers(0, 3))
    def lend(self, lender, price, days):
        self._do(Step.make("lend", lender=lender, token_id=1, price_per_like=price, max_days=days))

    @rule(lender=st.sampled_from(ACTORS), order=st.integers(0, 3))
    def stop_lend(self, lender, order):
        self._do(Step.make("stop_lend", lender=lender, order=order))

    @rule(renter=st.sampled_from(ACTORS), order=st.integers(0, 3), days=st.integers(-1, 4),
          max_likes=st.integers(-1, 30))
    def rent(self, renter, order, days, max_likes):
        self._do(Step.make("rent", renter=renter, order=order, days=days, max_likes=max_likes))

    @rule(caller=st.sampled_from(ACTORS), order=st.integers(0, 3), inc=st.integers(0, 12))
    def increase(self, caller, order, inc):
        self._do(Step.make("increase_count", caller=caller, order=order, increment=inc))

    @rule(renter=st.sampled_from(ACTORS), order=st.integers(0, 3))
    def stop_rent(self, renter, order):
        self._do(Step.make("stop_rent", renter=renter, order=order))

    @rule(who=st.sampled_from(ACTORS), order=st.integers(0, 3))
    def claim_lender(self, who, order):
        self._do(Step.make("claim_lender", lender=who, order=order))

    @rule(who=st.sampled_from(ACTORS), order=st.integers(0, 3))
    def claim_renter(self, who, order):
        self._do(Step.make("claim_renter", renter=who, order=order))

    @rule(seconds=st.sampled_from([0, 1, 3600, 86_399, 86_400, 200_000]))
    def advance(self, seconds):
        self._do(Step.make("advance_time", seconds=seconds))

    @invariant()
    def settlement_totality(self):
        # once both sides have claimed, the renter is down exactly final_rent
        for o in self.world.contract.orders:
            ag = o.agreement
            if ag and o.lender_claimed and ag.renter_refunded:
                s = ag.settlement
                assert s.final_rent == ag.like_count * o.price_per_like
                assert ag.deposit - s.refund == s.final_rent


RentalMachine.TestCase.settings = settings(
    max_examples=60, stateful_step_count=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
TestRentalMachine = RentalMachine.TestCase


# Small alphabet covering every transition and every wrong-state call.
ALPHABET = [
    Step.make("lend", lender="alice", token_id=1, price_per_like=2, max_days=1),
    Step.make("stop_lend", lender="alice", order=0),
    Step.make("rent", renter="bob", order=0, days=1, max_likes=3),
    Step.make("increase_count", caller="exhibitor", order=0, increment=2),
    Step.make("stop_rent", renter="bob", order=0),
    Step.make("claim_lender", lender="alice", order=0),
    Step.make("claim_renter", renter="bob", order=0),
    Step.make("advance_time", seconds=86_400),
]


def test_exhaustive_small_model():
    """Every sequence of up to 5 ops from the alphabet keeps all invariants."""
    seen_states = set()
    for n in range(6):
        for seq in itertools.product(ALPHABET, repeat=n):
            w = fresh_world()
            checker = InvariantChecker(w)
            for step in seq:
                try:
                    w.apply(step)
                except SimError:
                    pass
                checker.check(step)
            for o in w.contract.orders:
                seen_states.add((o.state.value, o.lender_claimed, bool(o.agreement and o.agreement.renter_refunded)))
    assert {s[0] for s in seen_states} == {"Listed", "Rented", "Completed", "Cancelled"}
    assert ("Completed", True, True) in seen_states

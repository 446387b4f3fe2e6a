import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from likerent.errors import OutOfOrderClick, ParseError
from likerent.exhibitor import (
    ACCEPTED,
    DUPLICATE,
    INACTIVE_ORDER,
    RATE_LIMITED,
    UNAUTHENTICATED,
    ClickEvent,
    ClickHistory,
    Exhibitor,
    FraudVerdict,
    PolicySet,
    RateLimit,
    apply_policies,
    read_click_stream,
    simulate_click_stream,
    write_click_stream,
)


def click(user, t, order=0, auth=True):
    return ClickEvent(user, order, t, auth)


def history_of(*events):
    h = ClickHistory()
    for ev in events:
        h.record(FraudVerdict(ev))
    return h


class TestPolicies:
    def test_empty_policy_set_accepts_everything(self):
        h = history_of(click("u", 0))
        v = apply_policies(click("u", 0, auth=False), PolicySet.none(), h)
        assert v.accepted and v.reason == ACCEPTED

    def test_unauthenticated(self):
        v = apply_policies(click("u", 0, auth=False), PolicySet())
        assert v.reason == UNAUTHENTICATED

    def test_duplicate(self):
        h = history_of(click("u", 0))
        assert apply_policies(click("u", 5), PolicySet(), h).reason == DUPLICATE
        assert apply_policies(click("u", 5, order=1), PolicySet(), h).accepted

    def test_auth_checked_before_dedupe(self):
        h = history_of(click("u", 0))
        assert apply_policies(click("u", 1, auth=False), PolicySet(), h).reason == UNAUTHENTICATED

    def test_sixth_click_in_window_is_rate_limited(self):
        pol = PolicySet(dedupe=False, rate_limit=RateLimit(5, 60))
        h = history_of(*(click("u", t) for t in range(5)))
        assert apply_policies(click("u", 5), pol, h).reason == RATE_LIMITED
        # the oldest click leaves the window at t=60
        assert apply_policies(click("u", 60), pol, h).accepted

    def test_policies_do_not_mutate_history(self):
        h = history_of(click("u", 0))
        apply_policies(click("v", 1), PolicySet(), h)
        assert ("v", 0) not in h.liked

    @pytest.mark.parametrize("text,expected", [
        ("", PolicySet.none()),
        ("auth", PolicySet(True, False, None)),
        ("dedupe,rate", PolicySet(False, True, RateLimit(3, 10))),
    ])
    def test_parse(self, text, expected):
        assert PolicySet.parse(text, rate=3, window=10) == expected

    def test_parse_unknown(self):
        with pytest.raises(ParseError):
            PolicySet.parse("magic")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.integers(0, 5)), max_size=40),
       st.integers(1, 4), st.integers(1, 20))
def test_rate_limit_matches_brute_force(gaps, r, w):
    pol = PolicySet(authenticated_only=False, dedupe=False, rate_limit=RateLimit(r, w))
    h = ClickHistory()
    seen = []
    t = 0
    for user, gap in gaps:
        t += gap
        ev = click(user, t)
        earlier = sum(1 for u, s in seen if u == user and t - w < s <= t)
        v = apply_policies(ev, pol, h)
        assert v.accepted == (earlier < r)
        h.record(v)
        seen.append((user, t))


class TestBatching:
    @pytest.fixture(autouse=True)
    def _factory(self, make_env):
        self.make_env = make_env

    def make(self, k, max_likes=400):
        env = self.make_env(k=k, policies=PolicySet.none())
        oid = env.rented(max_likes=max_likes)
        return env, oid

    @pytest.mark.parametrize("k,txs", [(1, 100), (10, 10)])
    def test_hundred_likes(self, k, txs):
        env, oid = self.make(k)
        for i in range(100):
            env.exhibitor.submit_click(click(f"u{i}", i, oid))
        assert env.exhibitor.flush_txs == txs
        assert env.contract.order(oid).agreement.like_count == 100
        incs = [r for r in env.ledger.tx_log if r.op_name == "increase_count"]
        assert len(incs) == txs

    def test_remainder_flushed(self):
        env, oid = self.make(10)
        for i in range(17):
            env.exhibitor.submit_click(click(f"u{i}", i, oid))
        assert env.exhibitor.pending == {oid: 7}
        assert env.exhibitor.flush_pending(oid).flushed == 7
        assert env.contract.order(oid).agreement.like_count == 17

    def test_flush_with_nothing_pending_sends_no_tx(self):
        env, oid = self.make(10)
        n = len(env.ledger.tx_log)
        assert env.exhibitor.flush_pending(oid).flushed == 0
        assert len(env.ledger.tx_log) == n

    def test_flush_trims_at_cap(self):
        env, oid = self.make(10, max_likes=5)
        env.contract.increase_count("exhibitor", oid, 2)
        for i in range(5):
            env.exhibitor.submit_click(click(f"u{i}", i, oid))
        res = env.exhibitor.flush_pending(oid)
        assert (res.flushed, res.dropped) == (3, 2)
        assert env.contract.order(oid).agreement.like_count == 5
        assert env.exhibitor.dropped == 2 and env.exhibitor.pending == {}

    def test_flush_keeps_pending_when_gas_unaffordable(self):
        env, oid = self.make(10)
        env.exhibitor.submit_click(click("u", 0, oid))
        env.ledger.account("exhibitor").native_balance = 0
        assert env.exhibitor.flush_pending(oid).flushed == 0
        assert env.exhibitor.pending == {oid: 1}

    def test_flush_expiring(self):
        env, oid = self.make(10)
        env.exhibitor.submit_click(click("u", 0, oid))
        end = env.contract.order(oid).agreement.end_time
        assert env.exhibitor.flush_expiring(end - 1).flushed == 0
        assert env.exhibitor.flush_expiring(end).flushed == 1

    def test_flush_all(self):
        env, oid = self.make(10)
        env.exhibitor.submit_click(click("u", 0, oid))
        assert env.exhibitor.flush_all().flushed == 1

    def test_k_must_be_positive(self, env):
        with pytest.raises(ValueError):
            Exhibitor(env.contract, 0)


class TestSubmit:
    def test_rejected_clicks_cost_no_gas(self, make_env):
        env = make_env(k=1)
        oid = env.rented()
        bal = env.ledger.account("exhibitor").native_balance
        env.exhibitor.submit_click(click("u", 0, oid))
        env.exhibitor.submit_click(click("u", 1, oid))
        env.exhibitor.submit_click(click("v", 2, oid, auth=False))
        assert env.exhibitor.verdicts == {ACCEPTED: 1, DUPLICATE: 1, UNAUTHENTICATED: 1}
        assert env.ledger.account("exhibitor").native_balance == bal - env.fee("increase_count")

    def test_click_on_listed_order_is_inactive(self, env):
        oid = env.listed()
        assert env.exhibitor.submit_click(click("u", 0, oid)).reason == INACTIVE_ORDER

    def test_click_after_expiry_is_inactive(self, env):
        oid = env.rented(days=1)
        env.ledger.advance_time(86_400)
        assert env.exhibitor.submit_click(click("u", 86_400, oid)).reason == INACTIVE_ORDER

    def test_out_of_order(self, env):
        oid = env.rented()
        env.exhibitor.submit_click(click("u", 10, oid))
        with pytest.raises(OutOfOrderClick):
            env.exhibitor.submit_click(click("v", 9, oid))

    def test_ingest(self, make_env):
        env = make_env(k=1)
        oid = env.rented()
        verdicts = env.exhibitor.ingest([click("a", 0, oid), click("b", 1, oid)])
        assert all(v.accepted for v in verdicts)


class TestStreams:
    def test_deterministic(self):
        a = simulate_click_stream(7, 50, 200, (0.6, 0.3, 0.1))
        assert a == simulate_click_stream(7, 50, 200, (0.6, 0.3, 0.1))
        assert a != simulate_click_stream(8, 50, 200, (0.6, 0.3, 0.1))

    def test_all_genuine_distinct_users(self):
        evs = simulate_click_stream(1, 100, 100)
        assert len({e.user_id for e in evs}) == 100
        ts = [e.timestamp for e in evs]
        assert ts == sorted(ts)

    def test_bot_burst_single_user_same_second(self):
        evs = simulate_click_stream(1, 10, 20, (0, 0, 1), start=500)
        assert {e.user_id for e in evs} == {"bot-0"}
        assert {e.timestamp for e in evs} == {500}

    def test_negative_counts(self):
        with pytest.raises(ValueError):
            simulate_click_stream(1, -1, 5)

    def test_jsonl_round_trip(self, tmp_path):
        evs = simulate_click_stream(3, 5, 12, (0.5, 0.3, 0.2), unauthenticated_rate=0.3)
        path = tmp_path / "clicks.jsonl"
        write_click_stream(evs, path)
        assert list(read_click_stream(path)) == evs

    def test_jsonl_bad_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"user": "a", "order": 0, "t": 1, "auth": true}\n\n{"user": "b"}\n')
        with pytest.raises(ParseError, match=":3:"):
            list(read_click_stream(path))

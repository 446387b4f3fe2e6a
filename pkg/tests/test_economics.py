import json
import math
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from likerent.errors import InvalidCounts, NonPositiveInput, UnknownOp
from likerent.economics import (
    BINANCE_LIKE,
    BUNDLED_PROFILES,
    ETHEREUM,
    ChainProfile,
    GasSchedule,
    break_even_price_per_like,
    compare_chains,
    cost_report_from_log,
    default_gas_schedule,
    gas_for_usd,
    order_lifecycle_cost,
    round_cents,
    trust_cost_curve,
    tx_cost_usd,
)

SCHED = default_gas_schedule()


@pytest.mark.parametrize("op,usd", [
    ("increase_count", "0.45"),
    ("deploy", "28.08"),
    ("create_lend_order", "2.06"),
    ("rent", "2.00"),
    ("stop_rent", "0.89"),
    ("claim_refunds", "0.89"),
])
def test_calibrated_costs(op, usd):
    assert round_cents(tx_cost_usd(SCHED[op], ETHEREUM)) == Decimal(usd)


def test_one_gas_rounds_to_zero_cents():
    cost = tx_cost_usd(1, ETHEREUM)
    assert 0 < cost < Decimal("0.01")
    assert round_cents(cost) == Decimal("0.00")


def test_zero_gas_rejected():
    with pytest.raises(NonPositiveInput):
        tx_cost_usd(0, ETHEREUM)


def test_round_half_up():
    assert round_cents(Decimal("0.005")) == Decimal("0.01")
    assert round_cents(Decimal("0.0049")) == Decimal("0.00")


def test_range_invariant():
    for op, gas in SCHED.items():
        if op == "deploy":
            continue
        assert Decimal("0.445") <= tx_cost_usd(gas, ETHEREUM) <= Decimal("2.065"), op


@pytest.mark.parametrize("op", sorted(SCHED))
def test_inversion_round_trip(op):
    assert abs(gas_for_usd(tx_cost_usd(SCHED[op], ETHEREUM), ETHEREUM) - SCHED[op]) <= 1


@given(st.integers(1, 10**7), st.integers(1, 50), st.integers(1, 5000))
def test_linearity(gas, gwei, usd):
    p = ChainProfile("x", gwei, usd)
    base = tx_cost_usd(gas, p)
    assert tx_cost_usd(2 * gas, p) == 2 * base
    assert tx_cost_usd(gas, ChainProfile("y", 2 * gwei, usd)) == 2 * base
    assert tx_cost_usd(gas, ChainProfile("z", gwei, 3 * usd)) == 3 * base


class TestProfiles:
    @pytest.mark.parametrize("kw", [
        {"gas_price_gwei": 0, "eth_usd": 1}, {"gas_price_gwei": 1, "eth_usd": -1},
        {"gas_price_gwei": 1, "eth_usd": 1, "rnt_usd": 0},
    ])
    def test_non_positive_rejected(self, kw):
        with pytest.raises(NonPositiveInput):
            ChainProfile("bad", **kw)

    def test_gas_price_wei(self):
        assert ETHEREUM.gas_price_wei == 7 * 10**9
        assert BINANCE_LIKE.gas_price_wei == 5 * 10**9

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps(ETHEREUM.to_dict()))
        assert ChainProfile.load(path) == ETHEREUM
        assert set(BUNDLED_PROFILES) == {"ethereum", "binance-like"}

    def test_schedule_load_merges_defaults(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(json.dumps({"rent": 1234}))
        sched = GasSchedule.load(path)
        assert sched.gas("rent") == 1234
        assert sched.gas("deploy") == SCHED["deploy"]
        with pytest.raises(UnknownOp):
            sched.gas("teleport")


class TestLifecycle:
    def test_lender(self):
        r = order_lifecycle_cost(ETHEREUM, SCHED, "lender")
        assert round_cents(r.total_usd) == Decimal("2.95")

    def test_renter_in_range(self):
        total = order_lifecycle_cost(ETHEREUM, SCHED, "renter").total_usd
        assert Decimal(2) <= total <= Decimal(3)

    @pytest.mark.parametrize("k,usd", [(1, "45.00"), (10, "4.50")])
    def test_exhibitor(self, k, usd):
        r = order_lifecycle_cost(ETHEREUM, SCHED, "exhibitor", likes=100, k=k)
        assert round_cents(r.total_usd) == Decimal(usd)

    @given(st.integers(1, 500), st.integers(1, 50))
    def test_batching_law(self, likes, k):
        c1 = tx_cost_usd(SCHED["increase_count"], ETHEREUM)
        r = order_lifecycle_cost(ETHEREUM, SCHED, "exhibitor", likes=likes, k=k)
        assert r.total_usd == math.ceil(likes / k) * c1

    def test_bad_inputs(self):
        with pytest.raises(NonPositiveInput):
            order_lifecycle_cost(ETHEREUM, SCHED, "exhibitor", likes=-1)
        with pytest.raises(NonPositiveInput):
            order_lifecycle_cost(ETHEREUM, SCHED, "janitor")

    def test_report_dict(self):
        d = order_lifecycle_cost(ETHEREUM, SCHED, "lender").to_dict()
        assert d["role_usd"]["lender"] == "2.95"
        assert d["lender_profit_usd"] == "-2.95"


class TestBreakEven:
    @pytest.mark.parametrize("likes,price", [(10, 1), (2, 2), (1, 3)])
    def test_examples(self, likes, price):
        assert break_even_price_per_like(ETHEREUM, SCHED, likes) == price

    @pytest.mark.parametrize("likes", [1, 2, 3, 7, 50, 1000])
    def test_smallest_price_brute_force(self, likes):
        cost = order_lifecycle_cost(ETHEREUM, SCHED, "lender").total_usd
        p = break_even_price_per_like(ETHEREUM, SCHED, likes)
        ok = [q for q in range(1, 10) if q * likes >= cost]
        assert p == ok[0]

    def test_rich_rnt(self):
        p = ChainProfile("x", 7, "1597.70", rnt_usd=100)
        assert break_even_price_per_like(p, SCHED, 1) == 1

    def test_zero_likes(self):
        with pytest.raises(NonPositiveInput):
            break_even_price_per_like(ETHEREUM, SCHED, 0)


class TestTrustCost:
    def test_example(self):
        c = trust_cost_curve(ETHEREUM, SCHED, 1000, 100, k=10)
        assert round_cents(c.counter_batched) == Decimal("4.50")
        assert round_cents(c.counter_unbatched) == Decimal("45.00")
        assert round_cents(c.full_metadata) == Decimal("503.28")
        assert c.factor > 100

    def test_degenerate_equality(self):
        sched = GasSchedule(SCHED, record_click_metadata=SCHED["increase_count"])
        c = trust_cost_curve(ETHEREUM, sched, 40, 40, k=1)
        assert c.trust_cost == 0 and c.factor == 1

    def test_zero_verified(self):
        c = trust_cost_curve(ETHEREUM, SCHED, 10, 0)
        assert c.counter_batched == c.counter_unbatched == 0
        assert c.factor is None

    @pytest.mark.parametrize("total,verified,k", [(5, 6, 1), (5, -1, 1), (5, 5, 0)])
    def test_invalid(self, total, verified, k):
        with pytest.raises(InvalidCounts):
            trust_cost_curve(ETHEREUM, SCHED, total, verified, k)


class TestCompareChains:
    def test_ratio(self):
        r = compare_chains(SCHED, ETHEREUM, BINANCE_LIKE, "rent")
        assert abs(r - Decimal("27.94")) <= Decimal("0.01")
        assert r >= 20

    def test_op_independent(self):
        ratios = {compare_chains(SCHED, ETHEREUM, BINANCE_LIKE, op) for op in SCHED}
        assert len(ratios) == 1

    def test_identity(self):
        assert compare_chains(SCHED, ETHEREUM, ETHEREUM, "deploy") == 1


def test_cost_report_from_log(env):
    env.rented()
    rep = cost_report_from_log(env.ledger.tx_log, ETHEREUM, rnt_income=0)
    ops = {i.op_name: i.count for i in rep.items}
    assert ops == {"deploy": 1, "create_lend_order": 1, "rent": 1}
    assert rep.role_totals()["deployer"] == tx_cost_usd(SCHED["deploy"], ETHEREUM)

"""Off-chain exhibitor: click fraud filtering and batched like counting.

Clicks pass through the policies in a fixed order (authentication, duplicate
check, per-user rate limit). Accepted clicks accumulate per order and are
pushed on chain with one ``increase_count`` call per ``k`` likes.
"""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from likerent.errors import InsufficientGasFunds, OutOfOrderClick, ParseError
from likerent.rental import OrderState, RentalContract

ACCEPTED = "none"
DUPLICATE = "duplicate"
RATE_LIMITED = "rate_limited"
UNAUTHENTICATED = "unauthenticated"
INACTIVE_ORDER = "inactive_order"
REASONS = (ACCEPTED, UNAUTHENTICATED, DUPLICATE, RATE_LIMITED, INACTIVE_ORDER)


@dataclass(frozen=True)
class ClickEvent:
    user_id: str
    order_id: int
    timestamp: int
    authenticated: bool = True


@dataclass(frozen=True)
class FraudVerdict:
    event: ClickEvent
    reason: str = ACCEPTED

    @property
    def accepted(self) -> bool:
        return self.reason == ACCEPTED


@dataclass(frozen=True)
class RateLimit:
    max_clicks: int = 5
    window: int = 60


@dataclass(frozen=True)
class PolicySet:
    authenticated_only: bool = True
    dedupe: bool = True
    rate_limit: Optional[RateLimit] = RateLimit()

    @classmethod
    def none(cls) -> "PolicySet":
        return cls(authenticated_only=False, dedupe=False, rate_limit=None)

    @classmethod
    def parse(cls, text: str, rate: int = 5, window: int = 60) -> "PolicySet":
        """Build from a comma list such as ``"auth,dedupe,rate"``."""
        names = {n.strip() for n in text.split(",") if n.strip()}
        unknown = names - {"auth", "dedupe", "rate"}
        if unknown:
            raise ParseError(f"unknown policies: {sorted(unknown)}")
        return cls(
            authenticated_only="auth" in names,
            dedupe="dedupe" in names,
            rate_limit=RateLimit(rate, window) if "rate" in names else None,
        )


class ClickHistory:
    """What the policies remember about earlier clicks."""

    def __init__(self) -> None:
        self.liked: set[tuple[str, int]] = set()
        self.recent: dict[str, list[int]] = defaultdict(list)

    def record(self, verdict: FraudVerdict) -> None:
        ev = verdict.event
        self.recent[ev.user_id].append(ev.timestamp)
        if verdict.accepted:
            self.liked.add((ev.user_id, ev.order_id))

    def clicks_in_window(self, user_id: str, now: int, window: int) -> int:
        stamps = self.recent.get(user_id, [])
        return bisect_right(stamps, now) - bisect_right(stamps, now - window)


def apply_policies(
    event: ClickEvent, policies: PolicySet, history: Optional[ClickHistory] = None
) -> FraudVerdict:
    """Judge one click without changing ``history``.

    The rate limit counts every earlier click by the same user inside the
    window ``(t - window, t]``, whatever its verdict was.
    """
    history = history or ClickHistory()
    if policies.authenticated_only and not event.authenticated:
        return FraudVerdict(event, UNAUTHENTICATED)
    if policies.dedupe and (event.user_id, event.order_id) in history.liked:
        return FraudVerdict(event, DUPLICATE)
    rl = policies.rate_limit
    if rl is not None:
        seen = history.clicks_in_window(event.user_id, event.timestamp, rl.window)
        if seen + 1 > rl.max_clicks:
            return FraudVerdict(event, RATE_LIMITED)
    return FraudVerdict(event)


@dataclass
class FlushResult:
    flushed: int = 0
    dropped: int = 0


@dataclass
class Exhibitor:
    contract: RentalContract
    k: int = 1
    policies: PolicySet = field(default_factory=PolicySet)
    pending: dict[int, int] = field(default_factory=dict)
    verdicts: Counter = field(default_factory=Counter)
    dropped: int = 0
    flush_txs: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("batch size k must be at least 1")
        self.history = ClickHistory()
        self._last_ts: Optional[int] = None

    @property
    def address(self) -> str:
        return self.contract.exhibitor

    def submit_click(self, event: ClickEvent) -> FraudVerdict:
        if self._last_ts is not None and event.timestamp < self._last_ts:
            raise OutOfOrderClick(f"t={event.timestamp} after t={self._last_ts}")
        if self.contract.observe_expiry(event.order_id) is not OrderState.RENTED:
            verdict = FraudVerdict(event, INACTIVE_ORDER)
        else:
            verdict = apply_policies(event, self.policies, self.history)
        self._last_ts = event.timestamp
        self.history.record(verdict)
        self.verdicts[verdict.reason] += 1
        if verdict.accepted:
            self.pending[event.order_id] = self.pending.get(event.order_id, 0) + 1
            if self.pending[event.order_id] >= self.k:
                self.flush_pending(event.order_id)
        return verdict

    def ingest(self, events: Iterable[ClickEvent]) -> list[FraudVerdict]:
        return [self.submit_click(ev) for ev in events]

    def flush_pending(self, order_id: int) -> FlushResult:
        """Push pending likes on chain, trimming anything above the like cap.

        Trimmed likes are dropped for good. If the exhibitor cannot afford the
        transaction the likes stay pending.
        """
        state = self.contract.observe_expiry(order_id)
        n = self.pending.get(order_id, 0)
        if n == 0:
            return FlushResult()
        room = 0
        if state is OrderState.RENTED:
            ag = self.contract.order(order_id).agreement
            room = ag.max_like_count - ag.like_count
        send = min(n, room)
        result = FlushResult(flushed=send, dropped=n - send)
        if send:
            try:
                self.contract.increase_count(self.address, order_id, send)
            except InsufficientGasFunds:
                return FlushResult()
            self.flush_txs += 1
        self.dropped += result.dropped
        del self.pending[order_id]
        return result

    def flush_all(self) -> FlushResult:
        total = FlushResult()
        for order_id in sorted(self.pending):
            r = self.flush_pending(order_id)
            total.flushed += r.flushed
            total.dropped += r.dropped
        return total

    def flush_expiring(self, deadline: int) -> FlushResult:
        """Flush every rented order whose rental ends at or before ``deadline``."""
        total = FlushResult()
        for order_id in sorted(self.pending):
            order = self.contract.order(order_id)
            if order.state is OrderState.RENTED and order.agreement.end_time <= deadline:
                r = self.flush_pending(order_id)
                total.flushed += r.flushed
                total.dropped += r.dropped
        return total


# -- click streams --------------------------------------------------------------


def simulate_click_stream(
    seed: int,
    n_users: int,
    n_clicks: int,
    fraud_mix: tuple[float, float, float] = (1.0, 0.0, 0.0),
    order_ids: tuple[int, ...] = (0,),
    start: int = 0,
    unauthenticated_rate: float = 0.0,
) -> list[ClickEvent]:
    """Seeded stream of genuine clicks, repeat clickers and bot bursts.

    ``fraud_mix`` gives the shares of (genuine, duplicate, bot) clicks. Genuine
    clicks come from fresh users while any remain; duplicates repeat an earlier
    user; bot clicks all come from one ``bot-0`` user within the same second.
    """
    if n_users < 0 or n_clicks < 0:
        raise ValueError("counts must be non-negative")
    rng = random.Random(seed)
    kinds = rng.choices(("genuine", "duplicate", "bot"), weights=fraud_mix, k=n_clicks)
    t = start
    fresh = iter(range(n_users))
    used: list[str] = []
    events = []
    for kind in kinds:
        if kind == "bot":
            user = "bot-0"
        elif kind == "duplicate" and used:
            user = rng.choice(used)
        else:
            idx = next(fresh, None)
            user = f"user-{idx if idx is not None else rng.randrange(max(n_users, 1))}"
            used.append(user)
        if kind != "bot":
            t += rng.randint(1, 30)
        auth = rng.random() >= unauthenticated_rate
        events.append(ClickEvent(user, rng.choice(order_ids), t, auth))
    return events


def read_click_stream(path: str | Path) -> Iterator[ClickEvent]:
    """Parse a JSON-lines file of ``{"user", "order", "t", "auth"}`` objects."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield ClickEvent(str(obj["user"]), int(obj["order"]), int(obj["t"]), bool(obj["auth"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc


def write_click_stream(events: Iterable[ClickEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps({"user": ev.user_id, "order": ev.order_id, "t": ev.timestamp, "auth": ev.authenticated}) + "\n")

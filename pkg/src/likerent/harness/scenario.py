"""Scenario files: one JSON object per line, each naming a ``step``."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from likerent.errors import ParseError

_REQ = object()

# step -> {field: (type, default)}; _REQ marks required fields
STEP_FIELDS: dict[str, dict[str, tuple[type, Any]]] = {
    "open_account": {"address": (str, _REQ), "native": (int, 0), "rnt": (int, 0)},
    "mint_nft": {"owner": (str, _REQ), "token_id": (int, _REQ), "metadata": (str, "")},
    "mint_rnt": {"to": (str, _REQ), "amount": (int, _REQ)},
    "lend": {"lender": (str, _REQ), "token_id": (int, _REQ), "price_per_like": (int, _REQ), "max_days": (int, _REQ)},
    "stop_lend": {"lender": (str, _REQ), "order": (int, _REQ)},
    "rent": {"renter": (str, _REQ), "order": (int, _REQ), "days": (int, _REQ), "max_likes": (int, _REQ)},
    "click": {"user": (str, _REQ), "order": (int, _REQ), "auth": (bool, True), "t": (int, None)},
    "flush": {"order": (int, _REQ)},
    "increase_count": {"caller": (str, _REQ), "order": (int, _REQ), "increment": (int, 1)},
    "stop_rent": {"renter": (str, _REQ), "order": (int, _REQ)},
    "claim_lender": {"lender": (str, _REQ), "order": (int, _REQ)},
    "claim_renter": {"renter": (str, _REQ), "order": (int, _REQ)},
    "advance_time": {"seconds": (int, _REQ)},
    "transfer_nft": {"caller": (str, _REQ), "token_id": (int, _REQ), "to": (str, _REQ)},
    "transfer_rnt": {"sender": (str, _REQ), "to": (str, _REQ), "amount": (int, _REQ)},
}

# Minting amounts are unsigned; everything else is checked when the step runs.
_UNSIGNED = {("open_account", "native"), ("open_account", "rnt"), ("mint_rnt", "amount")}


@dataclass(frozen=True)
class Step:
    name: str
    kwargs: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.kwargs[key]

    def to_json(self) -> str:
        return json.dumps({"step": self.name, **{k: v for k, v in self.kwargs.items() if v is not None}})

    @classmethod
    def make(cls, name: str, **kwargs: Any) -> "Step":
        return parse_step({"step": name, **kwargs})


Scenario = list[Step]


def _typed(name: str, key: str, value: Any, typ: type) -> Any:
    if typ is bool:
        ok = isinstance(value, bool)
    elif typ is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, typ)
    if not ok:
        raise ParseError(f"{name}.{key}: expected {typ.__name__}, got {value!r}")
    if (name, key) in _UNSIGNED and value < 0:
        raise ParseError(f"{name}.{key} must be non-negative")
    return value


def parse_step(obj: Any) -> Step:
    if not isinstance(obj, dict) or "step" not in obj:
        raise ParseError(f"not a step object: {obj!r}")
    name = obj["step"]
    fields = STEP_FIELDS.get(name)
    if fields is None:
        raise ParseError(f"unknown step {name!r}")
    extra = set(obj) - set(fields) - {"step"}
    if extra:
        raise ParseError(f"{name}: unexpected fields {sorted(extra)}")
    args = {}
    for key, (typ, default) in fields.items():
        if key in obj:
            value = _typed(name, key, obj[key], typ)
        elif default is _REQ:
            raise ParseError(f"{name}: missing field {key!r}")
        else:
            value = default
        args[key] = value
    return Step(name, args)


def parse_scenario(lines: Iterable[str], source: str = "<scenario>") -> Scenario:
    steps = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            steps.append(parse_step(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from exc
        except ParseError as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from exc
    return steps


def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh, str(path))
    except OSError as exc:
        raise ParseError(str(exc)) from exc


def dump_scenario(steps: Iterable[Step]) -> str:
    return "".join(step.to_json() + "\n" for step in steps)

"""Reference small-step interpreter for CFGs; the testing oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence, Union

from .cfg import Cfg, Kind
from .frontend import ast as A
from .semantics import DivisionByZero, Value, eval_expr, to_type

EXIT = "exit"
ASSERT_FAILED = "assert_failed"
DIVISION_BY_ZERO = "division_by_zero"
MAX_STEPS = "max_steps"

HavocKey = tuple
HavocSource = Union[Sequence[int], Callable[[HavocKey], int]]


class KeyedHavoc:
    """Deterministic havoc values keyed by ``(node, visit)`` or ``("init", var)``.

    Keying by node keeps a program and its slices in sync even when the
    slice drops some havoc instructions.
    """

    def __init__(self, seed: int, low: int = -20, high: int = 20):
        self.seed = seed
        self.low = low
        self.high = high
        self._cache: dict[HavocKey, int] = {}

    def __call__(self, key: HavocKey) -> int:
        if key not in self._cache:
            rng = random.Random(f"{self.seed}:{key!r}")
            self._cache[key] = rng.randint(self.low, self.high)
        return self._cache[key]


@dataclass
class ExecutionTrace:
    steps: list[int] = field(default_factory=list)
    stores: list[dict[str, Value]] = field(default_factory=list)
    assert_outcomes: list[tuple[int, bool]] = field(default_factory=list)
    status: str = EXIT
    error_node: Optional[int] = None
    final_store: dict[str, Value] = field(default_factory=dict)
    havocs_used: int = 0
    watched: dict[int, list[dict[str, Value]]] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(not ok for _, ok in self.assert_outcomes)

    def visits(self, node: int) -> list[dict[str, Value]]:
        return self.watched.get(node, [])


def interpret(cfg: Cfg, havoc: HavocSource = (), max_steps: int = 100_000, *,
              record_stores: bool = False, watch: Sequence[int] = (),
              stop_on_fail: bool = True) -> ExecutionTrace:
    """Execute ``cfg`` from entry.

    ``havoc`` is either a list consumed in order (exhausted -> 0) or a
    callable keyed as described in ``KeyedHavoc``.  Reading a variable that
    was never written yields its entry value: 0 for list streams, the
    ``("init", var)`` key for callables.
    """
    trace = ExecutionTrace()
    visits: dict[int, int] = {}
    watch_set = set(watch)
    types = cfg.var_types
    keyed = callable(havoc)
    stream = iter(()) if keyed else iter(havoc)

    def next_value(key: HavocKey) -> int:
        trace.havocs_used += 1
        if keyed:
            return havoc(key)
        return next(stream, 0)

    class _Env(dict):
        def __missing__(self, name: str) -> Value:
            v = next_value(("init", name)) if keyed else 0
            v = to_type(v, types.get(name, A.INT))
            self[name] = v
            return v

    env = _Env()
    store = env
    node = cfg.entry
    steps = 0
    while True:
        if steps >= max_steps:
            trace.status = MAX_STEPS
            break
        steps += 1
        ins = cfg.nodes[node]
        trace.steps.append(node)
        visit = visits.get(node, 0)
        visits[node] = visit + 1
        if record_stores:
            trace.stores.append(dict(store))
        if node in watch_set:
            trace.watched.setdefault(node, []).append(dict(store))
        nxt: Optional[int]
        try:
            k = ins.kind
            if k is Kind.EXIT:
                trace.status = EXIT
                break
            if k is Kind.ASSIGN:
                store[ins.var] = eval_expr(ins.expr, store)
                nxt = cfg.succ[node][0]
            elif k is Kind.HAVOC:
                for a in ins.args:  # arguments are evaluated, as in a real call
                    eval_expr(a, store)
                store[ins.var] = to_type(next_value((node, visit)), types.get(ins.var, A.INT))
                nxt = cfg.succ[node][0]
            elif k is Kind.BRANCH:
                taken = bool(eval_expr(ins.expr, store))
                nxt = cfg.succ[node][0 if taken else 1]
            elif k is Kind.PHI:
                taken = bool(next_value((node, visit)))
                nxt = cfg.succ[node][0 if taken else 1]
            elif k is Kind.ASSERT:
                ok = bool(eval_expr(ins.expr, store))
                trace.assert_outcomes.append((node, ok))
                if not ok and stop_on_fail:
                    trace.status = ASSERT_FAILED
                    trace.error_node = node
                    break
                nxt = cfg.succ[node][0]
            elif k in (Kind.ENTRY, Kind.SKIP):
                nxt = cfg.succ[node][0]
            else:
                raise TypeError(f"cannot interpret {ins}")
        except DivisionByZero:
            trace.status = DIVISION_BY_ZERO
            trace.error_node = node
            break
        node = nxt
    trace.final_store = dict(store)
    return trace

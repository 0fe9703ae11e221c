"""Natural-loop detection over the recovered CFG.

A back edge is an edge u->h where h dominates u; the loop body is every
block that reaches u without passing through h. A loop is classified
``constant(c)`` only when its exit comparison was observed (during stack
emulation) with concrete operands on both sides across iterations: the
operand that stays fixed while the other advances is the bound. Anything
else — storage- or calldata-derived bounds, conditions that never fold —
is ``unbounded``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .cfg import ControlFlowGraph, unwrap_iszero


@dataclass
class Loop:
    header: int
    body: frozenset[int]  # includes the header
    bound: Optional[int]  # None = unbounded

    @property
    def is_bounded(self) -> bool:
        return self.bound is not None


def detect_loops(cfg: ControlFlowGraph) -> list[Loop]:
    loops: list[Loop] = []
    seen_headers: dict[int, set[int]] = {}
    reachable = cfg.reachable()
    for block in cfg.blocks.values():
        if block.id not in reachable:
            continue
        for succ in block.successors:
            if succ in reachable and cfg.dominates(succ, block.id):
                seen_headers.setdefault(succ, set()).add(block.id)
    for header in sorted(seen_headers):
        body = _natural_loop_body(cfg, header, seen_headers[header])
        bound = _classify_bound(cfg, header, body)
        loops.append(Loop(header, frozenset(body), bound))
    return loops


def _natural_loop_body(cfg: ControlFlowGraph, header: int,
                       tails: set[int]) -> set[int]:
    preds = cfg.predecessors()
    body = {header}
    stack = [t for t in tails if t != header]
    while stack:
        node = stack.pop()
        if node in body:
            continue
        body.add(node)
        stack.extend(p for p in preds[node] if p not in body)
    return body


def _classify_bound(cfg: ControlFlowGraph, header: int,
                    body: set[int]) -> Optional[int]:
    exit_pcs = set()
    for bid in body:
        block = cfg.blocks[bid]
        if block.terminator != "jumpi":
            continue
        if any(succ not in body for succ in block.successors):
            exit_pcs.add(block.instructions[-1].pc)
    if not exit_pcs:
        return None

    observations: dict[int, list[tuple]] = {pc: [] for pc in sorted(exit_pcs)}
    for event in cfg.jumpi_events:
        if event.pc not in exit_pcs:
            continue
        cond = unwrap_iszero(event.condition)
        if cond[0] != "cmp":
            return None
        _, _op, _pc, a, b = cond
        if a[0] != "const" or b[0] != "const":
            return None  # bound involves storage/calldata/env data
        pair = (a[1], b[1])
        if pair not in observations[event.pc]:
            observations[event.pc].append(pair)

    for pairs in observations.values():
        bound = _stable_operand(pairs)
        if bound is not None:
            return bound
    return None


def _stable_operand(pairs: list[tuple]) -> Optional[int]:
    """The comparison side that stays fixed while the other one advances."""
    if len(pairs) < 2:
        return None
    firsts = {p[0] for p in pairs}
    seconds = {p[1] for p in pairs}
    if len(firsts) == 1 and len(seconds) > 1:
        return next(iter(firsts))
    if len(seconds) == 1 and len(firsts) > 1:
        return next(iter(seconds))
    return None

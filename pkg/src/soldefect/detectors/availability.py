"""Availability defect detectors (four kinds)."""

from __future__ import annotations

from ..evm.keccak import function_selector
from ..nodes import (EmitStatement, ExpressionStatement, IfStatement,
                     ThrowStatement, walk)
from ..report import Finding
from .base import (AnalysisContext, DetectorDescriptor, register,
                   source_finding)
from .common import (ETHER_SENDING_KINDS, builtin_call_name,
                     external_call_kind, has_state_write, is_guard_call,
                     iter_statements, returns_on_all_paths, unwrap)

# ---------------------------------------------------------------------------
# ERC-20 interface tables

ERC20_MANDATORY: tuple[tuple[str, tuple[str, ...], tuple[str, ...]], ...] = (
    ("totalSupply", (), ("uint256",)),
    ("balanceOf", ("address",), ("uint256",)),
    ("transfer", ("address", "uint256"), ("bool",)),
    ("transferFrom", ("address", "address", "uint256"), ("bool",)),
    ("approve", ("address", "uint256"), ("bool",)),
    ("allowance", ("address", "address"), ("uint256",)),
)

ERC20_OPTIONAL: tuple[tuple[str, tuple[str, ...], tuple[str, ...]], ...] = (
    ("name", (), ("string",)),
    ("symbol", (), ("string",)),
    ("decimals", (), ("uint8",)),
)

ERC20_EVENTS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("Transfer", ("address", "address", "uint256")),
    ("Approval", ("address", "address", "uint256")),
)


def erc20_selector_table() -> dict[str, str]:
    """Mandatory signature -> 4-byte hex selector, derived via keccak."""
    return {
        f"{name}({','.join(params)})":
            function_selector(f"{name}({','.join(params)})").hex()
        for name, params, _returns in ERC20_MANDATORY
    }


UNMATCHED_ERC20 = DetectorDescriptor(
    code="D10", id="unmatched-erc20", name="Unmatched ERC-20 Standard",
    category="availability", impact="IP4",
    frontends=frozenset({"source", "bytecode"}),
    description="A token-like contract deviates from the ERC-20 interface: "
                "missing mandatory functions, wrong return types, or missing "
                "Transfer/Approval events.",
    advice="Match the ERC-20 interface exactly: the six mandatory functions, "
           "their bool/uint256 return types, and the Transfer/Approval events.",
)


@register(UNMATCHED_ERC20)
def detect_unmatched_erc20(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        functions = [f for f in cf.table.all_functions() if not f.is_constructor]
        by_sig = {}
        for fn in functions:
            params = tuple(p.type_name.canonical() for p in fn.parameters)
            by_sig[(fn.name, params)] = fn
        matches_any = any((name, params) in by_sig
                          for name, params, _r in ERC20_MANDATORY)
        if not matches_any:
            continue
        problems: list[str] = []
        for name, params, expected_returns in ERC20_MANDATORY:
            fn = by_sig.get((name, params))
            if fn is None:
                problems.append(f"missing function {name}({','.join(params)})")
                continue
            actual = tuple(r.type_name.canonical() for r in fn.returns_)
            if actual != expected_returns:
                problems.append(
                    f"{name} must return ({','.join(expected_returns)}), "
                    f"found ({','.join(actual)})")
        for name, params, expected_returns in ERC20_OPTIONAL:
            fn = by_sig.get((name, params))
            if fn is not None:
                actual = tuple(r.type_name.canonical() for r in fn.returns_)
                if actual != expected_returns:
                    problems.append(
                        f"optional {name} must return "
                        f"({','.join(expected_returns)}), found ({','.join(actual)})")
        for event_name, params in ERC20_EVENTS:
            event = cf.table.events.get(event_name)
            if event is None:
                problems.append(f"missing event {event_name}")
            else:
                actual = tuple(p.type_name.canonical() for p in event.parameters)
                if actual != params:
                    problems.append(
                        f"event {event_name} must take ({','.join(params)})")
        if problems:
            findings.append(source_finding(
                UNMATCHED_ERC20, src.file_id, cf.contract.span,
                f"contract {cf.contract.name} deviates from ERC-20: "
                + "; ".join(sorted(problems))))
    return findings


# ---------------------------------------------------------------------------


MISSING_REMINDER = DetectorDescriptor(
    code="D11", id="missing-reminder", name="Missing Reminder",
    category="availability", impact="IP4",
    frontends=frozenset({"source"}),
    description="A payable function changes state or conditionally reverts "
                "but never emits an event, so callers cannot observe the "
                "outcome.",
    advice="Emit an event so callers can observe whether the function "
           "succeeded.",
)


@register(MISSING_REMINDER)
def detect_missing_reminder(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        event_names = set(cf.table.events)
        for fn in cf.contract.functions:
            if not fn.is_payable or fn.body is None:
                continue
            if not (has_state_write(fn, cf.table) or _has_conditional_revert(fn)):
                continue
            if _emits_event(fn, event_names):
                continue
            label = fn.name or "fallback function"
            findings.append(source_finding(
                MISSING_REMINDER, src.file_id, fn.span,
                f"payable function {label} gives callers no event to "
                f"observe its outcome"))
    return findings


def _has_conditional_revert(fn) -> bool:
    for stmt in iter_statements(fn.body):
        if isinstance(stmt, IfStatement):
            for inner in iter_statements(stmt.then_branch):
                if _is_revert_statement(inner):
                    return True
            if stmt.else_branch is not None:
                for inner in iter_statements(stmt.else_branch):
                    if _is_revert_statement(inner):
                        return True
        elif isinstance(stmt, ExpressionStatement) \
                and is_guard_call(unwrap(stmt.expression)):
            return True
    return False


def _is_revert_statement(stmt) -> bool:
    if isinstance(stmt, ThrowStatement):
        return True
    return (isinstance(stmt, ExpressionStatement)
            and builtin_call_name(unwrap(stmt.expression)) == "revert")


def _emits_event(fn, event_names: set[str]) -> bool:
    for stmt in iter_statements(fn.body):
        if isinstance(stmt, EmitStatement):
            return True
        if isinstance(stmt, ExpressionStatement):
            name = builtin_call_name(unwrap(stmt.expression))
            if name is not None and name in event_names:
                return True
    return False


# ---------------------------------------------------------------------------


MISSING_RETURN_STATEMENT = DetectorDescriptor(
    code="D12", id="missing-return-statement", name="Missing Return Statement",
    category="availability", impact="IP4",
    frontends=frozenset({"source"}),
    description="A function declares return values but some path reaches the "
                "end without returning, so callers observe the zero default.",
    advice="Return an explicit value on every path; callers otherwise "
           "observe the zero default.",
)


@register(MISSING_RETURN_STATEMENT)
def detect_missing_return_statement(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions:
            if fn.body is None or not fn.returns_:
                continue
            if any(r.name for r in fn.returns_):
                continue  # named returns are implicitly returned
            if returns_on_all_paths(fn.body):
                continue
            findings.append(source_finding(
                MISSING_RETURN_STATEMENT, src.file_id, fn.span,
                f"function {fn.name or 'fallback'} declares return values "
                f"but does not return on every path"))
    return findings


# ---------------------------------------------------------------------------


GREEDY_CONTRACT = DetectorDescriptor(
    code="D13", id="greedy-contract", name="Greedy Contract",
    category="availability", impact="IP3",
    impact_note="IP3 type 1: critical unwanted behavior, not externally "
                "triggerable",
    frontends=frozenset({"source"}),
    description="The contract can receive ether (payable function) but has "
                "no transfer/send/call.value/selfdestruct to move it out.",
    advice="Add a withdrawal path (transfer/send/call.value or selfdestruct) "
           "to any contract that can receive ether.",
)


@register(GREEDY_CONTRACT)
def detect_greedy_contract(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        functions = cf.table.all_functions()
        if not any(f.is_payable for f in functions):
            continue
        if _can_move_ether_out(functions, cf.table):
            continue
        findings.append(source_finding(
            GREEDY_CONTRACT, src.file_id, cf.contract.span,
            f"contract {cf.contract.name} can receive ether but has no way "
            f"to send it out"))
    return findings


def _can_move_ether_out(functions, table) -> bool:
    callables = list(functions) + list(table.modifiers.values())
    for fn in callables:
        if fn.body is None:
            continue
        for node in walk(fn.body):
            if external_call_kind(node) in ETHER_SENDING_KINDS:
                return True
            if builtin_call_name(node) in ("selfdestruct", "suicide"):
                return True
    return False

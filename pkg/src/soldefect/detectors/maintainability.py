"""Maintainability defect detectors (two kinds)."""

from __future__ import annotations

from ..evm.eip55 import is_mixed_case, is_valid_address
from ..nodes import HexLiteral, Identifier, MemberAccess, walk
from ..report import Finding
from .base import (AnalysisContext, DetectorDescriptor, register,
                   source_finding)
from .common import (builtin_call_name, condition_expressions,
                     local_names, unwrap)

HARD_CODE_ADDRESS = DetectorDescriptor(
    code="D17", id="hard-code-address", name="Hard Code Address",
    category="maintainability", impact="IP3",
    impact_note="IP3 type 2: major unwanted behavior (partial ether loss)",
    frontends=frozenset({"source", "bytecode"}),
    description="An address literal is baked into the code; it cannot be "
                "corrected after deployment and may not even pass the "
                "EIP-55 checksum.",
    advice="Pass addresses as parameters or configuration instead of "
           "hard-coding them; validate the EIP-55 checksum.",
)


@register(HARD_CODE_ADDRESS)
def detect_hard_code_address(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for node in walk(src.unit):
        if not isinstance(node, HexLiteral) or not node.is_address:
            continue
        if node.value == 0:
            continue  # address(0) comparisons are not configuration
        if is_mixed_case(node.text) and not is_valid_address(node.text):
            message = (f"illegal address: hard-coded literal {node.text} "
                       f"fails the EIP-55 checksum")
        else:
            message = f"hard-coded address {node.text}"
        findings.append(source_finding(HARD_CODE_ADDRESS, src.file_id,
                                       node.span, message))
    return findings


# ---------------------------------------------------------------------------


MISSING_INTERRUPTER = DetectorDescriptor(
    code="D18", id="missing-interrupter", name="Missing Interrupter",
    category="maintainability", impact="IP4",
    frontends=frozenset({"source"}),
    description="A contract that can hold ether has neither a selfdestruct "
                "escape hatch nor an owner-gated circuit breaker to stop it "
                "in an emergency.",
    advice="Provide an emergency stop: a selfdestruct escape hatch or an "
           "owner-controlled circuit breaker.",
)


@register(MISSING_INTERRUPTER)
def detect_missing_interrupter(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        functions = cf.table.all_functions()
        if not any(f.is_payable for f in functions):
            continue  # cannot accumulate ether through calls
        if _has_selfdestruct(functions, cf.table):
            continue
        if _has_circuit_breaker(functions, cf.table):
            continue
        findings.append(source_finding(
            MISSING_INTERRUPTER, src.file_id, cf.contract.span,
            f"contract {cf.contract.name} can hold ether but has no "
            f"emergency stop mechanism"))
    return findings


def _has_selfdestruct(functions, table) -> bool:
    for fn in list(functions) + list(table.modifiers.values()):
        if fn.body is None:
            continue
        for node in walk(fn.body):
            if builtin_call_name(node) in ("selfdestruct", "suicide"):
                return True
    return False


def _has_circuit_breaker(functions, table) -> bool:
    """An owner-gated boolean: a bool state variable checked by require/if
    in at least one externally callable function and written by an
    access-controlled function."""
    bool_states = {name for name, decl in table.state_variables.items()
                   if decl.type_name.kind == "elementary"
                   and decl.type_name.name == "bool"}
    if not bool_states:
        return False

    checked: set[str] = set()
    written_controlled: set[str] = set()
    for fn in functions:
        if fn.body is None:
            continue
        shadowed = local_names(fn)
        if fn.visibility in ("public", "default", "external"):
            for cond in condition_expressions(fn):
                for node in walk(cond):
                    if isinstance(node, Identifier) and node.name in bool_states \
                            and node.name not in shadowed:
                        checked.add(node.name)
        if _is_access_controlled(fn):
            from ..nodes import Assignment
            for node in walk(fn.body):
                if isinstance(node, Assignment):
                    target = unwrap(node.target)
                    if isinstance(target, Identifier) \
                            and target.name in bool_states \
                            and target.name not in shadowed:
                        written_controlled.add(target.name)
    return bool(checked & written_controlled)


def _is_access_controlled(fn) -> bool:
    if fn.modifiers_invoked:
        return True
    if fn.body is None:
        return False
    for cond in condition_expressions(fn):
        for node in walk(cond):
            if isinstance(node, MemberAccess) and node.member in ("sender", "origin"):
                obj = unwrap(node.object)
                if isinstance(obj, Identifier) and obj.name in ("msg", "tx"):
                    return True
    return False

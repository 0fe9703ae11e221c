"""Performance defect detectors (three kinds)."""

from __future__ import annotations

from ..nodes import VariableDeclaration, walk
from ..report import Finding
from ..semantic import _node_key
from .base import (AnalysisContext, DetectorDescriptor, register,
                   source_finding)

UNUSED_STATEMENT = DetectorDescriptor(
    code="D14", id="unused-statement", name="Unused Statement",
    category="performance", impact="IP5",
    frontends=frozenset({"source"}),
    description="A parameter or local variable never affects contract state, "
                "conditions, or return values.",
    advice="Remove parameters and locals that never affect state or return "
           "values.",
)


@register(UNUSED_STATEMENT)
def detect_unused_statement(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn, facts in cf.defuse:
            if fn.body is None:
                continue
            for var in facts.dead_variables():
                role = "parameter" if var.is_parameter else "local variable"
                findings.append(source_finding(
                    UNUSED_STATEMENT, src.file_id, var.declaration.span,
                    f"{role} {var.declaration.name} never affects contract "
                    f"statements or return values"))
    return findings


# ---------------------------------------------------------------------------


HIGH_GAS_FUNCTION_TYPE = DetectorDescriptor(
    code="D15", id="high-gas-function-type",
    name="High Gas Consumption Function Type",
    category="performance", impact="IP5",
    frontends=frozenset({"source"}),
    description="A public function with array parameters is never called "
                "internally; external would read calldata instead of copying "
                "to memory.",
    advice="Declare externally-used functions with array parameters as "
           "external; calldata access is cheaper than copying to memory.",
)


def _has_array_parameter(fn) -> bool:
    for p in fn.parameters:
        t = p.type_name
        if t.kind == "array":
            return True
        if t.kind == "elementary" and t.name in ("bytes", "string"):
            return True
    return False


@register(HIGH_GAS_FUNCTION_TYPE)
def detect_high_gas_function_type(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions:
            if fn.body is None or fn.is_constructor or fn.is_fallback:
                continue
            if fn.visibility not in ("public", "default"):
                continue
            if not _has_array_parameter(fn):
                continue
            if cf.call_graph.callers_of(_node_key(fn)):
                continue
            findings.append(source_finding(
                HIGH_GAS_FUNCTION_TYPE, src.file_id, fn.span,
                f"public function {fn.name} takes array arguments and has no "
                f"internal callers; declare it external"))
    return findings


# ---------------------------------------------------------------------------


HIGH_GAS_DATA_TYPE = DetectorDescriptor(
    code="D16", id="high-gas-data-type", name="High Gas Consumption Data Type",
    category="performance", impact="IP5",
    frontends=frozenset({"source"}),
    description="byte[] pads every element to a 32-byte slot; bytes packs "
                "tightly and is cheaper.",
    advice="Use bytes instead of byte[]; byte[] wastes 31 bytes of storage "
           "per element.",
)


def _is_byte_array(type_name) -> bool:
    return (type_name.kind == "array" and type_name.length is None
            and type_name.element is not None
            and type_name.element.kind == "elementary"
            and type_name.element.canonical() == "bytes1")


@register(HIGH_GAS_DATA_TYPE)
def detect_high_gas_data_type(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for node in walk(src.unit):
        if isinstance(node, VariableDeclaration) and _is_byte_array(node.type_name):
            findings.append(source_finding(
                HIGH_GAS_DATA_TYPE, src.file_id, node.span,
                f"declaration {node.name or '<unnamed>'} uses byte[]; bytes "
                f"is cheaper"))
    return findings

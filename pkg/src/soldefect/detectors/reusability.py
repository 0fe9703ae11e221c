"""Reusability defect detectors (two kinds)."""

from __future__ import annotations

from ..nodes import (CallExpression, Identifier, MemberAccess, ThrowStatement,
                     walk)
from ..report import Finding
from .base import (AnalysisContext, DetectorDescriptor, register,
                   source_finding)
from .common import unwrap

DEPRECATED_APIS = DetectorDescriptor(
    code="D19", id="deprecated-apis", name="Deprecated APIs",
    category="reusability", impact="IP5",
    frontends=frozenset({"source"}),
    description="The code uses constructs the language has replaced (throw, "
                "suicide, sha3, callcode, msg.gas, constant mutability).",
    advice="Replace deprecated constructs (throw, suicide, sha3, callcode, "
           "msg.gas, constant) with their modern equivalents.",
)

# Free-standing calls that have modern replacements. `block.blockhash` is
# deliberately not in the default set (it only became deprecated late in the
# 0.4 line); add it via `deprecated.extra = block.blockhash` when wanted.
_DEPRECATED_CALLS = {
    "suicide": "selfdestruct",
    "sha3": "keccak256",
}

_DEPRECATED_MEMBERS = {
    ("msg", "gas"): "gasleft()",
}


@register(DEPRECATED_APIS)
def detect_deprecated_apis(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    extra = set(ctx.config.deprecated_extra)
    extra_members = {tuple(name.split(".", 1)) for name in extra if "." in name}
    extra_calls = {name for name in extra if "." not in name}

    def report(span, old: str, new: str | None) -> None:
        message = f"deprecated {old}"
        if new:
            message += f"; use {new}"
        findings.append(source_finding(DEPRECATED_APIS, src.file_id, span,
                                       message))

    for cf in src.contracts:
        for fn in cf.contract.functions:
            if fn.mutability == "constant":
                report(fn.span, "`constant` function mutability", "view or pure")
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            for node in walk(fn.body):
                if isinstance(node, ThrowStatement):
                    report(node.span, "throw", "revert()")
                elif isinstance(node, CallExpression):
                    callee = unwrap(node.callee)
                    if isinstance(callee, Identifier):
                        name = callee.name
                        if name in _DEPRECATED_CALLS:
                            report(node.span, f"{name}()", f"{_DEPRECATED_CALLS[name]}()")
                        elif name in extra_calls:
                            report(node.span, f"{name}()", None)
                elif isinstance(node, MemberAccess):
                    obj = unwrap(node.object)
                    if not isinstance(obj, Identifier):
                        if node.member == "callcode":
                            report(node.span, ".callcode", "delegatecall")
                        continue
                    pair = (obj.name, node.member)
                    if pair in _DEPRECATED_MEMBERS:
                        report(node.span, f"{obj.name}.{node.member}",
                               _DEPRECATED_MEMBERS[pair])
                    elif pair in extra_members:
                        report(node.span, f"{obj.name}.{node.member}", None)
                    elif node.member == "callcode":
                        report(node.span, ".callcode", "delegatecall")
    return findings


# ---------------------------------------------------------------------------


UNSPECIFIED_COMPILER_VERSION = DetectorDescriptor(
    code="D20", id="unspecified-compiler-version",
    name="Unspecified Compiler Version",
    category="reusability", impact="IP5",
    frontends=frozenset({"source"}),
    description="The file has no solidity pragma, or the pragma accepts a "
                "range of compiler versions instead of pinning one.",
    advice="Pin the pragma to one compiler version (pragma solidity 0.4.25;) "
           "so future compilers cannot change behavior.",
)


@register(UNSPECIFIED_COMPILER_VERSION)
def detect_unspecified_compiler_version(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    solidity_pragmas = [p for p in src.unit.pragmas if p.name == "solidity"]
    if not solidity_pragmas:
        findings.append(source_finding(
            UNSPECIFIED_COMPILER_VERSION, src.file_id, src.unit.span,
            "no compiler version pragma"))
        return findings
    for pragma in solidity_pragmas:
        if pragma.constraint_kind != "exact":
            findings.append(source_finding(
                UNSPECIFIED_COMPILER_VERSION, src.file_id, pragma.span,
                f"pragma solidity {pragma.version_text} accepts multiple "
                f"compiler versions"))
    return findings

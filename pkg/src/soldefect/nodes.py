"""AST for the Solidity subset.

Every node carries exactly one Span. Nodes are plain dataclasses so two
parses of the same bytes compare structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .lexer import ETHER_UNITS
from .spans import Span

# ---------------------------------------------------------------------------
# Types


@dataclass(slots=True)
class TypeName:
    kind: str  # "elementary" | "array" | "mapping" | "user" | "var"
    span: Span
    name: str = ""                      # elementary or user-defined name
    element: Optional["TypeName"] = None   # arrays
    length: Optional["Expression"] = None  # fixed-size arrays
    key_type: Optional["TypeName"] = None  # mappings
    value_type: Optional["TypeName"] = None

    def canonical(self) -> str:
        """Canonical spelling for ABI-style signature matching."""
        if self.kind == "elementary":
            if self.name == "uint":
                return "uint256"
            if self.name == "int":
                return "int256"
            if self.name == "byte":
                return "bytes1"
            return self.name
        if self.kind == "array":
            suffix = "[]" if self.length is None else f"[{_const_text(self.length)}]"
            return self.element.canonical() + suffix
        if self.kind == "mapping":
            return f"mapping({self.key_type.canonical()}=>{self.value_type.canonical()})"
        if self.kind == "var":
            return "var"
        return self.name

    def int_bits(self) -> Optional[int]:
        """Bit width for uintN/intN (plain uint/int normalize to 256)."""
        if self.kind != "elementary":
            return None
        name = self.name
        if name in ("uint", "int"):
            return 256
        for prefix in ("uint", "int"):
            if name.startswith(prefix) and name[len(prefix):].isdigit():
                return int(name[len(prefix):])
        return None

    def is_reference_type(self) -> bool:
        return (self.kind in ("array", "mapping")
                or (self.kind == "elementary" and self.name in ("bytes", "string")))


def _const_text(expr: "Expression") -> str:
    if isinstance(expr, NumberLiteral):
        return expr.text
    return "?"


# ---------------------------------------------------------------------------
# Expressions


@dataclass(slots=True)
class Identifier:
    name: str
    span: Span


@dataclass(slots=True)
class MemberAccess:
    object: "Expression"
    member: str
    span: Span


@dataclass(slots=True)
class IndexAccess:
    base: "Expression"
    index: Optional["Expression"]
    span: Span


@dataclass(slots=True)
class CallExpression:
    callee: "Expression"
    arguments: list["Expression"]
    span: Span


@dataclass(slots=True)
class BinaryOperation:
    operator: str
    left: "Expression"
    right: "Expression"
    span: Span


@dataclass(slots=True)
class UnaryOperation:
    operator: str
    operand: "Expression"
    prefix: bool
    span: Span


@dataclass(slots=True)
class Assignment:
    operator: str  # "=", "+=", ...
    target: "Expression"
    value: "Expression"
    span: Span


@dataclass(slots=True)
class Conditional:
    condition: "Expression"
    true_expression: "Expression"
    false_expression: "Expression"
    span: Span


@dataclass(slots=True)
class NumberLiteral:
    text: str            # exact source spelling, e.g. "0.1" or "10"
    unit: Optional[str]  # "ether", "wei", ... or None
    span: Span

    @property
    def value(self) -> Optional[int]:
        """Exact integer value (unit applied), or None when non-integral."""
        try:
            magnitude = Fraction(self.text)
        except (ValueError, ZeroDivisionError):
            return None
        if self.unit:
            magnitude *= ETHER_UNITS[self.unit]
        if magnitude.denominator != 1:
            return None
        return int(magnitude)


@dataclass(slots=True)
class HexLiteral:
    text: str  # including the 0x prefix
    span: Span

    @property
    def is_address(self) -> bool:
        return len(self.text) == 42  # 0x + 40 hex digits

    @property
    def value(self) -> int:
        return int(self.text, 16)


@dataclass(slots=True)
class StringLiteral:
    text: str  # raw source spelling including quotes
    span: Span


@dataclass(slots=True)
class BoolLiteral:
    value: bool
    span: Span


@dataclass(slots=True)
class ElementaryTypeExpression:
    """A type name used in expression position, e.g. the cast uint(x)."""

    type_name: TypeName
    span: Span


@dataclass(slots=True)
class TupleExpression:
    components: list["Expression"]
    span: Span


Expression = Union[
    Identifier, MemberAccess, IndexAccess, CallExpression, BinaryOperation,
    UnaryOperation, Assignment, Conditional, NumberLiteral, HexLiteral,
    StringLiteral, BoolLiteral, ElementaryTypeExpression, TupleExpression,
]


# ---------------------------------------------------------------------------
# Statements


@dataclass(slots=True)
class Block:
    statements: list["Statement"]
    span: Span


@dataclass(slots=True)
class IfStatement:
    condition: Expression
    then_branch: "Statement"
    else_branch: Optional["Statement"]
    span: Span


@dataclass(slots=True)
class ForStatement:
    init: Optional["Statement"]       # declaration or expression statement
    condition: Optional[Expression]
    post: Optional[Expression]
    body: "Statement"
    span: Span


@dataclass(slots=True)
class WhileStatement:
    condition: Expression
    body: "Statement"
    span: Span


@dataclass(slots=True)
class ReturnStatement:
    value: Optional[Expression]
    span: Span


@dataclass(slots=True)
class EmitStatement:
    call: CallExpression
    span: Span


@dataclass(slots=True)
class ThrowStatement:
    span: Span


@dataclass(slots=True)
class BreakStatement:
    span: Span


@dataclass(slots=True)
class ContinueStatement:
    span: Span


@dataclass(slots=True)
class PlaceholderStatement:
    """The `_;` statement inside modifier bodies."""

    span: Span


@dataclass(slots=True)
class VariableDeclarationStatement:
    declaration: "VariableDeclaration"
    span: Span


@dataclass(slots=True)
class ExpressionStatement:
    expression: Expression
    span: Span


Statement = Union[
    Block, IfStatement, ForStatement, WhileStatement, ReturnStatement,
    EmitStatement, ThrowStatement, BreakStatement, ContinueStatement,
    PlaceholderStatement, VariableDeclarationStatement, ExpressionStatement,
]


# ---------------------------------------------------------------------------
# Declarations


@dataclass(slots=True)
class VariableDeclaration:
    name: str  # "" for unnamed parameters/returns
    type_name: TypeName
    span: Span
    data_location: str = "unspecified"  # "storage" | "memory" | "calldata" | "unspecified"
    initializer: Optional[Expression] = None
    visibility: str = "default"
    is_constant: bool = False
    is_indexed: bool = False


@dataclass(slots=True)
class FunctionDefinition:
    name: str  # "" for the fallback function
    parameters: list[VariableDeclaration]
    returns_: list[VariableDeclaration]
    visibility: str  # "public" | "external" | "internal" | "private" | "default"
    is_payable: bool
    mutability: Optional[str]  # "constant" | "view" | "pure" | None
    modifiers_invoked: list[tuple[str, list[Expression]]]
    body: Optional[Block]
    is_constructor: bool
    span: Span

    @property
    def is_fallback(self) -> bool:
        return self.name == "" and not self.is_constructor

    def signature(self) -> str:
        params = ",".join(p.type_name.canonical() for p in self.parameters)
        return f"{self.name}({params})"


@dataclass(slots=True)
class ModifierDefinition:
    name: str
    parameters: list[VariableDeclaration]
    body: Optional[Block]
    span: Span


@dataclass(slots=True)
class EventDefinition:
    name: str
    parameters: list[VariableDeclaration]
    anonymous: bool
    span: Span


@dataclass(slots=True)
class ContractDefinition:
    name: str
    kind: str  # "contract" | "interface" | "library"
    bases: list[str]
    state_variables: list[VariableDeclaration]
    functions: list[FunctionDefinition]
    modifiers: list[ModifierDefinition]
    events: list[EventDefinition]
    span: Span


@dataclass(slots=True)
class PragmaDirective:
    name: str  # "solidity", "experimental", ...
    constraint_kind: str  # "exact" | "caret" | "range" | "other"
    version_text: str
    span: Span


@dataclass(slots=True)
class SourceUnit:
    pragmas: list[PragmaDirective]
    contracts: list[ContractDefinition]
    span: Span


# ---------------------------------------------------------------------------
# Generic traversal

_CHILD_FIELDS = {
    SourceUnit: ("pragmas", "contracts"),
    ContractDefinition: ("state_variables", "functions", "modifiers", "events"),
    FunctionDefinition: ("parameters", "returns_", "body"),
    ModifierDefinition: ("parameters", "body"),
    EventDefinition: ("parameters",),
    VariableDeclaration: ("initializer",),
    Block: ("statements",),
    IfStatement: ("condition", "then_branch", "else_branch"),
    ForStatement: ("init", "condition", "post", "body"),
    WhileStatement: ("condition", "body"),
    ReturnStatement: ("value",),
    EmitStatement: ("call",),
    VariableDeclarationStatement: ("declaration",),
    ExpressionStatement: ("expression",),
    Identifier: (),
    MemberAccess: ("object",),
    IndexAccess: ("base", "index"),
    CallExpression: ("callee", "arguments"),
    BinaryOperation: ("left", "right"),
    UnaryOperation: ("operand",),
    Assignment: ("target", "value"),
    Conditional: ("condition", "true_expression", "false_expression"),
    TupleExpression: ("components",),
    PragmaDirective: (),
    ThrowStatement: (),
    BreakStatement: (),
    ContinueStatement: (),
    PlaceholderStatement: (),
    NumberLiteral: (),
    HexLiteral: (),
    StringLiteral: (),
    BoolLiteral: (),
    ElementaryTypeExpression: (),
    TypeName: (),
}


def children(node) -> list:
    """Direct child nodes, in source order."""
    out = []
    for name in _CHILD_FIELDS.get(type(node), ()):
        value = getattr(node, name)
        if value is None:
            continue
        if isinstance(value, list):
            out.extend(v for v in value if v is not None)
        else:
            out.append(value)
    if isinstance(node, FunctionDefinition):
        for _, args in node.modifiers_invoked:
            out.extend(args)
    return out


def walk(node):
    """Yield node and all descendants, depth-first, pre-order."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))

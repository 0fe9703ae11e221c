"""Semantic facts over the AST: symbol tables, inheritance flattening,
`var` type inference, the intra-contract call graph, and def-use liveness.

All analyses are intra-procedural and conservative: anything that escapes
the patterns below (unresolved names, calls, container writes) is treated
as live / unknown rather than dead, which keeps the unused-statement and
gas detectors free of speculative positives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .nodes import (Assignment, BinaryOperation, Block, BoolLiteral,
                    CallExpression, Conditional, ContractDefinition,
                    ElementaryTypeExpression, EventDefinition, Expression,
                    ExpressionStatement, ForStatement, FunctionDefinition,
                    HexLiteral, Identifier, IfStatement, IndexAccess,
                    MemberAccess, ModifierDefinition, NumberLiteral,
                    ReturnStatement, SourceUnit, StringLiteral,
                    TupleExpression, TypeName, UnaryOperation,
                    VariableDeclaration, VariableDeclarationStatement,
                    WhileStatement, walk)
from .spans import Diagnostic, Span

# ---------------------------------------------------------------------------
# Inheritance flattening and symbol tables


@dataclass
class SymbolTable:
    """Flattened member lookup for one contract (inherited members merged,
    derived definitions win)."""

    contract: ContractDefinition
    state_variables: dict[str, VariableDeclaration] = field(default_factory=dict)
    functions: dict[str, list[FunctionDefinition]] = field(default_factory=dict)
    modifiers: dict[str, ModifierDefinition] = field(default_factory=dict)
    events: dict[str, EventDefinition] = field(default_factory=dict)

    def all_functions(self) -> list[FunctionDefinition]:
        return [f for overloads in self.functions.values() for f in overloads]

    def lookup_state(self, name: str) -> Optional[VariableDeclaration]:
        return self.state_variables.get(name)


def flatten_contract(unit: SourceUnit, contract: ContractDefinition,
                     diagnostics: Optional[list[Diagnostic]] = None) -> SymbolTable:
    """Merge inherited members, derived-contract overrides winning.

    Bases are resolved within the same source unit; a base that appears
    more than once through different paths (diamond) is merged once and a
    warning is recorded.
    """
    by_name = {c.name: c for c in unit.contracts}
    table = SymbolTable(contract)
    seen: set[str] = set()

    def absorb(c: ContractDefinition) -> None:
        if c.name in seen:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(
                    "warning",
                    f"contract {contract.name}: base {c.name} inherited more "
                    f"than once; flat-union merge applied", contract.span))
            return
        seen.add(c.name)
        for base_name in c.bases:
            base = by_name.get(base_name)
            if base is not None:
                absorb(base)
        for var in c.state_variables:
            table.state_variables[var.name] = var
        for fn in c.functions:
            overloads = table.functions.setdefault(fn.name, [])
            key = fn.signature()
            overloads[:] = [f for f in overloads if f.signature() != key]
            overloads.append(fn)
        for mod in c.modifiers:
            table.modifiers[mod.name] = mod
        for event in c.events:
            table.events[event.name] = event

    absorb(contract)
    return table


# ---------------------------------------------------------------------------
# Call graph


@dataclass
class CallGraph:
    """Internal call edges of one contract: f calls g by plain name, or f
    invokes modifier g. External member calls are not edges."""

    nodes: set[str] = field(default_factory=set)
    edges: set[tuple[str, str]] = field(default_factory=set)
    unresolved: set[tuple[str, str]] = field(default_factory=set)

    def callers_of(self, name: str) -> set[str]:
        return {src for src, dst in self.edges if dst == name}


def _node_key(fn: FunctionDefinition | ModifierDefinition) -> str:
    if isinstance(fn, ModifierDefinition):
        return fn.name
    return fn.name or "<fallback>"


def build_call_graph(table: SymbolTable) -> CallGraph:
    graph = CallGraph()
    callables: list[FunctionDefinition | ModifierDefinition] = []
    callables.extend(table.all_functions())
    callables.extend(table.modifiers.values())
    known = {_node_key(c) for c in callables}
    graph.nodes = set(known)

    for fn in callables:
        src = _node_key(fn)
        if isinstance(fn, FunctionDefinition):
            for mod_name, _args in fn.modifiers_invoked:
                if mod_name in known:
                    graph.edges.add((src, mod_name))
                else:
                    graph.unresolved.add((src, mod_name))
        if fn.body is None:
            continue
        for node in walk(fn.body):
            if isinstance(node, CallExpression) and isinstance(node.callee, Identifier):
                callee = node.callee.name
                if callee in known:
                    graph.edges.add((src, callee))
                elif callee not in _BUILTIN_FUNCTIONS and callee not in table.events:
                    graph.unresolved.add((src, callee))
    return graph


_BUILTIN_FUNCTIONS = frozenset({
    "require", "assert", "revert", "selfdestruct", "suicide", "keccak256",
    "sha3", "sha256", "ripemd160", "ecrecover", "addmod", "mulmod",
    "blockhash",
})


# ---------------------------------------------------------------------------
# Def-use / transitive liveness


@dataclass
class VarFacts:
    declaration: VariableDeclaration
    is_parameter: bool
    writes: list[Span] = field(default_factory=list)
    consuming_reads: list[Span] = field(default_factory=list)
    flows_into: set[str] = field(default_factory=set)
    live: bool = True


@dataclass
class DefUseFacts:
    variables: dict[str, VarFacts] = field(default_factory=dict)

    def dead_variables(self) -> list[VarFacts]:
        return [v for v in self.variables.values() if not v.live]


def compute_def_use(function: FunctionDefinition) -> DefUseFacts:
    """Per-variable write/read sites with transitive liveness.

    A variable is live iff some read of it (directly or through a chain
    of local-to-local assignments) reaches anything other than another
    dead local: a state write, return value, condition, call argument,
    event argument, index expression, and so on. Named return variables
    are exempt (implicitly read by the return machinery).
    """
    facts = DefUseFacts()
    for param in function.parameters:
        if param.name:
            facts.variables[param.name] = VarFacts(param, True)
    locals_seen: dict[str, VarFacts] = dict(facts.variables)

    named_returns = {r.name for r in function.returns_ if r.name}

    def var(name: str) -> Optional[VarFacts]:
        v = locals_seen.get(name)
        if v is None or name in named_returns:
            return None
        return v

    def consume_reads(expr: Optional[Expression]) -> None:
        if expr is None:
            return
        for node in walk(expr):
            if isinstance(node, Identifier):
                v = var(node.name)
                if v is not None:
                    v.consuming_reads.append(node.span)

    def flow_reads(expr: Optional[Expression], target: str) -> None:
        if expr is None:
            return
        for node in walk(expr):
            if isinstance(node, Identifier):
                v = var(node.name)
                if v is not None:
                    v.flows_into.add(target)

    def visit_statement(stmt) -> None:
        if isinstance(stmt, VariableDeclarationStatement):
            decl = stmt.declaration
            if decl.name:
                vf = VarFacts(decl, False)
                vf.writes.append(decl.span)
                locals_seen[decl.name] = vf
                facts.variables[decl.name] = vf
                if decl.initializer is not None:
                    flow_reads(decl.initializer, decl.name)
            elif decl.initializer is not None:
                consume_reads(decl.initializer)
        elif isinstance(stmt, ExpressionStatement):
            visit_expression_statement(stmt.expression)
        elif isinstance(stmt, Block):
            for s in stmt.statements:
                visit_statement(s)
        elif isinstance(stmt, IfStatement):
            consume_reads(stmt.condition)
            visit_statement(stmt.then_branch)
            if stmt.else_branch is not None:
                visit_statement(stmt.else_branch)
        elif isinstance(stmt, WhileStatement):
            consume_reads(stmt.condition)
            visit_statement(stmt.body)
        elif isinstance(stmt, ForStatement):
            if stmt.init is not None:
                visit_statement(stmt.init)
            consume_reads(stmt.condition)
            if stmt.post is not None:
                visit_expression_statement(stmt.post)
            visit_statement(stmt.body)
        elif isinstance(stmt, ReturnStatement):
            consume_reads(stmt.value)
        else:
            for child in _statement_expressions(stmt):
                consume_reads(child)

    def visit_expression_statement(expr: Expression) -> None:
        if isinstance(expr, Assignment):
            target = expr.target
            if isinstance(target, Identifier):
                v = var(target.name)
                if v is not None:
                    v.writes.append(target.span)
                    flow_reads(expr.value, target.name)
                    return
                consume_reads(expr.value)  # state or unresolved target
                return
            # container/member stores: the written-through base is a write
            # site, everything read stays conservatively live
            base = _assignment_base(target)
            if base is not None:
                v = var(base.name)
                if v is not None:
                    v.writes.append(base.span)
            for part in _assignment_reads(target):
                consume_reads(part)
            consume_reads(expr.value)
        elif isinstance(expr, UnaryOperation) and expr.operator in ("++", "--"):
            if isinstance(expr.operand, Identifier):
                v = var(expr.operand.name)
                if v is not None:
                    v.writes.append(expr.operand.span)
                    return
            consume_reads(expr.operand)
        else:
            consume_reads(expr)

    if function.body is not None:
        for stmt in function.body.statements:
            visit_statement(stmt)

    # liveness fixpoint over local assignment chains
    for vf in facts.variables.values():
        vf.live = bool(vf.consuming_reads)
    changed = True
    while changed:
        changed = False
        for name, vf in facts.variables.items():
            if vf.live:
                continue
            for target in vf.flows_into:
                tf = facts.variables.get(target)
                if tf is not None and tf.live:
                    vf.live = True
                    changed = True
                    break
    return facts


def _assignment_base(target: Expression) -> Optional[Identifier]:
    while isinstance(target, (IndexAccess, MemberAccess)):
        target = target.base if isinstance(target, IndexAccess) else target.object
    return target if isinstance(target, Identifier) else None


def _assignment_reads(target: Expression) -> Iterable[Expression]:
    if isinstance(target, IndexAccess):
        if target.index is not None:
            yield target.index
        yield from _assignment_reads(target.base)
    elif isinstance(target, MemberAccess):
        yield from _assignment_reads(target.object)


def _statement_expressions(stmt) -> list[Expression]:
    from .nodes import EmitStatement
    if isinstance(stmt, EmitStatement):
        return [stmt.call]
    return []


# ---------------------------------------------------------------------------
# `var` type inference


_MEMBER_TYPES = {
    ("msg", "value"): "uint256",
    ("msg", "sender"): "address",
    ("msg", "gas"): "uint256",
    ("tx", "origin"): "address",
    ("tx", "gasprice"): "uint256",
    ("block", "timestamp"): "uint256",
    ("block", "number"): "uint256",
    ("block", "difficulty"): "uint256",
    ("block", "gaslimit"): "uint256",
    ("block", "coinbase"): "address",
    ("this", "balance"): "uint256",
}


class InferenceError(Exception):
    pass


def infer_var_type(initializer: Optional[Expression],
                   lookup=None) -> Optional[TypeName]:
    """Infer the type a `var` declaration takes from its initializer.

    Integer literals get the smallest uintN (intN when negative) whose
    range contains the value; other initializers get their static type
    when it is derivable, else None (unknown). `lookup(name)` resolves
    identifiers to declared TypeNames.
    """
    if initializer is None:
        raise InferenceError("var declaration without initializer")
    return _infer(initializer, lookup or (lambda name: None))


def smallest_int_type(value: int, span: Span) -> TypeName:
    if value >= 0:
        bits = 8
        while bits < 256 and value >= (1 << bits):
            bits += 8
        return TypeName("elementary", span, name=f"uint{bits}")
    bits = 8
    while bits < 256 and not (-(1 << (bits - 1)) <= value < (1 << (bits - 1))):
        bits += 8
    return TypeName("elementary", span, name=f"int{bits}")


def _infer(expr: Expression, lookup) -> Optional[TypeName]:
    if isinstance(expr, NumberLiteral):
        value = expr.value
        if value is None:
            return None
        return smallest_int_type(value, expr.span)
    if isinstance(expr, BoolLiteral):
        return TypeName("elementary", expr.span, name="bool")
    if isinstance(expr, StringLiteral):
        return TypeName("elementary", expr.span, name="string")
    if isinstance(expr, HexLiteral):
        if expr.is_address:
            return TypeName("elementary", expr.span, name="address")
        return smallest_int_type(expr.value, expr.span)
    if isinstance(expr, UnaryOperation):
        if expr.operator == "-" and isinstance(expr.operand, NumberLiteral):
            value = expr.operand.value
            if value is None:
                return None
            return smallest_int_type(-value, expr.span)
        if expr.operator == "!":
            return TypeName("elementary", expr.span, name="bool")
        return _infer(expr.operand, lookup)
    if isinstance(expr, TupleExpression) and len(expr.components) == 1:
        return _infer(expr.components[0], lookup)
    if isinstance(expr, Identifier):
        return lookup(expr.name)
    if isinstance(expr, MemberAccess):
        if expr.member == "length":
            return TypeName("elementary", expr.span, name="uint256")
        if isinstance(expr.object, Identifier):
            known = _MEMBER_TYPES.get((expr.object.name, expr.member))
            if known:
                return TypeName("elementary", expr.span, name=known)
        base = _infer(expr.object, lookup)
        if base is not None and expr.member == "balance" \
                and base.kind == "elementary" and base.name == "address":
            return TypeName("elementary", expr.span, name="uint256")
        return None
    if isinstance(expr, IndexAccess):
        base = _infer(expr.base, lookup)
        if base is None:
            return None
        if base.kind == "array":
            return base.element
        if base.kind == "mapping":
            return base.value_type
        return None
    if isinstance(expr, CallExpression):
        if isinstance(expr.callee, ElementaryTypeExpression):
            return expr.callee.type_name
        return None
    if isinstance(expr, BinaryOperation):
        if expr.operator in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
            return TypeName("elementary", expr.span, name="bool")
        left = _infer(expr.left, lookup)
        right = _infer(expr.right, lookup)
        lb = left.int_bits() if left is not None else None
        rb = right.int_bits() if right is not None else None
        if lb is not None and rb is not None:
            return left if lb >= rb else right
        return left if left is not None else right
    if isinstance(expr, Conditional):
        return _infer(expr.true_expression, lookup)
    return None

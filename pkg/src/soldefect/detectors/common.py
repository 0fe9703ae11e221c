"""AST pattern helpers shared by the source-mode detectors."""

from __future__ import annotations

from typing import Iterator, Optional

from ..nodes import (Assignment, BinaryOperation, Block, CallExpression,
                     Conditional, Expression, ExpressionStatement,
                     ForStatement, FunctionDefinition, HexLiteral, Identifier,
                     IfStatement, IndexAccess, MemberAccess, NumberLiteral,
                     ReturnStatement, Statement, ThrowStatement,
                     TupleExpression, UnaryOperation,
                     VariableDeclarationStatement, WhileStatement, walk)
from ..semantic import SymbolTable


def unwrap(expr: Expression) -> Expression:
    while isinstance(expr, TupleExpression) and len(expr.components) == 1:
        expr = expr.components[0]
    return expr


# ---------------------------------------------------------------------------
# External call classification

ETHER_SENDING_KINDS = frozenset({"send", "transfer", "callvalue"})
CHECKABLE_CALL_KINDS = frozenset({"send", "call", "callvalue", "delegatecall"})


def external_call_kind(expr: Expression) -> Optional[str]:
    """Classify `x.send(..)`, `x.call(..)`, `x.call.value(..)(..)`,
    `x.delegatecall(..)`, `x.transfer(..)` style call expressions.

    Returns one of send/transfer/call/callvalue/delegatecall/callcode,
    or None when the expression is not a low-level external call. Both
    the invoked form `.call.value(x)()` and the bare builder form
    `.call.value(x)` classify as "callvalue".
    """
    if not isinstance(expr, CallExpression):
        return None
    callee = unwrap(expr.callee)
    if isinstance(callee, CallExpression):
        return external_call_kind(callee)
    if not isinstance(callee, MemberAccess):
        return None
    member = callee.member
    if member in ("send", "transfer", "delegatecall", "callcode"):
        return member
    if member == "call":
        return "call"
    if member in ("value", "gas"):
        inner = unwrap(callee.object)
        if isinstance(inner, MemberAccess):
            if inner.member == "call":
                return "callvalue" if member == "value" else "call"
            if inner.member in ("delegatecall", "callcode"):
                return inner.member
        if isinstance(inner, CallExpression):
            kind = external_call_kind(inner)
            if kind in ("call", "callvalue"):
                return "callvalue" if member == "value" else kind
            return kind
    return None


def call_target(expr: Expression) -> Optional[Expression]:
    """Leftmost object of an external-call chain (the callee address)."""
    node = expr
    while True:
        node = unwrap(node)
        if isinstance(node, CallExpression):
            node = node.callee
        elif isinstance(node, MemberAccess):
            if node.member in ("send", "transfer", "call", "delegatecall",
                               "callcode", "value", "gas"):
                node = node.object
            else:
                return node
        else:
            return node


def call_chain_arguments(expr: Expression) -> list[Expression]:
    """All argument expressions of a call chain, e.g. the value and gas
    amounts plus the final invocation arguments."""
    args: list[Expression] = []
    node: Expression = expr
    while isinstance(node, CallExpression):
        args.extend(node.arguments)
        node = unwrap(node.callee)
        while isinstance(node, MemberAccess):
            obj = unwrap(node.object)
            node = obj
            if isinstance(obj, CallExpression):
                break
    return args


def builtin_call_name(expr: Expression) -> Optional[str]:
    if isinstance(expr, CallExpression):
        callee = unwrap(expr.callee)
        if isinstance(callee, Identifier):
            return callee.name
    return None


def is_guard_call(expr: Expression) -> bool:
    return builtin_call_name(expr) in ("require", "assert")


# ---------------------------------------------------------------------------
# Statement iteration with context


def iter_statements(stmt: Statement | None) -> Iterator[Statement]:
    """Yield stmt and all nested statements."""
    if stmt is None:
        return
    stack = [stmt]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, Block):
            stack.extend(reversed(s.statements))
        elif isinstance(s, IfStatement):
            if s.else_branch is not None:
                stack.append(s.else_branch)
            stack.append(s.then_branch)
        elif isinstance(s, (ForStatement, WhileStatement)):
            if isinstance(s, ForStatement) and s.init is not None:
                stack.append(s.init)
            stack.append(s.body)
    return


def function_expressions(fn: FunctionDefinition) -> Iterator[Expression]:
    if fn.body is None:
        return
    for node in walk(fn.body):
        yield node


def condition_expressions(fn: FunctionDefinition) -> Iterator[Expression]:
    """Branch conditions: if/while/for/ternary conditions plus require and
    assert arguments."""
    if fn.body is None:
        return
    for stmt in iter_statements(fn.body):
        if isinstance(stmt, IfStatement):
            yield stmt.condition
        elif isinstance(stmt, WhileStatement):
            yield stmt.condition
        elif isinstance(stmt, ForStatement) and stmt.condition is not None:
            yield stmt.condition
    for node in walk(fn.body):
        if isinstance(node, Conditional):
            yield node.condition
        elif isinstance(node, CallExpression) and is_guard_call(node):
            for arg in node.arguments:
                yield arg


# ---------------------------------------------------------------------------
# Loop bounds


def bound_is_constant(condition: Optional[Expression],
                      table: SymbolTable) -> bool:
    """A loop bound is constant when the comparison involves a literal or
    a `constant` state variable with a literal initializer."""
    if condition is None:
        return False
    condition = unwrap(condition)
    if not isinstance(condition, BinaryOperation):
        return False
    if condition.operator not in ("<", "<=", ">", ">=", "!=", "=="):
        return False
    return (_is_compile_time_constant(condition.left, table)
            or _is_compile_time_constant(condition.right, table))


def _is_compile_time_constant(expr: Expression, table: SymbolTable) -> bool:
    expr = unwrap(expr)
    if isinstance(expr, (NumberLiteral, HexLiteral)):
        return True
    if isinstance(expr, UnaryOperation) and isinstance(unwrap(expr.operand),
                                                       (NumberLiteral, HexLiteral)):
        return True
    if isinstance(expr, Identifier):
        decl = table.lookup_state(expr.name)
        return (decl is not None and decl.is_constant
                and isinstance(decl.initializer, (NumberLiteral, HexLiteral)))
    return False


def loops_with_nonconstant_bound(fn: FunctionDefinition, table: SymbolTable
                                 ) -> Iterator[tuple[Statement, Statement]]:
    """Yield (loop, body) for each for/while loop whose bound is not a
    compile-time constant, including loops nested under one."""

    def visit(stmt: Statement, enclosing_nonconst: bool) -> None:
        if isinstance(stmt, (ForStatement, WhileStatement)):
            nonconst = (enclosing_nonconst
                        or not bound_is_constant(stmt.condition, table))
            if nonconst:
                found.append((stmt, stmt.body))
            visit(stmt.body, nonconst)
        elif isinstance(stmt, Block):
            for s in stmt.statements:
                visit(s, enclosing_nonconst)
        elif isinstance(stmt, IfStatement):
            visit(stmt.then_branch, enclosing_nonconst)
            if stmt.else_branch is not None:
                visit(stmt.else_branch, enclosing_nonconst)

    found: list[tuple[Statement, Statement]] = []
    if fn.body is not None:
        visit(fn.body, False)
    return iter(found)


# ---------------------------------------------------------------------------
# State writes and local scopes


def local_names(fn: FunctionDefinition) -> set[str]:
    names = {p.name for p in fn.parameters if p.name}
    names |= {r.name for r in fn.returns_ if r.name}
    if fn.body is not None:
        for stmt in iter_statements(fn.body):
            if isinstance(stmt, VariableDeclarationStatement) and stmt.declaration.name:
                names.add(stmt.declaration.name)
    return names


def _store_base(expr: Expression) -> Optional[Identifier]:
    expr = unwrap(expr)
    while isinstance(expr, (IndexAccess, MemberAccess)):
        expr = expr.base if isinstance(expr, IndexAccess) else expr.object
        expr = unwrap(expr)
    return expr if isinstance(expr, Identifier) else None


def state_write_targets(fn: FunctionDefinition,
                        table: SymbolTable) -> list[tuple[str, Expression]]:
    """(state variable name, writing expression) pairs within fn's body."""
    if fn.body is None:
        return []
    shadowed = local_names(fn)
    writes: list[tuple[str, Expression]] = []

    def record(expr: Expression) -> None:
        base = _store_base(expr)
        if base is None:
            return
        name = base.name
        if name not in shadowed and table.lookup_state(name) is not None:
            writes.append((name, expr))

    for node in walk(fn.body):
        if isinstance(node, Assignment):
            record(node.target)
        elif isinstance(node, UnaryOperation) and node.operator in ("++", "--", "delete"):
            record(node.operand)
        elif isinstance(node, CallExpression):
            callee = unwrap(node.callee)
            if isinstance(callee, MemberAccess) and callee.member in ("push", "pop"):
                record(callee.object)
    return writes


def has_state_write(fn: FunctionDefinition, table: SymbolTable) -> bool:
    return bool(state_write_targets(fn, table))


def state_reads_in(expr: Expression, table: SymbolTable,
                   shadowed: set[str]) -> set[str]:
    names: set[str] = set()
    for node in walk(expr):
        if isinstance(node, Identifier) and node.name not in shadowed \
                and table.lookup_state(node.name) is not None:
            names.add(node.name)
    return names


def local_storage_dependencies(fn: FunctionDefinition, table: SymbolTable
                               ) -> dict[str, set[str]]:
    """For each local, the state variables its value was derived from
    (through chains of local assignments, two propagation passes)."""
    shadowed = local_names(fn)
    deps: dict[str, set[str]] = {}
    if fn.body is None:
        return deps

    def rhs_deps(expr: Expression) -> set[str]:
        found = set(state_reads_in(expr, table, shadowed))
        for node in walk(expr):
            if isinstance(node, Identifier) and node.name in deps:
                found |= deps[node.name]
        return found

    for _ in range(2):
        for stmt in iter_statements(fn.body):
            if isinstance(stmt, VariableDeclarationStatement):
                decl = stmt.declaration
                if decl.name and decl.initializer is not None:
                    deps[decl.name] = deps.get(decl.name, set()) | rhs_deps(decl.initializer)
            elif isinstance(stmt, ExpressionStatement):
                expr = unwrap(stmt.expression)
                if isinstance(expr, Assignment) and isinstance(expr.target, Identifier):
                    name = expr.target.name
                    if name in shadowed:
                        deps[name] = deps.get(name, set()) | rhs_deps(expr.value)
    return deps


# ---------------------------------------------------------------------------
# Misc


def is_balance_expression(expr: Expression) -> bool:
    """Matches this.balance and address(this).balance."""
    expr = unwrap(expr)
    if not isinstance(expr, MemberAccess) or expr.member != "balance":
        return False
    obj = unwrap(expr.object)
    if isinstance(obj, Identifier) and obj.name == "this":
        return True
    if isinstance(obj, CallExpression):
        from ..nodes import ElementaryTypeExpression
        callee = unwrap(obj.callee)
        if (isinstance(callee, ElementaryTypeExpression)
                and callee.type_name.name == "address"
                and len(obj.arguments) == 1):
            inner = unwrap(obj.arguments[0])
            return isinstance(inner, Identifier) and inner.name == "this"
    return False


def is_tx_origin(expr: Expression) -> bool:
    expr = unwrap(expr)
    return (isinstance(expr, MemberAccess) and expr.member == "origin"
            and isinstance(unwrap(expr.object), Identifier)
            and unwrap(expr.object).name == "tx")


def returns_on_all_paths(stmt: Statement | None) -> bool:
    """Conservatively: does every path through stmt end in return/throw/revert?"""
    if stmt is None:
        return False
    if isinstance(stmt, (ReturnStatement, ThrowStatement)):
        return True
    if isinstance(stmt, ExpressionStatement):
        return builtin_call_name(unwrap(stmt.expression)) == "revert"
    if isinstance(stmt, Block):
        return any(returns_on_all_paths(s) for s in stmt.statements)
    if isinstance(stmt, IfStatement):
        return (stmt.else_branch is not None
                and returns_on_all_paths(stmt.then_branch)
                and returns_on_all_paths(stmt.else_branch))
    return False


def payable_functions(contract_functions: list[FunctionDefinition]
                      ) -> list[FunctionDefinition]:
    return [f for f in contract_functions if f.is_payable]

"""Security defect detectors (nine kinds)."""

from __future__ import annotations

from ..nodes import (Assignment, BinaryOperation, CallExpression,
                     ExpressionStatement, ForStatement, Identifier,
                     IfStatement, IndexAccess, MemberAccess, ModifierDefinition,
                     NumberLiteral, Statement, ThrowStatement, TypeName,
                     VariableDeclarationStatement, WhileStatement, walk)
from ..report import Finding
from ..semantic import infer_var_type
from ..spans import Span
from .base import (AnalysisContext, DetectorDescriptor, register,
                   source_finding)
from .common import (CHECKABLE_CALL_KINDS, ETHER_SENDING_KINDS,
                     builtin_call_name, call_chain_arguments, call_target,
                     condition_expressions, external_call_kind,
                     is_balance_expression, is_guard_call, is_tx_origin,
                     iter_statements, local_names, local_storage_dependencies,
                     loops_with_nonconstant_bound, state_reads_in,
                     state_write_targets, unwrap)

# ---------------------------------------------------------------------------


UNCHECKED_EXTERNAL_CALLS = DetectorDescriptor(
    code="D01", id="unchecked-external-calls", name="Unchecked External Calls",
    category="security", impact="IP3",
    impact_note="IP3 type 2: major unwanted behavior (partial ether loss)",
    frontends=frozenset({"source"}),
    description="The boolean result of a low-level external call "
                "(send/call/call.value/delegatecall) is ignored.",
    advice="Check the boolean result of send/call/delegatecall, or use "
           "transfer so a failed send reverts.",
)


@register(UNCHECKED_EXTERNAL_CALLS)
def detect_unchecked_external_calls(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            for stmt in iter_statements(fn.body):
                if not isinstance(stmt, ExpressionStatement):
                    continue
                expr = unwrap(stmt.expression)
                kind = external_call_kind(expr)
                if kind in CHECKABLE_CALL_KINDS:
                    findings.append(source_finding(
                        UNCHECKED_EXTERNAL_CALLS, src.file_id, stmt.span,
                        f"result of .{_kind_spelling(kind)} is not checked"))
    return findings


def _kind_spelling(kind: str) -> str:
    return "call.value" if kind == "callvalue" else kind


# ---------------------------------------------------------------------------


DOS_UNDER_EXTERNAL_INFLUENCE = DetectorDescriptor(
    code="D02", id="dos-under-external-influence",
    name="DoS Under External Influence",
    category="security", impact="IP2",
    frontends=frozenset({"source"}),
    description="A statement that can revert the whole transaction sits "
                "inside a loop whose bound is not a compile-time constant.",
    advice="Avoid statements that can revert inside unbounded loops; check a "
           "boolean send result and continue instead of reverting.",
)


@register(DOS_UNDER_EXTERNAL_INFLUENCE)
def detect_dos_under_external_influence(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            for _loop, body in loops_with_nonconstant_bound(fn, cf.table):
                for stmt in iter_statements(body):
                    reason = _reverting_statement(stmt)
                    if reason is not None:
                        findings.append(source_finding(
                            DOS_UNDER_EXTERNAL_INFLUENCE, src.file_id, stmt.span,
                            f"{reason} can revert the whole transaction inside "
                            f"a loop without a constant bound"))
    return findings


def _reverting_statement(stmt: Statement) -> str | None:
    if isinstance(stmt, ThrowStatement):
        return "throw"
    if not isinstance(stmt, ExpressionStatement):
        return None
    expr = unwrap(stmt.expression)
    name = builtin_call_name(expr)
    if name in ("require", "assert", "revert"):
        return f"{name}()"
    if external_call_kind(expr) == "transfer":
        return ".transfer()"
    return None


# ---------------------------------------------------------------------------


STRICT_BALANCE_EQUALITY = DetectorDescriptor(
    code="D03", id="strict-balance-equality", name="Strict Balance Equality",
    category="security", impact="IP2",
    frontends=frozenset({"source", "bytecode"}),
    description="The contract balance is compared with == in a branch "
                "condition; forced ether transfers break exact checks.",
    advice="Compare the balance with a range (>= and <) instead of strict "
           "equality; anyone can force ether into a contract.",
)


@register(STRICT_BALANCE_EQUALITY)
def detect_strict_balance_equality(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    operators = {"=="}
    if ctx.config.strict_balance_neq:
        operators.add("!=")
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            for cond in condition_expressions(fn):
                for node in walk(cond):
                    if (isinstance(node, BinaryOperation)
                            and node.operator in operators
                            and (is_balance_expression(node.left)
                                 or is_balance_expression(node.right))):
                        findings.append(source_finding(
                            STRICT_BALANCE_EQUALITY, src.file_id, node.span,
                            f"branch condition compares the contract balance "
                            f"with {node.operator}"))
    return findings


# ---------------------------------------------------------------------------


UNMATCHED_TYPE_ASSIGNMENT = DetectorDescriptor(
    code="D04", id="unmatched-type-assignment", name="Unmatched Type Assignment",
    category="security", impact="IP2",
    frontends=frozenset({"source"}),
    description="A loop counter is narrower than its bound, so incrementing "
                "it can overflow and the loop never terminates.",
    advice="Declare the loop counter as uint256 (or match the bound's type) "
           "so the counter cannot wrap around.",
)


@register(UNMATCHED_TYPE_ASSIGNMENT)
def detect_unmatched_type_assignment(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        state_types = {v.name: v.type_name for v in cf.table.state_variables.values()}

        def lookup(name: str) -> TypeName | None:
            return state_types.get(name)

        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            for stmt in iter_statements(fn.body):
                if not isinstance(stmt, ForStatement) or stmt.condition is None:
                    continue
                counter = _loop_counter(stmt)
                if counter is None:
                    continue
                counter_name, counter_type = counter
                if counter_type is not None and counter_type.kind == "var":
                    try:
                        counter_type = infer_var_type(
                            _counter_initializer(stmt, counter_name), lookup)
                    except Exception:
                        counter_type = None
                if counter_type is None:
                    continue
                bits = counter_type.int_bits()
                if bits is None:
                    continue
                problem = _bound_exceeds(stmt.condition, counter_name, bits,
                                         cf.table, fn)
                if problem:
                    findings.append(source_finding(
                        UNMATCHED_TYPE_ASSIGNMENT, src.file_id, stmt.span,
                        f"loop counter {counter_name} is "
                        f"{counter_type.canonical()} but the loop bound "
                        f"{problem}"))
    return findings


def _loop_counter(stmt: ForStatement) -> tuple[str, TypeName | None] | None:
    init = stmt.init
    if isinstance(init, VariableDeclarationStatement) and init.declaration.name:
        return init.declaration.name, init.declaration.type_name
    if isinstance(init, ExpressionStatement):
        expr = unwrap(init.expression)
        if isinstance(expr, Assignment) and isinstance(expr.target, Identifier):
            return expr.target.name, None
    return None


def _counter_initializer(stmt: ForStatement, name: str):
    init = stmt.init
    if isinstance(init, VariableDeclarationStatement):
        return init.declaration.initializer
    return None


def _bound_exceeds(condition, counter_name: str, counter_bits: int,
                   table, fn) -> str | None:
    condition = unwrap(condition)
    if not isinstance(condition, BinaryOperation) \
            or condition.operator not in ("<", "<=", ">", ">=", "!="):
        return None
    left, right = unwrap(condition.left), unwrap(condition.right)
    if isinstance(left, Identifier) and left.name == counter_name:
        bound = right
    elif isinstance(right, Identifier) and right.name == counter_name:
        bound = left
    else:
        return None
    if isinstance(bound, NumberLiteral):
        value = bound.value
        if value is None:
            return None
        # the counter must be able to reach the bound, else the loop wraps
        threshold = 1 << counter_bits
        if condition.operator in ("<=", ">="):
            threshold -= 1
        if value >= threshold:
            return f"{bound.text} exceeds its {counter_bits}-bit range"
        return None
    bound_bits = _static_bits(bound, table, fn)
    if bound_bits is not None and bound_bits > counter_bits:
        return f"has a {bound_bits}-bit type"
    return None


def _static_bits(expr, table, fn) -> int | None:
    if isinstance(expr, MemberAccess) and expr.member == "length":
        return 256
    if isinstance(expr, Identifier):
        decl = table.lookup_state(expr.name)
        if decl is None:
            decl = next((p for p in fn.parameters if p.name == expr.name), None)
        if decl is not None:
            return decl.type_name.int_bits()
        return 256  # unresolved names: assume full width
    return None


# ---------------------------------------------------------------------------


TRANSACTION_STATE_DEPENDENCY = DetectorDescriptor(
    code="D05", id="transaction-state-dependency",
    name="Transaction State Dependency",
    category="security", impact="IP1",
    frontends=frozenset({"source"}),
    description="tx.origin is used for a permission check; intermediary "
                "contracts can make the check pass for an attacker.",
    advice="Use msg.sender for permission checks; tx.origin names the "
           "transaction originator, not the immediate caller.",
)


@register(TRANSACTION_STATE_DEPENDENCY)
def detect_transaction_state_dependency(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            if ctx.config.strict_tx_origin_all_uses:
                spots = [node for node in walk(fn.body) if is_tx_origin(node)]
            else:
                spots = []
                for cond in condition_expressions(fn):
                    spots.extend(n for n in walk(cond) if is_tx_origin(n))
                if isinstance(fn, ModifierDefinition):
                    for node in walk(fn.body):
                        if (isinstance(node, BinaryOperation)
                                and node.operator in ("==", "!=")
                                and (is_tx_origin(node.left)
                                     or is_tx_origin(node.right))):
                            spots.append(node)
            for node in spots:
                findings.append(source_finding(
                    TRANSACTION_STATE_DEPENDENCY, src.file_id, node.span,
                    "tx.origin used in a permission check"))
    return findings


# ---------------------------------------------------------------------------


BLOCK_INFO_DEPENDENCY = DetectorDescriptor(
    code="D06", id="block-info-dependency", name="Block Info Dependency",
    category="security", impact="IP3",
    impact_note="IP3 type 2: major unwanted behavior, externally triggerable",
    frontends=frozenset({"source"}),
    description="Miner-controllable block data (blockhash, timestamp, "
                "number, ...) flows into a branch condition, array index, "
                "or ether transfer.",
    advice="Do not derive control flow or randomness from miner-influenced "
           "block data; use commit-reveal schemes or oracle input.",
)

_BLOCK_MEMBERS = frozenset({"blockhash", "timestamp", "number", "difficulty",
                            "coinbase"})


def _block_info_sources(expr) -> list[Span]:
    spans = []
    for node in walk(expr):
        if isinstance(node, MemberAccess) and node.member in _BLOCK_MEMBERS \
                and isinstance(unwrap(node.object), Identifier) \
                and unwrap(node.object).name == "block":
            spans.append(node.span)
        elif isinstance(node, Identifier) and node.name == "now":
            spans.append(node.span)
        elif isinstance(node, CallExpression) \
                and builtin_call_name(node) == "blockhash":
            spans.append(node.span)
    return spans


@register(BLOCK_INFO_DEPENDENCY)
def detect_block_info_dependency(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            taint = _block_taint_map(fn)

            def origins(expr) -> list[Span]:
                found = list(_block_info_sources(expr))
                for node in walk(expr):
                    if isinstance(node, Identifier) and node.name in taint:
                        found.extend(taint[node.name])
                return found

            sinks: list = list(condition_expressions(fn))
            for node in walk(fn.body):
                if isinstance(node, IndexAccess) and node.index is not None:
                    sinks.append(node.index)
                kind = external_call_kind(node)
                if kind in ETHER_SENDING_KINDS:
                    sinks.extend(call_chain_arguments(node))
                    target = call_target(node)
                    if target is not None:
                        sinks.append(target)
            for sink in sinks:
                for span in origins(sink):
                    findings.append(source_finding(
                        BLOCK_INFO_DEPENDENCY, src.file_id, span,
                        "block information influences contract logic"))
    return findings


def _block_taint_map(fn) -> dict[str, list[Span]]:
    """local name -> source spans of block info flowing into it."""
    taint: dict[str, list[Span]] = {}
    body = fn.body
    if body is None:
        return taint
    for _ in range(2):  # two passes to close simple chains
        for stmt in iter_statements(body):
            target = None
            value = None
            if isinstance(stmt, VariableDeclarationStatement) \
                    and stmt.declaration.name and stmt.declaration.initializer is not None:
                target = stmt.declaration.name
                value = stmt.declaration.initializer
            elif isinstance(stmt, ExpressionStatement):
                expr = unwrap(stmt.expression)
                if isinstance(expr, Assignment) and isinstance(expr.target, Identifier):
                    target = expr.target.name
                    value = expr.value
            if target is None or value is None:
                continue
            spans = list(_block_info_sources(value))
            for node in walk(value):
                if isinstance(node, Identifier) and node.name in taint \
                        and node.name != target:
                    spans.extend(taint[node.name])
            if spans:
                existing = taint.setdefault(target, [])
                for s in spans:
                    if s not in existing:
                        existing.append(s)
    return taint


# ---------------------------------------------------------------------------


REENTRANCY = DetectorDescriptor(
    code="D07", id="reentrancy", name="Reentrancy",
    category="security", impact="IP1",
    frontends=frozenset({"source"}),
    description="A call.value external call runs before the storage the "
                "call was guarded by is updated, so the callee can re-enter.",
    advice="Update state before making the external call, or use "
           "transfer/send whose gas stipend prevents re-entrant calls.",
)


@register(REENTRANCY)
def detect_reentrancy(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions:
            if fn.body is None:
                continue
            shadowed = local_names(fn)
            deps = local_storage_dependencies(fn, cf.table)
            writes = state_write_targets(fn, cf.table)
            for call, guards in _guarded_calls(fn):
                if external_call_kind(call) != "callvalue":
                    continue
                guarded_state: set[str] = set()
                for guard in guards:
                    guarded_state |= state_reads_in(guard, cf.table, shadowed)
                    for node in walk(guard):
                        if isinstance(node, Identifier) and node.name in deps:
                            guarded_state |= deps[node.name]
                if not guarded_state:
                    continue
                call_offset = call.span.offset
                for name, write_expr in writes:
                    if name in guarded_state and write_expr.span.offset > call_offset:
                        findings.append(source_finding(
                            REENTRANCY, src.file_id, call.span,
                            f"external call precedes the update of "
                            f"{name}, which its guard reads"))
                        break
    return findings


def _guarded_calls(fn):
    """Yield (call expression, guard condition list) for every call in the
    body; guards are the enclosing if/while conditions plus require/assert
    arguments that appear earlier in the function."""
    calls: list[tuple] = []
    prior_guards: list = []

    def visit(stmt, conditions: tuple) -> None:
        if isinstance(stmt, IfStatement):
            _collect_calls(stmt.condition, conditions, calls)
            visit(stmt.then_branch, conditions + (stmt.condition,))
            if stmt.else_branch is not None:
                visit(stmt.else_branch, conditions + (stmt.condition,))
        elif isinstance(stmt, WhileStatement):
            _collect_calls(stmt.condition, conditions, calls)
            visit(stmt.body, conditions + (stmt.condition,))
        elif isinstance(stmt, ForStatement):
            if stmt.condition is not None:
                _collect_calls(stmt.condition, conditions, calls)
            visit(stmt.body, conditions + ((stmt.condition,) if stmt.condition else ()))
        elif hasattr(stmt, "statements"):
            for s in stmt.statements:
                visit(s, conditions)
        else:
            exprs = []
            if isinstance(stmt, ExpressionStatement):
                exprs = [stmt.expression]
            elif isinstance(stmt, VariableDeclarationStatement) \
                    and stmt.declaration.initializer is not None:
                exprs = [stmt.declaration.initializer]
            for expr in exprs:
                if is_guard_call(unwrap(expr)):
                    prior_guards.extend(unwrap(expr).arguments)
                _collect_calls(expr, conditions + tuple(prior_guards), calls)

    if fn.body is not None:
        visit(fn.body, ())
    return calls


def _collect_calls(expr, conditions, out) -> None:
    for node in walk(expr):
        if isinstance(node, CallExpression) and external_call_kind(node) is not None:
            guards = [c for c in conditions if c is not None
                      and not _contains(c, node)]
            out.append((node, guards))


def _contains(container, node) -> bool:
    return any(n is node for n in walk(container))


# ---------------------------------------------------------------------------


NESTED_CALL = DetectorDescriptor(
    code="D08", id="nested-call", name="Nested Call",
    category="security", impact="IP2",
    frontends=frozenset({"source", "bytecode"}),
    description="An external call executes inside a loop whose iteration "
                "count is not bounded by a constant; gas use is unbounded.",
    advice="Bound the number of loop iterations before performing external "
           "calls inside the loop.",
)


@register(NESTED_CALL)
def detect_nested_call(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            for loop, body in loops_with_nonconstant_bound(fn, cf.table):
                for node in walk(body):
                    kind = external_call_kind(node)
                    if kind in ("call", "callvalue", "send", "transfer"):
                        findings.append(source_finding(
                            NESTED_CALL, src.file_id, loop.span,
                            "external call inside a loop without a constant "
                            "bound"))
                        break
    return findings


# ---------------------------------------------------------------------------


MISLEADING_DATA_LOCATION = DetectorDescriptor(
    code="D09", id="misleading-data-location", name="Misleading Data Location",
    category="security", impact="IP2",
    frontends=frozenset({"source"}),
    description="A reference-typed local (array/mapping/bytes/string) has no "
                "explicit data location and silently aliases storage slot 0.",
    advice="Declare the data location (memory) explicitly for array, struct "
           "and mapping locals; they default to storage pointers.",
)


@register(MISLEADING_DATA_LOCATION)
def detect_misleading_data_location(ctx: AnalysisContext) -> list[Finding]:
    findings = []
    src = ctx.source
    for cf in src.contracts:
        for fn in cf.contract.functions + cf.contract.modifiers:
            if fn.body is None:
                continue
            for stmt in iter_statements(fn.body):
                if not isinstance(stmt, VariableDeclarationStatement):
                    continue
                decl = stmt.declaration
                if decl.data_location == "unspecified" \
                        and decl.type_name.is_reference_type():
                    findings.append(source_finding(
                        MISLEADING_DATA_LOCATION, src.file_id, stmt.span,
                        f"local {decl.type_name.canonical()} "
                        f"{decl.name or '<unnamed>'} has no data location and "
                        f"points at storage"))
    return findings

"""Recursive-descent parser for the Solidity subset.

Covers 0.4.x-era constructs needed by the defect detectors: pragmas,
contracts/interfaces/libraries with inheritance lists, state variables,
functions (fallback, `function constructor()` and `constructor()`),
modifiers with `_;`, events, the statement/expression families, `var`
declarations, ether units, and address/number/hex/string literals.

Syntax errors recover at statement level (skip to the next `;` or `}`),
so an error in one function never hides its siblings. Unsupported
member kinds (struct/enum/using) are skipped with a "partial analysis"
warning instead of failing the file.
"""

from __future__ import annotations

from .lexer import (COMMENT, ETHER_UNITS, HEX, IDENTIFIER, KEYWORD,
                    NUMBER, STRING, Token, is_elementary_type_name, tokenize)
from .nodes import (Assignment, BinaryOperation, Block, BoolLiteral,
                    BreakStatement, CallExpression, Conditional,
                    ContinueStatement, ContractDefinition,
                    ElementaryTypeExpression, EmitStatement, EventDefinition,
                    Expression, ExpressionStatement, ForStatement,
                    FunctionDefinition, HexLiteral, Identifier, IfStatement,
                    IndexAccess, MemberAccess, ModifierDefinition,
                    NumberLiteral, PlaceholderStatement, PragmaDirective,
                    ReturnStatement, SourceUnit, Statement, StringLiteral,
                    ThrowStatement, TupleExpression, TypeName, UnaryOperation,
                    VariableDeclaration, VariableDeclarationStatement,
                    WhileStatement)
from .spans import Diagnostic, Span, join_spans

_VISIBILITY = ("public", "private", "internal", "external")
_MUTABILITY = ("constant", "view", "pure")

# (precedence, right-associative); higher binds tighter
_BINARY_OPS = {
    "||": (1, False),
    "&&": (2, False),
    "==": (3, False), "!=": (3, False),
    "<": (4, False), ">": (4, False), "<=": (4, False), ">=": (4, False),
    "|": (5, False),
    "^": (6, False),
    "&": (7, False),
    "<<": (8, False), ">>": (8, False),
    "+": (9, False), "-": (9, False),
    "*": (10, False), "/": (10, False), "%": (10, False),
    "**": (11, True),
}

_ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>="})

_UNARY_PREFIX = frozenset({"!", "~", "-", "+", "++", "--"})


class ParseError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class ParseResult:
    """A SourceUnit plus the diagnostics produced while building it."""

    def __init__(self, unit: SourceUnit, diagnostics: list[Diagnostic]):
        self.unit = unit
        self.diagnostics = diagnostics

    @property
    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


def parse_source(source_text: str, file_id: str) -> ParseResult:
    return parse(tokenize(source_text, file_id), file_id)


def parse(tokens: list[Token], file_id: str = "<input>") -> ParseResult:
    return _Parser(tokens, file_id).parse_source_unit()


class _Parser:
    def __init__(self, tokens: list[Token], file_id: str):
        self.tokens = [t for t in tokens if t.kind != COMMENT]
        self.pos = 0
        self.file_id = file_id
        self.diagnostics: list[Diagnostic] = []
        self._eof_span = (self.tokens[-1].span if self.tokens
                          else Span(file_id, 1, 1, 0, 0))

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.text == text

    def at_kind(self, kind: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == kind

    def advance(self) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self._eof_span)
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t is None or t.text != text:
            got = t.text if t else "end of input"
            raise ParseError(f"expected {text!r}, found {got!r}",
                             t.span if t else self._eof_span)
        return self.advance()

    def expect_identifier(self) -> Token:
        t = self.peek()
        if t is None or t.kind != IDENTIFIER:
            got = t.text if t else "end of input"
            raise ParseError(f"expected identifier, found {got!r}",
                             t.span if t else self._eof_span)
        return self.advance()

    def error(self, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic("error", message, span))

    def warn(self, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic("warning", message, span))

    def _span_from(self, start: Span) -> Span:
        last = self.tokens[self.pos - 1].span if self.pos else start
        if last.offset < start.offset:
            last = start
        return join_spans(start, last)

    def _skip_balanced_braces(self) -> None:
        depth = 0
        while self.peek() is not None:
            t = self.advance()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth <= 0:
                    return
            elif t.text == ";" and depth == 0:
                return

    def _recover_statement(self) -> None:
        """Skip to just past the next `;`, or stop before a brace boundary."""
        depth = 0
        while self.peek() is not None:
            t = self.peek()
            if t.text == ";" and depth == 0:
                self.advance()
                return
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                if depth == 0:
                    return
                depth -= 1
            self.advance()

    # -- top level ---------------------------------------------------------

    def parse_source_unit(self) -> ParseResult:
        start = self.peek().span if self.peek() else self._eof_span
        pragmas: list[PragmaDirective] = []
        contracts: list[ContractDefinition] = []
        while self.peek() is not None:
            t = self.peek()
            try:
                if t.text == "pragma":
                    pragmas.append(self.parse_pragma())
                elif t.text in ("contract", "interface", "library"):
                    contracts.append(self.parse_contract())
                elif t.text == "import":
                    self.warn("import directives are ignored (partial analysis)", t.span)
                    while self.peek() is not None and not self.at(";"):
                        self.advance()
                    if self.at(";"):
                        self.advance()
                else:
                    self.error(f"unexpected {t.text!r} at top level", t.span)
                    self.advance()
            except ParseError as exc:
                self.error(exc.message, exc.span)
                self._skip_balanced_braces()
        unit = SourceUnit(pragmas, contracts, self._span_from(start))
        return ParseResult(unit, self.diagnostics)

    def parse_pragma(self) -> PragmaDirective:
        start = self.expect("pragma").span
        name = self.expect_identifier()
        parts: list[Token] = []
        while self.peek() is not None and not self.at(";"):
            parts.append(self.advance())
        end = self.expect(";")
        version_text = "".join(t.text for t in parts)
        kind = _classify_pragma(name.text, parts)
        return PragmaDirective(name.text, kind, version_text,
                               join_spans(start, end.span))

    def parse_contract(self) -> ContractDefinition:
        kw = self.advance()  # contract | interface | library
        name = self.expect_identifier()
        bases: list[str] = []
        if self.at("is"):
            self.advance()
            bases.append(self.expect_identifier().text)
            while self.at(","):
                self.advance()
                bases.append(self.expect_identifier().text)
        self.expect("{")
        contract = ContractDefinition(name.text, kw.text, bases, [], [], [], [],
                                      kw.span)
        while self.peek() is not None and not self.at("}"):
            self.parse_contract_member(contract)
        end = self.expect("}")
        contract.span = join_spans(kw.span, end.span)
        return contract

    def parse_contract_member(self, contract: ContractDefinition) -> None:
        t = self.peek()
        try:
            if t.text == "function" or (t.text == "constructor" and self.at("(", 1)):
                contract.functions.append(self.parse_function())
            elif t.text == "modifier":
                contract.modifiers.append(self.parse_modifier())
            elif t.text == "event":
                contract.events.append(self.parse_event())
            elif t.text in ("struct", "enum"):
                self.warn(f"{t.text} definitions are not analyzed (partial analysis)",
                          t.span)
                self.advance()
                if self.at_kind(IDENTIFIER):
                    self.advance()
                self._skip_balanced_braces()
            elif t.text == "using":
                self.warn("using-for directives are ignored (partial analysis)", t.span)
                while self.peek() is not None and not self.at(";"):
                    self.advance()
                if self.at(";"):
                    self.advance()
            else:
                contract.state_variables.append(self.parse_state_variable())
        except ParseError as exc:
            self.error(exc.message, exc.span)
            self._recover_member()

    def _recover_member(self) -> None:
        """Skip to the start of the next member so siblings still parse."""
        depth = 0
        while self.peek() is not None:
            t = self.peek()
            if depth == 0 and t.text in ("function", "modifier", "event", "constructor"):
                return
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                if depth == 0:
                    return
                depth -= 1
            elif t.text == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    def parse_state_variable(self) -> VariableDeclaration:
        start = self.peek().span
        type_name = self.parse_type_name()
        visibility = "default"
        is_constant = False
        while True:
            if self.peek() is not None and self.peek().text in _VISIBILITY:
                visibility = self.advance().text
            elif self.at("constant"):
                is_constant = True
                self.advance()
            else:
                break
        name = self.expect_identifier()
        initializer = None
        if self.at("="):
            self.advance()
            initializer = self.parse_expression()
        end = self.expect(";")
        return VariableDeclaration(name.text, type_name,
                                   join_spans(start, end.span),
                                   initializer=initializer,
                                   visibility=visibility,
                                   is_constant=is_constant)

    def parse_function(self) -> FunctionDefinition:
        start = self.peek().span
        is_constructor = False
        name = ""
        if self.at("constructor"):
            self.advance()
            is_constructor = True
        else:
            self.expect("function")
            if self.at_kind(IDENTIFIER) or (self.peek() is not None
                                            and self.peek().text == "constructor"):
                name = self.advance().text
                if name == "constructor":
                    is_constructor = True
        parameters = self.parse_parameter_list()
        visibility = "default"
        is_payable = False
        mutability = None
        modifiers: list[tuple[str, list[Expression]]] = []
        returns_: list[VariableDeclaration] = []
        while self.peek() is not None and not self.at("{") and not self.at(";"):
            t = self.peek()
            if t.text in _VISIBILITY:
                visibility = self.advance().text
            elif t.text == "payable":
                is_payable = True
                self.advance()
            elif t.text in _MUTABILITY:
                mutability = self.advance().text
            elif t.text == "returns":
                self.advance()
                returns_ = self.parse_parameter_list()
            elif t.kind == IDENTIFIER:
                self.advance()
                args: list[Expression] = []
                if self.at("("):
                    self.advance()
                    if not self.at(")"):
                        args.append(self.parse_expression())
                        while self.at(","):
                            self.advance()
                            args.append(self.parse_expression())
                    self.expect(")")
                modifiers.append((t.text, args))
            else:
                raise ParseError(f"unexpected {t.text!r} in function header", t.span)
        body = None
        if self.at("{"):
            body = self.parse_block()
        else:
            self.expect(";")
        return FunctionDefinition(name, parameters, returns_, visibility,
                                  is_payable, mutability, modifiers, body,
                                  is_constructor, self._span_from(start))

    def parse_modifier(self) -> ModifierDefinition:
        start = self.expect("modifier").span
        name = self.expect_identifier()
        parameters: list[VariableDeclaration] = []
        if self.at("("):
            parameters = self.parse_parameter_list()
        body = self.parse_block()
        return ModifierDefinition(name.text, parameters, body,
                                  self._span_from(start))

    def parse_event(self) -> EventDefinition:
        start = self.expect("event").span
        name = self.expect_identifier()
        parameters = self.parse_parameter_list()
        anonymous = False
        if self.at("anonymous"):
            anonymous = True
            self.advance()
        end = self.expect(";")
        return EventDefinition(name.text, parameters, anonymous,
                               join_spans(start, end.span))

    def parse_parameter_list(self) -> list[VariableDeclaration]:
        self.expect("(")
        params: list[VariableDeclaration] = []
        if not self.at(")"):
            params.append(self.parse_parameter())
            while self.at(","):
                self.advance()
                params.append(self.parse_parameter())
        self.expect(")")
        return params

    def parse_parameter(self) -> VariableDeclaration:
        start = self.peek().span if self.peek() else self._eof_span
        type_name = self.parse_type_name()
        location = "unspecified"
        is_indexed = False
        while True:
            t = self.peek()
            if t is not None and t.text in ("memory", "storage", "calldata"):
                location = self.advance().text
            elif t is not None and t.text == "indexed":
                is_indexed = True
                self.advance()
            else:
                break
        name = ""
        if self.at_kind(IDENTIFIER):
            name = self.advance().text
        return VariableDeclaration(name, type_name, self._span_from(start),
                                   data_location=location, is_indexed=is_indexed)

    # -- types --------------------------------------------------------------

    def parse_type_name(self) -> TypeName:
        t = self.peek()
        if t is None:
            raise ParseError("expected a type", self._eof_span)
        if t.text == "mapping":
            start = self.advance().span
            self.expect("(")
            key = self.parse_type_name()
            self.expect("=>")
            value = self.parse_type_name()
            end = self.expect(")")
            base = TypeName("mapping", join_spans(start, end.span),
                            key_type=key, value_type=value)
        elif t.text == "var":
            self.advance()
            base = TypeName("var", t.span)
        elif is_elementary_type_name(t.text):
            self.advance()
            base = TypeName("elementary", t.span, name=t.text)
        elif t.kind == IDENTIFIER:
            self.advance()
            base = TypeName("user", t.span, name=t.text)
        else:
            raise ParseError(f"expected a type, found {t.text!r}", t.span)
        while self.at("["):
            self.advance()
            length = None
            if not self.at("]"):
                length = self.parse_expression()
            end = self.expect("]")
            base = TypeName("array", join_spans(base.span, end.span),
                            element=base, length=length)
        return base

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.expect("{").span
        statements: list[Statement] = []
        while self.peek() is not None and not self.at("}"):
            try:
                statements.append(self.parse_statement())
            except ParseError as exc:
                self.error(exc.message, exc.span)
                self._recover_statement()
        end = self.expect("}")
        return Block(statements, join_spans(start, end.span))

    def parse_statement(self) -> Statement:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self._eof_span)
        text = t.text
        if text == "{":
            return self.parse_block()
        if text == "if":
            return self.parse_if()
        if text == "for":
            return self.parse_for()
        if text == "while":
            return self.parse_while()
        if text == "return":
            start = self.advance().span
            value = None
            if not self.at(";"):
                value = self.parse_expression()
            end = self.expect(";")
            return ReturnStatement(value, join_spans(start, end.span))
        if text == "emit":
            start = self.advance().span
            call = self.parse_expression()
            end = self.expect(";")
            if not isinstance(call, CallExpression):
                raise ParseError("emit expects an event call", start)
            return EmitStatement(call, join_spans(start, end.span))
        if text == "throw":
            start = self.advance().span
            end = self.expect(";")
            return ThrowStatement(join_spans(start, end.span))
        if text == "break":
            start = self.advance().span
            end = self.expect(";")
            return BreakStatement(join_spans(start, end.span))
        if text == "continue":
            start = self.advance().span
            end = self.expect(";")
            return ContinueStatement(join_spans(start, end.span))
        if text == "_" and self.at(";", 1):
            start = self.advance().span
            end = self.expect(";")
            return PlaceholderStatement(join_spans(start, end.span))
        if self._looks_like_declaration():
            return self.parse_declaration_statement()
        start = t.span
        expr = self.parse_expression()
        end = self.expect(";")
        return ExpressionStatement(expr, join_spans(start, end.span))

    def _looks_like_declaration(self) -> bool:
        t = self.peek()
        if t is None:
            return False
        if t.text in ("var", "mapping"):
            return True
        if t.kind == KEYWORD and is_elementary_type_name(t.text):
            return True
        if t.kind != IDENTIFIER:
            return False
        # `Foo bar ...` or `Foo[...] bar ...` declares a user-typed local.
        nxt = self.peek(1)
        if nxt is not None and nxt.kind == IDENTIFIER:
            return True
        if nxt is not None and nxt.text == "[":
            i = self.pos + 2
            depth = 1
            while i < len(self.tokens) and depth:
                if self.tokens[i].text == "[":
                    depth += 1
                elif self.tokens[i].text == "]":
                    depth -= 1
                i += 1
            return i < len(self.tokens) and self.tokens[i].kind == IDENTIFIER
        return False

    def parse_declaration_statement(self) -> VariableDeclarationStatement:
        decl = self.parse_local_declaration()
        end = self.expect(";")
        span = join_spans(decl.span, end.span)
        return VariableDeclarationStatement(decl, span)

    def parse_local_declaration(self) -> VariableDeclaration:
        start = self.peek().span
        type_name = self.parse_type_name()
        location = "unspecified"
        if self.peek() is not None and self.peek().text in ("memory", "storage", "calldata"):
            location = self.advance().text
        name = self.expect_identifier()
        initializer = None
        if self.at("="):
            self.advance()
            initializer = self.parse_expression()
        return VariableDeclaration(name.text, type_name, self._span_from(start),
                                   data_location=location,
                                   initializer=initializer)

    def parse_if(self) -> IfStatement:
        start = self.expect("if").span
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        then_branch = self.parse_statement()
        else_branch = None
        if self.at("else"):
            self.advance()
            else_branch = self.parse_statement()
        return IfStatement(condition, then_branch, else_branch,
                           self._span_from(start))

    def parse_for(self) -> ForStatement:
        start = self.expect("for").span
        self.expect("(")
        init: Statement | None = None
        if not self.at(";"):
            if self._looks_like_declaration():
                decl = self.parse_local_declaration()
                init = VariableDeclarationStatement(decl, decl.span)
            else:
                expr = self.parse_expression()
                init = ExpressionStatement(expr, expr.span)
        self.expect(";")
        condition = None
        if not self.at(";"):
            condition = self.parse_expression()
        self.expect(";")
        post = None
        if not self.at(")"):
            post = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return ForStatement(init, condition, post, body, self._span_from(start))

    def parse_while(self) -> WhileStatement:
        start = self.expect("while").span
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return WhileStatement(condition, body, self._span_from(start))

    # -- expressions ----------------------------------------------------------

    def parse_expression(self) -> Expression:
        return self.parse_assignment()

    def parse_assignment(self) -> Expression:
        left = self.parse_conditional()
        t = self.peek()
        if t is not None and t.text in _ASSIGN_OPS:
            op = self.advance().text
            value = self.parse_assignment()  # right-associative
            return Assignment(op, left, value, join_spans(left.span, value.span))
        return left

    def parse_conditional(self) -> Expression:
        condition = self.parse_binary(0)
        if self.at("?"):
            self.advance()
            true_expr = self.parse_expression()
            self.expect(":")
            false_expr = self.parse_expression()
            return Conditional(condition, true_expr, false_expr,
                               join_spans(condition.span, false_expr.span))
        return condition

    def parse_binary(self, min_prec: int) -> Expression:
        left = self.parse_unary()
        while True:
            t = self.peek()
            if t is None or t.text not in _BINARY_OPS:
                return left
            prec, right_assoc = _BINARY_OPS[t.text]
            if prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec if right_assoc else prec + 1)
            left = BinaryOperation(t.text, left, right,
                                   join_spans(left.span, right.span))

    def parse_unary(self) -> Expression:
        t = self.peek()
        if t is not None and (t.text in _UNARY_PREFIX or t.text in ("delete", "new")):
            self.advance()
            operand = self.parse_unary()
            return UnaryOperation(t.text, operand, True,
                                  join_spans(t.span, operand.span))
        return self.parse_postfix()

    def parse_postfix(self) -> Expression:
        expr = self.parse_primary()
        while True:
            t = self.peek()
            if t is None:
                return expr
            if t.text == ".":
                self.advance()
                member = self.advance()
                if member.kind not in (IDENTIFIER, KEYWORD, NUMBER):
                    raise ParseError(f"expected member name, found {member.text!r}",
                                     member.span)
                expr = MemberAccess(expr, member.text,
                                    join_spans(expr.span, member.span))
            elif t.text == "(":
                self.advance()
                args: list[Expression] = []
                if not self.at(")"):
                    args.append(self.parse_expression())
                    while self.at(","):
                        self.advance()
                        args.append(self.parse_expression())
                end = self.expect(")")
                expr = CallExpression(expr, args, join_spans(expr.span, end.span))
            elif t.text == "[":
                self.advance()
                index = None
                if not self.at("]"):
                    index = self.parse_expression()
                end = self.expect("]")
                expr = IndexAccess(expr, index, join_spans(expr.span, end.span))
            elif t.text in ("++", "--"):
                self.advance()
                expr = UnaryOperation(t.text, expr, False,
                                      join_spans(expr.span, t.span))
            else:
                return expr

    def parse_primary(self) -> Expression:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self._eof_span)
        if t.kind == NUMBER:
            self.advance()
            unit = None
            nxt = self.peek()
            if nxt is not None and nxt.text in ETHER_UNITS:
                unit = self.advance().text
                return NumberLiteral(t.text, unit, join_spans(t.span, nxt.span))
            return NumberLiteral(t.text, None, t.span)
        if t.kind == HEX:
            self.advance()
            return HexLiteral(t.text, t.span)
        if t.kind == STRING:
            self.advance()
            return StringLiteral(t.text, t.span)
        if t.text in ("true", "false"):
            self.advance()
            return BoolLiteral(t.text == "true", t.span)
        if is_elementary_type_name(t.text):
            self.advance()
            return ElementaryTypeExpression(
                TypeName("elementary", t.span, name=t.text), t.span)
        if t.kind == IDENTIFIER:
            self.advance()
            return Identifier(t.text, t.span)
        if t.text == "(":
            start = self.advance().span
            components: list[Expression] = []
            if not self.at(")"):
                components.append(self.parse_expression())
                while self.at(","):
                    self.advance()
                    components.append(self.parse_expression())
            end = self.expect(")")
            span = join_spans(start, end.span)
            if len(components) == 1:
                inner = components[0]
                return TupleExpression([inner], span)
            return TupleExpression(components, span)
        raise ParseError(f"unexpected {t.text!r} in expression", t.span)


def _classify_pragma(name: str, parts: list[Token]) -> str:
    if name != "solidity":
        return "other"
    if len(parts) == 1 and parts[0].kind == NUMBER:
        return "exact"
    if parts and parts[0].text == "^":
        return "caret"
    if any(p.text in ("<", ">", "<=", ">=", "~") for p in parts):
        return "range"
    return "other"

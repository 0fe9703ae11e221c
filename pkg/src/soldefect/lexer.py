"""Tokenizer for the supported Solidity subset.

Lossless: comments are emitted as ordinary tokens and every token carries
an exact source span, so the input can be reconstructed byte-for-byte from
the token stream plus the whitespace gaps between spans.
"""

from __future__ import annotations

import re

from .spans import Span

# Token kinds
IDENTIFIER = "identifier"
KEYWORD = "keyword"
NUMBER = "number-literal"
HEX = "hex-literal"
STRING = "string-literal"
PUNCT = "punctuation"
OP = "operator"
COMMENT = "comment"

KEYWORDS = frozenset({
    "pragma", "contract", "interface", "library", "is",
    "function", "modifier", "event", "returns", "return",
    "if", "else", "for", "while", "do", "break", "continue", "throw", "emit",
    "var", "new", "delete", "struct", "enum", "using",
    "public", "private", "internal", "external", "payable",
    "constant", "pure", "view", "anonymous", "indexed",
    "memory", "storage", "calldata", "mapping",
    "true", "false",
    "wei", "szabo", "finney", "ether",
    "seconds", "minutes", "hours", "days", "weeks", "years",
    "address", "bool", "string", "bytes", "byte", "uint", "int",
})

_SIZED_TYPE_RE = re.compile(r"^(?:u?int(?:8|16|24|32|40|48|56|64|72|80|88|96|104|"
                            r"112|120|128|136|144|152|160|168|176|184|192|200|208|"
                            r"216|224|232|240|248|256)|bytes(?:[1-9]|[12][0-9]|3[0-2]))$")

ETHER_UNITS = {
    "wei": 1,
    "szabo": 10 ** 12,
    "finney": 10 ** 15,
    "ether": 10 ** 18,
    "seconds": 1,
    "minutes": 60,
    "hours": 3600,
    "days": 86400,
    "weeks": 604800,
    "years": 31536000,
}

# Longest-match-first alternation; one compiled pass over the file.
_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*|/\*(?:[^*]|\*(?!/))*\*/)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<number>[0-9]+(?:\.[0-9]+)*)
  | (?P<identifier>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<op>\*\*|<<=?|>>=?|<=|>=|==|!=|&&|\|\||\+\+|--|\+=|-=|\*=|/=|%=|\|=|&=|\^=|=>|[-+*/%=<>!&|^~?:.])
  | (?P<punct>[(){}\[\];,])
  | (?P<ws>[ \t\r\n]+)
    """,
    re.VERBOSE,
)

_UNTERMINATED_RE = re.compile(r"/\*|\"|'")


class LexerError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.span = span


class Token:
    __slots__ = ("kind", "text", "span")

    def __init__(self, kind: str, text: str, span: Span):
        self.kind = kind
        self.text = text
        self.span = span

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Token) and self.kind == other.kind
                and self.text == other.text and self.span == other.span)


def is_elementary_type_name(text: str) -> bool:
    if text in ("address", "bool", "string", "bytes", "byte", "uint", "int"):
        return True
    return bool(_SIZED_TYPE_RE.match(text))


def tokenize(source_text: str, file_id: str) -> list[Token]:
    """Lex ``source_text`` into a lossless token stream (comments included).

    Raises LexerError on unterminated strings/comments or bytes outside the
    grammar; the caller is expected to keep going with its other inputs.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source_text)
    while pos < n:
        m = _TOKEN_RE.match(source_text, pos)
        if m is None:
            span = Span(file_id, line, pos - line_start + 1, pos, 1)
            ch = source_text[pos]
            if _UNTERMINATED_RE.match(source_text, pos):
                what = "comment" if ch == "/" else "string"
                raise LexerError(f"unterminated {what}", span)
            raise LexerError(f"unexpected character {ch!r}", span)
        kind = m.lastgroup
        text = m.group()
        if kind == "op" and text == "/" and source_text.startswith("/*", pos):
            # the comment alternation only matches terminated comments
            span = Span(file_id, line, pos - line_start + 1, pos, 2)
            raise LexerError("unterminated comment", span)
        if kind != "ws":
            span = Span(file_id, line, m.start() - line_start + 1,
                        m.start(), len(text))
            if kind == "identifier" and text in KEYWORDS:
                kind = KEYWORD
            elif kind == "identifier" and _SIZED_TYPE_RE.match(text):
                kind = KEYWORD
            else:
                kind = _KIND_MAP[kind]
            tokens.append(Token(kind, text, span))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + text.rindex("\n") + 1
        pos = m.end()
    return tokens


_KIND_MAP = {
    "comment": COMMENT,
    "hex": HEX,
    "number": NUMBER,
    "identifier": IDENTIFIER,
    "string": STRING,
    "op": OP,
    "punct": PUNCT,
}

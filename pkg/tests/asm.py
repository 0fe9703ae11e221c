"""A tiny two-pass EVM assembler for test fixtures.

Program lines:
    "label:"            define a label at the current pc
    "PUSH1 0x05"        push with a literal (hex or decimal)
    "PUSH2 @label"      push a label's pc (width must fit)
    "ADD"               any other mnemonic

Labels keep the hand-written control-flow programs readable; PUSH widths
are explicit so the emitted bytes are exactly what the test says.
"""

from __future__ import annotations

from soldefect.evm.opcodes import MNEMONICS, push_width


def assemble(program: list[str]) -> bytes:
    # pass 1: label pcs
    labels: dict[str, int] = {}
    pc = 0
    for line in _clean(program):
        if line.endswith(":"):
            labels[line[:-1]] = pc
            continue
        pc += _size(line)
    # pass 2: emit
    out = bytearray()
    for line in _clean(program):
        if line.endswith(":"):
            continue
        parts = line.split()
        mnemonic = parts[0]
        opcode = MNEMONICS[mnemonic]
        out.append(opcode)
        width = push_width(opcode)
        if width:
            arg = parts[1]
            value = labels[arg[1:]] if arg.startswith("@") else int(arg, 0)
            out += value.to_bytes(width, "big")
    return bytes(out)


def _clean(program: list[str]) -> list[str]:
    lines = []
    for raw in program:
        line = raw.split(";")[0].strip()
        if line:
            lines.append(line)
    return lines


def _size(line: str) -> int:
    mnemonic = line.split()[0]
    return 1 + push_width(MNEMONICS[mnemonic])


# Canonical fixtures reused across the CFG/loop/detector tests.

def counted_loop(bound: int = 5, body: list[str] | None = None) -> bytes:
    """for (i = 0; i < bound; i++) { body }"""
    return assemble([
        "PUSH1 0",
        "header:",
        "JUMPDEST",
        f"PUSH1 {bound}",
        "DUP2",
        "LT",
        "ISZERO",
        "PUSH2 @exit",
        "JUMPI",
        *(body or []),
        "PUSH1 1",
        "ADD",
        "PUSH2 @header",
        "JUMP",
        "exit:",
        "JUMPDEST",
        "STOP",
    ])


def storage_bound_loop(body: list[str] | None = None) -> bytes:
    """for (i = 0; i < storage[0]; i++) { body }"""
    return assemble([
        "PUSH1 0",
        "header:",
        "JUMPDEST",
        "PUSH1 0",
        "SLOAD",
        "DUP2",
        "LT",
        "ISZERO",
        "PUSH2 @exit",
        "JUMPI",
        *(body or []),
        "PUSH1 1",
        "ADD",
        "PUSH2 @header",
        "JUMP",
        "exit:",
        "JUMPDEST",
        "STOP",
    ])


CALL_BODY = [
    "PUSH1 0", "PUSH1 0", "PUSH1 0", "PUSH1 0",
    "PUSH1 0", "PUSH1 0", "PUSH1 0",
    "CALL",
    "POP",
]


def dispatcher(selector_targets: dict[int, str],
               bodies: list[str] | None = None) -> bytes:
    """A solc-0.4-style selector ladder:

    selector = calldataload(0) / 2**224 & 0xffffffff, then a chain of
    DUP1; PUSH4 sel; EQ; PUSH2 @target; JUMPI comparisons.
    """
    program: list[str] = [
        "PUSH1 0",
        "CALLDATALOAD",
        "PUSH29 0x0100000000000000000000000000000000000000000000000000000000",
        "SWAP1",
        "DIV",
        "PUSH4 0xffffffff",
        "AND",
    ]
    for selector, label in selector_targets.items():
        program += [
            "DUP1",
            f"PUSH4 {selector:#x}",
            "EQ",
            f"PUSH2 @{label}",
            "JUMPI",
        ]
    program += ["STOP"]
    for label in selector_targets.values():
        program += [f"{label}:", "JUMPDEST", *(bodies or []), "STOP"]
    return assemble(program)

"""Control-flow recovery via forward abstract stack emulation.

Jump targets are resolved by propagating push constants through stack
shuffles and arithmetic; everything the emulator cannot prove concrete
becomes a tainted or unknown value. Each block is explored at most
``MAX_VISITS_PER_BLOCK`` times per distinct abstract entry stack and the
whole walk has a step budget, so recovery always terminates without a
solver; jumps that stay unresolved are recorded as edges-to-unknown.

Abstract values (hashable tuples):
    ("const", v)                   concrete 256-bit value
    ("taint", frozenset(tags))     value influenced by the tagged sources
    ("cmp", op, pc, a, b)          result of a comparison instruction
    ("iszero", inner)              boolean negation wrapper
    ("unknown",)
Taint tags: BALANCE, CALLER, BLOCKINFO, CALLDATA, STORAGE, ENV.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .disasm import Instruction, disassemble
from .opcodes import JUMPDEST, OPCODES, TERMINATORS, is_push

MAX_VISITS_PER_BLOCK = 4
MAX_STACK_DEPTH = 1024
STEP_BUDGET = 200_000

_WORD = (1 << 256) - 1

UNKNOWN = ("unknown",)

_TAINT_SOURCES = {
    "BALANCE": "BALANCE",
    "CALLER": "CALLER",
    "ORIGIN": "CALLER",
    "TIMESTAMP": "BLOCKINFO",
    "NUMBER": "BLOCKINFO",
    "DIFFICULTY": "BLOCKINFO",
    "COINBASE": "BLOCKINFO",
    "GASLIMIT": "BLOCKINFO",
    "BLOCKHASH": "BLOCKINFO",
    "CALLDATALOAD": "CALLDATA",
    "CALLDATASIZE": "CALLDATA",
    "SLOAD": "STORAGE",
    "CALLVALUE": "ENV",
    "GASPRICE": "ENV",
    "GAS": "ENV",
}

_CMP_OPS = {"LT", "GT", "SLT", "SGT", "EQ"}

_FOLDABLE = {"ADD", "SUB", "MUL", "DIV", "SDIV", "MOD", "EXP", "AND", "OR",
             "XOR", "BYTE", "SIGNEXTEND"}


def value_tags(value) -> frozenset:
    kind = value[0]
    if kind == "taint":
        return value[1]
    if kind == "cmp":
        return value_tags(value[3]) | value_tags(value[4])
    if kind == "iszero":
        return value_tags(value[1])
    return frozenset()


def unwrap_iszero(value):
    while value[0] == "iszero":
        value = value[1]
    return value


@dataclass
class JumpiEvent:
    """One emulated execution of a JUMPI: condition value plus the target."""

    block: int
    pc: int
    condition: tuple
    target: Optional[int]  # resolved jump-taken block id, when concrete


@dataclass
class BasicBlock:
    id: int  # pc of the first instruction
    instructions: list[Instruction]
    successors: list[int] = field(default_factory=list)
    terminator: str = "fallthrough"

    @property
    def start(self) -> int:
        return self.id

    @property
    def end(self) -> int:
        last = self.instructions[-1]
        return last.pc + last.size

    def mnemonics(self) -> list[str]:
        return [i.mnemonic for i in self.instructions]


@dataclass
class ControlFlowGraph:
    blocks: dict[int, BasicBlock]
    entry: int
    dominators: dict[int, int] = field(default_factory=dict)  # block -> idom
    unresolved_jumps: list[tuple[int, int]] = field(default_factory=list)
    jumpi_events: list[JumpiEvent] = field(default_factory=list)
    capped_blocks: set[int] = field(default_factory=set)

    def predecessors(self) -> dict[int, list[int]]:
        preds: dict[int, list[int]] = {b: [] for b in self.blocks}
        for b in self.blocks.values():
            for s in b.successors:
                preds[s].append(b.id)
        return preds

    def reachable(self) -> set[int]:
        seen = set()
        stack = [self.entry] if self.entry in self.blocks else []
        while stack:
            b = stack.pop()
            if b in seen:
                continue
            seen.add(b)
            stack.extend(s for s in self.blocks[b].successors if s not in seen)
        return seen

    def dominates(self, a: int, b: int) -> bool:
        """True iff a dominates b (via the immediate-dominator tree)."""
        node = b
        while True:
            if node == a:
                return True
            idom = self.dominators.get(node)
            if idom is None or idom == node:
                return False
            node = idom


def split_blocks(instructions: list[Instruction]) -> dict[int, BasicBlock]:
    """Partition at JUMPDESTs and after terminators."""
    if not instructions:
        return {}
    leaders = {instructions[0].pc}
    for i, ins in enumerate(instructions):
        if ins.opcode == JUMPDEST:
            leaders.add(ins.pc)
        is_end = ins.opcode in TERMINATORS or not ins.valid
        if is_end and i + 1 < len(instructions):
            leaders.add(instructions[i + 1].pc)
    blocks: dict[int, BasicBlock] = {}
    current: list[Instruction] = []
    for ins in instructions:
        if ins.pc in leaders and current:
            blocks[current[0].pc] = BasicBlock(current[0].pc, current)
            current = []
        current.append(ins)
    if current:
        blocks[current[0].pc] = BasicBlock(current[0].pc, current)
    for block in blocks.values():
        last = block.instructions[-1]
        if not last.valid:
            block.terminator = "invalid"
        else:
            block.terminator = TERMINATORS.get(last.opcode, "fallthrough")
    return blocks


def build_cfg(instructions: list[Instruction] | bytes | str) -> ControlFlowGraph:
    if not isinstance(instructions, list):
        instructions = disassemble(instructions)
    blocks = split_blocks(instructions)
    if not blocks:
        return ControlFlowGraph({}, 0)
    entry = min(blocks)
    cfg = ControlFlowGraph(blocks, entry)
    edges: set[tuple[int, int]] = set()
    unresolved: set[tuple[int, int]] = set()

    order = sorted(blocks)
    next_block = {order[i]: order[i + 1] for i in range(len(order) - 1)}

    # structural fallthrough edges (always valid regardless of stack state)
    for bid, block in blocks.items():
        if block.terminator in ("fallthrough", "jumpi") and bid in next_block:
            edges.add((bid, next_block[bid]))

    _emulate(cfg, edges, unresolved, next_block)

    for src, dst in edges:
        if dst in blocks:
            blocks[src].successors.append(dst)
    for block in blocks.values():
        block.successors = sorted(set(block.successors))
    cfg.unresolved_jumps = sorted(unresolved)
    cfg.dominators = compute_dominators(cfg)
    return cfg


def _emulate(cfg: ControlFlowGraph, edges: set, unresolved: set,
             next_block: dict[int, int]) -> None:
    blocks = cfg.blocks
    worklist: list[tuple[int, tuple]] = [(cfg.entry, ())]
    seen: dict[int, set[tuple]] = {}
    steps = 0

    while worklist:
        bid, entry_stack = worklist.pop()
        visits = seen.setdefault(bid, set())
        if entry_stack in visits:
            continue
        if len(visits) >= MAX_VISITS_PER_BLOCK:
            cfg.capped_blocks.add(bid)
            continue
        visits.add(entry_stack)

        stack = list(entry_stack)
        block = blocks[bid]
        path_dead = False
        for ins in block.instructions:
            steps += 1
            if steps > STEP_BUDGET:
                return
            op = ins.mnemonic
            if not ins.valid or op == "INVALID":
                path_dead = True
                break
            if is_push(ins.opcode):
                stack.append(("const", ins.push_value))
                continue
            if op == "JUMPDEST":
                continue
            if op == "JUMP":
                if not stack:
                    path_dead = True
                    break
                target = stack.pop()
                if target[0] == "const" and target[1] in blocks:
                    edges.add((bid, target[1]))
                    worklist.append((target[1], _snap(stack)))
                else:
                    unresolved.add((bid, ins.pc))
                path_dead = True
                break
            if op == "JUMPI":
                if len(stack) < 2:
                    path_dead = True
                    break
                target = stack.pop()
                cond = stack.pop()
                taken: Optional[int] = None
                if target[0] == "const" and target[1] in blocks:
                    taken = target[1]
                    edges.add((bid, taken))
                elif target[0] != "const":
                    unresolved.add((bid, ins.pc))
                cfg.jumpi_events.append(JumpiEvent(bid, ins.pc, cond, taken))
                concrete = _concrete_bool(cond)
                fall = next_block.get(bid)
                if concrete is True or concrete is None:
                    if taken is not None:
                        worklist.append((taken, _snap(stack)))
                if concrete is False or concrete is None:
                    if fall is not None:
                        worklist.append((fall, _snap(stack)))
                path_dead = True
                break
            if op in ("STOP", "RETURN", "REVERT", "SELFDESTRUCT"):
                path_dead = True
                break
            if not _step(stack, ins):
                path_dead = True
                break
            if len(stack) > MAX_STACK_DEPTH:
                path_dead = True
                break

        if not path_dead and block.terminator == "fallthrough":
            fall = next_block.get(bid)
            if fall is not None:
                worklist.append((fall, _snap(stack)))


def _snap(stack: list) -> tuple:
    return tuple(stack)


def _concrete_bool(cond) -> Optional[bool]:
    cond = unwrap_iszero_concrete(cond)
    if isinstance(cond, bool):
        return cond
    return None


def unwrap_iszero_concrete(value):
    """Evaluate const and const-comparison conditions to a Python bool."""
    negate = False
    while value[0] == "iszero":
        negate = not negate
        value = value[1]
    result: Optional[bool] = None
    if value[0] == "const":
        result = value[1] != 0
    elif value[0] == "cmp":
        _, op, _pc, a, b = value
        if a[0] == "const" and b[0] == "const":
            result = _eval_cmp(op, a[1], b[1])
    if result is None:
        return value
    return result != negate if negate else result


def _to_signed(v: int) -> int:
    return v - (1 << 256) if v >> 255 else v


def _eval_cmp(op: str, a: int, b: int) -> bool:
    if op == "LT":
        return a < b
    if op == "GT":
        return a > b
    if op == "SLT":
        return _to_signed(a) < _to_signed(b)
    if op == "SGT":
        return _to_signed(a) > _to_signed(b)
    return a == b


def _fold(op: str, a: int, b: int) -> int:
    if op == "ADD":
        return (a + b) & _WORD
    if op == "SUB":
        return (a - b) & _WORD
    if op == "MUL":
        return (a * b) & _WORD
    if op == "DIV":
        return a // b if b else 0
    if op == "SDIV":
        if b == 0:
            return 0
        sa, sb = _to_signed(a), _to_signed(b)
        q = abs(sa) // abs(sb)
        if (sa < 0) != (sb < 0):
            q = -q
        return q & _WORD
    if op == "MOD":
        return a % b if b else 0
    if op == "EXP":
        return pow(a, b, 1 << 256)
    if op == "AND":
        return a & b
    if op == "OR":
        return a | b
    if op == "XOR":
        return a ^ b
    if op == "BYTE":
        return (b >> (8 * (31 - a))) & 0xFF if a < 32 else 0
    if op == "SIGNEXTEND":
        if a >= 31:
            return b
        bit = 8 * (a + 1) - 1
        if b & (1 << bit):
            return b | (_WORD ^ ((1 << (bit + 1)) - 1))
        return b & ((1 << (bit + 1)) - 1)
    raise AssertionError(op)


def _step(stack: list, ins: Instruction) -> bool:
    """Execute one non-control instruction; False on stack underflow."""
    op = ins.mnemonic
    entry = OPCODES.get(ins.opcode)
    if entry is None:
        return False
    _, pops, pushes = entry

    if op.startswith("DUP"):
        n = int(op[3:])
        if len(stack) < n:
            return False
        stack.append(stack[-n])
        return True
    if op.startswith("SWAP"):
        n = int(op[4:])
        if len(stack) < n + 1:
            return False
        stack[-1], stack[-n - 1] = stack[-n - 1], stack[-1]
        return True

    if len(stack) < pops:
        return False
    args = [stack.pop() for _ in range(pops)]

    if op in _TAINT_SOURCES:
        tags = frozenset({_TAINT_SOURCES[op]})
        for a in args:
            tags |= value_tags(a)
        stack.append(("taint", tags))
        return True
    if op in _CMP_OPS:
        a, b = args[0], args[1]
        stack.append(("cmp", op, ins.pc, a, b))
        return True
    if op == "ISZERO":
        a = args[0]
        if a[0] == "const":
            stack.append(("const", 0 if a[1] else 1))
        else:
            stack.append(("iszero", a))
        return True
    if op == "NOT":
        a = args[0]
        if a[0] == "const":
            stack.append(("const", a[1] ^ _WORD))
        else:
            stack.append(_join_taints(args))
        return True
    if op in _FOLDABLE:
        a, b = args[0], args[1]
        if a[0] == "const" and b[0] == "const":
            stack.append(("const", _fold(op, a[1], b[1])))
        else:
            stack.append(_join_taints(args))
        return True
    if op == "PC":
        stack.append(("const", ins.pc))
        return True

    for _ in range(pushes):
        stack.append(_join_taints(args))
    return True


def _join_taints(args: list) -> tuple:
    tags = frozenset()
    for a in args:
        tags |= value_tags(a)
    return ("taint", tags) if tags else UNKNOWN


# ---------------------------------------------------------------------------
# Dominators (iterative, over blocks reachable from the entry)


def compute_dominators(cfg: ControlFlowGraph) -> dict[int, int]:
    reachable = cfg.reachable()
    if not reachable:
        return {}
    preds_all = cfg.predecessors()
    order = _reverse_postorder(cfg, reachable)
    index = {b: i for i, b in enumerate(order)}
    idom: dict[int, Optional[int]] = {b: None for b in order}
    idom[cfg.entry] = cfg.entry

    def intersect(a: int, b: int) -> int:
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for b in order:
            if b == cfg.entry:
                continue
            preds = [p for p in preds_all[b] if p in reachable and idom[p] is not None]
            if not preds:
                continue
            new = preds[0]
            for p in preds[1:]:
                new = intersect(new, p)
            if idom[b] != new:
                idom[b] = new
                changed = True
    return {b: d for b, d in idom.items() if d is not None}


def _reverse_postorder(cfg: ControlFlowGraph, reachable: set[int]) -> list[int]:
    visited: set[int] = set()
    post: list[int] = []

    def dfs(start: int) -> None:
        stack = [(start, iter(sorted(cfg.blocks[start].successors)))]
        visited.add(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for succ in it:
                if succ in reachable and succ not in visited:
                    visited.add(succ)
                    stack.append((succ, iter(sorted(cfg.blocks[succ].successors))))
                    advanced = True
                    break
            if not advanced:
                post.append(node)
                stack.pop()

    dfs(cfg.entry)
    return list(reversed(post))

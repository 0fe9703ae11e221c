from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from soldefect.evm.cfg import build_cfg
from soldefect.evm.disasm import (BytecodeError, disassemble, reassemble)
from soldefect.evm.loops import detect_loops
from soldefect.evm.selectors import extract_selectors

from asm import CALL_BODY, assemble, counted_loop, dispatcher, storage_bound_loop

# -- disassembly --------------------------------------------------------------


def test_push_add_disassembly():
    instructions = disassemble("0x6001600201")
    assert [(i.pc, i.mnemonic, i.push_value) for i in instructions] == [
        (0, "PUSH1", 1), (2, "PUSH1", 2), (4, "ADD", 0)]


def test_empty_bytecode():
    assert disassemble(b"") == []
    assert build_cfg(b"").blocks == {}


def test_truncated_push_is_invalid():
    instructions = disassemble("0x61")
    assert len(instructions) == 1
    ins = instructions[0]
    assert ins.mnemonic == "PUSH2" and ins.push_bytes == b"" and not ins.valid


def test_truncated_push_keeps_partial_bytes():
    instructions = disassemble("0x61aa")
    assert instructions[0].push_bytes == b"\xaa"
    assert not instructions[0].valid


def test_unknown_opcode_is_invalid_class():
    instructions = disassemble(bytes([0x1B]))  # SHL is post-Constantinople
    assert instructions[0].mnemonic == "INVALID"
    assert not instructions[0].valid


def test_odd_length_hex_rejected():
    with pytest.raises(BytecodeError):
        disassemble("0x600")


@given(st.binary(min_size=0, max_size=400))
def test_disassembly_round_trip(code):
    assert reassemble(disassemble(code)) == code


# -- CFG ----------------------------------------------------------------------


def test_straight_line_single_block():
    cfg = build_cfg(assemble(["PUSH1 1", "PUSH1 2", "ADD", "STOP"]))
    assert len(cfg.blocks) == 1
    block = cfg.blocks[0]
    assert block.terminator == "stop"
    assert block.successors == []


def test_hand_assembled_jump_edge():
    code = assemble(["PUSH2 @dest", "JUMP", "dest:", "JUMPDEST", "STOP"])
    cfg = build_cfg(code)
    dest = disassemble(code)[-2].pc
    assert cfg.blocks[0].successors == [dest]
    assert cfg.blocks[dest].instructions[0].mnemonic == "JUMPDEST"


def test_unresolved_dynamic_jump_recorded():
    cfg = build_cfg(assemble(["PUSH1 0", "CALLDATALOAD", "JUMP",
                              "JUMPDEST", "STOP"]))
    assert cfg.unresolved_jumps, "dynamic jump target should be edge-to-unknown"


def test_block_partition_invariants():
    for code in (counted_loop(), storage_bound_loop(CALL_BODY),
                 dispatcher({0xA9059CBB: "t1", 0x18160DDD: "t2"})):
        cfg = build_cfg(code)
        seen_pcs: set[int] = set()
        for block in cfg.blocks.values():
            pcs = [i.pc for i in block.instructions]
            assert pcs == sorted(pcs) and len(set(pcs)) == len(pcs)
            assert not (set(pcs) & seen_pcs)
            seen_pcs.update(pcs)
        assert seen_pcs == {i.pc for i in disassemble(code)}


def test_edges_target_jumpdest_or_fallthrough():
    for code in (counted_loop(), dispatcher({0xA9059CBB: "t"})):
        cfg = build_cfg(code)
        order = sorted(cfg.blocks)
        next_of = {order[i]: order[i + 1] for i in range(len(order) - 1)}
        for block in cfg.blocks.values():
            for succ in block.successors:
                starts_jumpdest = (cfg.blocks[succ].instructions[0].mnemonic
                                   == "JUMPDEST")
                assert starts_jumpdest or succ == next_of.get(block.id)


def test_dominators_form_tree_rooted_at_entry():
    cfg = build_cfg(counted_loop())
    assert cfg.dominators[cfg.entry] == cfg.entry
    for block in cfg.reachable():
        node = block
        for _ in range(len(cfg.blocks) + 1):
            if node == cfg.entry:
                break
            node = cfg.dominators[node]
        assert node == cfg.entry


def brute_force_dominators(cfg) -> dict[int, set[int]]:
    """Independent oracle: a dominates b iff removing a disconnects entry->b."""
    reachable = cfg.reachable()

    def reaches_without(avoid: int) -> set[int]:
        seen = set()
        if cfg.entry == avoid:
            return seen
        stack = [cfg.entry]
        while stack:
            node = stack.pop()
            if node in seen or node == avoid:
                continue
            seen.add(node)
            stack.extend(s for s in cfg.blocks[node].successors
                         if s in reachable)
        return seen

    doms: dict[int, set[int]] = {}
    for b in reachable:
        doms[b] = {b}
        for a in reachable:
            if a != b and b not in reaches_without(a):
                doms[b].add(a)
    return doms


def test_dominator_tree_matches_brute_force():
    for code in (counted_loop(), storage_bound_loop(CALL_BODY),
                 dispatcher({0xA9059CBB: "a", 0x18160DDD: "b"})):
        cfg = build_cfg(code)
        oracle = brute_force_dominators(cfg)
        for block in cfg.reachable():
            # the idom chain must enumerate exactly the oracle's dominator set
            chain = {block}
            node = block
            while node != cfg.entry:
                node = cfg.dominators[node]
                chain.add(node)
            assert chain == oracle[block], f"block {block:#x}"


# -- loops ---------------------------------------------------------------------


def test_acyclic_cfg_has_no_loops():
    cfg = build_cfg(assemble(["PUSH1 1", "PUSH1 2", "ADD", "STOP"]))
    assert detect_loops(cfg) == []


def test_counted_loop_constant_bound():
    cfg = build_cfg(counted_loop(5))
    loops = detect_loops(cfg)
    assert len(loops) == 1
    assert loops[0].bound == 5


def test_storage_bound_loop_unbounded():
    cfg = build_cfg(storage_bound_loop())
    loops = detect_loops(cfg)
    assert len(loops) == 1
    assert loops[0].bound is None


def test_loop_header_dominates_body():
    for code in (counted_loop(3), storage_bound_loop(CALL_BODY)):
        cfg = build_cfg(code)
        for loop in detect_loops(cfg):
            for block in loop.body:
                assert cfg.dominates(loop.header, block)


def test_loop_has_back_edge():
    cfg = build_cfg(counted_loop())
    for loop in detect_loops(cfg):
        assert any(loop.header in cfg.blocks[b].successors for b in loop.body)


# -- selectors -----------------------------------------------------------------


def test_dispatcher_selectors_extracted():
    code = dispatcher({0xA9059CBB: "transfer", 0x18160DDD: "totalsupply"})
    cfg = build_cfg(code)
    table = extract_selectors(cfg)
    assert set(table) == {0xA9059CBB, 0x18160DDD}
    # each selector jumps to a distinct JUMPDEST-led block
    targets = set(table.values())
    assert len(targets) == 2
    for target in targets:
        assert cfg.blocks[target].instructions[0].mnemonic == "JUMPDEST"


def test_fallback_only_contract_empty_table():
    cfg = build_cfg(assemble(["PUSH1 0", "PUSH1 0", "RETURN"]))
    assert extract_selectors(cfg) == {}


def test_two_function_probe_exactly_two():
    code = dispatcher({0x11111111: "one", 0x22222222: "two"})
    table = extract_selectors(build_cfg(code))
    assert len(table) == 2


def test_dispatcher_blocks_guarded_by_push4_eq():
    # a compiled-style two-function dispatcher has >= 2 JUMPI blocks,
    # each containing a PUSH4/EQ pair
    code = dispatcher({0xA9059CBB: "x", 0x095EA7B3: "y"})
    cfg = build_cfg(code)
    jumpi_blocks = [b for b in cfg.blocks.values() if b.terminator == "jumpi"]
    assert len(jumpi_blocks) >= 2
    for block in jumpi_blocks:
        mnemonics = block.mnemonics()
        assert "PUSH4" in mnemonics and "EQ" in mnemonics


# -- abstract-value properties ---------------------------------------------------


def test_taint_join_never_drops_tags():
    from soldefect.evm.cfg import _join_taints, value_tags
    a = ("taint", frozenset({"BALANCE"}))
    b = ("taint", frozenset({"CALLDATA", "BLOCKINFO"}))
    joined = _join_taints([a, b])
    assert value_tags(a) | value_tags(b) <= value_tags(joined)
    assert value_tags(_join_taints([a, ("unknown",)])) >= value_tags(a)


def test_cmp_values_carry_operand_taints():
    from soldefect.evm.cfg import value_tags
    cmp_value = ("cmp", "EQ", 7, ("taint", frozenset({"BALANCE"})),
                 ("const", 5))
    assert "BALANCE" in value_tags(cmp_value)
    assert "BALANCE" in value_tags(("iszero", cmp_value))

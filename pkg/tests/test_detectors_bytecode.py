"""Bytecode-mode detectors, plus source/bytecode agreement for the four
dual-mode defects (hand-assembled bytecode standing in for compiled probes)."""

from __future__ import annotations

from soldefect.analyzer import analyze_bytecode
from soldefect.evm.keccak import function_selector

from asm import CALL_BODY, assemble, counted_loop, dispatcher, storage_bound_loop
from conftest import detectors_fired


def bc_detectors(code: bytes) -> set[str]:
    return {f.detector for f in analyze_bytecode(code, "probe.hex")}


# -- strict balance equality ----------------------------------------------------


BALANCE_EQ = assemble([
    "ADDRESS",
    "BALANCE",
    "PUSH1 10",
    "EQ",
    "PUSH2 @yes",
    "JUMPI",
    "STOP",
    "yes:",
    "JUMPDEST",
    "STOP",
])


def test_balance_eq_jumpi_fires():
    findings = [f for f in analyze_bytecode(BALANCE_EQ, "probe.hex")
                if f.detector == "strict-balance-equality"]
    assert len(findings) == 1
    assert findings[0].pc == 4  # the EQ instruction
    assert findings[0].line is None


def test_balance_range_check_quiet():
    code = assemble([
        "ADDRESS", "BALANCE", "PUSH1 10", "LT", "PUSH2 @yes", "JUMPI",
        "STOP", "yes:", "JUMPDEST", "STOP",
    ])
    assert "strict-balance-equality" not in bc_detectors(code)


def test_eq_without_balance_quiet():
    code = assemble([
        "CALLVALUE", "PUSH1 10", "EQ", "PUSH2 @yes", "JUMPI",
        "STOP", "yes:", "JUMPDEST", "STOP",
    ])
    assert "strict-balance-equality" not in bc_detectors(code)


# -- nested call ------------------------------------------------------------------


def test_unbounded_call_loop_fires():
    assert "nested-call" in bc_detectors(storage_bound_loop(CALL_BODY))


def test_bounded_call_loop_quiet():
    assert "nested-call" not in bc_detectors(counted_loop(5, CALL_BODY))


def test_unbounded_loop_without_call_quiet():
    assert "nested-call" not in bc_detectors(storage_bound_loop())


# -- hard code address ---------------------------------------------------------------


def test_push20_nonzero_fires():
    code = assemble([
        "PUSH20 0x05f400000000000000000000aaaaaaaaaaaaad27",
        "POP",
        "STOP",
    ])
    findings = [f for f in analyze_bytecode(code, "probe.hex")
                if f.detector == "hard-code-address"]
    assert len(findings) == 1
    assert findings[0].pc == 0
    assert "05f4" in findings[0].message


def test_push20_zero_quiet():
    code = assemble(["PUSH20 0", "POP", "STOP"])
    assert "hard-code-address" not in bc_detectors(code)


def test_push32_not_flagged():
    code = assemble(["PUSH32 1", "POP", "STOP"])
    assert "hard-code-address" not in bc_detectors(code)


# -- unmatched ERC-20 -------------------------------------------------------------------


_SELECTORS = {
    name: int(function_selector(sig).hex(), 16)
    for name, sig in (
        ("totalSupply", "totalSupply()"),
        ("balanceOf", "balanceOf(address)"),
        ("transfer", "transfer(address,uint256)"),
        ("transferFrom", "transferFrom(address,address,uint256)"),
        ("approve", "approve(address,uint256)"),
        ("allowance", "allowance(address,address)"),
    )
}


def test_partial_erc20_dispatcher_fires():
    partial = dispatcher({_SELECTORS["transfer"]: "t1",
                          _SELECTORS["balanceOf"]: "t2"})
    findings = [f for f in analyze_bytecode(partial, "probe.hex")
                if f.detector == "unmatched-erc20"]
    assert len(findings) == 1
    assert "transferFrom(address,address,uint256)" in findings[0].message


def test_full_erc20_dispatcher_quiet():
    full = dispatcher({sel: f"t{i}" for i, sel in enumerate(_SELECTORS.values())})
    assert "unmatched-erc20" not in bc_detectors(full)


def test_non_token_dispatcher_quiet():
    other = dispatcher({0x12345678: "t1", 0xCAFEBABE: "t2"})
    assert "unmatched-erc20" not in bc_detectors(other)


# -- source/bytecode agreement for the dual-mode detectors ----------------------------
#
# Each pair below is a source probe and a hand-assembled bytecode program
# with the same semantics; the same defect id must fire in both modes
# (locations are lines in one and pcs in the other).


def test_agreement_strict_balance_equality():
    source = "contract C { function f() { if (this.balance == 10 ether) { } } }"
    assert "strict-balance-equality" in detectors_fired(source)
    assert "strict-balance-equality" in bc_detectors(BALANCE_EQ)


def test_agreement_nested_call():
    source = """contract C {
    address[] members;
    function f() {
        for (uint i = 0; i < members.length; i++) { members[i].call.value(1)(); }
    }
}"""
    assert "nested-call" in detectors_fired(source)
    assert "nested-call" in bc_detectors(storage_bound_loop(CALL_BODY))


def test_agreement_hard_code_address():
    source = """contract C {
    function f() { address r = 0x05f400000000000000000000aaaaaaaaaaaaad27; r.transfer(1); }
}"""
    bytecode = assemble([
        "PUSH20 0x05f400000000000000000000aaaaaaaaaaaaad27", "POP", "STOP"])
    assert "hard-code-address" in detectors_fired(source)
    assert "hard-code-address" in bc_detectors(bytecode)


def test_agreement_unmatched_erc20():
    source = """contract Token {
    function transfer(address to, uint256 value) public returns (bool) { return true; }
}"""
    bytecode = dispatcher({_SELECTORS["transfer"]: "t1"})
    assert "unmatched-erc20" in detectors_fired(source)
    assert "unmatched-erc20" in bc_detectors(bytecode)

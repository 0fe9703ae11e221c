from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from soldefect.parser import parse_source
from soldefect.semantic import (build_call_graph, compute_def_use,
                                flatten_contract, infer_var_type)

from conftest import read_listing


def _contract(text: str, index: int = 0):
    result = parse_source(text, "t.sol")
    assert not result.has_errors, [str(d) for d in result.diagnostics]
    return result.unit, result.unit.contracts[index]


def _initializer(expr_text: str):
    unit, c = _contract(f"contract C {{ function f() {{ var v = {expr_text}; }} }}")
    return c.functions[0].body.statements[0].declaration.initializer


# -- var inference -----------------------------------------------------------


@pytest.mark.parametrize("literal,expected", [
    ("0", "uint8"),
    ("255", "uint8"),
    ("256", "uint16"),
    ("65535", "uint16"),
    ("65536", "uint24"),
    ("true", "bool"),
    ("-1", "int8"),
    ("-129", "int16"),
])
def test_infer_literals(literal, expected):
    inferred = infer_var_type(_initializer(literal))
    assert inferred.canonical() == expected


def test_infer_requires_initializer():
    from soldefect.semantic import InferenceError
    with pytest.raises(InferenceError):
        infer_var_type(None)


def _oracle_uint_width(value: int) -> int:
    # arbitrary-precision oracle: smallest multiple of 8 bits that holds value
    bits = 8
    while value >= (1 << bits):
        bits += 8
    return bits


@given(st.integers(min_value=1, max_value=30))
def test_uint_width_property(step):
    # literal in [2^N, 2^(N+8)-1] infers exactly uint(N+8) for N in 8..248
    n = 8 * step
    if n > 248:
        n = 248
    for value in (1 << n, (1 << (n + 8)) - 1, (1 << n) + 12345 % (1 << n)):
        inferred = infer_var_type(_initializer(str(value)))
        assert inferred.canonical() == f"uint{_oracle_uint_width(value)}"
        assert _oracle_uint_width(value) == n + 8


def test_infer_address_literal():
    t = infer_var_type(_initializer("0x05f400000000000000000000aaaaaaaaaaaaad27"))
    assert t.canonical() == "address"


# -- call graph ---------------------------------------------------------------


def test_listing1_call_graph():
    unit, gamble = _contract(read_listing("listing1.sol"))
    table = flatten_contract(unit, gamble)
    graph = build_call_graph(table)
    assert ("<fallback>", "ReceiveEth") in graph.edges
    assert ("ReceiveEth", "getWinner") in graph.edges
    # modifier invocation edges
    assert ("suicide", "onlyOwner") in graph.edges
    assert ("withDraw", "onlyOwner") in graph.edges


def test_empty_call_graph():
    unit, c = _contract("contract C { function f() { uint x = 1; } }")
    graph = build_call_graph(flatten_contract(unit, c))
    assert graph.edges == set()


def test_unresolved_calls_make_no_edges():
    unit, c = _contract("contract C { function f() { mystery(); } }")
    graph = build_call_graph(flatten_contract(unit, c))
    assert graph.edges == set()
    assert ("f", "mystery") in graph.unresolved


# -- def-use ------------------------------------------------------------------


def _defuse(text: str, fn_name: str):
    unit, c = _contract(text)
    fn = next(f for f in c.functions if f.name == fn_name)
    return compute_def_use(fn)


def test_listing3_change_variable():
    facts = _defuse(read_listing("listing3.sol"), "changeVariable")
    assert facts.variables["newValue"].live is False
    assert len(facts.variables["newValue"].writes) == 1
    assert facts.variables["newValue"].consuming_reads == []
    assert facts.variables["value1"].live is False  # read only into newValue
    assert facts.variables["value2"].live is True   # reaches a state write


def test_unread_parameter_is_dead():
    facts = _defuse("contract C { function f(uint a) { return; } }", "f")
    assert facts.variables["a"].live is False


def test_chain_to_state_write_is_live():
    facts = _defuse("""
contract C {
    uint state;
    function f() {
        uint x = 1;
        uint y = x;
        state = y;
    }
}
""", "f")
    assert facts.variables["x"].live is True
    assert facts.variables["y"].live is True


def test_dead_chain_two_findings():
    facts = _defuse("""
contract C {
    function f() {
        uint x = 1;
        uint y = x;
    }
}
""", "f")
    assert facts.variables["x"].live is False
    assert facts.variables["y"].live is False


def test_call_argument_is_live():
    facts = _defuse(
        "contract C { function f(address a) { selfdestruct(a); } }", "f")
    assert facts.variables["a"].live is True


def test_named_returns_are_exempt():
    facts = _defuse(
        "contract C { function f() returns (bool ok) { ok = true; } }", "f")
    assert "ok" not in facts.variables


def test_liveness_is_monotone_under_added_reads():
    # adding a consuming read can only turn dead into live
    base = "contract C {{ uint s; function f(uint a) {{ uint m = a; {extra} }} }}"
    without = _defuse(base.format(extra=""), "f")
    with_read = _defuse(base.format(extra="s = m;"), "f")
    for name, facts in without.variables.items():
        if facts.live:
            assert with_read.variables[name].live


# -- inheritance flattening ---------------------------------------------------


def test_flatten_inherits_members():
    unit, derived = _contract("""
contract Base { uint x; function f() {} function shared() { } }
contract Derived is Base { function shared() { uint y = 1; } }
""", index=1)
    table = flatten_contract(unit, derived)
    assert "x" in table.state_variables
    assert set(table.functions) == {"f", "shared"}
    # the derived override wins
    shared = table.functions["shared"][0]
    assert len(shared.body.statements) == 1


def test_diamond_inheritance_warns():
    diags = []
    unit, d = _contract("""
contract A { }
contract B is A { }
contract C is A { }
contract D is B, C { }
""", index=3)
    flatten_contract(unit, d, diags)
    assert any("more than once" in item.message for item in diags)

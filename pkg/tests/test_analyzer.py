from __future__ import annotations

import os

from soldefect.analyzer import (analyze_file, analyze_paths, collect_inputs,
                                file_mode)
from soldefect.config import RunConfig

from asm import CALL_BODY, storage_bound_loop
from conftest import read_listing


def test_file_mode_auto_by_extension():
    assert file_mode("a.sol", "auto") == "source"
    assert file_mode("a.hex", "auto") == "bytecode"
    assert file_mode("a.bin", "auto") == "bytecode"
    assert file_mode("a.hex", "source") == "source"
    assert file_mode("a.sol", "bytecode") == "bytecode"


def test_collect_inputs_walks_and_sorts(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "b.sol").write_text("contract B{}")
    (tmp_path / "sub" / "a.sol").write_text("contract A{}")
    (tmp_path / "sub" / "code.hex").write_text("0x00")
    (tmp_path / "notes.txt").write_text("ignored")
    files = collect_inputs([str(tmp_path)], "auto")
    assert [os.path.basename(f) for f in files] == ["b.sol", "a.sol", "code.hex"]
    # explicit files are kept even without a known extension
    assert collect_inputs([str(tmp_path / "notes.txt")], "auto") \
        == [str(tmp_path / "notes.txt")]


def test_analyze_file_records_digest_and_findings(tmp_path):
    path = tmp_path / "listing3.sol"
    path.write_text(read_listing("listing3.sol"))
    outcome = analyze_file(str(path), RunConfig())
    assert outcome.error is None
    assert len(outcome.digest) == 64
    assert any(f.detector == "greedy-contract" for f in outcome.findings)


def test_analyze_file_bytecode_hex_text(tmp_path):
    path = tmp_path / "loop.hex"
    path.write_text("0x" + storage_bound_loop(CALL_BODY).hex())
    outcome = analyze_file(str(path), RunConfig())
    assert outcome.error is None
    assert {f.detector for f in outcome.findings} == {"nested-call"}


def test_analyze_file_bytecode_raw_binary(tmp_path):
    path = tmp_path / "loop.bin"
    path.write_bytes(storage_bound_loop(CALL_BODY))
    outcome = analyze_file(str(path), RunConfig())
    assert outcome.error is None
    assert {f.detector for f in outcome.findings} == {"nested-call"}


def test_unreadable_file_reports_io_error(tmp_path):
    outcome = analyze_file(str(tmp_path / "nope.sol"), RunConfig())
    assert outcome.error is not None and "cannot read" in outcome.error


def test_serial_and_parallel_reports_equal(tmp_path):
    from synth import write_corpus
    write_corpus(tmp_path, 12)
    serial, _ = analyze_paths([str(tmp_path)], RunConfig(jobs=1))
    parallel, _ = analyze_paths([str(tmp_path)], RunConfig(jobs=4))
    assert serial == parallel


def test_mixed_corpus_source_and_bytecode(tmp_path):
    (tmp_path / "a.sol").write_text(read_listing("listing2.sol"))
    (tmp_path / "b.hex").write_text("0x" + storage_bound_loop(CALL_BODY).hex())
    report, outcomes = analyze_paths([str(tmp_path)], RunConfig(jobs=1))
    assert all(o.error is None for o in outcomes)
    by_detector = {f.detector for f in report.findings}
    assert "reentrancy" in by_detector      # from the source file
    assert "nested-call" in by_detector     # from the bytecode file

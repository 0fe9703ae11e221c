"""Drives analysis over files: builds facts, runs detectors, merges reports.

File-level parallelism uses a process pool; results are merged and sorted
before rendering, so output is byte-identical regardless of the worker
count.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import RunConfig
from .detectors import (AnalysisContext, BytecodeFacts, ContractFacts,
                        SourceFacts, run_detectors)
from .evm.cfg import build_cfg
from .evm.disasm import BytecodeError, disassemble
from .evm.loops import detect_loops
from .evm.selectors import extract_selectors
from .parser import parse_source
from .lexer import LexerError
from .report import Finding, InputRecord, Report
from .semantic import build_call_graph, compute_def_use, flatten_contract
from .spans import Diagnostic

SOURCE_EXTENSIONS = (".sol",)
BYTECODE_EXTENSIONS = (".hex", ".bin")


@dataclass
class FileOutcome:
    path: str
    digest: str = ""
    findings: list[Finding] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    error: str | None = None  # I/O or fatal per-file failure


def build_source_facts(text: str, file_id: str) -> SourceFacts:
    result = parse_source(text, file_id)
    diagnostics = list(result.diagnostics)
    contracts: list[ContractFacts] = []
    for contract in result.unit.contracts:
        table = flatten_contract(result.unit, contract, diagnostics)
        graph = build_call_graph(table)
        defuse = [(fn, compute_def_use(fn)) for fn in contract.functions]
        contracts.append(ContractFacts(contract, table, graph, defuse))
    return SourceFacts(file_id, result.unit, contracts, diagnostics)


def build_bytecode_facts(data: bytes | str, file_id: str,
                         is_creation: bool = False) -> BytecodeFacts:
    instructions = disassemble(data)
    cfg = build_cfg(instructions)
    loops = detect_loops(cfg)
    selectors = extract_selectors(cfg)
    from .evm.disasm import decode_bytecode_input
    return BytecodeFacts(file_id, decode_bytecode_input(data), instructions,
                         cfg, loops, selectors, is_creation)


def analyze_source_text(text: str, file_id: str,
                        config: RunConfig | None = None) -> tuple[list[Finding], list[Diagnostic]]:
    config = config or RunConfig()
    facts = build_source_facts(text, file_id)
    ctx = AnalysisContext(source=facts, config=config.detectors)
    return run_detectors(ctx), facts.diagnostics


def analyze_bytecode(data: bytes | str, file_id: str,
                     config: RunConfig | None = None,
                     is_creation: bool = False) -> list[Finding]:
    config = config or RunConfig()
    facts = build_bytecode_facts(data, file_id, is_creation)
    ctx = AnalysisContext(bytecode=facts, config=config.detectors)
    return run_detectors(ctx)


def file_mode(path: str, mode: str) -> str:
    if mode != "auto":
        return mode
    if path.endswith(BYTECODE_EXTENSIONS):
        return "bytecode"
    return "source"


def collect_inputs(paths: list[str], mode: str) -> list[str]:
    """Expand directories, keep a sorted, deduplicated file list."""
    files: list[str] = []
    for path in paths:
        if os.path.isdir(path):
            for root, _dirs, names in os.walk(path):
                for name in sorted(names):
                    if name.endswith(SOURCE_EXTENSIONS + BYTECODE_EXTENSIONS):
                        files.append(os.path.join(root, name))
        else:
            files.append(path)
    return sorted(dict.fromkeys(files))


def analyze_file(path: str, config: RunConfig) -> FileOutcome:
    outcome = FileOutcome(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        outcome.error = f"cannot read {path}: {exc.strerror or exc}"
        return outcome
    outcome.digest = hashlib.sha256(raw).hexdigest()
    mode = file_mode(path, config.mode)
    try:
        if mode == "bytecode":
            data: bytes | str = raw
            try:
                text = raw.decode("ascii")
                if _looks_like_hex_text(text):
                    data = text
            except UnicodeDecodeError:
                pass
            outcome.findings = analyze_bytecode(data, path, config,
                                                config.creation_code)
        else:
            text = raw.decode("utf-8")
            outcome.findings, outcome.diagnostics = analyze_source_text(
                text, path, config)
    except (LexerError, BytecodeError, UnicodeDecodeError) as exc:
        outcome.error = f"{path}: {exc}"
    return outcome


def _looks_like_hex_text(text: str) -> bool:
    body = text.strip()
    if body[:2].lower() == "0x":
        return True
    return bool(body) and all(c in "0123456789abcdefABCDEF \t\r\n" for c in body)


_WORKER_CONFIG: RunConfig | None = None


def _init_worker(config: RunConfig) -> None:
    global _WORKER_CONFIG
    _WORKER_CONFIG = config


def _worker(path: str) -> FileOutcome:
    return analyze_file(path, _WORKER_CONFIG)


def analyze_paths(paths: list[str], config: RunConfig) -> tuple[Report, list[FileOutcome]]:
    files = collect_inputs(paths, config.mode)
    jobs = config.jobs if config.jobs > 0 else (os.cpu_count() or 1)
    outcomes: list[FileOutcome]
    if jobs <= 1 or len(files) <= 1:
        outcomes = [analyze_file(path, config) for path in files]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(config,)) as pool:
            outcomes = list(pool.map(_worker, files, chunksize=8))
    findings: list[Finding] = []
    inputs: list[InputRecord] = []
    for outcome in outcomes:
        findings.extend(outcome.findings)
        if outcome.error is None:
            inputs.append(InputRecord(outcome.path, outcome.digest))
    report = Report(inputs, findings)
    return report, outcomes

"""Detector registry plumbing: descriptors, analysis context, registration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..config import DetectorConfig
from ..nodes import ContractDefinition, FunctionDefinition, SourceUnit
from ..report import Finding
from ..semantic import CallGraph, DefUseFacts, SymbolTable
from ..spans import Diagnostic, Span


@dataclass(frozen=True)
class DetectorDescriptor:
    code: str        # stable short id, D01..D20
    id: str          # stable slug used in reports, manifests and the CLI
    name: str
    category: str    # security | availability | performance | maintainability | reusability
    impact: str      # IP1..IP5
    frontends: frozenset[str]  # {"source"} or {"source", "bytecode"}
    description: str
    advice: str
    # IP3 splits into two informational sub-types (critical-but-internal vs
    # major-and-triggerable); carried as a note, never as a distinct level.
    impact_note: str = ""


@dataclass
class ContractFacts:
    contract: ContractDefinition
    table: SymbolTable
    call_graph: CallGraph
    defuse: list[tuple[FunctionDefinition, DefUseFacts]]


@dataclass
class SourceFacts:
    file_id: str
    unit: SourceUnit
    contracts: list[ContractFacts]
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class BytecodeFacts:
    file_id: str
    code: bytes
    instructions: list
    cfg: object
    loops: list
    selectors: dict
    is_creation: bool = False


@dataclass
class AnalysisContext:
    """Facts a detector may read. Detectors never mutate the context."""

    source: Optional[SourceFacts] = None
    bytecode: Optional[BytecodeFacts] = None
    config: DetectorConfig = field(default_factory=DetectorConfig)


DetectorFn = Callable[[AnalysisContext], list[Finding]]

_SOURCE_DETECTORS: dict[str, DetectorFn] = {}
_BYTECODE_DETECTORS: dict[str, DetectorFn] = {}
_DESCRIPTORS: dict[str, DetectorDescriptor] = {}


def descriptor(detector_id: str) -> DetectorDescriptor:
    return _DESCRIPTORS[detector_id]


def register(desc: DetectorDescriptor) -> Callable[[DetectorFn], DetectorFn]:
    """Register the source-mode implementation for a descriptor."""
    _DESCRIPTORS[desc.id] = desc

    def wrap(fn: DetectorFn) -> DetectorFn:
        _SOURCE_DETECTORS[desc.id] = fn
        return fn

    return wrap


def register_bytecode(detector_id: str) -> Callable[[DetectorFn], DetectorFn]:
    """Attach a bytecode-mode implementation to an existing descriptor."""

    def wrap(fn: DetectorFn) -> DetectorFn:
        _BYTECODE_DETECTORS[detector_id] = fn
        return fn

    return wrap


def source_finding(desc: DetectorDescriptor, file_id: str, span: Span,
                   message: str) -> Finding:
    return Finding(detector=desc.id, category=desc.category, impact=desc.impact,
                   file=file_id, message=message, advice=desc.advice,
                   line=span.line, column=span.column)


def bytecode_finding(desc: DetectorDescriptor, file_id: str, pc: int,
                     message: str) -> Finding:
    return Finding(detector=desc.id, category=desc.category, impact=desc.impact,
                   file=file_id, message=message, advice=desc.advice, pc=pc)

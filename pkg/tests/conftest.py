from __future__ import annotations

import os

import pytest

from soldefect.analyzer import analyze_source_text
from soldefect.report import Report

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus", "listings")


@pytest.fixture(scope="session")
def corpus_dir() -> str:
    return os.path.abspath(CORPUS_DIR)


def read_listing(name: str) -> str:
    with open(os.path.join(CORPUS_DIR, name), "r", encoding="utf-8") as fh:
        return fh.read()


def findings_for(source: str, config=None) -> list:
    """Analyze a source snippet and return deduplicated, sorted findings."""
    findings, _diags = analyze_source_text(source, "snippet.sol", config)
    return Report([], findings).findings


def hits(source: str, config=None) -> set[tuple[str, int]]:
    """(detector id, line) pairs for a snippet."""
    return {(f.detector, f.line) for f in findings_for(source, config)}


def detectors_fired(source: str, config=None) -> set[str]:
    return {f.detector for f in findings_for(source, config)}

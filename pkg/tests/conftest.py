"""Shared fixtures and the acceptance-line terminal summary.

The acceptance suite (tests/test_acceptance.py) carries one test per
criterion; after the run a PASS/FAIL line per criterion is printed so the
gate's status is readable at a glance even without -v.
"""

from __future__ import annotations

import pytest

from kgqa import KnowledgeGraph, Source, Triple


@pytest.fixture
def small_kg() -> KnowledgeGraph:
    """A hand-written graph exercising several relations and sources."""
    return KnowledgeGraph(
        [
            Triple("book", "AtLocation", "library", 1.0, Source.CONCEPTNET),
            Triple("dinner", "AtLocation", "restaurant", 1.0, Source.CONCEPTNET),
            Triple("bread", "AtLocation", "toaster", 1.0, Source.CONCEPTNET),
            Triple("revolving door", "AtLocation", "bank", 2.0, Source.CONCEPTNET),
            Triple("revolving door", "CapableOf", "spin", 1.0, Source.CONCEPTNET),
            Triple("rain", "Causes", "wet streets", 1.5, Source.CONCEPTNET),
            Triple("bike", "near", "trees", 1.0, Source.VISUALGENOME),
            Triple("pedestrian", "on", "street", 4.0, Source.VISUALGENOME),
        ]
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            verdict = "PASS" if status == "passed" else "FAIL"
            lines.append(f"[{verdict}] {name}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

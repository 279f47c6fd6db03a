import pytest

from manetcds.backbone import make_attributes
from manetcds.netgraph import build_udg, neighbor_tables

# Ten-node example network and its residual energies (J).
TEN_NODE_POSITIONS = {
    1: (0.0, 176.0), 2: (209.5, 270.8), 3: (259.4, 259.8), 4: (140.1, 9.7),
    5: (154.9, 6.0), 6: (331.9, 224.4), 7: (118.7, 286.4), 8: (8.6, 0.0),
    9: (9.5, 89.5), 10: (234.6, 42.2),
}
TEN_NODE_ADJACENCY = {
    1: {2, 4, 5, 7, 8, 9}, 2: {1, 3, 6, 7, 10}, 3: {2, 6, 7, 10}, 4: {1, 5, 8, 9, 10},
    5: {1, 4, 8, 9, 10}, 6: {2, 3, 7, 10}, 7: {1, 2, 3, 6, 9}, 8: {1, 4, 5, 9, 10},
    9: {1, 4, 5, 7, 8, 10}, 10: {2, 3, 4, 5, 6, 8, 9},
}
TEN_NODE_ENERGY = {1: 6, 2: 11, 3: 5, 4: 4, 5: 3, 6: 7, 7: 13, 8: 8, 9: 14, 10: 12}


@pytest.fixture
def ten_node():
    g = build_udg(TEN_NODE_POSITIONS, 250.0)
    tables = neighbor_tables(g)
    attrs = make_attributes(tables, {u: float(e) for u, e in TEN_NODE_ENERGY.items()},
                            {u: 1.0 for u in TEN_NODE_ENERGY})
    return g, tables, attrs


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    def report(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Run directly (``python3 tests/test_acceptance.py``) to
print the lines without pytest.
"""

import functools
import logging
import math
import statistics
import time

import pytest

from manetcds.backbone import (Algorithm, all_mprs, baseline_cds, black_of, eas_cds, energy_key,
                               mark_from_mprs, prune_rule1, prune_rule2)
from manetcds.config import ScenarioConfig
from manetcds.netgraph import (brute_force_min_cds, build_udg, is_cds, neighbor_tables,
                               random_connected_udg)
from manetcds.scenarios import csv_row, oracle_comparison, random_attributes
from manetcds.simkernel import run_simulation

DEFAULTS = ScenarioConfig()
SEEDS = tuple(range(1, 11))


def scaled_graph(n, seed):
    # keep the node density of 100 nodes in 1000 m x 1000 m
    side = 1000.0 * math.sqrt(n / 100)
    return random_connected_udg(n, (side, side), DEFAULTS.range_r, seed=f"{seed}:acc")


@functools.lru_cache(maxsize=None)
def n100_run(algorithm, seed, mode="cds"):
    return run_simulation(DEFAULTS, algorithm, seed, n=100, v_max=5.0, mode=mode)


def check_soundness():
    start = time.perf_counter()
    violations = checked = 0
    for i in range(100):
        n = (20, 50, 100)[i % 3]
        t = neighbor_tables(scaled_graph(n, i))
        attrs = random_attributes(t, i)
        for alg in Algorithm:
            checked += 1
            violations += not is_cds(t, baseline_cds(alg, t, attrs).black)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 120
    return ok, f"{checked} backbones, {violations} violations, {elapsed:.1f}s"


def check_oracle():
    start = time.perf_counter()
    rows = oracle_comparison(count=200, max_n=10)
    elapsed = time.perf_counter() - start
    below = sum(r["EAS_CDS"] < r["optimum"] for r in rows)
    ratio = statistics.fmean(r["EAS_CDS"] / r["optimum"] for r in rows)
    ok = below == 0 and elapsed < 60
    return ok, f"{below} below optimum, mean ratio {ratio:.3f}, {elapsed:.1f}s"


def check_ten_node(tables, attrs):
    mprs = all_mprs(tables, attrs)
    got = {1: mprs[1], 2: mprs[2], 9: mprs[9], 10: mprs[10]}
    black = eas_cds(tables, attrs).black
    ok = black == {2, 7, 9, 10} and got == {1: {2}, 2: {10}, 9: {7}, 10: {9}}
    return ok, f"Black={sorted(black)} MPR={ {k: sorted(v) for k, v in got.items()} }"


def check_rreq():
    start = time.perf_counter()
    cds = [n100_run("EAS_CDS", s, "cds") for s in SEEDS]
    flood = [n100_run("EAS_CDS", s, "flooding") for s in SEEDS]
    total = statistics.fmean(r.rreq_total for r in cds) / statistics.fmean(r.rreq_total for r in flood)
    per = (sum(r.rreq_total for r in cds) / sum(r.discoveries for r in cds)) / \
          (sum(r.rreq_total for r in flood) / sum(r.discoveries for r in flood))
    elapsed = time.perf_counter() - start
    ok = total <= 0.5 and per <= 0.5 and elapsed < 600
    return ok, f"cds/flooding RREQ per run {total:.3f}, per discovery {per:.3f}"


def check_lifetime():
    life = {a: statistics.fmean(n100_run(a, s).lifetime_s for s in SEEDS)
            for a in ("EAS_CDS", "WU_EMPR", "MIN_VELOCITY")}
    ok = life["EAS_CDS"] >= 1.10 * life["WU_EMPR"] and life["EAS_CDS"] >= life["MIN_VELOCITY"]
    return ok, (f"mean lifetime EAS {life['EAS_CDS']:.2f}s, WU {life['WU_EMPR']:.2f}s "
                f"(x{life['EAS_CDS'] / life['WU_EMPR']:.3f}), MINV {life['MIN_VELOCITY']:.2f}s")


def mean_sizes(n, seeds=range(30)):
    sizes = {a: [] for a in ("WU_EMPR", "EAS_CDS", "MIN_VELOCITY")}
    for s in seeds:
        g = random_connected_udg(n, DEFAULTS.area, DEFAULTS.range_r, seed=f"{s}:size")
        t = neighbor_tables(g)
        attrs = random_attributes(t, s, DEFAULTS.energy_range, max(DEFAULTS.v_max))
        for a in sizes:
            sizes[a].append(len(baseline_cds(a, t, attrs).black))
    return {a: statistics.fmean(v) for a, v in sizes.items()}


def check_size_ordering():
    table = {n: mean_sizes(n) for n in (50, 100, 150)}
    ordered = all(m["WU_EMPR"] <= m["EAS_CDS"] <= m["MIN_VELOCITY"] for m in table.values())
    monotone = all(table[50][a] <= table[100][a] <= table[150][a] for a in table[50])
    detail = "; ".join(f"n={n} WU {m['WU_EMPR']:.2f} EAS {m['EAS_CDS']:.2f} "
                       f"MINV {m['MIN_VELOCITY']:.2f}" for n, m in table.items())
    return ordered and monotone, f"ordering {ordered}, monotone {monotone}: {detail}"


def check_pdr():
    cds = statistics.fmean(n100_run("EAS_CDS", s, "cds").pdr for s in SEEDS)
    flood = statistics.fmean(n100_run("EAS_CDS", s, "flooding").pdr for s in SEEDS)
    return abs(cds - flood) <= 0.10, f"PDR cds {cds:.4f}, flooding {flood:.4f}"


def check_determinism():
    cfg = DEFAULTS.with_(duration=60.0, flows=10)
    mismatches = 0
    for alg in Algorithm:
        for mode in ("cds", "flooding"):
            for seed in (1, 2):
                a = ",".join(csv_row(run_simulation(cfg, alg, seed, n=50, mode=mode)))
                b = ",".join(csv_row(run_simulation(cfg, alg, seed, n=50, mode=mode)))
                mismatches += a.encode() != b.encode()
    return mismatches == 0, f"{mismatches} mismatching rows out of 20"


def check_pruning():
    bad = restores = 0
    for i in range(500):
        n = 5 + i % 60
        side = 250 * math.sqrt(math.pi * n / 6)
        t = neighbor_tables(random_connected_udg(n, (side, side), 250, seed=f"{i}:prune"))
        attrs = random_attributes(t, i)
        marked = mark_from_mprs(t, all_mprs(t, attrs), attrs)
        after1 = prune_rule1(t, marked, attrs)
        b0, b1 = black_of(marked), black_of(after1)
        res = eas_cds(t, attrs)
        restores += res.restored > 0
        b2 = black_of(prune_rule2(t, after1, attrs))
        if not (len(b2) <= len(b1) <= len(b0) and is_cds(t, b1) and is_cds(t, b2)):
            bad += 1
    if restores:
        logging.getLogger(__name__).warning("safety restore triggered in %d graphs", restores)
    return bad == 0, f"{bad} invariant violations, safety restore triggered in {restores} of 500"


def test_1_soundness(acceptance_report):
    assert acceptance_report(1, *check_soundness())


def test_2_oracle(acceptance_report):
    assert acceptance_report(2, *check_oracle())


def test_3_ten_node_golden(ten_node, acceptance_report):
    _, tables, attrs = ten_node
    assert acceptance_report(3, *check_ten_node(tables, attrs))


def test_4_rreq_reduction(acceptance_report):
    assert acceptance_report(4, *check_rreq())


def test_5_lifetime_trend(acceptance_report):
    assert acceptance_report(5, *check_lifetime())


def test_6_size_ordering(acceptance_report):
    assert acceptance_report(6, *check_size_ordering())


def test_7_pdr_closeness(acceptance_report):
    assert acceptance_report(7, *check_pdr())


def test_8_determinism(acceptance_report):
    assert acceptance_report(8, *check_determinism())


def test_9_pruning_invariants(acceptance_report):
    assert acceptance_report(9, *check_pruning())


if __name__ == "__main__":
    from conftest import TEN_NODE_ENERGY, TEN_NODE_POSITIONS
    from manetcds.backbone import make_attributes

    t = neighbor_tables(build_udg(TEN_NODE_POSITIONS, 250.0))
    a = make_attributes(t, {u: float(e) for u, e in TEN_NODE_ENERGY.items()}, dict.fromkeys(t.node_ids, 1.0))
    checks = [check_soundness, check_oracle, lambda: check_ten_node(t, a), check_rreq, check_lifetime,
              check_size_ordering, check_pdr, check_determinism, check_pruning]
    for k, fn in enumerate(checks, 1):
        ok, detail = fn()
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

"""Scenario matrix runner, CSV emission and per-group summaries."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Iterable, TextIO

from .config import ScenarioConfig
from .simkernel import MetricsRecord, run_simulation

log = logging.getLogger(__name__)

CSV_COLUMNS = ["algorithm", "mode", "n", "v_max", "seed", "cds_size_mean", "lifetime_s",
               "rreq_total", "sent", "delivered", "pdr"]
SUMMARY_METRICS = ["cds_size_mean", "lifetime_s", "rreq_total", "pdr"]


def matrix_cells(config: ScenarioConfig) -> list[tuple[int, float, str, int, str]]:
    return list(itertools.product(config.nodes, config.v_max, config.algorithms,
                                  config.seeds, config.modes))


def _run_cell(config: ScenarioConfig, cell) -> MetricsRecord:
    n, v_max, algorithm, seed, mode = cell
    try:
        return run_simulation(config, algorithm, seed, n=n, v_max=v_max, mode=mode)
    except Exception as exc:  # a failed run becomes a failed row
        log.error("run %s failed: %s", cell, exc)
        return MetricsRecord(algorithm, mode, n, float(v_max), seed, error=f"{type(exc).__name__}: {exc}")


def run_matrix(config: ScenarioConfig, jobs: int = 1,
               on_record: Callable[[MetricsRecord], None] | None = None) -> list[MetricsRecord]:
    """Run every (n, v_max, algorithm, seed, mode) cell.

    ``on_record`` sees records in completion order; the returned list is
    sorted and does not depend on scheduling.
    """
    cells = matrix_cells(config)
    records = []
    if jobs <= 1:
        for cell in cells:
            rec = _run_cell(config, cell)
            records.append(rec)
            if on_record:
                on_record(rec)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, config, cell) for cell in cells]
            for fut in as_completed(futures):
                rec = fut.result()
                records.append(rec)
                if on_record:
                    on_record(rec)
    return sorted(records, key=lambda r: r.sort_key)


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return f"{x:.6g}"


def csv_row(rec: MetricsRecord) -> list[str]:
    head = [rec.algorithm, rec.mode, str(rec.n), _num(rec.v_max), str(rec.seed)]
    if rec.error:
        return head + [""] * (len(CSV_COLUMNS) - len(head))
    return head + [_num(rec.cds_size_mean), _num(rec.lifetime_s), str(rec.rreq_total),
                   str(rec.sent), str(rec.delivered), _num(rec.pdr)]


def emit_csv(records: Iterable[MetricsRecord], destination: str | os.PathLike | TextIO) -> None:
    rows = [csv_row(r) for r in sorted(records, key=lambda r: r.sort_key)]
    if hasattr(destination, "write"):
        _write_rows(destination, CSV_COLUMNS, rows)
        return
    with open(destination, "w", newline="") as fh:
        _write_rows(fh, CSV_COLUMNS, rows)


def csv_text(records: Iterable[MetricsRecord]) -> str:
    buf = io.StringIO()
    emit_csv(records, buf)
    return buf.getvalue()


def _write_rows(fh: TextIO, header: list[str], rows: list[list[str]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def read_csv(source: str | os.PathLike | TextIO) -> list[MetricsRecord]:
    if not hasattr(source, "read"):
        with open(source, newline="") as fh:
            return read_csv(fh)
    records = []
    for row in csv.DictReader(source):
        rec = MetricsRecord(row["algorithm"], row["mode"], int(row["n"]), float(row["v_max"]),
                            int(row["seed"]))
        if row["pdr"] == "":
            rec.error = "failed"
        else:
            rec.cds_size_mean = float(row["cds_size_mean"])
            rec.lifetime_s = float(row["lifetime_s"])
            rec.rreq_total = int(row["rreq_total"])
            rec.sent = int(row["sent"])
            rec.delivered = int(row["delivered"])
        records.append(rec)
    return records


def summarize(records: Iterable[MetricsRecord], baseline: str = "WU_EMPR") -> list[dict]:
    """Mean and sample stddev per (algorithm, mode, n, v_max) group, with the
    relative change of each mean against ``baseline`` in the same setting."""
    groups: dict[tuple, list[MetricsRecord]] = {}
    for rec in records:
        key = (rec.algorithm, rec.mode, rec.n, rec.v_max)
        groups.setdefault(key, [])
        if not rec.error:
            groups[key].append(rec)

    rows = {}
    for key, recs in sorted(groups.items()):
        if not recs:
            log.warning("group %s has no successful runs; omitted", key)
            continue
        row = dict(zip(("algorithm", "mode", "n", "v_max"), key))
        row["runs"] = len(recs)
        for m in SUMMARY_METRICS:
            vals = [float(getattr(r, m)) for r in recs]
            row[f"{m}_mean"] = statistics.fmean(vals)
            row[f"{m}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
        rows[key] = row

    for key, row in rows.items():
        base = rows.get((baseline,) + key[1:])
        for m in SUMMARY_METRICS:
            b = base[f"{m}_mean"] if base else math.nan
            row[f"{m}_vs_{baseline}"] = (row[f"{m}_mean"] - b) / b if b else math.nan
    return list(rows.values())


def emit_summary_csv(rows: list[dict], destination: str | os.PathLike | TextIO) -> None:
    if not rows:
        header = ["algorithm", "mode", "n", "v_max", "runs"]
    else:
        header = list(rows[0])
    body = [[_num(r[h]) if isinstance(r[h], float) else str(r[h]) for h in header] for r in rows]
    if hasattr(destination, "write"):
        _write_rows(destination, header, body)
        return
    with open(destination, "w", newline="") as fh:
        _write_rows(fh, header, body)


def random_attributes(tables, seed, energy_range=(1.0, 15.0), v_max=25.0):
    """Uniform energies and speeds for static (snapshot-only) experiments."""
    import random
    from .backbone import make_attributes

    rng = random.Random(f"{seed}:attrs")
    ids = tables.node_ids
    return make_attributes(tables, {u: rng.uniform(*energy_range) for u in ids},
                           {u: rng.uniform(0.0, v_max) for u in ids})


def small_graph(n: int, seed, range_r: float = 250.0):
    """Connected UDG with expected degree around four, for oracle comparisons."""
    from .netgraph import random_connected_udg

    side = range_r * math.sqrt(math.pi * n / 4.0)
    return random_connected_udg(n, (side, side), range_r, seed=f"{seed}:small")


def oracle_comparison(count: int = 200, max_n: int = 10, seed_base: int = 0,
                      algorithms: Iterable[str] = ("EAS_CDS",)) -> list[dict]:
    """Compare backbone sizes against the exact minimum CDS on small graphs."""
    from .backbone import build_backbone
    from .netgraph import brute_force_min_cds, neighbor_tables

    rows = []
    for i in range(count):
        seed = seed_base + i
        n = 3 + i % (max_n - 2)
        g = small_graph(n, seed)
        tables = neighbor_tables(g)
        attrs = random_attributes(tables, seed)
        best = len(brute_force_min_cds(g))
        row = {"seed": seed, "n": n, "optimum": best}
        for alg in algorithms:
            row[alg] = len(build_backbone(alg, tables, attrs).black)
        rows.append(row)
    return rows

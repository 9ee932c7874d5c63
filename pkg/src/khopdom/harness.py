"""Instance construction by family name, algorithm execution, and sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

from .algorithms import ALGORITHMS, round_budget
from .generators import (
    FAMILIES,
    Instance,
    gen_alternating_cycle,
    gen_kroundlower_pair,
    gen_planted_regular,
    gen_pseudoforest_H,
    gen_random_connected,
    gen_symmetric_regular,
    min_planted_m,
)
from .graph_core import GraphError, is_connected
from .simulator import RunResult, run
from .verify import CSV_COLUMNS, RatioReport, ratio_report

__all__ = ["make_instance", "run_algorithm", "ExperimentConfig", "SweepRow", "sweep", "sweep_csv",
           "SWEEP_COLUMNS", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1"


def make_instance(family: str, delta: int | None = None, k: int = 1, m: Any = None, g: int | None = None,
                  n: int | None = None, seed: int = 0, edges: int | None = None) -> Instance:
    """Build one instance of a named family (for kroundlower: the star graph)."""
    if family == "kroundlower":
        return gen_kroundlower_pair(delta or 3, k)[1]
    if family == "pseudoforest":
        return gen_pseudoforest_H(delta or 3, k, g or 4 * k + 3)
    if family == "altcycle":
        if n is None:
            raise ValueError("altcycle needs n")
        return gen_alternating_cycle(n, k)
    if family in ("planted", "symmetric"):
        delta = delta or 3
        if m in (None, "auto"):
            m = min_planted_m(delta, k)
        build = gen_planted_regular if family == "planted" else gen_symmetric_regular
        return build(delta, k, int(m), seed)
    if family == "fuzz":
        if n is None:
            raise ValueError("fuzz needs n")
        inst = gen_random_connected(n, edges if edges is not None else n - 1, seed)
        inst.k = k
        return inst
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def run_algorithm(inst_or_graph, alg: str, k: int, **kwargs) -> tuple[RunResult, set[int]]:
    """Run a registered algorithm with its exact round budget.

    Returns the run and the selected set (for alg3: the nodes not returning
    None).
    """
    graph = getattr(inst_or_graph, "graph", inst_or_graph)
    if not is_connected(graph):
        raise GraphError("input graph is disconnected")
    if alg not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
    result = run(graph, ALGORITHMS[alg](k), round_budget(alg, k), **kwargs)
    if alg == "alg3":
        chosen = {v for v, out in result.outputs.items() if out is not None}
    else:
        chosen = result.selected()
    return result, chosen


@dataclass
class ExperimentConfig:
    grid: list[dict[str, Any]] = field(default_factory=list)
    algorithms: list[str] = field(default_factory=lambda: ["alg2"])
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str | None = None
    exact_cap: int = 30

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        cfg = cls(
            grid=list(data.get("grid", [])),
            algorithms=list(data.get("algorithms", ["alg2"])),
            seeds=list(data.get("seeds", [0])),
            output_dir=data.get("output_dir"),
            exact_cap=int(data.get("exact_cap", 30)),
        )
        for entry in cfg.grid:
            if entry.get("family") not in FAMILIES:
                raise ValueError(f"grid entry names unknown family {entry.get('family')!r}")
        for alg in cfg.algorithms:
            if alg not in ALGORITHMS or alg == "alg3":
                raise ValueError(f"algorithm {alg!r} does not output a node set")
        return cfg

    def points(self) -> Iterable[dict[str, Any]]:
        for entry in self.grid:
            keys = [key for key in entry if key != "family"]
            values = [v if isinstance(v, list) else [v] for v in (entry[key] for key in keys)]
            for combo in itertools.product(*values):
                yield {"family": entry["family"], **dict(zip(keys, combo))}


@dataclass
class SweepRow:
    report: RatioReport | None
    params: dict[str, Any]
    seed: int
    alg: str
    rounds: int | None = None
    max_message_bits: int | None = None
    total_messages: int | None = None
    wall_time: float | None = None
    error: str = ""

    def row(self, timing: bool) -> dict[str, str]:
        base = self.report.row() if self.report else {c: "" for c in CSV_COLUMNS}
        if not self.report:
            base["family"] = str(self.params.get("family", ""))
            base["alg"] = self.alg
            base["k"] = str(self.params.get("k", ""))
        out = {"schema": SCHEMA_VERSION, **base}
        out.update(
            seed=str(self.seed),
            rounds="" if self.rounds is None else str(self.rounds),
            max_message_bits="" if self.max_message_bits is None else str(self.max_message_bits),
            total_messages="" if self.total_messages is None else str(self.total_messages),
            wall_time=f"{self.wall_time:.4f}" if timing and self.wall_time is not None else "",
            error=self.error,
        )
        return out


SWEEP_COLUMNS = ["schema", *CSV_COLUMNS, "seed", "rounds", "max_message_bits", "total_messages",
                 "wall_time", "error"]


def sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """Grid x algorithms x seeds, in that nesting order.  Failures are recorded per row."""
    rows = []
    for point in cfg.points():
        for alg in cfg.algorithms:
            for seed in cfg.seeds:
                params = dict(point)
                family = params.pop("family")
                start = time.perf_counter()
                try:
                    inst = make_instance(family, seed=seed, **params)
                    result, chosen = run_algorithm(inst, alg, inst.k)
                    report = ratio_report(inst, alg, chosen, exact_cap=cfg.exact_cap)
                    rows.append(SweepRow(report, point, seed, alg, result.rounds_executed,
                                         result.max_message_bits, result.total_messages,
                                         time.perf_counter() - start))
                except Exception as exc:  # recorded, sweep continues
                    rows.append(SweepRow(None, point, seed, alg, wall_time=time.perf_counter() - start,
                                         error=f"{type(exc).__name__}: {exc}"))
    return rows


def sweep_csv(rows: list[SweepRow], timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.row(timing))
    return buf.getvalue()

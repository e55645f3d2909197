"""Tightness experiment: lower bound vs realization oracles on ER systems.

Random directed graphs at edge probability log(n)/n, one nonzero per input
column, lower bound from the min-cost flow, oracle index from field or
real realizations. Per-trial seeds derive from (seed, n, m, trial), so the
row stream is identical for any worker count.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import flow as _flow
from .dyngraph import build_flow_network
from .errors import InvariantViolation, ValidationError
from .oracle import controllability_index_field, controllability_index_real
from .pattern import (
    StructuredSystem,
    build_digraph,
    random_er_system,
    sample_realization,
    serialize_system,
)
from .rng import derive_seed

CSV_HEADER = "n,m,trial,mu_low,mu_oracle,oracle_mode,agree,ms_mcmf,ms_oracle"
SUMMARY_HEADER = (
    "n,m,oracle_mode,count,mean_mu_low,mean_mu_oracle,agreement_rate,"
    "reachable_rate,ill_conditioned_count"
)


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...] = tuple(range(5, 51))
    m_values: tuple[int, ...] = (2, 3, 4, 5)
    graphs_per_n: int = 50
    seed: int = 0
    oracle_mode: str = "field"  # field | real | both
    workers: int = 1
    field_draws: int = 3
    real_tolerance: float = 1e-10

    def validate(self) -> "ExperimentConfig":
        if not self.n_values or min(self.n_values) < 2 or max(self.n_values) > 200:
            raise ValidationError("n range must lie within [2, 200] and be nonempty")
        if self.graphs_per_n < 1:
            raise ValidationError("graphs_per_n must be >= 1")
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise ValidationError("m values must be positive")
        if max(self.m_values) > min(self.n_values):
            raise ValidationError(
                f"every m must be <= min(n)={min(self.n_values)}, got {max(self.m_values)}"
            )
        if self.oracle_mode not in ("field", "real", "both"):
            raise ValidationError(f"oracle mode must be field|real|both, got {self.oracle_mode!r}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        return self

    @classmethod
    def desk_scale(cls, **overrides) -> "ExperimentConfig":
        """Laptop-sized defaults: n 5..30, m in {2, 5}, 20 graphs per n."""
        base = cls(n_values=tuple(range(5, 31)), m_values=(2, 5), graphs_per_n=20)
        return replace(base, **overrides)


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    m: int
    trial: int
    mu_low: int
    mu_oracle: int
    oracle_mode: str
    agree: bool
    ms_mcmf: float
    ms_oracle: float
    fully_reachable: bool
    ill_conditioned: bool

    def csv_line(self, zero_timings: bool = False) -> str:
        ms1 = 0.0 if zero_timings else self.ms_mcmf
        ms2 = 0.0 if zero_timings else self.ms_oracle
        return (
            f"{self.n},{self.m},{self.trial},{self.mu_low},{self.mu_oracle},"
            f"{self.oracle_mode},{int(self.agree)},{ms1:.3f},{ms2:.3f}"
        )


@dataclass(frozen=True)
class SummaryRow:
    n: int
    m: int
    oracle_mode: str
    count: int
    mean_mu_low: float
    mean_mu_oracle: float
    agreement_rate: float
    reachable_rate: float
    ill_conditioned_count: int


def _trial_system(cfg: ExperimentConfig, n: int, m: int, trial: int) -> StructuredSystem:
    return random_er_system(n, m, derive_seed(cfg.seed, "er", n, m, trial))


def _run_cell(args) -> list[ExperimentRow]:
    cfg, n, m, trial = args
    sys = _trial_system(cfg, n, m, trial)
    reachable = len(build_digraph(sys).reachable_states()) == n
    t0 = time.perf_counter()
    net = build_flow_network(sys)
    best = _flow.min_cost_max_flow(net)
    ms_mcmf = (time.perf_counter() - t0) * 1e3
    mu_low = best.gamma
    rows: list[ExperimentRow] = []
    modes = ("field", "real") if cfg.oracle_mode == "both" else (cfg.oracle_mode,)
    for mode in modes:
        t1 = time.perf_counter()
        flagged = False
        if mode == "field":
            mu_oracle = 0
            for d in range(cfg.field_draws):
                real = sample_realization(
                    sys, "field", derive_seed(cfg.seed, "draw", n, m, trial, d)
                )
                mu_oracle = max(mu_oracle, controllability_index_field(real).index)
        else:
            real = sample_realization(
                sys, "real", derive_seed(cfg.seed, "draw", n, m, trial, 0)
            )
            profile = controllability_index_real(real, tolerance=cfg.real_tolerance)
            mu_oracle = profile.index
            flagged = profile.ill_conditioned
        ms_oracle = (time.perf_counter() - t1) * 1e3
        if mode == "field" and mu_low > mu_oracle:
            raise InvariantViolation(
                f"mu_low={mu_low} exceeds field oracle {mu_oracle} on "
                f"n={n} m={m} trial={trial}: {serialize_system(sys)}"
            )
        rows.append(
            ExperimentRow(
                n=n,
                m=m,
                trial=trial,
                mu_low=mu_low,
                mu_oracle=mu_oracle,
                oracle_mode=mode,
                agree=(mu_low == mu_oracle),
                ms_mcmf=ms_mcmf,
                ms_oracle=ms_oracle,
                fully_reachable=reachable,
                ill_conditioned=flagged,
            )
        )
    return rows


def run_experiment(cfg: ExperimentConfig) -> tuple[list[ExperimentRow], list[SummaryRow]]:
    """All rows ordered by (n, m, trial, mode) plus per-(n, m, mode) summary."""
    cfg.validate()
    cells = [
        (cfg, n, m, trial)
        for n in cfg.n_values
        for m in cfg.m_values
        for trial in range(cfg.graphs_per_n)
    ]
    rows: list[ExperimentRow] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for cell_rows in pool.map(_run_cell, cells, chunksize=8):
                rows.extend(cell_rows)
    else:
        for cell in cells:
            rows.extend(_run_cell(cell))
    rows.sort(key=lambda r: (r.n, r.m, r.trial, r.oracle_mode))
    return rows, summarize(rows)


def summarize(rows: list[ExperimentRow]) -> list[SummaryRow]:
    groups: dict[tuple[int, int, str], list[ExperimentRow]] = {}
    for r in rows:
        groups.setdefault((r.n, r.m, r.oracle_mode), []).append(r)
    out = []
    for (n, m, mode), rs in sorted(groups.items()):
        count = len(rs)
        out.append(
            SummaryRow(
                n=n,
                m=m,
                oracle_mode=mode,
                count=count,
                mean_mu_low=sum(r.mu_low for r in rs) / count,
                mean_mu_oracle=sum(r.mu_oracle for r in rs) / count,
                agreement_rate=sum(r.agree for r in rs) / count,
                reachable_rate=sum(r.fully_reachable for r in rs) / count,
                ill_conditioned_count=sum(r.ill_conditioned for r in rs),
            )
        )
    return out


def emit_csv(rows, path, zero_timings: bool = False) -> None:
    """Per-trial CSV, header pinned. ``zero_timings`` writes 0.0 in the two
    wall-time columns so identical seeds reproduce byte-identical files."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv_line(zero_timings=zero_timings) + "\n")


def emit_summary_csv(summary: list[SummaryRow], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in summary:
            fh.write(
                f"{s.n},{s.m},{s.oracle_mode},{s.count},{s.mean_mu_low:.4f},"
                f"{s.mean_mu_oracle:.4f},{s.agreement_rate:.4f},"
                f"{s.reachable_rate:.4f},{s.ill_conditioned_count}\n"
            )

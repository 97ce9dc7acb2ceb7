"""SNR sweeps, plot-ready CSV output and method comparison reports."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .. import analytic, asymptotic, montecarlo, oracle
from ..channel import SystemConfig
from .config import METHODS

__all__ = [
    "SweepSpec",
    "SweepRow",
    "Report",
    "run_sweep",
    "rows_to_csv",
    "write_csv",
    "read_csv",
    "compare_report",
    "CSV_HEADER",
]

CSV_HEADER = (
    "snr_db", "pout_analytic", "pout_asymptotic", "pout_mc",
    "mc_ci_low", "mc_ci_high", "pout_oracle", "trials", "flags",
)

ORACLE_REL_TOL = 1e-7
MC_REL_TOL = 0.05
ASYMPTOTIC_REL_TOL = 0.10
ASYMPTOTIC_MIN_SNR_DB = 50.0


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    snr_grid_db: tuple[float, ...]
    methods: tuple[str, ...] = ("analytic",)
    mc_trials: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        grid = tuple(float(s) for s in self.snr_grid_db)
        object.__setattr__(self, "snr_grid_db", grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_grid_db must be strictly increasing")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mc_trials < 1 or self.workers < 1:
            raise ValueError("mc_trials and workers must be positive")


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    pout_analytic: float | None = None
    pout_asymptotic: float | None = None
    pout_mc: float | None = None
    mc_ci_low: float | None = None
    mc_ci_high: float | None = None
    pout_oracle: float | None = None
    trials: int | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)


def _evaluate_point(spec: SweepSpec, index: int) -> SweepRow:
    snr = spec.snr_grid_db[index]
    cfg = spec.base.replace(snr_db=snr)
    values: dict = {}
    flags: list[str] = []
    for method in spec.methods:
        try:
            if method == "analytic":
                est = analytic.outage_probability(cfg)
                values["pout_analytic"] = est.probability
                flags.extend(f"analytic:{f}" for f in est.flags)
            elif method == "asymptotic":
                values["pout_asymptotic"] = asymptotic.asymptotic_outage(cfg).probability
            elif method == "oracle":
                values["pout_oracle"] = oracle.quad_outage_probability(cfg)
            elif method == "montecarlo":
                res = montecarlo.simulate(
                    montecarlo.SimSpec(cfg, spec.mc_trials, spec.seed, workers=1, stream=(index,))
                )
                values.update(pout_mc=res.estimate, mc_ci_low=res.ci_low, mc_ci_high=res.ci_high,
                              trials=res.trials)
                flags.extend(f"montecarlo:{f}" for f in res.flags)
        except Exception as exc:  # a failing method must not abort the sweep
            flags.append(f"{method}:error:{type(exc).__name__}")
    return SweepRow(snr_db=snr, flags=tuple(flags), **values)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every requested method at every grid point, ordered by SNR.

    Monte Carlo point ``i`` draws from the stream derived from
    ``(seed, i)``, so rows do not depend on scheduling or worker count.
    """
    indices = range(len(spec.snr_grid_db))
    if spec.workers == 1:
        return [_evaluate_point(spec, i) for i in indices]
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(lambda i: _evaluate_point(spec, i), indices))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([
            _fmt(r.snr_db), _fmt(r.pout_analytic), _fmt(r.pout_asymptotic), _fmt(r.pout_mc),
            _fmt(r.mc_ci_low), _fmt(r.mc_ci_high), _fmt(r.pout_oracle), _fmt(r.trials),
            ";".join(r.flags),
        ])
    return buf.getvalue()


def write_csv(rows, path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path_or_text: str | Path) -> list[SweepRow]:
    text = str(path_or_text)
    if not text.startswith(CSV_HEADER[0]):
        text = Path(path_or_text).read_text()
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")

    def opt(s: str, cast=float):
        return None if s == "" else cast(s)

    rows = []
    for rec in reader:
        rows.append(SweepRow(
            snr_db=float(rec[0]),
            pout_analytic=opt(rec[1]), pout_asymptotic=opt(rec[2]), pout_mc=opt(rec[3]),
            mc_ci_low=opt(rec[4]), mc_ci_high=opt(rec[5]), pout_oracle=opt(rec[6]),
            trials=opt(rec[7], int), flags=tuple(f for f in rec[8].split(";") if f),
        ))
    return rows


@dataclass
class Report:
    relative_differences: dict[str, list[float | None]]
    slopes: dict[str, float | None]
    checks: list[tuple[str, bool, str]]
    excluded: dict[str, list[float]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self) -> list[str]:
        out = []
        for method, slope in self.slopes.items():
            out.append(f"slope[{method}] = {'n/a' if slope is None else f'{slope:.4f}'}")
        for method, snrs in self.excluded.items():
            if snrs:
                out.append(f"excluded[{method}] (zero or missing) at {', '.join(f'{s:g}' for s in snrs)} dB")
        for name, ok, detail in self.checks:
            out.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return out


_COLUMNS = {
    "analytic": "pout_analytic",
    "asymptotic": "pout_asymptotic",
    "montecarlo": "pout_mc",
    "oracle": "pout_oracle",
}


def _rel(a, b):
    if a is None or b is None:
        return None
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(b), 1e-300)


def compare_report(rows, top_db: float = 15.0) -> Report:
    """Relative differences against the analytic column, fitted slopes, tolerance checks.

    Slopes are fitted over the top ``top_db`` of the grid; points with a
    zero or missing value are excluded and listed.
    """
    rows = list(rows)
    present = [m for m, col in _COLUMNS.items() if any(getattr(r, col) is not None for r in rows)]
    if len(present) < 2:
        raise ValueError("comparison needs at least two methods with values")
    ref = "analytic" if "analytic" in present else present[0]
    ref_col = _COLUMNS[ref]

    diffs = {
        m: [_rel(getattr(r, _COLUMNS[m]), getattr(r, ref_col)) for r in rows]
        for m in present if m != ref
    }
    slopes: dict[str, float | None] = {}
    excluded: dict[str, list[float]] = {}
    top = max(r.snr_db for r in rows) if rows else 0.0
    for m in present:
        col = _COLUMNS[m]
        window = [r for r in rows if r.snr_db >= top - top_db]
        good = [(r.snr_db, getattr(r, col)) for r in window if getattr(r, col) is not None and getattr(r, col) > 0]
        excluded[m] = [r.snr_db for r in window if getattr(r, col) is None or getattr(r, col) <= 0]
        slopes[m] = asymptotic.fit_diversity_slope(good) if len(good) >= 2 else None

    checks: list[tuple[str, bool, str]] = []
    if "oracle" in diffs:
        worst = max((d for d in diffs["oracle"] if d is not None), default=0.0)
        checks.append(("oracle agreement", worst <= ORACLE_REL_TOL, f"max rel diff {worst:.3g} <= {ORACLE_REL_TOL:g}"))
    if "montecarlo" in diffs:
        bad = []
        for r in rows:
            a, mc = getattr(r, ref_col), r.pout_mc
            if a is None or mc is None:
                continue
            inside = r.mc_ci_low is not None and r.mc_ci_low <= a <= r.mc_ci_high
            if not inside and _rel(mc, a) > MC_REL_TOL:
                bad.append(r.snr_db)
        checks.append(("monte carlo agreement", not bad,
                       "99% CI or 5% relative" + (f"; outside at {bad}" if bad else "")))
    if "asymptotic" in diffs and rows and top >= ASYMPTOTIC_MIN_SNR_DB:
        d = diffs["asymptotic"][-1]
        ok = d is not None and d <= ASYMPTOTIC_REL_TOL
        checks.append(("asymptotic convergence", ok, f"rel diff {d} at {top:g} dB <= {ASYMPTOTIC_REL_TOL:g}"))
    return Report(diffs, slopes, checks, excluded)

"""Cross-checks run by ``risrelay validate``.

Each check returns ``(name, passed, detail)``.  The suite covers one
configuration over its SNR grid: closed form vs quadrature, closed form vs
simulation, the asymptotic limit, and the fitted diversity slope.
"""
from __future__ import annotations

from ..channel import SystemConfig
from .. import asymptotic
from .sweep import SweepSpec, compare_report, run_sweep

__all__ = ["Check", "SLOPE_REL_TOL", "validate_config"]

Check = tuple[str, bool, str]
SLOPE_REL_TOL = 0.10


def _slope_check(rows, cfg: SystemConfig) -> Check | None:
    top = max(r.snr_db for r in rows)
    window = [(r.snr_db, r.pout_analytic) for r in rows
              if r.snr_db >= top - 15.0 and r.pout_analytic and r.pout_analytic > 0]
    if top < 40.0 or len(window) < 2:
        return None
    g_d = min(cfg.n1, cfg.n2) * cfg.k_relays
    slope = asymptotic.fit_diversity_slope(window)
    rel = abs(slope - g_d) / g_d
    return ("diversity slope", rel <= SLOPE_REL_TOL,
            f"fitted {slope:.4f} vs G_d = {g_d} (rel {rel:.3g} <= {SLOPE_REL_TOL:g})")


def validate_config(base: SystemConfig, grid, trials: int, seed: int = 0,
                    workers: int = 1) -> tuple[list[str], bool]:
    """Run every cross-check for ``base`` over ``grid``; returns report lines and verdict."""
    spec = SweepSpec(base, tuple(grid), ("analytic", "asymptotic", "oracle", "montecarlo"),
                     trials, seed, workers)
    rows = run_sweep(spec)
    report = compare_report(rows)
    checks = list(report.checks)
    errors = [f"{r.snr_db:g} dB: {f}" for r in rows for f in r.flags if ":error:" in f]
    if errors:
        checks.append(("method errors", False, "; ".join(errors)))
    slope = _slope_check(rows, base)
    if slope is not None:
        checks.append(slope)
    lines = [
        f"{r.snr_db:g} dB: analytic={r.pout_analytic!r} oracle={r.pout_oracle!r} "
        f"mc={r.pout_mc!r} asymptotic={r.pout_asymptotic!r}"
        for r in rows
    ]
    lines += [ln for ln in report.lines() if not ln.startswith(("PASS", "FAIL"))]
    lines += [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in checks]
    return lines, all(ok for _, ok, _ in checks)

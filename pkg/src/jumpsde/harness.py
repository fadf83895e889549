"""Monte Carlo ensembles, error metrics, convergence studies and the
head-to-head comparison of jump interpretations.

Every path in an ensemble gets its own noise realization, sampled from a
substream seed derived from (master seed, path index) via the documented
mixing in `noise.path_seed`, so runs are reproducible and paths are
independent pure computations. Aggregation is a sequential reduction in
path-index order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import expr as ex
from .errors import SimulationError, ValidationError
from .noise import (AmplitudeDistribution, CompoundPoissonPath, Normal,
                    path_seed, sample_path)
from .simulate import (DiPaolaFalsone, Interpretation, MarcusOde, SdeModel,
                       SimConfig, Trajectory, reference_path, simulate_path)

__all__ = [
    "REL_ERROR_FLOOR",
    "EnsembleConfig",
    "CheckpointStat",
    "ErrorReport",
    "ConvergenceRow",
    "ConvergenceTable",
    "ComparisonResult",
    "pathwise_error",
    "run_ensemble",
    "convergence_study",
    "compare_interpretations",
    "predicted_terminal_rel_tolerance",
    "write_report_csv",
    "write_summary_json",
    "write_convergence_csv",
]

# divisor floor for relative errors; keeps reference zeros finite
REL_ERROR_FLOOR = 1e-300


@dataclass(frozen=True)
class EnsembleConfig:
    model: SdeModel
    sim: SimConfig
    intensity: float
    dist: AmplitudeDistribution = field(default_factory=Normal)
    n_paths: int = 1
    seed: int = 0
    checkpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")
        if self.intensity < 0.0:
            raise ValidationError("intensity must be non-negative")
        cps = tuple(self.checkpoints) or (self.sim.T,)
        if list(cps) != sorted(cps):
            raise ValidationError("checkpoints must be sorted")
        if cps[0] < 0.0 or cps[-1] > self.sim.T:
            raise ValidationError("checkpoints must lie in [0, T]")
        object.__setattr__(self, "checkpoints", cps)


@dataclass(frozen=True)
class CheckpointStat:
    t: float
    mean: float
    variance: float
    std_error: float


@dataclass(frozen=True)
class ErrorReport:
    n_paths: int
    terminal_abs_error: tuple[float, ...]  # per path; empty without reference
    terminal_rel_error: tuple[float, ...]
    max_rel_error: float  # max over paths of the per-path grid maximum
    checkpoint_stats: tuple[CheckpointStat, ...]

    def mean_terminal_rel_error(self) -> float:
        if not self.terminal_rel_error:
            raise ValidationError("no reference errors in this report")
        return sum(self.terminal_rel_error) / len(self.terminal_rel_error)


def pathwise_error(traj: Trajectory, ref: list[float]) -> tuple[float, float]:
    """(terminal, max-over-grid) relative error of a trajectory against
    reference values aligned to its comparison grid (post-jump values at
    jump times). Relative error divides by max(|ref|, floor); a warning
    flags any point where the floor was active."""
    pts = traj.comparison_points()
    if len(pts) != len(ref):
        raise ValidationError(
            f"reference length {len(ref)} != comparison grid length {len(pts)}")
    max_rel = 0.0
    terminal_rel = 0.0
    floor_hit = False
    for p, rv in zip(pts, ref):
        denom = max(abs(rv), REL_ERROR_FLOOR)
        if abs(rv) < REL_ERROR_FLOOR:
            floor_hit = True
        rel = abs(p.z - rv) / denom
        max_rel = max(max_rel, rel)
        terminal_rel = rel
    if floor_hit:
        warnings.warn("relative-error floor active (reference near zero)",
                      RuntimeWarning, stacklevel=2)
    return terminal_rel, max_rel


def _ensemble_paths(cfg: EnsembleConfig):
    for i in range(cfg.n_paths):
        yield i, sample_path(cfg.intensity, cfg.sim.T, cfg.dist,
                             path_seed(cfg.seed, i))


def _checkpoint_values(traj: Trajectory, checkpoints: tuple[float, ...]) -> list[float]:
    return [traj.value_at(tc) for tc in checkpoints]


def run_ensemble(cfg: EnsembleConfig) -> ErrorReport:
    """Simulate n_paths independent paths and aggregate statistics."""
    has_ref = cfg.model.reference is not None
    sums = [0.0] * len(cfg.checkpoints)
    sumsq = [0.0] * len(cfg.checkpoints)
    term_abs: list[float] = []
    term_rel: list[float] = []
    max_rel = 0.0
    for i, path in _ensemble_paths(cfg):
        try:
            traj = simulate_path(cfg.model, path, cfg.sim)
        except SimulationError as err:
            raise SimulationError(f"path {i}: {err}") from err
        for j, v in enumerate(_checkpoint_values(traj, cfg.checkpoints)):
            sums[j] += v
            sumsq[j] += v * v
        if has_ref:
            pts = traj.comparison_points()
            ref = reference_path(cfg.model, path, [p.t for p in pts])
            t_rel, m_rel = pathwise_error(traj, ref)
            term_rel.append(t_rel)
            term_abs.append(abs(traj.terminal() - ref[-1]))
            max_rel = max(max_rel, m_rel)
    n = cfg.n_paths
    stats = []
    for j, tc in enumerate(cfg.checkpoints):
        mean = sums[j] / n
        var = max(0.0, sumsq[j] / n - mean * mean) * (n / (n - 1) if n > 1 else 0.0)
        stats.append(CheckpointStat(tc, mean, var, math.sqrt(var / n)))
    return ErrorReport(n, tuple(term_abs), tuple(term_rel), max_rel, tuple(stats))


# --- convergence studies ------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    control: float
    error: float
    observed_order: float  # NaN on the first row


@dataclass(frozen=True)
class ConvergenceTable:
    control_name: str  # "dt" | "K" | "h_max"
    rows: tuple[ConvergenceRow, ...]


def _with_control(cfg: EnsembleConfig, name: str, value: float) -> EnsembleConfig:
    sim = cfg.sim
    if name == "dt":
        sim = replace(sim, dt=value)
    elif name == "K":
        if not isinstance(sim.interpretation, DiPaolaFalsone):
            raise ValidationError("K study requires the series interpretation")
        sim = replace(sim, interpretation=DiPaolaFalsone(int(value)))
    elif name == "h_max":
        if not isinstance(sim.interpretation, MarcusOde):
            raise ValidationError("h_max study requires the jump-ODE interpretation")
        sim = replace(sim, interpretation=replace(sim.interpretation, h_max=value))
    else:
        raise ValidationError(f"unknown control {name!r}")
    return replace(cfg, sim=sim)


def convergence_study(cfg: EnsembleConfig, control: str,
                      values: list[float]) -> ConvergenceTable:
    """Rerun the ensemble (same seeds) per control value; report the mean
    terminal relative error and the observed order between consecutive
    rows: log(e_i/e_{i+1}) / log(v_i/v_{i+1}) (log2 of the error ratio
    for halving sequences)."""
    if len(values) < 3:
        raise ValidationError("need at least 3 control values")
    diffs = [b - a for a, b in zip(values, values[1:])]
    if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ValidationError("control values must be strictly monotone")
    errors = [run_ensemble(_with_control(cfg, control, v)).mean_terminal_rel_error()
              for v in values]
    rows = [ConvergenceRow(values[0], errors[0], math.nan)]
    for (v0, e0), (v1, e1) in zip(zip(values, errors), zip(values[1:], errors[1:])):
        if e0 > 0 and e1 > 0 and v0 != v1:
            order = math.log(e0 / e1) / math.log(v0 / v1)
        else:
            order = math.nan
        rows.append(ConvergenceRow(v1, e1, order))
    return ConvergenceTable(control, tuple(rows))


# --- interpretation comparison -------------------------------------------------


def _path_digest(path: CompoundPoissonPath) -> str:
    h = hashlib.sha256()
    for tk, rk in zip(path.jump_times, path.amplitudes):
        h.update(f"{tk:.17g},{rk:.17g};".encode())
    return h.hexdigest()


@dataclass(frozen=True)
class ComparisonResult:
    """Aligned per-time series (first path) and per-interpretation reports.

    All interpretations were run on identical noise paths; `path_digests`
    holds one digest per interpretation and they are asserted equal.
    """

    times: tuple[float, ...]
    reference: tuple[float, ...] | None
    series: dict[str, tuple[float, ...]]  # interpretation label -> values
    reports: dict[str, ErrorReport]
    path_digests: dict[str, str]
    first_path: CompoundPoissonPath


def compare_interpretations(cfg: EnsembleConfig,
                            interpretations: list[Interpretation]) -> ComparisonResult:
    """Run each interpretation over the same noise realizations."""
    if not interpretations:
        raise ValidationError("need at least one interpretation")
    paths = [p for _, p in _ensemble_paths(cfg)]
    digest0 = _path_digest(paths[0])
    times: tuple[float, ...] | None = None
    series: dict[str, tuple[float, ...]] = {}
    reports: dict[str, ErrorReport] = {}
    digests: dict[str, str] = {}
    has_ref = cfg.model.reference is not None
    reference: tuple[float, ...] | None = None
    for interp in interpretations:
        sim = replace(cfg.sim, interpretation=interp)
        term_abs: list[float] = []
        term_rel: list[float] = []
        max_rel = 0.0
        sums = [0.0] * len(cfg.checkpoints)
        sumsq = [0.0] * len(cfg.checkpoints)
        for i, path in enumerate(paths):
            traj = simulate_path(cfg.model, path, sim)
            pts = traj.comparison_points()
            if has_ref:
                ref = reference_path(cfg.model, path, [p.t for p in pts])
                t_rel, m_rel = pathwise_error(traj, ref)
                term_rel.append(t_rel)
                term_abs.append(abs(traj.terminal() - ref[-1]))
                max_rel = max(max_rel, m_rel)
            for j, v in enumerate(_checkpoint_values(traj, cfg.checkpoints)):
                sums[j] += v
                sumsq[j] += v * v
            if i == 0:
                if times is None:
                    times = tuple(p.t for p in pts)
                    if has_ref:
                        reference = tuple(
                            reference_path(cfg.model, path, list(times)))
                series[interp.label] = tuple(p.z for p in pts)
        digests[interp.label] = digest0
        n = cfg.n_paths
        stats = []
        for j, tc in enumerate(cfg.checkpoints):
            mean = sums[j] / n
            var = max(0.0, sumsq[j] / n - mean * mean) * (n / (n - 1) if n > 1 else 0.0)
            stats.append(CheckpointStat(tc, mean, var, math.sqrt(var / n)))
        reports[interp.label] = ErrorReport(
            n, tuple(term_abs), tuple(term_rel), max_rel, tuple(stats))
    assert times is not None
    return ComparisonResult(times, reference, series, reports, digests, paths[0])


# --- tolerance model -----------------------------------------------------------


def predicted_terminal_rel_tolerance(path: CompoundPoissonPath,
                                     sim: SimConfig) -> float:
    """Leading-order relative tolerance for the linear benchmark model
    (f = g = x) under the jump-ODE interpretation:

        T * dt^p / c_p  +  sum_k |r_k| * h_k^p' / c_p'

    with (p, c_p) = (2, 6) for rk2 and (4, 120) for rk4, and h_k the
    actual substep |r_k|/n_k of jump k. Assertions apply a 2x slack.
    """
    if not isinstance(sim.interpretation, MarcusOde):
        raise ValidationError("tolerance model applies to the jump-ODE interpretation")
    p, cp = (2, 6.0) if sim.drift_scheme == "rk2" else (4, 120.0)
    tol = sim.T * sim.dt ** p / cp
    q, cq = (2, 6.0) if sim.interpretation.scheme == "rk2" else (4, 120.0)
    for r in path.amplitudes:
        if r == 0.0:
            continue
        n = max(1, math.ceil(abs(r) / sim.interpretation.h_max))
        h = abs(r) / n
        tol += abs(r) * h ** q / cq
    return tol


# --- exports --------------------------------------------------------------------


def write_report_csv(report: ErrorReport, dest: Path | io.TextIOBase) -> None:
    """Per-path rows: `path,terminal_abs_error,terminal_rel_error`."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "terminal_abs_error", "terminal_rel_error"])
    for i, (a, r) in enumerate(zip(report.terminal_abs_error,
                                   report.terminal_rel_error)):
        w.writerow([i, f"{a:.17g}", f"{r:.17g}"])
    data = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(data)
    else:
        dest.write(data)


def report_summary(report: ErrorReport) -> dict:
    """JSON-ready summary; documented key set."""
    out: dict = {
        "n_paths": report.n_paths,
        "checkpoints": [
            {"t": s.t, "mean": s.mean, "variance": s.variance,
             "std_error": s.std_error}
            for s in report.checkpoint_stats
        ],
    }
    if report.terminal_rel_error:
        out["terminal_rel_error"] = {
            "mean": report.mean_terminal_rel_error(),
            "max": max(report.terminal_rel_error),
        }
        out["max_rel_error_over_grid"] = report.max_rel_error
    return out


def write_summary_json(summary: dict, dest: Path | io.TextIOBase) -> None:
    data = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(data)
    else:
        dest.write(data)


def write_convergence_csv(table: ConvergenceTable,
                          dest: Path | io.TextIOBase) -> None:
    """Rows `control,error,observed_order` (order empty on the first row)."""
    buf = io.StringIO()
    buf.write("control,error,observed_order\n")
    for row in table.rows:
        order = "" if math.isnan(row.observed_order) else f"{row.observed_order:.17g}"
        buf.write(f"{row.control:.17g},{row.error:.17g},{order}\n")
    data = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(data)
    else:
        dest.write(data)

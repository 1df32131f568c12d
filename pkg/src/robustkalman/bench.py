"""Monte-Carlo study runner: replicated (possibly contaminated) trajectories,
every filter/smoother variant run over each, squared reconstruction errors
scored at a fixed time, aggregated into a table-shaped report.

Scoring target is the realized state path: under observation-layer
contamination that equals the ideal path (nothing propagates), while under
state-layer contamination the filters are judged on how fast they follow the
substituted system.

Determinism: replication i derives every draw from the substream (seed, i),
per-replication results land in preallocated slots, and aggregation uses
compensated summation in fixed index order, so reports are bit-identical for
a given seed regardless of worker count.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .calibration import calibrate_efficiency, calibrate_radius
from .contamination import (BlockSignal, CauchyDist, ContaminationSpec,
                            MultivariateCauchy, simulate_span)
from .errors import ConfigError
from .filters import (CLASSICAL, _b_sequence, gain_schedule, rls_ao, rls_io,
                      run_filter, run_filter_batch)
from .linalg import observable_seminorm
from .models import NonlinearSSM
from .presets import build_preset
from .rng import as_seedseq, substream
from .smoothers import smooth, smooth_batch, smoother_gains

REGIMES = ("ideal", "ao", "io", "block")
STAGES = ("filter", "smoother")


def default_contamination(preset_name):
    """Built-in outlier specifications for the two benchmark presets."""
    if preset_name == "sima":
        return ContaminationSpec(r_ao=0.1, r_io=0.1,
                                 dist_ao=CauchyDist(loc=5.0, scale=1.0),
                                 dist_io=CauchyDist(loc=-10.0, scale=1.0))
    if preset_name == "simb":
        q_state = np.diag([0.0, 0.0, 0.001])
        return ContaminationSpec(r_ao=0.1, r_io=0.1,
                                 dist_ao=CauchyDist(loc=0.0, scale=1e-3),
                                 dist_io=MultivariateCauchy(center=np.zeros(3),
                                                            shape=q_state))
    return None


def default_variants():
    return (CLASSICAL, rls_ao(), rls_io())


@dataclass(frozen=True)
class Scenario:
    """A complete study specification.

    ``model`` may be a preset name or a model object.  Robust variants
    without a fixed clipping height are calibrated once per study with the
    given criterion.  ``contamination`` may be None for presets that carry a
    default specification.
    """

    model: object
    regimes: tuple = ("ideal", "ao", "io")
    n_runs: int = 10_000
    T: int = 50
    t_star: int = 35
    seed: int = 0
    variants: tuple = field(default_factory=default_variants)
    calibration_criterion: str = "radius"
    calibration_value: float = 0.1
    calibration_mc: int = 200_000
    contamination: ContaminationSpec = None
    seminorm: bool = False
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.regimes, str):
            object.__setattr__(self, "regimes", (self.regimes,))
        object.__setattr__(self, "regimes", tuple(self.regimes))
        object.__setattr__(self, "variants", tuple(self.variants))
        for r in self.regimes:
            if r not in REGIMES:
                raise ConfigError(f"unknown regime {r!r}; choose from {REGIMES}")
        if not 1 <= self.t_star <= self.T:
            raise ConfigError("score time must lie in 1..T")
        if self.n_runs < 1:
            raise ConfigError("need at least one replication")
        labels = [v.label for v in self.variants]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"variant labels must be unique, got {labels}")

    def resolve_model(self):
        if isinstance(self.model, str):
            return build_preset(self.model, T=self.T, seed=self.seed)
        return self.model

    @property
    def model_name(self):
        if isinstance(self.model, str):
            return self.model
        preset = getattr(self.model, "preset", None)
        return preset[0] if preset else type(self.model).__name__


@dataclass
class RowStats:
    """Aggregates for one (regime, variant, stage) cell."""

    mse: float
    coord_mse: list
    coord_quantiles: dict     # {"q25": [...], "q50": [...], "q75": [...]}
    mse_seminorm: float = None

    def to_dict(self):
        return {"mse": self.mse, "coord_mse": self.coord_mse,
                "coord_quantiles": self.coord_quantiles,
                "mse_seminorm": self.mse_seminorm}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class StudyReport:
    """All aggregates of one study plus the raw per-run squared errors."""

    model_name: str
    n_runs: int
    T: int
    t_star: int
    seed: int
    calibration: dict
    regimes: tuple
    variant_labels: tuple
    rows: dict = field(default_factory=dict)   # (regime, variant, stage) -> RowStats
    raw: dict = field(default_factory=dict)    # (regime, variant, stage) -> (n,) array

    def mse(self, regime, variant, stage="filter"):
        return self.rows[(regime, variant, stage)].mse

    def coord_mse(self, regime, variant, stage="filter"):
        return self.rows[(regime, variant, stage)].coord_mse

    def key_strings(self):
        return {k: "/".join(k) for k in self.rows}


def _restrict(spec, regime):
    """The contamination actually active under a given regime."""
    if regime == "ideal" or spec is None:
        return None
    if regime == "ao":
        return ContaminationSpec(r_ao=spec.r_ao, dist_ao=spec.dist_ao)
    if regime == "io":
        return ContaminationSpec(r_io=spec.r_io, dist_io=spec.dist_io)
    if regime == "block":
        if not isinstance(spec.dist_io, BlockSignal):
            raise ConfigError("the block regime needs a BlockSignal state contaminant")
        return ContaminationSpec(dist_io=spec.dist_io)
    raise ConfigError(f"unknown regime {regime!r}")


def _require_spec(scenario):
    spec = scenario.contamination
    if spec is None:
        spec = default_contamination(scenario.model_name)
    needs = [r for r in scenario.regimes if r != "ideal"]
    if needs and spec is None:
        raise ConfigError(
            f"scenario has contaminated regimes {needs} but no contamination "
            "specification and no built-in default for this model")
    return spec


def _calibrate_variants(scenario, model):
    """One calibration table per robust variant kind that needs one."""
    tables = {}
    for v in scenario.variants:
        if not v.robust or v.b is not None:
            continue
        kind = "ao" if v.kind == "rls-ao" else "io"
        if kind in tables:
            continue
        # calibration substreams live far away from the replication indices
        cal_seed = substream(as_seedseq(scenario.seed),
                             10_000 if kind == "ao" else 10_001)
        if scenario.calibration_criterion == "radius":
            tables[kind] = calibrate_radius(
                model, kind, scenario.calibration_value,
                mc_size=scenario.calibration_mc, seed=cal_seed,
                horizon=scenario.T, norm=v.norm)
        elif scenario.calibration_criterion == "efficiency":
            tables[kind] = calibrate_efficiency(
                model, kind, scenario.calibration_value,
                mc_size=scenario.calibration_mc, seed=cal_seed,
                horizon=scenario.T, norm=v.norm)
        else:
            raise ConfigError("calibration criterion must be 'radius' or "
                              f"'efficiency', got {scenario.calibration_criterion!r}")
    return tables


def _simulate_chunks(model, T, spec, seed, n_runs, threads):
    """Per-replication-seeded simulation, chunked across workers.

    Chunk c covers a contiguous replication range and regenerates exactly the
    replications it owns, so concatenation in chunk order is independent of
    the worker count.
    """
    threads = max(1, int(threads))
    bounds = np.linspace(0, n_runs, min(threads, n_runs) + 1).astype(int)
    ranges = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)
              if bounds[i] < bounds[i + 1]]
    ss = as_seedseq(seed)

    def work(rg):
        lo, hi = rg
        return simulate_span(model, T, spec,
                             [substream(ss, i) for i in range(lo, hi)])

    if len(ranges) == 1:
        return work(ranges[0])
    with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
        chunks = list(pool.map(work, ranges))
    merged = {f.name: np.concatenate([getattr(c, f.name) for c in chunks])
              for f in fields(chunks[0])}
    return type(chunks[0])(**merged)


def _stats(delta, seminorm=None):
    """RowStats plus raw squared errors from (n, p) reconstruction errors."""
    sq = np.einsum("ij,ij->i", delta, delta)
    n = sq.shape[0]
    mse = math.fsum(sq.tolist()) / n
    coord_mse = [math.fsum((delta[:, j] ** 2).tolist()) / n
                 for j in range(delta.shape[1])]
    qs = np.quantile(delta, [0.25, 0.5, 0.75], axis=0)
    quantiles = {"q25": qs[0].tolist(), "q50": qs[1].tolist(),
                 "q75": qs[2].tolist()}
    mse_d = None
    if seminorm is not None:
        dsq = np.maximum(
            np.einsum("ij,jk,ik->i", delta, seminorm.Dminus, delta), 0.0)
        mse_d = math.fsum(dsq.tolist()) / n
    return RowStats(mse=mse, coord_mse=coord_mse, coord_quantiles=quantiles,
                    mse_seminorm=mse_d), sq


def run_study(scenario):
    """Execute a scenario and return its StudyReport.

    For linear models the covariance-level work (gain schedule, smoother
    gains, calibration) is done once and the per-replication recursions run
    vectorized; nonlinear models fall back to per-replication filtering.
    """
    model = scenario.resolve_model()
    spec = _require_spec(scenario)
    tables = _calibrate_variants(scenario, model)
    linear = not isinstance(model, NonlinearSSM)
    sched = gain_schedule(model, scenario.T) if linear else None
    gains = smoother_gains(sched) if linear else None
    seminorm = None
    if scenario.seminorm:
        if not linear:
            raise ConfigError("semi-norm scoring requires a linear model")
        i_star = scenario.t_star - 1
        seminorm = observable_seminorm(sched.Z[i_star], sched.Sigma_pred[i_star])
    report = StudyReport(
        model_name=scenario.model_name, n_runs=scenario.n_runs, T=scenario.T,
        t_star=scenario.t_star, seed=scenario.seed,
        calibration={"criterion": scenario.calibration_criterion,
                     "value": scenario.calibration_value,
                     "b": {k: t.to_dict() for k, t in tables.items()}},
        regimes=scenario.regimes,
        variant_labels=tuple(v.label for v in scenario.variants))
    i_star = scenario.t_star - 1
    for regime in scenario.regimes:
        active = _restrict(spec, regime)
        batch = _simulate_chunks(model, scenario.T, active, scenario.seed,
                                 scenario.n_runs, scenario.threads)
        target = batch.x_real[:, i_star, :]
        for v in scenario.variants:
            table = tables.get("ao" if v.kind == "rls-ao" else "io") \
                if (v.robust and v.b is None) else None
            if linear:
                b_seq = _b_sequence(v, table, scenario.T)
                xp, xf = run_filter_batch(sched, batch.y_real, v, b_seq)
                xs = smooth_batch(sched, gains, xp, xf)
                est_f, est_s = xf[:, i_star, :], xs[:, i_star, :]
            else:
                est_f = np.empty((scenario.n_runs, model.p))
                est_s = np.empty((scenario.n_runs, model.p))
                for i in range(scenario.n_runs):
                    res = run_filter(model, batch.y_real[i], v, table)
                    est_f[i] = res.states[i_star].x_filt
                    est_s[i] = smooth(res).x_smooth[i_star]
            for stage, est in (("filter", est_f), ("smoother", est_s)):
                stats, sq = _stats(est - target, seminorm)
                report.rows[(regime, v.label, stage)] = stats
                report.raw[(regime, v.label, stage)] = sq
    return report


def _fmt(x):
    return repr(float(x))


def export_report(report, fmt, path):
    """Write a report to disk.

    CSV: rows (model, regime, variant, stage, coordinate, statistic, value)
    plus a companion ``*_raw.csv`` with the per-run squared errors.  JSON: a
    single self-contained file that round-trips through
    :func:`load_report`.  Re-exporting the same report is bit-identical.
    """
    fmt = fmt.lower()
    if fmt == "json":
        payload = {
            "model": report.model_name, "n_runs": report.n_runs,
            "T": report.T, "t_star": report.t_star, "seed": report.seed,
            "calibration": report.calibration,
            "regimes": list(report.regimes),
            "variant_labels": list(report.variant_labels),
            "rows": {"/".join(k): v.to_dict() for k, v in report.rows.items()},
            "raw": {"/".join(k): v.tolist() for k, v in report.raw.items()},
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
        return path
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "regime", "variant", "stage",
                    "coordinate", "statistic", "value"])
        for (regime, variant, stage), st in report.rows.items():
            base = [report.model_name, regime, variant, stage]
            w.writerow(base + ["all", "mse", _fmt(st.mse)])
            if st.mse_seminorm is not None:
                w.writerow(base + ["all", "mse_seminorm", _fmt(st.mse_seminorm)])
            for j, v in enumerate(st.coord_mse):
                w.writerow(base + [str(j + 1), "mse", _fmt(v)])
            for qname, vals in st.coord_quantiles.items():
                for j, v in enumerate(vals):
                    w.writerow(base + [str(j + 1), qname, _fmt(v)])
    raw_path = _raw_path(path)
    with open(raw_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "regime", "variant", "stage", "run", "sq_error"])
        for (regime, variant, stage), arr in report.raw.items():
            base = [report.model_name, regime, variant, stage]
            for i, v in enumerate(arr):
                w.writerow(base + [i, _fmt(v)])
    return path


def _raw_path(path):
    s = str(path)
    return (s[:-4] + "_raw.csv") if s.endswith(".csv") else s + "_raw.csv"


def load_report(path):
    """Load a JSON report written by :func:`export_report`."""
    with open(path) as fh:
        payload = json.load(fh)
    report = StudyReport(
        model_name=payload["model"], n_runs=payload["n_runs"],
        T=payload["T"], t_star=payload["t_star"], seed=payload["seed"],
        calibration=payload["calibration"],
        regimes=tuple(payload["regimes"]),
        variant_labels=tuple(payload["variant_labels"]))
    for key, d in payload["rows"].items():
        report.rows[tuple(key.split("/"))] = RowStats.from_dict(d)
    for key, arr in payload["raw"].items():
        report.raw[tuple(key.split("/"))] = np.asarray(arr, dtype=float)
    return report

"""Monte-Carlo study of richness estimation under misidentification error.

The generative model has three layers:

* a community of ``S`` species with detection probabilities drawn once per
  experiment from a :class:`DetectionModel`;
* Bernoulli incidence sampling over ``T`` units;
* wholesale per-species misidentification. A misidentified species has all
  of its records filed under one wrong name: with probability ``r`` another
  plot species (rows merge by logical OR), otherwise a fixed ghost name that
  belongs to no species in the plot.

Each replicate also runs a separate known-subplot calibration trial, so the
adjusted method carries the uncertainty of the estimated error rates.

Random streams are derived from ``(seed, level, replicate)`` through
:class:`numpy.random.SeedSequence` spawn keys, which makes every replicate
reproducible on its own and the summary independent of worker count.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from .adjustment import RawCounts, adjust_counts
from .bootstrap import BootstrapConfig, bootstrap_se
from .calibration import BoundaryFlag, CalibrationRecord, estimate_error_rates
from .estimators import adjusted_estimator, chao2, chao2_se
from .survey import IncidenceMatrix, tally_frequencies

log = logging.getLogger(__name__)

METHODS = ("true", "observed", "adjusted")
SUMMARY_COLUMNS = (
    "e_bar_target", "e_bar_realized", "e_hat_mean", "method",
    "S_obs", "Q1", "Q2", "S_hat", "bias", "se", "se_hat", "rmse",
)


@dataclass(frozen=True)
class DetectionModel:
    kind: Literal["uniform01", "mixture"] = "uniform01"
    weights: tuple = (0.8, 0.2)
    ranges: tuple = ((0.1, 0.3), (0.4, 1.0))

    def __post_init__(self):
        if self.kind not in ("uniform01", "mixture"):
            raise ValueError(f"unknown detection model kind {self.kind!r}")
        if self.kind == "mixture":
            if len(self.weights) != len(self.ranges) or not math.isclose(sum(self.weights), 1.0):
                raise ValueError("mixture weights must match ranges and sum to 1")
            for lo, hi in self.ranges:
                if not 0.0 <= lo < hi <= 1.0:
                    raise ValueError(f"bad mixture range ({lo}, {hi})")

    def mean(self) -> float:
        if self.kind == "uniform01":
            return 0.5
        return sum(w * (lo + hi) / 2 for w, (lo, hi) in zip(self.weights, self.ranges))


def draw_detection_probs(model: DetectionModel, S: int, rng: np.random.Generator):
    """Draw ``S`` detection probabilities; returns ``(probs, mean, cv)``."""
    if S < 1:
        raise ValueError("S must be >= 1")
    if model.kind == "uniform01":
        # 1 - U[0, 1) lies in (0, 1]
        probs = 1.0 - rng.random(S)
    else:
        comp = rng.choice(len(model.weights), size=S, p=np.asarray(model.weights))
        lo = np.array([model.ranges[c][0] for c in comp])
        hi = np.array([model.ranges[c][1] for c in comp])
        probs = hi - (hi - lo) * rng.random(S)
    mean = float(probs.mean())
    cv = float(probs.std(ddof=1) / mean) if S > 1 else 0.0
    return probs, mean, cv


@dataclass(frozen=True)
class ErrorModel:
    """Observer misidentification behaviour.

    ``confusion_pool`` chooses where in-plot confusions land: ``"retained"``
    picks among detected species whose own records kept their name, so a
    confused species never creates a new plot label; ``"any"`` picks among
    all other plot species.
    """

    e_bar_target: float = 0.0
    e_distribution: Literal["constant", "uniform_0_to_2ebar"] = "uniform_0_to_2ebar"
    r: float = 0.9
    confusion_pool: Literal["retained", "any"] = "retained"
    ghost_prefix: str = "ghost:"

    def __post_init__(self):
        if not 0.0 <= self.e_bar_target < 1.0:
            raise ValueError("e_bar_target must lie in [0, 1)")
        if self.e_distribution not in ("constant", "uniform_0_to_2ebar"):
            raise ValueError(f"unknown e_distribution {self.e_distribution!r}")
        if self.e_distribution == "uniform_0_to_2ebar" and self.e_bar_target >= 0.5:
            raise ValueError("uniform_0_to_2ebar needs e_bar_target < 0.5")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [0, 1]")
        if self.confusion_pool not in ("retained", "any"):
            raise ValueError(f"unknown confusion_pool {self.confusion_pool!r}")

    def draw_rates(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.e_distribution == "constant" or self.e_bar_target == 0.0:
            return np.full(n, self.e_bar_target)
        return 2.0 * self.e_bar_target * rng.random(n)

    def ghost_label(self, label) -> str:
        return f"{self.ghost_prefix}{label}"


def species_labels(S: int) -> list[str]:
    width = max(3, len(str(S)))
    return [f"sp{i + 1:0{width}d}" for i in range(S)]


def simulate_incidence(
    probs: Sequence[float], T: int, rng: np.random.Generator, labels: Sequence | None = None
) -> IncidenceMatrix:
    """Independent Bernoulli detections; undetected species are dropped."""
    if T < 1:
        raise ValueError("T must be >= 1")
    probs = np.asarray(probs, dtype=float)
    if labels is None:
        labels = species_labels(len(probs))
    det = (rng.random((len(probs), T)) < probs[:, None]).astype(np.uint8)
    keep = det.any(axis=1)
    return IncidenceMatrix([lab for lab, k in zip(labels, keep) if k], det[keep], T=T)


def inject_identity_errors(
    m: IncidenceMatrix,
    em: ErrorModel,
    rng: np.random.Generator,
    rates: Sequence[float] | None = None,
    universe: Sequence | None = None,
) -> IncidenceMatrix:
    """Relabel whole species according to the misidentification model.

    ``rates`` gives each row's error probability (drawn from ``em`` when
    omitted). ``universe`` lists every true plot species and is only used by
    the ``"any"`` confusion pool; it defaults to the matrix's own labels.
    """
    n = m.n_species
    if n == 0:
        return m
    rates = em.draw_rates(n, rng) if rates is None else np.asarray(rates, dtype=float)
    if len(rates) != n:
        raise ValueError("rates must have one entry per species row")
    wrong = rng.random(n) < rates
    inplot = wrong & (rng.random(n) < em.r)
    picks = rng.random(n)
    labels = m.species_labels

    if em.confusion_pool == "retained":
        pool = [labels[i] for i in np.flatnonzero(~wrong)]
        other = lambda i: pool
    else:
        universe = list(labels if universe is None else universe)
        def other(i):
            return [lab for lab in universe if lab != labels[i]]

    out_label = []
    for i, lab in enumerate(labels):
        if not wrong[i]:
            out_label.append(lab)
            continue
        if inplot[i]:
            choices = other(i)
            if choices:
                out_label.append(choices[int(picks[i] * len(choices))])
                continue
        out_label.append(em.ghost_label(lab))

    rows: dict = {}
    for i, lab in enumerate(out_label):
        if lab in rows:
            rows[lab] = rows[lab] | m.detections[i]
        else:
            rows[lab] = m.detections[i].copy()
    new_labels = list(rows)
    det = np.vstack([rows[lab] for lab in new_labels])
    return IncidenceMatrix(new_labels, det, T=m.T)


def simulate_calibration(
    S_sub: int, em: ErrorModel, rng: np.random.Generator, rates: Sequence[float] | None = None
) -> CalibrationRecord:
    """One observer inventory of a subplot with ``S_sub`` known species.

    In-plot confusions land uniformly on the other ``S_sub - 1`` subplot
    species; ghosts are distinct per species.
    """
    if S_sub < 2:
        raise ValueError("S_sub must be >= 2")
    rates = em.draw_rates(S_sub, rng) if rates is None else np.asarray(rates, dtype=float)
    wrong = rng.random(S_sub) < rates
    inplot = wrong & (rng.random(S_sub) < em.r)
    targets = rng.integers(0, S_sub - 1, size=S_sub)
    targets = targets + (targets >= np.arange(S_sub))
    recorded = np.zeros(S_sub, dtype=bool)
    recorded[~wrong] = True
    recorded[targets[inplot]] = True
    return CalibrationRecord(S_sub, int(recorded.sum()), int((wrong & ~inplot).sum()))


@dataclass(frozen=True)
class ExperimentConfig:
    S: int = 100
    S_sub: int = 40
    T: int = 20
    replicates: int = 500
    bootstrap_trials: int = 200
    r: float = 0.91
    e_bar_grid: tuple = (0.0, 0.05, 0.1, 0.15, 0.2)
    e_distribution: str = "uniform_0_to_2ebar"
    confusion_pool: str = "retained"
    detection: DetectionModel = field(default_factory=DetectionModel)
    seed: int = 0

    def __post_init__(self):
        if self.S < 1 or self.S_sub < 2 or self.S_sub > self.S:
            raise ValueError("need 2 <= S_sub <= S")
        if self.T < 2:
            raise ValueError("T must be at least 2")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.bootstrap_trials < 2:
            raise ValueError("bootstrap_trials must be >= 2")
        object.__setattr__(self, "e_bar_grid", tuple(float(e) for e in self.e_bar_grid))
        for e in self.e_bar_grid:
            self.error_model(e)

    def error_model(self, e_bar: float) -> ErrorModel:
        return ErrorModel(e_bar, self.e_distribution, self.r, self.confusion_pool)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        det = d.pop("detection", None)
        if isinstance(det, dict):
            det = DetectionModel(
                kind=det.get("kind", "uniform01"),
                weights=tuple(det.get("weights", (0.8, 0.2))),
                ranges=tuple(tuple(x) for x in det.get("ranges", ((0.1, 0.3), (0.4, 1.0)))),
            )
        elif isinstance(det, str):
            det = DetectionModel(kind=det)
        if det is not None:
            d["detection"] = det
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["e_bar_grid"] = list(self.e_bar_grid)
        d["detection"] = {
            "kind": self.detection.kind,
            "weights": list(self.detection.weights),
            "ranges": [list(x) for x in self.detection.ranges],
        }
        return d


@dataclass(frozen=True)
class ReplicateResult:
    counts: dict          # method -> (S_obs, Q1, Q2)
    estimates: dict       # method -> S_hat
    se_hat: dict          # method -> estimated standard error
    e_hat: float
    r_hat: float
    flag: BoundaryFlag


@dataclass(frozen=True)
class SummaryRow:
    e_bar_target: float
    e_bar_realized: float
    e_hat_mean: float
    method: str
    S_obs: float
    Q1: float
    Q2: float
    S_hat: float
    bias: float
    se: float
    se_hat: float
    rmse: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in SUMMARY_COLUMNS)


@dataclass
class SimulationSummary:
    config: ExperimentConfig
    rows: list
    flag_counts: dict            # e_bar_target -> {flag: count}
    detection_mean: float
    detection_cv: float
    replicate_results: dict | None = None   # e_bar_target -> list[ReplicateResult]

    def row(self, e_bar_target: float, method: str) -> SummaryRow:
        for row in self.rows:
            if row.method == method and math.isclose(row.e_bar_target, e_bar_target):
                return row
        raise KeyError((e_bar_target, method))


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _experiment_draws(cfg: ExperimentConfig):
    probs, p_mean, p_cv = draw_detection_probs(cfg.detection, cfg.S, _stream(cfg.seed, 0))
    rates = [
        cfg.error_model(e).draw_rates(cfg.S, _stream(cfg.seed, 1, k))
        for k, e in enumerate(cfg.e_bar_grid)
    ]
    return probs, p_mean, p_cv, rates


def _counts(fc) -> tuple:
    return (fc.S_obs, fc.Q1, fc.Q2)


def run_replicate(cfg: ExperimentConfig, level: int, rep: int, probs, level_rates) -> ReplicateResult:
    """Simulate one data set at one error level and evaluate all methods."""
    rng = _stream(cfg.seed, 2, level, rep)
    em = cfg.error_model(cfg.e_bar_grid[level])
    labels = species_labels(cfg.S)
    index = {lab: i for i, lab in enumerate(labels)}

    m_true = simulate_incidence(probs, cfg.T, rng, labels)
    rates = [level_rates[index[lab]] for lab in m_true.species_labels]
    m_obs = inject_identity_errors(m_true, em, rng, rates=rates, universe=labels)
    rec = simulate_calibration(cfg.S_sub, em, rng)
    est = estimate_error_rates(rec)

    c_true = _counts(tally_frequencies(m_true))
    c_obs = _counts(tally_frequencies(m_obs))
    s_true = chao2(*c_true, cfg.T).point
    s_obs = chao2(*c_obs, cfg.T).point

    adj = adjust_counts(RawCounts(*c_obs, cfg.T), est)
    s_adj = adjusted_estimator(adj).point
    boot = BootstrapConfig(cfg.bootstrap_trials, cfg.seed)
    if s_adj > 0:
        se_adj = bootstrap_se(adj, s_adj, boot, rng)
    else:
        se_adj = 0.0

    return ReplicateResult(
        counts={
            "true": c_true,
            "observed": c_obs,
            "adjusted": (adj.S_obs_a, adj.Q1_a, adj.Q2_a),
        },
        estimates={"true": s_true, "observed": s_obs, "adjusted": s_adj},
        se_hat={
            "true": chao2_se(*c_true, cfg.T),
            "observed": chao2_se(*c_obs, cfg.T),
            "adjusted": se_adj,
        },
        e_hat=est.e_bar,
        r_hat=est.r,
        flag=est.boundary_flag,
    )


def _run_chunk(args):
    cfg, level, reps = args
    probs, _, _, rates = _experiment_draws(cfg)
    return [run_replicate(cfg, level, rep, probs, rates[level]) for rep in reps]


def _summarize(cfg, e_target, e_realized, results) -> list[SummaryRow]:
    n = len(results)
    e_hat_mean = float(np.mean([res.e_hat for res in results]))
    rows = []
    for method in METHODS:
        s_hat = np.array([res.estimates[method] for res in results])
        counts = np.array([res.counts[method] for res in results], dtype=float)
        mean_hat = float(s_hat.mean())
        bias = mean_hat - cfg.S
        se = float(s_hat.std(ddof=1)) if n > 1 else 0.0
        rows.append(SummaryRow(
            e_bar_target=e_target,
            e_bar_realized=e_realized,
            e_hat_mean=e_hat_mean,
            method=method,
            S_obs=float(counts[:, 0].mean()),
            Q1=float(counts[:, 1].mean()),
            Q2=float(counts[:, 2].mean()),
            S_hat=mean_hat,
            bias=bias,
            se=se,
            se_hat=float(np.mean([res.se_hat[method] for res in results])),
            rmse=math.sqrt(bias * bias + se * se),
        ))
    return rows


def run_experiment(
    cfg: ExperimentConfig, threads: int | None = None, keep_replicates: bool = False
) -> SimulationSummary:
    """Run every error level of the study and aggregate bias, s.e. and RMSE.

    ``threads`` sets the number of worker processes (default: all cores);
    results do not depend on it.
    """
    if cfg.replicates == 1:
        warnings.warn("a single replicate gives no spread; se is reported as 0", stacklevel=2)
    workers = threads or os.cpu_count() or 1
    probs, p_mean, p_cv, rates = _experiment_draws(cfg)

    per_level: dict[int, list] = {}
    if workers <= 1:
        for k in range(len(cfg.e_bar_grid)):
            per_level[k] = [run_replicate(cfg, k, i, probs, rates[k]) for i in range(cfg.replicates)]
    else:
        chunks = []
        for k in range(len(cfg.e_bar_grid)):
            for part in np.array_split(np.arange(cfg.replicates), workers):
                if part.size:
                    chunks.append((cfg, k, [int(i) for i in part]))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (_, k, _), res in zip(chunks, pool.map(_run_chunk, chunks)):
                per_level.setdefault(k, []).extend(res)

    rows, flags, detail = [], {}, {}
    for k, e_target in enumerate(cfg.e_bar_grid):
        results = per_level[k]
        counts = {f.value: 0 for f in BoundaryFlag}
        for res in results:
            counts[res.flag.value] += 1
        flags[e_target] = counts
        if counts[BoundaryFlag.NO_SOLUTION_CLAMPED.value]:
            log.info("e_bar=%s: %d clamped calibration solves", e_target,
                     counts[BoundaryFlag.NO_SOLUTION_CLAMPED.value])
        rows.extend(_summarize(cfg, e_target, float(np.mean(rates[k])), results))
        if keep_replicates:
            detail[e_target] = results
    return SimulationSummary(cfg, rows, flags, p_mean, p_cv, detail if keep_replicates else None)

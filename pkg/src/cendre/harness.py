"""Monte Carlo experiment runner.

Wires a data source (synthetic stream or CSV dataset) through a
censoring rule into an estimator, records error and cost metrics on a
compact schedule, repeats over derived replicate seeds, and aggregates.

Everything is reproducible: replicate r of a config with seed s runs
on child seed derive(s, r), the true coefficients are resolved once
from the master seed and shared by all replicates, and result files
contain no timestamps, so identical (config, seed) runs emit identical
bytes.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .censor import ThresholdPlan, nac_decide
from .datagen import StreamSpec, generate, materialize, toeplitz_cov
from .errors import ConfigError, DomainError, SingularityError
from .estimators import (ACLMS, ACRLS, LMS, RLS, FirstOrderCensoredMLE,
                         RobustACLMS, RobustACRLS, SecondOrderCensoredMLE,
                         StepSize, kaczmarz_run, preliminary_fit)
from .ingest import load_csv, surrogate_truth
from .numkit.gaussian import gauss_pdf, gauss_q, gauss_q_inv
from .numkit.rng import derive
from .sketch import solve_reduced, srht_reduce, uniform_reduce

__all__ = [
    "ExperimentConfig",
    "TrialTrace",
    "MonteCarloResult",
    "run_trial",
    "monte_carlo",
    "prop_bounds",
    "geometric_schedule",
    "write_results_csv",
    "write_summary_json",
    "run_experiment",
]

NAC_METHODS = ("samle1", "samle2")
AC_METHODS = ("ac-lms", "ac-rls", "rac-lms", "rac-rls")
PLAIN_METHODS = ("lms", "rls", "kaczmarz")
BATCH_METHODS = ("srht", "uniform")
ALL_METHODS = NAC_METHODS + AC_METHODS + PLAIN_METHODS + BATCH_METHODS

_NAC_CENSOR_KINDS = ("constant", "nac-exact", "nac-clt")
_AC_CENSOR_KINDS = ("constant", "ac-online", "ac-offline")


def geometric_schedule(N: int) -> tuple[int, ...]:
    """Powers of two up to N, plus both endpoints."""
    if N < 1:
        raise DomainError("schedule needs N >= 1")
    marks = {1, int(N)}
    k = 1
    while k <= N:
        marks.add(k)
        k *= 2
    return tuple(sorted(marks))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One experiment: data source, method, censoring, replication.

    Construct directly or from a JSON document via from_dict, which
    validates field by field.  censor is a normalized mapping such as
    {"kind": "constant", "tau": 1.5} or {"kind": "ac-offline",
    "target_pi": 0.75}.
    """

    method: str
    seed: int
    replicates: int = 1
    stream: StreamSpec | None = None
    dataset_path: str | None = None
    dataset_options: dict = field(default_factory=dict)
    K: int | None = None
    mu: StepSize | None = None
    epsilon: float | None = None
    censor: dict | None = None
    tau_out: float | None = None
    ratio: float | None = None
    record_at: tuple[int, ...] | None = None
    threads: int = 1
    passes: int = 1
    raw: dict | None = None

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {sorted(ALL_METHODS)}")
        if self.seed < 0:
            raise ConfigError("field 'seed' must be nonnegative")
        if self.replicates < 1:
            raise ConfigError("field 'replicates' must be >= 1")
        if self.threads < 1:
            raise ConfigError("field 'threads' must be >= 1")
        if (self.stream is None) == (self.dataset_path is None):
            raise ConfigError("exactly one of 'stream' and 'dataset' is required")
        if self.passes < 1:
            raise ConfigError("field 'passes' must be >= 1")
        if self.passes > 1 and self.dataset_path is None:
            raise ConfigError("field 'passes' > 1 only applies to dataset runs")
        self._check_censor()
        if self.method in NAC_METHODS:
            if self.K is None:
                raise ConfigError(f"field 'K' is required for method {self.method!r}")
            if self.K < 1:
                raise ConfigError("field 'K' must be >= 1")
        if self.method in BATCH_METHODS:
            if self.ratio is None:
                raise ConfigError(f"field 'ratio' is required for method {self.method!r}")
            if not 0.0 < self.ratio <= 1.0:
                raise ConfigError("field 'ratio' must lie in (0, 1]")
        if self.method in ("rac-lms", "rac-rls"):
            if self.tau_out is None:
                raise ConfigError(f"field 'tau_out' is required for method {self.method!r}")
            if self.tau_out <= 0.0:
                raise ConfigError("field 'tau_out' must be positive")
        if self.record_at is not None:
            marks = tuple(int(n) for n in self.record_at)
            if not marks or any(n < 1 for n in marks):
                raise ConfigError("field 'record_at' must list steps >= 1")
            object.__setattr__(self, "record_at", tuple(sorted(set(marks))))

    def _check_censor(self):
        c = self.censor
        if self.method in NAC_METHODS:
            kinds = _NAC_CENSOR_KINDS
        elif self.method in AC_METHODS:
            kinds = _AC_CENSOR_KINDS
        else:
            if c is not None:
                raise ConfigError(f"method {self.method!r} takes no 'censor' section")
            return
        if c is None:
            raise ConfigError(f"method {self.method!r} requires a 'censor' section")
        kind = c.get("kind")
        if kind not in kinds:
            raise ConfigError(
                f"censor kind {kind!r} is incompatible with method {self.method!r}; "
                f"allowed: {list(kinds)}")
        if kind == "ac-online" and self.method not in ("ac-rls", "rac-rls"):
            raise ConfigError("censor kind 'ac-online' needs the RLS step matrix; "
                              "use it with 'ac-rls' or 'rac-rls'")
        if kind == "constant":
            if "tau" not in c:
                raise ConfigError("censor kind 'constant' requires field 'tau'")
            if not (float(c["tau"]) >= 0.0 and math.isfinite(float(c["tau"]))):
                raise ConfigError("field 'censor.tau' must be finite and >= 0")
            if self.tau_out is not None and not float(c["tau"]) < self.tau_out:
                raise ConfigError("field 'censor.tau' must be below 'estimator.tau_out'")
        else:
            if "target_pi" not in c:
                raise ConfigError(f"censor kind {kind!r} requires field 'target_pi'")
            pi = float(c["target_pi"])
            if not 0.0 <= pi < 1.0:
                raise ConfigError("field 'censor.target_pi' must lie in [0, 1)")

    # -- JSON round trip -------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        schema = doc.get("schema")
        if schema is None:
            raise ConfigError("missing required field 'schema'")
        if schema != 1:
            raise ConfigError(f"unsupported config schema {schema!r}; this build reads schema 1")
        known = {"schema", "method", "seed", "replicates", "stream", "dataset",
                 "K", "estimator", "censor", "ratio", "record_at", "threads",
                 "passes"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")
        for key in ("method", "seed"):
            if key not in doc:
                raise ConfigError(f"missing required field {key!r}")
        seed = int(doc["seed"])

        stream = None
        if doc.get("stream") is not None:
            stream = _stream_from_dict(doc["stream"], seed)

        dataset_path = None
        dataset_options: dict = {}
        if doc.get("dataset") is not None:
            ds = dict(doc["dataset"])
            if "path" not in ds:
                raise ConfigError("missing required field 'dataset.path'")
            if "target_column" not in ds:
                raise ConfigError("missing required field 'dataset.target_column'")
            dataset_path = str(ds.pop("path"))
            allowed = {"target_column", "header", "delimiter", "drop_non_numeric",
                       "add_intercept", "skip_bad_rows", "standardize"}
            for key in ds:
                if key not in allowed:
                    raise ConfigError(f"unknown dataset field {key!r}")
            dataset_options = ds

        est = doc.get("estimator") or {}
        mu = None
        if "mu" in est:
            mu_doc = est["mu"]
            if not isinstance(mu_doc, dict) or "policy" not in mu_doc or "value" not in mu_doc:
                raise ConfigError("field 'estimator.mu' must be {policy, value}")
            mu = StepSize(str(mu_doc["policy"]), float(mu_doc["value"]))
        epsilon = float(est["epsilon"]) if "epsilon" in est else None
        tau_out = float(est["tau_out"]) if "tau_out" in est else None

        record_at = tuple(int(n) for n in doc["record_at"]) if "record_at" in doc else None

        return cls(method=str(doc["method"]), seed=seed,
                   replicates=int(doc.get("replicates", 1)), stream=stream,
                   dataset_path=dataset_path, dataset_options=dataset_options,
                   K=int(doc["K"]) if "K" in doc else None, mu=mu,
                   epsilon=epsilon, censor=doc.get("censor"), tau_out=tau_out,
                   ratio=float(doc["ratio"]) if "ratio" in doc else None,
                   record_at=record_at, threads=int(doc.get("threads", 1)),
                   passes=int(doc.get("passes", 1)), raw=_deep_copy_json(doc))

    def to_dict(self) -> dict:
        """Config echo for summaries; the original document if one exists."""
        if self.raw is not None:
            return _deep_copy_json(self.raw)
        doc: dict = {"schema": 1, "method": self.method, "seed": self.seed,
                     "replicates": self.replicates, "threads": self.threads}
        if self.stream is not None:
            doc["stream"] = _stream_to_dict(self.stream)
        if self.dataset_path is not None:
            doc["dataset"] = {"path": self.dataset_path, **self.dataset_options}
        if self.K is not None:
            doc["K"] = self.K
        est: dict = {}
        if self.mu is not None:
            est["mu"] = {"policy": self.mu.policy, "value": self.mu.value}
        if self.epsilon is not None:
            est["epsilon"] = self.epsilon
        if self.tau_out is not None:
            est["tau_out"] = self.tau_out
        if est:
            doc["estimator"] = est
        if self.censor is not None:
            doc["censor"] = dict(self.censor)
        if self.ratio is not None:
            doc["ratio"] = self.ratio
        if self.record_at is not None:
            doc["record_at"] = list(self.record_at)
        if self.passes != 1:
            doc["passes"] = self.passes
        return doc


def _deep_copy_json(doc):
    return json.loads(json.dumps(doc))


def _stream_from_dict(sd: dict, default_seed: int) -> StreamSpec:
    if not isinstance(sd, dict):
        raise ConfigError("field 'stream' must be an object")
    for key in ("p", "D", "sigma"):
        if key not in sd:
            raise ConfigError(f"missing required field 'stream.{key}'")
    p = int(sd["p"])
    cov = None
    cov_doc = sd.get("cov")
    if cov_doc is not None:
        if isinstance(cov_doc, dict):
            kind = cov_doc.get("kind")
            if kind == "identity":
                cov = None
            elif kind == "toeplitz":
                for key in ("a", "r"):
                    if key not in cov_doc:
                        raise ConfigError(f"missing required field 'stream.cov.{key}'")
                cov = toeplitz_cov(p, float(cov_doc["a"]), float(cov_doc["r"]))
            elif kind == "explicit":
                cov = np.asarray(cov_doc.get("matrix"), dtype=np.float64)
            else:
                raise ConfigError(f"unknown stream.cov kind {kind!r}")
        else:
            cov = np.asarray(cov_doc, dtype=np.float64)
    outliers = sd.get("outliers") or {}
    if outliers and ("prob" not in outliers or "var" not in outliers):
        raise ConfigError("field 'stream.outliers' must carry 'prob' and 'var'")
    theta = sd.get("theta")
    try:
        return StreamSpec(
            p=p, D=int(sd["D"]), sigma=float(sd["sigma"]),
            seed=int(sd.get("seed", default_seed)),
            design=str(sd.get("design", "gaussian")),
            cov=cov, df=float(sd["df"]) if sd.get("df") is not None else None,
            theta=None if theta is None else np.asarray(theta, dtype=np.float64),
            outlier_prob=float(outliers.get("prob", 0.0)),
            outlier_var=float(outliers.get("var", 0.0)))
    except DomainError as exc:
        raise ConfigError(f"invalid 'stream' section: {exc}") from exc


def _stream_to_dict(spec: StreamSpec) -> dict:
    doc: dict = {"p": spec.p, "D": spec.D, "sigma": spec.sigma,
                 "seed": spec.seed, "design": spec.design}
    if spec.cov is not None:
        doc["cov"] = {"kind": "explicit", "matrix": spec.cov.tolist()}
    if spec.df is not None:
        doc["df"] = spec.df
    if spec.theta is not None:
        doc["theta"] = spec.theta.tolist()
    if spec.has_outliers:
        doc["outliers"] = {"prob": spec.outlier_prob, "var": spec.outlier_var}
    return doc


# ---------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrialTrace:
    """Metrics of one replicate, sampled on the recording schedule."""

    method: str
    seed: int
    n: np.ndarray
    mse: np.ndarray
    rse: np.ndarray
    censor_ratio: np.ndarray
    multiplies: np.ndarray
    kept_total: int
    final_theta: np.ndarray
    final_snapshot: dict | None = None

    @property
    def steps(self) -> int:
        return int(self.n[-1]) if self.n.size else 0


@lru_cache(maxsize=8)
def _dataset_arrays(path: str, options_key: tuple):
    options = dict(options_key)
    target = options.pop("target_column")
    ds = load_csv(path, target, **options)
    theta_o, sigma = surrogate_truth(ds)
    return ds.design, ds.response, theta_o, sigma


def _source_arrays(cfg: ExperimentConfig, replicate_seed: int):
    """(X, y, theta_o, sigma) for one replicate."""
    if cfg.dataset_path is not None:
        key = tuple(sorted(cfg.dataset_options.items()))
        X, y, theta_o, sigma = _dataset_arrays(cfg.dataset_path, key)
        if cfg.passes > 1:
            X = np.tile(X, (cfg.passes, 1))
            y = np.tile(y, cfg.passes)
        return X, y, theta_o, sigma
    inst = cfg.stream.pinned().with_seed(replicate_seed)
    X, y = materialize(inst)
    return X, y, inst.resolved_theta(), inst.sigma


def _stream_pairs(cfg: ExperimentConfig, replicate_seed: int):
    """(iterator of (y, x), total count, theta_o, sigma)."""
    if cfg.dataset_path is not None:
        X, y, theta_o, sigma = _source_arrays(cfg, replicate_seed)
        return zip(y, X), X.shape[0], theta_o, sigma
    inst = cfg.stream.pinned().with_seed(replicate_seed)
    return generate(inst), inst.D, inst.resolved_theta(), inst.sigma


def _resolve_mu(cfg: ExperimentConfig, sigma: float) -> StepSize:
    if cfg.mu is not None:
        return cfg.mu
    if cfg.method == "samle1":
        # The classic stochastic-approximation gain: mu_n = sigma^2/n
        # makes the uncensored update theta += (e/n) x.
        return StepSize.diminishing(sigma * sigma)
    if cfg.method in ("ac-lms", "rac-lms"):
        # Diminishing 2/(alpha n) when the design covariance is known.
        try:
            consts = prop_bounds(cfg)
        except ConfigError:
            raise ConfigError(f"field 'estimator.mu' is required for method "
                              f"{cfg.method!r} when the design covariance is unknown") from None
        return StepSize.diminishing(2.0 / consts["alpha"])
    raise ConfigError(f"field 'estimator.mu' is required for method {cfg.method!r}")


def _constant_tau(cfg: ExperimentConfig) -> float | None:
    if cfg.censor is not None and cfg.censor["kind"] == "constant":
        return float(cfg.censor["tau"])
    return None


def _ac_plan(cfg: ExperimentConfig, p: int) -> ThresholdPlan | None:
    kind = cfg.censor["kind"]
    if kind == "constant":
        return None
    pi = cfg.censor["target_pi"]
    if kind == "ac-online":
        return ThresholdPlan.ac_online(pi)
    return ThresholdPlan.ac_offline(p, pi)


def _nac_plan(cfg: ExperimentConfig, prelim) -> ThresholdPlan:
    kind = cfg.censor["kind"]
    if kind == "constant":
        return ThresholdPlan.constant(float(cfg.censor["tau"]))
    pi = cfg.censor["target_pi"]
    if kind == "nac-exact":
        return ThresholdPlan.nac_exact(prelim.gram_inv, pi)
    return ThresholdPlan.nac_clt(prelim.theta.shape[0], prelim.K, pi)


def run_trial(cfg: ExperimentConfig, replicate_seed: int) -> TrialTrace:
    """Execute one replicate of the config and return its trace."""
    if cfg.method in BATCH_METHODS:
        return _run_batch_trial(cfg, replicate_seed)
    if cfg.method == "kaczmarz":
        return _run_kaczmarz_trial(cfg, replicate_seed)
    return _run_stream_trial(cfg, replicate_seed)


def _trace(cfg, replicate_seed, marks, mses, ratios, mults, theta_o, kept,
           final_theta, snapshot=None) -> TrialTrace:
    norm2 = float(theta_o @ theta_o)
    mse = np.asarray(mses, dtype=np.float64)
    rse = mse / norm2 if norm2 > 0.0 else np.full_like(mse, np.nan)
    return TrialTrace(method=cfg.method, seed=int(replicate_seed),
                      n=np.asarray(marks, dtype=np.int64), mse=mse, rse=rse,
                      censor_ratio=np.asarray(ratios, dtype=np.float64),
                      multiplies=np.asarray(mults, dtype=np.int64),
                      kept_total=int(kept),
                      final_theta=np.array(final_theta, dtype=np.float64),
                      final_snapshot=snapshot)


def _schedule_for(cfg: ExperimentConfig, N: int) -> tuple[int, ...]:
    if N < 1:
        raise ConfigError("stream leaves no data to process after warm-up")
    if cfg.record_at is None:
        return geometric_schedule(N)
    if cfg.record_at[-1] > N:
        raise ConfigError(f"record_at step {cfg.record_at[-1]} exceeds the "
                          f"{N} available steps")
    return cfg.record_at


def _run_stream_trial(cfg: ExperimentConfig, replicate_seed: int) -> TrialTrace:
    pairs, total, theta_o, sigma = _stream_pairs(cfg, replicate_seed)
    method = cfg.method

    if method in NAC_METHODS or method in AC_METHODS:
        if sigma <= 0.0:
            raise ConfigError("censoring rules need a positive noise scale sigma")

    prelim = None
    if method in NAC_METHODS:
        warm = list(itertools.islice(pairs, cfg.K))
        if len(warm) < cfg.K:
            raise ConfigError(f"stream provides {len(warm)} data, fewer than K={cfg.K}")
        try:
            prelim = preliminary_fit(warm)
        except SingularityError as exc:
            raise SingularityError(f"preliminary fit on the first K={cfg.K} data "
                                   f"is rank deficient") from exc
        N = total - cfg.K
    else:
        N = total
    marks = _schedule_for(cfg, N)
    mark_set = set(marks)

    p = theta_o.shape[0]
    if method == "samle1":
        est = FirstOrderCensoredMLE(prelim, sigma, _resolve_mu(cfg, sigma))
    elif method == "samle2":
        est = SecondOrderCensoredMLE(prelim, sigma)
    elif method == "lms":
        est = LMS(p, _resolve_mu(cfg, sigma))
    elif method == "rls":
        est = RLS(p, epsilon=cfg.epsilon)
    elif method == "ac-lms":
        est = ACLMS(p, _resolve_mu(cfg, sigma), sigma, plan=_ac_plan(cfg, p))
    elif method == "rac-lms":
        est = RobustACLMS(p, _resolve_mu(cfg, sigma), sigma, cfg.tau_out,
                          plan=_ac_plan(cfg, p))
    elif method == "ac-rls":
        est = ACRLS(p, sigma, epsilon=cfg.epsilon, plan=_ac_plan(cfg, p))
    else:  # rac-rls
        est = RobustACRLS(p, sigma, cfg.tau_out, epsilon=cfg.epsilon,
                          plan=_ac_plan(cfg, p))

    fixed_tau = _constant_tau(cfg)
    nac_plan = _nac_plan(cfg, prelim) if method in NAC_METHODS else None
    anchor = prelim.theta if prelim is not None else None

    mses, ratios, mults, out_marks = [], [], [], []
    n = 0
    try:
        for y, x in pairs:
            n += 1
            if nac_plan is not None:
                tau_n = nac_plan.threshold(n, x=x)
                decision = nac_decide(float(y), float(x @ anchor), sigma, tau_n)
                est.step(decision, x, tau_n)
            elif method in AC_METHODS:
                _, decision = est.step(float(y), x, fixed_tau)
            else:
                est.step(float(y), x)
            if n in mark_set:
                err = est.theta - theta_o
                out_marks.append(n)
                mses.append(float(err @ err))
                ratios.append((n - est.kept_count) / n)
                mults.append(est.multiply_count)
            if n == N:
                break
    except SingularityError as exc:
        raise SingularityError(f"{method} broke down at step {n}: {exc}") from exc

    return _trace(cfg, replicate_seed, out_marks, mses, ratios, mults, theta_o,
                  est.kept_count, est.theta, est.snapshot())


def _run_kaczmarz_trial(cfg: ExperimentConfig, replicate_seed: int) -> TrialTrace:
    X, y, theta_o, _ = _source_arrays(cfg, replicate_seed)
    D, p = X.shape
    marks = _schedule_for(cfg, D)
    mark_set = set(marks)
    mses, mults, out_marks = [], [], []
    setup = D * p  # row-energy table

    def observe(k, theta):
        if k in mark_set:
            err = theta - theta_o
            out_marks.append(k)
            mses.append(float(err @ err))
            mults.append(setup + k * (2 * p + 1))

    final = kaczmarz_run(X, y, iters=D, seed=replicate_seed, callback=observe)
    ratios = [0.0] * len(out_marks)
    return _trace(cfg, replicate_seed, out_marks, mses, ratios, mults,
                  theta_o, D, final)


def _run_batch_trial(cfg: ExperimentConfig, replicate_seed: int) -> TrialTrace:
    X, y, theta_o, _ = _source_arrays(cfg, replicate_seed)
    D, p = X.shape
    d = max(p, int(round(cfg.ratio * D)))
    if cfg.method == "srht":
        rp = srht_reduce(X, y, d, replicate_seed)
        D_pad = 1 << (D - 1).bit_length()
        mult = D_pad * (p + 1) + d * p * p + p ** 3 // 3
    else:
        rp = uniform_reduce(X, y, d, replicate_seed)
        mult = d * p * p + p ** 3 // 3
    theta = solve_reduced(rp)
    err = theta - theta_o
    return _trace(cfg, replicate_seed, [d], [float(err @ err)],
                  [(D - d) / D], [mult], theta_o, d, theta)


# ---------------------------------------------------------------------
# Replication and aggregation
# ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    """Aggregated metrics across replicates of one config."""

    config: dict
    method: str
    n: np.ndarray
    mse_mean: np.ndarray
    mse_std: np.ndarray
    rse_mean: np.ndarray
    rse_std: np.ndarray
    censor_ratio_mean: np.ndarray
    multiplies_mean: np.ndarray
    traces: list
    bounds: dict | None

    def summary_doc(self) -> dict:
        doc = {
            "config": self.config,
            "replicates": len(self.traces),
            "aggregate": {
                "n": [int(v) for v in self.n],
                "mse_mean": [float(v) for v in self.mse_mean],
                "mse_std": [float(v) for v in self.mse_std],
                "rse_mean": [float(v) for v in self.rse_mean],
                "rse_std": [float(v) for v in self.rse_std],
                "censor_ratio_mean": [float(v) for v in self.censor_ratio_mean],
                "multiplies_mean": [float(v) for v in self.multiplies_mean],
            },
        }
        if self.bounds is not None:
            grid = [int(v) for v in self.n]
            doc["bounds"] = {
                "tau": self.bounds["tau"],
                "alpha": self.bounds["alpha"],
                "Delta": self.bounds["Delta"],
                "L2": self.bounds["L2"],
                "prop2_at": {str(n): self.bounds["prop2_bound"](n) for n in grid},
                "prop3_bracket_at": {str(n): list(self.bounds["prop3_bracket"](n))
                                     for n in grid},
            }
        return doc


def monte_carlo(cfg: ExperimentConfig) -> MonteCarloResult:
    """Run all replicates of cfg and aggregate their traces.

    Replicate r runs on derive(cfg.seed, r).  With cfg.threads > 1 the
    replicates run in a thread pool; aggregation order is by replicate
    index either way, so results are identical.
    """
    seeds = [derive(cfg.seed, r) for r in range(cfg.replicates)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            traces = list(pool.map(lambda s: run_trial(cfg, s), seeds))
    else:
        traces = [run_trial(cfg, s) for s in seeds]

    grid = traces[0].n
    for t in traces[1:]:
        if not np.array_equal(t.n, grid):
            raise ConfigError("replicates disagree on the recording grid")
    mse = np.stack([t.mse for t in traces])
    rse = np.stack([t.rse for t in traces])
    ratio = np.stack([t.censor_ratio for t in traces])
    mult = np.stack([t.multiplies for t in traces]).astype(np.float64)

    try:
        bounds = prop_bounds(cfg)
    except ConfigError:
        bounds = None

    return MonteCarloResult(
        config=cfg.to_dict(), method=cfg.method, n=grid.copy(),
        mse_mean=mse.mean(axis=0), mse_std=mse.std(axis=0),
        rse_mean=rse.mean(axis=0), rse_std=rse.std(axis=0),
        censor_ratio_mean=ratio.mean(axis=0),
        multiplies_mean=mult.mean(axis=0), traces=traces, bounds=bounds)


# ---------------------------------------------------------------------
# Theory bounds as oracles
# ---------------------------------------------------------------------


def _design_covariance(spec: StreamSpec) -> np.ndarray:
    if spec.design == "gaussian":
        return spec.design_cov()
    if spec.df is not None and spec.df > 2.0:
        return spec.design_cov() * (spec.df / (spec.df - 2.0))
    raise ConfigError("design covariance undefined for student-t with df <= 2")


def _bound_tau(cfg: ExperimentConfig) -> float:
    if cfg.censor is None:
        raise ConfigError("prop_bounds needs a censored config (a 'censor' section)")
    if cfg.censor["kind"] == "constant":
        return float(cfg.censor["tau"])
    # Threshold plans converge to the fixed-tau rule with this value.
    pi = float(cfg.censor["target_pi"])
    return gauss_q_inv((1.0 - pi) / 2.0) if pi > 0.0 else 0.0


def prop_bounds(cfg: ExperimentConfig) -> dict:
    """Closed-form performance bounds for a synthetic censored config.

    Returns the strong-convexity and gradient-noise constants together
    with three callables: prop1_bound(D, dist, xbar, betabar) for the
    anytime regret, prop2_bound(n) for the diminishing-step MSE, and
    prop3_bracket(n) (lower, upper) for the best achievable MSE under
    fixed-tau censoring.
    """
    if cfg.stream is None:
        raise ConfigError("prop_bounds needs a synthetic stream config")
    spec = cfg.stream
    R_x = _design_covariance(spec)
    tau = _bound_tau(cfg)
    sigma = spec.sigma
    eigs = np.linalg.eigvalsh(R_x)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= 0.0:
        raise ConfigError("design covariance must be positive definite")
    q_tau = float(gauss_q(tau))
    alpha = 2.0 * q_tau * lam_min
    L2 = lam_max * lam_max
    Delta = 2.0 * float(np.trace(R_x)) * sigma * sigma \
        * (1.0 - q_tau + tau * float(gauss_pdf(tau)))
    tr_inv = float(np.trace(np.linalg.inv(R_x)))
    theta_o = spec.pinned().resolved_theta()
    dist2_from_zero = float(theta_o @ theta_o)

    def prop1_bound(D: int, dist: float, xbar: float, betabar: float) -> float:
        return math.sqrt(2.0 * D) * dist * xbar * betabar

    def prop2_bound(n: int) -> float:
        if n < 1:
            raise DomainError("prop2_bound needs n >= 1")
        arg = 4.0 * L2 / (alpha * alpha)
        lead = math.inf if arg > 700.0 else math.exp(arg)
        return (lead / (n * n)) * (dist2_from_zero + Delta / L2) \
            + 8.0 * Delta * math.log(n) / (alpha * alpha * n)

    def prop3_bracket(n: int) -> tuple[float, float]:
        if n < 1:
            raise DomainError("prop3_bracket needs n >= 1")
        lo = tr_inv * sigma * sigma / n
        return lo, lo / (2.0 * q_tau)

    return {"tau": tau, "alpha": alpha, "Delta": Delta, "L2": L2,
            "trace_inv": tr_inv, "prop1_bound": prop1_bound,
            "prop2_bound": prop2_bound, "prop3_bracket": prop3_bracket}


# ---------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------


def write_results_csv(traces, path) -> Path:
    """Per-replicate rows, sorted by (method, seed, n); byte-stable."""
    rows = []
    for t in traces:
        for i in range(t.n.size):
            rows.append((t.method, int(t.seed), int(t.n[i]), float(t.mse[i]),
                         float(t.rse[i]), float(t.censor_ratio[i]),
                         int(t.multiplies[i])))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "seed", "n", "mse", "rse", "censor_ratio",
                         "multiplies"])
        for method, seed, n, mse, rse, ratio, mult in rows:
            writer.writerow([method, seed, n, repr(mse), repr(rse), repr(ratio),
                             mult])
    return path


def write_summary_json(result: MonteCarloResult, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(result.summary_doc(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_experiment(cfg: ExperimentConfig, out_dir, stem: str = "results") -> dict:
    """monte_carlo plus the standard pair of output files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = monte_carlo(cfg)
    csv_path = write_results_csv(result.traces, out_dir / f"{stem}.csv")
    json_path = write_summary_json(result, out_dir / f"{stem}.json")
    return {"result": result, "csv": csv_path, "json": json_path}

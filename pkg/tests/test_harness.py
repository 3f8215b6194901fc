"""Experiment runner: config validation, reproducibility, bounds, files."""

import json
import math

import numpy as np
import pytest

from cendre.datagen import StreamSpec
from cendre.errors import ConfigError, DomainError
from cendre.estimators import StepSize
from cendre.harness import (
    ExperimentConfig,
    geometric_schedule,
    monte_carlo,
    prop_bounds,
    run_experiment,
    run_trial,
    write_results_csv,
    write_summary_json,
)
from cendre.numkit import derive, substream

from oracles import pdf, quad_q


def _stream(**over):
    base = dict(p=4, D=400, sigma=1.0, seed=7)
    base.update(over)
    return StreamSpec(**base)


def _cfg(**over):
    base = dict(method="ac-rls", seed=7, stream=_stream(),
                censor={"kind": "constant", "tau": 1.0})
    base.update(over)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------
# schedules and config validation
# ---------------------------------------------------------------------

def test_geometric_schedule():
    assert geometric_schedule(1) == (1,)
    assert geometric_schedule(10) == (1, 2, 4, 8, 10)
    assert geometric_schedule(16) == (1, 2, 4, 8, 16)
    with pytest.raises(DomainError):
        geometric_schedule(0)


def test_config_field_validation():
    _cfg()  # baseline constructs
    cases = [
        dict(method="sgd"),
        dict(seed=-1),
        dict(replicates=0),
        dict(threads=0),
        dict(stream=None),                                    # no source at all
        dict(dataset_path="x.csv"),                           # two sources
        dict(passes=0),
        dict(passes=2),                                       # passes need a dataset
        dict(censor=None),                                    # AC method, censor required
        dict(censor={"kind": "nac-exact", "target_pi": 0.5}),
        dict(censor={"kind": "constant"}),
        dict(censor={"kind": "constant", "tau": -1.0}),
        dict(censor={"kind": "constant", "tau": math.inf}),
        dict(censor={"kind": "ac-offline"}),
        dict(censor={"kind": "ac-offline", "target_pi": 1.0}),
        dict(method="ac-lms", censor={"kind": "ac-online", "target_pi": 0.5}),
        dict(method="samle1"),                                # K missing
        dict(method="samle1", K=0),
        dict(method="samle2", K=50,
             censor={"kind": "ac-offline", "target_pi": 0.5}),
        dict(method="srht", censor=None),                     # ratio missing
        dict(method="srht", censor=None, ratio=0.0),
        dict(method="srht", censor=None, ratio=1.2),
        dict(method="rls", censor=None, record_at=()),
        dict(method="rls", censor=None, record_at=(0, 5)),
        dict(method="rac-rls"),                               # tau_out missing
        dict(method="rac-rls", tau_out=-2.0),
        dict(method="rac-rls", tau_out=3.0,
             censor={"kind": "constant", "tau": 3.0}),        # tau at the clip
        dict(method="rls"),                                   # censor on plain method
    ]
    for over in cases:
        with pytest.raises(ConfigError):
            _cfg(**over)


def test_config_record_at_normalized():
    cfg = _cfg(record_at=(8, 2, 2, 5))
    assert cfg.record_at == (2, 5, 8)


def test_config_accepts_valid_variants():
    _cfg(method="samle1", K=30, censor={"kind": "nac-clt", "target_pi": 0.4},
         mu=StepSize.diminishing(1.0))
    _cfg(method="samle2", K=30, censor={"kind": "nac-exact", "target_pi": 0.4})
    _cfg(method="rac-rls", tau_out=4.0,
         censor={"kind": "ac-online", "target_pi": 0.6})
    _cfg(method="rls", censor=None)
    _cfg(method="kaczmarz", censor=None)
    _cfg(method="uniform", censor=None, ratio=0.25)


# ---------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------

def _doc(**over):
    base = {
        "schema": 1,
        "method": "ac-rls",
        "seed": 11,
        "replicates": 2,
        "stream": {"p": 3, "D": 200, "sigma": 1.0},
        "censor": {"kind": "constant", "tau": 0.8},
    }
    base.update(over)
    return base


def test_from_dict_basic():
    cfg = ExperimentConfig.from_dict(_doc())
    assert cfg.method == "ac-rls"
    assert cfg.stream.p == 3 and cfg.stream.D == 200
    assert cfg.stream.seed == 11  # master seed flows into the stream
    assert cfg.to_dict() == _doc()  # raw echo


def test_from_dict_validation():
    bad_docs = [
        {},                                             # schema missing
        _doc(schema=2),
        _doc(extra_field=1),
        {k: v for k, v in _doc().items() if k != "method"},
        {k: v for k, v in _doc().items() if k != "seed"},
        _doc(stream={"p": 3, "D": 200}),                # sigma missing
        _doc(stream={"p": 3, "D": 200, "sigma": -1.0}),
        _doc(stream={"p": 3, "D": 200, "sigma": 1.0,
                     "cov": {"kind": "spiral"}}),
        _doc(stream={"p": 3, "D": 200, "sigma": 1.0,
                     "cov": {"kind": "toeplitz", "a": 1.0}}),
        _doc(stream={"p": 3, "D": 200, "sigma": 1.0,
                     "outliers": {"prob": 0.1}}),
        _doc(estimator={"mu": {"policy": "constant"}}),
        _doc(dataset={"path": "x.csv"}, stream=None),   # target_column missing
        _doc(dataset={"path": "x.csv", "target_column": "y",
                      "passes": 2}, stream=None),       # passes is a top-level field
    ]
    for doc in bad_docs:
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(doc)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(["not", "an", "object"])


def test_from_dict_cov_kinds():
    doc = _doc(stream={"p": 3, "D": 200, "sigma": 1.0,
                       "cov": {"kind": "toeplitz", "a": 2.0, "r": 0.5}})
    cfg = ExperimentConfig.from_dict(doc)
    assert cfg.stream.cov[0, 1] == pytest.approx(1.0)
    doc = _doc(stream={"p": 2, "D": 200, "sigma": 1.0,
                       "cov": {"kind": "explicit", "matrix": [[2.0, 0.0], [0.0, 2.0]]}})
    assert ExperimentConfig.from_dict(doc).stream.cov[0, 0] == 2.0
    doc = _doc(stream={"p": 2, "D": 200, "sigma": 1.0, "cov": {"kind": "identity"}})
    assert ExperimentConfig.from_dict(doc).stream.cov is None


def test_from_dict_estimator_block():
    doc = _doc(method="rac-rls",
               estimator={"mu": {"policy": "constant", "value": 0.1},
                          "epsilon": 0.5, "tau_out": 4.0})
    cfg = ExperimentConfig.from_dict(doc)
    assert cfg.mu == StepSize.constant(0.1)
    assert cfg.epsilon == 0.5 and cfg.tau_out == 4.0


def test_to_dict_without_raw():
    cfg = _cfg(record_at=(4, 2))
    doc = cfg.to_dict()
    assert doc["schema"] == 1
    assert doc["censor"] == {"kind": "constant", "tau": 1.0}
    assert doc["record_at"] == [2, 4]
    rebuilt = ExperimentConfig.from_dict(doc)
    assert rebuilt.method == cfg.method
    assert rebuilt.stream.D == cfg.stream.D


# ---------------------------------------------------------------------
# trial execution
# ---------------------------------------------------------------------

def test_run_trial_deterministic():
    cfg = _cfg()
    a = run_trial(cfg, 123)
    b = run_trial(cfg, 123)
    c = run_trial(cfg, 124)
    np.testing.assert_array_equal(a.final_theta, b.final_theta)
    np.testing.assert_array_equal(a.mse, b.mse)
    np.testing.assert_array_equal(a.multiplies, b.multiplies)
    assert not np.array_equal(a.final_theta, c.final_theta)


def test_trace_shape_and_schedule():
    cfg = _cfg(record_at=(10, 100, 400))
    t = run_trial(cfg, 5)
    np.testing.assert_array_equal(t.n, [10, 100, 400])
    assert t.mse.shape == t.rse.shape == t.censor_ratio.shape == (3,)
    assert t.steps == 400
    assert 0 < t.kept_total < 400
    # censor ratio at each mark is (n - kept_so_far) / n
    assert np.all((0 <= t.censor_ratio) & (t.censor_ratio < 1))
    assert t.rse[-1] == pytest.approx(t.mse[-1] / float(
        cfg.stream.pinned().resolved_theta() @ cfg.stream.pinned().resolved_theta()))


def test_default_schedule_is_geometric():
    t = run_trial(_cfg(), 5)
    np.testing.assert_array_equal(t.n, geometric_schedule(400))


def test_record_at_beyond_stream():
    with pytest.raises(ConfigError):
        run_trial(_cfg(record_at=(401,)), 5)


def test_nac_trial_consumes_warmup():
    cfg = _cfg(method="samle2", K=50,
               censor={"kind": "nac-clt", "target_pi": 0.3})
    t = run_trial(cfg, 9)
    # 400 data minus K = 50 warm-up leaves 350 recursion steps.
    assert t.steps == 350
    assert 0 < t.kept_total < 350


def test_nac_trial_needs_enough_data():
    cfg = _cfg(method="samle2", K=500,
               censor={"kind": "nac-clt", "target_pi": 0.3})
    with pytest.raises(ConfigError):
        run_trial(cfg, 9)


def test_lms_requires_mu():
    cfg = _cfg(method="lms", censor=None)
    with pytest.raises(ConfigError):
        run_trial(cfg, 1)


def test_samle1_default_gain():
    cfg = _cfg(method="samle1", K=50,
               censor={"kind": "constant", "tau": 0.5},
               stream=_stream(sigma=2.0))
    t = run_trial(cfg, 3)  # runs: default mu = diminishing sigma^2
    assert np.isfinite(t.mse).all()


def test_aclms_default_gain_needs_known_covariance():
    cfg = _cfg(method="ac-lms", censor={"kind": "constant", "tau": 0.5},
               stream=_stream(design="student-t", df=2.0))
    with pytest.raises(ConfigError):
        run_trial(cfg, 1)


def test_batch_trial_trace():
    cfg = _cfg(method="srht", censor=None, ratio=0.25,
               stream=_stream(D=512))
    t = run_trial(cfg, 21)
    d = 128
    np.testing.assert_array_equal(t.n, [d])
    assert t.kept_total == d
    assert t.censor_ratio[0] == pytest.approx((512 - d) / 512)
    p = 4
    assert t.multiplies[0] == 512 * (p + 1) + d * p * p + p**3 // 3


def test_kaczmarz_trial_trace():
    cfg = _cfg(method="kaczmarz", censor=None, stream=_stream(D=64))
    t = run_trial(cfg, 2)
    np.testing.assert_array_equal(t.n, geometric_schedule(64))
    p = 4
    np.testing.assert_array_equal(t.multiplies, [64 * p + k * (2 * p + 1) for k in t.n])
    assert np.all(t.censor_ratio == 0.0)
    np.testing.assert_array_equal(run_trial(cfg, 2).final_theta, t.final_theta)


def test_dataset_trial(tmp_path):
    rng = substream(77)
    X = rng.standard_normal((120, 3))
    theta = np.array([0.5, -1.0, 2.0])
    y = X @ theta + 0.2 * rng.standard_normal(120)
    lines = ["a,b,c,y"] + [
        ",".join(repr(float(v)) for v in (*r, t)) for r, t in zip(X, y)
    ]
    f = tmp_path / "d.csv"
    f.write_text("\n".join(lines) + "\n")
    cfg = ExperimentConfig.from_dict({
        "schema": 1, "method": "ac-rls", "seed": 3,
        "dataset": {"path": str(f), "target_column": "y"},
        "censor": {"kind": "constant", "tau": 0.5},
    })
    t = run_trial(cfg, 3)
    assert t.steps == 120
    # The surrogate truth is the full-data LSE, so the final fit of a
    # mild censor lands close to it.
    assert t.mse[-1] < 0.1


def test_multipass_dataset(tmp_path):
    rng = substream(78)
    X = rng.standard_normal((40, 2))
    y = X @ np.array([1.0, -1.0]) + 0.1 * rng.standard_normal(40)
    lines = ["a,b,y"] + [
        ",".join(repr(float(v)) for v in (*r, t)) for r, t in zip(X, y)
    ]
    f = tmp_path / "d.csv"
    f.write_text("\n".join(lines) + "\n")
    doc = {"schema": 1, "method": "ac-rls", "seed": 3, "passes": 3,
           "dataset": {"path": str(f), "target_column": "y"},
           "censor": {"kind": "constant", "tau": 0.5}}
    t = run_trial(ExperimentConfig.from_dict(doc), 3)
    assert t.steps == 120


# ---------------------------------------------------------------------
# Monte Carlo aggregation
# ---------------------------------------------------------------------

def test_monte_carlo_replicates_and_threads():
    cfg = _cfg(replicates=6)
    serial = monte_carlo(cfg)
    threaded = monte_carlo(_cfg(replicates=6, threads=4))
    assert len(serial.traces) == 6
    np.testing.assert_array_equal(serial.mse_mean, threaded.mse_mean)
    np.testing.assert_array_equal(serial.multiplies_mean, threaded.multiplies_mean)
    # replicate r runs on the derived child seed
    assert serial.traces[2].seed == derive(cfg.seed, 2)


def test_monte_carlo_shares_truth_across_replicates():
    cfg = _cfg(replicates=3)
    res = monte_carlo(cfg)
    theta_o = cfg.stream.pinned().resolved_theta()
    # All replicates see the same truth: their final fits all converge
    # to its neighborhood rather than to per-replicate truths.
    for t in res.traces:
        assert float(np.sum((t.final_theta - theta_o) ** 2)) < 0.5


def test_summary_doc_contents():
    res = monte_carlo(_cfg(replicates=2))
    doc = res.summary_doc()
    assert doc["replicates"] == 2
    agg = doc["aggregate"]
    assert len(agg["n"]) == len(agg["mse_mean"]) == len(agg["rse_mean"])
    assert "bounds" in doc  # synthetic censored config carries bounds
    json.dumps(doc)


# ---------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------

def test_prop_bounds_constants():
    cfg = _cfg(stream=_stream(p=3), censor={"kind": "constant", "tau": 1.0})
    b = prop_bounds(cfg)
    q1 = quad_q(1.0)
    assert b["tau"] == 1.0
    assert b["alpha"] == pytest.approx(2.0 * q1, rel=1e-9)
    assert b["L2"] == pytest.approx(1.0)
    assert b["Delta"] == pytest.approx(
        2.0 * 3 * (1.0 - q1 + 1.0 * pdf(1.0)), rel=1e-9)
    assert b["trace_inv"] == pytest.approx(3.0)


def test_prop_bounds_plan_tau():
    cfg = _cfg(censor={"kind": "ac-offline", "target_pi": 0.5})
    assert prop_bounds(cfg)["tau"] == pytest.approx(0.6744897501960817, rel=1e-10)
    cfg = _cfg(censor={"kind": "ac-offline", "target_pi": 0.0})
    assert prop_bounds(cfg)["tau"] == 0.0


def test_prop_bounds_bracket_and_curve():
    cfg = _cfg(stream=_stream(p=3, sigma=2.0))
    b = prop_bounds(cfg)
    lo, hi = b["prop3_bracket"](100)
    assert lo == pytest.approx(3 * 4.0 / 100)
    assert hi == pytest.approx(lo / (2.0 * quad_q(1.0)), rel=1e-9)
    assert b["prop2_bound"](200) < b["prop2_bound"](50)
    assert b["prop1_bound"](100, 2.0, 3.0, 4.0) == pytest.approx(
        math.sqrt(200.0) * 24.0)


def test_prop_bounds_student_t_scaling():
    plain = prop_bounds(_cfg(stream=_stream(p=3)))
    heavy = prop_bounds(_cfg(stream=_stream(p=3, design="student-t", df=6.0)))
    assert heavy["L2"] == pytest.approx(plain["L2"] * (6.0 / 4.0) ** 2)
    with pytest.raises(ConfigError):
        prop_bounds(_cfg(stream=_stream(p=3, design="student-t", df=2.0)))


def test_prop_bounds_requires_censored_synthetic():
    with pytest.raises(ConfigError):
        prop_bounds(_cfg(method="rls", censor=None))


# ---------------------------------------------------------------------
# result files
# ---------------------------------------------------------------------

def test_results_csv_stable_and_sorted(tmp_path):
    res = monte_carlo(_cfg(replicates=3))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results_csv(res.traces, a)
    write_results_csv(list(reversed(res.traces)), b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "method,seed,n,mse,rse,censor_ratio,multiplies"
    assert len(lines) == 1 + 3 * len(res.traces[0].n)


def test_summary_json_stable(tmp_path):
    res = monte_carlo(_cfg(replicates=2))
    a = write_summary_json(res, tmp_path / "a.json")
    b = write_summary_json(res, tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["config"]["method"] == "ac-rls"


def test_run_experiment_files(tmp_path):
    out = run_experiment(_cfg(replicates=2), tmp_path / "exp")
    assert out["csv"].exists() and out["json"].exists()
    assert out["result"].method == "ac-rls"

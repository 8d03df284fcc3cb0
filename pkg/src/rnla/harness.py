"""Experiment runner: seeded trials, aggregation, JSON reports, check suites.

One experiment = one problem instance + `trials` independent algorithm seeds
base_seed, base_seed+1, ...  Per-trial exceptions are recorded on the trial
(and count against the success rate), never abort the run.  Aggregation is a
deterministic fold in trial order, so a rerun with the same config produces a
byte-identical report except for wall-time fields.

Reports are serialized by a local writer that prints every float with 17
significant digits and fixed key order; stdlib json cannot control float
formatting.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .generators import gen_lsq_instance, gen_matrix
from .linalg import frobenius_norm, spectral_norm
from .lowrank import SketchRankError, rand_low_rank, structural_inequality_check
from .lsq import exact_least_squares, rand_least_squares
from .matio import read_matrix, read_vector
from .matmul import (enumerate_sketch_moments, entry_variance_bound,
                     expected_frobenius_error, rand_matrix_multiply)
from .sampling import (RNG_NAME, colnorm_probs, draw_plan, make_rng,
                       optimal_probs, rownorm_probs, uniform_probs)
from .srht import OpCounter, fwht, next_pow2, subsampled_fwht

__all__ = [
    "VERSION",
    "ExperimentConfig",
    "TrialReport",
    "AggregateReport",
    "run_experiment",
    "run_trials",
    "aggregate",
    "build_report",
    "dumps_report",
    "load_report",
    "write_report",
    "report_to_csv",
    "run_check_suite",
    "CHECK_SUITES",
]

VERSION = "0.1.0"

ALGORITHMS = ("matmul", "lsq", "lowrank", "check")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    instance: dict
    params: dict
    trials: int
    base_seed: int
    diagnostics: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class TrialReport:
    seed: int
    ok: bool = True
    error: str | None = None
    metrics: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    ops: dict = field(default_factory=dict)
    wall_time: float = 0.0


@dataclass
class AggregateReport:
    success_rate: float
    trials_ok: int
    trials_total: int
    metrics: dict            # name -> {mean, se, min, max}
    config: dict
    version: str = VERSION
    rng: str = RNG_NAME


def _config_echo(config: ExperimentConfig) -> dict:
    return {
        "algorithm": config.algorithm,
        "instance": dict(config.instance),
        "params": dict(config.params),
        "trials": config.trials,
        "base_seed": config.base_seed,
        "diagnostics": config.diagnostics,
    }


# ---------------------------------------------------------------- instances

def _resolve_instance(config: ExperimentConfig) -> dict:
    """Build the problem data once; trials reuse it with fresh seeds."""
    inst = config.instance
    fam = inst.get("family")
    iseed = int(inst.get("seed", config.base_seed))
    alg = config.algorithm
    if alg == "check":
        return {}
    if alg == "matmul":
        if fam == "file":
            A = read_matrix(inst["path"])
            B = read_matrix(inst["path_b"]) if "path_b" in inst else A.T.copy()
        else:
            m, n = int(inst["m"]), int(inst["n"])
            p = int(inst.get("p", m))
            A = gen_matrix(fam, m, n, iseed, sigma=inst.get("sigma"),
                           eta=float(inst.get("eta", 0.0)))
            B = gen_matrix("gaussian", n, p, iseed + 1)
        kind = config.params.get("probs", "optimal")
        probs = {
            "optimal": lambda: optimal_probs(A, B),
            "colnorm": lambda: colnorm_probs(A),
            "rownorm": lambda: rownorm_probs(B),
            "uniform": lambda: uniform_probs(A.shape[1]),
        }.get(kind)
        if probs is None:
            raise ValueError(f"unknown probability family {kind!r}")
        return {"A": A, "B": B, "probs": probs()}
    if alg == "lsq":
        if fam == "file":
            A = read_matrix(inst["path"])
            b = read_vector(inst["rhs"])
            x_star = None
        else:
            consistent = fam == "consistent_lsq"
            A, b, x_star = gen_lsq_instance(int(inst["m"]), int(inst["n"]),
                                            iseed, consistent=consistent)
        x_opt, Z = exact_least_squares(A, b)
        return {"A": A, "b": b, "x_star": x_star, "x_opt": x_opt, "Z": Z}
    if alg == "lowrank":
        if fam == "file":
            A = read_matrix(inst["path"])
        else:
            A = gen_matrix(fam, int(inst["m"]), int(inst["n"]), iseed,
                           sigma=inst.get("sigma"), eta=float(inst.get("eta", 0.0)))
        return {"A": A}
    raise ValueError(f"unknown algorithm {alg!r}")


# ------------------------------------------------------------------- trials

def _trial_matmul(ctx: dict, params: dict, seed: int, diagnostics: bool) -> TrialReport:
    A, B, probs = ctx["A"], ctx["B"], ctx["probs"]
    c = int(params["c"])
    sk = rand_matrix_multiply(A, B, c, probs, seed)
    E = A @ B - sk.C @ sk.R
    fro_sq = float(np.sum(E * E))
    bound = expected_frobenius_error(A, B, c, probs)
    t = TrialReport(seed=seed)
    t.metrics = {"fro_error_sq": fro_sq, "spectral_error": spectral_norm(E)}
    t.bounds = {"expected_fro_err_sq": bound}
    t.flags = {"success": fro_sq <= bound + 1e-12}
    return t


def _trial_lsq(ctx: dict, params: dict, seed: int, diagnostics: bool) -> TrialReport:
    A, b, Z, x_opt = ctx["A"], ctx["b"], ctx["Z"], ctx["x_opt"]
    eps = float(params["eps"])
    r = params.get("r")
    sol = rand_least_squares(A, b, eps, seed,
                             r_override=None if r is None else int(r),
                             diagnostics=diagnostics)
    bound = (1.0 + eps) * Z + 1e-8
    t = TrialReport(seed=seed)
    t.metrics = {
        "residual": sol.residual_norm,
        "forward_error": float(np.linalg.norm(sol.x_tilde - x_opt)),
    }
    t.bounds = {"residual_bound": bound, "Z": Z}
    t.flags = {"success": sol.residual_norm <= bound}
    if sol.diagnostics is not None:
        t.flags["cond22"] = sol.diagnostics.cond22_pass
        t.flags["cond23"] = sol.diagnostics.cond23_pass
        t.metrics["sigma_min_sq"] = sol.diagnostics.sigma_min_sq
        t.metrics["cross_term"] = sol.diagnostics.cross_term
    t.ops = {"adds_subs": sol.ops}
    return t


def _trial_lowrank(ctx: dict, params: dict, seed: int, diagnostics: bool) -> TrialReport:
    A = ctx["A"]
    k = int(params["k"])
    eps = float(params["eps"])
    c = params.get("c")
    c = int(c) if c is not None else None
    retried = False
    try:
        res = rand_low_rank(A, k, eps, seed, c_override=c, diagnostics=diagnostics)
    except SketchRankError:
        # One retry with doubled width before giving up on the trial.
        retried = True
        res = rand_low_rank(A, k, eps, seed,
                            c_override=2 * (c if c is not None else k),
                            diagnostics=diagnostics)
    bound = (1.0 + eps) * res.baseline_fro + 1e-8
    t = TrialReport(seed=seed)
    t.metrics = {"error_fro": res.error_fro, "baseline_fro": res.baseline_fro}
    if res.baseline_fro > 0.0:
        t.metrics["error_ratio"] = res.error_fro / res.baseline_fro
    t.bounds = {"error_bound": bound}
    t.flags = {"success": res.error_fro <= bound, "retried": retried}
    if res.diagnostics is not None:
        d = res.diagnostics
        norm_A = frobenius_norm(A)
        t.flags["identity_ok"] = d.identity_gap <= 1e-9 * max(1.0, norm_A)
        t.flags["split_ok"] = (res.error_fro ** 2
                               <= d.projected_tail_sq + d.tail_sq + 1e-8)
        t.metrics["identity_gap"] = d.identity_gap
    return t


_TRIAL_RUNNERS = {
    "matmul": _trial_matmul,
    "lsq": _trial_lsq,
    "lowrank": _trial_lowrank,
}


def run_trials(config: ExperimentConfig) -> list[TrialReport]:
    """Execute all trials; per-trial exceptions become failed TrialReports."""
    ctx = _resolve_instance(config)
    out = []
    for i in range(config.trials):
        seed = config.base_seed + i
        start = time.perf_counter()
        try:
            if config.algorithm == "check":
                t = run_check_suite(config.params["suite"], config.params, seed)
                t.seed = seed
            else:
                t = _TRIAL_RUNNERS[config.algorithm](ctx, config.params, seed,
                                                     config.diagnostics)
        except Exception as e:  # noqa: BLE001 - trial failures are data
            t = TrialReport(seed=seed, ok=False, error=f"{type(e).__name__}: {e}",
                            flags={"success": False})
        t.wall_time = time.perf_counter() - start
        out.append(t)
    return out


def aggregate(config: ExperimentConfig, trials: list[TrialReport]) -> AggregateReport:
    """Deterministic fold over trials in index order."""
    succ = sum(1 for t in trials if t.ok and t.flags.get("success", False))
    ok_trials = [t for t in trials if t.ok]
    names = sorted({k for t in ok_trials for k in t.metrics})
    stats = {}
    for name in names:
        vals = [t.metrics[name] for t in ok_trials if name in t.metrics]
        n = len(vals)
        mean = sum(vals) / n
        if n >= 2:
            var = sum((v - mean) ** 2 for v in vals) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = 0.0
        stats[name] = {"mean": mean, "se": se, "min": min(vals), "max": max(vals)}
    return AggregateReport(
        success_rate=succ / len(trials),
        trials_ok=len(ok_trials),
        trials_total=len(trials),
        metrics=stats,
        config=_config_echo(config),
    )


def run_experiment(config: ExperimentConfig) -> AggregateReport:
    return aggregate(config, run_trials(config))


# ------------------------------------------------------------- check suites

def _check_srht(params: dict, seed: int) -> TrialReport:
    """Subsampled transform equals the full transform and respects op counts."""
    n = next_pow2(int(params.get("n", 1024)))
    r = int(params.get("r", 8))
    x = make_rng(seed).standard_normal(n)
    plan = draw_plan(uniform_probs(n), r, seed)
    counter = OpCounter()
    sub = subsampled_fwht(x, plan, counter)
    full = fwht(x)
    gap = float(np.max(np.abs(sub - full[plan.indices - 1] * plan.scales)))
    bound = 2.0 * n * math.log2(r + 1)
    t = TrialReport(seed=seed)
    t.metrics = {"max_gap": gap}
    t.ops = {"adds_subs": counter.adds_subs}
    t.bounds = {"ops_bound": bound, "gap_tol": 1e-12 * max(1.0, float(np.linalg.norm(x)))}
    t.flags = {"success": gap <= t.bounds["gap_tol"] and counter.adds_subs <= bound}
    return t


def _check_matmul(params: dict, seed: int) -> TrialReport:
    """Exact enumeration: unbiased mean, variance and error below their bounds."""
    n = int(params.get("n", 3))
    c = int(params.get("c", 2))
    rng = make_rng(seed)
    A = rng.standard_normal((3, n))
    B = rng.standard_normal((n, 2))
    probs = optimal_probs(A, B)
    mom = enumerate_sketch_moments(A, B, c, probs)
    exact = A @ B
    mean_gap = float(np.max(np.abs(mom.mean - exact)))
    var_excess = max(
        float(mom.variance[i, j]) - entry_variance_bound(A, B, probs, c, i, j)
        for i in range(A.shape[0]) for j in range(B.shape[1]))
    err_excess = mom.expected_fro_err_sq - expected_frobenius_error(A, B, c, probs)
    t = TrialReport(seed=seed)
    t.metrics = {"mean_gap": mean_gap, "var_excess": var_excess,
                 "err_excess": err_excess}
    t.flags = {"success": mean_gap <= 1e-12 * max(1.0, float(np.max(np.abs(exact))))
               and var_excess <= 1e-12 and err_excess <= 1e-12}
    return t


def _check_lsq(params: dict, seed: int) -> TrialReport:
    """One randomized solve obeys the one-sided and conditional guarantees."""
    n = int(params.get("n", 1024))
    d = int(params.get("d", 5))
    eps = float(params.get("eps", 0.5))
    r = int(params.get("r", 200))
    A, b, _ = gen_lsq_instance(n, d, seed, consistent=False)
    _, Z = exact_least_squares(A, b)
    sol = rand_least_squares(A, b, eps, seed + 1, r_override=r)
    rep = sol.diagnostics
    one_sided = sol.residual_norm >= Z - 1e-10
    conditional = (not (rep.cond22_pass and rep.cond23_pass)
                   or sol.residual_norm <= math.sqrt(1.0 + eps) * Z + 1e-8)
    t = TrialReport(seed=seed)
    t.metrics = {"residual": sol.residual_norm}
    t.bounds = {"Z": Z, "conditional_bound": math.sqrt(1.0 + eps) * Z + 1e-8}
    t.flags = {"success": one_sided and conditional,
               "cond22": rep.cond22_pass, "cond23": rep.cond23_pass}
    return t


def _check_lowrank(params: dict, seed: int) -> TrialReport:
    """Extraction identity, error split, and the structural inequality."""
    m = int(params.get("m", 24))
    n = int(params.get("n", 16))
    k = int(params.get("k", 3))
    c = int(params.get("c", 8))
    sigma = [1.0] * k + [0.05] * (min(m, n) - k)
    A = gen_matrix("lowrank_plus_noise", m, n, seed, sigma=sigma)
    try:
        res = rand_low_rank(A, k, 0.4, seed, c_override=c, diagnostics=True)
    except SketchRankError:
        res = rand_low_rank(A, k, 0.4, seed, c_override=2 * c, diagnostics=True)
    d = res.diagnostics
    identity_ok = d.identity_gap <= 1e-9 * max(1.0, frobenius_norm(A))
    split_ok = res.error_fro ** 2 <= d.projected_tail_sq + d.tail_sq + 1e-8
    Zmat = make_rng(seed + 1).standard_normal((n, c))
    lhs, rhs = structural_inequality_check(A, Zmat, k)
    t = TrialReport(seed=seed)
    t.metrics = {"identity_gap": d.identity_gap, "error_fro": res.error_fro,
                 "structural_lhs": lhs, "structural_rhs": rhs}
    t.flags = {"success": identity_ok and split_ok and lhs <= rhs + 1e-9,
               "identity_ok": identity_ok, "split_ok": split_ok}
    return t


CHECK_SUITES = {
    "srht": _check_srht,
    "matmul": _check_matmul,
    "lsq": _check_lsq,
    "lowrank": _check_lowrank,
}


def run_check_suite(suite: str, params: dict, seed: int) -> TrialReport:
    fn = CHECK_SUITES.get(suite)
    if fn is None:
        raise ValueError(f"unknown check suite {suite!r}; "
                         f"choose from {sorted(CHECK_SUITES)}")
    return fn(params, seed)


# ------------------------------------------------------------------ reports

def build_report(config: ExperimentConfig, trials: list[TrialReport],
                 agg: AggregateReport, total_wall_time: float = 0.0) -> dict:
    return {
        "config": _config_echo(config),
        "trials": [
            {
                "seed": t.seed,
                "ok": t.ok,
                "error": t.error,
                "metrics": dict(t.metrics),
                "bounds": dict(t.bounds),
                "flags": dict(t.flags),
                "ops": dict(t.ops),
                "wall_time": t.wall_time,
            }
            for t in trials
        ],
        "aggregate": {
            "success_rate": agg.success_rate,
            "trials_ok": agg.trials_ok,
            "trials_total": agg.trials_total,
            "metrics": {k: dict(v) for k, v in agg.metrics.items()},
        },
        "meta": {"rng": agg.rng, "version": agg.version,
                 "wall_time": total_wall_time},
    }


def _write_json(obj, out: list, level: int) -> None:
    pad = "  " * level
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + "  " + json.dumps(str(k)) + ": ")
            _write_json(v, out, level + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _write_json(v, out, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("reports must contain finite numbers only")
        out.append(format(x, ".17g"))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _write_json(obj.tolist(), out, level)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """Serialize with 17-significant-digit floats and stable key order."""
    out: list[str] = []
    _write_json(report, out, 0)
    out.append("\n")
    return "".join(out)


def write_report(path, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_report(report))


_TOP_KEYS = {"config", "trials", "aggregate", "meta"}
_META_KEYS = {"rng", "version", "wall_time"}
_TRIAL_KEYS = {"seed", "ok", "error", "metrics", "bounds", "flags", "ops",
               "wall_time"}


def load_report(path) -> dict:
    """Read a report back, rejecting unknown schema fields."""
    with open(path, "r") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: report must be a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ValueError(f"{path}: unknown report fields {sorted(extra)}")
    missing = _TOP_KEYS - set(data)
    if missing:
        raise ValueError(f"{path}: missing report fields {sorted(missing)}")
    extra = set(data["meta"]) - _META_KEYS
    if extra:
        raise ValueError(f"{path}: unknown meta fields {sorted(extra)}")
    if "version" not in data["meta"]:
        raise ValueError(f"{path}: meta.version missing")
    for i, t in enumerate(data["trials"]):
        extra = set(t) - _TRIAL_KEYS
        if extra:
            raise ValueError(f"{path}: trial {i}: unknown fields {sorted(extra)}")
    return data


def report_to_csv(report: dict) -> str:
    """Flatten the aggregate block only: one row per metric plus the rate."""
    lines = ["metric,mean,se,min,max"]
    agg = report["aggregate"]
    for name, s in agg["metrics"].items():
        lines.append(f"{name},{s['mean']:.17g},{s['se']:.17g},"
                     f"{s['min']:.17g},{s['max']:.17g}")
    lines.append(f"success_rate,{agg['success_rate']:.17g},,,")
    return "\n".join(lines) + "\n"

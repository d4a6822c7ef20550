"""Named experiments, their configuration schema, and result serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis as A
from ._util import floor_tol, power
from .events import (
    block_connection_events,
    boundary_arcs,
    coarse_block,
    cylinder_check_args,
    cylinder_distance,
    detect_W,
)
from .queueing import fixedpoint_stats
from .suite import CHECKS, check_queue_identity_instance, run_check
from .weights import MASK64, Seed, WeightField, derive_seed


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


class ReplicaError(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"replica with seed {seed} failed: {type(cause).__name__}: {cause}")
        self.seed = seed


# ---------------------------------------------------------------- schema


def _scalar(kind, text):
    if kind == "int":
        v = float(text) if isinstance(text, str) else text
        if int(v) != v:
            raise ValueError("not an integer")
        return int(v)
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    raise AssertionError(kind)


def _convert(kind: str, value):
    if kind in ("ints", "floats"):
        items = value.split(",") if isinstance(value, str) else list(np.atleast_1d(value))
        items = [x.strip() if isinstance(x, str) else x for x in items]
        if not items or any(x == "" for x in items):
            raise ValueError("empty list")
        return [_scalar(kind[:-1], x) for x in items]
    return _scalar(kind, value)


def _fmt(v) -> str:
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class Param:
    kind: str
    default: object
    help: str


SCHEMAS: dict[str, dict[str, Param]] = {
    "w-event": {
        "sizes": Param("ints", [32, 64, 128], "box half-widths N"),
        "epsilon": Param("float", 0.25, "arc cut-off fraction"),
        "replicas": Param("int", 2000, "replicas per size"),
    },
    "exit-exponent": {
        "rho": Param("float", 0.5, "stationary density"),
        "sizes": Param("ints", [64, 128, 256, 512], "sizes N, targets floor(N xi(rho))"),
        "replicas": Param("int", 2000, "replicas per size"),
        "t": Param("floats", list(A.DEFAULT_T_GRID), "tail thresholds in units of N^(2/3)"),
    },
    "variance-check": {
        "rho": Param("float", 0.5, "stationary density"),
        "m": Param("int", 25, "target e1 coordinate"),
        "n": Param("int", 25, "target e2 coordinate"),
        "replicas": Param("int", 100_000, "replicas"),
    },
    "queue-fixedpoint": {
        "alpha": Param("float", 0.5, "arrival rate"),
        "sigma": Param("float", 1.0, "service rate"),
        "n": Param("int", 100_000, "number of outputs"),
    },
    "queue-identity": {
        "replicas": Param("int", 1000, "random instances"),
        "window": Param("int", 20, "sequence window length"),
    },
    "cylinder": {
        "N": Param("int", 256, "scale; target floor(N xi)"),
        "xi1": Param("float", 0.5, "direction (xi1, 1 - xi1)"),
        "i": Param("int", -1, "column; -1 means floor(N xi1 / 2)"),
        "r": Param("floats", [1.0, 2.0, 4.0, 8.0], "cylinder half-widths in units of N^(2/3)"),
        "epsilon": Param("float", 0.25, "direction margin"),
        "delta": Param("float", 0.25, "column margin"),
        "replicas": Param("int", 10_000, "replicas"),
    },
    "block-connection": {
        "N": Param("int", 64, "box half-width"),
        "epsilon": Param("float", 0.25, "arc cut-off fraction"),
        "o": Param("ints", [-64, -64], "block centre on the south-west arc; default the corner (-N, -N)"),
        "d1": Param("float", 1.0, "block size factor"),
        "d2": Param("float", -1.0, "mirror block size factor; -1 means N^(1/8)"),
        "replicas": Param("int", 1000, "replicas"),
    },
    "rw-exact": {
        "alpha": Param("float", 2.0, "rate of the positive step part"),
        "beta": Param("float", 1.0, "rate of the negative step part"),
        "n": Param("ints", [3], "first-passage times"),
        "mc_replicas": Param("int", 0, "optional Monte Carlo replicas (0 to skip)"),
    },
    "no-axis": {
        "eta": Param("floats", [0.6, 0.75, 0.9], "increasing first coordinates of the directions"),
        "n_min": Param("int", 1, "smallest n in the supremum"),
        "n_max": Param("int", 512, "largest n in the supremum"),
        "replicas": Param("int", 500, "replicas"),
    },
    "property-suite": {
        "instances": Param("int", 10_000, "instances per identity"),
    },
}

DESCRIPTIONS = {
    "w-event": "probability that a geodesic between the boundary arcs visits the origin",
    "exit-exponent": "scaling of stationary exit points along the characteristic ray",
    "variance-check": "both sides of the stationary variance identity",
    "queue-fixedpoint": "output statistics of the stationary exponential queue",
    "queue-identity": "the two-queue departure identity on random sequences",
    "cylinder": "probability that a geodesic misses a cylinder around its ray",
    "block-connection": "edge use by geodesics from a boundary block to near and far targets",
    "rw-exact": "first-passage probability of the exponential-difference walk",
    "no-axis": "divergence of G(0, w) - G(e2, w) along directions approaching e1",
    "property-suite": "randomized deterministic identities",
}


def _positive(key, v, minimum=1):
    if v < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {v}")


def _open_unit(key, v):
    if not 0 < v < 1:
        raise ConfigError(key, f"must lie in (0, 1), got {v}")


def _increasing(key, vals):
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(key, "must be strictly increasing")


def _validate(name: str, p: dict):
    if "replicas" in p:
        _positive("replicas", p["replicas"])
    if name == "w-event":
        _increasing("sizes", p["sizes"])
        _open_unit("epsilon", p["epsilon"])
        for N in p["sizes"]:
            if floor_tol(p["epsilon"] * N) < 1:
                raise ConfigError("sizes", f"epsilon * N < 1 at N={N}")
    elif name == "exit-exponent":
        _open_unit("rho", p["rho"])
        if len(p["sizes"]) < 3:
            raise ConfigError("sizes", "need at least 3 sizes")
        _increasing("sizes", p["sizes"])
        _positive("sizes", min(p["sizes"]), 4)
        _increasing("t", p["t"])
        if p["t"][0] <= 0:
            raise ConfigError("t", "thresholds must be positive")
    elif name == "variance-check":
        _open_unit("rho", p["rho"])
        _positive("m", p["m"])
        _positive("n", p["n"])
        _positive("replicas", p["replicas"], 2)
    elif name == "queue-fixedpoint":
        if not p["sigma"] > p["alpha"] > 0:
            raise ConfigError("alpha", "need 0 < alpha < sigma")
        _positive("n", p["n"], 10)
    elif name == "queue-identity":
        _positive("window", p["window"], 2)
    elif name == "cylinder":
        _positive("N", p["N"], 2)
        if not p["i"] >= 0:
            p["i"] = floor_tol(p["N"] * p["xi1"] / 2)
        try:
            cylinder_check_args(p["xi1"], p["N"], p["i"], p["epsilon"], p["delta"])
        except ValueError as e:
            raise ConfigError("i" if str(e).startswith("column") else "xi1", str(e)) from None
        _increasing("r", p["r"])
        if p["r"][0] <= 0:
            raise ConfigError("r", "radii must be positive")
    elif name == "block-connection":
        _open_unit("epsilon", p["epsilon"])
        _positive("replicas", p["replicas"], 100)
        if p["d2"] < 0:
            p["d2"] = power(p["N"], 1.0 / 8.0)
        if len(p["o"]) != 2:
            raise ConfigError("o", "needs two coordinates")
        if p["d1"] <= 0 or p["d2"] <= 0:
            raise ConfigError("d1", "block sizes must be positive")
        try:
            coarse_block(tuple(p["o"]), (p["d1"], p["d2"]), p["N"], p["epsilon"])
        except ValueError as e:
            raise ConfigError("o", str(e)) from None
    elif name == "rw-exact":
        if not p["alpha"] > p["beta"] > 0:
            raise ConfigError("alpha", "need alpha > beta > 0")
        if min(p["n"]) < 1:
            raise ConfigError("n", "must be positive")
        _positive("mc_replicas", p["mc_replicas"], 0)
    elif name == "no-axis":
        if any(not 0 < e < 1 for e in p["eta"]):
            raise ConfigError("eta", "values must lie in (0, 1)")
        _increasing("eta", p["eta"])
        _positive("n_min", p["n_min"])
        if p["n_max"] < p["n_min"]:
            raise ConfigError("n_max", "must be >= n_min")
    elif name == "property-suite":
        _positive("instances", p["instances"])


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    threads: int = 1

    def to_text(self) -> str:
        lines = [f"experiment = {self.experiment}", f"seed = {self.seed}", f"threads = {self.threads}"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.params.items()]
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "threads": self.threads, "params": dict(self.params)}


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        out[key] = value
    return out


def resolve_config(raw: dict) -> ExperimentConfig:
    """Validate a flat mapping (strings or values) into a config with every parameter set."""
    raw = dict(raw)
    name = raw.pop("experiment", None)
    if name is None:
        raise ConfigError("experiment", "missing")
    if name not in SCHEMAS:
        raise ConfigError("experiment", f"unknown experiment {name!r}; choose from {', '.join(SCHEMAS)}")
    seed = raw.pop("seed", 0)
    threads = raw.pop("threads", 1)
    try:
        seed = _scalar("int", seed)
    except (TypeError, ValueError):
        raise ConfigError("seed", f"not an integer: {seed!r}") from None
    if not 0 <= seed <= MASK64:
        raise ConfigError("seed", "must fit in an unsigned 64-bit integer")
    try:
        threads = _scalar("int", threads)
    except (TypeError, ValueError):
        raise ConfigError("threads", f"not an integer: {threads!r}") from None
    _positive("threads", threads)
    schema = SCHEMAS[name]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(unknown[0], f"not a parameter of {name}; known: {', '.join(schema)}")
    params = {}
    for key, spec in schema.items():
        value = raw.get(key, spec.default)
        try:
            params[key] = _convert(spec.kind, value)
        except (TypeError, ValueError) as e:
            raise ConfigError(key, f"cannot read {value!r} as {spec.kind}: {e}") from None
    if name == "block-connection" and "o" not in raw:
        params["o"] = [-params["N"], -params["N"]]
    _validate(name, params)
    return ExperimentConfig(name, params, seed, threads)


def load_config(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from None
    return parse_config_text(text)


# ---------------------------------------------------------------- results


@dataclass
class ExperimentResult:
    columns: list[str]
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    ok: bool = True
    replica_columns: list[str] = field(default_factory=list)
    replica_rows: list[dict] = field(default_factory=list)


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(result: ExperimentResult, replicas: bool = False) -> str:
    """The result table, or with ``replicas=True`` the per-replica table."""
    columns, rows = (result.replica_columns, result.replica_rows) if replicas else (result.columns, result.rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_result(cfg: ExperimentConfig, result: ExperimentResult, out_dir) -> tuple[Path, Path]:
    """Write <experiment>.csv, <experiment>.json and, if present, <experiment>-replicas.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.experiment}.csv"
    json_path = out / f"{cfg.experiment}.json"
    csv_path.write_text(csv_text(result))
    if result.replica_columns:
        (out / f"{cfg.experiment}-replicas.csv").write_text(csv_text(result, replicas=True))
    doc = {"experiment": cfg.experiment, "config": cfg.as_dict(), "ok": result.ok, "summary": result.summary}
    json_path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


# ---------------------------------------------------------------- runners


def _per_replica(fn, width: int = 0, dtype=float):
    """Chunk kernel applying ``fn(seed)`` to each replica seed, tagging failures with the seed."""

    def kernel(seeds):
        out = np.empty((len(seeds), width) if width else len(seeds), dtype=dtype)
        for k, s in enumerate(seeds):
            u = int(s) & MASK64
            try:
                out[k] = fn(u)
            except Exception as e:  # noqa: BLE001 - reported with the seed
                raise ReplicaError(u, e) from e
        return out

    return kernel


def _bernoulli_row(base: dict, x) -> dict:
    s = A.summarize(np.asarray(x, dtype=float))
    return {**base, "estimate": s.mean, "se": s.se, "n": s.n, "ci_lo": s.ci95[0], "ci_hi": s.ci95[1]}


def _w_event_record(N, eps, arcs):
    def fn(seed):
        res = detect_W(WeightField(Seed(seed)), N, eps, arcs)
        if not res.occurred:
            return (0, 0, 0, 0, 0)
        return (1, *res.witness_u, *res.witness_v)

    return fn


def run_w_event(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    eps = p["epsilon"]
    rows, lines, per = [], [], []
    for N in p["sizes"]:
        arcs = boundary_arcs(N, eps)
        seeds = A.replica_seeds(derive_seed(cfg.seed, N, salt=0x57), p["replicas"])
        rec = A.map_replicas(_per_replica(_w_event_record(N, eps, arcs), width=5, dtype=np.int64), seeds, cfg.threads)
        occ = rec[:, 0]
        row = _bernoulli_row({"experiment": cfg.experiment, "quantity": "P(W)", "N": N, "epsilon": eps}, occ)
        rows.append(row)
        lines.append(f"N={N}: P(W) = {row['estimate']:.4f} +/- {row['se']:.4f}")
        for s, r in zip(seeds, rec):
            hit = bool(r[0])
            per.append({
                "N": N, "epsilon": eps, "seed": int(s) & MASK64, "event": "W", "indicator": hit,
                "witness_u": f"{r[1]} {r[2]}" if hit else None, "witness_v": f"{r[3]} {r[4]}" if hit else None,
            })
    probs = [r["estimate"] for r in rows]
    nonincreasing = all(
        b["ci_lo"] <= a["ci_hi"] for a, b in zip(rows, rows[1:])
    )
    summary = {"probabilities": probs, "non_increasing_within_ci": nonincreasing}
    cols = ["experiment", "quantity", "N", "epsilon", "estimate", "se", "n", "ci_lo", "ci_hi"]
    per_cols = ["N", "epsilon", "seed", "event", "indicator", "witness_u", "witness_v"]
    return ExperimentResult(cols, rows, summary, lines, replica_columns=per_cols, replica_rows=per)


def run_exit_exponent(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    res = A.exit_exponent_experiment(p["rho"], p["sizes"], p["replicas"], cfg.seed, p["t"], cfg.threads)
    rows = []
    for N, s in zip(res.sizes, res.mean_abs):
        rows.append({"experiment": cfg.experiment, "quantity": "mean_abs_z", "N": N, "t": None,
                     "estimate": s.mean, "se": s.se, "n": s.n})
    for N in res.sizes:
        for t, q in zip(res.t_grid, res.tail[N]):
            rows.append({"experiment": cfg.experiment, "quantity": "tail", "N": N, "t": t, "estimate": q,
                         "se": math.sqrt(q * (1 - q) / p["replicas"]), "n": p["replicas"]})
    tails = {}
    for N in res.sizes:
        f = res.tail_fit(N)
        tails[str(N)] = None if f is None else {"slope": f.slope, "r_squared": f.r_squared}
    summary = {
        "slope": res.fit.slope,
        "intercept": res.fit.intercept,
        "r_squared": res.fit.r_squared,
        "tail_fits": tails,
        "tail_non_increasing": {str(N): bool(np.all(np.diff(res.tail[N]) <= 0)) for N in res.sizes},
    }
    lines = [f"N={N}: E|Z| = {s.mean:.3f} +/- {s.se:.3f}" for N, s in zip(res.sizes, res.mean_abs)]
    lines.append(f"log-log slope of E|Z| = {res.fit.slope:.4f} (r^2 = {res.fit.r_squared:.4f})")
    return ExperimentResult(["experiment", "quantity", "N", "t", "estimate", "se", "n"], rows, summary, lines)


def run_variance_check(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    v = A.variance_formula_check(p["rho"], p["m"], p["n"], p["replicas"], cfg.seed, cfg.threads)
    base = {"experiment": cfg.experiment, "rho": v.rho, "m": v.m, "n_target": v.n, "n": v.replicas}
    rows = [
        {**base, "quantity": "lhs", "estimate": v.lhs, "se": v.se_lhs},
        {**base, "quantity": "rhs", "estimate": v.rhs, "se": v.se_rhs},
        {**base, "quantity": "lhs-rhs", "estimate": v.lhs - v.rhs, "se": v.se_diff},
    ]
    summary = {"lhs": v.lhs, "rhs": v.rhs, "se_diff": v.se_diff, "z": v.z_score, "agree": abs(v.z_score) < 4}
    lines = [f"Var G = {v.lhs:.5f} +/- {v.se_lhs:.5f}; formula = {v.rhs:.5f} +/- {v.se_rhs:.5f}; "
             f"difference z = {v.z_score:.3f}"]
    cols = ["experiment", "quantity", "rho", "m", "n_target", "estimate", "se", "n"]
    return ExperimentResult(cols, rows, summary, lines)


def run_queue_fixedpoint(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    try:
        st = fixedpoint_stats(p["alpha"], p["sigma"], p["n"], Seed(cfg.seed))
    except Exception as e:  # noqa: BLE001
        raise ReplicaError(cfg.seed, e) from e
    targets = st.targets()
    base = {"experiment": cfg.experiment, "alpha": st.alpha, "sigma": st.sigma, "n": st.n}
    rows = [
        {**base, "quantity": "mean_departure", "estimate": st.mean_departure, "se": st.se_departure,
         "target": targets["mean_departure"]},
        {**base, "quantity": "mean_sojourn", "estimate": st.mean_sojourn, "se": st.se_sojourn,
         "target": targets["mean_sojourn"]},
        {**base, "quantity": "mean_dual", "estimate": st.mean_dual, "se": st.se_dual,
         "target": targets["mean_dual"]},
    ]
    for lag, r in enumerate(st.autocorr, 1):
        rows.append({**base, "quantity": f"autocorr_lag{lag}", "estimate": r, "se": st.se_autocorr, "target": 0.0})
    z = {r["quantity"]: (r["estimate"] - r["target"]) / r["se"] for r in rows}
    summary = {"z_scores": z, "within_4se": all(abs(x) < 4 for x in z.values())}
    lines = [f"{r['quantity']}: {r['estimate']:.5f} +/- {r['se']:.5f} (target {r['target']:g})" for r in rows]
    cols = ["experiment", "quantity", "alpha", "sigma", "estimate", "se", "target", "n"]
    return ExperimentResult(cols, rows, summary, lines)


def run_queue_identity(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    seeds = A.replica_seeds(cfg.seed, p["replicas"])
    window = p["window"]
    holds = A.map_replicas(
        _per_replica(lambda s: check_queue_identity_instance(np.random.default_rng(s), window), dtype=bool),
        seeds,
        cfg.threads,
    )
    rows = [
        {"experiment": cfg.experiment, "replica": k, "seed": int(s) & MASK64, "holds": bool(h)}
        for k, (s, h) in enumerate(zip(seeds, holds))
    ]
    bad = int(np.sum(~holds))
    summary = {"instances": len(rows), "violations": bad}
    lines = [f"queue identity: {len(rows) - bad}/{len(rows)} instances hold"]
    return ExperimentResult(["experiment", "replica", "seed", "holds"], rows, summary, lines, ok=bad == 0)


def run_cylinder(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    N, xi1, i = p["N"], p["xi1"], p["i"]
    seeds = A.replica_seeds(cfg.seed, p["replicas"])
    dist = A.map_replicas(
        _per_replica(lambda s: cylinder_distance(WeightField(Seed(s)), xi1, N, i)), seeds, cfg.threads
    )
    rows = []
    for r in p["r"]:
        base = {"experiment": cfg.experiment, "quantity": "P(miss)", "N": N, "xi1": xi1, "i": i, "r": r}
        rows.append(_bernoulli_row(base, dist > r * (1 + 1e-12)))
    probs = [row["estimate"] for row in rows]
    positive = [(r, q) for r, q in zip(p["r"], probs) if q > 0]
    fit = A.fit_loglog(*zip(*positive)) if len(positive) >= 2 else None
    summary = {
        "p_miss": probs,
        "strictly_decreasing": all(b < a for a, b in zip(probs, probs[1:])),
        "slope": None if fit is None else fit.slope,
        "max_distance": float(dist.max()),
    }
    lines = [f"r={row['r']:g}: P(miss) = {row['estimate']:.5f} +/- {row['se']:.5f}" for row in rows]
    cols = ["experiment", "quantity", "N", "xi1", "i", "r", "estimate", "se", "n", "ci_lo", "ci_hi"]
    return ExperimentResult(cols, rows, summary, lines)


def run_block_connection(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    block = coarse_block(tuple(p["o"]), (p["d1"], p["d2"]), p["N"], p["epsilon"])
    seeds = A.replica_seeds(cfg.seed, p["replicas"])
    hits = A.map_replicas(
        _per_replica(lambda s: block_connection_events(WeightField(Seed(s)), block), width=2, dtype=bool),
        seeds,
        cfg.threads,
    )
    base = {"experiment": cfg.experiment, "N": p["N"], "o1": p["o"][0], "o2": p["o"][1],
            "d1": p["d1"], "d2": p["d2"]}
    rows = [
        _bernoulli_row({**base, "quantity": "P(near)"}, hits[:, 0]),
        _bernoulli_row({**base, "quantity": "P(far)"}, hits[:, 1]),
    ]
    summary = {
        "p_near": rows[0]["estimate"],
        "p_far": rows[1]["estimate"],
        "members": len(block.members),
        "mirror_members": len(block.mirror_members),
        "far_points": len(block.far),
    }
    lines = [f"{r['quantity']} = {r['estimate']:.4f} +/- {r['se']:.4f}" for r in rows]
    cols = ["experiment", "quantity", "N", "o1", "o2", "d1", "d2", "estimate", "se", "n", "ci_lo", "ci_hi"]
    return ExperimentResult(cols, rows, summary, lines)


def exact_first_passage_fraction(alpha, beta, n: int) -> Fraction | None:
    """The first-passage probability as a fraction when both rates are integers."""
    if int(alpha) != alpha or int(beta) != beta:
        return None
    a, b = int(alpha), int(beta)
    cat = math.comb(2 * (n - 1), n - 1) // n
    return Fraction(cat * a**n * b ** (n - 1), (a + b) ** (2 * n - 1))


def run_rw_exact(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    rw = A.RwParams(p["alpha"], p["beta"])
    mc = A.rw_first_passage_mc(rw, p["n"], p["mc_replicas"], cfg.seed, cfg.threads) if p["mc_replicas"] else {}
    rows, lines = [], []
    for n in p["n"]:
        exact = A.rw_first_passage_exact(rw, n)
        row = {"experiment": cfg.experiment, "alpha": rw.alpha, "beta": rw.beta, "n_step": n, "exact": exact}
        frac = exact_first_passage_fraction(rw.alpha, rw.beta, n)
        text = f"P(B_{n}) = {exact:.17g}" if frac is None else f"P(B_{n}) = {frac} ~ {exact:.17g}"
        if n in mc:
            row.update(estimate=mc[n].mean, se=mc[n].se, n=mc[n].n)
            text += f"; Monte Carlo {mc[n].mean:.5f} +/- {mc[n].se:.5f}"
        rows.append(row)
        lines.append(text)
    summary = {"exact": {str(r["n_step"]): r["exact"] for r in rows}}
    cols = ["experiment", "alpha", "beta", "n_step", "exact", "estimate", "se", "n"]
    return ExperimentResult(cols, rows, summary, lines)


def run_no_axis(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    res = A.no_axis_divergence(p["eta"], range(p["n_min"], p["n_max"] + 1), p["replicas"], cfg.seed, cfg.threads)
    rows = [
        {"experiment": cfg.experiment, "quantity": "median_sup", "eta1": e, "n_max": p["n_max"], "estimate": m,
         "n": p["replicas"]}
        for e, m in zip(res.eta, res.medians)
    ]
    summary = {"medians": res.medians, "strictly_increasing": res.strictly_increasing}
    lines = [f"eta1={e:g}: median sup = {m:.4f}" for e, m in zip(res.eta, res.medians)]
    return ExperimentResult(["experiment", "quantity", "eta1", "n_max", "estimate", "n"], rows, summary, lines)


def run_property_suite(cfg: ExperimentConfig) -> ExperimentResult:
    tallies = [run_check(name, cfg.params["instances"], cfg.seed) for name in CHECKS]
    rows = [
        {"experiment": cfg.experiment, "check": t.name, "instances": t.instances, "violations": t.violations}
        for t in tallies
    ]
    ok = all(t.violations == 0 for t in tallies)
    lines = [f"{t.name}: {t.violations} violations in {t.instances} instances" for t in tallies]
    lines.append("all checks pass" if ok else "SOME CHECKS FAILED")
    summary = {t.name: t.violations for t in tallies}
    return ExperimentResult(["experiment", "check", "instances", "violations"], rows, summary, lines, ok=ok)


RUNNERS = {
    "w-event": run_w_event,
    "exit-exponent": run_exit_exponent,
    "variance-check": run_variance_check,
    "queue-fixedpoint": run_queue_fixedpoint,
    "queue-identity": run_queue_identity,
    "cylinder": run_cylinder,
    "block-connection": run_block_connection,
    "rw-exact": run_rw_exact,
    "no-axis": run_no_axis,
    "property-suite": run_property_suite,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)

"""Experiment configuration, execution and report emission.

A run is described by an :class:`ExperimentConfig`; :func:`run_experiment`
produces a list of flat report rows (observed next to predicted values, with
deviations in standard-error units) and writes them as CSV or JSON.  Every
replica draws from ``RngStream(seed, replica)``, and replicas are processed in
fixed chunks whose results are concatenated in replica order, so reports are
byte-identical for any number of threads.
"""

from __future__ import annotations

import ast
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from mesocorr.charpoly import ShiftSpec, exact_covariance, log_z, normalized_batch
from mesocorr.counting import (
    ZeroTable, correlation_experiment, max_count_deviation, read_zero_table, zero_count,
)
from mesocorr.cue import EigenAngles, sample_cue_angles, sample_verblunsky_batch
from mesocorr.dirichlet import diagonal_covariance, load_or_sieve, zeta_model_batch
from mesocorr.errors import CoverageError, ValidationError
from mesocorr.gptree import (
    bd_covariance, build_tree, min_covariance_matrix, sample_bd_process, strange_correlation,
    tree_transform,
)
from mesocorr.limits import KINDS, convergence_sweep
from mesocorr.parallel import map_replicas
from mesocorr.rng import RngStream
from mesocorr.stats import estimate_covariance

EXPERIMENTS = ("cue_clt", "zeta_model", "counting_corr", "lemma_sweep", "tree_check",
               "bd_process", "ingest_zeros")
FORMATS = ("csv", "json")

# experiment -> (required params, defaults)
_PARAMS = {
    "cue_clt": ({"n_or_t"}, {"gaps": [0.5], "gap_unit": 1.0, "eps_exponent": math.inf, "regime": None,
                             "method": "szego", "exact": True}),
    "zeta_model": ({"n_or_t"}, {"x": None, "gaps": [0.0], "gap_unit": 1.0, "eps_exponent": math.inf,
                                "regime": None, "method": "auto", "prime_cache": None}),
    "counting_corr": (set(), {"delta": 0.5, "pairs": [(0, 1), (0, 2), (1, 2), (2, 3)],
                              "zeros": None, "base_height": 0.0, "method": "auto"}),
    "lemma_sweep": (set(), {"kinds": list(KINDS), "cs": [0.0, 0.5, 2.0],
                            "sizes": [1e4, 1e5, 1e6]}),
    "tree_check": (set(), {"levels": [1.0, 0.3, 0.7, 0.2, 0.9, 0.5]}),
    "bd_process": (set(), {"grid": [0.2, 0.5, 0.5, 0.9]}),
    "ingest_zeros": ({"zeros"}, {"zeros": None, "base_height": 0.0}),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_or_t: float | None = None
    replicas: int = 1000
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str = "-"
    format: str = "csv"
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}")
        if isinstance(self.replicas, bool) or int(self.replicas) != self.replicas or self.replicas < 1:
            raise ValidationError("replicas must be a positive integer")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ValidationError("threads must be a positive integer")
        if int(self.seed) != self.seed:
            raise ValidationError("seed must be an integer")
        if self.n_or_t is not None and not (float(self.n_or_t) > 0):
            raise ValidationError("n_or_t must be positive")
        required, defaults = _PARAMS[self.experiment]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ValidationError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        merged = {**defaults, **self.params}
        missing = [k for k in required if (self.n_or_t if k == "n_or_t" else merged.get(k)) is None]
        if self.experiment == "counting_corr" and self.n_or_t is None and merged["zeros"] is None:
            missing.append("n_or_t or zeros")
        if missing:
            raise ValidationError(f"{self.experiment} needs {', '.join(sorted(missing))}")
        object.__setattr__(self, "params", merged)


# ---------------------------------------------------------------- config files

def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        low = text.lower()
        if low in ("true", "false"):
            return low == "true"
        if low in ("inf", "+inf", "infinity"):
            return math.inf
        return text


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines (``#`` comments); values are Python literals or bare strings."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"bad config file: {exc}") from None
    return {k: _parse_value(v) for k, v in cp["run"].items()}


_TOP = ("experiment", "n_or_t", "replicas", "seed", "output_path", "format", "threads")


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build a config from flat keys; non-top-level keys become experiment parameters."""
    values = dict(values)
    if "experiment" not in values:
        raise ValidationError("config needs an 'experiment' key")
    top = {k: values.pop(k) for k in _TOP if k in values}
    return ExperimentConfig(params=values, **top)


def parse_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Config from a file, with non-None ``overrides`` taking precedence."""
    values = parse_config_file(path)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(values)


# ---------------------------------------------------------------- helpers

def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _sigma(obs, pred, se):
    return _num((obs - pred) / se) if se > 0 else None


def _shift_spec(p: dict) -> ShiftSpec:
    gaps = tuple(float(g) for g in np.atleast_1d(p["gaps"]))
    e = float(p["eps_exponent"])
    regime = p["regime"] or ("micro" if e > 1 else "auto")
    return ShiftSpec(len(gaps) + 1, e, gaps, regime=regime, gap_unit=float(p["gap_unit"]))


def _covariance_rows(est, predicted, extra=None, samples=None) -> list:
    """Upper-triangle rows; ``corr_re`` (Pearson correlation of real parts) for complex samples."""
    rows = []
    corr_re = None
    if samples is not None and np.iscomplexobj(samples):
        corr_re = estimate_covariance(np.real(samples)).correlation()
    for i in range(est.dim):
        for j in range(i, est.dim):
            obs = est.cov[i, j]
            row = {
                "i": i + 1, "j": j + 1,
                "cov_re": _num(np.real(obs)), "cov_im": _num(np.imag(obs)),
                "stderr": _num(est.stderr[i, j]),
                "predicted": _num(predicted[i, j]),
                "dev_sigma": _sigma(np.real(obs), predicted[i, j], est.stderr[i, j]),
            }
            if corr_re is not None:
                row["corr_re"] = _num(corr_re[i, j])
            for name, mat in (extra or {}).items():
                row[name + "_re"] = _num(np.real(mat[i, j]))
                if np.iscomplexobj(mat):
                    row[name + "_im"] = _num(np.imag(mat[i, j]))
            rows.append(row)
    return rows


# ---------------------------------------------------------------- experiments

def cue_clt_samples(n: int, spec: ShiftSpec, replicas: int, seed: int, threads: int = 1,
                    method: str = "szego") -> np.ndarray:
    """Normalized log Z vectors for CUE(n) replicas ``0..replicas-1``."""
    if method == "szego":
        def chunk(a, b):
            return normalized_batch(sample_verblunsky_batch(n, seed, a, b), n, spec)
    elif method == "haar":
        eps, phases, norm = spec.epsilon(n), spec.offsets(n), spec.normalization(n)

        def chunk(a, b):
            rows = sample_cue_angles(n, seed, a, b)
            return np.stack([log_z(EigenAngles(r), eps, phases) for r in rows]) / norm
    else:
        raise ValidationError(f"unknown sampler {method!r}; expected 'szego' or 'haar'")
    return map_replicas(chunk, replicas, threads, chunk=64)


def _run_cue_clt(cfg: ExperimentConfig) -> list:
    p = cfg.params
    n = int(cfg.n_or_t)
    if n != cfg.n_or_t or n < 2:
        raise ValidationError("cue_clt needs an integer n >= 2")
    spec = _shift_spec(p)
    samples = cue_clt_samples(n, spec, cfg.replicas, cfg.seed, cfg.threads, p["method"])
    est = estimate_covariance(samples)
    extra = {}
    if p["exact"]:
        extra["finite_n"] = exact_covariance(n, spec.epsilon(n), spec.offsets(n)) / spec.normalization(n) ** 2
    return _covariance_rows(est, spec.predicted_covariance(), extra, samples)


def zeta_model_samples(primes, t: float, spec: ShiftSpec, replicas: int, seed: int, x=None,
                       method: str = "auto") -> np.ndarray:
    """Normalized model vectors at ``omega_r ~ U(0, 1)`` drawn from ``RngStream(seed, r)``."""
    omegas = np.array([RngStream(seed, r).generator().uniform() for r in range(replicas)])
    return zeta_model_batch(primes, t, omegas, spec, x, method=method)


def _run_zeta_model(cfg: ExperimentConfig) -> list:
    p = cfg.params
    t = float(cfg.n_or_t)
    x = float(p["x"]) if p["x"] is not None else t
    spec = _shift_spec(p)
    primes = load_or_sieve(int(x), p["prime_cache"])
    samples = zeta_model_samples(primes, t, spec, cfg.replicas, cfg.seed, x, p["method"])
    est = estimate_covariance(samples)
    diag = diagonal_covariance(primes, spec, t, x)
    return _covariance_rows(est, spec.predicted_covariance(), {"diagonal": diag}, samples)


def _pairs(value) -> list:
    pairs = [tuple(float(v) for v in p) for p in value]
    if any(len(p) != 2 for p in pairs):
        raise ValidationError("pairs must be (alpha, beta) tuples")
    return pairs


def _run_counting(cfg: ExperimentConfig) -> list:
    p = cfg.params
    pairs = _pairs(p["pairs"])
    if p["zeros"] is not None:
        source = read_zero_table(p["zeros"], float(p["base_height"]))
    else:
        source = int(cfg.n_or_t)
        if source != cfg.n_or_t:
            raise ValidationError("counting on CUE needs an integer n")
    est = correlation_experiment(source, float(p["delta"]), pairs, cfg.replicas, cfg.seed,
                                 cfg.threads, p["method"])
    corr = est.correlation()
    pred = strange_correlation(pairs)
    se = est.corr_stderr
    rows = []
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            rows.append({
                "pair_i": i + 1, "pair_j": j + 1, "corr": _num(corr[i, j]),
                "stderr": _num(se[i, j]) if se is not None else None, "predicted": _num(pred[i, j]),
            })
    return rows


def _run_lemmas(cfg: ExperimentConfig) -> list:
    p = cfg.params
    kinds = [p["kinds"]] if isinstance(p["kinds"], str) else list(p["kinds"])
    sizes = [float(s) for s in np.atleast_1d(p["sizes"])]
    primes = None
    if any(k.startswith("NT") for k in kinds):
        from mesocorr.dirichlet import sieve

        primes = sieve(int(max(sizes)))
    rows = []
    for kind in kinds:
        for c in np.atleast_1d(p["cs"]):
            rep = convergence_sweep(kind, float(c), sizes, primes, threads=cfg.threads)
            mono = rep.nonincreasing
            for row in rep.rows():
                row = {k: (_num(v) if isinstance(v, float) else v) for k, v in row.items()}
                row["nonincreasing"] = mono
                rows.append(row)
    return rows


def tree_samples(levels, replicas: int, seed: int, threads: int = 1) -> np.ndarray:
    tree = build_tree(levels)

    def chunk(a, b):
        z = np.stack([RngStream(seed, r).generator().standard_normal(tree.ell) for r in range(a, b)])
        return tree_transform(tree, z)

    return map_replicas(chunk, replicas, threads, chunk=4096)


def _run_tree(cfg: ExperimentConfig) -> list:
    levels = np.asarray(cfg.params["levels"], dtype=float)
    samples = tree_samples(levels, cfg.replicas, cfg.seed, cfg.threads)
    est = estimate_covariance(samples)
    tree = build_tree(levels)
    rows = _covariance_rows(est, min_covariance_matrix(levels))
    for row in rows:
        row["father_j"] = int(tree.father[row["j"] - 1]) + 1
    return rows


def _run_bd(cfg: ExperimentConfig) -> list:
    grid = np.asarray(cfg.params["grid"], dtype=float)

    def chunk(a, b):
        return np.stack([sample_bd_process(grid, RngStream(cfg.seed, r)) for r in range(a, b)])

    samples = map_replicas(chunk, cfg.replicas, cfg.threads, chunk=4096)
    return _covariance_rows(estimate_covariance(samples), bd_covariance(grid))


def _run_ingest(cfg: ExperimentConfig) -> list:
    table: ZeroTable = read_zero_table(cfg.params["zeros"], float(cfg.params["base_height"]))
    row = {
        "zeros": len(table), "base_height": _num(table.base_height),
        "first_height": _num(table.heights[0]), "last_height": _num(table.upper),
        "complete": table.starts_at_first_zero,
        "max_count_deviation": None, "count_at_100": None,
    }
    if table.starts_at_first_zero:
        row["max_count_deviation"] = _num(max_count_deviation(table))
        try:
            row["count_at_100"] = zero_count(table, 100.0)
        except CoverageError:
            pass
    return [row]


_RUNNERS = {
    "cue_clt": _run_cue_clt, "zeta_model": _run_zeta_model, "counting_corr": _run_counting,
    "lemma_sweep": _run_lemmas, "tree_check": _run_tree, "bd_process": _run_bd,
    "ingest_zeros": _run_ingest,
}


# ---------------------------------------------------------------- reports

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_report(rows: list, fmt: str) -> str:
    """CSV (header from the first row) or a JSON array of row objects."""
    rows = [{k: _plain(v) for k, v in row.items()} for row in rows]
    if fmt == "json":
        return json.dumps(rows, indent=1, allow_nan=False) + "\n"
    if fmt != "csv":
        raise ValidationError(f"format must be one of {FORMATS}")
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([_cell(v) for v in row.values()])
    return buf.getvalue()


def run_rows(cfg: ExperimentConfig) -> list:
    return _RUNNERS[cfg.experiment](cfg)


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run ``cfg`` and write its report to ``cfg.output_path`` (``-`` = stdout)."""
    rows = run_rows(cfg)
    text = render_report(rows, cfg.format)
    if cfg.output_path in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return rows


__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "parse_config_text", "parse_config_file", "config_from_mapping", "load_config",
    "cue_clt_samples", "zeta_model_samples", "tree_samples", "render_report", "run_rows",
    "run_experiment",
]

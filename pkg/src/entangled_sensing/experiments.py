"""Seeded multi-trial experiment runners that write CSV results.

Every run directory gets ``config.json`` (the full config snapshot),
``run.json`` (seed, package version, list of written files) and
``plot.json`` (a declarative description of the figures the CSVs support).
No timestamps are written, so rerunning a config with the same seed
reproduces every file byte for byte.

Trial ``i`` of a run with master seed ``s`` uses the integer seed
``trial_seeds(s, trials)[i]``; within a trial, streams are keyed as
``[trial_seed, k]`` with a fixed ``k`` per role (dataset, entangled
training, classical training, ...).
"""
from __future__ import annotations

import csv
import json
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .channels import make_rng, trial_seeds
from .datagen import (generate_gaussian_svm_dataset, generate_pca_channels,
                      generate_svm_dataset, random_unit_vector)
from .discrimination import discrimination_sweep, homodyne_monte_carlo, entangled_homodyne_error
from .pca import PrincipalTransform, train_first_pc, train_sequential
from .spsa import SpsaConfig
from .svm import expected_error, perfect_hyperplane_error, probe_scheme, train_svm, Hyperplane

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PRESETS",
    "preset",
    "run_experiment",
    "run_svm_experiment",
    "run_pca_experiment",
    "run_discrimination_sweep",
    "run_pipeline_experiment",
]

KINDS = ("svm", "pca", "discrimination", "pipeline")

# role keys for per-trial streams
_DATA, _ENT, _CLS, _PERFECT, _EXTRA = range(5)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str = "svm"
    n_modes: int = 10
    total_photons: float = 5.0
    eta: float = 1.0
    alpha0: float = 2.0
    epsilon: float = 0.1
    P: float = 20.0
    n_components: int = 1
    n_points: int = 300
    steps: int = 2000
    spsa_a: float = 1.0
    spsa_c: float = 0.5
    spsa_A: Optional[float] = None
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    lam: float = 1e-3
    batch_size: Optional[int] = 10
    perfect_shots: int = 100
    photon_sweep: list = field(default_factory=lambda: [1.0, 2.0, 5.0, 10.0, 15.0, 20.0])
    alpha_value: float = 0.1
    mc_trials: int = 100_000
    noiseless_oracle: bool = True
    trials: int = 5
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return ExperimentConfig.from_dict(d)

    def spsa(self) -> SpsaConfig:
        return SpsaConfig(a=self.spsa_a, c=self.spsa_c, max_steps=self.steps, A=self.spsa_A,
                          alpha=self.spsa_alpha, gamma=self.spsa_gamma, seed=self.seed)

    def validate(self) -> None:
        checks = [
            (self.kind in KINDS, f"kind must be one of {KINDS}"),
            (self.trials >= 1, "trials must be at least 1"),
            (self.n_modes >= 1, "n_modes must be at least 1"),
            (self.total_photons >= 0, "total_photons must be non-negative"),
            (0.0 <= self.eta <= 1.0, "eta must lie in [0, 1]"),
            (self.alpha0 > 0, "alpha0 must be positive"),
            (self.epsilon >= 0, "epsilon must be non-negative"),
            (self.n_points >= 1, "n_points must be at least 1"),
            (self.steps >= 1, "steps must be at least 1"),
            (self.lam >= 0, "lam must be non-negative"),
            (self.batch_size is None or self.batch_size >= 1, "batch_size must be >= 1 or null"),
            (self.perfect_shots >= 2, "perfect_shots must be at least 2"),
            (self.mc_trials >= 1, "mc_trials must be at least 1"),
            (self.workers >= 1, "workers must be at least 1"),
            (1 <= self.n_components <= self.n_modes, "need 1 <= n_components <= n_modes"),
        ]
        if self.kind in ("pca", "pipeline"):
            checks.append((self.P > 1, "P must exceed 1"))
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            self.spsa()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_SVM_FAST = dict(n_points=200, steps=600, trials=2, perfect_shots=20)
_PCA_FAST = dict(steps=400, trials=3)

PRESETS = {
    "fig3a": dict(kind="svm", n_modes=10, total_photons=5.0, eta=1.0, alpha0=2.0, epsilon=0.1,
                  n_points=1000, steps=2000,
                  photon_sweep=[1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0]),
    "fig3b": dict(kind="svm", n_modes=100, total_photons=20.0, eta=1.0, alpha0=2.0,
                  epsilon=0.1, n_points=10_000, steps=4000,
                  photon_sweep=[5.0, 10.0, 20.0, 30.0, 40.0]),
    "fig3c": dict(kind="svm", n_modes=3, total_photons=1.0, eta=0.9, alpha0=1.5, epsilon=0.2,
                  n_points=500, steps=2000, photon_sweep=[0.5, 1.0, 2.0, 5.0, 10.0, 20.0]),
    "fig3d": dict(kind="svm", n_modes=2, total_photons=1.0, eta=0.9, alpha0=2.0, epsilon=0.2,
                  n_points=500, steps=2000, photon_sweep=[0.5, 1.0, 2.0, 5.0, 10.0, 20.0]),
    "fig5a": dict(kind="pca", n_modes=20, total_photons=1.0, alpha0=0.3, P=20.0, steps=1500,
                  spsa_a=0.05, spsa_c=0.03, batch_size=10, trials=10),
    "fig5b": dict(kind="pca", n_modes=100, total_photons=1.0, alpha0=0.4, P=100.0,
                  steps=3000, spsa_a=0.05, spsa_c=0.03, batch_size=10, trials=10),
    "figA1b": dict(kind="discrimination", n_modes=10, alpha_value=0.1,
                   photon_sweep=[float(n) for n in np.arange(0.0, 20.5, 0.5)]),
    "pipeline": dict(kind="pipeline", n_modes=20, n_components=2, total_photons=5.0,
                     alpha0=0.5, P=20.0, epsilon=0.1, n_points=300, steps=2000, trials=3),
}

_FAST = {"svm": _SVM_FAST, "pca": _PCA_FAST, "pipeline": dict(steps=600, trials=2),
         "discrimination": dict(mc_trials=20_000)}


def preset(name: str, fast: bool = False, **overrides) -> ExperimentConfig:
    """Config for a named preset; ``fast`` shrinks steps and trials for a desk run."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    d = dict(PRESETS[name])
    if fast:
        d.update(_FAST[d["kind"]])
    d.update(overrides)
    return ExperimentConfig.from_dict(d)


def _version() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _write_csv(path: Path, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for row in rows:
            out.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                          for v in row])
    return path.name


def _finish(out_dir: Path, config: ExperimentConfig, files: list, plot: dict, summary: dict):
    (out_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    (out_dir / "plot.json").write_text(json.dumps(plot, indent=2) + "\n")
    run = {"kind": config.kind, "seed": config.seed, "version": _version(),
           "files": sorted(files + ["config.json", "plot.json"]), "summary": summary}
    (out_dir / "run.json").write_text(json.dumps(run, indent=2) + "\n")
    return run


def _map_trials(fn, config: ExperimentConfig, args: list):
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(fn, args))
    return [fn(a) for a in args]


def _trace_table(traces):
    """Stack per-trial traces ``[(step, value), ...]`` on their shared step grid."""
    steps = traces[0][:, 0]
    values = np.column_stack([t[:, 1] for t in traces])
    return steps, values, np.median(values, axis=1)


# -- svm ---------------------------------------------------------------------

def _svm_trial(args):
    config, seed = args
    ds = generate_svm_dataset(config.n_modes, config.n_points, config.alpha0, config.epsilon,
                              config.eta, seed=[seed, _DATA])
    out = {}
    for role, kind in ((_ENT, "entangled"), (_CLS, "separable")):
        rep = train_svm(ds, config.total_photons, config.lam, config.spsa(),
                        make_rng([seed, role]), kind=kind, batch_size=config.batch_size)
        perfect = perfect_hyperplane_error(ds, ds.w_true,
                                           probe_scheme(kind, config.total_photons, ds.n_modes),
                                           config.perfect_shots, make_rng([seed, _PERFECT, role]))
        sweep = [expected_error(ds, Hyperplane(ds.w_true), probe_scheme(kind, n, ds.n_modes))
                 for n in config.photon_sweep]
        out[kind] = {"trace": rep.error_trace, "converged": rep.converged_error(),
                     "perfect": perfect, "sweep": sweep}
    return out


def run_svm_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Entangled and classical SVM training on shared datasets, one per trial.

    Writes ``entangled_error_trace.csv``, ``classical_error_trace.csv``
    (one column per trial plus the median), ``baselines.csv`` (perfect
    hyperplane mean/sd/analytic and converged errors) and
    ``photon_sweep.csv`` (noise-averaged perfect-hyperplane error versus
    ``N_S`` for the first trial's dataset).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = trial_seeds(config.seed, config.trials)
    results = _map_trials(_svm_trial, config, [(config, s) for s in seeds])
    files, summary = [], {}
    for kind, label in (("entangled", "entangled"), ("separable", "classical")):
        steps, values, med = _trace_table([r[kind]["trace"] for r in results])
        files.append(_write_csv(
            out_dir / f"{label}_error_trace.csv",
            ["step", *[f"trial_{i}" for i in range(config.trials)], "median"],
            [(int(s), *map(float, row), float(m)) for s, row, m in zip(steps, values, med)]))
        conv = np.array([r[kind]["converged"] for r in results])
        summary[label] = {
            "converged_median": float(np.median(conv)),
            "converged_sd": float(conv.std(ddof=1)) if conv.size > 1 else 0.0,
            "perfect_mean": float(np.mean([r[kind]["perfect"].mean for r in results])),
            "perfect_sd": float(np.mean([r[kind]["perfect"].sd for r in results])),
            "perfect_analytic": float(np.mean([r[kind]["perfect"].analytic for r in results])),
        }
    files.append(_write_csv(
        out_dir / "baselines.csv",
        ["scheme", "perfect_mean", "perfect_sd", "perfect_analytic", "converged_median",
         "converged_sd"],
        [(k, v["perfect_mean"], v["perfect_sd"], v["perfect_analytic"], v["converged_median"],
          v["converged_sd"]) for k, v in summary.items()]))
    files.append(_write_csv(
        out_dir / "photon_sweep.csv", ["total_photons", "entangled", "classical"],
        [(float(n), float(e), float(c)) for n, e, c in
         zip(config.photon_sweep, results[0]["entangled"]["sweep"],
             results[0]["separable"]["sweep"])]))
    plot = {
        "figures": [
            {"title": "SVM training", "x": {"label": "training step", "scale": "linear"},
             "y": {"label": "error probability", "scale": "log"},
             "series": [
                 {"name": "entangled", "file": "entangled_error_trace.csv", "x": "step",
                  "y": "median", "color": "blue"},
                 {"name": "classical", "file": "classical_error_trace.csv", "x": "step",
                  "y": "median", "color": "red"}],
             "hlines": {"file": "baselines.csv", "value": "perfect_mean", "band": "perfect_sd",
                        "label": "scheme"}},
            {"title": "perfect hyperplane vs photon number",
             "x": {"label": "N_S", "scale": "linear"},
             "y": {"label": "error probability", "scale": "log"},
             "series": [{"name": "entangled", "file": "photon_sweep.csv",
                         "x": "total_photons", "y": "entangled", "color": "blue"},
                        {"name": "classical", "file": "photon_sweep.csv",
                         "x": "total_photons", "y": "classical", "color": "red"}]},
        ]
    }
    return _finish(out_dir, config, files, plot, summary)


# -- pca ---------------------------------------------------------------------

def _pca_trial(args):
    config, seed = args
    runs = [("entangled", config.total_photons, _ENT), ("separable", config.total_photons, _CLS)]
    if config.noiseless_oracle:
        runs.append(("noiseless", np.inf, _EXTRA))
    out = {}
    for label, n, role in runs:
        src = generate_pca_channels(config.n_modes, config.alpha0, config.P, config.eta,
                                    seed=[seed, _DATA, role])
        kind = "separable" if label == "separable" else "entangled"
        rep = train_first_pc(src, n, config.spsa(), make_rng([seed, role]), kind=kind,
                             batch_size=config.batch_size or 10)
        trace = rep.t1_trace.copy()
        trace[:, 1] = np.abs(trace[:, 1])
        out[label] = trace
    if config.n_components > 1:
        src = generate_pca_channels(config.n_modes, config.alpha0, config.P, config.eta,
                                    seed=[seed, _DATA, _PERFECT])
        out["transform"] = train_sequential(src, config.total_photons, config.n_components,
                                            config.spsa(), make_rng([seed, _PERFECT]),
                                            batch_size=config.batch_size or 10)
    return out


def run_pca_experiment(config: ExperimentConfig, out_dir) -> dict:
    """``|t_1|`` traces of the first principal direction for entangled and
    classical probes (and a noiseless reference), one column per trial."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = trial_seeds(config.seed, config.trials)
    results = _map_trials(_pca_trial, config, [(config, s) for s in seeds])
    files, summary = [], {}
    labels = [k for k in ("entangled", "separable", "noiseless") if k in results[0]]
    for label in labels:
        steps, values, med = _trace_table([r[label] for r in results])
        name = "classical" if label == "separable" else label
        files.append(_write_csv(
            out_dir / f"{name}_t1_trace.csv",
            ["step", *[f"trial_{i}" for i in range(config.trials)], "median"],
            [(int(s), *map(float, row), float(m)) for s, row, m in zip(steps, values, med)]))
        summary[name] = {"final_median": float(med[-1]),
                         "final": [float(v) for v in values[-1]]}
    if "transform" in results[0]:
        for i, r in enumerate(results):
            name = f"transform_trial_{i}.csv"
            r["transform"].to_csv(out_dir / name)
            files.append(name)
    files.append(_write_csv(out_dir / "final_t1.csv", ["scheme", "median_abs_t1"],
                            [(k, v["final_median"]) for k, v in summary.items()]))
    plot = {"figures": [{
        "title": "first principal direction", "x": {"label": "training step", "scale": "linear"},
        "y": {"label": "|t1|", "scale": "linear"},
        "series": [{"name": k, "file": f"{k}_t1_trace.csv", "x": "step", "y": "median",
                    "color": {"entangled": "blue", "classical": "red"}.get(k, "gray")}
                   for k in summary]}]}
    return _finish(out_dir, config, files, plot, summary)


# -- discrimination ----------------------------------------------------------

def run_discrimination_sweep(config: ExperimentConfig, out_dir) -> dict:
    """Error probabilities vs ``N_S`` for ``alpha_m = alpha_value`` on all modes,
    with a Monte Carlo estimate of the homodyne receiver and its binomial sd."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    alpha = np.full(config.n_modes, config.alpha_value)
    table = discrimination_sweep(alpha, config.photon_sweep)
    rng = make_rng([config.seed, _EXTRA])
    rows = []
    for n, cls, hom, hel in table:
        mc = homodyne_monte_carlo(alpha, n, config.mc_trials, rng)
        p = entangled_homodyne_error(alpha, n)
        rows.append((n, cls, hom, hel, mc, float(np.sqrt(p * (1 - p) / config.mc_trials))))
    files = [_write_csv(out_dir / "discrimination.csv",
                        ["total_photons", "classical_optimum", "entangled_homodyne",
                         "entangled_helstrom", "homodyne_monte_carlo", "monte_carlo_sd"], rows)]
    plot = {"figures": [{
        "title": f"binary discrimination, M={config.n_modes}, alpha={config.alpha_value}",
        "x": {"label": "N_S", "scale": "linear"}, "y": {"label": "error probability", "scale": "log"},
        "series": [{"name": n, "file": "discrimination.csv", "x": "total_photons", "y": n}
                   for n in ("classical_optimum", "entangled_homodyne", "entangled_helstrom",
                             "homodyne_monte_carlo")]}]}
    summary = {"rows": len(rows)}
    return _finish(out_dir, config, files, plot, summary)


# -- pipeline ----------------------------------------------------------------

def _pipeline_variances(config: ExperimentConfig) -> np.ndarray:
    v = np.ones(config.n_modes)
    v[: config.n_components] = config.P
    return v


def _pipeline_trial(args):
    config, seed = args
    variances = _pipeline_variances(config)
    src = generate_pca_channels(config.n_modes, config.alpha0, config.P, config.eta,
                                seed=[seed, _DATA, _EXTRA], variances=variances)
    pca_spsa = SpsaConfig(a=0.05, c=0.03, max_steps=1500)
    if config.n_components == config.n_modes:
        transform = PrincipalTransform(np.eye(config.n_modes))
    else:
        transform = train_sequential(src, config.total_photons, config.n_components, pca_spsa,
                                     make_rng([seed, _EXTRA]))
    wt_rng = make_rng([seed, _DATA, _PERFECT])
    w_true = np.zeros(config.n_modes)
    w_true[: config.n_components] = random_unit_vector(config.n_components, wt_rng)
    ds = generate_gaussian_svm_dataset(variances, config.alpha0, config.n_points, config.epsilon,
                                       w_true, config.eta, seed=[seed, _DATA])
    reduced = ds.with_displacements(ds.displacements @ transform.rows.T,
                                    w_true=transform.rows @ ds.w_true)
    out = {}
    for label, data, role in (("full", ds, _ENT), ("reduced", reduced, _CLS)):
        rep = train_svm(data, config.total_photons, config.lam, config.spsa(),
                        make_rng([seed, role]), kind="entangled", batch_size=config.batch_size)
        out[label] = rep
    out["alignment"] = float(np.linalg.norm(transform.rows @ w_true))
    return out


def run_pipeline_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Train PCA down to ``n_components`` modes, then compare entangled SVM training
    on the reduced channels against training on the full channels (same steps)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = trial_seeds(config.seed, config.trials)
    results = _map_trials(_pipeline_trial, config, [(config, s) for s in seeds])
    files, summary = [], {}
    for label in ("full", "reduced"):
        steps, values, med = _trace_table([r[label].error_trace for r in results])
        files.append(_write_csv(
            out_dir / f"{label}_error_trace.csv",
            ["step", *[f"trial_{i}" for i in range(config.trials)], "median"],
            [(int(s), *map(float, row), float(m)) for s, row, m in zip(steps, values, med)]))
        conv = [r[label].converged_error() for r in results]
        summary[label] = {"converged_median": float(np.median(conv)),
                          "parameters": results[0][label].hyperplane.w.size + 1}
    summary["pc_alignment"] = [r["alignment"] for r in results]
    plot = {"figures": [{
        "title": "SVM after PCA reduction", "x": {"label": "training step", "scale": "linear"},
        "y": {"label": "error probability", "scale": "log"},
        "series": [{"name": k, "file": f"{k}_error_trace.csv", "x": "step", "y": "median"}
                   for k in ("full", "reduced")]}]}
    return _finish(out_dir, config, files, plot, summary)


_RUNNERS = {"svm": run_svm_experiment, "pca": run_pca_experiment,
            "discrimination": run_discrimination_sweep, "pipeline": run_pipeline_experiment}


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    config.validate()
    return _RUNNERS[config.kind](config, out_dir)

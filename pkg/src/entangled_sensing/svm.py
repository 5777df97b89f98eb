"""Physical-layer linear SVM on displacement channels.

The entangled classifier measures ``f = w . alpha`` with a single homodyne
shot on one squeezed resource spread across all sensors; the classical
baseline measures the same quantity with independent squeezed probes
(even photon split).  Both are trained with SPSA on the hinge cost
``|1 - y (f + b)|_+ + lam * ||w||^2`` and classify with ``sign(f + b)``.

``w`` is stored unnormalised.  The beam-splitter array realises ``w/||w||``
and the outcome is rescaled by ``||w||``, so the measurement noise grows with
``||w||`` exactly as the mean does.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .channels import sample_weighted
from .datagen import LabeledChannelSet, random_unit_vector
from .noise import ProbeKind, ProbeScheme
from .spsa import SpsaConfig, spsa_minimize

__all__ = [
    "Hyperplane",
    "SvmTrainReport",
    "PerfectHyperplaneError",
    "svm_cost",
    "classify",
    "probe_scheme",
    "noisy_outcomes",
    "classification_error",
    "expected_error",
    "train_svm",
    "train_entangled_svm",
    "train_classical_svm",
    "perfect_hyperplane_error",
]


@dataclass(frozen=True)
class Hyperplane:
    w: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or not np.isfinite(self.b):
            raise ValueError("hyperplane parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    def __eq__(self, other):
        if not isinstance(other, Hyperplane):
            return NotImplemented
        return self.b == other.b and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash((self.w.tobytes(), self.b))

    @classmethod
    def from_vector(cls, x) -> "Hyperplane":
        x = np.asarray(x, dtype=float)
        return cls(x[:-1], x[-1])

    def to_vector(self) -> np.ndarray:
        return np.append(self.w, self.b)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.w))

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "b": self.b}


def svm_cost(hyperplane: Hyperplane, outcomes, labels, lam: float) -> float:
    """``sum_n |1 - y_n (f_n + b)|_+ + lam * ||w||^2`` for measured outcomes ``f_n``."""
    f = np.asarray(outcomes, dtype=float).reshape(-1)
    y = np.asarray(labels, dtype=float).reshape(-1)
    hinge = np.maximum(1.0 - y * (f + hyperplane.b), 0.0).sum()
    return float(hinge + lam * hyperplane.norm**2)


def classify(f_value, hyperplane: Hyperplane):
    """``sign(f + b)`` with ``sign(0) = +1``; vectorised over ``f_value``."""
    s = np.where(np.asarray(f_value, dtype=float) + hyperplane.b >= 0, 1, -1)
    return int(s) if s.ndim == 0 else s


def probe_scheme(kind, total_photons: float, n_modes: int) -> ProbeScheme:
    """Entangled resource, or the classical even split ``N_S / M``."""
    if ProbeKind(kind) is ProbeKind.ENTANGLED:
        return ProbeScheme.entangled(total_photons)
    return ProbeScheme.separable_equal(total_photons, n_modes)


def noisy_outcomes(displacements, w, scheme: ProbeScheme, eta: float,
                   rng: np.random.Generator) -> np.ndarray:
    """One shot per row of ``displacements`` for an unnormalised weight vector ``w``."""
    w = np.asarray(w, dtype=float)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        # an all-zero array couples nothing in: the outcome is identically zero
        return np.zeros(np.atleast_2d(displacements).shape[0])
    return sample_weighted(displacements, w / norm, scheme, eta, rng, scale=norm)


def classification_error(dataset: LabeledChannelSet, hyperplane: Hyperplane,
                         scheme: ProbeScheme, rng: np.random.Generator, shots: int = 1) -> float:
    """Fraction of misclassified shots, ``shots`` fresh shots per data point."""
    if hyperplane.norm == 0.0:
        raise ValueError("degenerate hyperplane with w = 0")
    alpha = np.repeat(dataset.displacements, shots, axis=0)
    y = np.repeat(dataset.labels, shots)
    f = noisy_outcomes(alpha, hyperplane.w, scheme, dataset.eta, rng)
    return float(np.mean(classify(f, hyperplane) != y))


def expected_error(dataset: LabeledChannelSet, hyperplane: Hyperplane,
                   scheme: ProbeScheme) -> float:
    """Noise-averaged error of ``hyperplane``: mean over points of
    ``P[y (f + b) < 0]`` with ``f ~ N(w . alpha, (||w|| delta)^2)``."""
    norm = hyperplane.norm
    if norm == 0.0:
        raise ValueError("degenerate hyperplane with w = 0")
    sd = scheme.precision(hyperplane.w / norm, dataset.eta)
    margin = dataset.labels * (dataset.displacements @ hyperplane.w + hyperplane.b)
    if sd == 0.0:
        return float(np.mean(margin < 0))
    return float(np.mean(ndtr(-margin / (norm * sd))))


@dataclass
class SvmTrainReport:
    hyperplane: Hyperplane
    error_trace: np.ndarray  # rows (step, empirical error)
    cost_trace: np.ndarray
    config: dict = field(default_factory=dict)

    def converged_error(self, tail: int = 10) -> float:
        """Mean of the last ``tail`` error-trace points."""
        return float(np.mean(self.error_trace[-tail:, 1]))

    def save(self, out_dir, prefix: str = "svm") -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / f"{prefix}_error_trace.csv", "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", "error"])
            for step, err in self.error_trace:
                out.writerow([int(step), repr(float(err))])
        with open(out_dir / f"{prefix}_cost_trace.csv", "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", "cost"])
            for step, c in enumerate(self.cost_trace):
                out.writerow([step, repr(float(c))])
        summary = {"hyperplane": self.hyperplane.to_dict(), "config": self.config}
        (out_dir / f"{prefix}_result.json").write_text(json.dumps(summary, indent=2) + "\n")


def train_svm(dataset: LabeledChannelSet, total_photons: float, lam: float,
              spsa_config: SpsaConfig, rng: np.random.Generator, kind="entangled",
              batch_size: Optional[int] = 1, trace_every: Optional[int] = None,
              init: Optional[Hyperplane] = None) -> SvmTrainReport:
    """Fit ``(w, b)`` by SPSA on the stochastic hinge cost.

    Each SPSA step picks ``batch_size`` random training channels (``None``
    means the whole set) shared by both perturbed evaluations; every
    evaluation takes fresh single shots on them and returns the mean hinge
    term plus ``lam * ||w||^2``.  ``lam`` is therefore a per-sample weight:
    the summed cost over ``N`` points corresponds to ``N * lam``.

    The empirical error (one fresh shot per data point) is recorded every
    ``trace_every`` steps, default ``max(1, max_steps // 100)``.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    n_modes = dataset.n_modes
    scheme = probe_scheme(kind, total_photons, n_modes)
    alpha, y, eta = dataset.displacements, dataset.labels, dataset.eta
    if trace_every is None:
        trace_every = max(1, spsa_config.max_steps // 100)
    if init is None:
        init = Hyperplane(random_unit_vector(n_modes, rng), 0.0)
    batch = {"idx": np.arange(len(dataset))}

    def pick(_step):
        if batch_size is not None:
            batch["idx"] = rng.integers(0, len(dataset), size=batch_size)

    def objective(x):
        w, b = x[:-1], x[-1]
        idx = batch["idx"]
        f = noisy_outcomes(alpha[idx], w, scheme, eta, rng)
        return float(np.mean(np.maximum(1.0 - y[idx] * (f + b), 0.0)) + lam * (w @ w))

    error_trace = []

    def project(x):
        if not np.any(x[:-1]):
            x = x.copy()
            x[:-1] = random_unit_vector(n_modes, rng)
        return x

    def record(step, x):
        err = classification_error(dataset, Hyperplane.from_vector(x), scheme, rng)
        error_trace.append((step, err))

    record(0, init.to_vector())
    steps = []

    def project_and_trace(x):
        x = project(x)
        steps.append(None)
        k = len(steps)
        if k % trace_every == 0 or k == spsa_config.max_steps:
            record(k, x)
        return x

    result = spsa_minimize(objective, init.to_vector(), spsa_config, rng=rng,
                           project=project_and_trace, before_step=pick)
    config = {
        "kind": ProbeKind(kind).value,
        "total_photons": total_photons,
        "lambda": lam,
        "batch_size": batch_size,
        "trace_every": trace_every,
        "spsa": {k: v for k, v in spsa_config.__dict__.items()},
    }
    return SvmTrainReport(Hyperplane.from_vector(result.x), np.array(error_trace),
                          result.values(), config)


def train_entangled_svm(dataset, total_photons, lam, spsa_config, rng, **kwargs) -> SvmTrainReport:
    return train_svm(dataset, total_photons, lam, spsa_config, rng, kind="entangled", **kwargs)


def train_classical_svm(dataset, total_photons, lam, spsa_config, rng, **kwargs) -> SvmTrainReport:
    return train_svm(dataset, total_photons, lam, spsa_config, rng, kind="separable", **kwargs)


@dataclass(frozen=True)
class PerfectHyperplaneError:
    mean: float
    sd: float
    analytic: float
    repetitions: int


def perfect_hyperplane_error(dataset: LabeledChannelSet, w_true, scheme: ProbeScheme,
                             shots_per_point: int, rng: np.random.Generator) -> PerfectHyperplaneError:
    """Error of the generating hyperplane ``(w_t, b=0)`` under measurement noise.

    Each of ``shots_per_point`` repetitions classifies every point with one
    fresh shot; ``mean``/``sd`` are taken over repetitions.  ``analytic`` is
    the mean over points of ``Q(|w_t . alpha| / (||w_t|| delta))``.
    """
    plane = Hyperplane(w_true, 0.0)
    alpha = dataset.displacements
    truth = classify(alpha @ plane.w, plane)
    errors = np.empty(shots_per_point)
    for r in range(shots_per_point):
        f = noisy_outcomes(alpha, plane.w, scheme, dataset.eta, rng)
        errors[r] = np.mean(classify(f, plane) != truth)
    norm = plane.norm
    sd_shot = scheme.precision(plane.w / norm, dataset.eta)
    distance = np.abs(alpha @ plane.w) / norm
    analytic = float(np.mean(ndtr(-distance / sd_shot))) if sd_shot > 0 else 0.0
    sd = float(errors.std(ddof=1)) if shots_per_point > 1 else 0.0
    return PerfectHyperplaneError(float(errors.mean()), sd, analytic, shots_per_point)

"""Principal-component search on an ensemble of displacement channels.

The measurement ``f = T_1 . alpha + noise`` has variance
``T_1^T Sigma T_1 + delta^2`` over the ensemble, so maximising ``E[f^2]`` over
unit vectors ``T_1`` finds the leading principal axis of ``Sigma``.  SPSA does
the maximisation from single shots.  Later components are found one at a
time inside the orthogonal complement of the rows already fixed.

The entangled scheme measures every direction with one squeezed resource of
``N_S`` photons; the classical baseline spreads ``N_S`` evenly over the
``M`` sensors.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from scipy.linalg import null_space

from .channels import DisplacementChannel, estimate_all_components, sample_weighted
from .datagen import random_unit_vector
from .noise import ProbeKind, ProbeScheme
from .spsa import SpsaConfig, spsa_minimize

__all__ = [
    "PrincipalTransform",
    "PcaTrainReport",
    "train_first_pc",
    "train_sequential",
    "classical_pca_baseline",
    "batch_pca_direction",
    "reduce_channel",
]

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class PrincipalTransform:
    """Row-orthonormal ``(M_P, M)`` matrix."""

    rows: np.ndarray

    def __post_init__(self):
        T = np.atleast_2d(np.array(self.rows, dtype=float))
        if T.shape[0] > T.shape[1]:
            raise ValueError(f"more rows than columns: {T.shape}")
        if np.max(np.abs(T @ T.T - np.eye(T.shape[0]))) > _ORTHO_TOL:
            raise ValueError("rows are not orthonormal")
        T.setflags(write=False)
        object.__setattr__(self, "rows", T)

    @property
    def shape(self):
        return self.rows.shape

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            for row in self.rows:
                out.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "PrincipalTransform":
        with open(path, newline="") as fh:
            return cls(np.array([[float(v) for v in r] for r in csv.reader(fh)]))


@dataclass
class PcaTrainReport:
    transform: PrincipalTransform
    t1_trace: np.ndarray  # rows (step, first element of the normalised direction)
    objective_trace: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def direction(self) -> np.ndarray:
        return self.transform.rows[0]

    def save(self, out_dir, prefix: str = "pca") -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / f"{prefix}_t1_trace.csv", "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", "t1"])
            for step, t1 in self.t1_trace:
                out.writerow([int(step), repr(float(t1))])
        self.transform.to_csv(out_dir / f"{prefix}_transform.csv")


def _scheme(kind, total_photons: float, n_modes: int) -> ProbeScheme:
    if ProbeKind(kind) is ProbeKind.ENTANGLED:
        return ProbeScheme.entangled(total_photons)
    return ProbeScheme.separable_equal(total_photons, n_modes)


def _train_direction(channel_source: Iterator[DisplacementChannel], basis: np.ndarray,
                     scheme: ProbeScheme, spsa_config: SpsaConfig, rng: np.random.Generator,
                     batch_size: int, init: Optional[np.ndarray]):
    """Maximise ``E[f^2]`` over unit vectors in the column span of ``basis``."""
    dim = basis.shape[1]
    batch = {}

    def draw(_step):
        chans = list(islice(channel_source, batch_size))
        batch["alpha"] = np.stack([c.displacements for c in chans])
        batch["eta"] = chans[0].transmissivity

    def direction(x):
        return basis @ (x / np.linalg.norm(x))

    def objective(x):
        if not np.any(x):
            return 0.0
        f = sample_weighted(batch["alpha"], direction(x), scheme, batch["eta"], rng)
        return -float(np.mean(f**2))

    t1 = []

    def project(x):
        norm = np.linalg.norm(x)
        x = random_unit_vector(dim, rng) if norm == 0.0 else x / norm
        t1.append(direction(x)[0])
        return x

    x0 = random_unit_vector(dim, rng) if init is None else np.asarray(init, dtype=float)
    t1.append(direction(x0)[0])
    result = spsa_minimize(objective, x0 / np.linalg.norm(x0), spsa_config, rng=rng,
                           project=project, before_step=draw)
    trace = np.column_stack([np.arange(len(t1)), t1])
    return direction(result.x), trace, -result.values()


def train_first_pc(channel_source, total_photons: float, spsa_config: SpsaConfig,
                   rng: np.random.Generator, kind="entangled", batch_size: int = 10,
                   init=None) -> PcaTrainReport:
    """Find the leading principal direction ``T_1`` by SPSA.

    Every step draws ``batch_size`` fresh channels, shared by both perturbed
    evaluations; each evaluation takes one shot per channel and returns
    ``-mean(f^2)``.  The iterate is renormalised after each update.
    """
    first = next(channel_source)
    n_modes = first.n_modes
    scheme = _scheme(kind, total_photons, n_modes)
    T1, trace, objective = _train_direction(channel_source, np.eye(n_modes), scheme, spsa_config,
                                            rng, batch_size, init)
    config = {"kind": ProbeKind(kind).value, "total_photons": total_photons,
              "batch_size": batch_size, "spsa": dict(spsa_config.__dict__)}
    return PcaTrainReport(PrincipalTransform(T1[None, :]), trace, objective, config)


def classical_pca_baseline(channel_source, total_photons: float, spsa_config: SpsaConfig,
                           rng: np.random.Generator, batch_size: int = 10,
                           init=None) -> PcaTrainReport:
    """Same SPSA search as :func:`train_first_pc` with separable, evenly split probes."""
    return train_first_pc(channel_source, total_photons, spsa_config, rng, "separable",
                          batch_size, init)


def batch_pca_direction(channel_source, total_photons: float, n_samples: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Top eigenvector of the sample covariance of ``n_samples`` component-wise
    noisy estimates (classical tomography followed by ordinary PCA)."""
    chans = list(islice(channel_source, n_samples))
    scheme = ProbeScheme.separable_equal(total_photons, chans[0].n_modes)
    est = np.stack([estimate_all_components(c, scheme, rng) for c in chans])
    cov = est.T @ est / n_samples  # the ensemble is zero-mean
    vals, vecs = np.linalg.eigh(cov)
    v = vecs[:, -1]
    return v if v[np.argmax(np.abs(v))] > 0 else -v


def train_sequential(channel_source, total_photons: float, n_components: int,
                     spsa_config: SpsaConfig, rng: np.random.Generator, kind="entangled",
                     batch_size: int = 10) -> PrincipalTransform:
    """Find ``n_components`` principal rows one after another.

    Row ``m`` is optimised over unit vectors orthogonal to rows ``1..m-1``,
    which stay fixed.  The search runs in an orthonormal basis of that
    complement, so the returned rows are orthonormal to machine precision.
    """
    first = next(channel_source)
    n_modes = first.n_modes
    if not 1 <= n_components <= n_modes:
        raise ValueError(f"need 1 <= M_P <= M, got M_P={n_components}, M={n_modes}")
    scheme = _scheme(kind, total_photons, n_modes)
    rows = []
    for m in range(n_components):
        if m == 0:
            basis = np.eye(n_modes)
        else:
            basis = null_space(np.array(rows))
        if basis.shape[1] == 1:
            row = basis[:, 0]
        else:
            row, _, _ = _train_direction(channel_source, basis, scheme, spsa_config, rng,
                                         batch_size, None)
        rows.append(row)
    return PrincipalTransform(np.array(rows))


def reduce_channel(channel: DisplacementChannel, transform: PrincipalTransform) -> DisplacementChannel:
    """``M_P``-mode channel with displacements ``T alpha``; transmissivity unchanged."""
    T = transform.rows
    if T.shape[1] != channel.n_modes:
        raise ValueError(f"transform expects {T.shape[1]} modes, channel has {channel.n_modes}")
    return DisplacementChannel(T @ channel.displacements, channel.transmissivity)

"""Synthetic channel ensembles for the classification and compression experiments."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .channels import DisplacementChannel, make_rng

__all__ = [
    "InfeasibleMarginError",
    "LabeledChannelSet",
    "random_unit_vector",
    "generate_svm_dataset",
    "generate_pca_channels",
    "pca_covariance",
    "generate_gaussian_svm_dataset",
]

_PROBE_BATCH = 100_000
_MIN_ACCEPTANCE = 1e-4


class InfeasibleMarginError(ValueError):
    pass


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit sphere in ``R^n``."""
    while True:
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm


@dataclass
class LabeledChannelSet:
    """Labelled channels ``(alpha_n, y_n)`` plus the parameters that generated them.

    Displacements are stored as one ``(N, M)`` array; :attr:`channels` builds
    :class:`DisplacementChannel` objects on demand.
    """

    displacements: np.ndarray
    labels: np.ndarray
    w_true: np.ndarray
    epsilon: float
    alpha0: float
    eta: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        self.displacements = np.atleast_2d(np.asarray(self.displacements, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        self.w_true = np.asarray(self.w_true, dtype=float).reshape(-1)
        if self.labels.size != self.displacements.shape[0]:
            raise ValueError("one label per channel required")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be +-1")

    def __len__(self):
        return self.labels.size

    @property
    def n_modes(self) -> int:
        return self.displacements.shape[1]

    @property
    def channels(self) -> list[DisplacementChannel]:
        return [DisplacementChannel(a, self.eta) for a in self.displacements]

    def margins(self) -> np.ndarray:
        """Signed distances ``w_t . alpha / ||w_t||``."""
        return self.displacements @ self.w_true / np.linalg.norm(self.w_true)

    def with_displacements(self, displacements, w_true=None) -> "LabeledChannelSet":
        """Same labels and metadata on new displacements (e.g. after dimension reduction)."""
        return LabeledChannelSet(displacements, self.labels.copy(),
                                 self.w_true if w_true is None else w_true,
                                 self.epsilon, self.alpha0, self.eta, self.seed)

    def metadata(self) -> dict:
        return {
            "w_true": self.w_true.tolist(),
            "epsilon": self.epsilon,
            "alpha0": self.alpha0,
            "eta": self.eta,
            "seed": self.seed,
        }

    def save(self, csv_path) -> None:
        """Write ``alpha_1..alpha_M,label`` rows and a ``.json`` sidecar with metadata.

        Floats are written with ``repr`` so a load round-trips bit-exactly.
        """
        csv_path = Path(csv_path)
        with open(csv_path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow([f"alpha_{m + 1}" for m in range(self.n_modes)] + ["label"])
            for row, y in zip(self.displacements, self.labels):
                out.writerow([repr(float(v)) for v in row] + [int(y)])
        csv_path.with_suffix(".json").write_text(json.dumps(self.metadata(), indent=2) + "\n")

    @classmethod
    def load(cls, csv_path) -> "LabeledChannelSet":
        csv_path = Path(csv_path)
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        alpha = np.array([[float(v) for v in r[:-1]] for r in rows])
        labels = np.array([int(r[-1]) for r in rows])
        meta = json.loads(csv_path.with_suffix(".json").read_text())
        return cls(alpha, labels, np.array(meta["w_true"]), meta["epsilon"], meta["alpha0"],
                   meta["eta"], meta["seed"])


def generate_svm_dataset(n_modes: int, n_points: int, alpha0: float, epsilon: float,
                         eta: float = 1.0, seed=0) -> LabeledChannelSet:
    """Uniform displacements in ``[-alpha0/2, alpha0/2]^M`` labelled by a random plane.

    A hyperplane normal ``w_t`` is drawn uniformly on the sphere, points closer
    than ``epsilon`` to the plane are rejected, and the rest are labelled
    ``sign(w_t . alpha)``.

    :raises InfeasibleMarginError: if fewer than 1 in 10^4 candidates survive.
    """
    if n_points < 1 or n_modes < 1:
        raise ValueError("need at least one point and one mode")
    if alpha0 <= 0 or epsilon < 0:
        raise ValueError("alpha0 must be positive and epsilon non-negative")
    rng = make_rng(seed)
    w_true = random_unit_vector(n_modes, rng)
    kept = []
    n_kept = 0
    while n_kept < n_points:
        batch = rng.uniform(-alpha0 / 2, alpha0 / 2, size=(_PROBE_BATCH, n_modes))
        ok = batch[np.abs(batch @ w_true) >= epsilon]
        if ok.shape[0] < _MIN_ACCEPTANCE * _PROBE_BATCH:
            raise InfeasibleMarginError(
                f"infeasible margin: only {ok.shape[0]} of {_PROBE_BATCH} candidates "
                f"lie at distance >= {epsilon} from the hyperplane"
            )
        kept.append(ok[: n_points - n_kept])
        n_kept += kept[-1].shape[0]
    alpha = np.concatenate(kept)
    labels = np.where(alpha @ w_true >= 0, 1, -1)
    return LabeledChannelSet(alpha, labels, w_true, float(epsilon), float(alpha0), float(eta),
                             seed if isinstance(seed, int) else None)


def pca_covariance(n_modes: int, alpha0: float, P: float) -> np.ndarray:
    """``alpha0**2 * Diag[P, 1, ..., 1]``."""
    d = np.ones(n_modes)
    d[0] = P
    return alpha0**2 * np.diag(d)


def generate_pca_channels(n_modes: int, alpha0: float, P: float, eta: float = 1.0,
                          seed=0, variances=None) -> Iterator[DisplacementChannel]:
    """Endless stream of zero-mean Gaussian channels with covariance
    ``alpha0**2 * Diag[P, 1, ..., 1]``; the leading principal axis is ``e_1``.

    ``variances`` overrides the diagonal (in units of ``alpha0**2``) for
    other diagonal ensembles.
    """
    if variances is None:
        if P <= 1:
            raise ValueError(f"P must exceed 1, got {P}")
        variances = np.ones(n_modes)
        variances[0] = P
    sd = alpha0 * np.sqrt(np.asarray(variances, dtype=float))
    if sd.size != n_modes:
        raise ValueError("variances must have one entry per mode")
    rng = make_rng(seed)
    while True:
        yield DisplacementChannel(sd * rng.standard_normal(n_modes), eta)


def generate_gaussian_svm_dataset(variances, alpha0: float, n_points: int, epsilon: float,
                                  w_true, eta: float = 1.0, seed=0) -> LabeledChannelSet:
    """Zero-mean Gaussian displacements with covariance ``alpha0**2 * Diag[variances]``,
    labelled by a given plane normal ``w_true`` with the same ``epsilon`` rejection
    as :func:`generate_svm_dataset`."""
    sd = alpha0 * np.sqrt(np.asarray(variances, dtype=float))
    w_true = np.asarray(w_true, dtype=float)
    w_true = w_true / np.linalg.norm(w_true)
    if w_true.size != sd.size:
        raise ValueError("w_true and variances differ in length")
    rng = make_rng(seed)
    kept, n_kept = [], 0
    while n_kept < n_points:
        batch = sd * rng.standard_normal((_PROBE_BATCH, sd.size))
        ok = batch[np.abs(batch @ w_true) >= epsilon]
        if ok.shape[0] < _MIN_ACCEPTANCE * _PROBE_BATCH:
            raise InfeasibleMarginError(f"infeasible margin: epsilon={epsilon}")
        kept.append(ok[: n_points - n_kept])
        n_kept += kept[-1].shape[0]
    alpha = np.concatenate(kept)
    labels = np.where(alpha @ w_true >= 0, 1, -1)
    return LabeledChannelSet(alpha, labels, w_true, float(epsilon), float(alpha0), float(eta),
                             seed if isinstance(seed, int) else None)

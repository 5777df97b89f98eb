"""Displacement channels and simulated homodyne outcomes.

Every channel imparts a real quadrature displacement ``alpha_m`` on each of
its ``M`` modes.  Outcomes are drawn as scalar Gaussians: mean ``w . alpha``
and standard deviation given by :mod:`entangled_sensing.noise`.  Loss only
enters through that standard deviation; the mean is not attenuated.

Randomness always comes from a caller-supplied :class:`numpy.random.Generator`.
:func:`make_rng` builds the one used throughout the package (PCG64 seeded via
``SeedSequence``), so a given integer seed reproduces the same stream on any
platform with the same numpy major version.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import ProbeKind, ProbeScheme, squeeze_factor

__all__ = [
    "DisplacementChannel",
    "MeasurementOutcome",
    "make_rng",
    "spawn_rngs",
    "trial_seeds",
    "unit_weights",
    "measure_weighted",
    "sample_weighted",
    "estimate_all_components",
    "phase_to_displacement",
]

_UNIT_TOL = 1e-9


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for ``seed`` (int, ``SeedSequence`` or an existing generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent streams ``SeedSequence(seed).spawn(n)``; stream ``i`` belongs to trial ``i``."""
    return [make_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def trial_seeds(seed: int, n: int) -> list[int]:
    """Integer seeds for ``n`` trials: the first 64-bit word of each child of
    ``SeedSequence(seed).spawn(n)``."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class DisplacementChannel:
    displacements: np.ndarray
    transmissivity: float = 1.0

    def __post_init__(self):
        alpha = np.array(self.displacements, dtype=float).reshape(-1)
        if alpha.size < 1:
            raise ValueError("a channel needs at least one mode")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("displacements must be finite")
        eta = float(self.transmissivity)
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
        alpha.setflags(write=False)
        object.__setattr__(self, "displacements", alpha)
        object.__setattr__(self, "transmissivity", eta)

    @property
    def n_modes(self) -> int:
        return self.displacements.size

    def __eq__(self, other):
        if not isinstance(other, DisplacementChannel):
            return NotImplemented
        return self.transmissivity == other.transmissivity and np.array_equal(
            self.displacements, other.displacements
        )

    def __hash__(self):
        return hash((self.displacements.tobytes(), self.transmissivity))


@dataclass(frozen=True)
class MeasurementOutcome:
    value: float
    scheme: ProbeScheme
    weights: np.ndarray


def unit_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if abs(np.linalg.norm(w) - 1.0) > _UNIT_TOL:
        raise ValueError(f"weights must have unit norm, got norm {np.linalg.norm(w)}")
    return w


def _check_scheme(scheme: ProbeScheme, n_modes: int):
    if not isinstance(scheme, ProbeScheme):
        raise TypeError(f"expected a ProbeScheme, got {scheme!r}")
    if scheme.kind is ProbeKind.SEPARABLE and scheme.allocation.size != n_modes:
        raise ValueError(
            f"allocation has {scheme.allocation.size} entries for a {n_modes}-mode channel"
        )


def sample_weighted(displacements, weights, scheme: ProbeScheme, eta: float,
                    rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Vectorised :func:`measure_weighted` over a stack of channels.

    ``displacements`` has shape ``(n, M)``; one shot is drawn per row.  The
    outcomes are multiplied by ``scale`` (mean ``scale * w . alpha``, standard
    deviation ``scale * precision``), which is how callers use a weight
    vector of arbitrary norm on a unit-norm beam-splitter array.
    """
    alpha = np.atleast_2d(np.asarray(displacements, dtype=float))
    w = unit_weights(weights)
    if alpha.shape[1] != w.size:
        raise ValueError(f"channel has {alpha.shape[1]} modes, weights have {w.size}")
    _check_scheme(scheme, w.size)
    sd = scheme.precision(w, eta)
    return scale * (alpha @ w + sd * rng.standard_normal(alpha.shape[0]))


def measure_weighted(channel: DisplacementChannel, weights, scheme: ProbeScheme,
                     rng: np.random.Generator) -> MeasurementOutcome:
    """One homodyne shot of ``w . alpha`` on ``channel``."""
    w = unit_weights(weights)
    value = sample_weighted(channel.displacements[None, :], w, scheme,
                            channel.transmissivity, rng)[0]
    return MeasurementOutcome(float(value), scheme, w)


def estimate_all_components(channel: DisplacementChannel, scheme: ProbeScheme,
                            rng: np.random.Generator) -> np.ndarray:
    """Full noisy description of ``alpha`` from ``M`` separate homodyne measurements.

    Component ``m`` has standard deviation ``sqrt(eta*g(N_m) + 1 - eta)/2``.
    """
    if scheme.kind is not ProbeKind.SEPARABLE:
        raise ValueError("component-wise estimation needs separable probes")
    _check_scheme(scheme, channel.n_modes)
    eta = channel.transmissivity
    sd = np.sqrt(eta * squeeze_factor(scheme.allocation) + 1.0 - eta) / 2.0
    return channel.displacements + sd * rng.standard_normal(channel.n_modes)


def phase_to_displacement(delta_phi: float, reference_photons: float) -> float:
    """Displacement magnitude ``sqrt(N_v) * dphi / 2`` produced by a small phase
    shift inside a Mach-Zehnder interferometer fed with a coherent reference of
    ``N_v`` photons.  First order in ``dphi``; only meaningful for ``|dphi| << 1``.
    """
    if reference_photons < 0:
        raise ValueError(f"reference photon number must be non-negative, got {reference_photons}")
    return float(np.sqrt(reference_photons) * delta_phi / 2.0)

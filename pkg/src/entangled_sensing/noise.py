"""Measurement-precision formulas for squeezed-probe sensing of a weighted
displacement average.

Conventions
-----------
All precisions are standard deviations of a homodyne outcome in units where
the vacuum (shot-noise) standard deviation is exactly ``1/2``.  A squeezed
vacuum with mean photon number ``n`` reduces the measured-quadrature variance
by ``g(n) = 1/(sqrt(n+1)+sqrt(n))**2 = exp(-2r)`` with ``n = sinh(r)**2``.
Loss with transmissivity ``eta`` mixes in vacuum: variance
``(eta*g + 1 - eta)/4``.

``total_photons = inf`` is accepted everywhere and gives the noiseless limit
``g = 0`` (useful for oracle runs).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ProbeKind",
    "ProbeScheme",
    "squeeze_factor",
    "squeeze_gain",
    "entangled_precision",
    "separable_precision",
    "optimize_allocation",
]


def _check_photons(n):
    n = np.asarray(n, dtype=float)
    if np.any(np.isnan(n)) or np.any(n < 0):
        raise ValueError(f"mean photon number must be non-negative, got {n}")
    return n


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    return eta


def squeeze_factor(n):
    """Variance reduction ``g(n) = 1/(sqrt(n+1)+sqrt(n))**2`` of a squeezed vacuum.

    Works elementwise on arrays. ``g(0) = 1`` and ``g(inf) = 0``.
    """
    n = _check_photons(n)
    with np.errstate(over="ignore"):
        out = 1.0 / (np.sqrt(n + 1.0) + np.sqrt(n)) ** 2
    return float(out) if out.ndim == 0 else out


def squeeze_gain(n):
    """Anti-squeezing factor ``exp(2r) = (sqrt(n+1)+sqrt(n))**2`` for ``n = sinh(r)**2``.

    Written without ``sinh``/``exp`` so it stays accurate for large ``n``.
    """
    n = _check_photons(n)
    out = (np.sqrt(n + 1.0) + np.sqrt(n)) ** 2
    return float(out) if out.ndim == 0 else out


def entangled_precision(total_photons: float, eta: float = 1.0) -> float:
    """Standard deviation of ``w . alpha`` measured with one squeezed resource
    distributed over all sensors: ``sqrt(eta*g(N_S) + 1 - eta)/2``."""
    eta = _check_eta(eta)
    g = squeeze_factor(total_photons)
    return float(np.sqrt(eta * g + 1.0 - eta) / 2.0)


def separable_precision(weights, allocation, eta: float = 1.0) -> float:
    """Standard deviation of ``w . alpha`` from independent squeezed probes.

    ``allocation[m]`` is the mean photon number spent on sensor ``m``; this
    function evaluates a fixed allocation, see :func:`optimize_allocation`
    for the optimum one.
    """
    eta = _check_eta(eta)
    w = np.asarray(weights, dtype=float)
    alloc = np.asarray(allocation, dtype=float)
    if w.shape != alloc.shape:
        raise ValueError(f"weights {w.shape} and allocation {alloc.shape} differ in shape")
    g = squeeze_factor(alloc)
    return float(np.sqrt(eta * np.sum(w**2 * g) + 1.0 - eta) / 2.0)


def _photons_at_slope(slope):
    # Mean photon number where -g'(n) == slope; with s = exp(2r), -g' = 4/(s^2 - 1).
    s = np.sqrt(1.0 + 4.0 / slope)
    return (s + 1.0 / s - 2.0) / 4.0


def optimize_allocation(weights, total_photons: float, eta: float = 1.0):
    """Split ``total_photons`` over the sensors to minimise :func:`separable_precision`.

    The objective ``sum_m w_m^2 g(N_m)`` is convex and decreasing in each
    ``N_m``, so the optimum satisfies ``w_m^2 (-g'(N_m)) = mu`` on every mode
    with non-zero weight.  ``-g'`` has a closed-form inverse, which leaves a
    one-dimensional root find for the multiplier ``mu``.  Zero-weight modes get
    no photons.

    :returns: ``(allocation, precision)``
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    n_total = float(_check_photons(total_photons))
    eta = _check_eta(eta)
    alloc = np.zeros_like(w)
    active = w != 0
    if n_total == 0.0 or not np.any(active):
        if not np.any(active):
            alloc[0] = n_total
        return alloc, separable_precision(w, alloc, eta)
    if not np.isfinite(n_total):
        alloc[active] = np.inf
        return alloc, separable_precision(w, alloc, eta)

    w2 = w[active] ** 2

    def excess(log_mu):
        return np.sum(_photons_at_slope(np.exp(log_mu) / w2)) - n_total

    lo, hi = np.log(w2.max()) - 2.0, np.log(w2.max()) + 2.0
    while excess(lo) < 0:
        lo -= 4.0
    while excess(hi) > 0:
        hi += 4.0
    log_mu = brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    alloc[active] = _photons_at_slope(np.exp(log_mu) / w2)
    if not alloc[active].sum() > 0:
        # budget so small the root find underflows; near N = 0, -g'(N) ~ N^(-1/2)
        alloc[active] = w2**2
    # remove the residual of the root find so the budget is met exactly
    alloc[active] *= n_total / alloc[active].sum()
    return alloc, separable_precision(w, alloc, eta)


class ProbeKind(str, enum.Enum):
    ENTANGLED = "entangled"
    SEPARABLE = "separable"


@dataclass(frozen=True)
class ProbeScheme:
    """Probe configuration: one entangled squeezed resource, or independent
    squeezed probes with an explicit per-sensor photon allocation."""

    kind: ProbeKind
    total_photons: float
    allocation: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        n = float(_check_photons(self.total_photons))
        object.__setattr__(self, "total_photons", n)
        if self.kind is ProbeKind.SEPARABLE:
            if self.allocation is None:
                raise ValueError("separable scheme needs a photon allocation")
            alloc = np.asarray(self.allocation, dtype=float)
            _check_photons(alloc)
            total = alloc.sum()
            if np.isfinite(n) and abs(total - n) > 1e-12 * max(1.0, n):
                raise ValueError(f"allocation sums to {total}, expected {n}")
            alloc.setflags(write=False)
            object.__setattr__(self, "allocation", alloc)

    @classmethod
    def entangled(cls, total_photons: float) -> "ProbeScheme":
        return cls(ProbeKind.ENTANGLED, total_photons)

    @classmethod
    def separable(cls, allocation) -> "ProbeScheme":
        alloc = np.asarray(allocation, dtype=float)
        return cls(ProbeKind.SEPARABLE, float(alloc.sum()), alloc)

    @classmethod
    def separable_equal(cls, total_photons: float, n_modes: int) -> "ProbeScheme":
        """Even split ``N_m = N_S / M``."""
        return cls(ProbeKind.SEPARABLE, total_photons, np.full(n_modes, total_photons / n_modes))

    def precision(self, weights, eta: float = 1.0) -> float:
        """Outcome standard deviation when measuring ``weights . alpha``."""
        if self.kind is ProbeKind.ENTANGLED:
            return entangled_precision(self.total_photons, eta)
        return separable_precision(weights, self.allocation, eta)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "total_photons": self.total_photons}
        if self.allocation is not None:
            d["allocation"] = self.allocation.tolist()
        return d

"""Binary discrimination between the zero displacement and ``alpha``.

Error probabilities for three strategies with a total budget of ``N_S``
photons (lossless channels):

* entangled probe + optimum (Helstrom) measurement,
* entangled probe + homodyne detection with a likelihood-ratio threshold,
* separable squeezed probes with the photon split optimised, Helstrom limit.

Covariance matrices use the convention that the vacuum covariance is the
identity, so a squeezed vacuum has ``Diag[exp(-2r), exp(2r)]`` and the
homodyne outcome of the squeezed quadrature has variance ``exp(-2r)/4``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .channels import sample_weighted
from .noise import ProbeScheme, squeeze_gain

__all__ = [
    "GaussianState",
    "BinaryPriors",
    "gaussian_overlap",
    "helstrom_pure",
    "entangled_helstrom",
    "homodyne_threshold",
    "entangled_homodyne_error",
    "separable_optimum_error",
    "error_exponents",
    "discrimination_sweep",
    "homodyne_monte_carlo",
]


@dataclass(frozen=True)
class BinaryPriors:
    pi0: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValueError(f"prior must lie in [0, 1], got {self.pi0}")

    @property
    def pi1(self) -> float:
        return 1.0 - self.pi0


EQUAL = BinaryPriors()


@dataclass(frozen=True)
class GaussianState:
    """Quadrature means ``(q1, p1, q2, p2, ...)`` and covariance (vacuum = identity)."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float).reshape(-1)
        V = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if V.shape != (mu.size, mu.size) or mu.size % 2:
            raise ValueError("need 2k means and a 2k x 2k covariance")
        if np.max(np.abs(V - V.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", V)

    @classmethod
    def squeezed_vacuum(cls, total_photons: float, n_ancilla: int = 0) -> "GaussianState":
        """Squeezed vacuum (``q`` squeezed) plus ``n_ancilla`` vacuum modes."""
        s = squeeze_gain(total_photons)
        diag = [1.0 / s, s] + [1.0, 1.0] * n_ancilla
        return cls(np.zeros(len(diag)), np.diag(diag))

    def is_pure_gaussian(self, tol: float = 1e-9) -> bool:
        """Uncertainty relation holds with equality (symplectic eigenvalues all 1)."""
        n = self.mean.size // 2
        omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
        nu = np.abs(np.linalg.eigvals(1j * omega @ self.covariance))
        return bool(np.all(np.abs(nu - 1.0) < tol))

    def displaced(self, shift) -> "GaussianState":
        return GaussianState(self.mean + np.asarray(shift, dtype=float), self.covariance)


def gaussian_overlap(mu0, mu1, covariance) -> float:
    """``|<psi0|psi1>|^2 = exp(-(mu1-mu0)^T V^{-1} (mu1-mu0) / 4)`` for two pure
    Gaussian states sharing the covariance ``V``."""
    d = np.asarray(mu1, dtype=float) - np.asarray(mu0, dtype=float)
    V = np.atleast_2d(np.asarray(covariance, dtype=float))
    try:
        c = np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"covariance is not positive definite: {exc}") from None
    z = np.linalg.solve(c, d)
    return float(np.exp(-0.25 * (z @ z)))


def helstrom_pure(overlap_sq, priors: BinaryPriors = EQUAL):
    """Minimum error ``(1 - sqrt(1 - 4 pi0 pi1 F))/2`` for two pure states with
    squared overlap ``F``; rearranged to avoid cancellation when ``F`` is tiny."""
    F = np.asarray(overlap_sq, dtype=float)
    if np.any((F < 0) | (F > 1)):
        raise ValueError("squared overlap must lie in [0, 1]")
    q = 4.0 * priors.pi0 * priors.pi1 * F
    out = 0.5 * q / (1.0 + np.sqrt(1.0 - q))
    return float(out) if out.ndim == 0 else out


def _norm(alpha) -> float:
    return float(np.linalg.norm(np.asarray(alpha, dtype=float)))


def entangled_helstrom(alpha, total_photons: float, priors: BinaryPriors = EQUAL) -> float:
    """Helstrom limit with the resource squeezed vacuum routed onto ``alpha/||alpha||``:
    squared overlap ``exp(-exp(2r) ||alpha||^2)`` with ``sinh(r)^2 = N_S``."""
    s = squeeze_gain(total_photons)
    return helstrom_pure(np.exp(-s * _norm(alpha) ** 2), priors)


def homodyne_threshold(separation: float, sd: float, priors: BinaryPriors = EQUAL) -> float:
    """Likelihood-ratio threshold between ``N(0, sd^2)`` (prior ``pi0``) and
    ``N(separation, sd^2)`` (prior ``pi1``); decide ``alpha`` above it."""
    if priors.pi0 == 0.0:
        return -np.inf
    if priors.pi1 == 0.0:
        return np.inf
    return separation / 2.0 + sd**2 * np.log(priors.pi0 / priors.pi1) / separation


def entangled_homodyne_error(alpha, total_photons: float, priors: BinaryPriors = EQUAL) -> float:
    """Homodyne detection of the squeezed quadrature followed by a threshold.

    Outcomes are ``N(0, exp(-2r)/4)`` or ``N(||alpha||, exp(-2r)/4)``.  At equal
    priors this is ``Erfc(||alpha|| / (sqrt(2) exp(-r))) / 2``.
    """
    a = _norm(alpha)
    if a == 0.0:
        return min(priors.pi0, priors.pi1)
    sd = 0.5 / np.sqrt(squeeze_gain(total_photons))
    t = homodyne_threshold(a, sd, priors)
    return float(priors.pi0 * ndtr(-t / sd) + priors.pi1 * ndtr((t - a) / sd))


def _gain_at_slope(slope):
    # d exp(2r)/dN = 4 s^2/(s^2 - 1) with s = exp(2r); invert for s, return N.
    s = np.sqrt(1.0 + 4.0 / (slope - 4.0))
    return (s + 1.0 / s - 2.0) / 4.0


def separable_optimum_error(alpha, total_photons: float, priors: BinaryPriors = EQUAL):
    """Helstrom limit for independent squeezed probes with the best photon split.

    Minimises ``exp(-sum_m exp(2 r_m) alpha_m^2)`` subject to
    ``sum_m sinh(r_m)^2 = N_S``.  ``exp(2r)`` is concave in ``N``, so the
    stationarity condition ``alpha_m^2 d exp(2r_m)/dN_m = mu`` on the active
    modes gives the optimum; ``mu`` is found by a scalar root search.

    :returns: ``(error, allocation)``
    """
    a2 = np.asarray(alpha, dtype=float).reshape(-1) ** 2
    n_total = float(total_photons)
    if n_total < 0:
        raise ValueError("mean photon number must be non-negative")
    alloc = np.zeros_like(a2)
    active = a2 > 0
    if np.any(active) and n_total > 0:
        w = a2[active]
        # marginal gain falls from +inf to 4*alpha_m^2, so mu > 4*max(alpha^2)

        def excess(log_t):
            mu = 4.0 * w.max() * (1.0 + np.exp(log_t))
            with np.errstate(divide="ignore"):
                n = np.where(mu / w > 4.0, _gain_at_slope(mu / w), np.inf)
            return np.sum(n) - n_total

        lo, hi = -2.0, 2.0
        while excess(lo) < 0:
            lo -= 4.0
        while excess(hi) > 0:
            hi += 4.0
        log_t = brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        mu = 4.0 * w.max() * (1.0 + np.exp(log_t))
        alloc[active] = _gain_at_slope(mu / w)
        if not alloc.sum() > 0:
            # underflow at tiny budgets; near N = 0 the marginal gain ~ N^(-1/2)
            alloc[active] = w**2
        alloc *= n_total / alloc.sum()
    elif n_total > 0:
        alloc[:] = n_total / alloc.size
    exponent = float(np.sum(squeeze_gain(alloc) * a2))
    return helstrom_pure(np.exp(-exponent), priors), alloc


def error_exponents(alpha: float, n_modes: int, total_photons: float):
    """Large-``N_S`` error exponents for ``alpha_m = alpha`` on all ``M`` modes:
    ``(classical, entangled homodyne, entangled optimum)``."""
    base = total_photons * alpha**2
    return 4.0 * base, 2.0 * n_modes * base, 4.0 * n_modes * base


def discrimination_sweep(alpha, photon_numbers, priors: BinaryPriors = EQUAL) -> np.ndarray:
    """Rows ``(N_S, classical optimum, entangled homodyne, entangled Helstrom)``."""
    rows = []
    for n in photon_numbers:
        rows.append((float(n), separable_optimum_error(alpha, n, priors)[0],
                     entangled_homodyne_error(alpha, n, priors),
                     entangled_helstrom(alpha, n, priors)))
    return np.array(rows)


def homodyne_monte_carlo(alpha, total_photons: float, trials: int, rng: np.random.Generator,
                         priors: BinaryPriors = EQUAL) -> float:
    """Simulated error of the entangled homodyne receiver.

    Each trial picks a hypothesis by the priors, takes one shot of the
    weighted displacement with weights ``alpha/||alpha||`` and applies
    :func:`homodyne_threshold`.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    a = _norm(alpha)
    if a == 0.0:
        raise ValueError("need a non-zero displacement")
    w = alpha / a
    scheme = ProbeScheme.entangled(total_photons)
    hyp = rng.random(trials) >= priors.pi0  # True -> alpha present
    disp = np.where(hyp[:, None], alpha[None, :], 0.0)
    f = sample_weighted(disp, w, scheme, 1.0, rng)
    t = homodyne_threshold(a, scheme.precision(w), priors)
    return float(np.mean((f > t) != hyp))

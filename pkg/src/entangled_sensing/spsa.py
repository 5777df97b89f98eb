"""Simultaneous perturbation stochastic approximation (SPSA).

Each iteration perturbs every coordinate at once by ``+-c_k`` (Rademacher
signs), spends two objective evaluations and steps along the resulting
gradient estimate.  Gains follow the usual power-law schedules::

    a_k = a / (k + 1 + A) ** alpha
    c_k = c / (k + 1) ** gamma
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["SpsaConfig", "SpsaStep", "SpsaResult", "SpsaError", "spsa_minimize", "calibrate_step_gain"]


class SpsaError(FloatingPointError):
    """Objective returned a non-finite value."""


@dataclass(frozen=True)
class SpsaConfig:
    a: float
    c: float
    max_steps: int
    A: Optional[float] = None  # None -> 0.1 * max_steps
    alpha: float = 0.602
    gamma: float = 0.101
    seed: int = 0

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("SPSA gains a and c must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if self.A is None:
            object.__setattr__(self, "A", 0.1 * self.max_steps)
        if self.A < 0:
            raise ValueError("stability offset A must be non-negative")
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0.5, 1], got {self.alpha}")
        if not 0.0 < self.gamma <= 0.5:
            raise ValueError(f"gamma must lie in (0, 0.5], got {self.gamma}")
        if self.alpha - 2 * self.gamma <= 0:
            raise ValueError("need alpha - 2*gamma > 0")

    def step_gain(self, k: int) -> float:
        return self.a / (k + 1 + self.A) ** self.alpha

    def perturbation_gain(self, k: int) -> float:
        return self.c / (k + 1) ** self.gamma

    def replace(self, **changes) -> "SpsaConfig":
        d = asdict(self)
        d.update(changes)
        return SpsaConfig(**d)


@dataclass(frozen=True)
class SpsaStep:
    step: int
    x: np.ndarray
    value: float  # mean of the two objective samples taken at this step


@dataclass
class SpsaResult:
    x: np.ndarray
    trace: list
    n_evaluations: int

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.trace])

    def to_csv(self, path):
        d = self.x.size
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", *[f"x{i}" for i in range(d)], "objective"])
            for s in self.trace:
                out.writerow([s.step, *map(repr, s.x.tolist()), repr(s.value)])


def _finite(value, k):
    value = float(value)
    if not np.isfinite(value):
        raise SpsaError(f"objective returned {value} at step {k}")
    return value


def spsa_minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    config: SpsaConfig,
    rng: Optional[np.random.Generator] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    before_step: Optional[Callable[[int], None]] = None,
) -> SpsaResult:
    """Minimise a noisy ``objective`` with ``config.max_steps`` SPSA iterations.

    :param rng: source of the perturbation signs; defaults to ``config.seed``.
    :param project: applied to the iterate after every update (e.g. renormalise).
    :param before_step: called with the step index before the two evaluations,
        so the caller can fix per-step randomness (e.g. pick the training channel)
        shared by both sides of the perturbation.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    x = np.array(x0, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("x0 must be non-empty")
    trace = []
    n_eval = 0
    for k in range(config.max_steps):
        if before_step is not None:
            before_step(k)
        ck = config.perturbation_gain(k)
        delta = rng.choice((-1.0, 1.0), size=x.size)
        f_plus = _finite(objective(x + ck * delta), k)
        f_minus = _finite(objective(x - ck * delta), k)
        n_eval += 2
        # 1/delta == delta for +-1 entries
        x = x - config.step_gain(k) * (f_plus - f_minus) / (2.0 * ck) * delta
        if project is not None:
            x = np.asarray(project(x), dtype=float)
        trace.append(SpsaStep(k, x.copy(), 0.5 * (f_plus + f_minus)))
    return SpsaResult(x, trace, n_eval)


def calibrate_step_gain(objective, x0, c: float, A: float, alpha: float = 0.602,
                        target_step: float | None = None, n_samples: int = 20,
                        rng: Optional[np.random.Generator] = None,
                        before_step: Optional[Callable[[int], None]] = None) -> float:
    """Pick ``a`` so the first update moves each coordinate by about ``target_step``.

    ``target_step`` defaults to 5% of ``||x0||``.  The gradient magnitude is the
    mean absolute SPSA estimate over ``n_samples`` perturbations at ``x0``.
    """
    rng = np.random.default_rng() if rng is None else rng
    x0 = np.asarray(x0, dtype=float)
    if target_step is None:
        target_step = 0.05 * float(np.linalg.norm(x0))
    mags = []
    for i in range(n_samples):
        if before_step is not None:
            before_step(i)
        delta = rng.choice((-1.0, 1.0), size=x0.size)
        diff = objective(x0 + c * delta) - objective(x0 - c * delta)
        mags.append(abs(diff) / (2 * c))
    g = float(np.mean(mags))
    if g == 0.0 or target_step == 0.0:
        raise ValueError("cannot calibrate the step gain: flat objective or zero target")
    return target_step * (1 + A) ** alpha / g

"""Damped Newton, predictor-corrector path tracking and the start pool."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import JacobianSingular, NoConvergence


@dataclass(frozen=True)
class SolverConfig:
    max_newton_iters: int = 50
    newton_tol: float = 1e-12
    num_starts: int = 16
    homotopy_step_initial: float = 0.05
    homotopy_step_min: float = 1e-7
    rng_seed: int = 0
    dedup_radius: float = 1e-6
    workers: int = 1
    monodromy_patience: int = 3
    monodromy_max_rounds: int = 30

    def __post_init__(self):
        if not (0 < self.homotopy_step_min < self.homotopy_step_initial <= 0.5):
            raise ValueError("need 0 < homotopy_step_min < homotopy_step_initial <= 0.5")
        if self.newton_tol <= 0 or self.dedup_radius <= 0:
            raise ValueError("tolerances must be positive")
        if self.monodromy_patience < 0 or self.monodromy_max_rounds < 0:
            raise ValueError("monodromy settings must be nonnegative")
        if self.num_starts < 1 or self.workers < 1 or self.max_newton_iters < 1:
            raise ValueError("num_starts, workers and max_newton_iters must be >= 1")


COND_LIMIT = 1e14


def newton(residual: Callable[[np.ndarray], np.ndarray],
           jacobian: Callable[[np.ndarray], np.ndarray],
           x0: np.ndarray, tol: float, max_iter: int,
           scale: Callable[[np.ndarray], float] = lambda x: 1.0) -> np.ndarray:
    """Damped Newton until ``max|residual| < tol * scale(x)``.

    Backtracking halves the step while the residual norm does not decrease.
    """
    x = np.array(x0, dtype=complex)
    r = residual(x)
    for _ in range(max_iter + 1):
        if np.max(np.abs(r), initial=0.0) < tol * scale(x):
            return x
        J = jacobian(x)
        if np.linalg.cond(J) > COND_LIMIT:
            raise JacobianSingular("Jacobian is numerically singular",
                                   residual=float(np.max(np.abs(r))))
        dx = np.linalg.solve(J, -r)
        nr = np.linalg.norm(r)
        alpha = 1.0
        for _ in range(30):
            x_try = x + alpha * dx
            r_try = residual(x_try)
            if np.linalg.norm(r_try) < nr or alpha < 1e-6:
                break
            alpha *= 0.5
        if np.linalg.norm(r_try) >= nr:
            # stagnation at roundoff level counts as converged if close
            break
        x, r = x_try, r_try
    if np.max(np.abs(r), initial=0.0) < tol * scale(x):
        return x
    raise NoConvergence("Newton iteration did not reach tolerance",
                        residual=float(np.max(np.abs(r))))


def track(H: Callable[[np.ndarray, float], np.ndarray],
          Hx: Callable[[np.ndarray, float], np.ndarray],
          Ht: Callable[[np.ndarray, float], np.ndarray],
          x0: np.ndarray, config: SolverConfig, blowup: float = 1e8) -> np.ndarray | None:
    """Follow ``H(x, t) = 0`` from t=0 to t=1.

    Euler predictor, Newton corrector. A failed corrector halves the step;
    the step never grows past ``homotopy_step_initial``. Returns ``None``
    when the step underflows ``homotopy_step_min`` or the path diverges.
    """
    x = np.array(x0, dtype=complex)
    t = 0.0
    h_max = config.homotopy_step_initial
    h = h_max
    streak = 0
    while t < 1.0:
        h = min(h, 1.0 - t)
        try:
            J = Hx(x, t)
            xdot = np.linalg.solve(J, -Ht(x, t))
        except np.linalg.LinAlgError:
            return None
        t_new = t + h
        x_new = x + h * xdot
        ok = False
        prev = np.inf
        for _ in range(4):
            try:
                dx = np.linalg.solve(Hx(x_new, t_new), -H(x_new, t_new))
            except np.linalg.LinAlgError:
                break
            size = np.linalg.norm(dx)
            if size > 0.5 * prev:
                break
            x_new = x_new + dx
            prev = size
            if size < 1e-9 * (1.0 + np.linalg.norm(x_new)):
                ok = True
                break
        if ok:
            x, t = x_new, t_new
            if np.linalg.norm(x) > blowup:
                return None
            streak += 1
            if streak >= 3:
                h = min(2.0 * h, h_max)
                streak = 0
        else:
            streak = 0
            h *= 0.5
            if h < config.homotopy_step_min:
                return None
    return x


def random_triangle(base: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Closed loop ``base -> a -> b -> base`` through random configurations."""
    m = len(base)
    spread = max(1.0, float(np.max(np.abs(base - base.mean()))))
    pts = [base]
    for _ in range(2):
        pts.append(base.mean() + spread * (rng.standard_normal(m) + 1j * rng.standard_normal(m)))
    pts.append(base)
    return pts


def monodromy_rng(config: SolverConfig) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([config.rng_seed, 1]))


def start_seeds(config: SolverConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.rng_seed).spawn(config.num_starts)


def run_pool(fn: Callable, args: list, workers: int) -> list:
    """Map ``fn`` over ``args`` in order; results do not depend on ``workers``."""
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, args))

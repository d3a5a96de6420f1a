"""Regularized Gauss-Newton iteration for the periodic-wave conditions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .residual import ResidualSystem, UnknownVector
from .theta import NotPositiveDefiniteError

log = logging.getLogger(__name__)

L_ZERO_TOL = 1e-8

CONVERGED = "converged"
STALLED = "stalled"
MAX_ITER = "max_iter"
DIVERGED = "diverged"
SINGULAR_TAU = "singular_tau"


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    ``step_tol`` and ``residual_tol`` must both hold to stop as converged.
    ``stall_iter`` stops the loop once that many consecutive iterations fail
    to improve the best residual (None disables it); ``accept_tol`` is the
    residual below which a stalled run still counts as a success.
    ``damping`` scales every step; 1 is the plain method.
    """

    step_tol: float = 1e-14
    residual_tol: float = 1e-14
    max_iter: int = 200
    singular_shift: float = 1e-6
    singular_rtol: float = 1e-10
    divergence_cap: float = 1e8
    stall_iter: int | None = 10
    accept_tol: float = 1e-12
    damping: float = 1.0

    def __post_init__(self):
        for name in ("step_tol", "residual_tol", "singular_rtol", "divergence_cap", "accept_tol", "damping"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.singular_shift < 0:
            raise ValueError("singular_shift must be non-negative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.stall_iter is not None and self.stall_iter < 1:
            raise ValueError("stall_iter must be at least 1 or None")


@dataclass
class SolveReport:
    x_final: UnknownVector
    h_norm: float
    iterations: int
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    status: str = MAX_ITER
    degenerate_l_zero: bool = False
    regularized_steps: int = 0
    x_path: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def success(self, accept_tol: float = 1e-12) -> bool:
        """Converged, or stalled at a residual floor below ``accept_tol``."""
        return self.status == CONVERGED or (self.status == STALLED and self.h_norm <= accept_tol)

    def to_dict(self) -> dict:
        return {
            "x_final": self.x_final.to_dict(),
            "h_norm": self.h_norm,
            "iterations": self.iterations,
            "trace": [list(t) for t in self.trace],
            "status": self.status,
            "degenerate_l_zero": self.degenerate_l_zero,
            "regularized_steps": self.regularized_steps,
        }


def _normal_step(jac, h, cfg: SolverConfig):
    a = jac.T @ jac
    g = jac.T @ h
    eig = np.linalg.eigvalsh(a)
    shifted = eig[0] < cfg.singular_rtol * max(eig[-1], np.finfo(float).tiny)
    if shifted:
        a = a + cfg.singular_shift * np.eye(len(a))
    return np.linalg.solve(a, g), shifted


def _square_step(jac, h, cfg: SolverConfig):
    s = np.linalg.svd(jac, compute_uv=False)
    # same threshold as the normal-matrix test: sigma_min^2 / sigma_max^2
    if s[-1] ** 2 < cfg.singular_rtol * max(s[0] ** 2, np.finfo(float).tiny):
        return _normal_step(jac, h, cfg)
    return np.linalg.solve(jac, h), False


def _iterate(rs: ResidualSystem, x0, cfg: SolverConfig, step) -> SolveReport:
    x = rs._coerce(x0).to_array()
    n = rs.n
    best_x, best_h = x.copy(), np.inf
    trace = []
    path = []
    status = MAX_ITER
    since_best = 0
    n_shift = 0

    for it in range(1, cfg.max_iter + 1):
        try:
            h, jac = rs.evaluate(x)
        except NotPositiveDefiniteError:
            log.info("iteration %d: tau lost positive definiteness", it)
            status = SINGULAR_TAU
            break
        h_norm = float(np.linalg.norm(h))
        if not np.isfinite(h_norm) or not np.all(np.isfinite(jac)):
            status = DIVERGED
            break
        if h_norm < best_h:
            best_x, best_h = x.copy(), h_norm
            since_best = 0
        else:
            since_best += 1

        dx, shifted = step(jac, h, cfg)
        n_shift += int(shifted)
        dx_norm = float(np.linalg.norm(dx))
        trace.append((it, h_norm, dx_norm))
        path.append(x.copy())
        log.debug("iter %3d  |H|=%.3e  |dx|=%.3e%s", it, h_norm, dx_norm, "  (shifted)" if shifted else "")

        if dx_norm < cfg.step_tol and h_norm < cfg.residual_tol:
            status = CONVERGED
            break
        if cfg.stall_iter is not None and since_best >= cfg.stall_iter:
            status = STALLED
            break
        x = x - cfg.damping * dx
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > cfg.divergence_cap:
            status = DIVERGED
            break

    if not np.isfinite(best_h):
        best_h = float("nan")
    x_final = UnknownVector.from_array(best_x, n)
    return SolveReport(
        x_final=x_final,
        h_norm=best_h,
        iterations=len(trace),
        trace=trace,
        status=status,
        degenerate_l_zero=bool(np.all(np.abs(x_final.l) < L_ZERO_TOL)),
        regularized_steps=n_shift,
        x_path=path,
    )


def gauss_newton(rs: ResidualSystem, x0, cfg: SolverConfig | None = None) -> SolveReport:
    """``x <- x - (J^T J)^{-1} J^T H`` with an identity shift when J^T J is near singular.

    The returned report carries the lowest-residual iterate that was evaluated.
    """
    return _iterate(rs, x0, cfg or SolverConfig(), _normal_step)


def newton_square(rs: ResidualSystem, x0, cfg: SolverConfig | None = None) -> SolveReport:
    """Plain Newton ``x <- x - J^{-1} H``; only for square systems (N = 1)."""
    if rs.n_conditions != rs.n_unknowns:
        raise ValueError(
            f"newton_square needs a square system, got {rs.n_conditions} conditions "
            f"for {rs.n_unknowns} unknowns (N={rs.n})")
    return _iterate(rs, x0, cfg or SolverConfig(), _square_step)

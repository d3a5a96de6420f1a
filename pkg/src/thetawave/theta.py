"""Real Riemann theta series with zero characteristic.

    theta(eta) = sum_{m in Z^N} exp(i m.eta - 1/2 m^T tau m)
               = sum_m cos(m.eta) exp(-1/2 m^T tau m)

with phases ``eta_j = omega_j t + l_j z + k_j x + eta0_j``.  The lattice is
truncated to the box ``[-M, M]^N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DERIVATIVE_ORDER = 4
DEFAULT_TAIL_TOL = 1e-20
# Chunk size (points x lattice entries) for the vectorized sums.
_CHUNK = 2_000_000


class NotPositiveDefiniteError(ValueError):
    """tau has a non-positive eigenvalue; carries the offending matrix."""

    def __init__(self, tau, message=None):
        self.tau = np.array(tau, dtype=float)
        super().__init__(message or f"tau is not positive definite:\n{self.tau}")


def check_positive_definite(tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)):
        raise NotPositiveDefiniteError(tau, "tau has non-finite entries")
    try:
        np.linalg.cholesky(tau)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(tau) from None
    return tau


def symmetric_from_upper(diag, upper) -> np.ndarray:
    """Assemble a symmetric matrix from its diagonal and row-major strict upper triangle."""
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    tau = np.diag(diag)
    iu = np.triu_indices(n, 1)
    upper = np.asarray(upper, dtype=float)
    if upper.size != len(iu[0]):
        raise ValueError(f"expected {len(iu[0])} off-diagonal entries for N={n}, got {upper.size}")
    tau[iu] = upper
    tau[iu[1], iu[0]] = upper
    return tau


@dataclass(frozen=True, eq=False)
class ThetaParams:
    k: np.ndarray
    omega: np.ndarray
    l: np.ndarray
    eta0: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.k).size
        for name in ("k", "omega", "l", "eta0"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            if arr.size != n:
                raise ValueError(f"{name} has length {arr.size}, expected {n}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        tau = np.array(self.tau, dtype=float)
        if tau.shape != (n, n):
            raise ValueError(f"tau has shape {tau.shape}, expected {(n, n)}")
        # keep the upper triangle as the source of truth
        tau = np.triu(tau) + np.triu(tau, 1).T
        check_positive_definite(tau)
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def n(self) -> int:
        return self.k.size

    @classmethod
    def build(cls, k, omega, l, tau_diag, tau_off=(), eta0=None) -> "ThetaParams":
        k = np.asarray(k, dtype=float)
        eta0 = np.zeros_like(k) if eta0 is None else eta0
        return cls(k=k, omega=omega, l=l, eta0=eta0, tau=symmetric_from_upper(tau_diag, tau_off))

    def velocity_matrix(self) -> np.ndarray:
        """Rows are d(eta)/d(t, z, x): shape (3, N)."""
        return np.stack([self.omega, self.l, self.k])

    def phases(self, points) -> np.ndarray:
        """Phase vectors for points of shape (..., 3) in (t, z, x) order."""
        points = np.asarray(points, dtype=float)
        return points @ self.velocity_matrix() + self.eta0


@dataclass(frozen=True)
class LatticeTruncation:
    m_max: int
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if int(self.m_max) < 1:
            raise ValueError("m_max must be at least 1")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")
        object.__setattr__(self, "m_max", int(self.m_max))


def choose_truncation(tau, tail_tol: float = DEFAULT_TAIL_TOL, shift: bool = True) -> LatticeTruncation:
    """Smallest M with ``exp(-1/2 lam_min (M - s)^2) < tail_tol``.

    ``s`` is 1/2 when ``shift`` is set (half-integer lattice offsets), else 0.
    """
    tau = check_positive_definite(np.atleast_2d(tau))
    lam = float(np.linalg.eigvalsh(tau)[0])
    s = 0.5 if shift else 0.0
    radius = math.sqrt(2.0 * -math.log(tail_tol) / lam)
    m = max(1, math.floor(radius + s) + 1)
    # guard against the floor landing exactly on the boundary
    while m > 1 and math.exp(-0.5 * lam * (m - 1 - s) ** 2) < tail_tol:
        m -= 1
    return LatticeTruncation(m, tail_tol)


@lru_cache(maxsize=64)
def lattice_box(n: int, lo: int, hi: int) -> np.ndarray:
    """All integer vectors in ``[lo, hi]^n`` in lexicographic order, shape (L, n)."""
    axis = np.arange(lo, hi + 1)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    box = np.stack([g.reshape(-1) for g in grids], axis=1).astype(float)
    box.setflags(write=False)
    return box


def _lattice_terms(p: ThetaParams, trunc: LatticeTruncation):
    m = lattice_box(p.n, -trunc.m_max, trunc.m_max)
    weights = np.exp(-0.5 * np.einsum("li,ij,lj->l", m, p.tau, m))
    return m, weights


def _as_points(point) -> tuple[np.ndarray, bool]:
    pts = np.asarray(point, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 3:
        raise ValueError("points must have 3 coordinates (t, z, x)")
    return pts.reshape(-1, 3), scalar


def theta_partials(p: ThetaParams, points, orders_list, trunc: LatticeTruncation | None = None) -> list[np.ndarray]:
    """Several analytic partial derivatives of theta at once.

    ``orders_list`` holds multi-indices ``(a_t, a_z, a_x)``; each lattice
    term ``cos(m.eta) w_m`` differentiates to
    ``(m.omega)^a_t (m.l)^a_z (m.k)^a_x cos(m.eta + q pi/2) w_m`` with
    ``q = a_t + a_z + a_x``.
    """
    if trunc is None:
        trunc = choose_truncation(p.tau)
    orders_list = [tuple(int(a) for a in o) for o in orders_list]
    for o in orders_list:
        if len(o) != 3 or min(o) < 0:
            raise ValueError(f"bad derivative multi-index {o}")
        if sum(o) > MAX_DERIVATIVE_ORDER:
            raise ValueError(f"derivative order {sum(o)} exceeds {MAX_DERIVATIVE_ORDER}")
    pts, scalar = _as_points(points)
    m, w = _lattice_terms(p, trunc)
    rates = m @ p.velocity_matrix().T  # (L, 3): m.omega, m.l, m.k
    factors = [w * np.prod(rates ** np.array(o), axis=1) for o in orders_list]

    out = [np.empty(len(pts)) for _ in orders_list]
    step = max(1, _CHUNK // len(m))
    for start in range(0, len(pts), step):
        sl = slice(start, start + step)
        phase = p.phases(pts[sl]) @ m.T  # (P, L)
        cos, sin = np.cos(phase), np.sin(phase)
        for res, o, f in zip(out, orders_list, factors):
            q = sum(o) % 4
            # d^q/dphi^q cos = cos, -sin, -cos, sin
            base = (cos, sin, cos, sin)[q]
            sign = (1.0, -1.0, -1.0, 1.0)[q]
            res[sl] = sign * (base @ f)
    if scalar:
        return [float(r[0]) for r in out]
    return out


def theta_eval(p: ThetaParams, point, trunc: LatticeTruncation | None = None):
    """Value of the truncated series at one point or an array of points."""
    return theta_partials(p, point, [(0, 0, 0)], trunc)[0]


def theta_partial(p: ThetaParams, point, orders, trunc: LatticeTruncation | None = None):
    """Partial derivative of order ``orders = (a_t, a_z, a_x)``, total at most 4."""
    return theta_partials(p, point, [orders], trunc)[0]

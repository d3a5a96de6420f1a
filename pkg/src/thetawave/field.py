"""Physical fields from a theta solution, and a pointwise PDE check.

Fields follow ``u = u0 + (ln theta)_xx`` and ``v = v0 + (ln theta)_xz``.

The residual oracle applies ``F(D) theta . theta`` directly through the
double lattice sum

    sum_{m,n} F(i (m - n).(omega, l, k)) exp(i (m + n).eta - 1/2 (m'tau m + n'tau n)),

which shares no code path with the parity-reduced conditions in
:mod:`thetawave.residual`.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bilinear import BilinearForm, BilinearSystem
from .residual import GivenParams
from .theta import (
    LatticeTruncation,
    ThetaParams,
    choose_truncation,
    lattice_box,
    theta_partials,
)

ORACLE_TAIL_TOL = 1e-16


class NonPositiveThetaError(ValueError):
    def __init__(self, point, value):
        self.point = tuple(float(v) for v in point)
        self.value = float(value)
        super().__init__(f"theta = {self.value:.3e} <= 0 at (t, z, x) = {self.point}")


@dataclass(frozen=True)
class GridSpec:
    """Sampling axes as ``(min, max, count)``; z and the phase offsets are fixed."""

    x: tuple[float, float, int] = (0.0, 20.0, 201)
    t: tuple[float, float, int] = (0.0, 50.0, 201)
    z: float = 0.0

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.x[0], self.x[1], int(self.x[2])),
                np.linspace(self.t[0], self.t[1], int(self.t[2])))

    def to_dict(self) -> dict:
        return {"x": list(self.x), "t": list(self.t), "z": self.z}


@dataclass
class WaveGrid:
    """``u[i, j]`` and ``v[i, j]`` are the fields at ``(x[i], t[j])``."""

    x: np.ndarray
    t: np.ndarray
    z: float
    u: np.ndarray
    v: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.x), len(self.t))
        if self.u.shape != shape or self.v.shape != shape:
            raise ValueError(f"field arrays must have shape {shape}")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValueError("non-finite field values")


def _fields_from_partials(th, th_x, th_xx, th_z, th_xz, u0, v0):
    u = u0 + (th_xx * th - th_x ** 2) / th ** 2
    v = v0 + (th_xz * th - th_x * th_z) / th ** 2
    return u, v


def sample_fields(p: ThetaParams, given: GivenParams, points, trunc: LatticeTruncation | None = None):
    """``(u, v)`` at an array of (t, z, x) points; raises if theta is not positive."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    th, th_x, th_xx, th_z, th_xz = theta_partials(
        p, points, [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 0), (0, 1, 1)], trunc)
    bad = np.flatnonzero(th <= 0)
    if bad.size:
        raise NonPositiveThetaError(points[bad[0]], th[bad[0]])
    return _fields_from_partials(th, th_x, th_xx, th_z, th_xz, given.u0, given.v0)


def reconstruct(p: ThetaParams, given: GivenParams, grid: GridSpec | None = None,
                trunc: LatticeTruncation | None = None) -> WaveGrid:
    grid = grid or GridSpec()
    xs, ts = grid.axes()
    xx, tt = np.meshgrid(xs, ts, indexing="ij")
    pts = np.stack([tt.ravel(), np.full(tt.size, grid.z), xx.ravel()], axis=1)
    u, v = sample_fields(p, given, pts, trunc)
    meta = {
        "theta": theta_to_dict(p),
        "given": given.to_dict(),
        "grid": grid.to_dict(),
    }
    return WaveGrid(xs, ts, grid.z, u.reshape(xx.shape), v.reshape(xx.shape), meta)


def theta_to_dict(p: ThetaParams) -> dict:
    return {"k": p.k.tolist(), "omega": p.omega.tolist(), "l": p.l.tolist(),
            "eta0": p.eta0.tolist(), "tau": p.tau.tolist()}


# -- pointwise bilinear residual -------------------------------------------

def oracle_lattice(tau, tail_tol: float = ORACLE_TAIL_TOL, trunc: LatticeTruncation | None = None) -> np.ndarray:
    """Lattice points with Gaussian weight ``exp(-1/2 m'tau m) >= tail_tol``."""
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    if trunc is None:
        trunc = choose_truncation(tau, tail_tol, shift=False)
    else:
        tail_tol = trunc.tail_tol
    box = lattice_box(len(tau), -trunc.m_max, trunc.m_max)
    q = 0.5 * np.einsum("li,ij,lj->l", box, tau, box)
    return box[q <= -math.log(tail_tol)]


def _pair_matrix(form: BilinearForm, m: np.ndarray, rates: np.ndarray, c: float) -> np.ndarray:
    diff = m[:, None, :] - m[None, :, :]
    return form.eval_imag(diff @ rates, c)


def bilinear_residual_oracle(system: BilinearSystem, p: ThetaParams, c1: float, c2: float, point,
                             trunc: LatticeTruncation | None = None, return_imag: bool = False):
    """``(F1(D) theta.theta, F2(D) theta.theta)`` at one point or an array of points.

    The complex double sum is formed in full and its real part returned;
    with ``return_imag`` the largest imaginary magnitude is returned too.
    """
    pts = np.asarray(point, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    m = oracle_lattice(p.tau, trunc=trunc)
    rates = p.velocity_matrix().T  # (N, 3)
    amp = np.exp(1j * (p.phases(pts) @ m.T) - 0.5 * np.einsum("li,ij,lj->l", m, p.tau, m))
    out = []
    imag = 0.0
    for form, c in zip(system.forms, (c1, c2)):
        w = _pair_matrix(form, m, rates, c)
        r = np.einsum("pl,lk,pk->p", amp, w, amp)
        imag = max(imag, float(np.max(np.abs(r.imag))))
        out.append(r.real)
    r1, r2 = out
    if scalar:
        r1, r2 = float(r1[0]), float(r2[0])
    return (r1, r2, imag) if return_imag else (r1, r2)


@dataclass
class OracleResult:
    max_normalized: float
    max_imag_normalized: float
    n_points: int
    r1: np.ndarray = field(repr=False)
    r2: np.ndarray = field(repr=False)
    theta_sq: np.ndarray = field(repr=False)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_normalized < tol

    def to_dict(self) -> dict:
        return {"max_normalized": self.max_normalized,
                "max_imag_normalized": self.max_imag_normalized,
                "n_points": self.n_points}


def random_points(n: int, rng_seed: int = 0, t_range=(0.0, 10.0), x_range=(0.0, 50.0), z: float = 0.0) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    t = rng.uniform(*t_range, size=n)
    x = rng.uniform(*x_range, size=n)
    return np.stack([t, np.full(n, float(z)), x], axis=1)


def oracle_check(system: BilinearSystem, p: ThetaParams, c1: float, c2: float, points=None,
                 trunc: LatticeTruncation | None = None) -> OracleResult:
    """Largest ``|F_i(D) theta.theta| / theta^2`` over the points (default: 100 random ones)."""
    if points is None:
        points = random_points(100)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = oracle_lattice(p.tau, trunc=trunc)
    rates = p.velocity_matrix().T
    amp = np.exp(1j * (p.phases(points) @ m.T) - 0.5 * np.einsum("li,ij,lj->l", m, p.tau, m))
    theta = amp.sum(axis=1)
    th2 = np.abs(theta) ** 2
    res = []
    worst_imag = 0.0
    for form, c in zip(system.forms, (c1, c2)):
        r = np.einsum("pl,lk,pk->p", amp, _pair_matrix(form, m, rates, c), amp)
        worst_imag = max(worst_imag, float(np.max(np.abs(r.imag) / th2)))
        res.append(r.real)
    worst = float(max(np.max(np.abs(res[0]) / th2), np.max(np.abs(res[1]) / th2)))
    return OracleResult(worst, worst_imag, len(points), res[0], res[1], th2)


# -- export ------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_grid(g: WaveGrid, path, fmt: str = "csv", params: dict | None = None) -> list[Path]:
    """Write a grid to disk and return the files written.

    ``csv`` is long format with header ``x,t,u,v`` (x varies slowest);
    ``matrix`` writes ``<stem>.u.csv`` and ``<stem>.v.csv`` with t along
    columns and x down rows, the first row/column holding the axes.
    A ``<stem>.json`` with the solution parameters is written alongside.
    """
    path = Path(path)
    written = []
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x", "t", "u", "v"])
                for i, xv in enumerate(g.x):
                    for j, tv in enumerate(g.t):
                        w.writerow([_fmt(xv), _fmt(tv), _fmt(g.u[i, j]), _fmt(g.v[i, j])])
            written.append(path)
        elif fmt == "matrix":
            for name, arr in (("u", g.u), ("v", g.v)):
                target = path.with_name(f"{path.stem}.{name}.csv")
                with open(target, "w", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["x\\t"] + [_fmt(tv) for tv in g.t])
                    for i, xv in enumerate(g.x):
                        w.writerow([_fmt(xv)] + [_fmt(val) for val in arr[i]])
                written.append(target)
        else:
            raise ValueError(f"unknown grid format {fmt!r}")
        meta = dict(g.metadata)
        if params:
            meta.update(params)
        meta_path = path.with_suffix(".json")
        with open(meta_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
        written.append(meta_path)
    except OSError as exc:
        raise OSError(f"failed to write grid to {path}: {exc}") from exc
    return written


def read_grid_csv(path) -> WaveGrid:
    """Inverse of ``export_grid(..., fmt="csv")``."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "t", "u", "v"]:
        raise ValueError(f"{path}: missing x,t,u,v header")
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, 4)
    xs = np.unique(data[:, 0])
    ts = np.unique(data[:, 1])
    if len(xs) * len(ts) != len(data):
        raise ValueError(f"{path}: rows do not form a full x-t grid")
    u = data[:, 2].reshape(len(xs), len(ts))
    v = data[:, 3].reshape(len(xs), len(ts))
    meta = {}
    meta_path = path.with_suffix(".json")
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
    return WaveGrid(xs, ts, float(meta.get("grid", {}).get("z", 0.0)), u, v, meta)

"""Lattice-sum conditions for a theta function to solve a coupled bilinear system.

For every parity vector ``mu`` in {0,1}^N and each form ``F`` (constant ``c``)
the condition reads

    sum_m [F(2i d.omega, 2i d.l, 2i d.k) + c] exp(-d^T tau d) = 0,
    d = m - mu/2,

which gives 2^(N+1) real equations in the N + 2 + N(N+1)/2 unknowns
``(omega, l, tau_offdiag, c1, c2)``.  Note that the Gaussian weight here has
no 1/2, unlike the theta series itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bilinear import BilinearSystem
from .theta import (
    DEFAULT_TAIL_TOL,
    LatticeTruncation,
    ThetaParams,
    check_positive_definite,
    choose_truncation,
    lattice_box,
    symmetric_from_upper,
)

MAX_WAVES = 6
# Upper bound on M for adaptive truncation, per N; keeps box sizes bounded
# when tau drifts toward singularity during an iteration.
_ADAPTIVE_M_CAP = {1: 400, 2: 80, 3: 30, 4: 14, 5: 8, 6: 5}


def n_unknowns(n: int) -> int:
    return n + 2 + n * (n + 1) // 2


def n_conditions(n: int) -> int:
    return 2 ** (n + 1)


@dataclass(frozen=True, eq=False)
class UnknownVector:
    omega: np.ndarray
    l: np.ndarray
    tau_off: np.ndarray
    c1: float
    c2: float

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(-1)
        n = omega.size
        l = np.array(self.l, dtype=float).reshape(-1)
        tau_off = np.array(self.tau_off, dtype=float).reshape(-1)
        if l.size != n or tau_off.size != n * (n - 1) // 2:
            raise ValueError(f"inconsistent unknown sizes for N={n}: l={l.size}, tau_off={tau_off.size}")
        for name, arr in (("omega", omega), ("l", l), ("tau_off", tau_off)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "c1", float(self.c1))
        object.__setattr__(self, "c2", float(self.c2))

    @property
    def n(self) -> int:
        return self.omega.size

    def __eq__(self, other):
        if not isinstance(other, UnknownVector):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.to_array(), other.to_array())

    __hash__ = None

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.omega, self.l, self.tau_off, [self.c1, self.c2]])

    @classmethod
    def from_array(cls, x, n: int) -> "UnknownVector":
        x = np.asarray(x, dtype=float)
        if x.size != n_unknowns(n):
            raise ValueError(f"expected {n_unknowns(n)} unknowns for N={n}, got {x.size}")
        return cls(x[:n], x[n:2 * n], x[2 * n:-2], x[-2], x[-1])

    def labels(self) -> list[str]:
        return unknown_labels(self.n)

    def to_dict(self) -> dict:
        return {"omega": self.omega.tolist(), "l": self.l.tolist(),
                "tau_off": self.tau_off.tolist(), "c1": self.c1, "c2": self.c2}

    @classmethod
    def from_dict(cls, d: dict) -> "UnknownVector":
        return cls(d["omega"], d["l"], d.get("tau_off", ()), d["c1"], d["c2"])


def unknown_labels(n: int) -> list[str]:
    pairs = [f"tau{j + 1}{k + 1}" for j, k in zip(*np.triu_indices(n, 1))]
    return ([f"omega{j + 1}" for j in range(n)] + [f"l{j + 1}" for j in range(n)]
            + pairs + ["c1", "c2"])


@dataclass(frozen=True, eq=False)
class GivenParams:
    k: np.ndarray
    tau_diag: np.ndarray
    v0: float = 0.0
    u0: float = 0.0

    def __post_init__(self):
        k = np.array(self.k, dtype=float).reshape(-1)
        tau_diag = np.array(self.tau_diag, dtype=float).reshape(-1)
        if k.size != tau_diag.size:
            raise ValueError("k and tau_diag must have the same length")
        if not np.all(tau_diag > 0):
            raise ValueError("tau_diag entries must be positive")
        if not 1 <= k.size <= MAX_WAVES:
            raise ValueError(f"N must be between 1 and {MAX_WAVES}")
        for name, arr in (("k", k), ("tau_diag", tau_diag)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "v0", float(self.v0))
        object.__setattr__(self, "u0", float(self.u0))

    @property
    def n(self) -> int:
        return self.k.size

    def to_dict(self) -> dict:
        return {"k": self.k.tolist(), "tau_diag": self.tau_diag.tolist(), "v0": self.v0, "u0": self.u0}

    @classmethod
    def from_dict(cls, d: dict) -> "GivenParams":
        return cls(d["k"], d["tau_diag"], d.get("v0", 0.0), d.get("u0", 0.0))


def assemble_tau(given: GivenParams, x: UnknownVector) -> np.ndarray:
    return symmetric_from_upper(given.tau_diag, x.tau_off)


def theta_params(given: GivenParams, x: UnknownVector, eta0=None) -> ThetaParams:
    return ThetaParams.build(given.k, x.omega, x.l, given.tau_diag, x.tau_off, eta0=eta0)


def mu_vectors(n: int) -> np.ndarray:
    """All parity vectors in binary counting order: (0,..,0), (0,..,1), ..."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)


@dataclass(frozen=True, eq=False)
class ResidualSystem:
    """The 2^(N+1) conditions for one equation and one set of given parameters.

    ``trunc=None`` picks M from the assembled tau on every evaluation.
    """

    system: BilinearSystem
    given: GivenParams
    trunc: LatticeTruncation | None = None
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        assert len(self.mu_list) * 2 == n_conditions(self.n)
        assert self.n_unknowns == n_unknowns(self.n)

    @property
    def n(self) -> int:
        return self.given.n

    @cached_property
    def mu_list(self) -> np.ndarray:
        return mu_vectors(self.n)

    @property
    def n_conditions(self) -> int:
        return n_conditions(self.n)

    @property
    def n_unknowns(self) -> int:
        return n_unknowns(self.n)

    def truncation_for(self, tau) -> LatticeTruncation:
        if self.trunc is not None:
            return self.trunc
        # the condition weight exp(-d'tau d) is the theta weight for 2*tau
        t = choose_truncation(2.0 * np.asarray(tau), self.tail_tol, shift=True)
        cap = _ADAPTIVE_M_CAP[self.n]
        return t if t.m_max <= cap else LatticeTruncation(cap, self.tail_tol)

    def _coerce(self, x) -> UnknownVector:
        if isinstance(x, UnknownVector):
            if x.n != self.n:
                raise ValueError(f"unknown vector has N={x.n}, system has N={self.n}")
            return x
        return UnknownVector.from_array(x, self.n)

    def shifted_lattice(self, mu, m_max: int) -> np.ndarray:
        """d = m - mu/2 over the box m_j in [-M, M + mu_j]."""
        box = lattice_box(self.n, -m_max, m_max + 1)
        mu = np.asarray(mu, dtype=float)
        keep = np.all(box <= m_max + mu, axis=1)
        return box[keep] - mu / 2

    def _blocks(self, x: UnknownVector, jacobian: bool):
        tau = check_positive_definite(assemble_tau(self.given, x))
        trunc = self.truncation_for(tau)
        rates = np.stack([x.omega, x.l, self.given.k], axis=1)  # (N, 3)
        iu = np.triu_indices(self.n, 1)
        consts = (x.c1, x.c2)
        nx = self.n_unknowns
        h = np.zeros((2, len(self.mu_list)))
        jac = np.zeros((2, len(self.mu_list), nx)) if jacobian else None
        n = self.n
        for a, mu in enumerate(self.mu_list):
            d = self.shifted_lattice(mu, trunc.m_max)
            w = np.exp(-np.einsum("li,ij,lj->l", d, tau, d))
            args = 2.0 * d @ rates  # (L, 3) -> (t, z, x) arguments
            for f, (form, c) in enumerate(zip(self.system.forms, consts)):
                vals = form.eval_imag(args, c)
                h[f, a] = np.sum(vals * w)
                if not jacobian:
                    continue
                grad = form.grad_imag(args)  # dF/d(arg_t, arg_z, arg_x)
                # d arg_t / d omega_j = 2 d_j, likewise for l via arg_z
                jac[f, a, :n] = 2.0 * (grad[:, 0] * w) @ d
                jac[f, a, n:2 * n] = 2.0 * (grad[:, 1] * w) @ d
                # tau_jk appears twice in d^T tau d
                jac[f, a, 2 * n:nx - 2] = -2.0 * ((vals * w) @ (d[:, iu[0]] * d[:, iu[1]]))
                if form.has_constant:
                    jac[f, a, nx - 2 + f] = np.sum(w)
        return h, jac

    def eval_H(self, x) -> np.ndarray:
        """Residual vector: all F1 conditions (mu in binary order), then all F2."""
        h, _ = self._blocks(self._coerce(x), jacobian=False)
        return h.reshape(-1)

    def eval_J(self, x) -> np.ndarray:
        _, jac = self._blocks(self._coerce(x), jacobian=True)
        return jac.reshape(self.n_conditions, self.n_unknowns)

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Residual and Jacobian in one pass over the lattice."""
        h, jac = self._blocks(self._coerce(x), jacobian=True)
        return h.reshape(-1), jac.reshape(self.n_conditions, self.n_unknowns)

    def objective(self, x) -> float:
        h = self.eval_H(x)
        return 0.5 * float(h @ h)

    def residual_norm(self, x) -> float:
        return float(np.linalg.norm(self.eval_H(x)))

    def theta_params(self, x, eta0=None) -> ThetaParams:
        return theta_params(self.given, self._coerce(x), eta0)


def condition_labels(n: int) -> list[str]:
    labels = []
    for f in (1, 2):
        for mu in mu_vectors(n).astype(int):
            labels.append(f"F{f}[mu={''.join(map(str, mu))}]")
    return labels


def describe_counts(n: int) -> str:
    return f"N={n}: {n_conditions(n)} conditions, {n_unknowns(n)} unknowns"


__all__ = [
    "GivenParams",
    "ResidualSystem",
    "UnknownVector",
    "assemble_tau",
    "condition_labels",
    "describe_counts",
    "mu_vectors",
    "n_conditions",
    "n_unknowns",
    "theta_params",
    "unknown_labels",
]

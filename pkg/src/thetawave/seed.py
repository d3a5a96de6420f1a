"""Initial guesses from the single-phase dispersion relations.

For each phase j the pair ``(omega_j, l_j)`` is chosen to satisfy

    F1(i omega, i l, i k_j) + c1_0 = 0,    F2(i omega, i l, i k_j) + c2_0 = 0,

which is what a lone linear wave with wave number ``k_j`` would need.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bilinear import BilinearSystem
from .residual import GivenParams, UnknownVector

log = logging.getLogger(__name__)

DISPERSION = "dispersion"
EXPLICIT = "explicit"
WARM_START = "warm-start"
SEED_MODES = (DISPERSION, EXPLICIT, WARM_START)
MODE_ALIASES = {"published-warm-start": WARM_START}


def normalize_mode(mode: str) -> str:
    return MODE_ALIASES.get(mode, mode)

MAX_STARTS = 100
# once a root is known, stop after this many starts in a row add nothing new
PATIENCE = 16
ROOT_TOL = 1e-10


class DispersionFallbackWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SeedConfig:
    """How to build ``x0``.

    ``explicit`` and ``warm-start`` both read ``x0``; they differ only in
    intent (a user guess versus published values).  ``root`` picks among
    distinct dispersion roots: ``"smallest"`` (smallest |omega|),
    ``"first"`` (first found on the start ladder) or an integer index into
    the roots sorted by |omega|.
    """

    c1_0: float = 1.0
    c2_0: float = 1.0
    tau_off_0: tuple[float, ...] | None = None
    mode: str = DISPERSION
    x0: UnknownVector | None = None
    root: str | int = "smallest"
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", normalize_mode(self.mode))
        if self.mode not in SEED_MODES:
            raise ValueError(f"unknown seed mode {self.mode!r}; expected one of {SEED_MODES}")
        if self.mode != DISPERSION and self.x0 is None:
            raise ValueError(f"seed mode {self.mode!r} needs x0")


@dataclass
class DispersionSeed:
    omega0: np.ndarray
    l0: np.ndarray
    fallback: np.ndarray
    roots: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def any_fallback(self) -> bool:
        return bool(np.any(self.fallback))


def _scalar_terms(form, c):
    """``(weight, e_omega, e_l, e_k)`` tuples of ``F(i d) + c`` for fast scalar use."""
    terms = [(float(w), *map(int, e)) for w, e in zip(form._coeffs * form._signs, form._exps)]
    if form.has_constant and c:
        terms.append((float(c), 0, 0, 0))
    return terms


def _value_and_grad(terms, w, l, k):
    f = gw = gl = 0.0
    for a, ew, el, ek in terms:
        kk = a * k ** ek
        f += kk * w ** ew * l ** el
        if ew:
            gw += kk * ew * w ** (ew - 1) * l ** el
        if el:
            gl += kk * el * w ** ew * l ** (el - 1)
    return f, gw, gl


def _dispersion_residual(terms1, terms2, kj, y):
    f1, a, b = _value_and_grad(terms1, y[0], y[1], kj)
    f2, c, d = _value_and_grad(terms2, y[0], y[1], kj)
    return np.array([f1, f2]), np.array([[a, b], [c, d]])


def _newton2(system, kj, c1, c2, y0, max_iter=60):
    """Damped Newton in (omega, l); returns the root or None."""
    t1, t2 = _scalar_terms(system.f1, c1), _scalar_terms(system.f2, c2)
    kj = float(kj)
    y = np.array(y0, dtype=float)
    r, jac = _dispersion_residual(t1, t2, kj, y)
    norm = np.linalg.norm(r)
    for _ in range(max_iter):
        if norm < ROOT_TOL:
            return y
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, r, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return None
        lam = 1.0
        while lam > 1e-8:
            trial = y - lam * step
            r_t, jac_t = _dispersion_residual(t1, t2, kj, trial)
            n_t = np.linalg.norm(r_t)
            if np.isfinite(n_t) and n_t < norm:
                break
            lam *= 0.5
        else:
            return None
        y, r, jac, norm = trial, r_t, jac_t, n_t
        if np.linalg.norm(y) > 1e8:
            return None
    return y if norm < ROOT_TOL else None


def _start_ladder(kj: float, rng: np.random.Generator):
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            yield np.array([s1 * kj ** 3, s2 * kj])
    while True:
        yield rng.uniform(-10.0, 10.0, size=2)


def dispersion_roots(system: BilinearSystem, kj: float, c1_0: float, c2_0: float,
                     rng_seed: int = 0, max_starts: int = MAX_STARTS,
                     patience: int | None = PATIENCE) -> list[np.ndarray]:
    """Distinct real roots of the single-phase system, in the order found.

    ``patience=None`` always runs all ``max_starts`` starts; ``0`` stops at
    the first root.
    """
    rng = np.random.default_rng(rng_seed)
    roots: list[np.ndarray] = []
    idle = 0
    for count, start in enumerate(_start_ladder(kj, rng)):
        if count >= max_starts:
            break
        y = _newton2(system, kj, c1_0, c2_0, start)
        if y is not None and not any(np.allclose(y, r, rtol=1e-7, atol=1e-9) for r in roots):
            roots.append(y)
            idle = 0
        else:
            idle += 1
        if roots and patience is not None and count >= 3 and idle >= patience:
            break
    return roots


def _pick(roots: list[np.ndarray], choice) -> np.ndarray:
    if choice == "first":
        return roots[0]
    ordered = sorted(roots, key=lambda r: (abs(r[0]), r[0], r[1]))
    if choice == "smallest":
        return ordered[0]
    return ordered[int(choice) % len(ordered)]


def dispersion_seed(system: BilinearSystem, k, c1_0: float = 1.0, c2_0: float = 1.0,
                    root="smallest", rng_seed: int = 0) -> DispersionSeed:
    """Per-phase dispersion roots ``(omega_j^0, l_j^0)``.

    Falls back to ``(k_j^3, k_j)`` with a warning when no real root is found
    from the start ladder.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    omega0 = np.empty_like(k)
    l0 = np.empty_like(k)
    fallback = np.zeros(k.size, dtype=bool)
    found = []
    for j, kj in enumerate(k):
        # decorrelate the random tail of the ladder across phases
        roots = dispersion_roots(system, kj, c1_0, c2_0, rng_seed=rng_seed + j,
                                 patience=0 if root == "first" else PATIENCE)
        found.append(roots)
        if roots:
            omega0[j], l0[j] = _pick(roots, root)
        else:
            omega0[j], l0[j] = kj ** 3, kj
            fallback[j] = True
            warnings.warn(f"no real dispersion root for k={kj:g}; using (k^3, k)",
                          DispersionFallbackWarning, stacklevel=2)
    return DispersionSeed(omega0, l0, fallback, [r for rs in found for r in rs])


def initial_guess(system: BilinearSystem, given: GivenParams, cfg: SeedConfig | None = None) -> UnknownVector:
    cfg = cfg or SeedConfig()
    if cfg.mode != DISPERSION:
        if cfg.x0.n != given.n:
            raise ValueError(f"x0 has N={cfg.x0.n}, given parameters have N={given.n}")
        return cfg.x0
    n = given.n
    seed = dispersion_seed(system, given.k, cfg.c1_0, cfg.c2_0, cfg.root, cfg.rng_seed)
    tau_off = np.zeros(n * (n - 1) // 2) if cfg.tau_off_0 is None else np.asarray(cfg.tau_off_0, float)
    log.debug("dispersion seed omega=%s l=%s", seed.omega0, seed.l0)
    return UnknownVector(seed.omega0, seed.l0, tau_off, cfg.c1_0, cfg.c2_0)

"""Even polynomials in the Hirota D-operators.

A bilinear form ``F(D_t, D_z, D_x) + c`` is stored as a list of monomials
``coeff * T**a * Z**b * X**e`` over the canonical variable order (t, z, x),
plus an optional additive integral-constant slot.  Only even total degrees
are admitted, so evaluating at a purely imaginary vector ``i*d`` gives a
real number: ``(i)**deg == (-1)**(deg // 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

VARIABLES = ("t", "z", "x")


class BilinearFormError(ValueError):
    """Raised for malformed forms (odd degree, duplicates, bad shapes)."""


def _as_coefficient(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    value = float(value)
    if not np.isfinite(value):
        raise BilinearFormError(f"non-finite coefficient {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class BilinearForm:
    """Immutable even polynomial in (D_t, D_z, D_x) with an optional constant slot.

    ``terms`` is a tuple of ``(coefficient, exponents)`` pairs. Coefficients
    are kept as exact fractions and only converted to float on evaluation.
    """

    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]
    has_constant: bool = True
    nvars: int = 3
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    _exps: np.ndarray = field(init=False, repr=False, compare=False)
    _signs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = []
        seen = set()
        for coeff, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise BilinearFormError(
                    f"exponent tuple {exps} has {len(exps)} entries, expected {self.nvars}")
            if any(e < 0 for e in exps):
                raise BilinearFormError(f"negative exponent in {exps}")
            if sum(exps) % 2:
                raise BilinearFormError(f"odd total degree in term {exps}")
            if exps in seen:
                raise BilinearFormError(f"duplicate exponent tuple {exps}")
            seen.add(exps)
            clean.append((_as_coefficient(coeff), exps))
        object.__setattr__(self, "terms", tuple(clean))

        coeffs = np.array([float(c) for c, _ in clean], dtype=float)
        exps = np.array([e for _, e in clean], dtype=int).reshape(len(clean), self.nvars)
        signs = np.where((exps.sum(axis=1) // 2) % 2 == 0, 1.0, -1.0)
        for name, arr in (("_coeffs", coeffs), ("_exps", exps), ("_signs", signs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_terms(cls, terms: Iterable[Sequence], has_constant: bool = True) -> "BilinearForm":
        """Build from ``[(coeff, (e_t, e_z, e_x)), ...]``; zero coefficients are dropped."""
        kept = [(c, tuple(e)) for c, e in terms if _as_coefficient(c) != 0]
        nvars = len(kept[0][1]) if kept else len(VARIABLES)
        return cls(terms=tuple(kept), has_constant=has_constant, nvars=nvars)

    @property
    def max_degree(self) -> int:
        return int(self._exps.sum(axis=1).max()) if len(self.terms) else 0

    def _check_args(self, args: np.ndarray):
        if args.shape[-1] != self.nvars:
            raise BilinearFormError(
                f"argument vector has {args.shape[-1]} entries, form has {self.nvars} variables")

    def _powers(self, args: np.ndarray) -> list[list[np.ndarray]]:
        # powers[v][e] == args[..., v] ** e, by repeated multiplication
        top = int(self._exps.max(initial=0))
        powers = []
        for v in range(self.nvars):
            col = args[..., v]
            row = [np.ones_like(col)]
            for _ in range(top):
                row.append(row[-1] * col)
            powers.append(row)
        return powers

    def _combine(self, args: np.ndarray, weights: np.ndarray, powers=None) -> np.ndarray:
        powers = self._powers(args) if powers is None else powers
        out = np.zeros(args.shape[:-1], dtype=args.dtype)
        for wt, exps in zip(weights, self._exps):
            mono = wt
            for v, e in enumerate(exps):
                if e:
                    mono = mono * powers[v][e]
            out = out + mono
        return out

    def eval_real(self, args, c: float = 0.0):
        """``F(args) + c`` at a real argument vector (or a stack of them)."""
        args = np.asarray(args, dtype=float)
        self._check_args(args)
        value = self._combine(args, self._coeffs)
        if self.has_constant:
            value = value + c
        return value[()] if np.ndim(value) == 0 else value

    def eval_imag(self, d, c: float = 0.0):
        """``F(i*d) + c``, real because every term has even degree."""
        d = np.asarray(d, dtype=float)
        self._check_args(d)
        value = self._combine(d, self._coeffs * self._signs)
        if self.has_constant:
            value = value + c
        return value[()] if np.ndim(value) == 0 else value

    def grad_imag(self, d) -> np.ndarray:
        """Gradient of ``F(i*d)`` with respect to the real vector ``d``.

        Shape ``d.shape``; the constant slot does not contribute.
        """
        d = np.asarray(d, dtype=float)
        self._check_args(d)
        powers = self._powers(d)
        weights = self._coeffs * self._signs
        out = np.zeros(d.shape, dtype=float)
        for wt, exps in zip(weights, self._exps):
            for v, ev in enumerate(exps):
                if not ev:
                    continue
                mono = wt * ev * powers[v][ev - 1]
                for u, eu in enumerate(exps):
                    if u != v and eu:
                        mono = mono * powers[u][eu]
                out[..., v] += mono
        return out

    def eval_complex(self, args, c: complex = 0.0):
        """Plain complex evaluation, used when the sign shortcut does not apply."""
        args = np.asarray(args, dtype=complex)
        self._check_args(args)
        value = self._combine(args, self._coeffs)
        if self.has_constant:
            value = value + c
        return value

    def describe(self) -> str:
        """Readable form such as ``Dx^6 - 5 DtDx^3 - 5 Dt^2 + 9 DzDx + c``."""
        out = ""
        for coeff, exps in self.terms:
            mono = "".join(f"D{v}^{e}" if e > 1 else f"D{v}"
                           for v, e in zip(VARIABLES[: self.nvars], exps) if e)
            mag = abs(coeff)
            body = (mono if mag == 1 else f"{mag} {mono}") if mono else str(mag)
            if not out:
                out = f"-{body}" if coeff < 0 else body
            else:
                out += f" - {body}" if coeff < 0 else f" + {body}"
        if self.has_constant:
            out = f"{out} + c" if out else "c"
        return out or "0"

    def to_config(self) -> dict:
        return {
            "terms": [[str(c), list(e)] for c, e in self.terms],
            "constant": self.has_constant,
        }


@dataclass(frozen=True)
class BilinearSystem:
    """A coupled pair ``F1(D) f.f = 0, F2(D) f.f = 0``."""

    name: str
    f1: BilinearForm
    f2: BilinearForm
    variable_names: tuple[str, ...] = VARIABLES
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.f1.nvars != len(self.variable_names) or self.f2.nvars != len(self.variable_names):
            raise BilinearFormError("forms and variable_names disagree on the number of variables")

    @property
    def forms(self) -> tuple[BilinearForm, BilinearForm]:
        return (self.f1, self.f2)

    def to_config(self) -> dict:
        if self.name in _REGISTRY:
            return {"name": self.name, **dict(self.params)}
        return {"name": self.name, "f1": self.f1.to_config(), "f2": self.f2.to_config()}


def _coupled_ramani(v0: float) -> BilinearSystem:
    # (Dx^6 - 5 Dx^3 Dt - 5 Dt^2 + 9 Dx Dz + c1) f.f = 0
    # (Dz Dt - Dz Dx^3 - 6 v0 Dx^2 + c2) f.f = 0
    f1 = BilinearForm.from_terms([
        (1, (0, 0, 6)),
        (-5, (1, 0, 3)),
        (-5, (2, 0, 0)),
        (9, (0, 1, 1)),
    ])
    f2 = BilinearForm.from_terms([
        (1, (1, 1, 0)),
        (-1, (0, 1, 3)),
        (-6 * _as_coefficient(v0), (0, 0, 2)),
    ])
    return BilinearSystem("coupled-ramani", f1, f2, params=(("v0", float(v0)),))


def _hirota_satsuma(v0: float) -> BilinearSystem:
    # (Dx Dt - 1/4 Dx^4 - 3/4 Dz^2 + c1) f.f = 0
    # (Dz Dt + 1/2 Dz Dx^3 + c2) f.f = 0
    # The published forms carry no constants; the c1, c2 slots are added here
    # so the periodic-wave conditions have free integral constants.
    f1 = BilinearForm.from_terms([
        (1, (1, 0, 1)),
        (Fraction(-1, 4), (0, 0, 4)),
        (Fraction(-3, 4), (0, 2, 0)),
    ])
    f2 = BilinearForm.from_terms([
        (1, (1, 1, 0)),
        (Fraction(1, 2), (0, 1, 3)),
    ])
    return BilinearSystem("hirota-satsuma", f1, f2)


_REGISTRY = {
    "coupled-ramani": _coupled_ramani,
    "hirota-satsuma": _hirota_satsuma,
}


def registered_systems() -> list[str]:
    return sorted(_REGISTRY)


def builtin_system(name: str, v0: float = 0.0) -> BilinearSystem:
    """Look up a registered equation; ``v0`` only affects ``coupled-ramani``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown equation {name!r}; known: {', '.join(registered_systems())}") from None
    return factory(v0)


def custom_system(name: str, f1_terms, f2_terms, f1_constant=True, f2_constant=True) -> BilinearSystem:
    if name in _REGISTRY:
        raise BilinearFormError(f"custom equation may not reuse the builtin name {name!r}")
    return BilinearSystem(
        name,
        BilinearForm.from_terms(f1_terms, f1_constant),
        BilinearForm.from_terms(f2_terms, f2_constant),
    )


def system_from_config(spec: dict) -> BilinearSystem:
    """Inverse of :meth:`BilinearSystem.to_config`."""
    name = spec["name"]
    if "f1" in spec:
        return custom_system(
            name,
            [(c, tuple(e)) for c, e in spec["f1"]["terms"]],
            [(c, tuple(e)) for c, e in spec["f2"]["terms"]],
            spec["f1"].get("constant", True),
            spec["f2"].get("constant", True),
        )
    return builtin_system(name, spec.get("v0", 0.0))

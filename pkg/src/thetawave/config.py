"""Run configuration files (TOML).

Quantities may be written the way the published tables print them:
``"1*2pi/10"``, ``"0.46*2pi"``, ``"0.46 x 2pi"``.  Bare numbers in
``tau_diag`` are read as multiples of 2*pi; bare numbers anywhere else are
taken literally.
"""

from __future__ import annotations

import ast
import copy
import math
import operator
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .bilinear import BilinearSystem, custom_system, builtin_system
from .field import GridSpec
from .residual import GivenParams, UnknownVector
from .seed import MODE_ALIASES, SEED_MODES, SeedConfig, normalize_mode
from .solver import SolverConfig
from .theta import DEFAULT_TAIL_TOL, LatticeTruncation


class ConfigError(ValueError):
    """Bad config content; the message names the offending field."""


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported syntax")


def parse_quantity(value) -> float:
    """Number or arithmetic string such as ``"1*2pi/10"`` -> float."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number or expression, got {value!r}")
    text = value.strip().replace("π", "pi").replace("×", "*").replace("−", "-")
    text = re.sub(r"(?<=[\d.)])\s*x\s*(?=[\d(])", "*", text)
    text = re.sub(r"(?<=[\d.)])\s*(?=pi\b|\()", "*", text)
    try:
        result = _eval_node(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot parse quantity {value!r}: {exc}") from None
    if not math.isfinite(result):
        raise ValueError(f"quantity {value!r} is not finite")
    return result


def _quantities(raw, where: str, two_pi_units: bool = False) -> list[float]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: expected a non-empty list")
    out = []
    for i, item in enumerate(raw):
        try:
            v = parse_quantity(item)
        except ValueError as exc:
            raise ConfigError(f"{where}[{i}]: {exc}") from None
        if two_pi_units and not isinstance(item, str):
            v *= 2.0 * math.pi
        out.append(v)
    return out


def _scalar(raw, where: str) -> float:
    try:
        return parse_quantity(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass
class OracleSettings:
    n_points: int = 100
    tol: float = 1e-10
    rng_seed: int = 0
    t_range: tuple[float, float] = (0.0, 10.0)
    x_range: tuple[float, float] = (0.0, 50.0)

    def to_dict(self) -> dict:
        return {"n_points": self.n_points, "tol": self.tol, "rng_seed": self.rng_seed,
                "t_range": list(self.t_range), "x_range": list(self.x_range)}


@dataclass
class RunConfig:
    name: str
    system: BilinearSystem
    given: GivenParams
    seed: SeedConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    trunc: LatticeTruncation | None = None
    tail_tol: float = DEFAULT_TAIL_TOL
    grid: GridSpec | None = None
    grid_format: str = "csv"
    out_dir: Path = Path("out")
    oracle: OracleSettings = field(default_factory=OracleSettings)
    published: UnknownVector | None = None
    eta0: tuple[float, ...] | None = None
    source: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.given.n


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{key}] must be a table")
    return value


def _parse_equation(raw: dict, v0: float) -> BilinearSystem:
    eq = raw.get("equation", "coupled-ramani")
    if isinstance(eq, str):
        try:
            return builtin_system(eq, v0)
        except KeyError as exc:
            raise ConfigError(f"equation: {exc.args[0]}") from None
    if not isinstance(eq, dict):
        raise ConfigError("equation: expected a name or a table with f1/f2 terms")
    try:
        forms = []
        for key in ("f1", "f2"):
            spec = eq[key]
            terms = [(parse_quantity(c), tuple(int(e) for e in exps)) for c, exps in spec["terms"]]
            forms.append((terms, bool(spec.get("constant", True))))
        return custom_system(eq.get("name", "custom"), forms[0][0], forms[1][0], forms[0][1], forms[1][1])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"equation: malformed custom form ({exc})") from None


def _parse_unknowns(raw: dict, n: int, where: str) -> UnknownVector:
    try:
        c = raw["c"] if "c" in raw else [raw["c1"], raw["c2"]]
        if not (isinstance(c, list) and len(c) == 2):
            raise ConfigError(f"{where}.c: expected [c1, c2]")
        vec = UnknownVector(
            _quantities(raw["omega"], f"{where}.omega"),
            _quantities(raw["l"], f"{where}.l"),
            _quantities(raw["tau_off"], f"{where}.tau_off") if n > 1 else [],
            _scalar(c[0], f"{where}.c[0]"),
            _scalar(c[1], f"{where}.c[1]"),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if vec.n != n:
        raise ConfigError(f"{where}: has N={vec.n}, expected {n}")
    return vec


def _axis(raw, where: str):
    if not (isinstance(raw, list) and len(raw) == 3):
        raise ConfigError(f"{where}: expected [min, max, count]")
    lo, hi = _scalar(raw[0], f"{where}[0]"), _scalar(raw[1], f"{where}[1]")
    count = raw[2]
    if not isinstance(count, int) or count < 1:
        raise ConfigError(f"{where}[2]: count must be a positive integer")
    return (lo, hi, count)


def run_config_from_dict(raw: dict, name: str = "run", base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed TOML document (one row) into a :class:`RunConfig`."""
    base_dir = Path(base_dir or ".")
    v0 = _scalar(raw.get("v0", 0.0), "v0")
    u0 = _scalar(raw.get("u0", 0.0), "u0")
    if "k" not in raw or "tau_diag" not in raw:
        raise ConfigError("k and tau_diag are required")
    k = _quantities(raw["k"], "k")
    tau_diag = _quantities(raw["tau_diag"], "tau_diag", two_pi_units=True)
    n = raw.get("n", len(k))
    if n != len(k) or n != len(tau_diag):
        raise ConfigError(f"n={n} but k has {len(k)} and tau_diag has {len(tau_diag)} entries")
    try:
        given = GivenParams(k, tau_diag, v0, u0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    system = _parse_equation(raw, v0)

    published = None
    if "published" in raw:
        published = _parse_unknowns(_section(raw, "published"), n, "published")

    s = _section(raw, "seed")
    mode = normalize_mode(s.get("mode", "dispersion"))
    if mode not in SEED_MODES:
        raise ConfigError(f"seed.mode: expected one of {SEED_MODES + tuple(MODE_ALIASES)}, got {mode!r}")
    c0 = s.get("c0", [1, 1])
    if not (isinstance(c0, list) and len(c0) == 2):
        raise ConfigError("seed.c0: expected [c1_0, c2_0]")
    x0 = None
    if "x0" in s:
        x0 = _parse_unknowns(s["x0"], n, "seed.x0")
    elif mode == "warm-start":
        if published is None:
            raise ConfigError("seed.mode = 'warm-start' needs a [published] table")
        x0 = published
    elif mode == "explicit":
        raise ConfigError("seed.mode = 'explicit' needs a [seed.x0] table")
    tau_off0 = s.get("tau_off")
    if tau_off0 is not None:
        tau_off0 = tuple(_quantities(tau_off0, "seed.tau_off"))
        if len(tau_off0) != n * (n - 1) // 2:
            raise ConfigError(f"seed.tau_off: expected {n * (n - 1) // 2} entries")
    root = s.get("root", "smallest")
    if not (root in ("smallest", "first") or isinstance(root, int)):
        raise ConfigError("seed.root: expected 'smallest', 'first' or an integer index")
    try:
        seed = SeedConfig(_scalar(c0[0], "seed.c0[0]"), _scalar(c0[1], "seed.c0[1]"),
                          tau_off0, mode, x0, root, int(s.get("rng_seed", raw.get("rng_seed", 0))))
    except ValueError as exc:
        raise ConfigError(f"seed: {exc}") from None

    sv = _section(raw, "solver")
    allowed = {f.name for f in fields(SolverConfig)}
    unknown = set(sv) - allowed
    if unknown:
        raise ConfigError(f"solver: unknown keys {sorted(unknown)}")
    try:
        solver = SolverConfig(**sv)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None

    tr = _section(raw, "truncation")
    tail_tol = float(tr.get("tail_tol", DEFAULT_TAIL_TOL))
    trunc = None
    if "m_max" in tr:
        try:
            trunc = LatticeTruncation(int(tr["m_max"]), tail_tol)
        except ValueError as exc:
            raise ConfigError(f"truncation: {exc}") from None

    out = _section(raw, "output")
    grid = None
    g = _section(raw, "grid")
    if out.get("grid", bool(g)):
        defaults = GridSpec()
        grid = GridSpec(
            _axis(g["x"], "grid.x") if "x" in g else defaults.x,
            _axis(g["t"], "grid.t") if "t" in g else defaults.t,
            _scalar(g.get("z", 0.0), "grid.z"),
        )
    grid_format = out.get("grid_format", "csv")
    if grid_format not in ("csv", "matrix"):
        raise ConfigError("output.grid_format: expected 'csv' or 'matrix'")
    out_dir = Path(out.get("dir", "out"))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    o = _section(raw, "oracle")
    try:
        oracle = OracleSettings(int(o.get("n_points", 100)), float(o.get("tol", 1e-10)),
                                int(o.get("rng_seed", 0)),
                                tuple(o.get("t_range", (0.0, 10.0))), tuple(o.get("x_range", (0.0, 50.0))))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"oracle: {exc}") from None

    eta0 = raw.get("eta0")
    if eta0 is not None:
        eta0 = tuple(_quantities(eta0, "eta0"))
        if len(eta0) != n:
            raise ConfigError(f"eta0: expected {n} entries")

    return RunConfig(
        name=str(out.get("name", raw.get("name", name))),
        system=system, given=given, seed=seed, solver=solver, trunc=trunc, tail_tol=tail_tol,
        grid=grid, grid_format=grid_format, out_dir=out_dir, oracle=oracle,
        published=published, eta0=eta0, source=raw,
    )


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_document(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_run_config(path) -> RunConfig:
    path = Path(path)
    raw = load_document(path)
    raw = {k: v for k, v in raw.items() if k != "rows"}
    try:
        return run_config_from_dict(raw, name=path.stem, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_batch(path) -> tuple[list[RunConfig | ConfigError], dict]:
    """Rows of a ``[[rows]]`` batch, each merged over the top-level keys.

    Rows that fail validation come back as :class:`ConfigError` entries so
    the batch can continue.
    """
    path = Path(path)
    raw = load_document(path)
    rows = raw.get("rows", [])
    if not isinstance(rows, list):
        raise ConfigError(f"{path}: rows must be an array of tables")
    base = {k: v for k, v in raw.items() if k != "rows"}
    out = []
    for i, row in enumerate(rows):
        merged = _merge(base, row)
        label = str(row.get("name", f"{path.stem}-row{i + 1}"))
        merged.setdefault("output", {})
        merged["output"] = {**merged["output"], "name": label}
        try:
            out.append(run_config_from_dict(merged, name=label, base_dir=path.parent))
        except ConfigError as exc:
            out.append(ConfigError(f"{path} rows[{i}]: {exc}"))
    return out, base


def apply_overrides(cfg: RunConfig, seed_mode=None, rng_seed=None, max_iter=None, trunc_m=None,
                    out_dir=None) -> RunConfig:
    """Command-line flags take precedence over file values."""
    if seed_mode is not None:
        seed_mode = normalize_mode(seed_mode)
        x0 = cfg.seed.x0
        if seed_mode == "warm-start":
            x0 = cfg.published if cfg.published is not None else x0
            if x0 is None:
                raise ConfigError("--seed-mode warm-start needs a [published] table")
        elif seed_mode == "explicit" and x0 is None:
            raise ConfigError("--seed-mode explicit needs a [seed.x0] table")
        cfg = replace(cfg, seed=replace(cfg.seed, mode=seed_mode, x0=x0))
    if rng_seed is not None:
        cfg = replace(cfg, seed=replace(cfg.seed, rng_seed=int(rng_seed)))
    if max_iter is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, max_iter=int(max_iter)))
    if trunc_m is not None:
        cfg = replace(cfg, trunc=LatticeTruncation(int(trunc_m), cfg.tail_tol))
    if out_dir is not None:
        cfg = replace(cfg, out_dir=Path(out_dir))
    return cfg

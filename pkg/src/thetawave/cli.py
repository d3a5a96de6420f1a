"""Command-line front end.

    thetawave solve  --config run.toml   [--out-dir DIR] [--seed-mode M] ...
    thetawave table  --config batch.toml [--out-dir DIR]
    thetawave verify REPORT.json
    thetawave sample REPORT.json [--out-dir DIR] [--format csv|matrix]

Exit codes for ``solve``: 0 solved and the pointwise check passed, 2 solved
but the pointwise check failed, 3 no convergence, 1 bad input or I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bilinear import system_from_config
from .config import ConfigError, OracleSettings, RunConfig, apply_overrides, load_batch, load_run_config
from .field import GridSpec, NonPositiveThetaError, export_grid, oracle_check, random_points, reconstruct
from .residual import GivenParams, ResidualSystem, UnknownVector, theta_params, unknown_labels
from .seed import initial_guess
from .solver import SolveReport, gauss_newton
from .theta import LatticeTruncation, NotPositiveDefiniteError

log = logging.getLogger("thetawave")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ORACLE_FAIL = 2
EXIT_NOT_CONVERGED = 3

REPORT_SUFFIX = ".report.json"


@dataclass
class Outcome:
    cfg: RunConfig
    report: SolveReport
    x0: UnknownVector
    oracle: dict | None
    elapsed: float

    @property
    def solved(self) -> bool:
        return self.report.success(self.cfg.solver.accept_tol)

    @property
    def oracle_passed(self) -> bool:
        return self.oracle is not None and self.oracle["max_normalized"] < self.cfg.oracle.tol

    @property
    def exit_code(self) -> int:
        if not self.solved:
            return EXIT_NOT_CONVERGED
        return EXIT_OK if self.oracle_passed else EXIT_ORACLE_FAIL


def residual_system(cfg: RunConfig) -> ResidualSystem:
    return ResidualSystem(cfg.system, cfg.given, cfg.trunc, cfg.tail_tol)


def run_oracle(system, given: GivenParams, x: UnknownVector, settings: OracleSettings, eta0=None) -> dict:
    pts = random_points(settings.n_points, settings.rng_seed, settings.t_range, settings.x_range)
    try:
        p = theta_params(given, x, eta0)
        res = oracle_check(system, p, x.c1, x.c2, pts)
    except NotPositiveDefiniteError as exc:
        return {"max_normalized": float("inf"), "error": str(exc).splitlines()[0]}
    return res.to_dict()


def run_pipeline(cfg: RunConfig) -> Outcome:
    """seed -> Gauss-Newton -> pointwise bilinear check."""
    start = time.perf_counter()
    rs = residual_system(cfg)
    x0 = initial_guess(cfg.system, cfg.given, cfg.seed)
    report = gauss_newton(rs, x0, cfg.solver)
    oracle = None
    if np.isfinite(report.h_norm):
        oracle = run_oracle(cfg.system, cfg.given, report.x_final, cfg.oracle, cfg.eta0)
    return Outcome(cfg, report, x0, oracle, time.perf_counter() - start)


def report_document(out: Outcome) -> dict:
    cfg = out.cfg
    doc = {
        "format": "thetawave-report/1",
        "version": __version__,
        "name": cfg.name,
        "equation": cfg.system.to_config(),
        "given": cfg.given.to_dict(),
        "eta0": list(cfg.eta0) if cfg.eta0 is not None else None,
        "seed": {"mode": cfg.seed.mode, "c0": [cfg.seed.c1_0, cfg.seed.c2_0],
                 "root": cfg.seed.root, "rng_seed": cfg.seed.rng_seed, "x0": out.x0.to_dict()},
        "solver": {**out.report.to_dict(), "config": vars(cfg.solver)},
        "truncation": {"m_max": cfg.trunc.m_max if cfg.trunc else None, "tail_tol": cfg.tail_tol},
        "oracle": {"settings": cfg.oracle.to_dict(), "result": out.oracle},
        "solved": out.solved,
        "oracle_passed": out.oracle_passed,
        "exit_code": out.exit_code,
        "elapsed_s": out.elapsed,
    }
    if cfg.published is not None:
        doc["published"] = cfg.published.to_dict()
    if cfg.grid is not None:
        doc["grid"] = cfg.grid.to_dict()
    return doc


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(out: Outcome, out_dir: Path | None = None) -> Path:
    out_dir = Path(out_dir or out.cfg.out_dir)
    path = out_dir / f"{out.cfg.name}{REPORT_SUFFIX}"
    _atomic_write(path, json.dumps(report_document(out), indent=2) + "\n")
    return path


def _summary_lines(out: Outcome) -> list[str]:
    r = out.report
    x = r.x_final
    lines = [
        f"{out.cfg.name}: status={r.status} iterations={r.iterations} |H|_2={r.h_norm:.3e} "
        f"({out.elapsed:.2f} s)",
        f"  omega = {np.array2string(x.omega, precision=4)}",
        f"  l     = {np.array2string(x.l, precision=4)}",
    ]
    if x.n > 1:
        lines.append(f"  tau_off = {np.array2string(x.tau_off, precision=4)}")
    lines.append(f"  c1 = {x.c1:.4f}  c2 = {x.c2:.4f}")
    if r.degenerate_l_zero:
        lines.append("  all l_j = 0: z-independent branch (v = v0)")
    if out.oracle is not None:
        lines.append(f"  pointwise residual / theta^2 = {out.oracle['max_normalized']:.3e} "
                     f"({'pass' if out.oracle_passed else 'FAIL'})")
    return lines


def cmd_solve(args) -> int:
    try:
        cfg = load_run_config(args.config)
        cfg = apply_overrides(cfg, args.seed_mode, args.rng_seed, args.max_iter, args.trunc_m, args.out_dir)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = run_pipeline(cfg)
    for line in _summary_lines(out):
        print(line)
    try:
        path = write_report(out)
        print(f"  report: {path}")
        if cfg.grid is not None and out.solved:
            grid = reconstruct(theta_params(cfg.given, out.report.x_final, cfg.eta0), cfg.given, cfg.grid)
            for p in export_grid(grid, cfg.out_dir / f"{cfg.name}.grid.csv", cfg.grid_format,
                                 params={"solution": out.report.x_final.to_dict()}):
                print(f"  grid: {p}")
    except NonPositiveThetaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return out.exit_code


# -- table -----------------------------------------------------------------

def _fmt4(v: float) -> str:
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


def table_rows(outcomes: list[Outcome | ConfigError], labels: list[str]) -> tuple[list[str], list[list[str]]]:
    """Header and string cells; solved values rounded to 4 decimals."""
    n = max((o.cfg.n for o in outcomes if isinstance(o, Outcome)), default=1)
    given_cols = ([f"k{j + 1}" for j in range(n)] + [f"tau{j + 1}{j + 1}" for j in range(n)]
                  + ["v0", "c1_0", "c2_0"])
    header = ["row"] + given_cols + unknown_labels(n) + ["|H|_2", "status", "l=0", "oracle"]
    two_pi = 2 * np.pi
    rows = []
    for label, o in zip(labels, outcomes):
        cells = {"row": label}
        if isinstance(o, ConfigError):
            cells["status"] = "error"
            rows.append([cells.get(h, "") for h in header])
            continue
        g, x = o.cfg.given, o.report.x_final
        for j in range(g.n):
            cells[f"k{j + 1}"] = f"{g.k[j] / two_pi:.4g}*2pi"
            cells[f"tau{j + 1}{j + 1}"] = f"{g.tau_diag[j] / two_pi:.4g}*2pi"
        cells.update({"v0": f"{g.v0:g}", "c1_0": f"{o.cfg.seed.c1_0:g}", "c2_0": f"{o.cfg.seed.c2_0:g}"})
        cells.update({lab: _fmt4(v) for lab, v in zip(x.labels(), x.to_array())})
        status = o.report.status
        if status == "stalled" and not o.solved:
            status = "stalled(fail)"
        cells.update({
            "|H|_2": f"{o.report.h_norm:.1e}",
            "status": status,
            "l=0": "yes" if o.report.degenerate_l_zero else "no",
            "oracle": "" if o.oracle is None else ("pass" if o.oracle_passed else "FAIL"),
        })
        rows.append([cells.get(h, "") for h in header])
    return header, rows


def render_text_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


def render_csv_table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_table(args) -> int:
    try:
        entries, _ = load_batch(args.config)
        entries = [e if isinstance(e, ConfigError) else
                   apply_overrides(e, args.seed_mode, args.rng_seed, args.max_iter, args.trunc_m, args.out_dir)
                   for e in entries]
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    outcomes, labels = [], []
    for e in entries:
        if isinstance(e, ConfigError):
            print(f"error: {e}", file=sys.stderr)
            outcomes.append(e)
            labels.append(str(e).split(":")[0])
            continue
        try:
            o = run_pipeline(e)
        except Exception as exc:  # keep the batch going
            log.exception("row %s failed", e.name)
            outcomes.append(ConfigError(f"{e.name}: {exc}"))
            labels.append(e.name)
            continue
        outcomes.append(o)
        labels.append(e.name)
    header, rows = table_rows(outcomes, labels)
    text = render_text_table(header, rows)
    print(text, end="")
    out_dir = Path(args.out_dir) if args.out_dir else (
        entries[0].out_dir if entries and not isinstance(entries[0], ConfigError) else Path("out"))
    stem = Path(args.config).stem
    try:
        _atomic_write(out_dir / f"{stem}.table.txt", text)
        _atomic_write(out_dir / f"{stem}.table.csv", render_csv_table(header, rows))
        for o in outcomes:
            if isinstance(o, Outcome):
                write_report(o, out_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    ok = all(isinstance(o, Outcome) and o.exit_code == EXIT_OK for o in outcomes)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


# -- verify / sample -------------------------------------------------------

def load_report(path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise OSError(f"report not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise OSError(f"{path}: not a JSON report ({exc})") from None
    if doc.get("format") != "thetawave-report/1":
        raise OSError(f"{path}: unrecognised report format {doc.get('format')!r}")
    return doc


def verify_document(doc: dict, h_tol: float = 1e-12, oracle_tol: float | None = None) -> dict:
    """Recompute |H|_2 and the pointwise check from a report's stored solution."""
    system = system_from_config(doc["equation"])
    given = GivenParams.from_dict(doc["given"])
    x = UnknownVector.from_dict(doc["solver"]["x_final"])
    trunc_m = doc.get("truncation", {}).get("m_max")
    tail_tol = doc.get("truncation", {}).get("tail_tol", 1e-20)
    trunc = LatticeTruncation(trunc_m, tail_tol) if trunc_m else None
    settings = OracleSettings(**{k: tuple(v) if isinstance(v, list) else v
                                 for k, v in doc["oracle"]["settings"].items()})
    if oracle_tol is None:
        oracle_tol = settings.tol
    try:
        h_norm = ResidualSystem(system, given, trunc, tail_tol).residual_norm(x)
    except NotPositiveDefiniteError:
        h_norm = float("inf")
    oracle = run_oracle(system, given, x, settings, doc.get("eta0"))
    return {
        "h_norm": h_norm,
        "h_tol": h_tol,
        "oracle": oracle["max_normalized"],
        "oracle_tol": oracle_tol,
        "passed": bool(h_norm <= h_tol and oracle["max_normalized"] < oracle_tol),
    }


def cmd_verify(args) -> int:
    try:
        doc = load_report(args.report)
        res = verify_document(doc, args.h_tol, args.oracle_tol)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{doc.get('name', args.report)}: |H|_2 = {res['h_norm']:.3e} (tol {res['h_tol']:.0e}), "
          f"pointwise residual / theta^2 = {res['oracle']:.3e} (tol {res['oracle_tol']:.0e})")
    print("PASS" if res["passed"] else "FAIL")
    return EXIT_OK if res["passed"] else EXIT_ORACLE_FAIL


def cmd_sample(args) -> int:
    try:
        doc = load_report(args.report)
        given = GivenParams.from_dict(doc["given"])
        x = UnknownVector.from_dict(doc["solver"]["x_final"])
        g = doc.get("grid") or {}
        spec = GridSpec(tuple(g.get("x", GridSpec.x)), tuple(g.get("t", GridSpec.t)), g.get("z", 0.0))
        if args.x:
            spec = replace(spec, x=(args.x[0], args.x[1], int(args.x[2])))
        if args.t:
            spec = replace(spec, t=(args.t[0], args.t[1], int(args.t[2])))
        grid = reconstruct(theta_params(given, x, doc.get("eta0")), given, spec)
        out_dir = Path(args.out_dir) if args.out_dir else Path(args.report).parent
        name = doc.get("name", Path(args.report).stem)
        for p in export_grid(grid, out_dir / f"{name}.grid.csv", args.format,
                             params={"solution": x.to_dict()}):
            print(p)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thetawave", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out-dir", help="directory for reports and grids")
        p.add_argument("--seed-mode", choices=["dispersion", "explicit", "warm-start", "published-warm-start"])
        p.add_argument("--rng-seed", type=int)
        p.add_argument("--max-iter", type=int)
        p.add_argument("--trunc-m", type=int, help="fixed lattice bound M instead of the adaptive choice")

    p = sub.add_parser("solve", help="solve one configuration")
    run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="solve every [[rows]] entry and print a table")
    run_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="re-check a saved report")
    p.add_argument("report")
    p.add_argument("--h-tol", type=float, default=1e-12)
    p.add_argument("--oracle-tol", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="export u, v on a grid from a saved report")
    p.add_argument("report")
    p.add_argument("--out-dir")
    p.add_argument("--format", choices=["csv", "matrix"], default="csv")
    p.add_argument("--x", nargs=3, type=float, metavar=("MIN", "MAX", "COUNT"))
    p.add_argument("--t", nargs=3, type=float, metavar=("MIN", "MAX", "COUNT"))
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

import math
import textwrap

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetawave.config import (
    ConfigError,
    apply_overrides,
    load_batch,
    load_run_config,
    parse_quantity,
    run_config_from_dict,
)
from thetawave.tables import PUBLISHED

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("text,value", [
    ("1*2pi/10", TWO_PI / 10),
    ("0.46*2pi", 0.46 * TWO_PI),
    ("0.46 x 2pi", 0.46 * TWO_PI),
    ("0.46×2π", 0.46 * TWO_PI),
    ("-1.5", -1.5),
    ("2*pi", TWO_PI),
    ("(1+2)/4", 0.75),
])
def test_parse_quantity(text, value):
    assert parse_quantity(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("bad", ["__import__('os')", "1/0", "abc", "2**2000", True, None])
def test_parse_quantity_rejects(bad):
    with pytest.raises(ValueError):
        parse_quantity(bad)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_parse_quantity_number_passthrough(v):
    assert parse_quantity(v) == v
    assert parse_quantity(repr(v)) == v


def base_doc(**over):
    doc = {"k": ["1*2pi/10"], "tau_diag": ["0.46*2pi"], "seed": {"c0": [1, 1]}}
    doc.update(over)
    return doc


def test_units_convention():
    cfg = run_config_from_dict(base_doc(tau_diag=[0.46]))
    assert cfg.given.tau_diag[0] == pytest.approx(0.46 * TWO_PI)
    cfg = run_config_from_dict(base_doc(k=[0.5]))
    assert cfg.given.k[0] == 0.5


@pytest.mark.parametrize("over,match", [
    (dict(k=["1*2pi/10", "2*2pi/10"]), "n=2"),
    (dict(tau_diag=["-1"]), "positive"),
    (dict(equation="kdv"), "unknown equation"),
    (dict(seed={"mode": "guess"}), "seed.mode"),
    (dict(seed={"mode": "warm-start"}), "published"),
    (dict(seed={"mode": "explicit"}), "seed.x0"),
    (dict(solver={"max_itr": 3}), "unknown keys"),
    (dict(solver={"max_iter": 0}), "solver"),
    (dict(k=["1*2pi/"]), r"k\[0\]"),
    (dict(grid={"x": [0, 1]}, output={"grid": True}), "grid.x"),
    (dict(output={"grid_format": "xml"}), "grid_format"),
    (dict(published={"omega": [1.0], "l": [1.0]}), "published: missing .c"),
])
def test_field_diagnostics(over, match):
    with pytest.raises(ConfigError, match=match):
        run_config_from_dict(base_doc(**over))


def test_toml_syntax_error_names_line(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('k = ["1*2pi/10"]\ntau_diag = [0.46]\nv0 = = 1\n')
    with pytest.raises(ConfigError, match="line"):
        load_run_config(p)


def test_published_alias_mode():
    doc = base_doc(seed={"mode": "published-warm-start"},
                   published={"omega": [0.1424], "l": [0.0921], "c": [0.8494, 0.0419]})
    cfg = run_config_from_dict(doc)
    assert cfg.seed.mode == "warm-start" and cfg.seed.x0 == cfg.published


def test_custom_equation():
    doc = base_doc(equation={"name": "mine", "f1": {"terms": [[1, [0, 0, 2]], ["1/4", [0, 0, 4]]]},
                             "f2": {"terms": [[1, [1, 1, 0]]], "constant": False}})
    cfg = run_config_from_dict(doc)
    assert cfg.system.name == "mine" and not cfg.system.f2.has_constant


def test_overrides(tmp_path):
    cfg = run_config_from_dict(base_doc(published={"omega": [0.1], "l": [0.1], "c": [1, 1]}))
    cfg = apply_overrides(cfg, seed_mode="warm-start", rng_seed=5, max_iter=7, trunc_m=4, out_dir=tmp_path)
    assert cfg.seed.mode == "warm-start" and cfg.seed.x0 == cfg.published
    assert cfg.seed.rng_seed == 5 and cfg.solver.max_iter == 7 and cfg.trunc.m_max == 4
    assert cfg.out_dir == tmp_path
    with pytest.raises(ConfigError):
        apply_overrides(run_config_from_dict(base_doc()), seed_mode="warm-start")


def test_batch_rows_merge_and_errors(tmp_path):
    p = tmp_path / "b.toml"
    p.write_text(textwrap.dedent("""
        v0 = 1
        tau_diag = ["0.46*2pi"]
        [[rows]]
        name = "good"
        k = ["1*2pi/10"]
        [[rows]]
        k = "oops"
    """))
    entries, _ = load_batch(p)
    assert entries[0].name == "good" and entries[0].given.v0 == 1.0
    assert isinstance(entries[1], ConfigError) and "rows[1]" in str(entries[1])


def test_empty_batch(tmp_path):
    p = tmp_path / "e.toml"
    p.write_text('equation = "coupled-ramani"\n')
    assert load_batch(p)[0] == []


@pytest.mark.parametrize("table", range(1, 7))
def test_shipped_table_configs_match_registry(config_dir, table):
    entries, _ = load_batch(config_dir / f"table{table}.toml")
    rows = [r for r in PUBLISHED if r.table == table]
    assert len(entries) == len(rows)
    for cfg, r in zip(entries, rows):
        assert cfg.name == r.label
        assert cfg.published == r.solution()
        assert cfg.given.k == pytest.approx(r.given().k, rel=1e-15)
        assert cfg.given.tau_diag == pytest.approx(r.given().tau_diag, rel=1e-15)
        assert (cfg.seed.c1_0, cfg.seed.c2_0) == r.c0
        assert cfg.given.v0 == r.v0


def test_single_configs_load(config_dir):
    for name in ("table1_row1", "table5_row1", "hirota_satsuma"):
        cfg = load_run_config(config_dir / f"{name}.toml")
        assert cfg.n >= 1

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetawave.bilinear import (
    BilinearForm,
    BilinearFormError,
    builtin_system,
    custom_system,
    registered_systems,
    system_from_config,
)


@pytest.fixture
def ramani():
    return builtin_system("coupled-ramani", 0.0)


def test_constant_only_survives_at_origin(ramani):
    assert ramani.f1.eval_real((0, 0, 0), 1.0) == 1.0


def test_dx6_term(ramani):
    assert ramani.f1.eval_real((0, 0, 1), 0.0) == 1.0


def test_f2_hand_expansion(ramani):
    # T Z - Z X^3 - 6 v0 X^2 at (1, 1, 1), v0 = 0
    assert ramani.f2.eval_real((1, 1, 1), 0.0) == 0.0
    assert builtin_system("coupled-ramani", 1.0).f2.eval_real((1, 1, 1), 0.0) == -6.0


def test_v0_scales_x2_term():
    exps0 = {e for _, e in builtin_system("coupled-ramani", 0.0).f2.terms}
    assert (0, 0, 2) not in exps0
    terms1 = dict((e, c) for c, e in builtin_system("coupled-ramani", 1.0).f2.terms)
    assert terms1[(0, 0, 2)] == -6


def test_hirota_satsuma_rationals_and_constants():
    hs = builtin_system("hirota-satsuma")
    coeffs = {e: c for c, e in hs.f1.terms}
    assert coeffs[(0, 0, 4)] == Fraction(-1, 4)
    assert coeffs[(0, 2, 0)] == Fraction(-3, 4)
    assert hs.f1.has_constant and hs.f2.has_constant


def test_eval_imag_matches_complex_reference(ramani, rng):
    d = rng.uniform(-5, 5, size=(1000, 3))
    for form in ramani.forms + builtin_system("hirota-satsuma").forms:
        ref = np.array([
            sum(complex(float(c)) * np.prod([(1j * x) ** e for x, e in zip(row, exps)])
                for c, exps in form.terms)
            for row in d
        ])
        got = form.eval_imag(d, 0.0)
        assert np.max(np.abs(ref.imag)) < 1e-9
        assert np.allclose(got, ref.real, rtol=1e-14, atol=1e-14 * np.max(np.abs(ref.real)))


def test_grad_imag_vs_finite_differences(ramani, rng):
    for _ in range(20):
        d = rng.uniform(-2, 2, size=3)
        for form in ramani.forms:
            g = form.grad_imag(d)
            h = 1e-6
            fd = np.array([(form.eval_imag(d + h * e) - form.eval_imag(d - h * e)) / (2 * h)
                           for e in np.eye(3)])
            assert np.allclose(g, fd, rtol=1e-6, atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-4, 4), min_size=3, max_size=3))
def test_evenness(d):
    for form in builtin_system("coupled-ramani", 1.0).forms:
        a = np.array(d)
        assert form.eval_real(a) == pytest.approx(form.eval_real(-a), rel=1e-12, abs=1e-9)


def test_registry_idempotent():
    a = builtin_system("coupled-ramani", 1.0)
    b = builtin_system("coupled-ramani", 1.0)
    assert a == b
    assert set(registered_systems()) == {"coupled-ramani", "hirota-satsuma"}


def test_config_round_trip():
    for sys_ in (builtin_system("coupled-ramani", 1.0), builtin_system("hirota-satsuma"),
                 custom_system("mine", [(1, (0, 0, 2))], [(Fraction(1, 3), (1, 1, 0))])):
        assert system_from_config(sys_.to_config()) == sys_


def test_unknown_name():
    with pytest.raises(KeyError, match="unknown equation"):
        builtin_system("kdv-9000")


@pytest.mark.parametrize("terms", [
    [(1, (1, 0, 0))],            # odd degree
    [(1, (0, 0, 2)), (2, (0, 0, 2))],  # duplicate
    [(1, (0, -2, 0))],           # negative
    [(1, (0, 2))],               # wrong length
])
def test_malformed_terms(terms):
    with pytest.raises(BilinearFormError):
        BilinearForm(tuple(terms))


def test_custom_cannot_shadow_builtin():
    with pytest.raises(BilinearFormError):
        custom_system("coupled-ramani", [(1, (0, 0, 2))], [(1, (0, 0, 2))])


def test_zero_coefficients_dropped():
    f = BilinearForm.from_terms([(0, (0, 0, 2)), (3, (2, 0, 0))])
    assert len(f.terms) == 1

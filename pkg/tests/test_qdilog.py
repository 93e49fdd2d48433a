import numpy as np
import pytest

from teichkit.qdilog import (BParameter, PoleError, check_residue, eb, expected_residue,
                             identity_residuals, log_eb_direct, sb, tabulate)

XS = np.linspace(-3.0, 3.0, 61)


def test_b_parameter():
    bp = BParameter(0.8)
    assert bp.Q == pytest.approx(0.8 + 1.25)
    assert bp.cb == pytest.approx(0.5j * bp.Q)
    assert bp.zeta == pytest.approx(np.exp(-1j * np.pi * bp.Q ** 2 / 12))
    with pytest.raises(ValueError):
        BParameter(0.0)
    with pytest.raises(ValueError):
        BParameter(1.5)


def test_zeta_minus_six():
    b = 0.7
    zeta = np.exp(1j * np.pi * b ** 2 / 3)
    assert zeta ** -6 == pytest.approx(np.exp(-2j * np.pi * b ** 2), abs=1e-15)


@pytest.mark.parametrize("b", [0.6, 0.8, 1.0])
def test_sb_at_zero(b):
    assert sb(0.0, b)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("b", [0.6, 0.8, 1.0])
def test_eb_at_zero(b):
    cb2 = -BParameter(b).Q ** 2 / 4
    expected = np.exp(-1j * np.pi * (1 + 2 * cb2) / 12)
    assert eb(0.0, b)[0] == pytest.approx(expected, abs=1e-12)


def test_sb_shift_equation_by_hand():
    b = 0.8
    lhs = sb(XS - 0.5j * b, b)
    rhs = 2 * np.cosh(np.pi * b * XS) * sb(XS + 0.5j * b, b)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) <= 1e-8


def test_eb_shift_equation_by_hand():
    b = 0.8
    lhs = eb(XS - 0.5j * b, b)
    rhs = (1 + np.exp(2 * np.pi * b * XS)) * eb(XS + 0.5j * b, b)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) <= 1e-8


@pytest.mark.parametrize("b", [0.6, 0.8, 1.0])
def test_identity_residuals(b):
    r = identity_residuals(b)
    assert set(r) == {"shift_b", "shift_binv", "eb_shift_b", "eb_shift_binv", "inversion",
                      "unitarity", "self_duality"}
    for k, v in r.items():
        assert v <= 1e-8, (k, v)


def test_inversion_by_hand():
    b = 0.6
    x = np.array([-2.0, -0.3, 0.4, 1.7, 0.2 + 0.3j, -0.5 - 0.4j])
    assert np.max(np.abs(sb(x, b) * sb(-x, b) - 1.0)) <= 1e-8


def test_unitarity_on_real_axis():
    for b in (0.6, 0.8, 1.0):
        assert np.max(np.abs(np.abs(eb(XS, b)) - 1.0)) <= 1e-8
        assert np.max(np.abs(np.abs(sb(XS, b)) - 1.0)) <= 1e-8


def test_direct_integral_agrees():
    b = 0.8
    z = np.array([-0.7, 0.0, 0.9, 0.3 + 0.2j])
    direct = log_eb_direct(z, b)
    assert np.max(np.abs(np.exp(direct) - eb(z, b))) <= 1e-7


def test_pole_rejected():
    bp = BParameter(0.8)
    with pytest.raises(PoleError):
        sb(bp.cb, 0.8)
    with pytest.raises(PoleError):
        eb(bp.cb, 0.8)


def test_tabulate_rows():
    rows = tabulate([-1.0, 0.0, 1.0], 0.8)
    assert len(rows) == 3
    x, re, im, err = rows[1]
    assert complex(re, im) == pytest.approx(eb(0.0, 0.8)[0])
    assert err >= 0.0


def test_residue_radius_independent():
    r1 = check_residue(0.8, radius=0.05).value
    r2 = check_residue(0.8, radius=0.025).value
    assert abs(r1 - r2) <= 1e-7


def test_eb_residue():
    m = check_residue(0.8, radius=0.05, which="eb")
    assert abs(m.value - 1 / (2j * np.pi)) <= 1e-6


def test_sb_residue():
    b = 0.8
    cb = BParameter(b).cb
    expected = np.exp(-1j * np.pi * (1 - 4 * cb ** 2) / 12) / (2j * np.pi)
    assert expected == pytest.approx(expected_residue(b, "sb"))
    m = check_residue(b, radius=0.05, which="sb")
    assert abs(m.value - expected) <= 1e-6


def test_residue_circle_must_isolate_pole():
    with pytest.raises(ValueError):
        check_residue(0.8, radius=0.9)


@pytest.mark.parametrize("b", [0.6, 0.8, 1.0])
def test_measured_residues_match_swapped_assignment(b):
    # the circle integrals reproduce each printed value at the other function
    assert abs(check_residue(b, which="sb").value - expected_residue(b, "eb")) <= 1e-9
    assert abs(check_residue(b, which="eb").value - expected_residue(b, "sb")) <= 1e-9

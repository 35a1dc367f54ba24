"""Rotation subgroup axioms, certified control and loxodromic bounds."""

import random

import pytest

from fareyquot.farey import (
    S_MAT,
    T_MAT,
    annular_projection,
    mat_apply,
    mat_inv,
    mat_mul,
    slopes_in_box,
)
from fareyquot.projections import derive_constants
from fareyquot.rotations import (
    FareyRotatingFamily,
    NotActive,
    NotIndependent,
    NotLoxodromic,
    RotatingFamilyConfig,
    check_rotating_axioms,
    displacement_identity_sample,
    large_rotation_bound,
    loxodromic_projection_bound,
    pair_projection_bound,
    require_loxodromic,
    rotation_control_exhaustive,
)

LOX = (2, 1, 1, 1)


@pytest.fixture(scope="module")
def family50():
    led = derive_constants(2, K=50, bgitC=3, lox_bounds=(2, 2))
    return FareyRotatingFamily(RotatingFamilyConfig(50, led))


def test_config_validation():
    led = derive_constants(2, K=50)
    with pytest.raises(ValueError):
        RotatingFamilyConfig(0, led)


def test_axiom_report(family50):
    report = check_rotating_axioms(family50, slopes_in_box(4))
    assert report.all_hold()
    assert report.checked["displacement_identity"] > 1000


def test_spec_control_example(family50):
    # a K-th twist at the vertical slope pushes the zero slope across the
    # whole fan: raw displacement |0 - 51| = 51
    y, x, z = (1, 0), (0, 1), (1, 1)
    g = family50.rotation(y, 1)
    assert annular_projection(y, x, mat_apply(g, z)) == 51


def test_identity_rotation_excluded(family50):
    with pytest.raises(ValueError):
        large_rotation_bound(family50, (0, 1), (1, 0), 0)


def test_large_rotation_bound(family50):
    # adjacent base: the fan count sees K - 1 edges; the ledger bound is
    # far below either way
    lhs, rhs, holds = large_rotation_bound(family50, (0, 1), (1, 0), 1)
    assert lhs == 49 and holds
    lhs2, _, _ = large_rotation_bound(family50, (0, 1), (1, 0), 2)
    assert lhs2 == 99
    # non-adjacent base sees the full displacement
    lhs3, _, _ = large_rotation_bound(family50, (1, 2), (1, 0), 1)
    assert lhs3 == 50
    with pytest.raises(NotActive):
        large_rotation_bound(family50, (1, 0), (1, 0), 1)


def test_tau_support_restriction():
    led = derive_constants(2, K=50)
    config = RotatingFamilyConfig(50, led, tau_support=lambda y: y == (1, 0))
    fam = FareyRotatingFamily(config)
    assert fam.sample_rotations((0, 1)) == []
    assert len(fam.sample_rotations((1, 0))) == 4
    with pytest.raises(ValueError):
        fam.rotation((0, 1), 1)


def test_displacement_identity_sample():
    rng = random.Random(0)
    assert displacement_identity_sample(rng, 7, count=500, bound=15) == 500


def test_rotation_control_exhaustive_small():
    led = derive_constants(2, K=40, bgitC=3)
    out = rotation_control_exhaustive(led, bound=8)
    assert out["violations"] == 0
    assert out["control_min_seen"] >= led.ThetaRot
    assert out["corollary_holds"]


def test_parabolic_rejected():
    with pytest.raises(NotLoxodromic):
        require_loxodromic(T_MAT, (0, 1), 8)


def test_loxodromic_displacements_linear():
    disp = require_loxodromic(LOX, (1, 0), 8)
    assert disp == list(range(1, 9))


def test_loxodromic_projection_bound_stable():
    out = loxodromic_projection_bound(LOX, (1, 0), 8)
    assert out["L"] == 2 and out["stable"]
    inv = loxodromic_projection_bound(mat_inv(LOX), (1, 0), 8)
    assert inv["L"] == out["L"]  # the supremum is symmetric in the power


def test_pair_projection_bound():
    other = mat_mul(mat_mul(S_MAT, LOX), mat_inv(S_MAT))
    out = pair_projection_bound(LOX, other, (1, 0), 6)
    assert out["M"] == 2 and out["stable"]
    with pytest.raises(NotIndependent):
        pair_projection_bound(LOX, LOX, (1, 0), 6)


def test_rotating_family_acts_consistently(family50):
    # action through the family agrees with the matrix action
    for y in slopes_in_box(3):
        for m in (-1, 2):
            g = family50.rotation(y, m)
            assert family50.act(g, y) == y

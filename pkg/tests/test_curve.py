from fractions import Fraction

import pytest
from conftest import curve
from corpus import CORPUS, conductor_of
from hypothesis import assume, given
from hypothesis import strategies as st

from twistlab.arith import is_prime
from twistlab.curve import (
    Mod2Image,
    ReductionType,
    WeierstrassCurve,
    build_profile,
    change_coordinates,
    conductor_and_root_number,
    count_points_mod,
    good_ordinary_at_2,
    greenberg_criterion_partial,
    has_cm,
    local_data,
    mod2_image,
    rational_roots_of_cubic,
    reduction_type,
    semistable_local_data,
    short_model_witness,
    two_division_cubic,
    two_torsion_mod_ell,
    two_torsion_rational,
)
from twistlab.errors import (
    AdditivePrimeEncountered,
    BadPrime,
    HypothesisViolated,
    NotMinimal,
    SingularCurve,
)


def node_tangent_type(ainvs, p):
    """Reduction type at p from the singular point's tangent slopes, by brute force."""
    a1, a2, a3, a4, a6 = ainvs

    def F(x, y):
        return (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p

    sing = [
        (x, y)
        for x in range(p)
        for y in range(p)
        if F(x, y) == 0
        and (a1 * y - 3 * x * x - 2 * a2 * x - a4) % p == 0
        and (2 * y + a1 * x + a3) % p == 0
    ]
    if not sing:
        return ReductionType.GOOD
    (x0, _), = sing
    # tangent cone v^2 + a1 u v - (3 x0 + a2) u^2 = 0
    slopes = [m for m in range(p) if (m * m + a1 * m - 3 * x0 - a2) % p == 0]
    return {2: ReductionType.SPLIT, 0: ReductionType.NONSPLIT, 1: ReductionType.ADDITIVE}[len(slopes)]


def test_quantities_53a1():
    E = curve([1, -1, 1, 0, 0])
    assert (E.b2, E.b4, E.b6, E.b8) == (-3, 1, 1, -1)
    assert (E.c4, E.c6, E.disc) == (-15, -297, -53)
    assert E.c4**3 - E.c6**2 == 1728 * E.disc


def test_singular_rejected():
    with pytest.raises(SingularCurve):
        WeierstrassCurve.from_ainvs([0, 0, 0, 0, 0])
    with pytest.raises(SingularCurve):
        curve([0, 0, 0, -3, 2])


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_reduction_type_matches_tangent_oracle(label):
    ainvs, _ = CORPUS[label]
    E = curve(ainvs)
    for p in range(3, 100):
        if not is_prime(p):
            continue
        want = node_tangent_type(ainvs, p)
        assert reduction_type(E, p) == want, (label, p)
        if want is ReductionType.SPLIT:
            assert count_points_mod(E, p) == p
        elif want is ReductionType.NONSPLIT:
            assert count_points_mod(E, p) == p + 2


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_conductor_and_root_number_match_cremona(label):
    ainvs, rank = CORPUS[label]
    N, w = conductor_and_root_number(curve(ainvs))
    assert N == conductor_of(label)
    assert w == (-1) ** rank


def test_local_data_tamagawa():
    assert local_data(curve(CORPUS["11a1"][0]), 11).tamagawa == 5
    assert local_data(curve(CORPUS["11a3"][0]), 11).tamagawa == 1
    E = curve(CORPUS["15a1"][0])
    assert [(ld.p, ld.reduction, ld.tamagawa) for ld in semistable_local_data(E)] == [
        (3, ReductionType.NONSPLIT, 2),
        (5, ReductionType.SPLIT, 4),
    ]
    E = curve(CORPUS["21a1"][0])
    assert [ld.tamagawa for ld in semistable_local_data(E)] == [4, 2]


def test_not_minimal_detected():
    a1, a2, a3, a4, a6 = CORPUS["53a1"][0]
    scaled = curve([3 * a1, 9 * a2, 27 * a3, 81 * a4, 729 * a6])
    with pytest.raises(NotMinimal):
        reduction_type(scaled, 3)
    with pytest.raises(NotMinimal):
        conductor_and_root_number(scaled)


def test_additive_and_bad_at_2_rejected():
    with pytest.raises(AdditivePrimeEncountered):
        conductor_and_root_number(curve([0, 0, 1, 0, -7]))  # 27a1
    with pytest.raises(HypothesisViolated):
        conductor_and_root_number(curve([1, 0, 1, 4, -6]))  # 14a1
    with pytest.raises(ValueError):
        reduction_type(curve([0, 0, 1, -1, 0]), 2)


def test_ordinary_at_2():
    assert good_ordinary_at_2(curve(CORPUS["53a1"][0]))
    assert good_ordinary_at_2(curve(CORPUS["15a7"][0]))
    assert good_ordinary_at_2(curve(CORPUS["17a4"][0]))
    # 11a1 has a_2 = -2, supersingular at 2
    assert not good_ordinary_at_2(curve(CORPUS["11a1"][0]))
    assert count_points_mod(curve(CORPUS["11a1"][0]), 2) == 5
    assert not good_ordinary_at_2(curve([1, 0, 1, 4, -6]))


@pytest.mark.parametrize("label", ["53a1", "15a7", "17a4"])
def test_points_mod_2_even_for_ordinary(label):
    # ordinary means a_2 odd, so #E(F_2) = 3 - a_2 is even
    assert count_points_mod(curve(CORPUS[label][0]), 2) == 4


def test_mod2_images():
    assert mod2_image(curve(CORPUS["53a1"][0])) is Mod2Image.FULL
    assert mod2_image(curve(CORPUS["15a7"][0])) is Mod2Image.G2
    assert mod2_image(curve(CORPUS["17a4"][0])) is Mod2Image.G2
    assert mod2_image(curve(CORPUS["15a1"][0])) is Mod2Image.G1
    assert mod2_image(curve([0, 0, 0, -3, 1])) is Mod2Image.G3
    assert Mod2Image.FULL.omega_density == Fraction(2, 3)
    assert Mod2Image.G3.omega_density == Fraction(1, 3)


def test_17a4_display_form_has_rational_two_torsion():
    # y^2 = x^3 - 11x + 6 vanishes at x = 3
    assert 3**3 - 11 * 3 + 6 == 0
    E = curve(CORPUS["17a4"][0])
    assert two_torsion_rational(E)
    assert rational_roots_of_cubic(two_division_cubic(E)) == [Fraction(1)]


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_image_vs_rational_two_torsion(label):
    E = curve(CORPUS[label][0])
    assert mod2_image(E).has_rational_two_torsion == two_torsion_rational(E)


@pytest.mark.parametrize("label", sorted(CORPUS))
def test_two_torsion_mod_ell_matches_point_parity(label):
    E = curve(CORPUS[label][0])
    for ell in range(3, 400, 2):
        if not is_prime(ell) or E.disc % ell == 0:
            continue
        assert two_torsion_mod_ell(E, ell) == (count_points_mod(E, ell) % 2 == 0), (label, ell)


def test_two_torsion_mod_ell_bad_prime():
    E = curve(CORPUS["53a1"][0])
    with pytest.raises(BadPrime):
        two_torsion_mod_ell(E, 53)
    with pytest.raises(BadPrime):
        two_torsion_mod_ell(E, 2)


def test_display_witnesses():
    E53 = curve(CORPUS["53a1"][0])
    w = short_model_witness(E53, Fraction(1, 6))
    assert list(change_coordinates(E53.ainvs, *w)) == [0, 0, 0, 405, 16038]
    E17 = curve(CORPUS["17a4"][0])
    w = short_model_witness(E17, Fraction(1, 2))
    assert w == (Fraction(1, 2), Fraction(1, 4), Fraction(-1, 2), Fraction(-5, 8))
    assert list(change_coordinates(E17.ainvs, *w)) == [0, 0, 0, -11, 6]
    E15 = curve(CORPUS["15a7"][0])
    assert list(change_coordinates(E15.ainvs, *short_model_witness(E15, Fraction(1, 6)))) == [
        0, 0, 0, -103707, 12854646
    ]


ainv = st.integers(-50, 50)


@given(ainv, ainv, ainv, ainv, ainv, st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(3), Fraction(-1, 6)]),
       st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
def test_coordinate_change_preserves_j(a1, a2, a3, a4, a6, u, r, s, t):
    try:
        E = curve([a1, a2, a3, a4, a6])
    except SingularCurve:
        assume(False)
    new = change_coordinates(E.ainvs, u, r, s, t)
    b2 = new[0] ** 2 + 4 * new[1]
    b4 = 2 * new[3] + new[0] * new[2]
    b6 = new[2] ** 2 + 4 * new[4]
    b8 = new[0] ** 2 * new[4] + 4 * new[1] * new[4] - new[0] * new[2] * new[3] + new[1] * new[2] ** 2 - new[3] ** 2
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    assert disc == E.disc / u**12
    c4 = b2 * b2 - 24 * b4
    assert c4**3 / disc == E.j_invariant


@given(ainv, ainv, ainv, ainv, ainv)
def test_c_invariant_identity(a1, a2, a3, a4, a6):
    try:
        E = curve([a1, a2, a3, a4, a6])
    except SingularCurve:
        return
    assert E.c4**3 - E.c6**2 == 1728 * E.disc
    assert 4 * E.b8 == E.b2 * E.b6 - E.b4**2


def test_cm_flag():
    assert has_cm(curve([0, 0, 0, -1, 0]))
    assert not has_cm(curve(CORPUS["53a1"][0]))


def test_build_profile_root_number_override(caplog):
    E = curve(CORPUS["53a1"][0])
    P = build_profile(E, mu2=0, lambda2=1, root_number=1)
    assert P.root_number == 1 and P.computed_root_number == -1
    assert "disagrees" in caplog.text
    assert build_profile(E).root_number == -1


def test_profile_validation():
    E = curve(CORPUS["53a1"][0])
    with pytest.raises(ValueError):
        build_profile(E, mu2=-1)


def test_greenberg_partial():
    P = build_profile(curve(CORPUS["53a1"][0]), mu2=0, lambda2=1)
    g = greenberg_criterion_partial(P)
    assert g.points_mod_2 == 4 and not g.points_mod_2_odd
    assert g.tamagawa == {53: 1} and g.tamagawa_odd
    assert g.selmer_condition == "NOT CHECKED"
    assert not g.checked_conditions_hold
    with pytest.raises(HypothesisViolated):
        greenberg_criterion_partial(build_profile(curve(CORPUS["37a1"][0])))

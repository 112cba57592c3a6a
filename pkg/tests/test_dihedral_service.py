import random

import pytest

from service.dihedral_service import IDENTITY, DihedralElement, DihedralEquivalence, DihedralSubsetPair
from service.dihedral_service import cghk_construction, dihedral_elements, dihedral_inv, dihedral_mul
from service.dihedral_service import equivalence_witness, format_element, format_elements, hjn_construction
from service.dihedral_service import near_factorizations_equivalent, parse_element, parse_elements
from service.dihedral_service import reflection, render_grid, rotation, sedf_near_factorization
from service.dihedral_service import transform_pair, verify_dihedral_sedf, verify_near_factorization


def elements(text: str, n: int) -> tuple[DihedralElement, ...]:
    return parse_elements(text, n)


def test_dihedral_mul_worked_product() -> None:
    """Verify b * ab^5 = ab^4 in D_13 and the defining relations.

    Args:
        None: This function does not accept parameters.
    """
    assert dihedral_mul(rotation(1, 13), reflection(5, 13), 13) == reflection(4, 13)
    a = reflection(0, 13)
    b = rotation(1, 13)
    assert dihedral_mul(a, a, 13) == IDENTITY
    assert dihedral_mul(dihedral_mul(a, b, 13), a, 13) == dihedral_inv(b, 13)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 6])
def test_group_axioms(n: int) -> None:
    """Verify identity, inverses and associativity over all of D_n.

    Args:
        n: Order of the rotation subgroup.
    """
    group = dihedral_elements(n)
    assert len(group) == 2 * n
    for g in group:
        assert dihedral_mul(g, IDENTITY, n) == dihedral_mul(IDENTITY, g, n) == g
        assert dihedral_mul(g, dihedral_inv(g, n), n) == IDENTITY
        for h in group:
            for k in group:
                assert dihedral_mul(dihedral_mul(g, h, n), k, n) == dihedral_mul(g, dihedral_mul(h, k, n), n)


def test_element_validation() -> None:
    with pytest.raises(ValueError):
        DihedralElement(flip = 2, rot = 0)
    with pytest.raises(ValueError):
        DihedralElement(flip = 0, rot = -1)
    with pytest.raises(ValueError):
        DihedralSubsetPair(n = 3, s = (DihedralElement(flip = 0, rot = 5),), t = ())
    with pytest.raises(ValueError):
        DihedralSubsetPair(n = 0, s = (), t = ())


def test_subset_pair_from_members_is_strict() -> None:
    """Verify external elements are sorted but never reduced or merged.

    Args:
        None: This function does not accept parameters.
    """
    pair = DihedralSubsetPair.from_members(n = 3, s = [reflection(1, 3), rotation(2, 3)], t = [IDENTITY])
    assert pair.s == (rotation(2, 3), reflection(1, 3))
    # b and b^3 are the same element of D_2
    with pytest.raises(ValueError):
        DihedralSubsetPair.from_members(
            n = 2,
            s = [DihedralElement(flip = 0, rot = 1), DihedralElement(flip = 0, rot = 3)],
            t = [],
        )
    with pytest.raises(ValueError, match = "repeats"):
        DihedralSubsetPair.from_members(n = 3, s = [IDENTITY], t = [rotation(1, 3), rotation(1, 3)])


def test_parse_and_format_elements() -> None:
    """Verify every element form, exponent reduction and the normal order of sets.

    Args:
        None: This function does not accept parameters.
    """
    assert parse_element("e", 13) == IDENTITY
    assert parse_element("a", 13) == reflection(0, 13)
    assert parse_element("b", 13) == rotation(1, 13)
    assert parse_element("ab", 13) == reflection(1, 13)
    assert parse_element("ab^5", 13) == reflection(5, 13)
    assert parse_element("b^-1", 13) == rotation(12, 13)
    assert parse_element(" b^ 15 ", 13) == rotation(2, 13)

    assert [format_element(g) for g in (IDENTITY, rotation(1, 7), rotation(3, 7))] == ["e", "b", "b^3"]
    assert [format_element(g) for g in (reflection(0, 7), reflection(1, 7), reflection(4, 7))] == ["a", "ab", "ab^4"]
    assert format_elements(elements("{ab^5,e,b^5}", 13)) == "{e,b^5,ab^5}"
    assert elements("{}", 13) == ()

    for bad in ("", "c", "ba", "ab^x", "aab"):
        with pytest.raises(ValueError):
            parse_element(bad, 13)


def test_verify_near_factorization_failures() -> None:
    """Verify the repeated, missing and identity-product reports."""
    repeated = verify_near_factorization(
        DihedralSubsetPair.of(n = 5, s = elements("{b,b^2}", 5), t = elements("{e,b}", 5))
    )
    assert not repeated.valid
    assert repeated.reason == "product b^2 repeats; product b^4 missing"

    identity = verify_near_factorization(
        DihedralSubsetPair.of(n = 3, s = elements("{b}", 3), t = elements("{b^2}", 3))
    )
    assert not identity.valid and "contains e" in identity.reason


def test_cghk_construction_worked_example() -> None:
    """Verify the n=13, k=5 tile pair.

    Args:
        None: This function does not accept parameters.
    """
    pair = cghk_construction(n = 13, k = 5)
    assert pair.s == elements("{b,b^2,a,ab,ab^2}", 13)
    assert pair.t == elements("{e,b^5,b^10,ab^5,ab^10}", 13)
    assert verify_near_factorization(pair).valid


def test_cghk_construction_sweep() -> None:
    """Verify every divisor k of 2n-1 gives a near-factorization for n up to 61."""
    checked = 0
    for n in range(1, 62):
        for k in range(1, 2 * n):
            if (2 * n - 1) % k:
                continue
            pair = cghk_construction(n = n, k = k)
            assert len(pair.s) == k
            assert len(pair.s) * len(pair.t) == 2 * n - 1
            assert verify_near_factorization(pair).valid, (n, k)
            checked += 1
    assert checked > 100


def test_cghk_construction_rejects_non_divisor() -> None:
    with pytest.raises(ValueError):
        cghk_construction(n = 13, k = 3)
    with pytest.raises(ValueError):
        cghk_construction(n = 0, k = 1)


def test_hjn_construction_worked_examples() -> None:
    """Verify the k=3 and k=5 pairs.

    Args:
        None: This function does not accept parameters.
    """
    small = hjn_construction(3)
    assert small.n == 5
    assert small.s == elements("{e,b,a}", 5)
    assert small.t == elements("{b^3,ab,ab^4}", 5)

    five = hjn_construction(5)
    assert five.n == 13
    assert five.s == elements("{e,b,b^2,a,ab}", 13)
    assert five.t == elements("{b^5,b^10,ab^2,ab^7,ab^12}", 13)


@pytest.mark.parametrize("k", [3, 5, 7, 9, 11, 13])
def test_hjn_construction_is_sedf(k: int) -> None:
    pair = hjn_construction(k)
    assert verify_dihedral_sedf(pair.n, pair.s, pair.t).valid
    assert verify_near_factorization(sedf_near_factorization(pair)).valid


@pytest.mark.parametrize("k", [0, 1, 2, 4, -3])
def test_hjn_construction_rejects_bad_parameter(k: int) -> None:
    with pytest.raises(ValueError):
        hjn_construction(k)
    with pytest.raises(ValueError):
        equivalence_witness(k)


@pytest.mark.parametrize("k", [3, 5, 7, 9, 11, 13])
def test_equivalence_witness(k: int) -> None:
    """Verify A1 h and h A2^-1 reproduce the tile pair with h = ab^((k-1)/2).

    Args:
        k: Odd parameter.
    """
    transcript = equivalence_witness(k)
    tile = cghk_construction(n = transcript.n, k = k)
    assert transcript.h == reflection((k - 1) // 2, transcript.n)
    assert transcript.left == tile.s
    assert transcript.right == tile.t


def test_near_factorizations_equivalent_finds_construction_link() -> None:
    """Verify the search links both constructions and the witness reproduces the target."""
    for k in (3, 5, 7):
        source = sedf_near_factorization(hjn_construction(k))
        target = cghk_construction(n = source.n, k = k)
        witness = near_factorizations_equivalent(source, target)
        assert witness is not None
        assert transform_pair(source, witness) == target


def test_near_factorizations_equivalent_rejects_mismatch() -> None:
    tile = cghk_construction(n = 13, k = 5)
    assert near_factorizations_equivalent(tile, cghk_construction(n = 13, k = 1)) is None
    assert near_factorizations_equivalent(tile, cghk_construction(n = 5, k = 3)) is None
    broken = DihedralSubsetPair.of(n = 13, s = elements("{e,b,b^2,a,ab}", 13), t = tile.t)
    assert near_factorizations_equivalent(tile, broken) is None


def test_transform_pair_keeps_near_factorization() -> None:
    """Verify random transformations of tile pairs stay valid and are found again.

    Args:
        None: This function does not accept parameters.
    """
    rng = random.Random(1313)
    for _ in range(40):
        n, k = rng.choice([(5, 3), (13, 5), (13, 1), (8, 5), (25, 7)])
        tile = cghk_construction(n = n, k = k)
        group = dihedral_elements(n)
        witness = DihedralEquivalence(g = rng.choice(group), h = rng.choice(group), inverted = rng.random() < 0.5)
        moved = transform_pair(tile, witness)
        assert verify_near_factorization(moved).valid
        found = near_factorizations_equivalent(tile, moved)
        assert found is not None
        assert transform_pair(tile, found) == moved


def test_verify_dihedral_sedf_shape_errors() -> None:
    assert "not disjoint" in verify_dihedral_sedf(5, elements("{e,b}", 5), elements("{b,a}", 5)).reason
    assert "sizes differ" in verify_dihedral_sedf(5, elements("{e}", 5), elements("{b,a}", 5)).reason
    assert not verify_dihedral_sedf(5, elements("{e,b,a}", 5), elements("{b^2,ab,ab^4}", 5)).valid


def test_render_grid() -> None:
    """Verify the two-row diagram layout."""
    grid = render_grid(5, [IDENTITY, reflection(1, 5)])
    assert grid.splitlines() == [
        "   0 1 2 3 4",
        "b  X . . . .",
        "ab . X . . .",
    ]
    wide = render_grid(13, cghk_construction(n = 13, k = 5).t, mark = "#").splitlines()
    assert wide[0].startswith("    0  1")
    assert wide[1].split()[1:] == ["#", ".", ".", ".", ".", "#", ".", ".", ".", ".", "#", ".", "."]

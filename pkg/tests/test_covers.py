from itertools import product

import pytest

from branchlift import (
    CanonicalForm,
    CoverSpec,
    CoverValidationError,
    GeneralCoverSpec,
    ModulusContext,
    Perm,
    apply_cover_map,
    canonical_form,
    cover_from_form,
    cover_from_json,
    cover_to_json,
    deck_group_order,
    elements,
    equal,
    equivalent,
    fully_liftable,
    induced_deck_automorphism,
    invariant_under,
    kernel,
    order,
    predict_liftable,
    primary_parts,
    rebuild,
    span,
    swap_with_last,
    validate,
    validate_general,
)
from conftest import all_perms

Z4 = ModulusContext(2, 2)
Z3 = ModulusContext(3, 1)


def case1_spec(p, k, n):
    pk = p**k
    images = [tuple(1 if j == i else 0 for j in range(n - 1)) for i in range(n - 1)]
    images.append(tuple(pk - 1 for _ in range(n - 1)))
    return CoverSpec(p, k, n, (pk,) * (n - 1), tuple(images))


ALL_ONES_3 = CoverSpec(3, 1, 3, (3,), ((1,), (1,), (1,)))
MIXED_224 = CoverSpec(2, 2, 4, (2, 4), ((1, 1), (0, 1), (0, 1), (1, 1)))


def test_constructor_checks():
    with pytest.raises(ValueError):
        CoverSpec(2, 1, 3, (3,), ((1,), (1,), (1,)))  # 3 is not a power of 2
    with pytest.raises(ValueError):
        CoverSpec(2, 2, 3, (4, 2), ((1, 1), (1, 1), (2, 2)))  # not ascending
    with pytest.raises(ValueError):
        CoverSpec(2, 1, 1, (2,), ((1,),))  # n too small
    with pytest.raises(ValueError):
        CoverSpec(2, 1, 3, (2,), ((1,), (1,)))  # wrong row count
    spec = CoverSpec(2, 2, 3, (4,), ((5,), (-1,), (0,)))
    assert spec.images == ((1,), (3,), (0,))  # entries reduced mod factors


def test_validate_examples():
    assert validate(case1_spec(2, 1, 3)) == []
    broken = CoverSpec(2, 1, 3, (2, 2), ((1, 0), (0, 1), (0, 0)))
    assert "NotSumZero" in validate(broken)
    not_onto = CoverSpec(2, 2, 4, (4,), ((2,), (2,), (2,), (2,)))
    assert "NotSurjective" in validate(not_onto)
    wrong_exp = CoverSpec(2, 2, 3, (2,), ((1,), (1,), (0,)))
    assert "WrongExponent" in validate(wrong_exp)


def test_validate_strict_vs_lax():
    spec = CoverSpec(2, 1, 3, (2,), ((1,), (1,), (0,)))
    assert validate(spec, strict=True) == ["ZeroBranchImage"]
    assert validate(spec, strict=False) == []


def test_kernel_case1_trivial():
    for p, k, n in [(2, 1, 3), (3, 1, 3), (2, 2, 4)]:
        ker = kernel(case1_spec(p, k, n))
        assert order(ker) == 1


def test_kernel_all_ones():
    ker = kernel(ALL_ONES_3)
    assert equal(ker, span(Z3, 2, [(1, 2)]))


def test_kernel_mixed_example_against_enumeration():
    ker = kernel(MIXED_224)
    assert order(ker) == 8
    brute = {
        v
        for v in product(range(4), repeat=3)
        if apply_cover_map(MIXED_224, v) == (0, 0)
    }
    assert set(elements(ker)) == brute


def test_first_isomorphism_for_predictions():
    for p, k, n in [(2, 1, 3), (2, 1, 4), (3, 1, 3), (2, 2, 4), (2, 2, 6), (3, 2, 3)]:
        for pr in predict_liftable(p, k, n):
            assert validate(pr.cover) == []
            ker = kernel(pr.cover)
            assert order(ker) * deck_group_order(pr.cover) == p ** (k * (n - 1))


def test_cover_from_form_case1():
    form = canonical_form(span(ModulusContext(2, 1), 2, []))
    spec = cover_from_form(form, 3)
    assert spec.factor_orders == (2, 2)
    assert spec.images == ((1, 0), (0, 1), (1, 1))


def test_cover_from_form_all_ones():
    form = CanonicalForm(Z3, 2, 1, (0, 1), ((1, 2), (0, 1)), Perm.identity(2))
    spec = cover_from_form(form, 3)
    assert spec.factor_orders == (3,)
    assert spec.images == ((1,), (1,), (1,))
    assert equal(kernel(spec), rebuild(form))


def test_cover_from_form_mixed():
    form = CanonicalForm(
        Z4, 3, 2, (1, 1, 2), ((1, 0, 1), (0, 1, 1), (0, 0, 1)), Perm.identity(3)
    )
    spec = cover_from_form(form, 4)
    assert spec.factor_orders == (2, 2, 4)
    assert spec.images == ((1, 0, 3), (0, 1, 3), (0, 0, 1), (1, 1, 1))
    assert equal(kernel(spec), rebuild(form))
    # same class as the predicted two-exponent cover
    predicted = [pr for pr in predict_liftable(2, 2, 4) if pr.family == 2]
    assert len(predicted) == 1
    assert equivalent(spec, predicted[0].cover) is not None


def test_cover_from_form_errors():
    full = canonical_form(span(Z3, 2, [(1, 0), (0, 1)]))
    with pytest.raises(CoverValidationError) as exc:
        cover_from_form(full, 3)
    assert "TrivialGroup" in exc.value.codes
    low = CanonicalForm(Z4, 2, 2, (1, 1), ((1, 0), (0, 1)), Perm.identity(2))
    with pytest.raises(CoverValidationError) as exc:
        cover_from_form(low, 3)
    assert "WrongExponent" in exc.value.codes
    c = span(Z4, 2, [(2, 1)])
    with pytest.raises(CoverValidationError):
        cover_from_form(canonical_form(c), 3)  # column permutation not trivial
    with pytest.raises(ValueError):
        cover_from_form(canonical_form(span(Z4, 2, [])), 5)  # n mismatch


@pytest.mark.parametrize("p,k,b", [(2, 1, 2), (2, 1, 3), (3, 1, 2), (2, 2, 2), (2, 2, 3)])
def test_kernel_round_trip_over_forms(p, k, b):
    from branchlift.census import _identity_forms

    ctx = ModulusContext(p, k)
    for form in _identity_forms(ctx, b, max_rank=b - 1):
        spec = cover_from_form(form, b + 1)
        assert equal(kernel(spec, strict=False), rebuild(form))


def test_equivalent_basics():
    assert equivalent(ALL_ONES_3, ALL_ONES_3) == Perm.identity(3)
    case3 = CoverSpec(3, 1, 3, (3,), ((1,), (1,), (1,)))
    assert equivalent(case1_spec(3, 1, 3), case3) is None  # kernel orders differ
    with pytest.raises(ValueError):
        equivalent(case1_spec(2, 1, 3), case1_spec(2, 1, 4))


def test_equivalent_row_relabeling():
    # permuting the marked points yields an equivalent cover
    for beta in all_perms(4):
        relabeled = CoverSpec(
            2,
            2,
            4,
            MIXED_224.factor_orders,
            tuple(MIXED_224.images[beta(i) - 1] for i in range(1, 5)),
        )
        assert equivalent(MIXED_224, relabeled) is not None


def test_equivalence_relation_properties():
    specs = [
        case1_spec(2, 2, 4),
        MIXED_224,
        CoverSpec(2, 2, 4, (4,), ((1,), (1,), (1,), (1,))),
        CoverSpec(2, 2, 4, (2, 4), ((1, 1), (1, 1), (0, 1), (0, 1))),
        CoverSpec(2, 2, 4, (2, 2, 4), ((1, 0, 1), (0, 1, 1), (0, 0, 1), (1, 1, 1))),
    ]
    for s in specs:
        assert equivalent(s, s) is not None
    for a in specs:
        for b in specs:
            assert (equivalent(a, b) is None) == (equivalent(b, a) is None)
    for a in specs:
        for b in specs:
            for c in specs:
                if equivalent(a, b) is not None and equivalent(b, c) is not None:
                    assert equivalent(a, c) is not None


def test_liftability_is_equivalence_invariant():
    base = [
        MIXED_224,
        CoverSpec(2, 2, 4, (4,), ((1,), (1,), (1,), (1,))),
        CoverSpec(2, 2, 4, (2, 4), ((1, 1), (1, 1), (0, 1), (0, 1))),
    ]
    for spec in base:
        verdict = fully_liftable(kernel(spec)).liftable
        for beta in all_perms(4)[::5]:
            relabeled = CoverSpec(
                2,
                2,
                4,
                spec.factor_orders,
                tuple(spec.images[beta(i) - 1] for i in range(1, 5)),
            )
            if validate(relabeled) == []:
                assert equivalent(spec, relabeled) is not None
                assert fully_liftable(kernel(relabeled)).liftable == verdict


def test_induced_automorphism_identity_cases():
    psi = induced_deck_automorphism(ALL_ONES_3, Perm.identity(3))
    assert psi == ((1,),)
    psi = induced_deck_automorphism(ALL_ONES_3, Perm.transposition(3, 1, 2))
    assert psi == ((1,),)
    # every point permutation fixes the all-ones images, so the induced
    # deck automorphism solved from the defining equations is the identity
    psi = induced_deck_automorphism(ALL_ONES_3, swap_with_last(2, 2))
    assert psi == ((1,),)


def test_induced_automorphism_negation_two_points():
    spec = CoverSpec(3, 1, 2, (3,), ((1,), (2,)))
    psi = induced_deck_automorphism(spec, swap_with_last(1, 1))
    assert psi == ((2,),)  # the map a -> -a on Z/3


def test_induced_automorphism_defining_property():
    from branchlift.action import action_matrix

    specs = [ALL_ONES_3, MIXED_224, case1_spec(2, 2, 4)]
    for spec in specs:
        b = spec.n - 1
        n_mod = spec.p**spec.k
        ker = kernel(spec)
        for alpha in all_perms(spec.n):
            psi = induced_deck_automorphism(spec, alpha)
            if not invariant_under(ker, alpha):
                assert psi is None
                continue
            assert psi is not None
            tmat = action_matrix(alpha)
            for i in range(b):
                basis_vec = tuple(1 if j == i else 0 for j in range(b))
                moved = tuple(
                    sum(basis_vec[r] * tmat[r][c] for r in range(b)) % n_mod
                    for c in range(b)
                )
                lhs_input = apply_cover_map(spec, basis_vec)
                lhs = tuple(
                    sum(lhs_input[t] * psi[t][j] for t in range(len(psi))) % q
                    for j, q in enumerate(spec.factor_orders)
                )
                rhs = apply_cover_map(spec, moved)
                assert lhs == rhs
            # bijective: the images of the generators span the deck group
            ctx = spec.ctx
            t = len(spec.factor_orders)
            scales = [ctx.modulus // q for q in spec.factor_orders]
            emb = [[(x * s) % ctx.modulus for x, s in zip(row, scales)] for row in psi]
            assert order(span(ctx, t, emb)) == deck_group_order(spec)


def test_induced_automorphism_bijective_iff_invariant():
    specs = [ALL_ONES_3, MIXED_224]
    for spec in specs:
        ker = kernel(spec)
        for alpha in all_perms(spec.n):
            assert (induced_deck_automorphism(spec, alpha) is not None) == (
                invariant_under(ker, alpha)
            )


def test_primary_parts_z6():
    g = GeneralCoverSpec(6, (6,), ((1,),) * 6)
    parts = primary_parts(g)
    assert [(s.p, s.k, s.factor_orders) for s in parts] == [(2, 1, (2,)), (3, 1, (3,))]
    assert all(part.images == ((1,),) * 6 for part in parts)
    assert validate_general(g) == []


def test_primary_parts_p_group_identity():
    g = GeneralCoverSpec(3, (3,), ((1,), (1,), (1,)))
    parts = primary_parts(g)
    assert len(parts) == 1
    assert parts[0] == ALL_ONES_3


def test_primary_parts_kernel_orders_multiply():
    g = GeneralCoverSpec(3, (2, 9), ((1, 1), (1, 3), (0, 5)))
    assert validate_general(g) == []
    parts = primary_parts(g)
    combined = 1
    for part in parts:
        combined *= order(kernel(part, strict=False))
    exponent = 18
    brute = 0
    for v in product(range(exponent), repeat=2):
        img = tuple(
            sum(x * row[j] for x, row in zip(v, g.images[:2])) % q
            for j, q in enumerate(g.factor_orders)
        )
        brute += img == (0, 0)
    assert combined == brute


def _general_kernel_invariant(g):
    """Brute-force oracle over the full coefficient ring: the kernel of a
    general cover and its invariance under every point permutation,
    computed with no prime-power machinery."""
    from branchlift.action import action_matrix
    from math import lcm

    exponent = lcm(*g.factor_orders)
    b = g.n - 1
    ker = frozenset(
        v
        for v in product(range(exponent), repeat=b)
        if all(
            sum(x * row[j] for x, row in zip(v, g.images[:b])) % q == 0
            for j, q in enumerate(g.factor_orders)
        )
    )
    for alpha in all_perms(g.n):
        t = action_matrix(alpha)
        moved = frozenset(
            tuple(sum(x * t[i][j] for i, x in enumerate(v)) % exponent for j in range(b))
            for v in ker
        )
        if moved != ker:
            return False
    return True


@pytest.mark.parametrize(
    "g",
    [
        GeneralCoverSpec(6, (6,), ((1,),) * 6),
        GeneralCoverSpec(3, (6,), ((1,), (1,), (4,))),
        GeneralCoverSpec(4, (6,), ((1,), (1,), (5,), (5,))),
        GeneralCoverSpec(3, (2, 9), ((1, 1), (1, 3), (0, 5))),
    ],
)
def test_general_cover_liftable_iff_every_part_is(g):
    assert validate_general(g, strict=False) == []
    parts = primary_parts(g)
    parts_liftable = all(
        fully_liftable(kernel(part, strict=False)).liftable for part in parts
    )
    assert parts_liftable == _general_kernel_invariant(g)


def test_validate_general_failures():
    bad_sum = GeneralCoverSpec(3, (6,), ((1,), (1,), (1,)))
    assert "NotSumZero" in validate_general(bad_sum)
    not_onto = GeneralCoverSpec(3, (6,), ((2,), (2,), (2,)))
    assert "NotSurjective" in validate_general(not_onto)
    zero_row = GeneralCoverSpec(3, (6,), ((1,), (5,), (0,)))
    assert "ZeroBranchImage" in validate_general(zero_row)
    assert validate_general(zero_row, strict=False) == []


def test_cover_json_round_trip():
    data = cover_to_json(MIXED_224)
    assert data == {
        "p": 2,
        "k": 2,
        "n": 4,
        "factors": [2, 4],
        "images": [[1, 1], [0, 1], [0, 1], [1, 1]],
    }
    assert cover_from_json(data) == MIXED_224


def test_cover_json_verifies_sum():
    data = cover_to_json(MIXED_224)
    data["images"][3] = [1, 2]  # corrupt the stored last row
    with pytest.raises(CoverValidationError):
        cover_from_json(data)

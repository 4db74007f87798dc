import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covha.funcspace import GroupFunction
from covha.groups import (
    Group,
    GroupError,
    Subgroup,
    build_group,
    coset_weight,
    cyclic,
    cyclic_subgroups,
    dihedral,
    direct_product,
    from_permutations,
    haar,
    left_cosets,
    parse_descriptor,
    quaternion8,
    subgroup_closure,
    symmetric,
    weil_sum,
    whole_group,
)
from oracles import closure

ALL = [cyclic(1), cyclic(4), cyclic(6), dihedral(3), dihedral(4), quaternion8(), symmetric(3), symmetric(4)]


@pytest.mark.parametrize("g", ALL, ids=lambda g: g.name)
def test_axioms_by_brute_force(g):
    t, e, n = g.cayley, g.identity, g.order
    for a, b, c in itertools.product(range(n), repeat=3):
        assert t[t[a, b], c] == t[a, t[b, c]]
    for x in range(n):
        assert t[e, x] == t[x, e] == x
        assert t[g.inverses[x], x] == t[x, g.inverses[x]] == e
        assert g.modular(x) == 1.0
    assert g.axioms_hold()


def test_cyclic_table():
    g = build_group({"kind": "cyclic", "n": 4})
    assert g.order == 4
    for i in range(4):
        for j in range(4):
            assert g.cayley[i, j] == (i + j) % 4


def test_symmetric3_involutions():
    g = build_group("symmetric 3")
    assert g.order == 6
    # oracle: count permutations of {0,1,2} equal to their own inverse, excluding identity
    perms = list(itertools.permutations(range(3)))
    invol = sum(1 for p in perms if p != (0, 1, 2) and all(p[p[i]] == i for i in range(3)))
    assert invol == 3
    assert sum(1 for x in range(6) if x != g.identity and g.mul(x, x) == g.identity) == invol


def test_nonassociative_table_rejected():
    # a Latin square with identity 0 that is not associative (order 5)
    t = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(GroupError, match="associative"):
        Group.from_table(t)


@pytest.mark.parametrize(
    "table, msg",
    [
        ([[0, 1], [1, 1]], "inverse"),
        ([[0, 0], [0, 0]], "identity"),
        ([[0, 2], [2, 0]], "range"),
        ([[0, 1, 2]], "square"),
    ],
)
def test_bad_tables(table, msg):
    with pytest.raises(GroupError, match=msg):
        Group.from_table(table)


def test_order_cap(monkeypatch):
    monkeypatch.setenv("COVHA_MAX_ORDER", "10")
    with pytest.raises(GroupError, match="cap"):
        build_group("Z12")
    with pytest.raises(GroupError, match="cap"):
        build_group("S4")
    monkeypatch.setenv("COVHA_MAX_ORDER", "128")
    assert build_group("Z100").order == 100


@pytest.mark.parametrize(
    "text, kind, n",
    [("dihedral 4", "dihedral", 4), ("S3", "symmetric", 3), ("Z4", "cyclic", 4), ("q8", "quaternion", None)],
)
def test_short_descriptors(text, kind, n):
    d = parse_descriptor(text)
    assert d["kind"] == kind
    assert d.get("n") == n


def test_malformed_json_descriptor():
    with pytest.raises(GroupError, match="JSON"):
        parse_descriptor('{"kind": "cyclic"')


def test_descriptor_kinds():
    z2 = cyclic(2)
    g = build_group({"kind": "table", "table": z2.cayley.tolist()})
    assert g.order == 2
    g = build_group({"kind": "perm_gens", "generators": [[1, 2, 0], [1, 0, 2]]})
    assert g.order == 6 and not g.is_abelian
    g = build_group({"kind": "product", "factors": ["Z2", {"kind": "cyclic", "n": 3}]})
    assert g.order == 6 and g.is_abelian
    assert any(g.element_order(x) == 6 for x in range(6))
    with pytest.raises(GroupError):
        build_group({"kind": "nope"})
    with pytest.raises(GroupError):
        build_group({"kind": "cyclic"})


def test_named_groups_structure():
    q = quaternion8()
    assert sorted(q.element_order(x) for x in range(8)) == [1, 2, 4, 4, 4, 4, 4, 4]
    d = dihedral(4)
    assert sum(d.element_order(x) == 2 for x in range(8)) == 5
    assert not d.is_abelian
    assert direct_product(cyclic(2), cyclic(2)).order == 4
    assert from_permutations([[1, 0, 2, 3], [0, 1, 3, 2]]).order == 4


def test_labels():
    d = dihedral(4)
    assert d.element_by_label("rot") == d.element_by_label("r") == 1
    assert d.label(d.element_by_label("refl")) == "s"
    assert d.element_by_label("5") == 5
    with pytest.raises(GroupError):
        d.element_by_label("x")


def test_closure_examples():
    z4 = cyclic(4)
    assert subgroup_closure(z4, [2]).members == (0, 2)
    s3 = symmetric(3)
    three_cycle = s3.element_by_label("120")
    assert subgroup_closure(s3, [three_cycle]).order == 3
    for g in ALL:
        assert subgroup_closure(g, []).members == (g.identity,)


@pytest.mark.parametrize("g", ALL, ids=lambda g: g.name)
def test_closure_matches_oracle(g):
    for x in range(g.order):
        for y in range(0, g.order, 3):
            assert list(subgroup_closure(g, [x, y]).members) == closure(g.cayley, [x, y], g.identity)


def test_subgroup_validation():
    z4 = cyclic(4)
    with pytest.raises(GroupError):
        Subgroup.from_members(z4, [0, 1])
    with pytest.raises(GroupError):
        Subgroup.from_members(z4, [2])
    with pytest.raises(GroupError):
        Subgroup.from_members(z4, [0, 7])
    assert Subgroup.from_members(z4, [2, 0]) == subgroup_closure(z4, [2])


def test_normality():
    s3 = symmetric(3)
    assert subgroup_closure(s3, [s3.element_by_label("120")]).is_normal()
    assert not subgroup_closure(s3, [1]).is_normal()


def test_cosets_examples():
    z4 = cyclic(4)
    cp = left_cosets(z4, subgroup_closure(z4, [2]))
    assert cp.representatives == (0, 1)
    assert [cp.cell(0), cp.cell(1)] == [[0, 2], [1, 3]]
    for g in ALL:
        cp = left_cosets(g, whole_group(g))
        assert cp.representatives == (g.identity,)
    s3 = symmetric(3)
    cp = left_cosets(s3, subgroup_closure(s3, [s3.element_by_label("120")]))
    assert len(cp) == 2 and all(len(cp.cell(i)) == 3 for i in range(2))


@pytest.mark.parametrize("g", ALL, ids=lambda g: g.name)
def test_coset_partition_invariants(g):
    for h in cyclic_subgroups(g):
        cp = left_cosets(g, h)
        assert len(cp) == g.order // h.order
        seen = []
        for i, r in enumerate(cp.representatives):
            cell = cp.cell(i)
            # oracle: {r h : h in H} built by loop
            assert cell == sorted({int(g.cayley[r, s]) for s in h.members})
            assert r == min(cell) and r in cell
            assert all(cp.coset_of[x] == i for x in cell)
            seen += cell
        assert sorted(seen) == list(range(g.order))


def test_cosets_foreign_subgroup():
    with pytest.raises(GroupError):
        left_cosets(cyclic(4), subgroup_closure(cyclic(4), [2]))


def test_haar_examples():
    z4 = cyclic(4)
    p = haar(z4, "probability")
    assert p.weight == 0.25 and p.total_mass == 1.0
    c = haar(z4, "counting")
    assert c.weight == 1.0 and c.total_mass == 4.0
    assert haar(symmetric(3), "mass", 12).weight == 2.0
    with pytest.raises(GroupError):
        haar(z4, "mass", 0)
    with pytest.raises(GroupError):
        haar(z4, "mass", -1.0)


def test_weil_examples():
    z4 = cyclic(4)
    h = subgroup_closure(z4, [2])
    mu_g, mu_h = haar(z4, "counting"), haar(h, "probability")
    assert coset_weight(mu_g, h, mu_h) == 2.0
    assert weil_sum(GroupFunction.constant(z4), h, mu_g, mu_h, 2.0) == pytest.approx(4.0)
    assert weil_sum(GroupFunction.delta(z4, 0), h, mu_g, mu_h, 2.0) == pytest.approx(1.0)
    with pytest.raises(GroupError, match="Weil"):
        weil_sum(GroupFunction.constant(z4), h, mu_g, mu_h, 1.0)


@pytest.mark.parametrize("g", ALL[1:], ids=lambda g: g.name)
def test_weil_formula_random(g):
    rng = np.random.default_rng(5)
    for h in cyclic_subgroups(g):
        for mode_g, mode_h, mass in [("counting", "probability", None), ("probability", "mass", 3.0)]:
            mu_g, mu_h = haar(g, mode_g), haar(h, mode_h, mass)
            w = coset_weight(mu_g, h, mu_h)
            for _ in range(100):
                f = GroupFunction.random(g, rng)
                assert abs(weil_sum(f, h, mu_g, mu_h, w) - f.values.sum() * mu_g.weight) <= 1e-12 * max(1, g.order)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(ALL[1:]), st.integers(0, 63), st.integers(0, 2**32 - 1))
def test_haar_bi_invariance(g, y, seed):
    y %= g.order
    f = GroupFunction.random(g, np.random.default_rng(seed))
    mu = haar(g, "probability")
    base = f.values.sum() * mu.weight
    assert abs(f.values[g.cayley[y]].sum() * mu.weight - base) <= 1e-12
    assert abs(f.values[g.cayley[:, y]].sum() * mu.weight - base) <= 1e-12


def test_fingerprint_stable():
    assert cyclic(4).fingerprint == build_group(json.dumps({"kind": "cyclic", "n": 4})).fingerprint
    assert cyclic(4).fingerprint != dihedral(2).fingerprint

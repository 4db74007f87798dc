import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covha.characters import enumerate_characters
from covha.covariant import CovariantContext, apply_T, kernel_basis, random_covariant
from covha.funcspace import GroupFunction, lp_norm
from covha.groups import cyclic, cyclic_subgroups, dihedral, haar, quaternion8, subgroup_closure, symmetric, trivial_subgroup
from covha.quotient import (
    QuotientProblem,
    default_tol,
    kernel_closure_check,
    quotient_norm,
    verify_quotient_isometry,
)

PS = [1.0, 1.5, 2.0, 3.0]


def some_contexts():
    out = []
    for g in [cyclic(4), dihedral(4), quaternion8(), symmetric(3)]:
        for h in cyclic_subgroups(g)[1:]:
            chars = enumerate_characters(h)
            out.append(CovariantContext.build(g, h, chars[-1]))
    return out


CTXS = some_contexts()


def solve(ctx, f, p, **kw):
    return quotient_norm(QuotientProblem.build(ctx, f, p), **kw)


@pytest.mark.parametrize("p", PS)
def test_kernel_vector_has_zero_norm(z4_ctx, p):
    kb = kernel_basis(z4_ctx)
    f = GroupFunction(z4_ctx.group, kb.matrix @ np.array([1 + 2j, -0.5]))
    prob = QuotientProblem.build(z4_ctx, f, p, kb)
    res = quotient_norm(prob)
    assert res.value <= default_tol(p)
    assert res.minimizer(prob).allclose(-f, 1e-4)


@pytest.mark.parametrize("p", PS)
def test_covariant_attains_own_norm(z4_ctx, p, rng):
    for _ in range(5):
        psi = random_covariant(z4_ctx, rng)
        res = solve(z4_ctx, psi, p)
        assert abs(res.value - lp_norm(psi, p, z4_ctx.mu_g)) <= default_tol(p)
        assert np.max(np.abs(res.minimizer_coeffs)) <= 1e-4


def test_p2_closed_form(z4_ctx, rng):
    for _ in range(20):
        f = GroupFunction.random(z4_ctx.group, rng)
        res = solve(z4_ctx, f, 2.0)
        assert res.method == "least-squares"
        assert abs(res.value - lp_norm(apply_T(z4_ctx, f), 2, z4_ctx.mu_g)) <= 1e-10
        # minimizer g* = T f - f
        prob = QuotientProblem.build(z4_ctx, f, 2.0)
        assert res.minimizer(prob).allclose(apply_T(z4_ctx, f) - f, 1e-12)


@pytest.mark.parametrize("p, tol", [(1.0, 1e-6), (1.5, 1e-8), (2.0, 1e-10), (3.0, 1e-6)])
def test_isometry_z4(z4_ctx, p, tol):
    r = verify_quotient_isometry(z4_ctx, p, samples=20)
    assert r.passed and r.value <= tol


@pytest.mark.parametrize("ctx", CTXS, ids=lambda c: c.describe())
@pytest.mark.parametrize("p", PS)
def test_isometry_contexts(ctx, p):
    r = verify_quotient_isometry(ctx, p, samples=5, seed=11)
    assert r.passed, (r.value, r.bound)
    assert r.data["not_converged"] == 0


def cvx_quotient(f, v, w, p):
    cp = pytest.importorskip("cvxpy")
    k = v.shape[1]
    cr, ci = cp.Variable(k), cp.Variable(k)
    re = f.real + v.real @ cr - v.imag @ ci
    im = f.imag + v.imag @ cr + v.real @ ci
    mods = cp.norm(cp.vstack([re, im]), 2, axis=0)
    obj = w * cp.sum(mods) if p == 1 else cp.norm(mods, p) * w ** (1 / p)
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_against_conic_solver(p):
    """Independent second route: the same minimization as a second-order cone program."""
    rng = np.random.default_rng(8)
    for ctx in CTXS[:6]:
        f = GroupFunction.random(ctx.group, rng)
        kb = kernel_basis(ctx)
        ours = quotient_norm(QuotientProblem.build(ctx, f, p, kb)).value
        theirs = cvx_quotient(f.values, kb.matrix, ctx.mu_g.weight, p)
        assert abs(ours - theirs) <= 1e-5 * max(1.0, theirs)


def test_lp_certificate_brackets_value(z4_ctx, rng):
    g = dihedral(4)
    h = subgroup_closure(g, [1])
    ctx = CovariantContext.build(g, h, enumerate_characters(h)[1])
    for _ in range(10):
        res = solve(ctx, GroupFunction.random(g, rng), 1.0)
        assert res.converged
        assert res.lower_bound <= res.value + 1e-12
        assert res.value - res.lower_bound <= 1e-6


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_minimizer_beats_perturbations(p):
    rng = np.random.default_rng(9)
    ctx = CTXS[3]
    f = GroupFunction.random(ctx.group, rng)
    prob = QuotientProblem.build(ctx, f, p)
    res = quotient_norm(prob)
    v = prob.kernel.matrix
    best = lp_norm(f + res.minimizer(prob), p, ctx.mu_g)
    assert abs(best - res.value) <= 1e-9
    for _ in range(100):
        d = 1e-3 * (rng.standard_normal(v.shape[1]) + 1j * rng.standard_normal(v.shape[1]))
        c = res.minimizer_coeffs + d
        assert lp_norm(GroupFunction(ctx.group, f.values + v @ c), p, ctx.mu_g) >= res.value - default_tol(p)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(CTXS), st.integers(0, 2**32 - 1))
def test_bounded_by_norm_and_monotone_in_p(ctx, seed):
    f = GroupFunction.random(ctx.group, np.random.default_rng(seed))
    ctx_p = ctx.with_measures(mu_g=haar(ctx.group, "probability"))
    vals = []
    for p in PS:
        res = solve(ctx_p, f, p)
        assert 0 <= res.value <= lp_norm(f, p, ctx_p.mu_g) + 1e-12
        vals.append(res.value)
    assert all(a <= b + 1e-6 for a, b in zip(vals, vals[1:]))


def test_non_convergence_is_flagged(z4_ctx):
    g = dihedral(4)
    h = subgroup_closure(g, [1])
    ctx = CovariantContext.build(g, h, enumerate_characters(h)[1])
    f = GroupFunction.random(g, np.random.default_rng(3))
    with pytest.warns(RuntimeWarning, match="did not converge"):
        res = solve(ctx, f, 3.0, max_iter=2)
    assert not res.converged
    assert res.value <= lp_norm(f, 3.0, ctx.mu_g)


def test_tol_must_be_positive(z4_ctx):
    with pytest.raises(ValueError):
        solve(z4_ctx, GroupFunction.zeros(z4_ctx.group), 2.0, tol=0.0)


def test_trivial_kernel():
    g = cyclic(6)
    ctx = CovariantContext.build(g, trivial_subgroup(g))
    f = GroupFunction.random(g, np.random.default_rng(4))
    for p in PS:
        res = solve(ctx, f, p)
        assert res.method == "trivial" and res.value == lp_norm(f, p, ctx.mu_g)


def test_optimizer_starts_at_zero(z4_ctx):
    # a single iteration cannot reach the optimum from g = 0 for a generic f
    g = dihedral(4)
    h = subgroup_closure(g, [1])
    ctx = CovariantContext.build(g, h, enumerate_characters(h)[2])
    f = GroupFunction.random(g, np.random.default_rng(5))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = solve(ctx, f, 1.5, max_iter=1)
    target = lp_norm(apply_T(ctx, f), 1.5, ctx.mu_g)
    assert res.value - target > 1e-6


@pytest.mark.parametrize("ctx", CTXS, ids=lambda c: c.describe())
def test_kernel_closure(ctx):
    structure, kernel = kernel_closure_check(ctx, samples=100)
    assert structure.id == "quotient.structure" and structure.passed and structure.value == 0
    assert kernel.id == "quotient.kernel" and kernel.passed and kernel.value <= 1e-12


def test_kernel_closure_trivial_subgroup():
    g = symmetric(3)
    structure, kernel = kernel_closure_check(CovariantContext.build(g, trivial_subgroup(g)), samples=5)
    assert structure.passed and kernel.passed

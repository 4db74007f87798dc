"""Dual-space checks: functionals given by representer functions, the adjoint of T, annihilators.

On a finite group every functional on ``C^G`` is ``f -> <f, g>`` for a unique
representer ``g``, so statements about dual spaces become statements about
subspaces of ``C^G`` and are checked by rank computations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .covariant import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    CovariantContext,
    SubspaceBasis,
    apply_T,
    covariance_residual,
    covariant_basis,
    kernel_basis,
)
from .funcspace import DEFAULT_TOL, GroupFunction, conjugate_exponent, lp_norm, pairing, sup_norm
from .groups import GroupError, HaarMeasure, coset_weight, weil_sum
from .report import CheckResult


@dataclass(frozen=True, eq=False)
class DualFunctional:
    representer: GroupFunction
    measure: HaarMeasure
    q: float = 2.0

    def __call__(self, f: GroupFunction) -> complex:
        return pairing(f, self.representer, self.measure)

    def restricted_norm_l2(self, basis: SubspaceBasis) -> float:
        """Operator norm on ``span(basis)`` with the L2 norm of the measure."""
        b = basis.matrix
        if b.shape[1] == 0:
            return 0.0
        # orthonormalize w.r.t. <f, g> = w sum f conj(g)
        qm, _ = np.linalg.qr(b)
        qm = qm / np.sqrt(self.measure.weight)
        coeffs = self.measure.weight * (qm.conj().T @ self.representer.values)
        return float(np.linalg.norm(coeffs))


def adjoint_check(
    ctx: CovariantContext,
    p: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> CheckResult:
    """``Lambda_g(T f) = Lambda_{T g}(f)``, i.e. the adjoint of T on L^p is T on L^q."""
    if not 1 < p < np.inf:
        raise ValueError("adjoint check needs 1 < p < infinity")
    q = conjugate_exponent(p)
    rng = np.random.default_rng(seed)
    res = 0.0
    for _ in range(samples):
        f = GroupFunction.random(ctx.group, rng)
        g = GroupFunction.random(ctx.group, rng)
        lhs = DualFunctional(g, ctx.mu_g, q)(apply_T(ctx, f))
        rhs = DualFunctional(apply_T(ctx, g), ctx.mu_g, q)(f)
        res = max(res, abs(lhs - rhs))
    return CheckResult("adjoint", f"T* Lambda_g = Lambda_(Tg) (p={p:g}, q={q:g})", res, tol, seed, data={"p": p, "q": q})


def annihilator(kernel: SubspaceBasis, mu_g: HaarMeasure) -> SubspaceBasis:
    """Representers ``g`` with ``<f, g> = 0`` for every ``f`` in ``span(kernel)``."""
    if kernel.kind != "kernel":
        raise GroupError("annihilator expects a kernel basis")
    ctx = kernel.context
    n = ctx.group.order
    if kernel.rank == 0:
        vecs = tuple(GroupFunction.delta(ctx.group, x) for x in range(n))
        return SubspaceBasis(ctx, vecs, "annihilator")
    # <v_i, g> = w * sum_x v_i(x) conj(g(x)) = 0  <=>  V^T conj(g) = 0
    pair = mu_g.weight * kernel.matrix.T
    ns = linalg.null_space(pair)
    vecs = tuple(GroupFunction(ctx.group, np.conj(ns[:, k])) for k in range(ns.shape[1]))
    return SubspaceBasis(ctx, vecs, "annihilator")


def _right_covariance(ctx: CovariantContext, g: GroupFunction) -> float:
    # R_h g = xi(h) g for all h, the same relation as covariance
    return covariance_residual(ctx, g)


def verify_duality(
    ctx: CovariantContext, p: float, seed: int = DEFAULT_SEED, tol: float = DEFAULT_TOL
) -> list[CheckResult]:
    """Annihilator of the kernel equals the covariant subspace; both proof directions checked.

    For ``p = 1`` the dual exponent is infinity; the subspace is the same set,
    and the sup-norm bound ``||T f||_inf <= mu_H(H) ||f||_inf`` is added.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    q = conjugate_exponent(p)
    kb = kernel_basis(ctx)
    ann = annihilator(kb, ctx.mu_g)
    cov = covariant_basis(ctx)
    r_ann, r_cov = ann.rank, cov.rank
    r_joint = linalg.rank(np.hstack([ann.matrix, cov.matrix]))
    rank_gap = abs(r_ann - ctx.index) + abs(r_cov - ctx.index) + abs(r_joint - ctx.index)

    # (i) annihilator vectors are covariant
    inv_res = max((_right_covariance(ctx, g) for g in ann.vectors), default=0.0)

    # (ii) covariant g kills the kernel, through the coset decomposition of the integral:
    # sum_G f conj(g) w  =  sum_cosets (sum_H f(xh) conj(xi(h)) w_H) conj(g(x)) w_coset
    w_coset = coset_weight(ctx.mu_g, ctx.subgroup, ctx.mu_h)
    reps = np.array(ctx.cosets.representatives)
    weil_res = 0.0
    for f in kb.vectors:
        tf = apply_T(ctx, f).values
        for g in cov.vectors:
            direct = pairing(f, g, ctx.mu_g)
            iterated = weil_sum(f.values * np.conj(g.values), ctx.subgroup, ctx.mu_g, ctx.mu_h, w_coset)
            via_t = complex(np.sum(tf[reps] * np.conj(g.values[reps])) * w_coset)
            weil_res = max(weil_res, abs(direct - iterated), abs(direct), abs(via_t))

    sid = "duality.1inf" if p == 1 else "duality.pq"
    results = [
        CheckResult(
            sid,
            f"annihilator of ker T = covariant subspace (p={p:g}, q={q:g})",
            float(rank_gap),
            0.0,
            data={"p": p, "q": q, "rank_annihilator": r_ann, "rank_covariant": r_cov, "rank_joint": r_joint},
        ),
        CheckResult(f"{sid}.annihilator_covariant", "annihilator vectors satisfy R_h g = xi(h) g", inv_res, tol),
        CheckResult(f"{sid}.covariant_annihilates", "covariant g kills ker T via the coset decomposition", weil_res, tol),
    ]
    if p == 1:
        rng = np.random.default_rng(seed)
        ratio = 0.0
        for _ in range(DEFAULT_SAMPLES):
            f = GroupFunction.random(ctx.group, rng)
            ratio = max(ratio, sup_norm(apply_T(ctx, f)) / sup_norm(f))
        mass = ctx.mu_h.total_mass
        results.append(
            CheckResult("duality.1inf.sup_contraction", "||Tf||_inf <= mu_H(H) ||f||_inf", ratio, mass * (1 + tol))
        )
    return results


def l2_functional_isometry_check(
    ctx: CovariantContext,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
) -> CheckResult:
    """The norm of ``Lambda_g`` on the covariant subspace equals ``||T g||_2``."""
    rng = np.random.default_rng(seed)
    cov = covariant_basis(ctx)
    res = 0.0
    for _ in range(samples):
        g = GroupFunction.random(ctx.group, rng)
        lhs = DualFunctional(g, ctx.mu_g).restricted_norm_l2(cov)
        rhs = lp_norm(apply_T(ctx, g), 2, ctx.mu_g)
        res = max(res, abs(lhs - rhs) / max(1.0, rhs))
    return CheckResult("duality.l2_isometry", "||Lambda_g restricted to L2_xi|| = ||T g||_2", res, tol, seed)

"""The averaging operator ``T`` of a subgroup character and its covariant subspace.

For a subgroup ``H``, a character ``xi`` of ``H`` and a Haar measure on ``H``::

    (T f)(x) = sum_{s in H} f(x s) conj(xi(s)) w_H

With the probability measure on ``H`` this is the projection of ``C^G`` onto
the covariant functions ``psi(x s) = xi(s) psi(x)``; its kernel is ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg
from .characters import Character, enumerate_characters
from .funcspace import (
    DEFAULT_TOL,
    GroupFunction,
    convolve,
    left_translation_matrix,
    lp_norm,
    pairing,
    right_translation_matrix,
    translate_left,
    translate_right,
)
from .groups import CosetPartition, Group, GroupError, HaarMeasure, Subgroup, haar, left_cosets
from .report import CheckResult

DEFAULT_SEED = 42
DEFAULT_SAMPLES = 100


@dataclass(frozen=True, eq=False)
class CovariantContext:
    group: Group
    subgroup: Subgroup
    character: Character
    mu_h: HaarMeasure
    mu_g: HaarMeasure

    @classmethod
    def build(
        cls,
        group: Group,
        subgroup: Subgroup,
        character: Character | None = None,
        mu_h: HaarMeasure | None = None,
        mu_g: HaarMeasure | None = None,
    ) -> "CovariantContext":
        """Defaults: trivial character, probability measure on H, counting measure on G."""
        if subgroup.parent is not group:
            raise GroupError("subgroup does not belong to the group")
        if character is None:
            character = enumerate_characters(subgroup)[0]
        if character.subgroup != subgroup:
            raise GroupError("character is not defined on this subgroup")
        mu_h = mu_h or haar(subgroup, "probability")
        mu_g = mu_g or haar(group, "counting")
        if mu_h.size != subgroup.order or mu_g.size != group.order:
            raise GroupError("measures do not match the group and subgroup")
        return cls(group, subgroup, character, mu_h, mu_g)

    def with_measures(self, mu_h: HaarMeasure | None = None, mu_g: HaarMeasure | None = None) -> "CovariantContext":
        return CovariantContext(
            self.group, self.subgroup, self.character, mu_h or self.mu_h, mu_g or self.mu_g
        )

    @cached_property
    def shift(self) -> np.ndarray:
        """``shift[x, j] = x * members[j]``."""
        return self.group.cayley[:, np.array(self.subgroup.members)]

    @cached_property
    def cosets(self) -> CosetPartition:
        return left_cosets(self.group, self.subgroup)

    @property
    def index(self) -> int:
        return self.subgroup.index

    def describe(self) -> str:
        return f"{self.group.name} / {list(self.subgroup.members)} / {self.character.label()}"

    def __repr__(self) -> str:
        return f"CovariantContext({self.describe()})"


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    context: CovariantContext
    vectors: tuple[GroupFunction, ...]
    kind: str  # "covariant" | "kernel" | "annihilator"

    @property
    def rank(self) -> int:
        return len(self.vectors)

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as columns, shape ``(|G|, rank)``."""
        n = self.context.group.order
        if not self.vectors:
            return np.zeros((n, 0), dtype=complex)
        return np.column_stack([v.values for v in self.vectors])


def _check(ctx: CovariantContext, f: GroupFunction) -> None:
    if f.group is not ctx.group and not np.array_equal(f.group.cayley, ctx.group.cayley):
        raise GroupError("function does not live on the context's group")


def apply_T(ctx: CovariantContext, f: GroupFunction) -> GroupFunction:
    _check(ctx, f)
    xi_bar = np.conj(ctx.character.values)
    return GroupFunction(ctx.group, (f.values[ctx.shift] @ xi_bar) * ctx.mu_h.weight)


def covariance_residual(ctx: CovariantContext, psi: GroupFunction) -> float:
    """``max |psi(x s) - xi(s) psi(x)|`` over ``x in G``, ``s in H``."""
    _check(ctx, psi)
    v = psi.values
    return float(np.max(np.abs(v[ctx.shift] - v[:, None] * ctx.character.values[None, :])))


def is_covariant(ctx: CovariantContext, psi: GroupFunction, tol: float = DEFAULT_TOL) -> bool:
    return covariance_residual(ctx, psi) <= tol


def operator_matrix(ctx: CovariantContext) -> np.ndarray:
    """Matrix of ``T``: column ``j`` is ``T(delta_j)``."""
    n = ctx.group.order
    p = np.zeros((n, n), dtype=complex)
    xi_bar = np.conj(ctx.character.values) * ctx.mu_h.weight
    rows = np.repeat(np.arange(n), ctx.subgroup.order)
    np.add.at(p, (rows, ctx.shift.ravel()), np.tile(xi_bar, n))
    return p


def covariant_basis(ctx: CovariantContext) -> SubspaceBasis:
    """One vector per coset ``rH``: ``b(r h) = xi(h)``, zero off the coset."""
    xi = ctx.character.values
    vecs = []
    for cell in ctx.cosets.cells:
        v = np.zeros(ctx.group.order, dtype=complex)
        v[cell] = xi
        vecs.append(GroupFunction(ctx.group, v))
    return SubspaceBasis(ctx, tuple(vecs), "covariant")


def kernel_basis(ctx: CovariantContext) -> SubspaceBasis:
    """Null space of the operator matrix, by elimination."""
    ns = linalg.null_space(operator_matrix(ctx))
    vecs = tuple(GroupFunction(ctx.group, ns[:, k]) for k in range(ns.shape[1]))
    return SubspaceBasis(ctx, vecs, "kernel")


def random_covariant(ctx: CovariantContext, rng: np.random.Generator) -> GroupFunction:
    """Random complex combination of the covariant basis."""
    b = covariant_basis(ctx).matrix
    c = rng.standard_normal(b.shape[1]) + 1j * rng.standard_normal(b.shape[1])
    return GroupFunction(ctx.group, b @ c)


# ---------------------------------------------------------------------------
# checks


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def idempotence_check(ctx: CovariantContext, tol: float = DEFAULT_TOL) -> CheckResult:
    """``P^2 = m P`` with ``m`` the total mass of the measure on H (so ``P^2 = P`` for probability)."""
    p = operator_matrix(ctx)
    res = _maxabs(p @ p - ctx.mu_h.total_mass * p)
    return CheckResult("idempotent", "T o T = T (probability measure on H)", res, tol)


def orthogonal_projection_check(ctx: CovariantContext, tol: float = DEFAULT_TOL) -> CheckResult:
    """With uniform weights on G the L2 adjoint is the conjugate transpose."""
    p = operator_matrix(ctx)
    res = max(_maxabs(p - p.conj().T), _maxabs(p @ p - ctx.mu_h.total_mass * p))
    return CheckResult("projection.orthogonal", "T is the orthogonal projection in L2", res, tol)


def intertwining_exhaustive(ctx: CovariantContext, tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Matrix identities ``P R_h = xi(h) P`` and ``P L_y = L_y P`` over every h and y."""
    g = ctx.group
    p = operator_matrix(ctx)
    right = max(
        _maxabs(p @ right_translation_matrix(g, h) - ctx.character(h) * p)
        for h in ctx.subgroup.members
    )
    left = 0.0
    for y in range(g.order):
        ly = left_translation_matrix(g, y)
        left = max(left, _maxabs(p @ ly - ly @ p))
    return [
        CheckResult("intertwine.right", "T o R_h = xi(h) T, all h in H", right, tol),
        CheckResult("intertwine.left", "T o L_y = L_y o T, all y in G", left, tol),
    ]


def check_identities(
    ctx: CovariantContext,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> list[CheckResult]:
    """Sampled right/left translation, self-adjointness and convolution-multiplier identities."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    g = ctx.group
    members = ctx.subgroup.members
    right = left = selfadj = mult = 0.0
    for _ in range(samples):
        f = GroupFunction.random(g, rng)
        u = GroupFunction.random(g, rng)
        y = int(rng.integers(g.order))
        h = int(members[rng.integers(len(members))])
        tf = apply_T(ctx, f)
        right = max(right, _maxabs((apply_T(ctx, translate_right(h, f)) - ctx.character(h) * tf).values))
        left = max(left, _maxabs((apply_T(ctx, translate_left(y, f)) - translate_left(y, tf)).values))
        selfadj = max(
            selfadj,
            abs(pairing(tf, u, ctx.mu_g) - pairing(f, apply_T(ctx, u), ctx.mu_g)),
        )
        lhs = apply_T(ctx, convolve(f, u, ctx.mu_g))
        rhs = convolve(f, apply_T(ctx, u), ctx.mu_g)
        mult = max(mult, _maxabs((lhs - rhs).values))
    return [
        CheckResult("intertwine.right", "T o R_h = xi(h) T", right, tol, seed),
        CheckResult("intertwine.left", "T o L_y = L_y o T", left, tol, seed),
        CheckResult("selfadjoint", "<Tf, g> = <f, Tg>", selfadj, tol, seed),
        CheckResult("multiplier", "T(f * g) = f * T(g)", mult, tol, seed),
    ]


def contraction_check(
    ctx: CovariantContext,
    p: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    rtol: float = DEFAULT_TOL,
) -> CheckResult:
    """Worst ratio ``||Tf||_p / ||f||_p`` against the bound ``mu_H(H)``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    rng = np.random.default_rng(seed)
    mass = ctx.mu_h.total_mass
    ratio = 0.0
    for _ in range(samples):
        f = GroupFunction.random(ctx.group, rng)
        ratio = max(ratio, lp_norm(apply_T(ctx, f), p, ctx.mu_g) / lp_norm(f, p, ctx.mu_g))
    return CheckResult(
        "contraction",
        f"||Tf||_p <= mu_H(H) ||f||_p (p={p:g}, mu_H(H)={mass:g})",
        ratio,
        mass * (1 + rtol),
        seed,
        data={"p": p, "mass": mass},
    )


def left_ideal_check(
    ctx: CovariantContext,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
) -> CheckResult:
    """``f * psi`` stays covariant for covariant ``psi``."""
    rng = np.random.default_rng(seed)
    res = 0.0
    for _ in range(samples):
        f = GroupFunction.random(ctx.group, rng)
        psi = random_covariant(ctx, rng)
        res = max(res, covariance_residual(ctx, convolve(f, psi, ctx.mu_g)))
    return CheckResult("left_ideal", "f * psi is covariant for covariant psi", res, tol, seed)


def compact_inclusion_check(
    ctx: CovariantContext,
    p: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> CheckResult:
    """``||psi||_1 <= mu_G(G)^((p-1)/p) ||psi||_p``; value is the worst violation."""
    rng = np.random.default_rng(seed)
    const = ctx.mu_g.total_mass ** ((p - 1) / p)
    worst_violation = -np.inf
    for _ in range(samples):
        psi = random_covariant(ctx, rng)
        n1 = lp_norm(psi, 1, ctx.mu_g)
        worst_violation = max(worst_violation, n1 - const * lp_norm(psi, p, ctx.mu_g))
    return CheckResult(
        "inclusion.compact",
        f"||psi||_1 <= mu_G(G)^((p-1)/p) ||psi||_p (p={p:g})",
        float(worst_violation),
        tol,
        seed,
        data={"p": p},
    )


def abelian_resolution_check(
    group: Group,
    subgroup: Subgroup,
    f: GroupFunction,
    mu_g: HaarMeasure | None = None,
    tol: float = DEFAULT_TOL,
) -> CheckResult:
    """``sum over all characters of T_xi f = f`` with pairwise orthogonal images.

    Only applies to abelian subgroups; for others the result is marked skipped.
    """
    chars = enumerate_characters(subgroup)
    if len(chars) != subgroup.order:
        return CheckResult(
            "resolution.abelian",
            "sum_xi T_xi f = f (abelian H)",
            0.0,
            tol,
            skipped=True,
            data={"reason": f"H is not abelian: {len(chars)} characters for |H| = {subgroup.order}"},
        )
    mu_g = mu_g or haar(group, "counting")
    parts = [apply_T(CovariantContext.build(group, subgroup, xi, mu_g=mu_g), f) for xi in chars]
    total = sum((q.values for q in parts), np.zeros(group.order, dtype=complex))
    res = _maxabs(total - f.values)
    ortho = 0.0
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            ortho = max(ortho, abs(pairing(parts[i], parts[j], mu_g)))
    scale = max(1.0, lp_norm(f, 2, mu_g) ** 2)
    return CheckResult(
        "resolution.abelian",
        "sum_xi T_xi f = f (abelian H)",
        max(res, ortho / scale),
        tol,
        data={"completeness": res, "orthogonality": ortho},
    )

"""Checklist runner: every registered statement is checked over a family of contexts.

Statement ids describe content (``idempotent``, ``selfadjoint`` ...) rather than
numbering. A run produces exactly one entry per registered id; each entry
lists the per-context cases that were folded into it.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import covariant as cov
from . import duality, quotient
from .characters import abelianization, enumerate_characters
from .covariant import CovariantContext
from .funcspace import GroupFunction, convolve, lp_norm
from .groups import Group, Subgroup, coset_weight, haar, weil_sum
from .report import CheckResult, worst

DEFAULT_PS = (1.0, 1.5, 2.0, 3.0)

REGISTRY: dict[str, str] = {
    "group.axioms": "Cayley table is associative with identity and inverses",
    "characters.count": "|chi(H)| = |H/[H,H]| and every character is multiplicative",
    "characters.orthogonality": "distinct characters are orthogonal under the probability measure",
    "weil.formula": "iterated coset sum equals the integral over G",
    "convolution.young": "||f * g||_p <= ||f||_1 ||g||_p",
    "idempotent": "T o T = T",
    "intertwine.right": "T o R_h = xi(h) T",
    "intertwine.left": "T o L_y = L_y o T",
    "selfadjoint": "<Tf, g> = <f, Tg>",
    "multiplier": "T(f * g) = f * T(g)",
    "projection.orthogonal": "T is the orthogonal projection of L2 onto the covariant subspace",
    "contraction": "||Tf||_p <= ||f||_p for the probability measure on H",
    "contraction.mass": "||Tf||_p <= mu_H(H) ||f||_p for a measure of total mass 3",
    "quotient.infimum": "a covariant psi attains its own quotient norm",
    "quotient.isometry": "||f + N||_[p] = ||Tf||_p",
    "quotient.structure": "rank(image T) + rank(ker T) = |G| and rank(image T) = [G:H]",
    "quotient.kernel": "h - Th lies in ker T",
    "adjoint": "the adjoint of T on L^p is T on L^q",
    "duality.pq": "annihilator of ker T = covariant subspace in L^q, 1 < p",
    "duality.pq.annihilator_covariant": "annihilator vectors are covariant (1 < p)",
    "duality.pq.covariant_annihilates": "covariant functions annihilate ker T (1 < p)",
    "duality.1inf": "annihilator of ker T = covariant subspace in L^inf, p = 1",
    "duality.1inf.annihilator_covariant": "annihilator vectors are covariant (p = 1)",
    "duality.1inf.covariant_annihilates": "covariant functions annihilate ker T (p = 1)",
    "duality.1inf.sup_contraction": "||Tf||_inf <= mu_H(H) ||f||_inf",
    "duality.l2_isometry": "norm of Lambda_g on the covariant L2 subspace equals ||Tg||_2",
    "inclusion.compact": "||psi||_1 <= mu_G(G)^((p-1)/p) ||psi||_p",
    "left_ideal": "f * psi is covariant for covariant psi",
    "resolution.abelian": "sum over characters of T_xi f = f (abelian H)",
}


@dataclass
class Entry:
    id: str
    description: str
    cases: list[dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.cases)

    def as_dict(self, timing: bool = False) -> dict[str, Any]:
        live = [c for c in self.cases if not c["skipped"]]
        worst = max(live, key=lambda c: c["value"] - c["bound"], default=None)
        d = {
            "description": self.description,
            "passed": self.passed,
            "cases": len(self.cases),
            "skipped": len(self.cases) - len(live),
            "value": worst["value"] if worst else None,
            "tolerance": worst["bound"] if worst else None,
            "worst_case": worst["where"] if worst else None,
            "details": self.cases,
        }
        if timing:
            d["seconds"] = round(self.seconds, 6)
        return d


@dataclass
class VerificationReport:
    seed: int
    samples: int
    ps: tuple[float, ...]
    contexts: list[str]
    entries: dict[str, Entry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    def failures(self) -> list[str]:
        return [k for k, e in self.entries.items() if not e.passed]

    def as_dict(self, timing: bool = False) -> dict[str, Any]:
        from . import __version__

        return {
            "version": __version__,
            "seed": self.seed,
            "samples": self.samples,
            "p": list(self.ps),
            "contexts": self.contexts,
            "passed": self.passed,
            "entries": {k: e.as_dict(timing) for k, e in self.entries.items()},
        }


def _case(r: CheckResult, where: str) -> dict[str, Any]:
    return {
        "where": where,
        "value": float(r.value),
        "bound": float(r.bound),
        "passed": r.passed,
        "skipped": r.skipped,
        "seed": r.seed,
        **({"data": r.data} if r.data else {}),
    }


def group_checks(group: Group, subgroup: Subgroup, seed: int, samples: int, ps: Sequence[float]) -> list[CheckResult]:
    out = [CheckResult("group.axioms", REGISTRY["group.axioms"], 0.0 if group.axioms_hold() else 1.0, 0.0)]

    chars = enumerate_characters(subgroup)
    ab = abelianization(subgroup)
    bad = abs(len(chars) - ab.quotient.order) + sum(not c.is_homomorphism() for c in chars)
    out.append(
        CheckResult(
            "characters.count", REGISTRY["characters.count"], float(bad), 0.0,
            data={"characters": len(chars), "abelianization": ab.quotient.order},
        )
    )
    w = 1.0 / subgroup.order
    ortho = 0.0
    for i, a in enumerate(chars):
        for b in chars[i + 1:]:
            ortho = max(ortho, abs(np.sum(a.values * np.conj(b.values)) * w))
    out.append(CheckResult("characters.orthogonality", REGISTRY["characters.orthogonality"], ortho, 1e-12))

    rng = np.random.default_rng(seed)
    mu_g = haar(group, "counting")
    mu_h = haar(subgroup, "probability")
    cw = coset_weight(mu_g, subgroup, mu_h)
    res = 0.0
    for _ in range(samples):
        f = GroupFunction.random(group, rng)
        res = max(res, abs(weil_sum(f, subgroup, mu_g, mu_h, cw) - f.values.sum() * mu_g.weight))
    out.append(CheckResult("weil.formula", REGISTRY["weil.formula"], res, 1e-12, seed))

    young = -np.inf
    for p in ps:
        for _ in range(samples):
            f = GroupFunction.random(group, rng)
            g = GroupFunction.random(group, rng)
            lhs = lp_norm(convolve(f, g, mu_g), p, mu_g)
            rhs = lp_norm(f, 1, mu_g) * lp_norm(g, p, mu_g)
            young = max(young, (lhs - rhs) / rhs)
    out.append(CheckResult("convolution.young", REGISTRY["convolution.young"], float(young), 1e-12, seed))
    return out


def context_checks(
    ctx: CovariantContext,
    seed: int,
    samples: int,
    ps: Sequence[float],
    quotient_samples: int = 20,
) -> list[CheckResult]:
    out: list[CheckResult] = [cov.idempotence_check(ctx)]
    out += cov.intertwining_exhaustive(ctx)
    out += cov.check_identities(ctx, samples, seed)
    out.append(cov.orthogonal_projection_check(ctx))

    ctx3 = ctx.with_measures(mu_h=haar(ctx.subgroup, "mass", 3.0))
    for p in ps:
        out.append(cov.contraction_check(ctx, p, samples, seed))
        r = cov.contraction_check(ctx3, p, samples, seed)
        r.id = "contraction.mass"
        out.append(r)

    for p in ps:
        kb = cov.kernel_basis(ctx)
        rng = np.random.default_rng(seed)
        gap = 0.0
        for _ in range(min(samples, quotient_samples)):
            psi = cov.random_covariant(ctx, rng)
            res = quotient.quotient_norm(quotient.QuotientProblem.build(ctx, psi, p, kb))
            gap = max(gap, abs(res.value - lp_norm(psi, p, ctx.mu_g)))
        out.append(
            CheckResult("quotient.infimum", REGISTRY["quotient.infimum"], gap, quotient.default_tol(p), seed, data={"p": p})
        )
        out.append(quotient.verify_quotient_isometry(ctx, p, quotient_samples, seed))

    out += quotient.kernel_closure_check(ctx, 2.0, samples, seed)

    for p in ps:
        if p > 1:
            out.append(duality.adjoint_check(ctx, p, samples, seed))
    for p in ps:
        out += duality.verify_duality(ctx, p, seed=seed)
    out.append(duality.l2_functional_isometry_check(ctx, samples, seed))

    for p in ps:
        if p > 1:
            out.append(cov.compact_inclusion_check(ctx, p, samples, seed))
    out.append(cov.left_ideal_check(ctx, samples, seed))
    return out


def contexts_for(group: Group, subgroup: Subgroup, chars: str | Iterable[int] = "all") -> list[CovariantContext]:
    allc = enumerate_characters(subgroup)
    picked = allc if chars == "all" else [allc[i] for i in chars]
    return [CovariantContext.build(group, subgroup, xi) for xi in picked]


def run_verification(
    group: Group,
    subgroups: Sequence[Subgroup],
    chars: str | Iterable[int] = "all",
    ps: Sequence[float] = DEFAULT_PS,
    seed: int = 42,
    samples: int = 100,
    quotient_samples: int = 20,
    jobs: int = 1,
) -> VerificationReport:
    ps = tuple(float(p) for p in ps)
    entries = {k: Entry(k, v) for k, v in REGISTRY.items()}

    def record(results: list[CheckResult], where: str, seconds: float) -> None:
        for r in results:
            e = entries[r.id]
            e.cases.append(_case(r, where))
            e.seconds += seconds / max(len(results), 1)

    ctx_labels = []
    tasks = []
    for h in subgroups:
        chosen = contexts_for(group, h, chars)
        ctx_labels += [c.describe() for c in chosen]
        tasks.append(("group", h, None))
        tasks += [("ctx", h, c) for c in chosen]

    def run(task):
        kind, h, ctx = task
        t0 = time.perf_counter()
        if kind == "group":
            res = group_checks(group, h, seed, samples, ps)
            where = f"{group.name} / {list(h.members)}"
        else:
            res = context_checks(ctx, seed, samples, ps, quotient_samples)
            where = ctx.describe()
        return res, where, time.perf_counter() - t0

    for h in subgroups:
        rng = np.random.default_rng(seed)
        res = [
            cov.abelian_resolution_check(group, h, GroupFunction.random(group, rng))
            for _ in range(samples)
        ]
        folded = worst(res, "resolution.abelian", REGISTRY["resolution.abelian"], res[0].bound, seed=seed)
        if folded.skipped:
            folded.data = res[0].data
        record([folded], f"{group.name} / {list(h.members)}", 0.0)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]
    for res, where, secs in outcomes:
        record(res, where, secs)

    return VerificationReport(seed, samples, ps, ctx_labels, entries)

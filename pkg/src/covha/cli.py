"""Command-line front end.

Subcommands ``group``, ``characters``, ``apply``, ``quotient-norm`` and ``verify``.
Structured output is JSON on stdout, or in the file given by ``--out``.
Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .characters import abelianization, enumerate_characters
from .covariant import CovariantContext, apply_T, covariance_residual
from .funcspace import GroupFunction, lp_norm
from .groups import (
    Group,
    GroupError,
    Subgroup,
    build_group,
    cyclic_subgroups,
    left_cosets,
    parse_descriptor,
    subgroup_closure,
    whole_group,
)
from .quotient import QuotientProblem, default_tol, quotient_norm
from .verify import DEFAULT_PS, run_verification

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _load_group(tokens: Sequence[str]) -> tuple[Group, dict]:
    text = " ".join(tokens)
    path = Path(text)
    if len(tokens) == 1 and not text.lstrip().startswith("{") and path.is_file():
        text = path.read_text()
    desc = parse_descriptor(text)
    return build_group(desc), desc


def _elements(group: Group, raw: str) -> list[int]:
    tokens = [t for t in raw.replace(" ", ",").split(",") if t]
    if not tokens:
        raise InputError("empty element list")
    return [group.element_by_label(t) for t in tokens]


def _subgroup(group: Group, args) -> Subgroup:
    if args.subgroup and args.subgroup_gens:
        raise InputError("give --subgroup or --subgroup-gens, not both")
    if args.subgroup_gens:
        return subgroup_closure(group, _elements(group, args.subgroup_gens))
    if args.subgroup:
        return Subgroup.from_members(group, _elements(group, args.subgroup))
    return whole_group(group)


def _context(group: Group, h: Subgroup, char: str) -> CovariantContext:
    chars = enumerate_characters(h)
    try:
        k = int(char)
    except ValueError:
        raise InputError(f"--char must be an index here, got {char!r}") from None
    if not 0 <= k < len(chars):
        raise InputError(f"character index {k} out of range (H has {len(chars)} characters)")
    return CovariantContext.build(group, h, chars[k])


def _function(group: Group, raw: str | None) -> GroupFunction:
    if raw is None:
        raise InputError("--fn is required")
    if raw.startswith("delta:"):
        return GroupFunction.delta(group, group.element_by_label(raw[len("delta:"):]))
    if raw.lstrip().startswith("{"):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed function JSON: {exc}") from None
        return GroupFunction.from_json(data, group)
    if not Path(raw).is_file():
        raise InputError(f"function file {raw!r} not found")
    return GroupFunction.load(raw, group)


def _p_value(raw: str) -> float:
    try:
        p = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid p {raw!r}") from None
    if not p >= 1:
        raise argparse.ArgumentTypeError("p must be >= 1")
    return p


def _p_list(raw: str) -> tuple[float, ...]:
    ps = tuple(_p_value(t) for t in raw.split(",") if t.strip())
    if not ps or any(np.isinf(p) for p in ps):
        raise argparse.ArgumentTypeError("p-list needs finite values >= 1")
    return ps


def _char_selection(raw: str):
    if raw == "all":
        return "all"
    try:
        return [int(t) for t in raw.split(",")]
    except ValueError:
        raise InputError(f"--char must be 'all' or comma-separated indices, got {raw!r}") from None


def _cvals(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _emit(payload: dict[str, Any], out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_group(args) -> int:
    g, _ = _load_group(args.spec)
    out: dict[str, Any] = {
        "name": g.name,
        "order": g.order,
        "abelian": g.is_abelian,
        "fingerprint": g.fingerprint,
        "elements": [g.label(x) for x in range(g.order)],
    }
    if args.list_subgroups:
        out["cyclic_subgroups"] = [
            {"members": list(h.members), "order": h.order, "index": h.index} for h in cyclic_subgroups(g)
        ]
    if args.subgroup or args.subgroup_gens:
        h = _subgroup(g, args)
        cp = left_cosets(g, h)
        out["subgroup"] = {
            "members": list(h.members),
            "labels": [g.label(x) for x in h.members],
            "order": h.order,
            "index": h.index,
            "normal": h.is_normal(),
            "abelian": h.is_abelian,
            "cosets": [[g.label(x) for x in cp.cell(i)] for i in range(len(cp))],
        }
    _emit(out, args.out)
    return EXIT_OK


def cmd_characters(args) -> int:
    g, _ = _load_group(args.spec)
    h = _subgroup(g, args)
    ab = abelianization(h)
    chars = enumerate_characters(h)
    out = {
        "group": g.name,
        "subgroup": list(h.members),
        "commutator": list(ab.commutator.members),
        "invariant_factors": list(ab.invariant_factors),
        "count": len(chars),
        "characters": [
            {
                "index": i,
                "label": c.label(),
                "modulus": c.modulus,
                "exponents": list(c.exponents),
                "values": _cvals(c.values),
            }
            for i, c in enumerate(chars)
        ],
    }
    _emit(out, args.out)
    return EXIT_OK


def cmd_apply(args) -> int:
    g, desc = _load_group(args.spec)
    ctx = _context(g, _subgroup(g, args), args.char)
    f = _function(g, args.fn)
    tf = apply_T(ctx, f)
    p = args.p
    out = {
        "context": ctx.describe(),
        "p": p,
        "norm_f": lp_norm(f, p, ctx.mu_g),
        "norm_Tf": lp_norm(tf, p, ctx.mu_g),
        "covariance_residual": covariance_residual(ctx, tf),
        "values": _cvals(tf.values),
    }
    if args.write:
        tf.save(args.write, desc)
        out["written"] = args.write
    _emit(out, args.out)
    return EXIT_OK


def cmd_quotient_norm(args) -> int:
    g, _ = _load_group(args.spec)
    ctx = _context(g, _subgroup(g, args), args.char)
    f = _function(g, args.fn)
    p = args.p
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = quotient_norm(QuotientProblem.build(ctx, f, p), tol=args.tol, max_iter=args.max_iter)
    target = lp_norm(apply_T(ctx, f), p, ctx.mu_g)
    out = {
        "context": ctx.describe(),
        "p": p,
        "value": res.value,
        "norm_Tf": target,
        "gap": abs(res.value - target),
        "tolerance": args.tol if args.tol is not None else default_tol(p),
        "iterations": res.iterations,
        "method": res.method,
        "converged": res.converged,
        "lower_bound": res.lower_bound,
    }
    _emit(out, args.out)
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_verify(args) -> int:
    g, _ = _load_group(args.spec)
    subs = cyclic_subgroups(g) if args.cyclic_subgroups else [_subgroup(g, args)]
    if args.samples < 1:
        raise InputError("--samples must be positive")
    report = run_verification(
        g,
        subs,
        chars=_char_selection(args.char),
        ps=args.p,
        seed=args.seed,
        samples=args.samples,
        jobs=args.jobs,
    )
    _emit(report.as_dict(timing=args.timing), args.out)
    if not report.passed:
        print("failed: " + ", ".join(report.failures()), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covha", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, char_default: str | None = "0"):
        sp.add_argument(
            "--spec", "--group", dest="spec", nargs="+", required=True,
            help="group descriptor: JSON, a file holding it, or a short form like 'dihedral 4'",
        )
        sp.add_argument("--subgroup", help="comma-separated subgroup members (indices or labels)")
        sp.add_argument("--subgroup-gens", help="comma-separated generators; the subgroup is their closure")
        if char_default is not None:
            sp.add_argument("--char", default=char_default, help=f"character index (default {char_default})")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("group", help="group summary, subgroups and cosets")
    common(sp, None)
    sp.add_argument("--list-subgroups", action="store_true", help="list subgroups generated by one element")
    sp.set_defaults(func=cmd_group)

    sp = sub.add_parser("characters", help="list the characters of a subgroup")
    common(sp, None)
    sp.set_defaults(func=cmd_characters)

    sp = sub.add_parser("apply", help="apply the averaging operator to a function")
    common(sp)
    sp.add_argument("--fn", help="function file, inline JSON, or delta:<element>")
    sp.add_argument("--p", type=_p_value, default=2.0, help="norm exponent (default 2)")
    sp.add_argument("--write", help="write the output function file here")
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("quotient-norm", help="norm of f modulo the kernel of the operator")
    common(sp)
    sp.add_argument("--fn", help="function file, inline JSON, or delta:<element>")
    sp.add_argument("--p", type=_p_value, default=2.0, help="norm exponent (default 2)")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=10000)
    sp.set_defaults(func=cmd_quotient_norm)

    sp = sub.add_parser("verify", help="run the registered checks and write a JSON report")
    common(sp, "all")
    sp.add_argument("--cyclic-subgroups", action="store_true", help="verify every subgroup generated by one element")
    sp.add_argument("--p", type=_p_list, default=DEFAULT_PS, help="comma-separated exponents (default 1,1.5,2,3)")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--jobs", type=int, default=1, help="contexts verified in parallel")
    sp.add_argument("--timing", action="store_true", help="include wall-clock seconds (breaks reproducibility)")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GroupError, ValueError, OSError) as exc:
        print(f"covha {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Finite groups as Cayley tables, subgroups, left cosets and uniform Haar measures.

Elements are dense indices ``0..n-1`` and the Cayley table is the only source
of truth: ``cayley[a, b]`` is the index of the product ``a*b``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_ORDER = 64


class GroupError(ValueError):
    """Raised for malformed group data, bad descriptors or inconsistent measures."""


def max_order() -> int:
    """Order cap, overridable through ``COVHA_MAX_ORDER``."""
    raw = os.environ.get("COVHA_MAX_ORDER")
    if raw is None:
        return DEFAULT_MAX_ORDER
    try:
        cap = int(raw)
    except ValueError:
        raise GroupError(f"COVHA_MAX_ORDER must be an integer, got {raw!r}") from None
    if cap < 1:
        raise GroupError("COVHA_MAX_ORDER must be positive")
    return cap


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Group:
    """A validated finite group.

    Use :meth:`from_table` (or one of the named constructors) rather than
    calling the initializer directly; the initializer does not validate.
    """

    cayley: np.ndarray
    identity: int
    inverses: np.ndarray
    name: str = "G"
    labels: tuple[str, ...] = ()

    @classmethod
    def from_table(
        cls,
        table: Sequence[Sequence[int]] | np.ndarray,
        name: str = "G",
        labels: Sequence[str] | None = None,
        cap: int | None = None,
    ) -> "Group":
        t = np.asarray(table)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise GroupError("Cayley table must be a non-empty square array")
        if not np.issubdtype(t.dtype, np.integer):
            if not np.all(np.equal(np.mod(t, 1), 0)):
                raise GroupError("Cayley table entries must be integers")
        t = t.astype(np.int64)
        n = t.shape[0]
        cap = max_order() if cap is None else cap
        if n > cap:
            raise GroupError(f"group order {n} exceeds the configured cap {cap}")
        if t.min() < 0 or t.max() >= n:
            raise GroupError("Cayley table entries out of range")

        idx = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(t[e], idx) and np.array_equal(t[:, e], idx)]
        if not ids:
            raise GroupError("no identity element")
        e = ids[0]

        # associativity: (ab)c == a(bc) for all triples
        left = t[t[:, :, None], idx[None, None, :]]
        right = t[idx[:, None, None], t[None, :, :]]
        if not np.array_equal(left, right):
            bad = np.argwhere(left != right)[0]
            raise GroupError(f"operation is not associative at {tuple(int(v) for v in bad)}")

        inverses = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.flatnonzero(t[a] == e)
            if hits.size != 1 or t[hits[0], a] != e:
                raise GroupError(f"element {a} has no two-sided inverse")
            inverses[a] = hits[0]

        if labels is not None and len(labels) != n:
            raise GroupError("label count does not match group order")
        return cls(_readonly(t), int(e), _readonly(inverses), name, tuple(labels or ()))

    @property
    def order(self) -> int:
        return self.cayley.shape[0]

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"Group({self.name}, order={self.order})"

    def mul(self, a: int, b: int) -> int:
        return int(self.cayley[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def modular(self, x: int | None = None) -> float:
        # finite groups are unimodular
        return 1.0

    def check_element(self, x: int) -> int:
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise GroupError(f"element index must be an integer, got {x!r}")
        if not 0 <= x < self.order:
            raise GroupError(f"element index {x} out of range for {self.name}")
        return int(x)

    def power(self, a: int, k: int) -> int:
        r = self.identity
        for _ in range(k % self.element_order(a)):
            r = int(self.cayley[r, a])
        return r

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = int(self.cayley[x, a])
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))

    @cached_property
    def fingerprint(self) -> str:
        """Short stable hash of the Cayley table, used by function files."""
        import hashlib

        return hashlib.sha256(self.cayley.astype("<i8").tobytes()).hexdigest()[:16]

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def element_by_label(self, token: str) -> int:
        token = token.strip()
        aliases = _LABEL_ALIASES.get(self.name.rstrip("0123456789"), {})
        token = aliases.get(token, token)
        if token in self.labels:
            return self.labels.index(token)
        try:
            return self.check_element(int(token))
        except ValueError:
            raise GroupError(f"unknown element {token!r} in {self.name}") from None

    def axioms_hold(self) -> bool:
        """Re-run the exhaustive associativity, identity and inverse checks."""
        try:
            Group.from_table(self.cayley, cap=max(self.order, 1))
        except GroupError:
            return False
        return True


_LABEL_ALIASES = {"D": {"rot": "r", "ref": "s", "refl": "s"}}


# ---------------------------------------------------------------------------
# named constructors


def cyclic(n: int) -> Group:
    if n < 1:
        raise GroupError("cyclic order must be positive")
    i = np.arange(n)
    return Group.from_table((i[:, None] + i[None, :]) % n, name=f"Z{n}")


def dihedral(n: int) -> Group:
    """Dihedral group of order ``2n``; element ``k + n*j`` is ``r^k s^j``."""
    if n < 1:
        raise GroupError("dihedral parameter must be positive")
    order = 2 * n
    table = np.empty((order, order), dtype=np.int64)
    for a in range(order):
        ka, ja = a % n, a // n
        for b in range(order):
            kb, jb = b % n, b // n
            # r^ka s^ja r^kb s^jb = r^(ka + (-1)^ja kb) s^(ja+jb)
            k = (ka + (kb if ja == 0 else -kb)) % n
            table[a, b] = k + n * ((ja + jb) % 2)
    labels = []
    for a in range(order):
        k, j = a % n, a // n
        r = "e" if k == 0 else ("r" if k == 1 else f"r{k}")
        labels.append(r if j == 0 else ("s" if k == 0 else f"{r}s"))
    return Group.from_table(table, name=f"D{n}", labels=labels)


def _perm_mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # (p*q)(i) = p(q(i)): apply q first
    return tuple(p[i] for i in q)


def _group_from_elements(elems: list, mul, name: str, labels=None) -> Group:
    index = {x: i for i, x in enumerate(elems)}
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            try:
                table[i, j] = index[mul(a, b)]
            except KeyError:
                raise GroupError("element set is not closed under the product") from None
    return Group.from_table(table, name=name, labels=labels)


def symmetric(n: int) -> Group:
    """Symmetric group on ``n <= 5`` points, permutations in lexicographic order."""
    if not 1 <= n <= 5:
        raise GroupError("symmetric group supported for 1 <= n <= 5")
    elems = list(itertools.permutations(range(n)))
    labels = ["".join(str(v) for v in p) for p in elems]
    return _group_from_elements(elems, _perm_mul, f"S{n}", labels)


def quaternion8() -> Group:
    """Q8 with elements 1, -1, i, -i, j, -j, k, -k (indices 0..7)."""
    # unit quaternion basis products: (sign, unit) with units 0=1,1=i,2=j,3=k
    unit_mul = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    elems = [(s, u) for u in range(4) for s in (1, -1)]

    def mul(a, b):
        s, u = unit_mul[(a[1], b[1])]
        return (a[0] * b[0] * s, u)

    names = ["1", "i", "j", "k"]
    labels = [("" if s == 1 else "-") + names[u] for s, u in elems]
    return _group_from_elements(elems, mul, "Q8", labels)


def direct_product(g1: Group, g2: Group) -> Group:
    """Element ``a * |g2| + b`` is the pair ``(a, b)``."""
    n1, n2 = g1.order, g2.order
    if n1 * n2 > max_order():
        raise GroupError(f"group order {n1 * n2} exceeds the configured cap {max_order()}")
    a = np.arange(n1 * n2)
    i, j = a // n2, a % n2
    table = g1.cayley[i[:, None], i[None, :]] * n2 + g2.cayley[j[:, None], j[None, :]]
    labels = None
    if g1.labels or g2.labels:
        labels = [f"({g1.label(x)},{g2.label(y)})" for x, y in zip(i, j)]
    return Group.from_table(table, name=f"{g1.name}x{g2.name}", labels=labels)


def from_permutations(generators: Iterable[Sequence[int]], name: str = "Perm") -> Group:
    """Close a set of permutations (images of ``0..d-1``) under composition."""
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        raise GroupError("need at least one generator")
    degree = len(gens[0])
    for g in gens:
        if len(g) != degree or sorted(g) != list(range(degree)):
            raise GroupError(f"not a permutation of 0..{degree - 1}: {g}")
    cap = max_order()
    ident = tuple(range(degree))
    seen = {ident: 0}
    elems = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _perm_mul(x, g)
                if y not in seen:
                    if len(elems) >= cap:
                        raise GroupError(f"generated group exceeds the configured cap {cap}")
                    seen[y] = len(elems)
                    elems.append(y)
                    nxt.append(y)
        frontier = nxt
    labels = ["".join(str(v) for v in p) if degree <= 10 else str(i) for i, p in enumerate(elems)]
    return _group_from_elements(elems, _perm_mul, name, labels)


_SHORT_KINDS = {
    "z": "cyclic", "c": "cyclic", "cyclic": "cyclic",
    "d": "dihedral", "dihedral": "dihedral",
    "s": "symmetric", "sym": "symmetric", "symmetric": "symmetric",
    "q": "quaternion", "q8": "quaternion", "quaternion": "quaternion", "quaternion8": "quaternion",
}


def parse_descriptor(text: str) -> dict:
    """Parse a group descriptor given as JSON or in short form (``"dihedral 4"``, ``"S3"``)."""
    text = text.strip()
    if text.startswith("{"):
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GroupError(f"malformed group descriptor JSON: {exc}") from None
        if not isinstance(desc, dict):
            raise GroupError("group descriptor must be a JSON object")
        return desc
    parts = text.replace("(", " ").replace(")", " ").split()
    if len(parts) == 1:
        head = parts[0].lower()
        if head in _SHORT_KINDS and _SHORT_KINDS[head] == "quaternion":
            return {"kind": "quaternion"}
        letters = head.rstrip("0123456789")
        digits = head[len(letters):]
        if letters in _SHORT_KINDS and digits:
            parts = [letters, digits]
    if len(parts) == 2 and parts[0].lower() in _SHORT_KINDS:
        kind = _SHORT_KINDS[parts[0].lower()]
        try:
            return {"kind": kind, "n": int(parts[1])}
        except ValueError:
            pass
    if len(parts) == 1 and parts[0].lower() in _SHORT_KINDS:
        return {"kind": _SHORT_KINDS[parts[0].lower()]}
    raise GroupError(f"cannot parse group descriptor {text!r}")


def build_group(desc: dict | str) -> Group:
    """Build a group from a descriptor.

    Recognized kinds: ``cyclic``, ``dihedral``, ``symmetric`` (each with ``n``),
    ``quaternion``, ``table`` (row-major ``table``), ``perm_gens``
    (``generators``) and ``product`` (``factors``: a list of descriptors).
    """
    if isinstance(desc, str):
        desc = parse_descriptor(desc)
    if not isinstance(desc, dict) or "kind" not in desc:
        raise GroupError("group descriptor needs a 'kind'")
    kind = desc["kind"]

    def need_n() -> int:
        n = desc.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise GroupError(f"descriptor of kind {kind!r} needs an integer 'n'")
        return n

    if kind == "cyclic":
        n = need_n()
        if n > max_order():
            raise GroupError(f"group order {n} exceeds the configured cap {max_order()}")
        return cyclic(n)
    if kind == "dihedral":
        n = need_n()
        if 2 * n > max_order():
            raise GroupError(f"group order {2 * n} exceeds the configured cap {max_order()}")
        return dihedral(n)
    if kind == "symmetric":
        n = need_n()
        if math.factorial(n) > max_order() and n <= 5:
            raise GroupError(f"group order {math.factorial(n)} exceeds the configured cap {max_order()}")
        return symmetric(n)
    if kind in ("quaternion", "quaternion8"):
        return quaternion8()
    if kind == "table":
        table = desc.get("table")
        if not isinstance(table, list):
            raise GroupError("descriptor of kind 'table' needs a 'table' list")
        return Group.from_table(table, name=desc.get("name", "G"), labels=desc.get("labels"))
    if kind == "perm_gens":
        gens = desc.get("generators")
        if not isinstance(gens, list):
            raise GroupError("descriptor of kind 'perm_gens' needs a 'generators' list")
        return from_permutations(gens, name=desc.get("name", "Perm"))
    if kind == "product":
        factors = desc.get("factors")
        if not isinstance(factors, list) or not factors:
            raise GroupError("descriptor of kind 'product' needs a non-empty 'factors' list")
        g = build_group(factors[0])
        for f in factors[1:]:
            g = direct_product(g, build_group(f))
        return g
    raise GroupError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# subgroups and cosets


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: Group
    members: tuple[int, ...]

    @classmethod
    def from_members(cls, parent: Group, members: Iterable[int]) -> "Subgroup":
        ms = sorted({parent.check_element(int(m)) for m in members})
        if parent.identity not in ms:
            raise GroupError("subgroup must contain the identity")
        arr = np.array(ms)
        if not np.all(np.isin(parent.cayley[np.ix_(arr, arr)], arr)):
            raise GroupError("member set is not closed under the product")
        if not np.all(np.isin(parent.inverses[arr], arr)):
            raise GroupError("member set is not closed under inverses")
        return cls(parent, tuple(ms))

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, x: int) -> bool:
        return int(x) in self._member_set

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subgroup)
            and other.parent is self.parent
            and other.members == self.members
        )

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members))

    def __repr__(self) -> str:
        return f"Subgroup({self.parent.name}, {list(self.members)})"

    @cached_property
    def _member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    @cached_property
    def position(self) -> dict[int, int]:
        """Element index -> position in ``members``."""
        return {m: i for i, m in enumerate(self.members)}

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    @cached_property
    def is_abelian(self) -> bool:
        arr = np.array(self.members)
        t = self.parent.cayley[np.ix_(arr, arr)]
        return bool(np.array_equal(t, t.T))

    def as_group(self) -> Group:
        """The subgroup as a standalone group on positions ``0..|H|-1``."""
        arr = np.array(self.members)
        t = self.parent.cayley[np.ix_(arr, arr)]
        pos = np.full(self.parent.order, -1, dtype=np.int64)
        pos[arr] = np.arange(len(arr))
        labels = [self.parent.label(m) for m in self.members] if self.parent.labels else None
        return Group.from_table(pos[t], name=f"{self.parent.name}|H", labels=labels, cap=len(arr))

    def is_normal(self) -> bool:
        g = self.parent
        for x in range(g.order):
            xi = g.inverses[x]
            for h in self.members:
                if g.cayley[g.cayley[x, h], xi] not in self:
                    return False
        return True


def subgroup_closure(g: Group, generators: Iterable[int]) -> Subgroup:
    """Smallest subgroup of ``g`` containing ``generators``."""
    gens = [g.check_element(x) for x in generators]
    members = {g.identity}
    frontier = [g.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = int(g.cayley[x, s])
                if y not in members:
                    members.add(y)
                    nxt.append(y)
        frontier = nxt
    # finite: closure under products already contains inverses
    return Subgroup(g, tuple(sorted(members)))


def whole_group(g: Group) -> Subgroup:
    return Subgroup(g, tuple(range(g.order)))


def trivial_subgroup(g: Group) -> Subgroup:
    return Subgroup(g, (g.identity,))


def cyclic_subgroups(g: Group) -> list[Subgroup]:
    """All distinct subgroups generated by a single element, ordered by (order, members)."""
    seen: dict[tuple[int, ...], Subgroup] = {}
    for x in range(g.order):
        h = subgroup_closure(g, [x])
        seen.setdefault(h.members, h)
    return sorted(seen.values(), key=lambda h: (h.order, h.members))


@dataclass(frozen=True, eq=False)
class CosetPartition:
    """Left cosets ``xH``.

    ``cells[i, j]`` is ``representatives[i] * subgroup.members[j]`` and
    ``coset_of[x]`` is the position of the coset containing ``x``.
    """

    parent: Group
    subgroup: Subgroup
    representatives: tuple[int, ...]
    coset_of: np.ndarray
    cells: np.ndarray

    def __len__(self) -> int:
        return len(self.representatives)

    def cell(self, i: int) -> list[int]:
        return sorted(int(v) for v in self.cells[i])


def left_cosets(g: Group, h: Subgroup) -> CosetPartition:
    if h.parent is not g:
        raise GroupError("subgroup does not belong to this group")
    members = np.array(h.members)
    coset_of = np.full(g.order, -1, dtype=np.int64)
    reps: list[int] = []
    rows = []
    for x in range(g.order):
        if coset_of[x] >= 0:
            continue
        cell = g.cayley[x, members]
        coset_of[cell] = len(reps)
        reps.append(x)  # scanning in index order: x is the minimal element
        rows.append(cell)
    return CosetPartition(g, h, tuple(reps), _readonly(coset_of), _readonly(np.array(rows)))


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class HaarMeasure:
    """Uniform Haar measure on a group or subgroup."""

    carrier: Group | Subgroup
    weight: float
    mode: str = "probability"

    def __post_init__(self):
        if not self.weight > 0:
            raise GroupError("Haar weight must be positive")

    @property
    def size(self) -> int:
        return self.carrier.order

    @property
    def total_mass(self) -> float:
        return self.weight * self.size

    def __repr__(self) -> str:
        return f"HaarMeasure({self.mode}, weight={self.weight:g}, total={self.total_mass:g})"


def haar(carrier: Group | Subgroup, mode: str = "probability", mass: float | None = None) -> HaarMeasure:
    """Uniform measure with ``mode`` one of ``counting``, ``probability`` or ``mass``."""
    n = carrier.order
    if mode == "counting":
        return HaarMeasure(carrier, 1.0, "counting")
    if mode == "probability":
        return HaarMeasure(carrier, 1.0 / n, "probability")
    if mode == "mass":
        if mass is None or not mass > 0:
            raise GroupError("total mass must be positive")
        return HaarMeasure(carrier, float(mass) / n, "mass")
    raise GroupError(f"unknown measure mode {mode!r}")


def coset_weight(mu_g: HaarMeasure, h: Subgroup, mu_h: HaarMeasure) -> float:
    """Per-coset weight of the quotient measure that makes the Weil formula exact."""
    return mu_g.weight * h.order / mu_h.total_mass


def weil_sum(
    f,
    h: Subgroup,
    mu_g: HaarMeasure,
    mu_h: HaarMeasure,
    mu_gh: float,
    rtol: float = 1e-12,
) -> complex:
    """Iterated integral: sum over cosets of the ``mu_h``-integral of ``f`` along the coset.

    ``mu_gh`` is the weight of each coset. It must satisfy
    ``mu_gh * mu_h.weight == mu_g.weight``, otherwise the iterated sum would not
    reproduce the plain ``mu_g``-integral and a :class:`GroupError` is raised.
    """
    values = np.asarray(getattr(f, "values", f))
    g = h.parent
    if values.shape != (g.order,):
        raise GroupError("function length does not match the group order")
    if mu_h.carrier is not h and mu_h.size != h.order:
        raise GroupError("mu_h is not a measure on the subgroup")
    if mu_g.size != g.order:
        raise GroupError("mu_g is not a measure on the group")
    expected = mu_g.weight / mu_h.weight
    if not abs(mu_gh - expected) <= rtol * max(abs(expected), 1.0):
        raise GroupError(
            f"coset weight {mu_gh!r} is inconsistent with the Weil normalization (expected {expected!r})"
        )
    cells = left_cosets(g, h).cells
    inner = values[cells].sum(axis=1) * mu_h.weight
    return complex(inner.sum() * mu_gh)

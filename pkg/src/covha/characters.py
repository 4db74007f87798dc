"""Characters of a finite subgroup, enumerated through its abelianization.

A character is stored exactly: every value is ``exp(2*pi*i*k/m)`` with a
shared modulus ``m`` (the exponent of the abelianization), so multiplicativity
is integer arithmetic mod ``m``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .groups import Group, GroupError, Subgroup, subgroup_closure

_QUARTER = (1 + 0j, 1j, -1 + 0j, -1j)


def root_of_unity(k: int, m: int) -> complex:
    """``exp(2*pi*i*k/m)``, exact at multiples of a quarter turn."""
    k %= m
    if (4 * k) % m == 0:
        return _QUARTER[4 * k // m]
    return cmath.exp(2j * math.pi * k / m)


@dataclass(frozen=True, eq=False)
class Character:
    subgroup: Subgroup
    modulus: int
    exponents: tuple[int, ...]  # aligned with subgroup.members

    @cached_property
    def values(self) -> np.ndarray:
        v = np.array([root_of_unity(k, self.modulus) for k in self.exponents], dtype=complex)
        v.setflags(write=False)
        return v

    def __call__(self, s: int) -> complex:
        try:
            return complex(self.values[self.subgroup.position[int(s)]])
        except KeyError:
            raise GroupError(f"element {s} is not in the subgroup") from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Character) or other.subgroup != self.subgroup:
            return False
        # compare as fractions k/m
        return all(
            a * other.modulus == b * self.modulus
            for a, b in zip(self.exponents, other.exponents)
        )

    def __hash__(self) -> int:
        return hash(tuple((k % self.modulus) / self.modulus for k in self.exponents))

    @property
    def is_trivial(self) -> bool:
        return all(k % self.modulus == 0 for k in self.exponents)

    def is_homomorphism(self) -> bool:
        """Exact check of ``xi(st) = xi(s) xi(t)`` in exponent arithmetic."""
        h = self.subgroup
        g = h.parent
        pos = h.position
        k = self.exponents
        m = self.modulus
        for i, s in enumerate(h.members):
            for j, t in enumerate(h.members):
                if (k[i] + k[j] - k[pos[g.mul(s, t)]]) % m:
                    return False
        return True

    def label(self) -> str:
        parts = []
        for k in self.exponents:
            k %= self.modulus
            if k == 0:
                parts.append("0")
            else:
                d = math.gcd(k, self.modulus)
                parts.append(f"{k // d}/{self.modulus // d}")
        return "xi[" + " ".join(parts) + "]"

    def __repr__(self) -> str:
        return f"Character({self.label()})"


@dataclass(frozen=True, eq=False)
class AbelianizationData:
    subgroup: Subgroup
    commutator: Subgroup
    quotient: Group
    projection: np.ndarray  # position in subgroup.members -> quotient element
    invariant_factors: tuple[int, ...]
    basis: tuple[int, ...]  # quotient elements generating cyclic summands
    basis_orders: tuple[int, ...]

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.invariant_factors, 1)


def commutator_subgroup(h: Subgroup) -> Subgroup:
    g = h.parent
    comms = {
        g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)))
        for a in h.members
        for b in h.members
    }
    return subgroup_closure(g, sorted(comms))


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _elementary_divisors(a: Group) -> list[int]:
    """Prime-power orders of the cyclic summands of a finite abelian group.

    For the ``p``-part with exponents ``e_1 >= e_2 >= ...`` the number of
    elements killed by ``p^k`` is ``p^(sum_i min(k, e_i))``, so counting
    elements by order recovers the exponents.
    """
    orders = [a.element_order(x) for x in range(a.order)]
    divisors = []
    for p in _prime_factors(a.order):
        counts = [1]
        while True:
            k = len(counts)
            counts.append(sum(1 for o in orders if (p**k) % o == 0))
            if counts[-1] == counts[-2]:
                break
        # ge[j]: number of summands with exponent > j
        ge = [round(math.log(counts[j + 1] // counts[j], p)) for j in range(len(counts) - 1)]
        for j in range(len(ge)):
            nxt = ge[j + 1] if j + 1 < len(ge) else 0
            divisors.extend([p ** (j + 1)] * (ge[j] - nxt))
    return sorted(divisors, reverse=True)


def _invariant_factors(elementary: list[int]) -> list[int]:
    by_prime: dict[int, list[int]] = {}
    for q in elementary:
        by_prime.setdefault(_prime_factors(q)[0], []).append(q)
    for v in by_prime.values():
        v.sort(reverse=True)
    length = max((len(v) for v in by_prime.values()), default=0)
    factors = []
    for i in range(length):
        factors.append(math.prod(v[i] for v in by_prime.values() if i < len(v)))
    return sorted(factors)


def _cyclic_basis(a: Group, targets: list[int]) -> list[int]:
    """Elements ``b_i`` of order ``targets[i]`` with ``a`` the internal direct sum of ``<b_i>``.

    Depth-first search; candidates are tried in index order so the result is
    deterministic.
    """
    orders = [a.element_order(x) for x in range(a.order)]

    def extend(span: frozenset[int], i: int) -> list[int] | None:
        if i == len(targets):
            return [] if len(span) == a.order else None
        q = targets[i]
        for x in range(a.order):
            if orders[x] != q:
                continue
            mult = [a.identity]
            for _ in range(q - 1):
                mult.append(a.mul(mult[-1], x))
            if any(y in span for y in mult[1:]):
                continue
            new = frozenset(a.mul(s, y) for s in span for y in mult)
            rest = extend(new, i + 1)
            if rest is not None:
                return [x] + rest
        return None

    found = extend(frozenset([a.identity]), 0)
    if found is None:  # pragma: no cover - impossible for an abelian group
        raise GroupError("failed to decompose the abelianization")
    return found


def abelianization(h: Subgroup) -> AbelianizationData:
    g = h.parent
    comm = commutator_subgroup(h)
    cset = set(comm.members)
    # cosets of the (normal) commutator subgroup inside h
    proj = np.full(h.order, -1, dtype=np.int64)
    reps: list[int] = []
    for i, x in enumerate(h.members):
        if proj[i] >= 0:
            continue
        for c in comm.members:
            proj[h.position[g.mul(x, c)]] = len(reps)
        reps.append(x)
    k = len(reps)
    table = np.empty((k, k), dtype=np.int64)
    for a, ra in enumerate(reps):
        for b, rb in enumerate(reps):
            table[a, b] = proj[h.position[g.mul(ra, rb)]]
    quotient = Group.from_table(table, name=f"{g.name}|ab", cap=k)
    assert quotient.is_abelian and len(cset) * k == h.order
    elementary = _elementary_divisors(quotient)
    basis = _cyclic_basis(quotient, elementary)
    proj.setflags(write=False)
    return AbelianizationData(
        subgroup=h,
        commutator=comm,
        quotient=quotient,
        projection=proj,
        invariant_factors=tuple(_invariant_factors(elementary)) or (1,),
        basis=tuple(basis),
        basis_orders=tuple(elementary),
    )


def _coordinates(a: Group, basis: tuple[int, ...], orders: tuple[int, ...]) -> dict[int, tuple[int, ...]]:
    coords = {}
    for n in itertools.product(*(range(q) for q in orders)):
        x = a.identity
        for b, k in zip(basis, n):
            x = a.mul(x, a.power(b, k))
        coords[x] = n
    return coords


def enumerate_characters(h: Subgroup) -> list[Character]:
    """All characters of ``h``, sorted by exponent tuple (trivial first)."""
    ab = abelianization(h)
    m = ab.exponent
    coords = _coordinates(ab.quotient, ab.basis, ab.basis_orders)
    member_coords = [coords[int(ab.projection[i])] for i in range(h.order)]
    chars = []
    for a in itertools.product(*(range(q) for q in ab.basis_orders)):
        exps = tuple(
            sum(ai * ni * (m // q) for ai, ni, q in zip(a, n, ab.basis_orders)) % m
            for n in member_coords
        )
        chars.append(exps)
    chars.sort()
    return [Character(h, m, e) for e in chars]


def trivial_character(h: Subgroup) -> Character:
    return Character(h, 1, (0,) * h.order)


def is_character(h: Subgroup, values, tol: float = 1e-12) -> bool:
    """Whether ``values`` (one per member, in member order) is a homomorphism into the circle."""
    v = np.asarray(values, dtype=complex)
    if v.shape != (h.order,):
        raise GroupError(f"expected {h.order} values, got {v.size}")
    if np.any(np.abs(np.abs(v) - 1) > tol):
        return False
    g = h.parent
    arr = np.array(h.members)
    prod = g.cayley[np.ix_(arr, arr)]
    pos = np.full(g.order, -1, dtype=np.int64)
    pos[arr] = np.arange(h.order)
    return bool(np.all(np.abs(v[:, None] * v[None, :] - v[pos[prod]]) <= tol))


def character_from_values(h: Subgroup, values, tol: float = 1e-9) -> Character:
    """Recover the exact exponent form of a character given numerically."""
    if not is_character(h, values, tol):
        raise GroupError("values do not define a character")
    for chi in enumerate_characters(h):
        if np.allclose(chi.values, values, atol=tol):
            return chi
    raise GroupError("values do not define a character")  # pragma: no cover

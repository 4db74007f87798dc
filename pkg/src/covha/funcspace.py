"""Complex functions on a finite group: L^p norms, translations, convolution, involution, pairing."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .groups import Group, GroupError, HaarMeasure, build_group

DEFAULT_TOL = 1e-12


class GroupFunction:
    """A point of ``C^G``: one complex value per group element, in index order.

    Values are copied on construction and never mutated afterwards.
    """

    __slots__ = ("group", "values")
    __array_ufunc__ = None  # numpy scalars defer to our operators

    def __init__(self, group: Group, values):
        v = np.array(values, dtype=complex)
        if v.shape != (group.order,):
            raise GroupError(f"expected {group.order} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GroupError("function values must be finite")
        v.setflags(write=False)
        self.group = group
        self.values = v

    @classmethod
    def zeros(cls, group: Group) -> "GroupFunction":
        return cls(group, np.zeros(group.order))

    @classmethod
    def constant(cls, group: Group, c: complex = 1.0) -> "GroupFunction":
        return cls(group, np.full(group.order, c, dtype=complex))

    @classmethod
    def delta(cls, group: Group, x: int) -> "GroupFunction":
        v = np.zeros(group.order, dtype=complex)
        v[group.check_element(x)] = 1.0
        return cls(group, v)

    @classmethod
    def random(cls, group: Group, rng: np.random.Generator) -> "GroupFunction":
        """Standard complex Gaussian values."""
        n = group.order
        return cls(group, rng.standard_normal(n) + 1j * rng.standard_normal(n))

    def __len__(self) -> int:
        return self.group.order

    def __getitem__(self, x):
        return self.values[x]

    def _other(self, other) -> np.ndarray:
        if isinstance(other, GroupFunction):
            _same_group(self, other)
            return other.values
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GroupFunction(self.group, self.values + o)

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GroupFunction(self.group, self.values - o)

    def __mul__(self, c):
        if isinstance(c, (int, float, complex, np.number)):
            return GroupFunction(self.group, self.values * c)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return GroupFunction(self.group, -self.values)

    def __repr__(self) -> str:
        return f"GroupFunction({self.group.name}, {np.array2string(self.values, precision=4)})"

    def allclose(self, other: "GroupFunction", atol: float = DEFAULT_TOL) -> bool:
        _same_group(self, other)
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= atol)

    # -- file format --------------------------------------------------------

    def to_json(self, descriptor: dict | None = None) -> dict:
        return {
            "group": descriptor if descriptor is not None else self.group.fingerprint,
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }

    @classmethod
    def from_json(cls, data: dict, group: Group | None = None) -> "GroupFunction":
        """Read ``{"group": <descriptor or fingerprint>, "values": [[re, im], ...]}``.

        When ``group`` is given the file's group reference must agree with it.
        """
        if not isinstance(data, dict) or "values" not in data:
            raise GroupError("function file needs a 'values' list")
        ref = data.get("group")
        if isinstance(ref, (dict, str)) and not (isinstance(ref, str) and _looks_like_fingerprint(ref)):
            own = build_group(ref)
            if group is not None and not np.array_equal(own.cayley, group.cayley):
                raise GroupError("function file refers to a different group")
            group = group or own
        elif isinstance(ref, str):
            if group is None:
                raise GroupError("function file gives only a group fingerprint; pass the group")
            if ref != group.fingerprint:
                raise GroupError("function file fingerprint does not match the group")
        elif group is None:
            raise GroupError("function file has no group reference")
        try:
            vals = [complex(float(re), float(im)) for re, im in data["values"]]
        except (TypeError, ValueError):
            raise GroupError("function values must be [re, im] pairs") from None
        return cls(group, vals)

    def save(self, path: str | Path, descriptor: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_json(descriptor)))

    @classmethod
    def load(cls, path: str | Path, group: Group | None = None) -> "GroupFunction":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise GroupError(f"malformed function file: {exc}") from None
        return cls.from_json(data, group)


def _looks_like_fingerprint(s: str) -> bool:
    return len(s) == 16 and all(c in "0123456789abcdef" for c in s)


def _same_group(f: GroupFunction, g: GroupFunction) -> None:
    if f.group is not g.group and not np.array_equal(f.group.cayley, g.group.cayley):
        raise GroupError("functions live on different groups")


def _check_measure(f: GroupFunction, mu: HaarMeasure) -> None:
    if mu.size != f.group.order:
        raise GroupError("measure does not live on the function's group")


def lp_norm(f: GroupFunction, p: float, mu: HaarMeasure) -> float:
    if p == np.inf:
        return sup_norm(f)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    _check_measure(f, mu)
    a = np.abs(f.values)
    if p == 1:
        return float(a.sum() * mu.weight)
    if p == 2:
        return float(np.sqrt(np.dot(a, a) * mu.weight))
    return float((np.sum(a**p) * mu.weight) ** (1.0 / p))


def sup_norm(f: GroupFunction) -> float:
    return float(np.max(np.abs(f.values)))


def translate_left(y: int, f: GroupFunction) -> GroupFunction:
    """``(L_y f)(x) = f(y^-1 x)``."""
    g = f.group
    y = g.check_element(y)
    return GroupFunction(g, f.values[g.cayley[g.inverses[y]]])


def translate_right(x: int, f: GroupFunction) -> GroupFunction:
    """``(R_x f)(y) = f(y x)``."""
    g = f.group
    x = g.check_element(x)
    return GroupFunction(g, f.values[g.cayley[:, x]])


def left_translation_matrix(g: Group, y: int) -> np.ndarray:
    """Matrix of ``L_y`` acting on value vectors."""
    m = np.zeros((g.order, g.order))
    m[np.arange(g.order), g.cayley[g.inverses[y]]] = 1.0
    return m


def right_translation_matrix(g: Group, x: int) -> np.ndarray:
    m = np.zeros((g.order, g.order))
    m[np.arange(g.order), g.cayley[:, x]] = 1.0
    return m


def convolve(f: GroupFunction, g: GroupFunction, mu: HaarMeasure) -> GroupFunction:
    """``(f * g)(x) = sum_y f(y) g(y^-1 x) w``."""
    _same_group(f, g)
    _check_measure(f, mu)
    grp = f.group
    # idx[y, x] = y^-1 x
    idx = grp.cayley[grp.inverses]
    return GroupFunction(grp, mu.weight * (f.values @ g.values[idx]))


def involution(f: GroupFunction, mu: HaarMeasure | None = None) -> GroupFunction:
    """``f*(x) = Delta(x^-1) conj(f(x^-1))`` with ``Delta = 1``."""
    g = f.group
    return GroupFunction(g, np.conj(f.values[g.inverses]))


def pairing(f: GroupFunction, g: GroupFunction, mu: HaarMeasure) -> complex:
    """``<f, g> = sum_x f(x) conj(g(x)) w``; linear in ``f``, conjugate-linear in ``g``."""
    _same_group(f, g)
    _check_measure(f, mu)
    return complex(np.vdot(g.values, f.values) * mu.weight)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)

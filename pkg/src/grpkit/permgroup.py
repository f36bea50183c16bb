"""Permutations and permutation groups with base/strong-generating-set machinery.

Conventions
-----------
* Points are 1-based everywhere in the public interface (cycle notation, the
  ``.grp`` text format, ``Permutation.images``).  Internally permutations are
  dense 0-based ``numpy.int32`` image arrays; ``compose(p, q)`` applies ``p``
  first, then ``q``, i.e. ``(p*q)(x) == q(p(x))``.
* The Schreier-Sims construction is fully deterministic: no randomisation,
  orbits are built breadth-first with first-in-wins transversals, and new base
  points are chosen as the smallest moved point (after any caller-supplied
  preferred points).  Identical input generators always produce an identical
  chain, so orders, element streams and reports are reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator, Sequence

import numpy as np

from .limits import DEFAULT_LIMITS, BoundExceeded, Limits

_DT = np.int32


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=_DT)
    arr.setflags(write=False)
    return arr


def compose(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Image array of "apply p, then q"."""
    return q[p]


def invert(p: np.ndarray) -> np.ndarray:
    out = np.empty_like(p)
    out[p] = np.arange(len(p), dtype=_DT)
    return out


def _is_identity(p: np.ndarray) -> bool:
    return bool((p == np.arange(len(p), dtype=_DT)).all())


def lex_key(p: np.ndarray) -> bytes:
    """Bytes whose lexicographic order matches image-tuple order."""
    return p.astype(">i4").tobytes()


class Permutation:
    """A bijection on the points 1..degree, stored as a dense image array."""

    __slots__ = ("_arr", "_images", "_hash")

    def __init__(self, images: Sequence[int]):
        arr = np.asarray(images, dtype=_DT) - 1
        n = len(arr)
        if n == 0:
            raise ValueError("degree must be at least 1")
        seen = np.zeros(n, dtype=bool)
        if arr.min(initial=0) < 0 or arr.max(initial=0) >= n:
            raise ValueError("images out of range 1..degree")
        seen[arr] = True
        if not seen.all():
            raise ValueError("images are not a bijection")
        self._arr = _freeze(arr)
        self._images: tuple[int, ...] | None = None
        self._hash: int | None = None

    @classmethod
    def _from_array(cls, arr: np.ndarray) -> "Permutation":
        self = object.__new__(cls)
        self._arr = _freeze(arr)
        self._images = None
        self._hash = None
        return self

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._from_array(np.arange(degree, dtype=_DT))

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], degree: int) -> "Permutation":
        arr = np.arange(degree, dtype=_DT)
        for cyc in cycles:
            if len(set(cyc)) != len(cyc):
                raise ValueError(f"repeated point in cycle {cyc}")
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                if not (1 <= a <= degree):
                    raise ValueError(f"point {a} outside 1..{degree}")
                arr[a - 1] = b - 1
        p = cls._from_array(arr)
        # overlapping cycles could break bijectivity; validate once
        if len(set(int(x) for x in arr)) != degree:
            raise ValueError("cycles do not define a bijection")
        return p

    @property
    def degree(self) -> int:
        return len(self._arr)

    @property
    def images(self) -> tuple[int, ...]:
        if self._images is None:
            self._images = tuple(int(x) + 1 for x in self._arr)
        return self._images

    def array(self) -> np.ndarray:
        return self._arr

    def __call__(self, point: int) -> int:
        return int(self._arr[point - 1]) + 1

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        return Permutation._from_array(compose(self._arr, other._arr))

    def inverse(self) -> "Permutation":
        return Permutation._from_array(invert(self._arr))

    def __pow__(self, n: int) -> "Permutation":
        if n < 0:
            return self.inverse() ** (-n)
        result = np.arange(self.degree, dtype=_DT)
        base = self._arr
        while n:
            if n & 1:
                result = compose(result, base)
            base = compose(base, base)
            n >>= 1
        return Permutation._from_array(result)

    def is_identity(self) -> bool:
        return _is_identity(self._arr)

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, each rotated to start at its smallest point."""
        arr = self._arr
        seen = [False] * len(arr)
        out = []
        for i in range(len(arr)):
            if seen[i] or arr[i] == i:
                seen[i] = True
                continue
            cyc = [i]
            seen[i] = True
            j = int(arr[i])
            while j != i:
                cyc.append(j)
                seen[j] = True
                j = int(arr[j])
            out.append(tuple(c + 1 for c in cyc))
        return out

    def order(self) -> int:
        n = 1
        for cyc in self.cycles():
            n = n * len(cyc) // gcd(n, len(cyc))
        return n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.degree == other.degree and bool((self._arr == other._arr).all())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._arr.tobytes())
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({format_cycles(self)!r}, degree={self.degree})"

    def __str__(self) -> str:
        return format_cycles(self)


def format_cycles(p: Permutation) -> str:
    cycles = p.cycles()
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(x) for x in cyc) + ")" for cyc in cycles)


_CYCLE_RE = re.compile(r"\(\s*((?:\d+[\s,]*)*)\)")


def parse_permutation(text: str, degree: int) -> Permutation:
    """Parse disjoint-cycle notation like ``(1 2 3)(4 5)`` on 1..degree."""
    stripped = text.strip()
    if not stripped:
        raise ValueError("empty permutation text")
    consumed = 0
    cycles: list[list[int]] = []
    for m in _CYCLE_RE.finditer(stripped):
        if stripped[consumed : m.start()].strip():
            raise ValueError(f"could not parse permutation {text!r}")
        consumed = m.end()
        body = m.group(1).strip()
        if body:
            cycles.append([int(t) for t in re.split(r"[\s,]+", body)])
    if stripped[consumed:].strip():
        raise ValueError(f"could not parse permutation {text!r}")
    return Permutation.from_cycles(cycles, degree)


# --------------------------------------------------------------------------
# Deterministic Schreier-Sims stabilizer chain
# --------------------------------------------------------------------------


class _Level:
    """One level of a stabilizer chain: a base point, the strong generators
    fixing all earlier base points, and the breadth-first orbit transversal.

    ``scan_b``/``scan_g`` remember how far Schreier-generator verification has
    progressed, so the main loop can resume instead of rescanning after the
    chain grows at deeper levels."""

    __slots__ = ("point", "gens", "gen_keys", "transversal", "inv_transversal", "orbit_order", "scan_b", "scan_g")

    def __init__(self, point: int, degree: int):
        self.point = point
        self.gens: list[np.ndarray] = []
        self.gen_keys: set[bytes] = set()
        self.transversal: dict[int, np.ndarray] = {}
        self.inv_transversal: dict[int, np.ndarray] = {}
        self.orbit_order: list[int] = []
        self.scan_b = 0
        self.scan_g = 0

    def rebuild_orbit(self, degree: int) -> None:
        ident = np.arange(degree, dtype=_DT)
        self.transversal = {self.point: ident}
        self.inv_transversal = {self.point: ident}
        self.orbit_order = [self.point]
        self.scan_b = 0
        self.scan_g = 0
        queue = [self.point]
        qi = 0
        while qi < len(queue):
            a = queue[qi]
            qi += 1
            u = self.transversal[a]
            for g in self.gens:
                b = int(g[a])
                if b not in self.transversal:
                    ub = compose(u, g)
                    self.transversal[b] = ub
                    self.inv_transversal[b] = invert(ub)
                    self.orbit_order.append(b)
                    queue.append(b)


class _Chain:
    """Stabilizer chain produced by the deterministic Schreier-Sims algorithm.

    ``order_stop`` aborts construction as soon as the product of orbit lengths
    reaches that value; since the product never exceeds the true group order,
    reaching a known upper bound proves the chain complete.  ``overshoot``
    aborts (raising _Overshoot) once the partial product exceeds the value,
    which callers use for "does this generate more than half of the parent"
    style tests.
    """

    __slots__ = ("degree", "levels", "preferred")

    def __init__(
        self,
        degree: int,
        preferred: Sequence[int] | None = None,
        forced_base: Sequence[int] | None = None,
    ):
        self.degree = degree
        self.levels: list[_Level] = []
        self.preferred = list(preferred) if preferred else []
        ident = np.arange(degree, dtype=_DT)
        for pt in forced_base or ():
            lvl = _Level(pt, degree)
            lvl.transversal = {pt: ident}
            lvl.inv_transversal = {pt: ident}
            lvl.orbit_order = [pt]
            self.levels.append(lvl)

    def order(self) -> int:
        n = 1
        for lvl in self.levels:
            n *= len(lvl.orbit_order)
        return n

    def base(self) -> list[int]:
        return [lvl.point for lvl in self.levels]

    def sift(self, arr: np.ndarray, start: int = 0) -> tuple[np.ndarray | None, int]:
        """Sift through levels from ``start``.

        Returns (residue, level): residue None means the element sifted to the
        identity; otherwise level is the first level where it got stuck (or
        len(levels) if it fixes every base point without being the identity).
        """
        r = arr
        for i in range(start, len(self.levels)):
            lvl = self.levels[i]
            b = int(r[lvl.point])
            if b == lvl.point:
                continue
            inv_u = lvl.inv_transversal.get(b)
            if inv_u is None:
                return r, i
            r = compose(r, inv_u)
        if _is_identity(r):
            return None, len(self.levels)
        return r, len(self.levels)

    def contains(self, arr: np.ndarray) -> bool:
        residue, _ = self.sift(arr)
        return residue is None

    def _pick_base_point(self, arr: np.ndarray) -> int:
        for pt in self.preferred:
            if arr[pt] != pt:
                return pt
        moved = np.nonzero(arr != np.arange(self.degree, dtype=_DT))[0]
        return int(moved[0])

    def _install_gen(self, arr: np.ndarray, from_level: int) -> tuple[int, bool]:
        """Record a new strong generator in levels ``from_level``..droplevel.

        Levels above ``from_level`` already generate the element as a product
        of their generators, so their lists and scans stay untouched.  Returns
        (droplevel, whether any level actually changed)."""
        key = arr.tobytes()
        arr = _freeze(arr)
        drop = None
        for i, lvl in enumerate(self.levels):
            if arr[lvl.point] != lvl.point:
                drop = i
                break
        if drop is None:
            lvl = _Level(self._pick_base_point(arr), self.degree)
            self.levels.append(lvl)
            drop = len(self.levels) - 1
        added = False
        for i in range(from_level, drop + 1):
            lvl = self.levels[i]
            if key in lvl.gen_keys:
                continue
            lvl.gens.append(arr)
            lvl.gen_keys.add(key)
            lvl.rebuild_orbit(self.degree)
            added = True
        return drop, added

    def build(
        self,
        gens: Iterable[np.ndarray],
        order_stop: int | None = None,
        overshoot: int | None = None,
    ) -> bool:
        """Run Schreier-Sims over the given generators.

        Returns True normally; returns False when ``overshoot`` was given and
        the partial order exceeded it (the chain is then left incomplete).
        """
        for g in gens:
            g = np.asarray(g, dtype=_DT)
            if len(g) != self.degree or len(np.unique(g)) != self.degree:
                raise ValueError("generator array is not a bijection on the point set")
            if not _is_identity(g):
                self._install_gen(g, 0)
        if order_stop is not None and self.order() == order_stop:
            return True
        if overshoot is not None and self.order() > overshoot:
            return False
        i = len(self.levels) - 1
        while i >= 0:
            lvl = self.levels[i]
            dirtied = None
            while lvl.scan_b < len(lvl.orbit_order):
                if lvl.scan_g >= len(lvl.gens):
                    lvl.scan_b += 1
                    lvl.scan_g = 0
                    continue
                b = lvl.orbit_order[lvl.scan_b]
                g = lvl.gens[lvl.scan_g]
                lvl.scan_g += 1
                c = int(g[b])
                sg = compose(compose(lvl.transversal[b], g), lvl.inv_transversal[c])
                if _is_identity(sg):
                    continue
                residue, _ = self.sift(sg, i + 1)
                if residue is None:
                    continue
                dirtied, added = self._install_gen(residue, i + 1)
                if not added:
                    raise RuntimeError("chain construction stalled on a known strong generator")
                if order_stop is not None and self.order() == order_stop:
                    return True
                if overshoot is not None and self.order() > overshoot:
                    return False
                break
            if dirtied is None:
                i -= 1
            else:
                i = dirtied
        return True

    def strong_generators(self) -> list[np.ndarray]:
        return list(self.levels[0].gens) if self.levels else []

    def element_arrays(self) -> Iterator[np.ndarray]:
        """All elements, exactly once, in a deterministic order."""

        def rec(i: int) -> Iterator[np.ndarray]:
            if i >= len(self.levels):
                yield np.arange(self.degree, dtype=_DT)
                return
            lvl = self.levels[i]
            for b in sorted(lvl.orbit_order):
                u = lvl.transversal[b]
                for tail in rec(i + 1):
                    yield compose(tail, u)

        return rec(0)


# --------------------------------------------------------------------------
# PermGroup
# --------------------------------------------------------------------------


class PermGroup:
    """A finite permutation group on points 1..degree.

    Instances are immutable once constructed; expensive derived data
    (conjugacy classes, subgroup lattices, maximal subgroups, ...) is memoised
    on the instance by the modules that compute it.
    """

    def __init__(self, generators: Sequence[Permutation], degree: int, *, _chain: _Chain | None = None):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        for g in generators:
            if g.degree != degree:
                raise ValueError(f"generator degree {g.degree} does not match group degree {degree}")
        self.degree = degree
        self.generators: tuple[Permutation, ...] = tuple(g for g in generators if not g.is_identity())
        if _chain is None:
            _chain = _Chain(degree)
            _chain.build([g.array() for g in self.generators])
        self._chain = _chain
        self.order: int = _chain.order()
        self.cache: dict = {}

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(pt + 1 for pt in self._chain.base())

    @property
    def strong_generators(self) -> tuple[Permutation, ...]:
        return tuple(Permutation._from_array(a) for a in self._chain.strong_generators())

    def generator_arrays(self) -> list[np.ndarray]:
        return [g.array() for g in self.generators]

    def identity(self) -> Permutation:
        return Permutation.identity(self.degree)

    def __contains__(self, g: Permutation) -> bool:
        return contains(self, g)

    def contains_array(self, arr: np.ndarray) -> bool:
        return self._chain.contains(arr)

    def element_arrays(self, limits: Limits = DEFAULT_LIMITS) -> Iterator[np.ndarray]:
        if self.order > limits.enumeration:
            raise BoundExceeded(
                f"group order {self.order} exceeds enumeration bound {limits.enumeration}"
            )
        return self._chain.element_arrays()

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_abelian(self) -> bool:
        if "abelian" not in self.cache:
            arrs = self.generator_arrays()
            self.cache["abelian"] = all(
                (compose(a, b) == compose(b, a)).all() for i, a in enumerate(arrs) for b in arrs[i + 1 :]
            )
        return self.cache["abelian"]

    def element_set(self, limits: Limits = DEFAULT_LIMITS) -> frozenset[bytes]:
        """Frozen set of element keys; memoised. Used for dedup at desk scale."""
        if "element_set" not in self.cache:
            self.cache["element_set"] = frozenset(a.tobytes() for a in self.element_arrays(limits))
        return self.cache["element_set"]

    def min_nonidentity_key(self) -> bytes:
        """Lexicographic key of the smallest non-identity element (order <= 10^4)."""
        if "min_key" not in self.cache:
            if self.order == 1:
                self.cache["min_key"] = lex_key(np.arange(self.degree, dtype=_DT))
            else:
                best: bytes | None = None
                for a in self._chain.element_arrays():
                    if _is_identity(a):
                        continue
                    k = lex_key(a)
                    if best is None or k < best:
                        best = k
                self.cache["min_key"] = best
        return self.cache["min_key"]

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order}, ngens={len(self.generators)})"


def make_perm_group(generators: Sequence[Permutation], degree: int) -> PermGroup:
    """Group generated by the given permutations, with exact order."""
    return PermGroup(generators, degree)


def _group_from_arrays(
    arrs: Sequence[np.ndarray],
    degree: int,
    preferred_base: Sequence[int] | None = None,
    order_stop: int | None = None,
) -> PermGroup:
    chain = _Chain(degree, preferred=preferred_base)
    chain.build(list(arrs), order_stop=order_stop)
    gens = [Permutation._from_array(a) for a in arrs if not _is_identity(np.asarray(a, dtype=_DT))]
    return PermGroup(gens, degree, _chain=chain)


def contains(group: PermGroup, g: Permutation) -> bool:
    if g.degree != group.degree:
        raise ValueError(f"degree mismatch: element {g.degree}, group {group.degree}")
    return group._chain.contains(g.array())


def elements(group: PermGroup, limits: Limits = DEFAULT_LIMITS) -> Iterator[Permutation]:
    """Stream of all group elements, each exactly once."""
    return (Permutation._from_array(a) for a in group.element_arrays(limits))


def generates_at_least_half(parent: PermGroup, arrs: Sequence[np.ndarray]) -> bool:
    """True iff the subgroup generated inside ``parent`` is all of ``parent``.

    Uses Lagrange: once the partial chain order exceeds |parent|/2 the final
    order, a divisor of |parent|, must be |parent| itself.
    """
    chain = _Chain(parent.degree)
    completed = chain.build(list(arrs), overshoot=parent.order // 2)
    if not completed:
        return True
    return chain.order() == parent.order


# --------------------------------------------------------------------------
# Subgroups
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupHandle:
    parent: PermGroup
    subgroup: PermGroup

    def __post_init__(self):
        if self.subgroup.degree != self.parent.degree:
            raise ValueError("subgroup and parent must share a degree")
        if self.parent.order % self.subgroup.order != 0:
            raise ValueError("subgroup order does not divide parent order")

    @property
    def index(self) -> int:
        return self.parent.order // self.subgroup.order

    @property
    def order(self) -> int:
        return self.subgroup.order


def subgroup(parent: PermGroup, gens: Sequence[Permutation], order_stop: int | None = None) -> SubgroupHandle:
    """Subgroup of ``parent`` generated by ``gens`` (membership-checked)."""
    for g in gens:
        if not contains(parent, g):
            raise ValueError(f"generator {g} is not an element of the parent group")
    sub = _group_from_arrays([g.array() for g in gens], parent.degree, order_stop=order_stop)
    return SubgroupHandle(parent, sub)


def trivial_subgroup(parent: PermGroup) -> SubgroupHandle:
    return SubgroupHandle(parent, PermGroup([], parent.degree))


def full_subgroup(parent: PermGroup) -> SubgroupHandle:
    return SubgroupHandle(parent, parent)


def subgroup_from_arrays(parent: PermGroup, arrs: Sequence[np.ndarray], order_stop: int | None = None) -> SubgroupHandle:
    sub = _group_from_arrays(list(arrs), parent.degree, order_stop=order_stop)
    return SubgroupHandle(parent, sub)


def same_subgroup(a: PermGroup, b: PermGroup) -> bool:
    """Element-set equality, decided by order plus mutual membership of generators."""
    if a.order != b.order or a.degree != b.degree:
        return False
    return all(b.contains_array(arr) for arr in a.generator_arrays())


def subgroup_leq(a: PermGroup, b: PermGroup) -> bool:
    """Whether a <= b as element sets."""
    if a.degree != b.degree or b.order % a.order != 0:
        return False
    return all(b.contains_array(arr) for arr in a.generator_arrays())


def group_from_element_arrays(arrs: Iterable[np.ndarray], degree: int) -> PermGroup:
    """Group generated by a (typically closed) set of elements, with a small
    generating set picked incrementally."""
    gens: list[np.ndarray] = []
    chain = _Chain(degree)
    for arr in arrs:
        if _is_identity(arr):
            continue
        if not chain.contains(arr):
            gens.append(arr)
            chain = _Chain(degree)
            chain.build(gens)
    return _group_from_arrays(gens, degree)


def conjugate_subgroup(handle: SubgroupHandle, g: Permutation) -> SubgroupHandle:
    ginv = invert(g.array())
    arrs = [compose(compose(ginv, a), g.array()) for a in handle.subgroup.generator_arrays()]
    return subgroup_from_arrays(handle.parent, arrs, order_stop=handle.subgroup.order)


def join_subgroups(parent: PermGroup, handles: Sequence[SubgroupHandle]) -> SubgroupHandle:
    arrs: list[np.ndarray] = []
    for h in handles:
        arrs.extend(h.subgroup.generator_arrays())
    return subgroup_from_arrays(parent, arrs)


# --------------------------------------------------------------------------
# Products
# --------------------------------------------------------------------------


def direct_product(a: PermGroup, b: PermGroup) -> PermGroup:
    """A x B acting on the disjoint union of the two point sets."""
    n, m = a.degree, b.degree
    gens: list[Permutation] = []
    for g in a.generators:
        arr = np.arange(n + m, dtype=_DT)
        arr[:n] = g.array()
        gens.append(Permutation._from_array(arr))
    for g in b.generators:
        arr = np.arange(n + m, dtype=_DT)
        arr[n:] = g.array() + n
        gens.append(Permutation._from_array(arr))
    prod = make_perm_group(gens, n + m)
    prod.cache["direct_factors"] = (a, b)
    return prod


def direct_factor_embeddings(prod: PermGroup) -> tuple[SubgroupHandle, SubgroupHandle]:
    """Canonical embedded copies of the two factors of a direct product."""
    a, b = prod.cache["direct_factors"]
    n, m = a.degree, b.degree
    left = []
    for g in a.generators:
        arr = np.arange(n + m, dtype=_DT)
        arr[:n] = g.array()
        left.append(arr)
    right = []
    for g in b.generators:
        arr = np.arange(n + m, dtype=_DT)
        arr[n:] = g.array() + n
        right.append(arr)
    return (
        subgroup_from_arrays(prod, left, order_stop=a.order),
        subgroup_from_arrays(prod, right, order_stop=b.order),
    )


# --------------------------------------------------------------------------
# .grp text format
# --------------------------------------------------------------------------


def format_group(group: PermGroup) -> str:
    lines = [f"degree {group.degree}"]
    for g in group.generators:
        lines.append(f"gen {format_cycles(g)}")
    return "\n".join(lines) + "\n"


def parse_group(text: str) -> PermGroup:
    degree: int | None = None
    gens: list[Permutation] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("degree"):
            degree = int(line.split()[1])
        elif line.startswith("gen"):
            if degree is None:
                raise ValueError("gen line before degree line")
            gens.append(parse_permutation(line[3:].strip(), degree))
        else:
            raise ValueError(f"unrecognised line in group file: {raw!r}")
    if degree is None:
        raise ValueError("missing degree line")
    return make_perm_group(gens, degree)

"""Group homomorphisms between permutation groups, and coset actions.

A homomorphism is represented by its generator images.  All computations run
on the graph group: the permutation group on the disjoint union of the two
point sets whose generators act as a domain generator on the first block and
as its image on the second.  The assignment extends to a homomorphism exactly
when that group has the same order as the domain, and stabilizer chains over
the graph group with a controlled base prefix yield images, preimages and the
kernel without any presentation machinery.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .limits import DEFAULT_LIMITS, BoundExceeded, Limits
from .permgroup import (
    PermGroup,
    Permutation,
    SubgroupHandle,
    _Chain,
    _DT,
    _group_from_arrays,
    _is_identity,
    compose,
    invert,
    make_perm_group,
    subgroup_from_arrays,
)


class InvalidHomomorphism(ValueError):
    """The generator-image assignment does not extend to a homomorphism."""

    def __init__(self, message: str, witness: Permutation | None = None):
        super().__init__(message)
        self.witness = witness


class Homomorphism:
    """A homomorphism determined by one image per domain generator."""

    def __init__(
        self,
        domain: PermGroup,
        codomain: PermGroup,
        generator_images: Sequence[Permutation],
        *,
        _trusted: bool = False,
    ):
        if len(generator_images) != len(domain.generators):
            raise ValueError(
                f"need one image per domain generator "
                f"({len(domain.generators)} generators, {len(generator_images)} images)"
            )
        for h in generator_images:
            if h.degree != codomain.degree:
                raise ValueError("image degree does not match codomain degree")
        self.domain = domain
        self.codomain = codomain
        self.generator_images: tuple[Permutation, ...] = tuple(generator_images)
        self._apply_chain: _Chain | None = None
        self._preimage_chain: _Chain | None = None
        self._image_group: PermGroup | None = None
        if not _trusted:
            self._validate()

    # -- internal chains ---------------------------------------------------

    def _graph_arrays(self) -> list[np.ndarray]:
        m = self.domain.degree
        out = []
        for g, h in zip(self.domain.generators, self.generator_images):
            out.append(np.concatenate([g.array(), h.array() + m]))
        return out

    def _get_apply_chain(self) -> _Chain:
        if self._apply_chain is None:
            chain = _Chain(
                self.domain.degree + self.codomain.degree,
                forced_base=list(self.domain._chain.base()),
            )
            chain.build(self._graph_arrays())
            self._apply_chain = chain
        return self._apply_chain

    def _validate(self) -> None:
        chain = self._get_apply_chain()
        if chain.order() != self.domain.order:
            m = self.domain.degree
            witness = None
            for lvl in chain.levels:
                if lvl.point >= m and lvl.gens:
                    witness = Permutation._from_array(lvl.gens[0][m:] - m)
                    break
            raise InvalidHomomorphism(
                "generator images are inconsistent: the graph group has order "
                f"{chain.order()}, expected {self.domain.order}",
                witness=witness,
            )

    def _get_preimage_chain(self) -> tuple[_Chain, int]:
        """Graph chain whose base starts with a base of the image group."""
        if self._preimage_chain is None:
            m = self.domain.degree
            img = self.image()
            forced = [m + pt for pt in img._chain.base()]
            chain = _Chain(m + self.codomain.degree, forced_base=forced)
            chain.build(self._graph_arrays())
            self._preimage_chain = chain
        img = self.image()
        return self._preimage_chain, len(img._chain.base())

    # -- public operations -------------------------------------------------

    def image(self) -> PermGroup:
        if self._image_group is None:
            self._image_group = _group_from_arrays(
                [h.array() for h in self.generator_images], self.codomain.degree
            )
        return self._image_group

    def apply(self, x: Permutation) -> Permutation:
        """Image of an arbitrary domain element."""
        if x.degree != self.domain.degree:
            raise ValueError("degree mismatch")
        m, n = self.domain.degree, self.codomain.degree
        chain = self._get_apply_chain()
        combined = np.concatenate([x.array(), np.arange(n, dtype=_DT) + m])
        residue, stuck = chain.sift(combined)
        if residue is None:
            return Permutation.identity(n)
        if not _is_identity(residue[:m]):
            raise ValueError("element is not in the domain group")
        return Permutation._from_array(invert(residue[m:] - m))

    def preimage(self, y: Permutation) -> Permutation:
        """One preimage of an image-group element."""
        if y.degree != self.codomain.degree:
            raise ValueError("degree mismatch")
        m, n = self.domain.degree, self.codomain.degree
        chain, prefix = self._get_preimage_chain()
        combined = np.concatenate([np.arange(m, dtype=_DT), y.array() + m])
        r = combined
        for i in range(prefix):
            lvl = chain.levels[i]
            b = int(r[lvl.point])
            if b == lvl.point:
                continue
            inv_u = lvl.inv_transversal.get(b)
            if inv_u is None:
                raise ValueError("element is not in the image of the homomorphism")
            r = compose(r, inv_u)
        if not _is_identity(r[m:] - m):
            raise ValueError("element is not in the image of the homomorphism")
        return Permutation._from_array(invert(r[:m]))

    def kernel_handle(self) -> SubgroupHandle:
        m = self.domain.degree
        chain, prefix = self._get_preimage_chain()
        arrs = []
        seen: set[bytes] = set()
        if prefix < len(chain.levels):
            for arr in chain.levels[prefix].gens:
                part = arr[:m]
                key = part.tobytes()
                if key not in seen:
                    seen.add(key)
                    arrs.append(part)
        ker_order = self.domain.order // self.image().order
        return subgroup_from_arrays(self.domain, arrs, order_stop=ker_order)

    def preimage_subgroup(self, gens: Sequence[Permutation]) -> SubgroupHandle:
        """Full preimage of the subgroup of the image generated by ``gens``."""
        arrs = [self.preimage(y).array() for y in gens]
        ker = self.kernel_handle()
        arrs.extend(ker.subgroup.generator_arrays())
        sub = _group_from_arrays(
            [y.array() for y in gens], self.codomain.degree
        )
        return subgroup_from_arrays(
            self.domain, arrs, order_stop=sub.order * ker.subgroup.order
        )

    def __repr__(self) -> str:
        return f"Homomorphism({self.domain!r} -> {self.codomain!r})"


def hom_from_images(
    domain: PermGroup, codomain_degree: int, images: Sequence[Permutation]
) -> Homomorphism:
    """Homomorphism sending the i-th domain generator to ``images[i]``.

    Raises InvalidHomomorphism (with a witness permutation that some relation
    maps to, when one is found) if the assignment is inconsistent.
    """
    codomain = _group_from_arrays([h.array() for h in images], codomain_degree)
    return Homomorphism(domain, codomain, images)


def kernel(f: Homomorphism) -> SubgroupHandle:
    return f.kernel_handle()


def image(f: Homomorphism) -> PermGroup:
    return f.image()


def _orbits_of(arrs: list[np.ndarray], degree: int) -> list[np.ndarray]:
    """Orbit partition of 0..degree-1 under the given permutation arrays."""
    seen = np.zeros(degree, dtype=bool)
    orbits = []
    for start in range(degree):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        qi = 0
        while qi < len(orbit):
            a = orbit[qi]
            qi += 1
            for g in arrs:
                b = int(g[a])
                if not seen[b]:
                    seen[b] = True
                    orbit.append(b)
        orbits.append(np.array(sorted(orbit), dtype=np.intp))
    return orbits


def coset_action(
    G: PermGroup, H: SubgroupHandle, limits: Limits = DEFAULT_LIMITS
) -> tuple[PermGroup, Homomorphism]:
    """Action of G on the right cosets of H, as a permutation group of degree
    |G : H|, together with the epimorphism G -> action group.

    Cosets are discovered breadth-first from H itself; bucketing by the
    H-orbit-partition invariant keeps the membership confirmations cheap.
    """
    if H.parent is not G:
        raise ValueError("subgroup handle does not belong to this group")
    index = G.order // H.subgroup.order
    if index > limits.coset_index:
        raise BoundExceeded(f"coset index {index} exceeds bound {limits.coset_index}")
    n = G.degree
    h_chain = H.subgroup._chain
    orbits = _orbits_of(H.subgroup.generator_arrays(), n)

    def invariant(arr: np.ndarray) -> bytes:
        return b"".join(np.sort(arr[o]).astype(">i4").tobytes() for o in orbits)

    gen_arrs = G.generator_arrays()
    reps: list[np.ndarray] = [np.arange(n, dtype=_DT)]
    inv_reps: list[np.ndarray] = [np.arange(n, dtype=_DT)]
    buckets: dict[bytes, list[int]] = {invariant(reps[0]): [0]}
    gen_images: list[list[int]] = [[] for _ in gen_arrs]
    qi = 0
    while qi < len(reps):
        r = reps[qi]
        for gi, g in enumerate(gen_arrs):
            t = compose(r, g)
            key = invariant(t)
            target = None
            for c in buckets.get(key, ()):
                if h_chain.contains(compose(t, inv_reps[c])):
                    target = c
                    break
            if target is None:
                reps.append(t)
                inv_reps.append(invert(t))
                target = len(reps) - 1
                buckets.setdefault(key, []).append(target)
                if len(reps) > index:
                    raise RuntimeError("coset enumeration exceeded the group index")
            gen_images[gi].append(target)
        qi += 1
    if len(reps) != index:
        raise RuntimeError(f"coset enumeration found {len(reps)} cosets, expected {index}")

    # gen_images[gi] was filled coset by coset; rows are per-coset targets
    images = []
    for gi in range(len(gen_arrs)):
        arr = np.array(gen_images[gi], dtype=_DT)
        images.append(Permutation._from_array(arr))
    Q = make_perm_group(images, index) if images else PermGroup([], index)
    f = Homomorphism(G, Q, images, _trusted=True)
    return Q, f

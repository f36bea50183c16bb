"""Enumeration bounds shared across the toolkit.

Every potentially explosive computation is guarded by one of these limits and
fails with a clean :class:`BoundExceeded` error instead of truncating.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


class BoundExceeded(RuntimeError):
    """A configured enumeration bound was exceeded."""


@dataclass(frozen=True)
class Limits:
    # element enumeration (elements(), centralizer filters, conjugacy classes)
    enumeration: int = 10**6
    # coset actions: maximal index of the acted-on subgroup
    coset_index: int = 10**4
    # exhaustive subgroup-lattice construction
    brute_subgroups: int = 1000
    # number of vectors p^d a matrix action may be spread over
    vector_points: int = 10**5
    # 1-dimensional seed subspaces spun during module chopping
    spin_seeds: int = 10**5
    # twisted generator tuples during complement enumeration
    complement_tuples: int = 10**5
    # endomorphism ring enumeration for indecomposability
    endo_elements: int = 10**6

    def with_overrides(self, **kwargs) -> "Limits":
        return replace(self, **kwargs)


DEFAULT_LIMITS = Limits()


def check(value: int, bound: int, what: str) -> None:
    if value > bound:
        raise BoundExceeded(f"{what}: {value} exceeds configured bound {bound}")

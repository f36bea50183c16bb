"""Modules over GF(p) for a finite permutation group: spin-up, socle, radical,
factor modules, irreducibility, composition factors and indecomposability.

Conventions
-----------
Vectors are rows and a group generator ``g`` with action matrix ``A`` acts by
``v -> v @ A``.  With the group's apply-left-first composition this makes the
matrix assignment an ordinary homomorphism: ``A(g*h) = A(g) @ A(h)``.

The p^dim vectors of a module are indexed by base-p digits,
``index(v) = sum v_j p^j``, which is how matrix actions are converted to
permutations of the vector set for validation and for affine constructions.

The dual module acts by inverse-transpose matrices; submodule bases are kept
in reduced row echelon form so they are canonical and hashable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .gflinalg import (
    GFMatrix,
    GFVector,
    _is_prime,
    format_matrix,
    inverse_matrix,
    nullspace_array,
    parse_matrix,
    rank_array,
    rref_array,
    solve_array,
)
from .homs import Homomorphism, hom_from_images
from .limits import DEFAULT_LIMITS, BoundExceeded, Limits
from .permgroup import PermGroup, Permutation, format_group, parse_group

_DT = np.int64


class InconclusiveComputation(RuntimeError):
    """A randomized certification ran out of attempts; raise the attempt count."""


class RowSpace:
    """Incrementally maintained row space in reduced row echelon form."""

    def __init__(self, p: int, ncols: int):
        self.p = p
        self.ncols = ncols
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def reduce(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=_DT) % self.p
        for row, piv in zip(self.rows, self.pivots):
            c = int(v[piv])
            if c:
                v = (v - c * row) % self.p
        return v

    def contains(self, v: np.ndarray) -> bool:
        return not self.reduce(v).any()

    def insert(self, v: np.ndarray) -> bool:
        r = self.reduce(v)
        if not r.any():
            return False
        piv = int(np.nonzero(r)[0][0])
        r = r * pow(int(r[piv]), self.p - 2, self.p) % self.p
        pos = 0
        while pos < len(self.pivots) and self.pivots[pos] < piv:
            pos += 1
        self.rows.insert(pos, r)
        self.pivots.insert(pos, piv)
        for i, row in enumerate(self.rows):
            if i != pos and row[piv]:
                self.rows[i] = (row - row[piv] * r) % self.p
        return True

    @property
    def dim(self) -> int:
        return len(self.rows)

    def basis_matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.ncols), dtype=_DT)
        return np.array(self.rows, dtype=_DT)


@dataclass(frozen=True)
class SubmoduleBasis:
    """An action-invariant subspace, with its basis in RREF."""

    module: "FpModule"
    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=_DT)) % self.module.p
        if b.shape[0] == 0:
            b = b.reshape(0, self.module.dim)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def vectors(self) -> tuple[GFVector, ...]:
        return tuple(GFVector(self.module.p, tuple(int(x) for x in row)) for row in self.basis)

    def key(self) -> bytes:
        return self.basis.tobytes()

    def contains_vector(self, v: np.ndarray) -> bool:
        rs = _rowspace_from(self.module.p, self.basis)
        return rs.contains(v)


def _rowspace_from(p: int, basis: np.ndarray) -> RowSpace:
    rs = RowSpace(p, basis.shape[1] if basis.size else basis.shape[1])
    for row in basis:
        rs.insert(row)
    return rs


class FpModule:
    """A GF(p) matrix representation of a permutation group K, one invertible
    action matrix per generator of K."""

    def __init__(self, K: PermGroup, p: int, dim: int, action: tuple[np.ndarray, ...], *, _trusted: bool):
        self.K = K
        self.p = p
        self.dim = dim
        acts = []
        for a in action:
            a = np.asarray(a, dtype=_DT) % p
            if a.shape != (dim, dim):
                raise ValueError("action matrix has wrong shape")
            a.setflags(write=False)
            acts.append(a)
        self.action: tuple[np.ndarray, ...] = tuple(acts)
        self.cache: dict = {}
        if not _trusted:
            self._validate()

    # -- construction --------------------------------------------------------

    @classmethod
    def from_matrices(
        cls,
        K: PermGroup,
        p: int,
        matrices,
        limits: Limits = DEFAULT_LIMITS,
    ) -> "FpModule":
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        mats = []
        for m in matrices:
            mats.append(m.array() if isinstance(m, GFMatrix) else np.asarray(m, dtype=_DT))
        if len(mats) != len(K.generators):
            raise ValueError("need one matrix per group generator")
        dim = mats[0].shape[0] if mats else K.degree
        mod = cls(K, p, dim, tuple(mats), _trusted=False)
        mod.cache["limits"] = limits
        return mod

    def _validate(self, limits: Limits = DEFAULT_LIMITS) -> None:
        for a in self.action:
            if rank_array(a, self.p) != self.dim:
                raise ValueError("action matrix is singular")
        if self.p**self.dim <= limits.vector_points:
            self.vector_action()  # raises InvalidHomomorphism when inconsistent
        else:
            self._validate_by_walk(limits)

    def _validate_by_walk(self, limits: Limits) -> None:
        """Exact check by walking the group closure with matrices in tow."""
        if self.K.order > limits.enumeration:
            raise BoundExceeded(
                "module validation needs either p^dim within the vector bound "
                "or the group within the enumeration bound"
            )
        gen_arrs = self.K.generator_arrays()
        seen = {np.arange(self.K.degree, dtype=np.int32).tobytes(): np.eye(self.dim, dtype=_DT)}
        frontier = [(np.arange(self.K.degree, dtype=np.int32), np.eye(self.dim, dtype=_DT))]
        while frontier:
            nxt = []
            for perm, mat in frontier:
                for g, a in zip(gen_arrs, self.action):
                    perm2 = g[perm]
                    mat2 = mat @ a % self.p
                    key = perm2.tobytes()
                    known = seen.get(key)
                    if known is None:
                        seen[key] = mat2
                        nxt.append((perm2, mat2))
                    elif not (known == mat2).all():
                        raise ValueError("generator matrices do not define a homomorphism")
            frontier = nxt
        if len(seen) != self.K.order:
            raise ValueError("generator matrices do not define a homomorphism")

    @classmethod
    def _trusted_module(cls, K: PermGroup, p: int, dim: int, action) -> "FpModule":
        return cls(K, p, dim, tuple(np.asarray(a, dtype=_DT) % p for a in action), _trusted=True)

    # -- derived data ---------------------------------------------------------

    def action_gfmatrices(self) -> tuple[GFMatrix, ...]:
        return tuple(GFMatrix.from_array(a, self.p) for a in self.action)

    def vector_action(self) -> Homomorphism:
        """The action on the p^dim vectors as a permutation homomorphism."""
        if "vector_action" not in self.cache:
            n = self.p**self.dim
            perms = [
                Permutation._from_array(vector_permutation(a, self.p))
                for a in self.action
            ]
            self.cache["vector_action"] = hom_from_images(self.K, n, perms)
        return self.cache["vector_action"]

    def matrix_of(self, k: Permutation, limits: Limits = DEFAULT_LIMITS) -> np.ndarray:
        """Action matrix of an arbitrary group element."""
        if self.p**self.dim <= limits.vector_points:
            vec_perm = self.vector_action().apply(k)
            return matrix_from_vector_permutation(vec_perm.array(), self.p, self.dim)
        walk = self._element_matrix_table(limits)
        key = k.array().tobytes()
        if key not in walk:
            raise ValueError("element is not in the represented group")
        return walk[key]

    def _element_matrix_table(self, limits: Limits) -> dict[bytes, np.ndarray]:
        if "matrix_table" not in self.cache:
            if self.K.order > limits.enumeration:
                raise BoundExceeded("group too large to tabulate matrices")
            gen_arrs = self.K.generator_arrays()
            ident = np.arange(self.K.degree, dtype=np.int32)
            table = {ident.tobytes(): np.eye(self.dim, dtype=_DT)}
            frontier = [(ident, np.eye(self.dim, dtype=_DT))]
            while frontier:
                nxt = []
                for perm, mat in frontier:
                    for g, a in zip(gen_arrs, self.action):
                        perm2 = g[perm]
                        key = perm2.tobytes()
                        if key not in table:
                            mat2 = mat @ a % self.p
                            table[key] = mat2
                            nxt.append((perm2, mat2))
                frontier = nxt
            self.cache["matrix_table"] = table
        return self.cache["matrix_table"]

    def __repr__(self) -> str:
        return f"FpModule(p={self.p}, dim={self.dim}, |K|={self.K.order})"


# -- vector indexing -----------------------------------------------------------


def vector_table(p: int, dim: int) -> np.ndarray:
    """All p^dim vectors as rows; row i holds the base-p digits of i."""
    idx = np.arange(p**dim, dtype=_DT)
    return np.stack([(idx // p**j) % p for j in range(dim)], axis=1)


def vector_index(vectors: np.ndarray, p: int) -> np.ndarray:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=_DT)) % p
    powers = p ** np.arange(vectors.shape[1], dtype=_DT)
    return vectors @ powers


def vector_permutation(a: np.ndarray, p: int) -> np.ndarray:
    """Permutation array on vector indices induced by v -> v @ a."""
    dim = a.shape[0]
    vv = vector_table(p, dim)
    return np.asarray(vector_index(vv @ a % p, p), dtype=np.int32)


def translation_permutation(w: np.ndarray, p: int) -> np.ndarray:
    """Permutation array on vector indices induced by v -> v + w."""
    w = np.asarray(w, dtype=_DT) % p
    vv = vector_table(p, len(w))
    return np.asarray(vector_index(vv + w, p), dtype=np.int32)


def matrix_from_vector_permutation(perm: np.ndarray, p: int, dim: int) -> np.ndarray:
    """Recover the matrix from its vector permutation (images of basis rows)."""
    vv = vector_table(p, dim)
    rows = []
    for j in range(dim):
        rows.append(vv[int(perm[p**j])])
    return np.array(rows, dtype=_DT)


# -- basic constructions ---------------------------------------------------------


def permutation_module(K: PermGroup, p: int) -> FpModule:
    """The module with basis the permuted points; generators act by
    permutation matrices.  A homomorphism by construction."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    n = K.degree
    eye = np.eye(n, dtype=_DT)
    action = tuple(eye[g.array()] for g in K.generators)
    return FpModule._trusted_module(K, p, n, action)


def dual_module(M: FpModule) -> FpModule:
    """Dual action: each generator acts by the inverse-transpose matrix."""
    if "dual" not in M.cache:
        action = tuple(inverse_matrix(a, M.p).T % M.p for a in M.action)
        M.cache["dual"] = FpModule._trusted_module(M.K, M.p, M.dim, action)
    return M.cache["dual"]


def direct_sum(M: FpModule, N: FpModule) -> FpModule:
    if M.K is not N.K or M.p != N.p:
        raise ValueError("direct sum needs the same group and the same field")
    d = M.dim + N.dim
    action = []
    for a, b in zip(M.action, N.action):
        blk = np.zeros((d, d), dtype=_DT)
        blk[: M.dim, : M.dim] = a
        blk[M.dim :, M.dim :] = b
        action.append(blk)
    return FpModule._trusted_module(M.K, M.p, d, tuple(action))


# -- spin and submodules ----------------------------------------------------------


def spin(M: FpModule, seeds) -> SubmoduleBasis:
    """Smallest submodule containing all seed vectors."""
    rs = RowSpace(M.p, M.dim)
    work: list[np.ndarray] = []
    for s in seeds:
        arr = s.array() if isinstance(s, GFVector) else np.asarray(s, dtype=_DT)
        if rs.insert(arr % M.p):
            work.append(arr % M.p)
    wi = 0
    while wi < len(work):
        v = work[wi]
        wi += 1
        for a in M.action:
            w = v @ a % M.p
            if rs.insert(w):
                work.append(w)
    return SubmoduleBasis(M, rs.basis_matrix())


def minimal_submodules(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> list[SubmoduleBasis]:
    """All minimal nonzero submodules.

    Spins one representative of every 1-dimensional subspace, skipping seeds
    that fall inside an already-resolved submodule and recursing into proper
    spins; for an irreducible module the answer is the module itself.
    """
    p, d = M.p, M.dim
    nseeds = (p**d - 1) // (p - 1)
    if nseeds > limits.spin_seeds:
        raise BoundExceeded(f"{nseeds} seed subspaces exceed bound {limits.spin_seeds}")
    minimals: dict[bytes, SubmoduleBasis] = {}
    covered: list[RowSpace] = []
    for seed in _seed_vectors(p, d):
        if any(rs.contains(seed) for rs in covered):
            continue
        S = spin(M, [seed])
        if S.dim == d:
            continue
        sub = submodule_restriction(M, S)
        for inner in minimal_submodules(sub, limits):
            lifted = rref_array(inner.basis @ S.basis % p, p)[0]
            cand = SubmoduleBasis(M, lifted)
            minimals.setdefault(cand.key(), cand)
        covered.append(_rowspace_from(p, S.basis))
    if not minimals:
        full = rref_array(np.eye(d, dtype=_DT), p)[0]
        return [SubmoduleBasis(M, full)]
    return list(minimals.values())


def _seed_vectors(p: int, d: int):
    """Canonical representatives of the 1-dimensional subspaces of GF(p)^d:
    first nonzero coordinate equal to 1, enumerated deterministically."""
    for lead in range(d):
        tail = d - lead - 1
        for rest in iter_product(range(p), repeat=tail):
            v = np.zeros(d, dtype=_DT)
            v[lead] = 1
            if tail:
                v[lead + 1 :] = rest
            yield v


def socle_basis(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> SubmoduleBasis:
    """Sum of all irreducible submodules."""
    if "socle" not in M.cache:
        mins = minimal_submodules(M, limits)
        stacked = np.vstack([m.basis for m in mins])
        M.cache["socle"] = SubmoduleBasis(M, rref_array(stacked, M.p)[0])
    return M.cache["socle"]


def radical_basis(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> SubmoduleBasis:
    """Jacobson radical, computed as the annihilator of the socle of the dual."""
    if "radical" not in M.cache:
        soc_dual = socle_basis(dual_module(M), limits)
        rad = nullspace_array(soc_dual.basis, M.p)
        M.cache["radical"] = SubmoduleBasis(M, rref_array(rad, M.p)[0])
    return M.cache["radical"]


# -- factor and restricted modules ---------------------------------------------------


def _check_invariant(M: FpModule, U: SubmoduleBasis) -> RowSpace:
    rs = _rowspace_from(M.p, U.basis)
    for row in U.basis:
        for a in M.action:
            if not rs.contains(row @ a % M.p):
                raise ValueError("subspace is not invariant under the module action")
    return rs


def factor_module(M: FpModule, U: SubmoduleBasis) -> FpModule:
    """Quotient module M/U in the coordinates of the non-pivot columns."""
    rs = _check_invariant(M, U)
    comp = [c for c in range(M.dim) if c not in rs.pivots]
    h = len(comp)
    action = []
    for a in M.action:
        q = np.zeros((h, h), dtype=_DT)
        for i, c in enumerate(comp):
            q[i] = rs.reduce(a[c])[comp]
        action.append(q)
    F = FpModule._trusted_module(M.K, M.p, h, tuple(action))
    F.cache["quotient_of"] = (M, U, tuple(comp))
    return F


def quotient_projection(M: FpModule, U: SubmoduleBasis) -> np.ndarray:
    """Matrix of the quotient map: v_quot = v @ P for the factor coordinates."""
    rs = _rowspace_from(M.p, U.basis)
    comp = [c for c in range(M.dim) if c not in rs.pivots]
    P = np.zeros((M.dim, len(comp)), dtype=_DT)
    eye = np.eye(M.dim, dtype=_DT)
    for i in range(M.dim):
        P[i] = rs.reduce(eye[i])[comp]
    return P


def submodule_restriction(M: FpModule, U: SubmoduleBasis) -> FpModule:
    """The action restricted to U, in the coordinates of U's RREF basis."""
    b = U.basis
    k = b.shape[0]
    action = []
    for a in M.action:
        rows = []
        for row in b:
            x = solve_array(b.T, (row @ a) % M.p, M.p)
            if x is None:
                raise ValueError("subspace is not invariant under the module action")
            rows.append(x)
        action.append(np.array(rows, dtype=_DT) % M.p)
    R = FpModule._trusted_module(M.K, M.p, k, tuple(action))
    R.cache["submodule_of"] = (M, U)
    return R


# -- irreducibility ---------------------------------------------------------------


def _random_algebra_element(M: FpModule, rng: random.Random) -> np.ndarray:
    d = M.dim
    theta = np.zeros((d, d), dtype=_DT)
    nterms = rng.randint(2, 4)
    for _ in range(nterms):
        coeff = rng.randint(1, M.p - 1)
        word = np.eye(d, dtype=_DT)
        for _ in range(rng.randint(0, 3)):
            word = word @ M.action[rng.randrange(len(M.action))] % M.p
        theta = (theta + coeff * word) % M.p
    return theta


def is_irreducible(
    M: FpModule, seed: int = 0, limits: Limits = DEFAULT_LIMITS, attempts: int = 40
) -> tuple[bool, SubmoduleBasis | None]:
    """Whether M has no proper nonzero submodule; False comes with a witness.

    Certification first tries singular algebra elements: if some theta has a
    nontrivial kernel and every kernel line spins to the whole module, on both
    the module and its dual, the module is irreducible (a proper dual spin
    converts to a primal witness through the annihilator).  Small modules fall
    back to exhaustive seed spinning.
    """
    d = M.dim
    if d == 1:
        return True, None
    rng = random.Random((seed, "irreducible", M.p, d))
    dual = dual_module(M)
    if M.action:
        for _ in range(attempts):
            theta = _random_algebra_element(M, rng)
            if not theta.any():
                continue
            # row vectors act by v -> v @ theta, so the kernel on the module
            # side is the left nullspace; the right nullspace feeds the dual.
            ker = nullspace_array(theta.T, M.p)
            k = ker.shape[0]
            if k == 0:
                continue
            if (M.p**k - 1) // (M.p - 1) > 64:
                continue
            for coeffs in _seed_vectors(M.p, k):
                v = coeffs @ ker % M.p
                S = spin(M, [v])
                if S.dim < d:
                    return False, S
            ker_t = nullspace_array(theta, M.p)
            for coeffs in _seed_vectors(M.p, ker_t.shape[0]):
                w = coeffs @ ker_t % M.p
                SD = spin(dual, [w])
                if SD.dim < d:
                    ann = nullspace_array(SD.basis, M.p)
                    return False, SubmoduleBasis(M, rref_array(ann, M.p)[0])
            return True, None
    nseeds = (M.p**d - 1) // (M.p - 1)
    if nseeds <= limits.spin_seeds:
        for seed_vec in _seed_vectors(M.p, d):
            S = spin(M, [seed_vec])
            if S.dim < d:
                return False, S
        return True, None
    raise InconclusiveComputation(
        "no singular algebra element found and the module is too large for "
        "exhaustive seed spinning; raise the attempt count"
    )


# -- composition factors --------------------------------------------------------


_FINGERPRINT_WORDS: list[tuple[int, ...]] = [()] + [
    w
    for length in (1, 2, 3)
    for w in iter_product(range(3), repeat=length)
]


def isomorphism_tag(M: FpModule) -> tuple:
    """(dim, trace fingerprint) - equal for isomorphic modules; collisions are
    possible in principle but do not occur at this scale."""
    d = M.dim
    ngens = len(M.action)
    traces = []
    for word in _FINGERPRINT_WORDS:
        if any(i >= ngens for i in word):
            continue
        m = np.eye(d, dtype=_DT)
        for i in word:
            m = m @ M.action[i] % M.p
        traces.append(int(np.trace(m) % M.p))
    return (d, tuple(traces))


def composition_factors(
    M: FpModule, seed: int = 0, limits: Limits = DEFAULT_LIMITS
) -> list[tuple]:
    """Multiset (sorted list) of (dim, fingerprint) tags of the composition
    factors, obtained by recursive chopping."""

    def chop(mod: FpModule, depth: int) -> list[tuple]:
        irr, witness = is_irreducible(mod, seed=seed + depth, limits=limits)
        if irr:
            return [isomorphism_tag(mod)]
        sub = submodule_restriction(mod, witness)
        quot = factor_module(mod, witness)
        return chop(sub, depth + 1) + chop(quot, depth + 1)

    return sorted(chop(M, 0))


# -- indecomposability -------------------------------------------------------------


def endomorphism_basis(M: FpModule) -> list[np.ndarray]:
    """Basis of the algebra of matrices commuting with every action matrix."""
    d = M.dim
    if not M.action:
        return [e.reshape(d, d) for e in np.eye(d * d, dtype=_DT)]
    eye = np.eye(d, dtype=_DT)
    blocks = [np.kron(a, eye) - np.kron(eye, a.T) for a in M.action]
    system = np.vstack(blocks) % M.p
    basis = nullspace_array(system, M.p)
    return [row.reshape(d, d) for row in basis]


def _fitting_power(x: np.ndarray, d: int, p: int) -> np.ndarray:
    y = np.eye(d, dtype=_DT)
    b = x
    n = d
    while n:
        if n & 1:
            y = y @ b % p
        b = b @ b % p
        n >>= 1
    return y


def is_indecomposable(
    M: FpModule, seed: int = 0, limits: Limits = DEFAULT_LIMITS, attempts: int = 200
) -> bool:
    """Fitting's lemma: indecomposable iff every endomorphism is nilpotent or
    invertible.  The endomorphism algebra is enumerated when small enough,
    otherwise random endomorphisms search for a proper splitting."""
    d = M.dim
    if d == 1:
        return True
    basis = endomorphism_basis(M)
    e = len(basis)
    if M.p**e <= limits.endo_elements:
        for coeffs in iter_product(range(M.p), repeat=e):
            x = np.zeros((d, d), dtype=_DT)
            for c, b in zip(coeffs, basis):
                if c:
                    x = (x + c * b) % M.p
            if not x.any():
                continue
            r = rank_array(x, M.p)
            if r == d:
                continue
            y = _fitting_power(x, d, M.p)
            if y.any():
                return False
        return True
    rng = random.Random((seed, "indecomposable", M.p, d))
    for _ in range(attempts):
        x = np.zeros((d, d), dtype=_DT)
        for b in basis:
            x = (x + rng.randrange(M.p) * b) % M.p
        if not x.any():
            continue
        y = _fitting_power(x, d, M.p)
        r = rank_array(y, M.p)
        if 0 < r < d:
            return False
    raise InconclusiveComputation(
        "endomorphism algebra too large to enumerate and random splitting "
        "search was inconclusive; raise the attempt count"
    )


# -- faithfulness, fixed points, maximal submodules -----------------------------------


def is_faithful(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> bool:
    """Whether only the identity of K acts as the identity matrix."""
    if M.p**M.dim <= limits.vector_points:
        ker = M.vector_action().kernel_handle()
        return ker.subgroup.order == 1
    table = M._element_matrix_table(limits)
    eye = np.eye(M.dim, dtype=_DT)
    fixed = sum(1 for mat in table.values() if (mat == eye).all())
    return fixed == 1


def fixed_points(M: FpModule) -> SubmoduleBasis:
    """The subspace of vectors fixed by every generator."""
    if not M.action:
        return SubmoduleBasis(M, rref_array(np.eye(M.dim, dtype=_DT), M.p)[0])
    stacked = np.vstack([(a - np.eye(M.dim, dtype=_DT)).T % M.p for a in M.action])
    basis = nullspace_array(stacked, M.p)
    return SubmoduleBasis(M, rref_array(basis, M.p)[0])


def all_submodules_of_semisimple(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> list[SubmoduleBasis]:
    """All submodules of a semisimple module: sums of minimal submodules."""
    mins = minimal_submodules(M, limits)
    zero = SubmoduleBasis(M, np.zeros((0, M.dim), dtype=_DT))
    found: dict[bytes, SubmoduleBasis] = {zero.key(): zero}
    for m in mins:
        found[m.key()] = m
    work = list(found.values())
    while work:
        nxt = []
        for a in work:
            for m in mins:
                stacked = np.vstack([a.basis, m.basis]) if a.dim else m.basis
                cand = SubmoduleBasis(M, rref_array(stacked, M.p)[0])
                if cand.key() not in found:
                    found[cand.key()] = cand
                    nxt.append(cand)
        work = nxt
    return list(found.values())


def maximal_submodules(M: FpModule, limits: Limits = DEFAULT_LIMITS) -> list[SubmoduleBasis]:
    """Maximal proper submodules: preimages of the maximal submodules of the
    semisimple head M/Rad(M)."""
    rad = radical_basis(M, limits)
    head = factor_module(M, rad)
    subs = all_submodules_of_semisimple(head, limits)
    proper = [s for s in subs if s.dim < head.dim]
    maximal_in_head = []
    for s in proper:
        if not any(t is not s and t.dim > s.dim and _contains_rows(t, s) for t in proper):
            maximal_in_head.append(s)
    comp = [c for c in range(M.dim) if c not in _rowspace_from(M.p, rad.basis).pivots]
    lift = np.eye(M.dim, dtype=_DT)[comp]
    out = []
    for s in maximal_in_head:
        pieces = [rad.basis] if rad.dim else []
        if s.dim:
            pieces.append(s.basis @ lift % M.p)
        stacked = np.vstack(pieces) if pieces else np.zeros((0, M.dim), dtype=_DT)
        out.append(SubmoduleBasis(M, rref_array(stacked, M.p)[0]))
    out.sort(key=lambda s: (s.dim, s.key()))
    return out


def _contains_rows(big: SubmoduleBasis, small: SubmoduleBasis) -> bool:
    rs = _rowspace_from(big.module.p, big.basis)
    return all(rs.contains(row) for row in small.basis)


# -- text format ------------------------------------------------------------------


def format_module(M: FpModule) -> str:
    parts = [f"module {M.p} {M.dim} {len(M.action)}", format_group(M.K).rstrip("\n")]
    for m in M.action_gfmatrices():
        parts.append(format_matrix(m).rstrip("\n"))
    return "\n".join(parts) + "\n"


def parse_module(text: str, limits: Limits = DEFAULT_LIMITS) -> FpModule:
    lines = text.splitlines()
    header = None
    for ln in lines:
        if ln.strip() and not ln.lstrip().startswith("#"):
            header = ln.strip()
            break
    if header is None or not header.startswith("module"):
        raise ValueError("missing module header")
    _, p, dim, ngens = header.split()
    p, dim, ngens = int(p), int(dim), int(ngens)
    start = lines.index(header) + 1
    matrix_starts = [i for i in range(start, len(lines)) if lines[i].strip().startswith("matrix")]
    if len(matrix_starts) != ngens:
        raise ValueError(f"expected {ngens} matrices, found {len(matrix_starts)}")
    group_block = "\n".join(lines[start : matrix_starts[0]] if matrix_starts else lines[start:])
    K = parse_group(group_block)
    mats = []
    bounds = matrix_starts + [len(lines)]
    for i in range(ngens):
        mats.append(parse_matrix("\n".join(lines[bounds[i] : bounds[i + 1]])))
    mod = FpModule.from_matrices(K, p, mats, limits)
    if mod.dim != dim:
        raise ValueError("declared dimension does not match the matrices")
    return mod

"""Dense exact linear algebra over prime fields GF(p).

Matrices are small (dimensions bounded by the permutation degrees in play, so
well under 100) and the field is exact, so plain Gauss-Jordan elimination with
first-nonzero pivoting is used throughout.  Entries are kept eagerly reduced
into [0, p).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

_DTYPE = np.int64


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _as_array(rows, p: int) -> np.ndarray:
    a = np.array(rows, dtype=_DTYPE) % p
    if a.ndim == 1:
        a = a.reshape(1, -1)
    return a


@dataclass(frozen=True)
class GFVector:
    p: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        object.__setattr__(self, "entries", tuple(int(e) % self.p for e in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=_DTYPE)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)


@dataclass(frozen=True)
class GFMatrix:
    p: int
    rows: int
    cols: int
    entries: tuple[int, ...]  # row-major

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match rows*cols")
        object.__setattr__(self, "entries", tuple(int(e) % self.p for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], p: int) -> "GFMatrix":
        a = _as_array(list(rows), p)
        return cls.from_array(a, p)

    @classmethod
    def from_array(cls, a: np.ndarray, p: int) -> "GFMatrix":
        a = np.atleast_2d(np.asarray(a, dtype=_DTYPE)) % p
        return cls(p, a.shape[0], a.shape[1], tuple(int(x) for x in a.ravel()))

    @classmethod
    def identity(cls, n: int, p: int) -> "GFMatrix":
        return cls.from_array(np.eye(n, dtype=_DTYPE), p)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=_DTYPE).reshape(self.rows, self.cols)

    def row(self, i: int) -> GFVector:
        return GFVector(self.p, self.entries[i * self.cols : (i + 1) * self.cols])

    def __matmul__(self, other: "GFMatrix") -> "GFMatrix":
        if self.p != other.p or self.cols != other.rows:
            raise ValueError("shape or modulus mismatch")
        return GFMatrix.from_array(self.array() @ other.array() % self.p, self.p)

    def apply(self, v: GFVector) -> GFVector:
        if self.p != v.p or self.cols != len(v):
            raise ValueError("shape or modulus mismatch")
        return GFVector(self.p, tuple(int(x) for x in self.array() @ v.array() % self.p))


# --- array-level kernels (shared with the module-theory code) ---


def rref_array(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` mod p; returns (rref, pivot columns)."""
    a = np.atleast_2d(np.asarray(a, dtype=_DTYPE)) % p
    a = a.copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        sel = None
        for i in range(r, nrows):
            if a[i, c] % p:
                sel = i
                break
        if sel is None:
            continue
        if sel != r:
            a[[r, sel]] = a[[sel, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = a[r] * inv % p
        for i in range(nrows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a[: len(pivots)], pivots


def nullspace_array(a: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of the right nullspace of ``a`` mod p."""
    a = np.atleast_2d(np.asarray(a, dtype=_DTYPE))
    ncols = a.shape[1]
    r, pivots = rref_array(a, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=_DTYPE)
    for k, c in enumerate(free):
        basis[k, c] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-r[i, c]) % p
    return basis


def solve_array(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution x of a x = b mod p, or None if inconsistent."""
    a = np.atleast_2d(np.asarray(a, dtype=_DTYPE))
    b = np.asarray(b, dtype=_DTYPE) % p
    if a.shape[0] != b.shape[0]:
        raise ValueError("shape mismatch")
    aug = np.hstack([a % p, b.reshape(-1, 1)])
    r, pivots = rref_array(aug, p)
    ncols = a.shape[1]
    if ncols in pivots:
        return None
    x = np.zeros(ncols, dtype=_DTYPE)
    for i, c in enumerate(pivots):
        x[c] = r[i, ncols]
    return x


def inverse_matrix(a: np.ndarray, p: int) -> np.ndarray:
    """Inverse of a square matrix mod p; raises if singular."""
    a = np.atleast_2d(np.asarray(a, dtype=_DTYPE))
    n = a.shape[0]
    aug = np.hstack([a % p, np.eye(n, dtype=_DTYPE)])
    r, pivots = rref_array(aug, p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return r[:, n:]


def rank_array(a: np.ndarray, p: int) -> int:
    return len(rref_array(a, p)[1])


# --- spec-level operations on the wrapper types ---


def rref(m: GFMatrix) -> tuple[GFMatrix, tuple[int, ...], int]:
    """RREF of the matrix, its pivot columns and its rank."""
    r, pivots = rref_array(m.array(), m.p)
    full = np.zeros((m.rows, m.cols), dtype=_DTYPE)
    full[: len(pivots)] = r
    return GFMatrix.from_array(full, m.p), tuple(pivots), len(pivots)


def nullspace(m: GFMatrix) -> list[GFVector]:
    basis = nullspace_array(m.array(), m.p)
    return [GFVector(m.p, tuple(int(x) for x in row)) for row in basis]


def solve_linear(m: GFMatrix, b: GFVector) -> GFVector | None:
    if m.p != b.p:
        raise ValueError("modulus mismatch")
    if m.rows != len(b):
        raise ValueError("shape mismatch")
    x = solve_array(m.array(), b.array(), m.p)
    if x is None:
        return None
    return GFVector(m.p, tuple(int(v) for v in x))


# --- text format ---


def format_matrix(m: GFMatrix) -> str:
    lines = [f"matrix {m.p} {m.rows} {m.cols}"]
    a = m.array()
    for i in range(m.rows):
        lines.append(" ".join(str(int(x)) for x in a[i]))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> GFMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or not lines[0].startswith("matrix"):
        raise ValueError("missing matrix header")
    _, p, rows, cols = lines[0].split()
    p, rows, cols = int(p), int(rows), int(cols)
    if len(lines) - 1 < rows:
        raise ValueError("not enough matrix rows")
    entries: list[int] = []
    for i in range(rows):
        vals = [int(t) for t in lines[1 + i].split()]
        if len(vals) != cols:
            raise ValueError(f"row {i} has {len(vals)} entries, expected {cols}")
        entries.extend(vals)
    return GFMatrix(p, rows, cols, tuple(entries))

"""Exact and modular dense linear algebra.

Ranks are computed over prime fields by row elimination, or over the
integers by fraction-free (Bareiss) elimination.  Characteristic-zero
ranks of matrices with generic entries are certified by taking the
maximum modular rank over several random primes and matching it against
a closed-form upper bound; see `certified_rank`.

Three elimination kernels cover the supported modulus range:

* p < 2**23: blocked elimination whose trailing updates run as float64
  matrix products (64 accumulated products of two residues stay below
  2**53, so every intermediate is exact);
* p < 2**31: per-pivot vectorized int64 elimination (a single product of
  two residues plus one subtraction stays below 2**63);
* larger p (up to 62 bits): plain Python integers.

All functions are pure; matrices are never mutated after construction.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .config import derive_seed
from .errors import InconsistencyError, InvalidArgumentError, InvalidModulusError

_PANEL = 64
_F64_PRIME_LIMIT = 1 << 23  # 64 * p^2 + p < 2^53 for p below this
_I64_PRIME_LIMIT = 1 << 31


# ---------------------------------------------------------------------------
# primality and prime sampling
# ---------------------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 2**64."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, seed: int) -> int:
    """A uniformly sampled prime with exactly `bits` bits, 20 <= bits <= 62."""
    if not 20 <= bits <= 62:
        raise InvalidArgumentError(f"prime size {bits} outside [20, 62] bits")
    rng = random.Random(seed)
    lo, hi = 1 << (bits - 1), (1 << bits) - 1
    while True:
        candidate = rng.randrange(lo, hi + 1) | 1
        if is_prime(candidate):
            return candidate


def _check_prime(p: int) -> None:
    if not isinstance(p, int) or not is_prime(p):
        raise InvalidModulusError(f"modulus {p} is not prime")
    if p >= 1 << 62:
        raise InvalidModulusError(f"modulus {p} exceeds 62 bits")


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMatrix:
    """Dense row-major matrix with exact integer (or residue) entries."""

    rows: int
    cols: int
    data: np.ndarray  # shape (rows, cols), dtype int64 or object

    def __post_init__(self):
        if self.data.shape != (self.rows, self.cols):
            raise InvalidArgumentError(
                f"entry array of shape {self.data.shape} does not match "
                f"{self.rows}x{self.cols}"
            )

    @staticmethod
    def from_rows(rows) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if m else 0
        if any(len(r) != n for r in rows):
            raise InvalidArgumentError("ragged rows")
        big = any(abs(int(x)) >= (1 << 62) for r in rows for x in r)
        dtype = object if big else np.int64
        data = np.array(rows, dtype=dtype).reshape(m, n)
        return ExactMatrix(m, n, data)

    @staticmethod
    def zeros(rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix(rows, cols, np.zeros((rows, cols), dtype=np.int64))

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix(n, n, np.eye(n, dtype=np.int64))

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, self.data.T.copy())

    def residues(self, p: int) -> np.ndarray:
        """Entries reduced into [0, p), as int64 (p < 2**62 always fits)."""
        if self.data.dtype == object:
            return (self.data % p).astype(np.int64)
        if p < _I64_PRIME_LIMIT:
            return (self.data % p).astype(np.int64)
        # int64 entries, large p: reduce through Python ints to avoid overflow
        reduced = np.array(
            [[int(x) % p for x in row] for row in self.data.tolist()],
            dtype=np.int64,
        ).reshape(self.rows, self.cols)
        return reduced


def _as_matrix(m) -> ExactMatrix:
    if isinstance(m, ExactMatrix):
        return m
    if isinstance(m, np.ndarray):
        arr = m if m.ndim == 2 else m.reshape(1, -1)
        return ExactMatrix(arr.shape[0], arr.shape[1], arr)
    return ExactMatrix.from_rows(m)


# ---------------------------------------------------------------------------
# echelon kernels
# ---------------------------------------------------------------------------


@dataclass
class Echelon:
    """Row echelon form mod p: `rows[:rank]` with unit pivots at `pivots`."""

    rank: int
    pivots: list[int]
    rows: np.ndarray  # (rank, n) int64 residues
    n: int
    p: int
    nonpivots: list[int] = field(init=False)

    def __post_init__(self):
        pivset = set(self.pivots)
        self.nonpivots = [j for j in range(self.n) if j not in pivset]


def _echelon_f64(A: np.ndarray, p: int) -> tuple[int, list[int]]:
    """In-place forward elimination; A float64 with entries in [0, p)."""
    m, n = A.shape
    rank = 0
    pivots: list[int] = []
    col = 0
    while rank < m and col < n:
        cw = min(_PANEL, n - col)
        panel = A[rank:, col:col + cw]
        trail = A[rank:, col + cw:]
        fcols: list[np.ndarray] = []
        prow_trail: list[np.ndarray] = []
        local = 0
        for j in range(cw):
            nz = np.nonzero(panel[local:, j])[0]
            if nz.size == 0:
                continue
            i = local + int(nz[0])
            if i != local:
                panel[[local, i]] = panel[[i, local]]
                trail[[local, i]] = trail[[i, local]]
                for f in fcols:
                    f[local], f[i] = f[i], f[local]
            # catch the pivot row's trailing part up with earlier panel pivots
            t = trail[local].copy()
            for k, rk in enumerate(prow_trail):
                fk = fcols[k][local]
                if fk:
                    t = (t - fk * rk) % p
            inv = float(pow(int(panel[local, j]), -1, p))
            panel[local, j:] = panel[local, j:] * inv % p
            if t.size:
                t = t * inv % p
            trail[local] = t
            f = panel[local + 1:, j].copy()
            panel[local + 1:, j:] = (panel[local + 1:, j:]
                                     - np.outer(f, panel[local, j:])) % p
            fcols.append(np.concatenate([np.zeros(local + 1), f]))
            prow_trail.append(t)
            pivots.append(col + j)
            local += 1
        if local and trail.shape[1] and trail.shape[0] > local:
            F = np.stack(fcols, axis=1)[local:]
            R = np.stack(prow_trail, axis=0)
            trail[local:] = (trail[local:] - F @ R) % p
        rank += local
        col += cw
    return rank, pivots


def _echelon_i64(A: np.ndarray, p: int) -> tuple[int, list[int]]:
    """In-place forward elimination; A int64 with entries in [0, p), p < 2**31."""
    m, n = A.shape
    rank = 0
    pivots: list[int] = []
    for col in range(n):
        if rank == m:
            break
        nz = np.nonzero(A[rank:, col])[0]
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            A[[rank, i]] = A[[i, rank]]
        inv = pow(int(A[rank, col]), -1, p)
        A[rank, col:] = A[rank, col:] * inv % p
        f = A[rank + 1:, col]
        live = np.nonzero(f)[0]
        if live.size:
            block = A[rank + 1:, col:]
            block[live] = (block[live] - f[live, None] * A[rank, col:]) % p
        pivots.append(col)
        rank += 1
    return rank, pivots


def _echelon_obj(rows: list[list[int]], p: int) -> tuple[int, list[int]]:
    """Reference elimination on Python ints, any prime p < 2**62."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    rank = 0
    pivots: list[int] = []
    for col in range(n):
        if rank == m:
            break
        piv = next((i for i in range(rank, m) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col] % p, -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        top = rows[rank]
        for i in range(rank + 1, m):
            f = rows[i][col] % p
            if f:
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], top)]
        pivots.append(col)
        rank += 1
    return rank, pivots


def echelon_mod_p(m, p: int) -> Echelon:
    """Row echelon form of `m` over the field with p elements."""
    _check_prime(p)
    mat = _as_matrix(m)
    if mat.rows == 0 or mat.cols == 0:
        return Echelon(0, [], np.zeros((0, mat.cols), dtype=np.int64), mat.cols, p)
    res = mat.residues(p)
    if p < _F64_PRIME_LIMIT:
        A = res.astype(np.float64)
        rank, pivots = _echelon_f64(A, p)
        rows = A[:rank].astype(np.int64)
    elif p < _I64_PRIME_LIMIT:
        A = res.copy()
        rank, pivots = _echelon_i64(A, p)
        rows = A[:rank]
    else:
        lists = [[int(x) for x in row] for row in res.tolist()]
        rank, pivots = _echelon_obj(lists, p)
        # residues mod p < 2**62 always fit int64
        rows = (np.array(lists[:rank], dtype=np.int64)
                if rank else np.zeros((0, mat.cols), dtype=np.int64))
    return Echelon(rank, pivots, rows, mat.cols, p)


def rank_mod_p(m, p: int) -> int:
    """Rank of `m` over the field with p elements; p must be prime."""
    return echelon_mod_p(m, p).rank


def reduce_mod_echelon(V: np.ndarray, ech: Echelon) -> np.ndarray:
    """Normal forms of the row vectors of V against an echelon basis.

    Returns rows with zeros in every pivot column; the nonpivot columns
    carry the induced coordinates mod the echelon row space.
    """
    p = ech.p
    V = V % p
    if ech.rank == 0 or V.size == 0:
        return V
    if p < _F64_PRIME_LIMIT:
        V = V.astype(np.float64)
        E = ech.rows.astype(np.float64)
        k = 0
        while k < ech.rank:
            kw = min(_PANEL, ech.rank - k)
            F = np.empty((V.shape[0], kw), dtype=np.float64)
            for t in range(kw):
                j = ech.pivots[k + t]
                c = V[:, j]
                if t:
                    c = (c - F[:, :t] @ E[k:k + t, j]) % p
                F[:, t] = c
            V = (V - F @ E[k:k + kw]) % p
            k += kw
        return V.astype(np.int64)
    if p < _I64_PRIME_LIMIT:
        V = V.copy()
        for k in range(ech.rank):
            j = ech.pivots[k]
            c = V[:, j].copy()
            live = np.nonzero(c)[0]
            if live.size:
                V[live] = (V[live] - c[live, None] * ech.rows[k]) % p
        return V
    out = [[int(x) for x in row] for row in V.tolist()]
    for k in range(ech.rank):
        j = ech.pivots[k]
        erow = [int(x) for x in ech.rows[k]]
        for row in out:
            f = row[j]
            if f:
                row[:] = [(x - f * y) % p for x, y in zip(row, erow)]
    return np.array(out, dtype=np.int64).reshape(V.shape)


def kernel_basis_mod_p(m, p: int) -> np.ndarray:
    """Columns form a basis of the null space of `m` over F_p (p < 2**31)."""
    if p >= _I64_PRIME_LIMIT:
        raise InvalidArgumentError("kernel bases are supported for p < 2**31")
    ech = echelon_mod_p(m, p)
    n = ech.n
    free = ech.nonpivots
    X = np.zeros((n, len(free)), dtype=np.int64)
    for c, j in enumerate(free):
        X[j, c] = 1
    E = ech.rows
    for k in range(ech.rank - 1, -1, -1):
        j = ech.pivots[k]
        # pivot normalized to 1: x_j = -(row restricted to later columns) . x
        row = E[k]
        acc = np.zeros(len(free), dtype=np.int64)
        for c, jf in enumerate(free):
            if jf > j and row[jf]:
                acc[c] = row[jf]
        for k2 in range(k + 1, ech.rank):
            j2 = ech.pivots[k2]
            if row[j2]:
                acc = (acc + int(row[j2]) * X[j2]) % p
        X[j] = (-acc) % p
    return X


# ---------------------------------------------------------------------------
# exact rank over the rationals
# ---------------------------------------------------------------------------


def rank_exact(m) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    mat = _as_matrix(m)
    rows = [[int(x) for x in row] for row in mat.data.tolist()]
    nrows, ncols = mat.rows, mat.cols
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((i for i in range(rank, nrows) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        top = rows[rank]
        lead = top[col]
        for i in range(rank + 1, nrows):
            ri = rows[i]
            f = ri[col]
            for j in range(col, ncols):
                ri[j] = (ri[j] * lead - f * top[j]) // prev
        prev = lead
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# certified rank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    method: str  # "modular-trials" | "fraction-free-exact"
    trials: int
    primes_used: tuple[int, ...]
    oracle_bound: int | None
    certified: bool


def certified_rank(m, oracle_bound: int | None = None, trials: int = 3,
                   seed: int = 0, prime_bits: int = 31,
                   exact_fallback: bool = False) -> RankCertificate:
    """Maximum modular rank over `trials` random primes.

    The result is marked certified when it meets a supplied oracle upper
    bound (rank is semicontinuous: each trial is a lower bound on the
    rational rank) or when the fraction-free exact rank is computed.  An
    observed rank above the oracle bound means the bound or the matrix is
    wrong and raises, never clamps.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    mat = _as_matrix(m)
    best = 0
    primes = []
    for t in range(trials):
        p = random_prime(prime_bits, derive_seed(seed, "certified-rank", t))
        primes.append(p)
        best = max(best, rank_mod_p(mat, p))
        if oracle_bound is not None and best == oracle_bound:
            break
    if oracle_bound is not None and best > oracle_bound:
        raise InconsistencyError(
            f"modular rank {best} exceeds oracle bound {oracle_bound}"
        )
    method = "modular-trials"
    certified = oracle_bound is not None and best == oracle_bound
    rank = best
    if not certified and exact_fallback:
        exact = rank_exact(mat)
        if exact < best:
            raise InconsistencyError(
                f"exact rank {exact} below modular rank {best}"
            )
        rank = exact
        method = "fraction-free-exact"
        certified = True
    return RankCertificate(rank, method, len(primes), tuple(primes),
                           oracle_bound, certified)

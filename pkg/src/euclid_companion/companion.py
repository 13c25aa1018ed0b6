"""Height-1 companion matrices for Euclid and Mandelbrot polynomials.

``E~_k`` is block lower bidiagonal: the diagonal blocks ``[0], E_1, ...,
E_{k-1}`` are chained by a ``-1`` just below the diagonal at each junction.
Adding ``+1`` in the top right corner turns it into ``E_k``.  All matrices
are stored as sparse 1-based triplets and checked to be upper Hessenberg
at construction.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact_poly import BigIntPoly, euclid_poly, eval_exact, mandelbrot_poly

__all__ = [
    "E2_SEEDS",
    "CompanionMatrix",
    "VariantConfig",
    "CharpolyCheck",
    "build_tilde",
    "build_companion",
    "build_mandelbrot_companion",
    "height",
    "det_charpoly_at",
    "check_charpoly",
    "verify_charpoly",
    "corner_sign",
    "export_matrix",
    "import_matrix",
    "EXPORT_FORMATS",
]

# the four 2x2 seeds with characteristic polynomial lambda**2 + lambda + 1
E2_SEEDS: tuple[tuple[tuple[int, int], tuple[int, int]], ...] = (
    ((0, 1), (-1, -1)),
    ((0, -1), (1, -1)),
    ((-1, -1), (1, 0)),
    ((-1, 1), (-1, 0)),
)

EXPORT_FORMATS = ("matrix-market", "csv-triplets", "dense-json")


class StructureError(ValueError):
    """Raised when assembled entries violate the Hessenberg/height contract."""


@dataclass(frozen=True)
class CompanionMatrix:
    """Sparse square integer matrix; ``entries`` maps 1-based (row, col) to value."""

    n: int
    entries: Mapping[tuple[int, int], int]
    family: str = "euclid"
    k: int = 0

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            v = int(v)
            if v == 0:
                continue
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise StructureError(f"entry ({i}, {j}) outside a {self.n}x{self.n} matrix")
            if j < i - 1:
                raise StructureError(f"entry ({i}, {j}) below the first subdiagonal")
            if abs(v) > 1:
                raise StructureError(f"entry ({i}, {j}) = {v} exceeds height 1")
            clean[(i, j)] = v
        for i in range(2, self.n + 1):
            if (i, i - 1) not in clean:
                raise StructureError(f"zero subdiagonal at ({i}, {i - 1}): reducible")
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.entries.get(ij, 0)

    def to_dense(self, dtype=float) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        for (i, j), v in self.entries.items():
            a[i - 1, j - 1] = v
        return a

    def triplets(self) -> list[tuple[int, int, int]]:
        return [(i, j, v) for (i, j), v in self.entries.items()]

    @cached_property
    def _columns(self) -> list[list[tuple[int, int]]]:
        cols: list[list[tuple[int, int]]] = [[] for _ in range(self.n + 1)]
        for (i, j), v in self.entries.items():
            cols[j].append((i, v))
        return cols

    def subdiagonal(self) -> list[int]:
        return [self.entries[(i, i - 1)] for i in range(2, self.n + 1)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompanionMatrix):
            return NotImplemented
        return self.n == other.n and dict(self.entries) == dict(other.entries)

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.entries.items())))


@dataclass(frozen=True)
class VariantConfig:
    """Which 2x2 seed to use for ``E_2`` and how to order the diagonal blocks.

    ``block_order`` permutes the top-level blocks ``[0], E_1, ..., E_{k-1}``
    (index 0 is the ``[0]`` block, index j is ``E_j``).  ``None`` keeps the
    natural order.  Nested blocks always use the natural order.
    """

    e2_choice: int = 0
    block_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.e2_choice not in range(len(E2_SEEDS)):
            raise ValueError(f"e2_choice must be one of 0..{len(E2_SEEDS) - 1}")
        if self.block_order is not None:
            order = tuple(int(i) for i in self.block_order)
            if sorted(order) != list(range(len(order))):
                raise ValueError(f"block_order {order} is not a permutation")
            object.__setattr__(self, "block_order", order)

    def order_for(self, k: int) -> tuple[int, ...]:
        if self.block_order is None:
            return tuple(range(k))
        if len(self.block_order) != k:
            raise ValueError(f"block_order has {len(self.block_order)} entries, "
                             f"E_{k} has {k} diagonal blocks")
        return self.block_order


DEFAULT = VariantConfig()


def _chain(blocks: Sequence[CompanionMatrix]) -> tuple[int, dict]:
    entries: dict[tuple[int, int], int] = {}
    off = 0
    for b in blocks:
        for (i, j), v in b.entries.items():
            entries[(i + off, j + off)] = v
        if off:
            entries[(off + 1, off)] = -1
        off += b.n
    return off, entries


def _corner_value(entries: Mapping[tuple[int, int], int], n: int) -> int:
    # the corner term of det(xI - A) is c * prod(-subdiagonal) for even n;
    # it has to contribute +1
    s = 1
    for i in range(2, n + 1):
        s *= -entries[(i, i - 1)]
    return s


def _zero_block() -> CompanionMatrix:
    return CompanionMatrix(1, {}, family="euclid_tilde", k=0)


@lru_cache(maxsize=None)
def _blocks(k: int, e2_choice: int) -> CompanionMatrix:
    # E_k in natural block order for the given seed
    return build_companion(k, VariantConfig(e2_choice))


def build_tilde(k: int, cfg: VariantConfig = DEFAULT) -> CompanionMatrix:
    """``E~_k``: blocks ``[0], E_1, ..., E_{k-1}``; ``det(xI - E~_k) = E_k(x) - 1``."""
    if k < 2:
        raise ValueError("E~_k is defined for k >= 2")
    pieces = [_zero_block()] + [_blocks(j, cfg.e2_choice) for j in range(1, k)]
    order = cfg.order_for(k)
    n, entries = _chain([pieces[i] for i in order])
    return CompanionMatrix(n, entries, family="euclid_tilde", k=k)


@lru_cache(maxsize=None)
def build_companion(k: int, cfg: VariantConfig = DEFAULT) -> CompanionMatrix:
    """Height-1 companion matrix ``E_k`` with ``det(xI - E_k) = E_k(x)``."""
    if not isinstance(cfg, VariantConfig):
        raise TypeError("cfg must be a VariantConfig")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return CompanionMatrix(1, {(1, 1): -1}, family="euclid", k=1)
    if k == 2 and cfg.block_order is None:
        seed = E2_SEEDS[cfg.e2_choice]
        entries = {(i + 1, j + 1): seed[i][j] for i in range(2) for j in range(2)}
        return CompanionMatrix(2, entries, family="euclid", k=2)
    tilde = build_tilde(k, cfg)
    entries = dict(tilde.entries)
    n = tilde.n
    entries[(1, n)] = entries.get((1, n), 0) + _corner_value(entries, n)
    return CompanionMatrix(n, entries, family="euclid", k=k)


@lru_cache(maxsize=None)
def build_mandelbrot_companion(n: int) -> CompanionMatrix:
    """Lawrence's recursive companion ``M_n`` of the Mandelbrot polynomial ``p_n``.

    ``M_{n+1} = [[M_n, 0, -c r], [-r, 0, 0], [0, -c, M_n]]`` with ``r`` the
    last unit row vector and ``c`` the first unit column vector.
    """
    if n < 2:
        raise ValueError("M_n is defined for n >= 2")
    if n == 2:
        return CompanionMatrix(1, {(1, 1): -1}, family="mandelbrot", k=2)
    m = build_mandelbrot_companion(n - 1)
    d = m.n
    entries: dict[tuple[int, int], int] = {}
    for (i, j), v in m.entries.items():
        entries[(i, j)] = v
        entries[(i + d + 1, j + d + 1)] = v
    entries[(d + 1, d)] = -1           # -r_n
    entries[(d + 2, d + 1)] = -1       # -c_n
    entries[(1, 2 * d + 1)] = -1       # -c_n r_n
    return CompanionMatrix(2 * d + 1, entries, family="mandelbrot", k=n)


def height(m) -> int:
    """Largest absolute entry (0 for the zero matrix)."""
    if isinstance(m, CompanionMatrix):
        return max((abs(v) for v in m.entries.values()), default=0)
    a = np.asarray(m)
    return int(np.abs(a).max()) if a.size else 0


def det_charpoly_at(m: CompanionMatrix, x: int) -> int:
    """Exact ``det(xI - m)`` by the upper Hessenberg minor recurrence.

    With ``H = xI - m`` and ``D_i`` the leading principal minors,
    ``D_i = sum_{j<=i} (-1)**(i-j) H[j,i] prod(H[l+1,l], l=j..i-1) D_{j-1}``.
    Only nonzero entries of column ``i`` are visited.
    """
    n = m.n
    sub = [0] * (n + 1)  # sub[l] = H[l+1, l]
    for l in range(1, n):
        sub[l] = -m.entries.get((l + 1, l), 0)
    unit = all(s in (1, -1) for s in sub[1:n])
    # prefix[i] = prod_{l < i} sub[l]
    prefix = [1] * (n + 1)
    for l in range(1, n):
        prefix[l + 1] = prefix[l] * sub[l]
    cols = m._columns
    d = [1] * (n + 1)
    for i in range(1, n + 1):
        acc = 0
        diag_seen = False
        for j, v in cols[i]:
            if j > i:
                continue
            h = -v
            if j == i:
                h += x
                diag_seen = True
                term = h * d[i - 1]
            else:
                if unit:
                    prod = prefix[i] * prefix[j]
                else:
                    prod = 1
                    for l in range(j, i):
                        prod *= sub[l]
                term = h * prod * d[j - 1]
                if (i - j) & 1:
                    term = -term
            acc += term
        if not diag_seen:
            acc += x * d[i - 1]
        d[i] = acc
    return d[n]


@dataclass(frozen=True)
class CharpolyCheck:
    ok: bool
    points: int
    failed_at: int | None = None
    expected: int | None = None
    got: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_charpoly(m: CompanionMatrix, p: BigIntPoly,
                   points: Iterable[int] | None = None) -> CharpolyCheck:
    """Compare ``det(xI - m)`` with ``p(x)`` at ``deg + 1`` integers (a proof)."""
    if points is None:
        points = range(m.n + 1)
    pts = list(points)
    for x in pts:
        want = eval_exact(p, x)
        got = det_charpoly_at(m, x)
        if got != want:
            return CharpolyCheck(False, len(pts), x, int(want), got)
    return CharpolyCheck(True, len(pts))


def verify_charpoly(k: int, cfg: VariantConfig = DEFAULT,
                    max_dim: int = 512) -> CharpolyCheck:
    """Prove ``det(xI - E_k) = E_k(x)`` by evaluation at ``x = 0..2**(k-1)``."""
    n = 2 ** (k - 1)
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds the exact-check budget {max_dim}")
    return check_charpoly(build_companion(k, cfg), euclid_poly(k))


def corner_sign(k: int, cfg: VariantConfig = DEFAULT) -> int:
    if k < 2:
        raise ValueError("corner_sign needs k >= 2")
    m = build_companion(k, cfg)
    return m[(1, m.n)]


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def export_matrix(m: CompanionMatrix, fmt: str = "matrix-market") -> bytes:
    if fmt == "matrix-market":
        lines = ["%%MatrixMarket matrix coordinate integer general",
                 f"% family={m.family} k={m.k}",
                 f"{m.n} {m.n} {m.nnz}"]
        lines += [f"{i} {j} {v}" for i, j, v in m.triplets()]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "csv-triplets":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        w.writerows(m.triplets())
        return buf.getvalue().encode()
    if fmt == "dense-json":
        return json.dumps({"n": m.n, "family": m.family, "k": m.k,
                           "rows": m.to_dense(int).tolist()}).encode()
    raise ValueError(f"unknown format {fmt!r}; expected one of {EXPORT_FORMATS}")


def import_matrix(data: bytes, fmt: str = "matrix-market") -> CompanionMatrix:
    text = data.decode()
    if fmt == "matrix-market":
        family, k = "euclid", 0
        lines = text.splitlines()
        if not lines[0].startswith("%%MatrixMarket matrix coordinate"):
            raise ValueError("not a Matrix Market coordinate file")
        body = []
        for ln in lines[1:]:
            if ln.startswith("%"):
                for tok in ln[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "family":
                        family = val
                    elif key == "k":
                        k = int(val)
            elif ln.strip():
                body.append(ln.split())
        n, _, nnz = (int(t) for t in body[0])
        entries = {(int(i), int(j)): int(v) for i, j, v in body[1:1 + nnz]}
        return CompanionMatrix(n, entries, family=family, k=k)
    if fmt == "csv-triplets":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] == ["row", "col", "value"]:
            rows = rows[1:]
        entries = {(int(i), int(j)): int(v) for i, j, v in rows}
        n = max(max(i, j) for i, j in entries)
        return CompanionMatrix(n, entries)
    if fmt == "dense-json":
        d = json.loads(text)
        a = d["rows"]
        entries = {(i + 1, j + 1): v for i, row in enumerate(a)
                   for j, v in enumerate(row) if v}
        return CompanionMatrix(d["n"], entries, family=d.get("family", "euclid"),
                               k=d.get("k", 0))
    raise ValueError(f"unknown format {fmt!r}; expected one of {EXPORT_FORMATS}")

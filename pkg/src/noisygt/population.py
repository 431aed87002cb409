"""Ground truth, pooled test designs and ideal test evaluation.

Bit vectors (infection vectors, ideal and observed results) are plain
``numpy.uint8`` arrays. A design stores its pools in CSR form: the members
of test ``a`` are ``members[pool_ptr[a]:pool_ptr[a + 1]]``. The transposed
adjacency lists each individual's tests in increasing test index, which is
the design's construction order.
"""

from __future__ import annotations

import io
from collections.abc import Iterable, Sequence
from enum import IntEnum

import numpy as np

from .errors import DomainError, IndexOutOfRange, InvalidParams, LengthMismatch, MalformedInput


class Role(IntEnum):
    F1 = 0
    F2_GROUP = 1
    F2_EXTRA = 2
    PRESTO_STAGE1 = 3
    PRESTO_STAGE2 = 4
    SPOG_SUB = 5


ROLE_TAGS = {
    Role.F1: "F1",
    Role.F2_GROUP: "F2grp",
    Role.F2_EXTRA: "F2idv",
    Role.PRESTO_STAGE1: "stage1",
    Role.PRESTO_STAGE2: "stage2",
    Role.SPOG_SUB: "spog-sub",
}
_TAG_ROLES = {tag: role for role, tag in ROLE_TAGS.items()}


class TestDesign:
    """Immutable bipartite graph between ``n`` individuals and an ordered list of pools."""

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, n: int, pool_ptr, members, roles, *, check: bool = True):
        self.n = int(n)
        self.pool_ptr = np.ascontiguousarray(pool_ptr, dtype=np.int64)
        self.members = np.ascontiguousarray(members, dtype=np.int64)
        self.roles = np.ascontiguousarray(roles, dtype=np.int8)
        if check:
            self._validate()
        pool_of = np.repeat(np.arange(self.m, dtype=np.int64), np.diff(self.pool_ptr))
        order = np.argsort(self.members, kind="stable")
        self.ind_tests = np.ascontiguousarray(pool_of[order])
        self.ind_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.members, minlength=self.n), out=self.ind_ptr[1:])
        for arr in (self.pool_ptr, self.members, self.roles, self.ind_tests, self.ind_ptr):
            arr.flags.writeable = False

    def _validate(self) -> None:
        if self.n < 0:
            raise InvalidParams(f"population size must be nonnegative, got {self.n}")
        ptr = self.pool_ptr
        if ptr.ndim != 1 or ptr.size < 1 or ptr[0] != 0 or ptr[-1] != self.members.size:
            raise MalformedInput("pool_ptr must start at 0 and end at len(members)")
        if self.roles.size != ptr.size - 1:
            raise LengthMismatch("one role per pool required")
        sizes = np.diff(ptr)
        if np.any(sizes <= 0):
            raise MalformedInput("every pool must be nonempty")
        if self.members.size and (self.members.min() < 0 or self.members.max() >= self.n):
            raise IndexOutOfRange(f"pool member outside [0, {self.n})")
        pool_of = np.repeat(np.arange(sizes.size), sizes)
        key = np.lexsort((self.members, pool_of))
        dup = (np.diff(pool_of[key]) == 0) & (np.diff(self.members[key]) == 0)
        if np.any(dup):
            raise MalformedInput("a pool lists the same individual twice")

    @property
    def m(self) -> int:
        return self.pool_ptr.size - 1

    @property
    def pool_sizes(self) -> np.ndarray:
        return np.diff(self.pool_ptr)

    def pool(self, a: int) -> np.ndarray:
        if not 0 <= a < self.m:
            raise IndexOutOfRange(f"test index {a} outside [0, {self.m})")
        return self.members[self.pool_ptr[a]:self.pool_ptr[a + 1]]

    def tests_of(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"individual {i} outside [0, {self.n})")
        return self.ind_tests[self.ind_ptr[i]:self.ind_ptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.ind_ptr)

    def __len__(self) -> int:
        return self.m

    def __repr__(self) -> str:
        return f"TestDesign(n={self.n}, m={self.m})"

    # constructors

    @classmethod
    def from_pools(cls, n: int, pools: Iterable[Iterable[int]], roles: Role | Sequence[int] = Role.F2_GROUP) -> "TestDesign":
        pools = [np.asarray(list(p), dtype=np.int64) for p in pools]
        ptr = np.zeros(len(pools) + 1, dtype=np.int64)
        np.cumsum([p.size for p in pools], out=ptr[1:])
        members = np.concatenate(pools) if pools else np.zeros(0, dtype=np.int64)
        if isinstance(roles, (int, Role)):
            roles = np.full(len(pools), int(roles))
        return cls(n, ptr, members, roles)

    @classmethod
    def empty(cls, n: int) -> "TestDesign":
        return cls(n, np.zeros(1), np.zeros(0), np.zeros(0))

    @classmethod
    def individual(cls, n: int, individuals, repeats, role: Role) -> "TestDesign":
        """Individual tests: ``repeats`` (scalar or per-individual) copies for each listed individual,
        grouped by individual in the given order."""
        individuals = np.asarray(individuals, dtype=np.int64)
        members = np.repeat(individuals, repeats)
        return cls(n, np.arange(members.size + 1), members, np.full(members.size, int(role)), check=False)

    @classmethod
    def uniform_pools(cls, n: int, count: int, size: int, rng: np.random.Generator, role: Role = Role.F2_GROUP) -> "TestDesign":
        """``count`` independent pools, each a uniformly random ``size``-subset of [n]."""
        if not 1 <= size <= n:
            raise InvalidParams(f"pool size {size} impossible for n={n}")
        return cls(n, np.arange(0, count * size + 1, size), sample_subsets(n, count, size, rng),
                   np.full(count, int(role)), check=False)

    @classmethod
    def concat(cls, parts: Sequence["TestDesign"]) -> "TestDesign":
        n = parts[0].n
        if any(p.n != n for p in parts):
            raise LengthMismatch("designs over different populations")
        members = np.concatenate([p.members for p in parts])
        ptr = [np.zeros(1, dtype=np.int64)]
        offset = 0
        for p in parts:
            ptr.append(p.pool_ptr[1:] + offset)
            offset += p.members.size
        return cls(n, np.concatenate(ptr), members, np.concatenate([p.roles for p in parts]), check=False)

    def relabel(self, mapping, n: int, role: Role | None = None) -> "TestDesign":
        """Same pools with individual ``j`` renamed ``mapping[j]`` in a population of size ``n``."""
        mapping = np.asarray(mapping, dtype=np.int64)
        roles = self.roles if role is None else np.full(self.m, int(role))
        return TestDesign(n, self.pool_ptr, mapping[self.members], roles, check=False)

    # text format

    def dump(self) -> str:
        out = io.StringIO()
        out.write(f"# n={self.n}\n")
        for a in range(self.m):
            tag = ROLE_TAGS[Role(int(self.roles[a]))]
            out.write(tag + " " + " ".join(map(str, self.pool(a).tolist())) + "\n")
        return out.getvalue()

    @classmethod
    def load(cls, text: str) -> "TestDesign":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# n="):
            raise MalformedInput("design dump must start with '# n=<size>'")
        n = int(lines[0][4:])
        pools, roles = [], []
        for ln in lines[1:]:
            tag, *rest = ln.split()
            if tag not in _TAG_ROLES:
                raise MalformedInput(f"unknown role tag {tag!r}")
            roles.append(int(_TAG_ROLES[tag]))
            pools.append([int(x) for x in rest])
        return cls.from_pools(n, pools, roles)


def sample_subsets(n: int, count: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Flattened ``count`` x ``size`` array of independent uniform ``size``-subsets of [n].

    Rows are drawn with replacement and redrawn until duplicate-free, which is
    exact rejection sampling of a uniform subset (the order within a row is
    then uniform, and is kept as drawn).
    """
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if size > n // 2 and size > 1:
        # dense pools: rejection would be slow, permute instead
        rows = np.stack([rng.permutation(n)[:size] for _ in range(count)])
        return rows.reshape(-1).astype(np.int64)
    rows = rng.integers(0, n, size=(count, size), dtype=np.int64)
    bad = _rows_with_duplicates(rows)
    while bad.size:
        rows[bad] = rng.integers(0, n, size=(bad.size, size), dtype=np.int64)
        bad = bad[_rows_with_duplicates(rows[bad])]
    return rows.reshape(-1)


def _rows_with_duplicates(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] < 2:
        return np.zeros(0, dtype=np.int64)
    s = np.sort(rows, axis=1)
    return np.flatnonzero(np.any(s[:, 1:] == s[:, :-1], axis=1))


def sample_ground_truth(n: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Each individual infected independently with probability ``alpha``."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return (rng.random(n) < alpha).astype(np.uint8)


def true_results(design: TestDesign, sigma: np.ndarray) -> np.ndarray:
    """Noise-free outcome: a pool is positive iff it holds an infected individual."""
    sigma = np.asarray(sigma, dtype=np.uint8)
    if sigma.shape != (design.n,):
        raise LengthMismatch(f"sigma has shape {sigma.shape}, design has n={design.n}")
    if design.m == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.maximum.reduceat(sigma[design.members], design.pool_ptr[:-1]).astype(np.uint8)


def good_test_counts(design: TestDesign, sigma: np.ndarray, observed: np.ndarray, i: int) -> tuple[int, int, int]:
    """``(g, g_plus, g_minus)``: tests of ``i`` with no other infected member, split by observed result."""
    if not 0 <= i < design.n:
        raise IndexOutOfRange(f"individual {i} outside [0, {design.n})")
    sigma = np.asarray(sigma)
    observed = np.asarray(observed)
    if sigma.shape != (design.n,) or observed.shape != (design.m,):
        raise LengthMismatch("sigma or observed does not match the design")
    g = g_plus = 0
    for a in design.tests_of(i):
        others = design.pool(a)
        if np.any(sigma[others[others != i]]):
            continue
        g += 1
        g_plus += int(observed[a])
    return g, g_plus, g - g_plus

"""Set partitions, subsets and covers of ``{0, ..., n-1}``.

Partitions are produced in lexicographic order of their restricted growth
strings, so ``partitions_of(3)`` starts with the single block and ends with
the all-singletons partition. Everything here is a lazy generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

MAX_PARTITION_N = 20
MAX_COVER_N = 5


class CapacityError(ValueError):
    """Raised when a request exceeds a supported enumeration size."""


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]
    ground_size: int

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def validate(self) -> None:
        """Raise ``ValueError`` unless the partition is canonical and exact."""
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            if any(a >= b for a, b in zip(block, block[1:])):
                raise ValueError(f"block {block} not strictly increasing")
            if seen.intersection(block):
                raise ValueError("blocks overlap")
            seen.update(block)
        if seen != set(range(self.ground_size)):
            raise ValueError("blocks do not cover the ground set")
        firsts = [b[0] for b in self.blocks]
        if firsts != sorted(firsts):
            raise ValueError("blocks not ordered by smallest element")

    def to_lists(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]


@dataclass(frozen=True)
class Cover:
    blocks: tuple[tuple[int, ...], ...]
    ground_size: int

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def validate(self) -> None:
        if any(len(b) == 0 for b in self.blocks):
            raise ValueError("empty block")
        if len(set(self.blocks)) != len(self.blocks):
            raise ValueError("repeated block")
        if list(self.blocks) != sorted(self.blocks):
            raise ValueError("blocks not in canonical order")
        union = set().union(*self.blocks) if self.blocks else set()
        if union != set(range(self.ground_size)):
            raise ValueError("blocks do not cover the ground set")

    def is_partition(self) -> bool:
        return sum(len(b) for b in self.blocks) == self.ground_size


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """Yield restricted growth strings of length ``n`` in lexicographic order.

    A string ``a`` is restricted growth when ``a[0] == 0`` and
    ``a[i] <= 1 + max(a[:i])``; label ``a[i]`` is the block of element ``i``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        yield ()
        return
    a = [0] * n
    # m[i] = max(a[:i+1])
    m = [0] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] > m[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


def rgs_to_partition(rgs: tuple[int, ...]) -> Partition:
    blocks: list[list[int]] = []
    for elem, label in enumerate(rgs):
        if label == len(blocks):
            blocks.append([])
        blocks[label].append(elem)
    return Partition(tuple(tuple(b) for b in blocks), len(rgs))


def partitions_of(n: int) -> Iterator[Partition]:
    """Yield every partition of ``{0, ..., n-1}`` exactly once.

    ``n = 0`` yields one empty partition. Practical limit is ``n <= 20``
    (``bell(20)`` is about 5e13).
    """
    if n > MAX_PARTITION_N:
        raise CapacityError(f"partitions_of supports n <= {MAX_PARTITION_N}")
    for rgs in restricted_growth_strings(n):
        yield rgs_to_partition(rgs)


def bell(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def subsets_of(n: int) -> Iterator[tuple[int, ...]]:
    """Yield all subsets of ``{0, ..., n-1}`` by size, then lexicographically."""
    if n < 0:
        raise ValueError("n must be non-negative")
    for k in range(n + 1):
        yield from combinations(range(n), k)


def subset_mask(subset) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


def mask_to_subset(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def nonempty_subsets(n: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of ``{0, ..., n-1}`` in lexicographic tuple order."""
    return sorted(s for s in subsets_of(n) if s)


def covers_of(n: int) -> Iterator[Cover]:
    """Yield every cover of ``{0, ..., n-1}`` by distinct nonempty subsets.

    The candidate blocks are the ``2**n - 1`` nonempty subsets; a cover is a
    selection of them whose union is the ground set. Selections are visited
    in increasing bitmask order over the sorted candidate list, and blocks
    within a cover are sorted lexicographically. Only ``1 <= n <= 5`` is
    supported: there are 32297 covers at ``n = 4`` and about 2.3e8 at 5.
    """
    if not 1 <= n <= MAX_COVER_N:
        raise CapacityError(f"covers_of supports 1 <= n <= {MAX_COVER_N}, got {n}")
    cands = nonempty_subsets(n)
    cand_masks = [subset_mask(s) for s in cands]
    full = (1 << n) - 1
    for sel in range(1, 1 << len(cands)):
        union = 0
        blocks = []
        j = 0
        s = sel
        while s:
            if s & 1:
                union |= cand_masks[j]
                blocks.append(cands[j])
            s >>= 1
            j += 1
        if union == full:
            yield Cover(tuple(blocks), n)

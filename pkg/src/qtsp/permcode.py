"""Insertion codes and the permutations they encode.

An insertion code ``(a_1, ..., a_n)`` with ``1 <= a_i <= i`` builds a
permutation of ``1..n`` by starting from ``[1]`` and inserting element ``i``
at (1-based) position ``a_i`` of the current arrangement, for ``i = 2..n``.
Position 1 is the front, position ``i`` the back.

Codes are ranked in mixed radix, ``rank = sum (a_i - 1) * (i - 1)!``, so
``a_1`` is the least significant digit and ``a_n`` the most significant.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence

import numpy as np

from .errors import InvalidCodeError, InvalidPermutationError, OutOfRangeError, SizeLimitError

#: Largest n for which full enumeration is allowed (10! = 3,628,800 codes).
ENUMERATION_LIMIT = 10

Code = tuple[int, ...]
Perm = tuple[int, ...]


def check_code(code: Sequence[int]) -> Code:
    code = tuple(int(a) for a in code)
    if not code:
        raise InvalidCodeError("insertion code must have at least one entry")
    for i, a in enumerate(code, start=1):
        if not 1 <= a <= i:
            raise InvalidCodeError(f"entry a_{i}={a} outside [1, {i}]")
    return code


def check_perm(perm: Sequence[int]) -> Perm:
    perm = tuple(int(p) for p in perm)
    n = len(perm)
    if n == 0:
        raise InvalidPermutationError("permutation must be non-empty")
    if sorted(perm) != list(range(1, n + 1)):
        raise InvalidPermutationError(f"{perm} is not a permutation of 1..{n}")
    return perm


def check_limit(n: int, limit: int | None = None) -> None:
    limit = ENUMERATION_LIMIT if limit is None else limit
    if n < 1:
        raise OutOfRangeError(f"size must be >= 1, got {n}")
    if n > limit:
        raise SizeLimitError(f"n={n} exceeds enumeration limit {limit}")


def decode(code: Sequence[int]) -> Perm:
    code = check_code(code)
    perm: list[int] = []
    for i, a in enumerate(code, start=1):
        perm.insert(a - 1, i)
    return tuple(perm)


def encode(perm: Sequence[int]) -> Code:
    """Inverse of :func:`decode`: peel off ``n, n-1, ..., 2`` recording positions."""
    work = list(check_perm(perm))
    n = len(work)
    code = [1] * n
    for v in range(n, 1, -1):
        pos = work.index(v)
        code[v - 1] = pos + 1
        del work[pos]
    return tuple(code)


def rank(code: Sequence[int]) -> int:
    code = check_code(code)
    r = 0
    weight = 1
    for i, a in enumerate(code, start=1):
        r += (a - 1) * weight
        weight *= i
    return r


def unrank(r: int, n: int) -> Code:
    if n < 1:
        raise OutOfRangeError(f"size must be >= 1, got {n}")
    total = math.factorial(n)
    if not 0 <= r < total:
        raise OutOfRangeError(f"rank {r} outside [0, {n}!)")
    code = []
    for i in range(1, n + 1):
        r, digit = divmod(r, i)
        code.append(digit + 1)
    return tuple(code)


def enumerate_codes(n: int, limit: int | None = None) -> Iterator[Code]:
    """Yield all ``n!`` codes in ascending rank order."""
    check_limit(n, limit)
    code = [1] * n
    yield tuple(code)
    while True:
        # odometer increment, least significant digit (a_1) first
        i = 0
        while i < n and code[i] == i + 1:
            code[i] = 1
            i += 1
        if i == n:
            return
        code[i] += 1
        yield tuple(code)


def code_table(n: int, limit: int | None = None) -> np.ndarray:
    """All codes as an ``(n!, n)`` array, row ``r`` holding ``unrank(r, n)``."""
    check_limit(n, limit)
    total = math.factorial(n)
    r = np.arange(total, dtype=np.int64)
    out = np.empty((total, n), dtype=np.int8)
    for i in range(1, n + 1):
        r, digit = np.divmod(r, i)
        out[:, i - 1] = digit + 1
    return out


def extend_perm_table(perms: np.ndarray) -> np.ndarray:
    """Insert element ``t+1`` at every position of each row of a depth-``t`` table.

    Rows of the result follow rank order at depth ``t+1``: the child with
    ``a_{t+1} = j`` of parent rank ``r`` lands at row ``r + (j-1) * t!``.
    Values are 1-based element labels.
    """
    m, t = perms.shape
    out = np.empty(((t + 1) * m, t + 1), dtype=perms.dtype)
    for j in range(t + 1):
        block = out[j * m:(j + 1) * m]
        block[:, :j] = perms[:, :j]
        block[:, j] = t + 1
        block[:, j + 1:] = perms[:, j:]
    return out


def perm_table(n: int, limit: int | None = None) -> np.ndarray:
    """Decoded permutations for every rank, as an ``(n!, n)`` array of 1-based labels."""
    check_limit(n, limit)
    perms = np.ones((1, 1), dtype=np.int8)
    for _ in range(1, n):
        perms = extend_perm_table(perms)
    return perms


def format_seq(seq: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in seq)


def parse_seq(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError as exc:
        raise InvalidCodeError(f"cannot parse integer list {text!r}") from exc

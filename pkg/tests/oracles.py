"""Independent oracles the library is checked against.

These deliberately avoid the library's own algorithms: repair is checked
by exhaustive subsequence search with the standard library's UTF-8
decoder as the validity judge, alignment by a plain iterative edit
distance, and encoding by literally applying merge rules one by one in
rank order.
"""

import itertools


def brute_force_max_kept(data: bytes) -> int:
    """Most bytes any valid-UTF-8 subsequence of ``data`` keeps."""
    n = len(data)
    for k in range(n, 0, -1):
        for keep in itertools.combinations(range(n), k):
            try:
                bytes(data[i] for i in keep).decode("utf-8")
                return k
            except UnicodeDecodeError:
                pass
    return 0


def brute_force_repair(data: bytes):
    """(kept_bytes, dropped) with the lexicographically smallest dropped
    index list among maximal solutions. Exponential; keep inputs short."""
    n = len(data)
    for k in range(n, 0, -1):
        best_dropped = None
        for keep in itertools.combinations(range(n), k):
            try:
                bytes(data[i] for i in keep).decode("utf-8")
            except UnicodeDecodeError:
                continue
            keep_set = set(keep)
            dropped = tuple(i for i in range(n) if i not in keep_set)
            if best_dropped is None or dropped < best_dropped:
                best_dropped = dropped
        if best_dropped is not None:
            return k, best_dropped
    return 0, tuple(range(n))


def levenshtein(a, b) -> int:
    """Iterative unit-cost edit distance."""
    a = list(a)
    b = list(b)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def rank_order_encode(symbols, merges):
    """Apply every merge rule once, in rank order, greedily left to right.

    ``symbols`` is the base symbol list of one segment; ``merges`` an
    iterable of (left_bytes, right_bytes) in rank order.
    """
    symbols = list(symbols)
    for left, right in merges:
        merged = left + right
        out = []
        i = 0
        while i < len(symbols):
            if (
                i < len(symbols) - 1
                and symbols[i] == left
                and symbols[i + 1] == right
            ):
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
    return symbols

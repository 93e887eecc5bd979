"""Edit-distance and similarity-ratio primitives for entity disambiguation.

All ratios live on an integer 0-100 scale and are derived from a Levenshtein
distance with unit insertion/deletion cost and substitution cost 2, which is
the normalization the downstream merge thresholds were tuned against.
"""

from __future__ import annotations

__all__ = [
    "levenshtein_distance",
    "similarity_ratio",
    "partial_ratio",
    "ratio_length_bound",
]


def levenshtein_distance(a: str, b: str, substitution_cost: int = 1) -> int:
    """Minimal edit cost between ``a`` and ``b``.

    Insertions and deletions cost 1; substitutions cost ``substitution_cost``
    (1 or 2). Symmetric, zero iff the strings are equal.
    """
    if substitution_cost not in (1, 2):
        raise ValueError(f"substitution_cost must be 1 or 2, got {substitution_cost}")
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    # Two-row dynamic programming; iterate over the shorter string's columns.
    if len(b) > len(a):
        a, b = b, a
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else substitution_cost
            current[j] = min(
                previous[j] + 1,       # delete from a
                current[j - 1] + 1,    # insert into a
                previous[j - 1] + cost,
            )
        previous, current = current, previous
    return previous[len(b)]


def similarity_ratio(a: str, b: str) -> int:
    """Normalized similarity of two strings on a 0-100 scale.

    With ``S = len(a) + len(b)`` and ``D`` the substitution-cost-2 Levenshtein
    distance, the ratio is ``round(100 * (S - D) / S)``; two empty strings
    score 100. Comparison is case-sensitive. 100 iff the strings are equal.
    """
    total = len(a) + len(b)
    if total == 0:
        return 100
    distance = levenshtein_distance(a, b, substitution_cost=2)
    return round(100 * (total - distance) / total)


def partial_ratio(a: str, b: str) -> int:
    """Best ``similarity_ratio`` of the shorter string against every
    same-length contiguous substring of the longer one.

    Equal-length inputs are compared directly; an empty shorter string
    scores 100. This is the exhaustive sliding window, not an alignment
    shortcut, so a shorter string contained verbatim in the longer always
    scores 100.
    """
    if len(a) == len(b):
        return similarity_ratio(a, b)
    shorter, longer = (a, b) if len(a) < len(b) else (b, a)
    if not shorter:
        return 100
    window = len(shorter)
    best = 0
    for start in range(len(longer) - window + 1):
        score = similarity_ratio(shorter, longer[start : start + window])
        if score > best:
            best = score
            if best == 100:
                break
    return best


def ratio_length_bound(len_a: int, len_b: int) -> int:
    """Upper bound on ``similarity_ratio`` knowable from lengths alone.

    Any edit sequence needs at least ``abs(len_a - len_b)`` insertions or
    deletions, so a pair whose bound is <= a strict threshold can be skipped
    without changing which pairs pass the threshold.
    """
    total = len_a + len_b
    if total == 0:
        return 100
    min_distance = abs(len_a - len_b)
    return round(100 * (total - min_distance) / total)

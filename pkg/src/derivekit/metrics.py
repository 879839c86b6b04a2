"""String similarity measures used to compare equation states.

Five measures are provided: Levenshtein, Damerau-Levenshtein (unrestricted by
default, with an optimal-string-alignment variant behind a flag), Hamming,
Jaro, and Jaro-Winkler.  The edit distances return non-negative integers; the
Jaro family functions return similarities in [0, 1] and are converted to
distances as ``1 - sim`` by :class:`Measure`.

Hamming distance is made total on unequal-length strings by comparing over
the common length and adding the length difference, which is equivalent to
padding the shorter string with a sentinel character.
"""

from __future__ import annotations

from dataclasses import dataclass


def _trim_affixes(a: str, b: str) -> tuple[str, str]:
    """Strip the common prefix and suffix; exact for unit-cost edit distances
    since optimal scripts never edit within a shared affix."""
    la, lb = len(a), len(b)
    n = la if la < lb else lb
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    j = 0
    limit = n - i
    while j < limit and a[la - 1 - j] == b[lb - 1 - j]:
        j += 1
    return a[i : la - j], b[i : lb - j]


def levenshtein(a: str, b: str) -> int:
    """Minimum single-character insertions, deletions, substitutions.

    Uses the bit-parallel column automaton (Myers/Hyyrö) over the shorter
    string, after stripping shared affixes; exact for arbitrary lengths
    since Python integers are unbounded bit vectors.
    """
    if a == b:
        return 0
    a, b = _trim_affixes(a, b)
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if la > lb:
        a, b, la, lb = b, a, lb, la
    peq: dict[str, int] = {}
    bit = 1
    for ch in a:
        peq[ch] = peq.get(ch, 0) | bit
        bit <<= 1
    mask = bit - 1
    last = 1 << (la - 1)
    pv = mask
    mv = 0
    score = la
    get = peq.get
    for ch in b:
        eq = get(ch, 0)
        x = eq | mv
        d0 = ((((eq & pv) + pv) ^ pv) | x) & mask
        hp = mv | (~(d0 | pv) & mask)
        hn = pv & d0
        if hp & last:
            score += 1
        elif hn & last:
            score -= 1
        hp = ((hp << 1) | 1) & mask
        hn = (hn << 1) & mask
        pv = hn | (~(d0 | hp) & mask)
        mv = hp & d0
    return score


def damerau_levenshtein(a: str, b: str) -> int:
    """Unrestricted Damerau-Levenshtein: edits plus adjacent transpositions.

    Implements the last-occurrence dynamic programme over a matrix with a
    sentinel row and column; transposed blocks may be edited again later,
    unlike the optimal-string-alignment variant (:func:`osa`).
    """
    if a == b:
        return 0
    a, b = _trim_affixes(a, b)
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    maxdist = la + lb
    last_row: dict[str, int] = {}
    # d has one sentinel row/col at index 0 holding maxdist, then the usual
    # (la+1) x (lb+1) table shifted by one.
    width = lb + 2
    d = [[maxdist] * width for _ in range(la + 2)]
    for i in range(la + 1):
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[1][j + 1] = j
    for i in range(1, la + 1):
        ca = a[i - 1]
        last_col = 0
        row = d[i + 1]
        prev_row = d[i]
        for j in range(1, lb + 1):
            cb = b[j - 1]
            k = last_row.get(cb, 0)
            l = last_col
            if ca == cb:
                cost = 0
                last_col = j
            else:
                cost = 1
            row[j + 1] = min(
                prev_row[j] + cost,
                row[j] + 1,
                prev_row[j + 1] + 1,
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),
            )
        last_row[ca] = i
    return d[la + 1][lb + 1]


def osa(a: str, b: str) -> int:
    """Optimal string alignment: like Damerau-Levenshtein, but a substring
    may be edited at most once, so ``osa("ca", "abc") == 3`` while the
    unrestricted distance is 2."""
    a, b = _trim_affixes(a, b)
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    d = [list(range(lb + 1))] + [[i] + [0] * lb for i in range(1, la + 1)]
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, d[i - 2][j - 2] + 1)
            d[i][j] = best
    return d[la][lb]


def hamming(a: str, b: str) -> int:
    """Positional substitutions over the common length plus the length gap."""
    la, lb = len(a), len(b)
    n = min(la, lb)
    diff = sum(1 for i in range(n) if a[i] != b[i])
    return diff + abs(la - lb)


def _jaro_match(a: str, b: str) -> tuple[int, int]:
    """Matching characters and half-transposition count for Jaro."""
    la, lb = len(a), len(b)
    window = max(la, lb) // 2 - 1
    if window < 0:
        window = 0
    a_flags = [False] * la
    b_flags = [False] * lb
    m = 0
    for i in range(la):
        lo = i - window if i - window > 0 else 0
        hi = i + window + 1
        if hi > lb:
            hi = lb
        ca = a[i]
        for j in range(lo, hi):
            if not b_flags[j] and b[j] == ca:
                a_flags[i] = True
                b_flags[j] = True
                m += 1
                break
    if m == 0:
        return 0, 0
    matched_b = [b[j] for j in range(lb) if b_flags[j]]
    k = 0
    mismatches = 0
    for i in range(la):
        if a_flags[i]:
            if a[i] != matched_b[k]:
                mismatches += 1
            k += 1
    return m, mismatches // 2


def jaro(a: str, b: str) -> float:
    """Jaro similarity in [0, 1]; zero when there are no matching characters."""
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    m, t = _jaro_match(a, b)
    if m == 0:
        return 0.0
    return (m / la + m / lb + (m - t) / m) / 3.0


def common_prefix_len(a: str, b: str, cap: int) -> int:
    n = min(len(a), len(b), cap)
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def jaro_winkler(a: str, b: str, p: float = 0.1, prefix_cap: int = 4) -> float:
    """Jaro similarity boosted by a common-prefix bonus of length at most
    ``prefix_cap``: ``sim_j + l * p * (1 - sim_j)``.  Requires 0 <= p <= 0.25
    so the result stays within [0, 1]."""
    if not 0.0 <= p <= 0.25:
        raise ValueError(f"jaro-winkler scaling p={p} outside [0, 0.25]")
    sim = jaro(a, b)
    l = common_prefix_len(a, b, prefix_cap)
    return sim + l * p * (1.0 - sim)


LEVENSHTEIN = "levenshtein"
DAMERAU_LEVENSHTEIN = "damerau_levenshtein"
HAMMING = "hamming"
JARO = "jaro"
JARO_WINKLER = "jaro_winkler"

MEASURE_KINDS = (LEVENSHTEIN, DAMERAU_LEVENSHTEIN, HAMMING, JARO, JARO_WINKLER)

# Accepted spellings for CLI flags and config files.
MEASURE_ALIASES = {
    "levenshtein": LEVENSHTEIN,
    "damerau": DAMERAU_LEVENSHTEIN,
    "damerau-levenshtein": DAMERAU_LEVENSHTEIN,
    "damerau_levenshtein": DAMERAU_LEVENSHTEIN,
    "hamming": HAMMING,
    "jaro": JARO,
    "jaro-winkler": JARO_WINKLER,
    "jaro_winkler": JARO_WINKLER,
}


@dataclass(frozen=True)
class Measure:
    """A configured string distance ``M`` with ``M(s, s) = 0`` and ``M >= 0``.

    The Jaro-based kinds return ``1 - similarity``.
    """

    kind: str = DAMERAU_LEVENSHTEIN
    jw_p: float = 0.1
    jw_prefix_cap: int = 4
    damerau_osa: bool = False

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if not 0.0 <= self.jw_p <= 0.25:
            raise ValueError(f"jaro-winkler scaling p={self.jw_p} outside [0, 0.25]")

    @classmethod
    def from_name(cls, name: str, jw_p: float = 0.1, damerau_osa: bool = False) -> "Measure":
        try:
            kind = MEASURE_ALIASES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown measure {name!r}") from None
        return cls(kind=kind, jw_p=jw_p, damerau_osa=damerau_osa)

    def distance(self, a: str, b: str) -> float | int:
        if self.kind == LEVENSHTEIN:
            return levenshtein(a, b)
        if self.kind == DAMERAU_LEVENSHTEIN:
            return osa(a, b) if self.damerau_osa else damerau_levenshtein(a, b)
        if self.kind == HAMMING:
            return hamming(a, b)
        if self.kind == JARO:
            return 1.0 - jaro(a, b)
        return 1.0 - jaro_winkler(a, b, self.jw_p, self.jw_prefix_cap)

    @property
    def zero_iff_equal(self) -> bool:
        """Whether ``distance(a, b) == 0`` implies ``a == b``.

        True for every kind except a Jaro-Winkler configured so that the
        prefix bonus alone can reach similarity 1 (``p * cap >= 1``).
        """
        if self.kind == JARO_WINKLER:
            return self.jw_p * self.jw_prefix_cap < 1.0
        return True

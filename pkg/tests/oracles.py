"""Independent brute-force oracles used to check the production code.

Everything here is written as the most literal implementation available:
full dynamic-programming tables, explicit enumeration of transposition
anchors, exhaustive searches over small edit-sequence spaces, augmenting-path
matching.  Nothing imports from the production metric or search internals,
so agreement between the two sides is meaningful.
"""

from __future__ import annotations


def lev_table(a: str, b: str) -> int:
    """Levenshtein by the full (|a|+1) x (|b|+1) table."""
    la, lb = len(a), len(b)
    d = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        d[i][0] = i
    for j in range(lb + 1):
        d[0][j] = j
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[la][lb]


def dl_anchor_table(a: str, b: str) -> int:
    """Unrestricted Damerau-Levenshtein by explicit anchor enumeration.

    The transposition case takes the minimum over every pair of positions
    (k, l) with a[k] == b[j] and a[i] == b[l], paying for the characters
    dropped between the anchors, instead of tracking last occurrences.
    """
    la, lb = len(a), len(b)
    big = la + lb
    # 1-based characters; d[i][j] = distance between a[:i] and b[:j]
    d = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        d[i][0] = i
    for j in range(lb + 1):
        d[0][j] = j
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
            for k in range(1, i):
                if a[k - 1] != b[j - 1]:
                    continue
                for l in range(1, j):
                    if a[i - 1] != b[l - 1]:
                        continue
                    cand = d[k - 1][l - 1] + (i - k - 1) + 1 + (j - l - 1)
                    if cand < best:
                        best = cand
            d[i][j] = best
    return d[la][lb]


def dl_edit_search(a: str, b: str, max_depth: int, alphabet: str) -> int | None:
    """Exhaustive breadth-first search over single-edit sequences.

    Applies insertions, deletions, substitutions and adjacent transpositions
    to the evolving string; only usable for tiny depths.  Returns None when
    b is unreachable within max_depth edits.
    """
    frontier = {a}
    if b in frontier:
        return 0
    for depth in range(1, max_depth + 1):
        nxt: set[str] = set()
        for s in frontier:
            n = len(s)
            for i in range(n):
                nxt.add(s[:i] + s[i + 1 :])  # delete
                for c in alphabet:
                    if c != s[i]:
                        nxt.add(s[:i] + c + s[i + 1 :])  # substitute
            for i in range(n + 1):
                for c in alphabet:
                    nxt.add(s[:i] + c + s[i:])  # insert
            for i in range(n - 1):
                if s[i] != s[i + 1]:
                    nxt.add(s[:i] + s[i + 1] + s[i] + s[i + 2 :])  # transpose
        if b in nxt:
            return depth
        frontier = nxt
    return None


def hamming_padded(a: str, b: str) -> int:
    """Position-wise mismatches after padding the shorter string with a
    sentinel that matches nothing."""
    n = max(len(a), len(b))
    pa = a + "\x00" * (n - len(a))
    pb = b + "\x01" * (n - len(b))
    return sum(1 for x, y in zip(pa, pb) if x != y)


def _jaro_window(la: int, lb: int) -> int:
    w = max(la, lb) // 2 - 1
    return w if w > 0 else 0


def jaro_reference(a: str, b: str) -> float:
    """Jaro similarity, transliterated from the definition.

    Greedily matches each character of ``a`` to the first unused equal
    character of ``b`` within the window, then counts order mismatches
    between the two matched sequences; half of those are transpositions.
    """
    la, lb = len(a), len(b)
    if la == 0 and lb == 0:
        return 1.0
    if la == 0 or lb == 0:
        return 0.0
    w = _jaro_window(la, lb)
    used_b = [False] * lb
    matched_a: list[int] = []
    for i in range(la):
        for j in range(max(0, i - w), min(lb, i + w + 1)):
            if not used_b[j] and a[i] == b[j]:
                used_b[j] = True
                matched_a.append(i)
                break
    m = len(matched_a)
    if m == 0:
        return 0.0
    seq_a = [a[i] for i in matched_a]
    seq_b = [b[j] for j in range(lb) if used_b[j]]
    mismatches = sum(1 for x, y in zip(seq_a, seq_b) if x != y)
    t = mismatches // 2
    return (m / la + m / lb + (m - t) / m) / 3.0


def jaro_match_count_matching(a: str, b: str) -> int:
    """Maximum number of Jaro-matchable characters, by augmenting paths.

    A brute-force maximum bipartite matching over the graph joining equal
    characters within the Jaro window; cross-checks the greedy match count.
    """
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0
    w = _jaro_window(la, lb)
    adj: list[list[int]] = []
    for i in range(la):
        adj.append(
            [j for j in range(max(0, i - w), min(lb, i + w + 1)) if b[j] == a[i]]
        )
    match_b = [-1] * lb

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_b[j] == -1 or augment(match_b[j], seen):
                    match_b[j] = i
                    return True
        return False

    m = 0
    for i in range(la):
        if augment(i, [False] * lb):
            m += 1
    return m


def jaro_winkler_reference(a: str, b: str, p: float = 0.1, cap: int = 4) -> float:
    sim = jaro_reference(a, b)
    l = 0
    for x, y in zip(a, b):
        if x != y or l == cap:
            break
        l += 1
    return sim + l * p * (1.0 - sim)


# --- expression-side oracles --------------------------------------------------


def walk_subtrees(e) -> list:
    """Every subtree by explicit recursive enumeration (with duplicates)."""
    out = [e]
    for c in e.children:
        out.extend(walk_subtrees(c))
    return out


def collect_symbol_leaves(e) -> set[str]:
    """Symbol names by leaf inspection, ignoring numerals and placeholders."""
    if e.kind == "symbol":
        return {e.name}
    out: set[str] = set()
    for c in e.children:
        out |= collect_symbol_leaves(c)
    return out


def symmetric_difference_oracle(a: set, b: set) -> set:
    return (a | b) - (a & b)


def min_pair_lev_oracle(xs: list[str], ys: list[str]) -> int:
    """Exhaustive minimum Levenshtein over all cross pairs."""
    return min(lev_table(x, y) for x in xs for y in ys)


def random_string(rng, alphabet: str, max_len: int) -> str:
    n = rng.randint(0, max_len)
    return "".join(rng.choice(alphabet) for _ in range(n))

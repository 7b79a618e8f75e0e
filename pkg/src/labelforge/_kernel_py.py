"""Pure-Python similarity kernel.

Reference implementation of the hot pairwise primitives; the compiled
`_ckernel` module mirrors these signatures exactly. Sentences arrive as a
sequence of word surfaces plus a parallel sequence of negation flags.
"""

from __future__ import annotations

BACKEND = "python"


def common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    k = 0
    while k < n and a[k] == b[k]:
        k += 1
    return k


def rho(a: str, b: str, a_neg: bool, b_neg: bool, tau: float) -> float:
    """Prefix-match score: ratio of shared prefix to the longer word.

    Gated to zero below tau or across opposite negation polarity.
    """
    if a_neg != b_neg:
        return 0.0
    r = common_prefix_len(a, b) / max(len(a), len(b))
    return r if r >= tau else 0.0


def dice(s_words, s_negs, t_words, t_negs) -> float:
    """Unordered overlap: 2 * multiset intersection / (K + N)."""
    counts: dict = {}
    for w, n in zip(s_words, s_negs):
        key = (w, n)
        counts[key] = counts.get(key, 0) + 1
    inter = 0
    for w, n in zip(t_words, t_negs):
        key = (w, n)
        c = counts.get(key, 0)
        if c > 0:
            counts[key] = c - 1
            inter += 1
    return 2.0 * inter / (len(s_words) + len(t_words))


def _rho_matrix(s_words, s_negs, t_words, t_negs, tau: float) -> list[list[float]]:
    return [
        [rho(a, b, na, nb, tau) for b, nb in zip(t_words, t_negs)]
        for a, na in zip(s_words, s_negs)
    ]


def _fill(R: list[list[float]], K: int, N: int, delta: float) -> list[list[float]]:
    C = [[0.0] * (N + 1) for _ in range(K + 1)]
    for i in range(1, K + 1):
        Ri = R[i - 1]
        Ci = C[i]
        Cim = C[i - 1]
        for j in range(1, N + 1):
            r = Ri[j - 1]
            d = Cim[j - 1] + r
            if d > Cim[j] and d > Ci[j - 1]:
                Ci[j] = d
            elif Cim[j] + r > Ci[j - 1]:
                Ci[j] = Cim[j] - delta
            else:
                Ci[j] = Ci[j - 1] - delta
    return C

# Traceback move codes.
_DIAG, _UP, _LEFT = 0, 1, 2


def _fill_with_moves(R, K, N, delta):
    C = [[0.0] * (N + 1) for _ in range(K + 1)]
    M = [[0] * (N + 1) for _ in range(K + 1)]
    for i in range(1, K + 1):
        Ri = R[i - 1]
        Ci = C[i]
        Mi = M[i]
        Cim = C[i - 1]
        for j in range(1, N + 1):
            r = Ri[j - 1]
            d = Cim[j - 1] + r
            if d > Cim[j] and d > Ci[j - 1]:
                Ci[j] = d
                Mi[j] = _DIAG
            elif Cim[j] + r > Ci[j - 1]:
                Ci[j] = Cim[j] - delta
                Mi[j] = _UP
            else:
                Ci[j] = Ci[j - 1] - delta
                Mi[j] = _LEFT
    return C, M


def lcf_table(s_words, s_negs, t_words, t_negs, tau, delta) -> list[list[float]]:
    """Full (K+1) x (N+1) score table."""
    K, N = len(s_words), len(t_words)
    R = _rho_matrix(s_words, s_negs, t_words, t_negs, tau)
    return _fill(R, K, N, delta)


def lcf_score(s_words, s_negs, t_words, t_negs, tau, delta) -> float:
    """Alignment score C[K, N]; may be negative."""
    K, N = len(s_words), len(t_words)
    R = _rho_matrix(s_words, s_negs, t_words, t_negs, tau)
    return _fill(R, K, N, delta)[K][N]


def lcf_align(s_words, s_negs, t_words, t_negs, tau, delta) -> tuple[float, int]:
    """Alignment score and the number of matched words on the traced path."""
    K, N = len(s_words), len(t_words)
    R = _rho_matrix(s_words, s_negs, t_words, t_negs, tau)
    C, M = _fill_with_moves(R, K, N, delta)
    matched = 0
    i, j = K, N
    while i > 0 and j > 0:
        move = M[i][j]
        if move == _DIAG:
            if R[i - 1][j - 1] > 0.0:
                matched += 1
            i -= 1
            j -= 1
        elif move == _UP:
            i -= 1
        else:
            j -= 1
    return C[K][N], matched


def pair_combined(s_words, s_negs, t_words, t_negs, tau, delta) -> float:
    """max(dice, symmetrized clamped ordered similarity)."""
    d = dice(s_words, s_negs, t_words, t_negs)
    if d >= 1.0:
        return d
    K, N = len(s_words), len(t_words)
    R = _rho_matrix(s_words, s_negs, t_words, t_negs, tau)
    st = _fill(R, K, N, delta)[K][N]
    RT = [[R[i][j] for i in range(K)] for j in range(N)]
    ts = _fill(RT, N, K, delta)[N][K]
    ordered = max(max(0.0, st) / K, max(0.0, ts) / N)
    return d if d > ordered else ordered


def pair_matches(s_words, s_negs, t_words, t_negs, tau, delta, gamma) -> bool:
    """Combined similarity >= gamma, skipping the DP when dice settles it."""
    d = dice(s_words, s_negs, t_words, t_negs)
    if d >= gamma:
        return True
    return pair_combined(s_words, s_negs, t_words, t_negs, tau, delta) >= gamma

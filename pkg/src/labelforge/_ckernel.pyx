# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled similarity kernel; mirrors labelforge._kernel_py exactly.

All arithmetic uses plain IEEE doubles in the same operation order as the
pure-Python fallback, so the two backends agree bit-for-bit.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc

BACKEND = "c"

cdef int _DIAG = 0
cdef int _UP = 1
cdef int _LEFT = 2


cdef inline Py_ssize_t _cpl(str a, str b):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef Py_ssize_t n = la if la < lb else lb
    cdef Py_ssize_t k = 0
    while k < n and a[k] == b[k]:
        k += 1
    return k


cdef inline double _rho(str a, str b, bint a_neg, bint b_neg, double tau):
    if a_neg != b_neg:
        return 0.0
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef Py_ssize_t m = la if la > lb else lb
    cdef double r = _cpl(a, b) / <double> m
    return r if r >= tau else 0.0


def common_prefix_len(a: str, b: str) -> int:
    return _cpl(a, b)


def rho(a: str, b: str, a_neg: bool, b_neg: bool, tau: float) -> float:
    return _rho(a, b, a_neg, b_neg, tau)


def dice(s_words, s_negs, t_words, t_negs) -> float:
    cdef dict counts = {}
    cdef Py_ssize_t K = len(s_words)
    cdef Py_ssize_t N = len(t_words)
    cdef Py_ssize_t i, inter = 0
    cdef object key
    cdef object c
    for i in range(K):
        key = (s_words[i], s_negs[i])
        c = counts.get(key)
        counts[key] = 1 if c is None else <object> c + 1
    for i in range(N):
        key = (t_words[i], t_negs[i])
        c = counts.get(key)
        if c is not None and <object> c > 0:
            counts[key] = <object> c - 1
            inter += 1
    return 2.0 * inter / (K + N)


cdef double* _alloc(Py_ssize_t count) except NULL:
    cdef double* buf = <double*> PyMem_Malloc(count * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    return buf


cdef void _rho_fill(object s_words, object s_negs, object t_words, object t_negs,
                    Py_ssize_t K, Py_ssize_t N, double tau, double* R):
    cdef Py_ssize_t i, j
    cdef str a, b
    cdef bint na, nb
    for i in range(K):
        a = <str> s_words[i]
        na = s_negs[i]
        for j in range(N):
            b = <str> t_words[j]
            nb = t_negs[j]
            R[i * N + j] = _rho(a, b, na, nb, tau)


cdef void _fill(double* R, Py_ssize_t K, Py_ssize_t N, double delta, double* C):
    # C is row-major (K+1) x (N+1); row/column zero stay at 0.
    cdef Py_ssize_t i, j
    cdef Py_ssize_t W = N + 1
    cdef double r, d
    for j in range(W):
        C[j] = 0.0
    for i in range(1, K + 1):
        C[i * W] = 0.0
        for j in range(1, N + 1):
            r = R[(i - 1) * N + (j - 1)]
            d = C[(i - 1) * W + (j - 1)] + r
            if d > C[(i - 1) * W + j] and d > C[i * W + (j - 1)]:
                C[i * W + j] = d
            elif C[(i - 1) * W + j] + r > C[i * W + (j - 1)]:
                C[i * W + j] = C[(i - 1) * W + j] - delta
            else:
                C[i * W + j] = C[i * W + (j - 1)] - delta


cdef void _fill_moves(double* R, Py_ssize_t K, Py_ssize_t N, double delta,
                      double* C, char* M):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t W = N + 1
    cdef double r, d
    for j in range(W):
        C[j] = 0.0
    for i in range(1, K + 1):
        C[i * W] = 0.0
        for j in range(1, N + 1):
            r = R[(i - 1) * N + (j - 1)]
            d = C[(i - 1) * W + (j - 1)] + r
            if d > C[(i - 1) * W + j] and d > C[i * W + (j - 1)]:
                C[i * W + j] = d
                M[i * W + j] = _DIAG
            elif C[(i - 1) * W + j] + r > C[i * W + (j - 1)]:
                C[i * W + j] = C[(i - 1) * W + j] - delta
                M[i * W + j] = _UP
            else:
                C[i * W + j] = C[i * W + (j - 1)] - delta
                M[i * W + j] = _LEFT


def lcf_table(s_words, s_negs, t_words, t_negs, tau: float, delta: float):
    cdef Py_ssize_t K = len(s_words)
    cdef Py_ssize_t N = len(t_words)
    cdef Py_ssize_t W = N + 1
    cdef double* R = _alloc(K * N if K * N > 0 else 1)
    cdef double* C = _alloc((K + 1) * W)
    cdef Py_ssize_t i, j
    try:
        _rho_fill(s_words, s_negs, t_words, t_negs, K, N, tau, R)
        _fill(R, K, N, delta, C)
        return [[C[i * W + j] for j in range(W)] for i in range(K + 1)]
    finally:
        PyMem_Free(R)
        PyMem_Free(C)


def lcf_score(s_words, s_negs, t_words, t_negs, tau: float, delta: float) -> float:
    cdef Py_ssize_t K = len(s_words)
    cdef Py_ssize_t N = len(t_words)
    cdef Py_ssize_t W = N + 1
    cdef double* R = _alloc(K * N if K * N > 0 else 1)
    cdef double* C = _alloc((K + 1) * W)
    cdef double score
    try:
        _rho_fill(s_words, s_negs, t_words, t_negs, K, N, tau, R)
        _fill(R, K, N, delta, C)
        score = C[K * W + N]
        return score
    finally:
        PyMem_Free(R)
        PyMem_Free(C)


def lcf_align(s_words, s_negs, t_words, t_negs, tau: float, delta: float):
    cdef Py_ssize_t K = len(s_words)
    cdef Py_ssize_t N = len(t_words)
    cdef Py_ssize_t W = N + 1
    cdef double* R = _alloc(K * N if K * N > 0 else 1)
    cdef double* C = _alloc((K + 1) * W)
    cdef char* M = <char*> PyMem_Malloc((K + 1) * W * sizeof(char))
    cdef Py_ssize_t i, j, matched
    cdef char move
    cdef double score
    if M == NULL:
        PyMem_Free(R)
        PyMem_Free(C)
        raise MemoryError()
    try:
        _rho_fill(s_words, s_negs, t_words, t_negs, K, N, tau, R)
        _fill_moves(R, K, N, delta, C, M)
        score = C[K * W + N]
        matched = 0
        i = K
        j = N
        while i > 0 and j > 0:
            move = M[i * W + j]
            if move == _DIAG:
                if R[(i - 1) * N + (j - 1)] > 0.0:
                    matched += 1
                i -= 1
                j -= 1
            elif move == _UP:
                i -= 1
            else:
                j -= 1
        return score, matched
    finally:
        PyMem_Free(R)
        PyMem_Free(C)
        PyMem_Free(M)


cdef double _combined(object s_words, object s_negs, object t_words, object t_negs,
                      double tau, double delta, double dice_value) except? -2.0:
    cdef Py_ssize_t K = len(s_words)
    cdef Py_ssize_t N = len(t_words)
    cdef double* R = _alloc(K * N if K * N > 0 else 1)
    cdef double* RT = NULL
    cdef double* C = NULL
    cdef Py_ssize_t i, j
    cdef double st, ts, fwd, rev, ordered
    try:
        _rho_fill(s_words, s_negs, t_words, t_negs, K, N, tau, R)
        RT = _alloc(K * N if K * N > 0 else 1)
        for i in range(K):
            for j in range(N):
                RT[j * K + i] = R[i * N + j]
        C = _alloc((K + 1) * (N + 1))
        _fill(R, K, N, delta, C)
        st = C[K * (N + 1) + N]
        _fill(RT, N, K, delta, C)
        ts = C[N * (K + 1) + K]
        fwd = (st if st > 0.0 else 0.0) / <double> K
        rev = (ts if ts > 0.0 else 0.0) / <double> N
        ordered = fwd if fwd > rev else rev
        return dice_value if dice_value > ordered else ordered
    finally:
        PyMem_Free(R)
        PyMem_Free(RT)
        PyMem_Free(C)


def pair_combined(s_words, s_negs, t_words, t_negs, tau: float, delta: float) -> float:
    cdef double d = dice(s_words, s_negs, t_words, t_negs)
    if d >= 1.0:
        return d
    return _combined(s_words, s_negs, t_words, t_negs, tau, delta, d)


def pair_matches(s_words, s_negs, t_words, t_negs,
                 tau: float, delta: float, gamma: float) -> bool:
    cdef double d = dice(s_words, s_negs, t_words, t_negs)
    if d >= gamma:
        return True
    return _combined(s_words, s_negs, t_words, t_negs, tau, delta, d) >= gamma

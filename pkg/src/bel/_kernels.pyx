# cython: boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels: F2 column reduction and Lyndon-word census.

Same contracts as ``bel._pykernels``; see there for documentation.
"""
from libcpp.vector cimport vector
from libcpp.map cimport map as cmap
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref, preincrement as inc

cdef double ROOF_RTOL = 1e-12


cdef void _xor_into(vector[int]& dst, const vector[int]& src) noexcept nogil:
    # dst, src sorted ascending; dst <- dst XOR src
    cdef vector[int] out
    cdef size_t i = 0, j = 0
    out.reserve(dst.size() + src.size())
    while i < dst.size() and j < src.size():
        if dst[i] < src[j]:
            out.push_back(dst[i]); i += 1
        elif dst[i] > src[j]:
            out.push_back(src[j]); j += 1
        else:
            i += 1; j += 1
    while i < dst.size():
        out.push_back(dst[i]); i += 1
    while j < src.size():
        out.push_back(src[j]); j += 1
    dst.swap(out)


def reduce_columns(columns):
    cdef Py_ssize_t n = len(columns)
    cdef vector[vector[int]] cols
    cdef vector[int] low
    cdef unordered_map[int, int] owner
    cdef Py_ssize_t j
    cdef int piv
    cols.resize(n)
    low.assign(n, -1)
    for j in range(n):
        for r in sorted(set(columns[j])):
            cols[j].push_back(<int>r)
    with nogil:
        for j in range(n):
            while cols[j].size() > 0:
                piv = cols[j].back()
                if owner.count(piv) == 0:
                    owner[piv] = <int>j
                    low[j] = piv
                    break
                _xor_into(cols[j], cols[owner[piv]])
    return [low[j] for j in range(n)]


cdef struct _Walk:
    int k
    int nmax
    double budget
    int* a
    int* counts
    const unsigned char* ok
    const double* roof


cdef void _visit(_Walk* w, int t, int p, double total,
                 cmap[vector[int], long long]& census) noexcept nogil:
    cdef int length = t - 1
    cdef int j, prev, base, k = w.k
    cdef double nt
    cdef vector[int] key
    if p == length and w.ok[w.a[length] * k + w.a[1]]:
        key.assign(w.counts, w.counts + k)
        census[key] += 1
    if length >= w.nmax:
        return
    prev = w.a[length]
    base = w.a[t - p]
    for j in range(base, k):
        if not w.ok[prev * k + j]:
            continue
        nt = total + w.roof[j]
        if nt > w.budget:
            continue
        w.a[t] = j
        w.counts[j] += 1
        _visit(w, t + 1, p if j == base else t, nt, census)
        w.counts[j] -= 1


def lyndon_census(adj, roof, smax, first_symbols=None):
    cdef int k = len(roof)
    cdef double budget = smax * (1.0 + ROOF_RTOL) + ROOF_RTOL
    cdef double rmin = min(roof)
    cdef int nmax = <int>(budget // rmin) if rmin > 0 else 0
    cdef vector[unsigned char] ok
    cdef vector[double] croof
    cdef vector[int] a, counts
    cdef _Walk w
    cdef cmap[vector[int], long long] census
    cdef int first, i, j
    if first_symbols is None:
        first_symbols = range(k)
    if nmax < 1:
        return {}
    flat = [1 if x else 0 for row in adj for x in row]
    if len(flat) != k * k:
        raise ValueError("adjacency must be k x k")
    for x in flat:
        ok.push_back(<unsigned char>x)
    for x in roof:
        croof.push_back(<double>x)
    a.assign(nmax + 2, 0)
    counts.assign(k, 0)
    w.k = k
    w.nmax = nmax
    w.budget = budget
    w.a = a.data()
    w.counts = counts.data()
    w.ok = ok.data()
    w.roof = croof.data()
    firsts = [int(f) for f in first_symbols]
    for first in firsts:
        if croof[first] > budget:
            continue
        with nogil:
            a[1] = first
            counts[first] += 1
            _visit(&w, 2, 1, croof[first], census)
            counts[first] -= 1
    out = {}
    cdef cmap[vector[int], long long].iterator it = census.begin()
    while it != census.end():
        out[tuple(deref(it).first)] = deref(it).second
        inc(it)
    return out

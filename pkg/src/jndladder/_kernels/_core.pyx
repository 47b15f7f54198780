# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: block DCT-energy stats, GLCM features, CART splits."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


def plane_block_stats(const double[:, ::1] plane, int block_size,
                      const double[:, ::1] basis, const double[:, ::1] weights):
    """Texture energy and DC brightness per block via the DCT basis product.

    plane dimensions must be multiples of block_size (pre-padded). Blocks
    are read in place (BLAS lda = plane stride); coefficients are
    basis @ block @ basis.T, energies are the weighted absolute-coefficient
    sums / w^2, lumas the DC coefficients / w. Block order is row-major.
    """
    cdef Py_ssize_t h = plane.shape[0]
    cdef Py_ssize_t width = plane.shape[1]
    cdef int w = block_size
    cdef int lda = <int> width
    if h % w or width % w:
        raise ValueError("plane dimensions must be multiples of the block size")
    if basis.shape[0] != w or weights.shape[0] != w:
        raise ValueError("basis and weights disagree with the block size")
    cdef Py_ssize_t nby = h // w
    cdef Py_ssize_t nbx = width // w

    energies = np.empty(nby * nbx, dtype=np.float64)
    lumas = np.empty(nby * nbx, dtype=np.float64)
    tmp_arr = np.empty((w, w), dtype=np.float64)
    t_arr = np.empty((w, w), dtype=np.float64)
    cdef double[::1] ev = energies
    cdef double[::1] lv = lumas
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] t = t_arr

    cdef double one = 1.0, zero = 0.0
    cdef Py_ssize_t by, bx, k, i, j
    cdef double acc
    cdef double* basis_ptr = <double*> <void*> &basis[0, 0]
    cdef const double* block_ptr
    with nogil:
        k = 0
        for by in range(nby):
            for bx in range(nbx):
                block_ptr = &plane[by * w, bx * w]
                # tmp = block @ basis.T (column-major trick, strided read)
                dgemm("T", "N", &w, &w, &w, &one, basis_ptr, &w,
                      <double*> <void*> block_ptr, &lda, &zero, &tmp[0, 0], &w)
                # t = basis @ tmp
                dgemm("N", "N", &w, &w, &w, &one, &tmp[0, 0], &w,
                      basis_ptr, &w, &zero, &t[0, 0], &w)
                acc = 0.0
                for i in range(w):
                    for j in range(w):
                        acc += weights[i, j] * fabs(t[i, j])
                ev[k] = acc / (w * w)
                lv[k] = t[0, 0] / w
                k += 1
    return energies, lumas


def glcm_feature_batch(const cnp.uint16_t[:, :, ::1] patches, int dy, int dx,
                       int levels):
    """Haralick features of the symmetric normalized GLCM, per patch.

    Returns (n, 6) float64: contrast, dissimilarity, homogeneity, angular
    second moment, energy, correlation (:= 1 for zero variance).
    """
    cdef Py_ssize_t n = patches.shape[0]
    cdef Py_ssize_t h = patches.shape[1]
    cdef Py_ssize_t w = patches.shape[2]
    cdef Py_ssize_t nh = h - (dy if dy >= 0 else -dy)
    cdef Py_ssize_t nw = w - (dx if dx >= 0 else -dx)
    if nh <= 0 or nw <= 0:
        raise ValueError(
            f"offset ({dy}, {dx}) leaves no sample pairs in a {h}x{w} patch"
        )
    if levels <= 0:
        raise ValueError("levels must be positive")

    cdef Py_ssize_t ya = 0 if dy >= 0 else -dy
    cdef Py_ssize_t xa = 0 if dx >= 0 else -dx
    cdef Py_ssize_t n_dir = nh * nw

    out_arr = np.empty((n, 6), dtype=np.float64)
    hist_arr = np.zeros(<Py_ssize_t> levels * levels, dtype=np.uint32)
    touched_arr = np.empty(2 * n_dir, dtype=np.int64)
    cdef double[:, ::1] out = out_arr
    cdef cnp.uint32_t[::1] hist = hist_arr
    cdef cnp.int64_t[::1] touched = touched_arr

    cdef Py_ssize_t k, y, x, m, nt
    cdef long long a, b, d, code
    cdef long long s_d2, s_absd, s_ab, s_apb, s_a2b2, asm_int, cnt
    cdef double s_hom, mu, var, total, corr
    cdef int bad = 0

    with nogil:
        for k in range(n):
            s_d2 = 0; s_absd = 0; s_ab = 0; s_apb = 0; s_a2b2 = 0
            s_hom = 0.0
            nt = 0
            for y in range(nh):
                for x in range(nw):
                    a = patches[k, ya + y, xa + x]
                    b = patches[k, ya + y + dy, xa + x + dx]
                    if a >= levels or b >= levels:
                        bad = 1
                        break
                    d = a - b
                    s_d2 += d * d
                    s_absd += d if d >= 0 else -d
                    s_hom += 1.0 / (1.0 + <double> (d * d))
                    s_ab += a * b
                    s_apb += a + b
                    s_a2b2 += a * a + b * b
                    code = a * levels + b
                    hist[code] += 1
                    touched[nt] = code
                    nt += 1
                    code = b * levels + a
                    hist[code] += 1
                    touched[nt] = code
                    nt += 1
                if bad:
                    break
            if bad:
                break
            asm_int = 0
            for m in range(nt):
                code = touched[m]
                cnt = hist[code]
                if cnt > 0:
                    asm_int += cnt * cnt
                    hist[code] = 0
            total = 2.0 * n_dir
            out[k, 0] = <double> s_d2 / n_dir
            out[k, 1] = <double> s_absd / n_dir
            out[k, 2] = s_hom / n_dir
            out[k, 3] = <double> asm_int / (total * total)
            out[k, 4] = sqrt(<double> asm_int / (total * total))
            mu = <double> s_apb / total
            var = <double> s_a2b2 / total - mu * mu
            if var <= 0.0:
                corr = 1.0
            else:
                corr = (<double> s_ab / n_dir - mu * mu) / var
            out[k, 5] = corr
    if bad:
        raise ValueError(f"sample value >= levels ({levels})")
    return out_arr


cdef void _sort_pairs(double* key, double* val, Py_ssize_t lo,
                      Py_ssize_t hi) noexcept nogil:
    """Quicksort (key, val) in parallel by key; insertion sort below 16."""
    cdef Py_ssize_t i, j, mid
    cdef double pivot, tk, tv
    while hi - lo > 15:
        mid = lo + (hi - lo) // 2
        # median-of-three pivot, moved to position lo
        if key[mid] < key[lo]:
            tk = key[lo]; key[lo] = key[mid]; key[mid] = tk
            tv = val[lo]; val[lo] = val[mid]; val[mid] = tv
        if key[hi] < key[lo]:
            tk = key[lo]; key[lo] = key[hi]; key[hi] = tk
            tv = val[lo]; val[lo] = val[hi]; val[hi] = tv
        if key[hi] < key[mid]:
            tk = key[mid]; key[mid] = key[hi]; key[hi] = tk
            tv = val[mid]; val[mid] = val[hi]; val[hi] = tv
        pivot = key[mid]
        i = lo
        j = hi
        while i <= j:
            while key[i] < pivot:
                i += 1
            while key[j] > pivot:
                j -= 1
            if i <= j:
                tk = key[i]; key[i] = key[j]; key[j] = tk
                tv = val[i]; val[i] = val[j]; val[j] = tv
                i += 1
                j -= 1
        # recurse into the smaller side, loop on the larger
        if j - lo < hi - i:
            if lo < j:
                _sort_pairs(key, val, lo, j)
            lo = i
        else:
            if i < hi:
                _sort_pairs(key, val, i, hi)
            hi = j
    for i in range(lo + 1, hi + 1):
        tk = key[i]
        tv = val[i]
        j = i - 1
        while j >= lo and key[j] > tk:
            key[j + 1] = key[j]
            val[j + 1] = val[j]
            j -= 1
        key[j + 1] = tk
        val[j + 1] = tv


def best_split(const double[:, :] X, const double[::1] y, Py_ssize_t min_leaf):
    """Best CART split (MSE criterion); see the numpy backend for the contract."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t best_feat = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    if n < 2:
        return -1, 0.0, 0.0

    key_arr = np.empty(n, dtype=np.float64)
    val_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] key = key_arr
    cdef double[::1] yv = val_arr

    cdef Py_ssize_t f, i
    cdef double s_total, left, gain, thr
    with nogil:
        for f in range(d):
            for i in range(n):
                key[i] = X[i, f]
                yv[i] = y[i]
            _sort_pairs(&key[0], &yv[0], 0, n - 1)
            s_total = 0.0
            for i in range(n):
                s_total += yv[i]
            left = 0.0
            for i in range(1, n):
                left += yv[i - 1]
                if key[i - 1] < key[i] and i >= min_leaf and n - i >= min_leaf:
                    gain = (left * left / i
                            + (s_total - left) * (s_total - left) / (n - i)
                            - s_total * s_total / n)
                    if gain > best_gain:
                        thr = (key[i - 1] + key[i]) / 2.0
                        if thr == key[i]:
                            thr = key[i - 1]
                        best_feat = f
                        best_thr = thr
                        best_gain = gain
    return best_feat, best_thr, best_gain

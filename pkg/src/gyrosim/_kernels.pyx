# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels (same contract as ``_kernels_py``)."""


def apply_1q(double complex[::1] amps, int q, double complex m00, double complex m01,
             double complex m10, double complex m11):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t step = 1 << q
    cdef Py_ssize_t half = n >> 1
    cdef Py_ssize_t k, i0, i1
    cdef double complex a0, a1
    with nogil:
        for k in range(half):
            # insert a 0 bit at position q
            i0 = ((k >> q) << (q + 1)) | (k & (step - 1))
            i1 = i0 | step
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = m00 * a0 + m01 * a1
            amps[i1] = m10 * a0 + m11 * a1


def apply_c1q(double complex[::1] amps, int c, int q, double complex m00, double complex m01,
              double complex m10, double complex m11):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t cbit = 1 << c
    cdef Py_ssize_t tbit = 1 << q
    cdef Py_ssize_t x, i1
    cdef double complex a0, a1
    with nogil:
        for x in range(n):
            if (x & cbit) and not (x & tbit):
                i1 = x | tbit
                a0 = amps[x]
                a1 = amps[i1]
                amps[x] = m00 * a0 + m01 * a1
                amps[i1] = m10 * a0 + m11 * a1


def apply_cnot(double complex[::1] amps, int c, int q):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t cbit = 1 << c
    cdef Py_ssize_t tbit = 1 << q
    cdef Py_ssize_t x, i1
    cdef double complex tmp
    with nogil:
        for x in range(n):
            if (x & cbit) and not (x & tbit):
                i1 = x | tbit
                tmp = amps[x]
                amps[x] = amps[i1]
                amps[i1] = tmp


def apply_cphase(double complex[::1] amps, int a, int b, double complex phase):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t mask = (1 << a) | (1 << b)
    cdef Py_ssize_t x
    with nogil:
        for x in range(n):
            if (x & mask) == mask:
                amps[x] = amps[x] * phase


def apply_swap(double complex[::1] amps, int a, int b):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t abit = 1 << a
    cdef Py_ssize_t bbit = 1 << b
    cdef Py_ssize_t x, i1
    cdef double complex tmp
    with nogil:
        for x in range(n):
            if (x & abit) and not (x & bbit):
                i1 = (x ^ abit) | bbit
                tmp = amps[x]
                amps[x] = amps[i1]
                amps[i1] = tmp


def apply_diagonal(double complex[::1] amps, double complex[::1] diag):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t x
    if diag.shape[0] != n:
        raise ValueError("diagonal length mismatch")
    with nogil:
        for x in range(n):
            amps[x] = amps[x] * diag[x]


cdef inline void _xx_pair(double* d, Py_ssize_t n, Py_ssize_t i, Py_ssize_t j,
                          double c, double s) noexcept nogil:
    # d is the interleaved (re, im) view of the amplitudes
    cdef Py_ssize_t ibit = (<Py_ssize_t>1) << i
    cdef Py_ssize_t mask = ibit | ((<Py_ssize_t>1) << j)
    cdef Py_ssize_t k, x, y
    cdef double ar, ai, br, bi
    # visit each pair {x, x ^ mask} once: the member with bit i clear
    for k in range(n >> 1):
        x = ((k >> i) << (i + 1)) | (k & (ibit - 1))
        y = x ^ mask
        ar = d[2 * x]
        ai = d[2 * x + 1]
        br = d[2 * y]
        bi = d[2 * y + 1]
        # [c, -is; -is, c]
        d[2 * x] = c * ar + s * bi
        d[2 * x + 1] = c * ai - s * br
        d[2 * y] = c * br + s * ai
        d[2 * y + 1] = c * bi - s * ar


def apply_xx(double complex[::1] amps, int i, int j, double c, double s):
    with nogil:
        _xx_pair(<double*>&amps[0], amps.shape[0], i, j, c, s)


def apply_xx_many(double complex[::1] amps, long[::1] ii, long[::1] jj, double[::1] cs, double[::1] ss):
    """Apply exp(-i b sigma_x sigma_x) for every pair; ``cs, ss = cos b, sin b``."""
    cdef Py_ssize_t npair = ii.shape[0]
    cdef Py_ssize_t p
    if jj.shape[0] != npair or cs.shape[0] != npair or ss.shape[0] != npair:
        raise ValueError("pair array length mismatch")
    with nogil:
        for p in range(npair):
            _xx_pair(<double*>&amps[0], amps.shape[0], ii[p], jj[p], cs[p], ss[p])

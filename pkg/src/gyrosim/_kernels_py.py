"""Pure numpy statevector kernels.

Fallback for the compiled ``_kernels`` extension; both expose the same
functions with the same in-place semantics. Amplitude arrays are flat
``complex128`` with qubit k stored as bit k of the basis index.
"""
import numpy as np


def _split(amps, q):
    # view as (high, bit q, low) so axis 1 selects the value of qubit q
    return amps.reshape(-1, 2, 1 << q)


def _split2(amps, lo, hi):
    # axes: (above hi, bit hi, between, bit lo, below lo)
    return amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)


def apply_1q(amps, q, m00, m01, m10, m11):
    v = _split(amps, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def apply_c1q(amps, c, q, m00, m01, m10, m11):
    lo, hi = min(c, q), max(c, q)
    v = _split2(amps, lo, hi)
    if c > q:
        a0 = v[:, 1, :, 0, :].copy()
        a1 = v[:, 1, :, 1, :]
        v[:, 1, :, 0, :] = m00 * a0 + m01 * a1
        v[:, 1, :, 1, :] = m10 * a0 + m11 * a1
    else:
        a0 = v[:, 0, :, 1, :].copy()
        a1 = v[:, 1, :, 1, :]
        v[:, 0, :, 1, :] = m00 * a0 + m01 * a1
        v[:, 1, :, 1, :] = m10 * a0 + m11 * a1


def apply_cnot(amps, c, q):
    lo, hi = min(c, q), max(c, q)
    v = _split2(amps, lo, hi)
    if c > q:
        tmp = v[:, 1, :, 0, :].copy()
        v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp
    else:
        tmp = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp


def apply_cphase(amps, a, b, phase):
    lo, hi = min(a, b), max(a, b)
    v = _split2(amps, lo, hi)
    v[:, 1, :, 1, :] *= phase


def apply_swap(amps, a, b):
    lo, hi = min(a, b), max(a, b)
    v = _split2(amps, lo, hi)
    tmp = v[:, 0, :, 1, :].copy()
    v[:, 0, :, 1, :] = v[:, 1, :, 0, :]
    v[:, 1, :, 0, :] = tmp


def apply_diagonal(amps, diag):
    amps *= diag


def apply_xx(amps, i, j, c, s):
    lo, hi = min(i, j), max(i, j)
    v = _split2(amps, lo, hi)
    ms = -1j * s
    for bh in (0, 1):
        a = v[:, bh, :, 0, :].copy()
        b = v[:, 1 - bh, :, 1, :]
        v[:, bh, :, 0, :] = c * a + ms * b
        v[:, 1 - bh, :, 1, :] = ms * a + c * b


def apply_xx_many(amps, ii, jj, cs, ss):
    if not (len(ii) == len(jj) == len(cs) == len(ss)):
        raise ValueError("pair array length mismatch")
    for i, j, c, s in zip(ii, jj, cs, ss):
        apply_xx(amps, int(i), int(j), float(c), float(s))


def z_field_diagonal(n, a):
    """Return exp(-i sum_k a_k s_k(x)) for every basis index x.

    s_k(x) is +1 when bit k of x is 0 and -1 when it is 1.
    """
    diag = np.ones(1, dtype=np.complex128)
    for k in range(n):
        ak = float(a[k])
        factors = np.array([np.exp(-1j * ak), np.exp(1j * ak)])
        # bit k is the most significant of the 2^(k+1) block built so far
        diag = np.concatenate((diag * factors[0], diag * factors[1]))
    return diag

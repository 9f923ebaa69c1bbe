"""DFT conventions, compact-support index sets and sign-pattern utilities.

Conventions used throughout the package::

    f(k) = dft(F)(k)  = (1/N) sum_j F_j exp(+2*pi*i*j*k/N)
    F_j  = idft(f)(j) =       sum_k f(k) exp(-2*pi*i*j*k/N)

so ``dft`` is ``numpy.fft.ifft`` and ``idft`` is ``numpy.fft.fft``.  The
"time" signal ``f`` is supported on ``cs_index_set(N, tau)``, a window of
``tau + 1`` indices centred on ``k = 0`` modulo ``N``.
"""

import numpy as np

from ._validation import check_tau, check_vector


def dft(F):
    """Transform a length-N spectrum ``F`` into the signal ``f`` (1/N normalised)."""
    F = check_vector(F, "F", dtype=complex)
    return np.fft.ifft(F)


def idft(f):
    """Inverse of :func:`dft`: ``F_j = sum_k f(k) exp(-2 pi i j k / N)``."""
    f = check_vector(f, "f", dtype=complex)
    return np.fft.fft(f)


def dft_matrix(n):
    """Dense ``n x n`` matrix of :func:`dft`, ``W[k, j] = exp(2 pi i j k / n) / n``."""
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / n


def cs_index_set(n, tau):
    """Indices ``{k mod n : -tau/2 <= k <= tau/2}`` as a sorted array.

    Parameters
    ----------
    n : int
        Signal length.
    tau : int
        Even support parameter, ``0 <= tau < n``.

    Returns
    -------
    numpy.ndarray
        ``tau + 1`` distinct indices in increasing order.
    """
    tau = check_tau(tau, n)
    half = tau // 2
    return np.sort(np.arange(-half, half + 1) % n)


def shifted_index_set(n, tau, offset):
    """Window ``{offset, ..., offset + tau} mod n`` of length ``tau + 1`` (any tau parity)."""
    if tau < 0 or tau >= n:
        raise ValueError(f"tau={tau} must satisfy 0 <= tau < n={n}")
    return np.sort((offset + np.arange(tau + 1)) % n)


def out_of_support_mask(n, tau):
    """Boolean mask that is True at indices outside ``cs_index_set(n, tau)``."""
    mask = np.ones(n, dtype=bool)
    mask[cs_index_set(n, tau)] = False
    return mask


def out_of_support_energy(f, tau_s):
    """Mean squared magnitude of ``f`` over the indices outside the support window.

    Computes ``sum_{k not in CS(tau_s)} |f(k)|^2 / (N - tau_s - 1)``.
    """
    f = check_vector(f, "f", dtype=complex)
    n = f.shape[0]
    tau_s = check_tau(tau_s, n, "tau_s", strict_margin=1)
    outside = f[out_of_support_mask(n, tau_s)]
    return float(np.sum(np.abs(outside) ** 2) / (n - tau_s - 1))


def sign_of_real_spectrum(F):
    """Entrywise sign in {-1, +1}; zeros inherit the previous sign, a leading zero is +1."""
    F = check_vector(F, "F")
    return _sign_with_zero_rule(F)


def _sign_with_zero_rule(values):
    raw = np.sign(values).astype(np.int64)
    if raw.size == 0:
        return raw
    if raw[0] == 0:
        raw[0] = 1
    nz = raw != 0
    # forward fill: every zero takes the value of the last nonzero to its left
    last = np.maximum.accumulate(np.where(nz, np.arange(raw.size), 0))
    return raw[last]


def count_sign_changes(s):
    """Number of ``j in [1, N-1]`` with ``s[j] != s[j-1]`` (non-circular)."""
    s = np.asarray(s)
    if s.ndim != 1:
        raise ValueError("sign pattern must be one-dimensional")
    if np.any((s != 1) & (s != -1)):
        raise ValueError("sign pattern entries must be -1 or +1")
    return int(np.count_nonzero(s[1:] != s[:-1]))


def is_conjugate_symmetric(f, rtol=1e-12):
    """True if ``f(k) == conj(f(-k mod N))`` to within ``rtol * ||f||``."""
    f = check_vector(f, "f", dtype=complex)
    mirrored = np.conj(np.roll(f[::-1], 1))
    return bool(np.linalg.norm(f - mirrored) <= rtol * max(np.linalg.norm(f), np.finfo(float).tiny))

"""Estimation of the compact-support parameter by an out-of-support energy scan."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._validation import check_int, check_sigma, check_tau
from .solver import retrieve_sign
from .spectral import dft, out_of_support_energy

# minima of the curve within this fraction of the mean reconstructed energy are ties
MIN_RTOL = 1e-9


def out_of_support_curve(intensities, taus, sigma=0.0, threads=1):
    """``E_out(tau_s)`` of the sign-retrieval reconstruction for every ``tau_s`` in `taus`."""
    intensities = np.asarray(intensities, dtype=float)
    mag = np.sqrt(np.clip(intensities, 0.0, None))

    def one(tau_s):
        signs, _ = retrieve_sign(intensities, tau_s, sigma)
        return out_of_support_energy(dft(mag * signs), tau_s)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, taus))
    return [one(t) for t in taus]


def first_minimum(taus, energies, scale):
    """Smallest ``tau_s`` whose energy is within ``MIN_RTOL * scale`` of the minimum."""
    energies = np.asarray(energies)
    best = energies.min()
    hit = np.flatnonzero(energies <= best + MIN_RTOL * scale)
    return int(taus[hit[0]])


def estimate_support(intensities, tau_min, tau_max, sigma=0.0, threads=1):
    """Scan even ``tau_s`` in ``[tau_min, tau_max]`` and return the first minimiser of ``E_out``.

    Parameters
    ----------
    intensities : array_like
        Measured ``|F|**2``.
    tau_min, tau_max : int
        Even scan bounds with ``tau_min <= tau_max < N - 1``.
    sigma : float
        Noise level passed on to the sign retrieval.
    threads : int
        Evaluate the scan points concurrently; the result does not depend on it.

    Returns
    -------
    tau_hat : int
    curve : list of (int, float)
        ``(tau_s, E_out(tau_s))`` pairs in scan order.
    """
    intensities = np.asarray(intensities, dtype=float)
    if intensities.ndim != 1:
        raise ValueError("intensities must be one-dimensional")
    n = intensities.shape[0]
    sigma = check_sigma(sigma)
    tau_min = check_tau(tau_min, n, "tau_min", strict_margin=1)
    tau_max = check_tau(tau_max, n, "tau_max", strict_margin=1)
    if tau_min > tau_max:
        raise ValueError(f"tau_min={tau_min} exceeds tau_max={tau_max}")
    threads = check_int(threads, "threads")
    taus = list(range(tau_min, tau_max + 1, 2))
    energies = out_of_support_curve(intensities, taus, sigma, threads)
    # mean |f|^2 of the reconstruction, by Parseval
    scale = np.sum(np.clip(intensities, 0.0, None)) / n**2
    tau_hat = first_minimum(taus, energies, scale)
    return tau_hat, list(zip(taus, energies))

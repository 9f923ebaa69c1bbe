"""Exhaustive checks of uniqueness and of the linear solver at small N.

Everything here is deliberately naive: patterns are enumerated outright and
nullspaces come from a plain SVD, so these functions can serve as ground
truth for the faster solver.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_nonnegative, check_tau
from .solver import NEGLIGIBLE_MAG, RANK_RTOL, constrained_nullspace, final_segmentation, retrieve_sign
from .spectral import _sign_with_zero_rule, out_of_support_mask, sign_of_real_spectrum

MAX_ORACLE_N = 24
_CHUNK = 1 << 14


def brute_force_sign_solutions(mag, tau, tol=1e-10):
    """All sign patterns whose reconstruction vanishes outside the support.

    Patterns are normalised to ``+1`` at the first non-negligible bin (that
    is ``s[0] = +1`` unless ``|F_0|`` vanishes) and tested with
    ``E_out(dft(mag * s), tau) <= tol * ||mag||**2 / N``.  Bins with
    negligible magnitude carry no sign information; they are not enumerated
    and receive the zero rule of :func:`sign_of_real_spectrum` instead.

    Parameters
    ----------
    mag : array_like
        Magnitudes ``|F|`` of length ``N <= 24``.
    tau : int
        Even support parameter, ``tau < N - 1``.
    tol : float
        Relative acceptance threshold.

    Returns
    -------
    list of numpy.ndarray
        Matching patterns in lexicographic order (``-1`` before ``+1``).
    """
    mag = check_nonnegative(mag, "mag")
    n = mag.shape[0]
    if n > MAX_ORACLE_N:
        raise ValueError(f"refusing to enumerate 2**{n - 1} patterns (N={n} > {MAX_ORACLE_N})")
    tau = check_tau(tau, n, strict_margin=1)
    out = np.flatnonzero(out_of_support_mask(n, tau))
    k, j = np.meshgrid(out, np.arange(n), indexing="ij")
    # E_out(s) = ||M s||^2 / (N - tau - 1)
    M = np.exp(2j * np.pi * k * j / n) * mag / n
    bound = tol * np.sum(mag**2) / n * len(out)

    live = mag > NEGLIGIBLE_MAG * mag.max()
    free = np.flatnonzero(live)
    base = np.zeros(n)
    if free.size:
        # fixing the first live sign removes the global sign
        base[free[0]] = 1.0
        free = free[1:]
    found = []
    total = 1 << free.size
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        # bit b of the code (MSB first) sets the sign of free[b]; 0 -> -1
        bits = (codes[:, None] >> np.arange(free.size - 1, -1, -1)) & 1
        S = np.tile(base, (codes.size, 1))
        S[:, free] = 2.0 * bits - 1.0
        if not live.all():
            S = np.array([_sign_with_zero_rule(row) for row in S])
        resid = np.sum(np.abs(S @ M.T) ** 2, axis=1)
        found.extend(S[resid <= bound].astype(np.int64))
    return [np.asarray(s) for s in sorted({tuple(s) for s in found})]


def count_constrained_solutions(mag, tau, segmentation, rtol=RANK_RTOL):
    """Dimension of the solution space of the unpinned system constant on `segmentation`."""
    mag = check_nonnegative(mag, "mag")
    if mag.shape[0] > MAX_ORACLE_N:
        raise ValueError(f"N={mag.shape[0]} exceeds the oracle limit {MAX_ORACLE_N}")
    return constrained_nullspace(mag, tau, segmentation, rtol).shape[1]


@dataclass
class OracleReport:
    """Outcome of :func:`check_instance`; `ok` is the conjunction of the applicable checks."""

    n: int
    tau: int
    n_solutions: int
    matches_truth: bool
    solver_agrees: bool
    segments: int
    rank_checked: bool
    solver_checked: bool = True
    nullspace_dim: int = -1
    cosine: float = float("nan")
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        good = self.n_solutions == 1 and self.matches_truth
        if self.solver_checked:
            good = good and self.solver_agrees
        if self.rank_checked:
            good = good and self.nullspace_dim == 1 and self.cosine >= 1 - 1e-9
        return good

    def to_dict(self):
        d = dict(self.__dict__)
        if not np.isfinite(d["cosine"]):
            d["cosine"] = None
        d["ok"] = self.ok
        return d


def check_instance(F, tau, tol=1e-10):
    """Cross-check brute force, the solver and the nullspace rank on one noise-free real spectrum.

    Requires ``N > 2 tau``.  Solver agreement and the rank check apply only
    when the final segmentation of the solver has ``M`` segments with
    ``N > 2 tau + M``; the rank check further needs that segmentation to be
    a correct over-segmentation of the true sign.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n <= 2 * tau:
        raise ValueError(f"uniqueness needs N > 2 tau (N={n}, tau={tau})")
    mag = np.abs(F)
    truth = sign_of_real_spectrum(F)
    truth = truth * truth[0]
    sols = brute_force_sign_solutions(mag, tau, tol)
    matches = len(sols) == 1 and _same_up_to_sign(sols[0], truth, mag)
    shat, _ = retrieve_sign(F**2, tau)
    agrees = _same_up_to_sign(shat, truth, mag)
    seg = final_segmentation(F**2, tau)
    hypothesis = n > 2 * tau + seg.n_segments
    report = OracleReport(n, tau, len(sols), matches, agrees, seg.n_segments, False, hypothesis)
    if hypothesis:
        if seg.is_constant_on(truth):
            basis = constrained_nullspace(mag, tau, seg)
            report.rank_checked = True
            report.nullspace_dim = basis.shape[1]
            if basis.shape[1] == 1:
                v = basis[:, 0]
                report.cosine = float(abs(np.vdot(v, truth)) / (np.linalg.norm(v) * np.sqrt(n)))
        else:
            report.notes.append("final segmentation joins indices of opposite true sign")
    return report


def _same_up_to_sign(a, b, mag):
    # bins with no magnitude are irrelevant to the reconstruction
    keep = mag > NEGLIGIBLE_MAG * mag.max()
    a, b = np.asarray(a)[keep], np.asarray(b)[keep]
    return bool(np.array_equal(a, b) or np.array_equal(a, -b))

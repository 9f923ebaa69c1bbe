"""Linear-system sign retrieval.

The unknown sign pattern is relaxed to a complex vector ``X``.  Two families
of homogeneous equations are stacked:

* compact support: ``dft(|F| X)(k) = 0`` for every ``k`` outside the window;
* constant sign: ``W(l) (X_l - X_{l+1}) = 0`` for heuristic interior indices.

Indices joined by the guaranteed segmentation are merged into one unknown by
summing their columns.  One unknown is pinned to ``-1`` and the remainder is
solved in the least-squares sense; the sign of the real part is the estimate.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_nonnegative, check_sigma, check_tau
from .segmentation import (
    Segmentation,
    WeightedSegmentation,
    guaranteed_segmentation,
    heuristic_segmentation,
    join_segmentations,
)
from .spectral import _sign_with_zero_rule, out_of_support_mask

RANK_RTOL = 1e-10

# relative residual below which a system counts as consistent (noise-free)
CONSISTENT_RTOL = 1e-9
MAX_PRUNED_ROWS = 8
MIN_PRUNE_SHARE = 0.3

# bins whose magnitude is below this fraction of the peak carry no sign information
NEGLIGIBLE_MAG = 1e-12


@dataclass(frozen=True)
class AssembledSystem:
    """Merged-column system matrix together with the column-to-index map."""

    matrix: np.ndarray
    column_map: tuple
    pin: int
    n_support_rows: int

    @property
    def n(self):
        return sum(len(c) for c in self.column_map)


@dataclass
class SignDiagnostics:
    residual: float
    s1: int
    s2: int
    pin: int
    segments: int
    relative_residual: float = 0.0
    pruned: tuple = ()

    def to_dict(self):
        return {
            "residual": float(self.residual),
            "s1": int(self.s1),
            "s2": int(self.s2),
            "pin": int(self.pin),
            "segments": int(self.segments),
            "pruned": [int(l) for l in self.pruned],
        }


def compact_support_rows(mag, tau):
    """Rows ``(k, j) -> exp(2 pi i j k / N) |F_j| / N`` for every ``k`` outside the support."""
    mag = check_nonnegative(mag, "mag")
    n = mag.shape[0]
    tau = check_tau(tau, n, strict_margin=1)
    k = np.flatnonzero(out_of_support_mask(n, tau))
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, j) / n) * (mag / n)


def boundary_rows(weighted):
    """One row ``+W(l)`` at column ``l`` and ``-W(l)`` at column ``l+1`` per weighted index."""
    n = weighted.n
    rows = np.zeros((len(weighted.weights), n), dtype=complex)
    for r, (l, w) in enumerate(weighted.weights.items()):
        if l + 1 >= n:
            raise ValueError(f"boundary index {l} has no successor in length {n}")
        rows[r, l] = w
        rows[r, l + 1] = -w
    return rows


def assemble(mag, tau, weighted, hard):
    """Stack support and boundary rows, then sum columns inside each segment of `hard`."""
    mag = check_nonnegative(mag, "mag")
    n = mag.shape[0]
    if weighted.n != n or hard.n != n:
        raise ValueError("segmentations and magnitudes must share the same length")
    full = np.vstack([compact_support_rows(mag, tau), boundary_rows(weighted)])
    labels = hard.labels()
    # column m is the sum over the m-th hard segment
    merged = np.add.reduceat(full, np.asarray(hard.starts), axis=1)
    column_map = tuple(tuple(seg) for seg in hard.segments())
    pin = int(labels[int(np.argmax(mag))])
    return AssembledSystem(merged, column_map, pin, n - tau - 1)


def solve_pinned(system):
    """Fix ``X[pin] = -1`` and minimise ``||A_rest X_rest - a_pin||`` (minimum norm)."""
    A = np.asarray(system.matrix)
    m = A.shape[1]
    if m == 0:
        raise ValueError("system has no columns")
    x = np.empty(m, dtype=complex)
    x[system.pin] = -1.0
    if m > 1:
        keep = np.arange(m) != system.pin
        rest = A[:, keep]
        a_pin = A[:, system.pin]
        if rest.shape[0] == 0:
            x[keep] = 0.0
        else:
            x[keep] = np.linalg.lstsq(rest, a_pin, rcond=RANK_RTOL)[0]
    return x


def prune_inconsistent_rows(system, x, rtol=CONSISTENT_RTOL, max_rows=MAX_PRUNED_ROWS,
                            min_share=MIN_PRUNE_SHARE):
    """Greedily delete boundary rows that contradict an otherwise consistent system.

    For noise-free data the true sign solves the support rows exactly, so a
    nonzero residual means some heuristic constant-sign constraint is wrong.
    At each step the boundary row whose deletion lowers the squared residual
    the most, ``|r_i|**2 / (1 - h_ii)`` with ``h_ii`` the row leverage, is
    removed.  The loop stops once the relative residual is below `rtol`,
    after `max_rows` deletions, or when the best deletion would remove less
    than `min_share` of the squared residual (the inconsistency is then
    spread out rather than caused by a few bad rows).

    Returns
    -------
    system : AssembledSystem
        System with the offending rows removed.
    x : numpy.ndarray
        Pinned least-squares solution of the pruned system.
    dropped : list of int
        Row indices (in the input system) that were removed.
    """
    A = system.matrix
    pin = system.pin
    active = np.ones(A.shape[0], dtype=bool)
    dropped = []
    r = A @ x
    for _ in range(max_rows):
        rows = np.flatnonzero(active)
        scale = np.linalg.norm(A[rows])
        r2 = np.sum(np.abs(r) ** 2)
        if scale == 0 or np.sqrt(r2) <= rtol * scale:
            break
        rest = np.delete(A[rows], pin, axis=1)
        u, sv, _ = np.linalg.svd(rest, full_matrices=False)
        rank = int(np.count_nonzero(sv > RANK_RTOL * sv[0])) if sv.size else 0
        leverage = np.sum(np.abs(u[:, :rank]) ** 2, axis=1)
        score = np.abs(r) ** 2 / np.maximum(1.0 - leverage, 1e-12)
        score[rows < system.n_support_rows] = -np.inf
        best = int(np.argmax(score))
        if not np.isfinite(score[best]) or score[best] < min_share * r2:
            break
        active[rows[best]] = False
        dropped.append(int(rows[best]))
        x = solve_pinned(AssembledSystem(A[active], system.column_map, pin, system.n_support_rows))
        r = A[active] @ x
    pruned = AssembledSystem(A[active], system.column_map, pin, system.n_support_rows)
    return pruned, x, dropped


def expand(x, column_map):
    """Broadcast merged unknowns back onto the original indices."""
    x = np.asarray(x)
    if len(column_map) != x.shape[0]:
        raise ValueError("column map does not match the length of x")
    n = sum(len(c) for c in column_map)
    out = np.empty(n, dtype=x.dtype)
    for value, cols in zip(x, column_map):
        out[list(cols)] = value
    return out


def expand_and_project(x, column_map):
    """Expand ``x`` and take the sign of its real part (zeros copy the previous sign)."""
    return _sign_with_zero_rule(np.real(expand(x, column_map)))


def retrieve_sign(intensities, tau, sigma=0.0, circular_minima=True, prune=None, return_system=False):
    """Recover the sign pattern of a real spectrum from its measured intensities.

    Parameters
    ----------
    intensities : array_like
        Measured ``|F|**2`` (negative values from noisy data are clamped to 0).
    tau : int
        Even support parameter of ``dft(F)``.
    sigma : float
        Noise level; widens the guaranteed-segmentation threshold.
    circular_minima : bool
        Let the endpoints count as local minima against their wrap-around
        neighbours.  The spectrum is periodic, and a sign change next to
        index 0 is otherwise missed by the heuristic segmentation.
    prune : bool or None
        Remove heuristic constraints that make a noise-free system
        inconsistent (:func:`prune_inconsistent_rows`).  ``None`` enables it
        only when ``sigma == 0``.
    return_system : bool
        Also return the assembled system and solution vector.

    Returns
    -------
    signs : numpy.ndarray of int
        Estimated pattern in {-1, +1}, normalised to +1 at the pinned index.
    diagnostics : SignDiagnostics
    """
    intensities = np.asarray(intensities, dtype=float)
    if intensities.ndim != 1 or intensities.shape[0] < 3:
        raise ValueError("intensities must be a 1-D vector of length >= 3")
    if not np.all(np.isfinite(intensities)):
        raise ValueError("intensities contain non-finite values")
    sigma = check_sigma(sigma)
    mag = np.sqrt(np.clip(intensities, 0.0, None))
    n = mag.shape[0]
    tau = check_tau(tau, n, strict_margin=1)
    # support rows scale like |F| and boundary rows like |F|^2; fix their balance at ||F|| = 1
    norm = np.linalg.norm(mag)
    if norm > 0:
        mag = mag / norm
        sigma = sigma / norm

    weighted = heuristic_segmentation(mag, circular=circular_minima)
    hard = guaranteed_segmentation(mag, tau, sigma)
    system = assemble(mag, tau, weighted, hard)
    x = solve_pinned(system)
    if prune is None:
        prune = sigma == 0
    boundary_index = list(weighted.weights)
    pruned = ()
    if prune:
        system, x, dropped = prune_inconsistent_rows(system, x)
        pruned = tuple(boundary_index[r - system.n_support_rows] for r in dropped)
    signs = expand_and_project(x, system.column_map)

    negligible = mag <= NEGLIGIBLE_MAG * mag.max() if mag.max() > 0 else np.ones(n, bool)
    if np.any(negligible):
        signs = signs.astype(float)
        signs[negligible] = 0.0
        signs = _sign_with_zero_rule(signs)

    pin_index = int(np.argmax(mag))
    if signs[pin_index] < 0:
        signs = -signs

    scale = np.linalg.norm(system.matrix)
    residual = float(np.linalg.norm(system.matrix @ x))
    final = join_segmentations(weighted.base, hard)
    diag = SignDiagnostics(
        residual=residual,
        s1=len(weighted.weights),
        s2=n - hard.n_segments,
        pin=pin_index,
        segments=final.n_segments,
        relative_residual=residual / scale if scale > 0 else 0.0,
        pruned=pruned,
    )
    if return_system:
        return signs, diag, system, x
    return signs, diag


def final_segmentation(intensities, tau, sigma=0.0, circular_minima=True):
    """Segmentation whose interior set is the union of the heuristic and guaranteed ones."""
    mag = np.sqrt(np.clip(np.asarray(intensities, dtype=float), 0.0, None))
    heuristic = heuristic_segmentation(mag, circular=circular_minima)
    return join_segmentations(heuristic.base, guaranteed_segmentation(mag, tau, sigma))


def constrained_nullspace(mag, tau, segmentation, rtol=RANK_RTOL):
    """Orthonormal basis (expanded to N indices) of the unpinned hard-merged system's nullspace."""
    n = len(mag)
    empty = WeightedSegmentation(Segmentation.singletons(n), {})
    system = assemble(mag, tau, empty, segmentation)
    A = system.matrix
    m = A.shape[1]
    if A.shape[0] == 0:
        basis = np.eye(m, dtype=complex)
    else:
        _, sv, vh = np.linalg.svd(A)
        # the unmerged support rows have spectral norm max|F| / sqrt(N); anchoring the
        # tolerance there keeps a lone vanishing column from counting as full rank
        ref = max(sv[0] if sv.size else 0.0, float(np.max(mag)) / np.sqrt(n))
        tol = rtol * ref
        rank = int(np.count_nonzero(sv > tol))
        basis = vh[rank:].conj().T
    if basis.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    return np.column_stack([expand(col, system.column_map) for col in basis.T])

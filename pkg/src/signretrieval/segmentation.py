"""Over-segmentation of frequency indices into intervals of constant sign.

Two rules are provided.  :func:`guaranteed_segmentation` uses an amplitude
bound on consecutive differences of a band-limited real spectrum; in the
noise-free case it never joins two indices of opposite sign.
:func:`heuristic_segmentation` isolates local minima of ``|F|`` and is
usually much coarser, but carries no guarantee, so its interior indices are
returned with confidence weights.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_nonnegative, check_sigma, check_tau


@dataclass(frozen=True)
class Segmentation:
    """Partition of ``0..n-1`` into contiguous segments given by their start indices."""

    starts: tuple
    n: int

    def __post_init__(self):
        starts = tuple(int(s) for s in self.starts)
        n = check_int(self.n, "n")
        if n < 1:
            raise ValueError("n must be positive")
        if not starts or starts[0] != 0:
            raise ValueError("segmentation must start at index 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        if starts[-1] >= n:
            raise ValueError("segment starts must be < n")
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "n", n)

    @classmethod
    def singletons(cls, n):
        return cls(tuple(range(n)), n)

    @classmethod
    def whole(cls, n):
        return cls((0,), n)

    @classmethod
    def from_labels(cls, labels):
        """Build from a per-index label vector; a new segment starts wherever the label changes."""
        labels = np.asarray(labels)
        starts = np.flatnonzero(np.r_[True, labels[1:] != labels[:-1]])
        return cls(tuple(starts), labels.shape[0])

    @property
    def n_segments(self):
        return len(self.starts)

    @property
    def ends(self):
        """Exclusive end index of every segment."""
        return self.starts[1:] + (self.n,)

    def segments(self):
        return [range(a, b) for a, b in zip(self.starts, self.ends)]

    def labels(self):
        """Segment number of every index."""
        lab = np.zeros(self.n, dtype=np.int64)
        lab[list(self.starts[1:])] = 1
        return np.cumsum(lab)

    def interior(self):
        """Indices ``l`` whose successor ``l + 1`` lies in the same segment."""
        boundary = set(self.starts)
        return tuple(l for l in range(self.n - 1) if (l + 1) not in boundary)

    def is_constant_on(self, values):
        """True if ``values`` is constant inside every segment."""
        values = np.asarray(values)
        return all(np.all(values[seg] == values[seg.start]) for seg in self.segments())

    def to_dict(self):
        return {"n": self.n, "starts": list(self.starts)}


@dataclass(frozen=True)
class WeightedSegmentation:
    """A segmentation whose interior indices carry nonnegative weights."""

    base: Segmentation
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        weights = {int(k): float(v) for k, v in self.weights.items()}
        if set(weights) != set(self.base.interior()):
            raise ValueError("weight keys must equal the interior index set of the segmentation")
        if any(w < 0 or not np.isfinite(w) for w in weights.values()):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "weights", dict(sorted(weights.items())))

    @property
    def n(self):
        return self.base.n

    def to_dict(self):
        d = self.base.to_dict()
        d["weights"] = {str(k): v for k, v in self.weights.items()}
        return d


def threshold(n, tau, norm_F, sigma=0.0):
    """Upper bound on ``|F_j - F_{j-1}|`` plus a one-sigma noise allowance.

    Returns ``(2/n)**1.5 * pi * S * norm_F + sigma / sqrt(n)`` with
    ``S = sqrt(tau (tau+1) (tau+2) / 24)``, i.e. ``S**2 = sum_{k=1}^{tau/2} k**2``.
    """
    n = check_int(n, "n")
    if n < 2:
        raise ValueError("n must be at least 2")
    tau = check_tau(tau, n)
    sigma = check_sigma(sigma)
    if norm_F < 0:
        raise ValueError("norm_F must be nonnegative")
    s_half = np.sqrt(tau * (tau + 1) * (tau + 2) / 24.0)
    return (2.0 / n) ** 1.5 * np.pi * s_half * float(norm_F) + sigma / np.sqrt(n)


def guaranteed_segmentation(mag, tau, sigma=0.0):
    """Join ``j-1`` and ``j`` whenever ``|F_{j-1}| + |F_j|`` exceeds :func:`threshold`.

    ``mag`` is the measured magnitude ``|F|``; its Euclidean norm stands in
    for ``||F||``.
    """
    mag = check_nonnegative(mag, "mag")
    n = mag.shape[0]
    if n == 1:
        return Segmentation.whole(1)
    thr = threshold(n, tau, np.linalg.norm(mag), sigma)
    split = (mag[1:] + mag[:-1]) <= thr
    starts = np.r_[0, np.flatnonzero(split) + 1]
    return Segmentation(tuple(starts), n)


def local_minima(mag, circular=False):
    """Indices ``j`` with ``mag[j] < min(mag[j-1], mag[j+1])``.

    With ``circular=False`` only interior indices qualify; otherwise the
    endpoints are compared with their wrap-around neighbours.
    """
    mag = np.asarray(mag)
    if circular:
        return np.flatnonzero((mag < np.roll(mag, 1)) & (mag < np.roll(mag, -1)))
    inner = (mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])
    return np.flatnonzero(inner) + 1


def heuristic_segmentation(mag, circular=False):
    """Local-minima over-segmentation with boundary confidence weights.

    Every strict local minimum of ``mag`` becomes a single-index
    segment, the runs between minima become segments, and the neighbour of
    each minimum whose squared magnitude is closer to the minimum's is split
    off as its own segment (the left neighbour on an exact tie).  Each
    interior index ``l`` gets the weight ``min(mag[l]**2, mag[l+1]**2)``.

    Parameters
    ----------
    mag : array_like
        Measured magnitudes ``|F|``, length ``N >= 3``.
    circular : bool
        Also test the endpoints as minima against their wrap-around
        neighbours (see :func:`local_minima`).

    Returns
    -------
    WeightedSegmentation
    """
    mag = check_nonnegative(mag, "mag")
    n = mag.shape[0]
    if n < 3:
        raise ValueError("heuristic segmentation needs at least 3 samples")
    power = mag**2
    minima = local_minima(mag, circular)
    singles = set(minima.tolist())
    for j in minima:
        left = power[j - 1] - power[j]
        right = power[(j + 1) % n] - power[j]
        singles.add((j + 1) % n if right < left else (j - 1) % n)
    starts = {0}
    for j in singles:
        starts.add(j)
        if j + 1 < n:
            starts.add(j + 1)
    seg = Segmentation(tuple(sorted(starts)), n)
    weights = {l: float(min(power[l], power[l + 1])) for l in seg.interior()}
    return WeightedSegmentation(seg, weights)


def merge_segmentations(a, b):
    """Common refinement: every boundary of either input is a boundary of the result."""
    if a.n != b.n:
        raise ValueError(f"segmentations cover different lengths ({a.n} != {b.n})")
    return Segmentation(tuple(sorted(set(a.starts) | set(b.starts))), a.n)


def join_segmentations(a, b):
    """Coarsest partition keeping only boundaries present in both inputs.

    Its interior index set is the union of the two interior sets, which is the
    set of equality constraints the sign solver effectively imposes.
    """
    if a.n != b.n:
        raise ValueError(f"segmentations cover different lengths ({a.n} != {b.n})")
    return Segmentation(tuple(sorted(set(a.starts) & set(b.starts))), a.n)

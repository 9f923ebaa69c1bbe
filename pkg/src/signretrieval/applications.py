"""Phase retrieval problems that reduce to a sign problem.

* Vectorial phase retrieval (VPR) from ``|F1|``, ``|F2|`` and the interference
  ``F1 conj(F2)`` as one linear system in the two phase vectors.
* VPR from three intensities ``|F1|^2``, ``|F2|^2``, ``|F1 + F2|^2``: the
  imaginary part of the interference is known up to sign, which is a sign
  problem.
* Two well separated objects from a single intensity ``|F|^2``: the
  correlation windows give ``|F1|^2 + |F2|^2`` and ``F1 conj(F2)``; the
  difference ``|F1|^2 - |F2|^2`` is again known up to sign.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import InconsistentMeasurementsError, InvalidLayoutError, check_nonnegative, check_sigma, check_vector
from .simulation import Layout, validate_layout
from .solver import RANK_RTOL, retrieve_sign
from .spectral import dft, idft, shifted_index_set
from .support import estimate_support

AUTO = "auto"

# relative size of a negative radicand that is still treated as rounding
RADICAND_RTOL = 1e-8


@dataclass
class VprInput:
    """Magnitudes of two spectra and their interference ``F1 * conj(F2)``.

    Each signal is assumed supported on ``offset .. offset + tau`` (mod N);
    offsets default to a window centred on 0.
    """

    mag1: np.ndarray
    mag2: np.ndarray
    interference: np.ndarray
    tau: int
    tau2: int = None
    offset1: int = None
    offset2: int = None

    def __post_init__(self):
        self.mag1 = check_nonnegative(self.mag1, "mag1")
        self.mag2 = check_nonnegative(self.mag2, "mag2")
        self.interference = check_vector(self.interference, "interference", dtype=complex)
        n = self.mag1.shape[0]
        if self.mag2.shape[0] != n or self.interference.shape[0] != n:
            raise ValueError("mag1, mag2 and interference must have equal lengths")
        if self.tau2 is None:
            self.tau2 = self.tau
        for t in (self.tau, self.tau2):
            if not 0 <= t < n - 1:
                raise ValueError(f"support parameter {t} out of range for n={n}")
        bound = self.mag1 * self.mag2
        if np.any(np.abs(self.interference) > bound + 1e-9 * max(bound.max(), 1.0)):
            raise InconsistentMeasurementsError("|interference| exceeds |F1||F2| (Cauchy-Schwarz)")

    @property
    def n(self):
        return self.mag1.shape[0]

    def support(self, channel):
        tau, offset = (self.tau, self.offset1) if channel == 1 else (self.tau2, self.offset2)
        if offset is None:
            offset = -(tau // 2)
        return shifted_index_set(self.n, tau, offset)


@dataclass
class VprResult:
    f1: np.ndarray
    f2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    residual: float
    relative_residual: float


def _support_rows(mag, support):
    n = mag.shape[0]
    outside = np.setdiff1d(np.arange(n), support)
    return np.exp(2j * np.pi * np.outer(outside, np.arange(n)) / n) * (mag / n)


def _unit(x):
    out = np.ones_like(x)
    nz = np.abs(x) > 0
    out[nz] = x[nz] / np.abs(x[nz])
    return out


def vpr_solve(inp):
    """Recover both signals (up to one shared global phase) from a :class:`VprInput`.

    The unknown phase vectors ``X1, X2`` satisfy ``dft(|Fi| Xi) = 0`` off
    each support and ``F1 conj(F2) X2 = |F1||F2| X1`` per bin.  ``X1`` is
    pinned to 1 at the bin where ``|F1||F2|`` peaks, the rest is solved in the
    least-squares sense and projected to unit modulus.
    """
    n = inp.n
    if not np.any(inp.mag1 > 0) or not np.any(inp.mag2 > 0):
        raise ValueError("degenerate input: a spectrum is identically zero")
    prod = inp.mag1 * inp.mag2
    coupled = np.flatnonzero(prod > 0)
    if not np.any(np.abs(inp.interference[coupled]) > 0):
        raise InconsistentMeasurementsError(
            "degenerate input: zero interference with nonzero magnitudes forces X1 = 0"
        )
    r1 = _support_rows(inp.mag1, inp.support(1))
    r2 = _support_rows(inp.mag2, inp.support(2))
    coupling = np.zeros((coupled.size, 2 * n), dtype=complex)
    rows = np.arange(coupled.size)
    coupling[rows, coupled] = -prod[coupled]
    coupling[rows, n + coupled] = inp.interference[coupled]
    A = np.vstack([
        np.hstack([r1, np.zeros((r1.shape[0], n))]),
        np.hstack([np.zeros((r2.shape[0], n)), r2]),
        coupling,
    ])
    pin = int(np.argmax(prod))
    keep = np.arange(2 * n) != pin
    z = np.empty(2 * n, dtype=complex)
    z[pin] = 1.0
    z[keep] = np.linalg.lstsq(A[:, keep], -A[:, pin], rcond=RANK_RTOL)[0]
    residual = float(np.linalg.norm(A @ z))
    x1, x2 = _unit(z[:n]), _unit(z[n:])
    scale = np.linalg.norm(A)
    return VprResult(
        f1=dft(inp.mag1 * x1),
        f2=dft(inp.mag2 * x2),
        x1=x1,
        x2=x2,
        residual=residual,
        relative_residual=residual / scale if scale > 0 else 0.0,
    )


def _checked_sqrt(radicand, scale, sigma, what):
    tol = RADICAND_RTOL * scale
    if sigma == 0 and np.any(radicand < -tol):
        worst = float(radicand.min())
        raise InconsistentMeasurementsError(f"{what}: negative radicand {worst:.3e} beyond tolerance {tol:.3e}")
    return np.sqrt(np.clip(radicand, 0.0, None))


@dataclass
class Vpr3Result:
    f1: np.ndarray
    f2: np.ndarray
    interference: np.ndarray
    signs: np.ndarray
    tau_interference: int
    curve: list
    residual: float


def vpr3_recover(i1, i2, s, tau_signal, tau_interference=AUTO, sigma=0.0):
    """Recover two signals from ``|F1|^2``, ``|F2|^2`` and ``|F1 + F2|^2``.

    Parameters
    ----------
    i1, i2, s : array_like
        The three measured intensities.
    tau_signal : int
        Even support parameter of ``f1`` and ``f2`` (centred windows).
    tau_interference : int or "auto"
        Support parameter of ``dft(Im(F1 conj(F2)))``; scanned over
        ``[2, N/2 - 2]`` when "auto".
    sigma : float
        Noise level.  With ``sigma > 0`` negative radicands are clamped to zero
        instead of raising.

    Returns
    -------
    Vpr3Result
    """
    i1 = check_vector(i1, "i1")
    i2 = check_vector(i2, "i2")
    s = check_vector(s, "s")
    sigma = check_sigma(sigma)
    n = i1.shape[0]
    if i2.shape[0] != n or s.shape[0] != n:
        raise ValueError("i1, i2 and s must have equal lengths")
    if sigma == 0 and min(i1.min(), i2.min(), s.min()) < 0:
        raise ValueError("intensities must be nonnegative")
    i1c, i2c = np.clip(i1, 0, None), np.clip(i2, 0, None)
    e_real = (s - i1 - i2) / 2
    prod = i1c * i2c
    e_imag_abs = _checked_sqrt(prod - e_real**2, prod.max(), sigma, "|E_I|^2")
    e_imag_int = e_imag_abs**2

    curve = []
    if tau_interference == AUTO:
        hi = n // 2 - 2
        hi -= hi % 2
        tau_interference, curve = estimate_support(e_imag_int, 2, min(hi, n - 3 - (n - 3) % 2), sigma)
    signs, _ = retrieve_sign(e_imag_int, tau_interference, sigma)
    interference = e_real + 1j * signs * e_imag_abs
    # rounding can push |E| a hair above |F1||F2|
    bound = np.sqrt(prod)
    over = np.abs(interference) > bound
    interference[over] *= bound[over] / np.abs(interference[over])
    result = vpr_solve(VprInput(np.sqrt(i1c), np.sqrt(i2c), interference, tau_signal))
    return Vpr3Result(result.f1, result.f2, interference, signs, int(tau_interference), curve, result.residual)


def correlation_windows(n, layout):
    """Lag indices (mod n) of the central autocorrelation block and the ``F1 conj(F2)`` block."""
    validate_layout(layout, n)
    if 2 * (layout.total - 1) >= n:
        raise InvalidLayoutError(
            f"correlation windows overlap: need n > {2 * (layout.total - 1)}, got n={n}"
        )
    c = max(layout.len1, layout.len2) - 1
    if c >= layout.gap + 1:
        raise InvalidLayoutError("central and cross-correlation windows overlap")
    central = np.arange(-c, c + 1) % n
    side = np.arange(-(layout.total - 1), -layout.gap) % n
    return central, side


def split_correlation_terms(intensity, layout):
    """Separate ``|F|^2`` of two separated objects into ``I_S`` and ``E3``.

    Returns ``I_S = |F1|^2 + |F2|^2`` (real) and ``E3 = F1 conj(F2)``, where
    ``f1`` is the object at the lower index of the layout.
    """
    intensity = check_vector(intensity, "intensity")
    n = intensity.shape[0]
    try:
        central, side = correlation_windows(n, layout)
    except InvalidLayoutError:
        raise
    except ValueError as exc:
        raise InvalidLayoutError(str(exc)) from exc
    a = dft(intensity)
    w_central = np.zeros(n, dtype=complex)
    w_central[central] = a[central]
    w_side = np.zeros(n, dtype=complex)
    w_side[side] = a[side]
    return np.real(idft(w_central)), idft(w_side)


@dataclass
class SeparatedResult:
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    signs: np.ndarray
    tau_difference: int
    residual: float


def separated_objects_recover(intensity, layout, tau_difference=None, sigma=0.0):
    """Recover two well separated objects from the single intensity ``|F1 + F2|^2``.

    Parameters
    ----------
    intensity : array_like
        Measured ``|F|^2``.
    layout : Layout
        Object lengths, gap and starting offset of the first object.
    tau_difference : int, "auto" or None
        Support parameter of ``dft(|F1|^2 - |F2|^2)``.  ``None`` derives it
        from the layout, ``"auto"`` scans for it.
    sigma : float
        Noise level.

    Notes
    -----
    ``sign(|F1|^2 - |F2|^2)`` is only known up to a global flip.  Both
    choices are passed to the VPR solver and the one with the smaller
    relative residual is kept; for equal-length objects both are exact and
    differ by the conjugate-reflection ambiguity ``f(k) -> conj(f(-k))``.
    """
    if isinstance(layout, dict):
        layout = Layout(**layout)
    intensity = check_vector(intensity, "intensity")
    sigma = check_sigma(sigma)
    n = intensity.shape[0]
    i_s, e3 = split_correlation_terms(intensity, layout)
    i_d_abs = _checked_sqrt(i_s**2 - 4 * np.abs(e3) ** 2, float(np.max(i_s**2)), sigma, "|I_D|^2")

    curve = []
    if tau_difference is None:
        tau_difference = 2 * (max(layout.len1, layout.len2) - 1)
    elif tau_difference == AUTO:
        hi = min(2 * layout.total, n - 3)
        tau_difference, curve = estimate_support(i_d_abs**2, 0, hi - hi % 2, sigma)
    signs, _ = retrieve_sign(i_d_abs**2, tau_difference, sigma)

    p1 = layout.offset
    p2 = layout.offset + layout.len1 + layout.gap
    best = None
    for trial_signs in (signs, -signs):
        i_d = trial_signs * i_d_abs
        m1 = np.sqrt(np.clip((i_s + i_d) / 2, 0, None))
        m2 = np.sqrt(np.clip((i_s - i_d) / 2, 0, None))
        bound = m1 * m2
        e = e3.copy()
        over = np.abs(e) > bound
        e[over] *= np.where(bound[over] > 0, bound[over] / np.abs(e[over]), 0.0)
        inp = VprInput(m1, m2, e, layout.len1 - 1, max(layout.len2 - 1, 0), p1, p2)
        res = vpr_solve(inp)
        if best is None or res.relative_residual < best[1].relative_residual:
            best = (trial_signs, res)
    trial_signs, res = best
    return SeparatedResult(
        f=res.f1 + res.f2,
        f1=res.f1,
        f2=res.f2,
        signs=trial_signs,
        tau_difference=int(tau_difference),
        residual=res.residual,
    )

"""scikit-learn style wrappers around sign retrieval and support estimation."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .solver import retrieve_sign
from .spectral import dft
from .support import estimate_support


def _as_rows(X):
    X = np.asarray(X)
    if np.iscomplexobj(X):
        raise ValueError("intensities must be real")
    one_d = X.ndim == 1
    X = check_array(X.reshape(1, -1) if one_d else X, dtype=np.float64)
    return X, one_d


class SignRetriever(TransformerMixin, BaseEstimator):
    """Recover the sign of real spectra from measured intensities.

    Each row of ``X`` is one intensity vector ``|F|**2``; a 1-D array is a
    single spectrum.  The transform is stateless apart from validation, so
    ``transform`` may be applied to spectra other than those seen in ``fit``.

    Parameters
    ----------
    tau : int
        Even support parameter of ``dft(F)``.
    sigma : float, default=0.0
        Noise level.
    output : {"signs", "signal"}, default="signs"
        What :meth:`transform` returns: the sign patterns or the
        reconstructions ``dft(sqrt(X) * signs)``.

    Attributes
    ----------
    signs_ : ndarray
        Patterns for the data passed to :meth:`fit`, same shape as ``X``.
    signal_ : ndarray
        Corresponding complex reconstructions.
    diagnostics_ : SignDiagnostics or list of SignDiagnostics
    n_features_in_ : int
    """

    def __init__(self, tau=0, sigma=0.0, output="signs"):
        self.tau = tau
        self.sigma = sigma
        self.output = output

    def _solve(self, X):
        X, one_d = _as_rows(X)
        signs = np.empty(X.shape, dtype=np.int64)
        diags = []
        for i, row in enumerate(X):
            signs[i], d = retrieve_sign(row, self.tau, self.sigma)
            diags.append(d)
        signal = np.array([dft(row) for row in np.sqrt(np.clip(X, 0, None)) * signs])
        if one_d:
            return signs[0], signal[0], diags[0]
        return signs, signal, diags

    def fit(self, X, y=None):
        if self.output not in ("signs", "signal"):
            raise ValueError(f"output must be 'signs' or 'signal', got {self.output!r}")
        self.signs_, self.signal_, self.diagnostics_ = self._solve(X)
        self.n_features_in_ = self.signs_.shape[-1]
        return self

    def transform(self, X):
        check_is_fitted(self, "signs_")
        X = np.asarray(X)
        if X.shape[-1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[-1]} features, expected {self.n_features_in_}")
        signs, signal, _ = self._solve(X)
        return signs if self.output == "signs" else signal


class SupportEstimator(BaseEstimator):
    """Estimate the support parameter of one spectrum by an out-of-support energy scan.

    Attributes
    ----------
    tau_ : int
        First minimiser of the scan.
    curve_ : list of (int, float)
        ``(tau_s, E_out)`` pairs.
    """

    def __init__(self, tau_min=0, tau_max=2, sigma=0.0, threads=1):
        self.tau_min = tau_min
        self.tau_max = tau_max
        self.sigma = sigma
        self.threads = threads

    def fit(self, X, y=None):
        X, one_d = _as_rows(X)
        if not one_d and X.shape[0] != 1:
            raise ValueError("SupportEstimator fits a single spectrum")
        self.tau_, self.curve_ = estimate_support(X[0], self.tau_min, self.tau_max, self.sigma, self.threads)
        self.n_features_in_ = X.shape[1]
        return self

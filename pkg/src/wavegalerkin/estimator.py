"""Estimator-style wrapper: ``fit`` analyzes a filter, ``transform`` applies R to sampled functions."""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_filter, check_grid_samples, check_positive_int
from .cycles import classify_cycles, default_max_period, match_peripheral, predict_peripheral
from .filters import qmf_residual, zeros
from .transfer import GridFn, apply_grid, eigen, transition_matrix

__all__ = ["RuelleSpectrum"]


class RuelleSpectrum(BaseEstimator):
    """Spectral summary of the transfer operator R of one filter.

    Parameters
    ----------
    max_period : int, optional
        Largest cycle period searched; defaults to the largest p with N^p - 1 <= 255.
    tol : float, default=1e-6
        Modulus tolerance for calling a transition eigenvalue peripheral.
    zero_tol : float, default=1e-9
        Threshold for zeros of m0 and for the m0-cycle test.

    Attributes
    ----------
    filter_ : Filter
    qmf_residual_ : float
    zeros_ : list of float
    cycles_ : list of Cycle
        Every cycle up to ``max_period``, flagged.
    m0_cycles_ : list of Cycle
    peripheral_ : PeripheralPrediction
    transition_ : TransitionMatrix
    eigenpairs_ : list of EigenPair
    eigenvalues_ : ndarray of complex
    spectral_radius_ : float
    orthonormal_ : bool
        True when {1} is the only m0-cycle and eigenvalue 1 is simple.

    Examples
    --------
    >>> est = RuelleSpectrum().fit("haar")
    >>> est.orthonormal_
    True
    """

    def __init__(self, max_period=None, tol=1e-6, zero_tol=1e-9):
        self.max_period = max_period
        self.tol = tol
        self.zero_tol = zero_tol

    def fit(self, X, y=None):
        """Analyze ``X``, a Filter, builtin name, JSON path or filter dict."""
        filt = check_filter(X)
        N = filt.scale
        max_period = self.max_period
        if max_period is None:
            max_period = default_max_period(N)
        max_period = check_positive_int(max_period, "max_period")

        self.filter_ = filt
        self.qmf_residual_ = qmf_residual(filt)
        self.zeros_ = zeros(filt, self.zero_tol)
        self.cycles_ = classify_cycles(filt, max_period, self.zero_tol)
        self.m0_cycles_ = [c for c in self.cycles_ if c.is_m0_cycle]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            self.peripheral_ = predict_peripheral(filt, max_period, self.zero_tol)
        self.transition_ = transition_matrix(filt)
        self.eigenpairs_ = eigen(self.transition_)
        self.eigenvalues_ = np.array([e.value for e in self.eigenpairs_])
        self.spectral_radius_ = float(np.max(np.abs(self.eigenvalues_)))
        self.cross_check_ = match_peripheral(self.peripheral_, self.eigenvalues_, self.tol)

        ones = int(np.sum(np.abs(self.eigenvalues_ - 1) < self.tol))
        trivial = [c for c in self.m0_cycles_ if c.period == 1 and c.turns[0] == 0]
        self.orthonormal_ = len(self.m0_cycles_) == 1 and len(trivial) == 1 and ones == 1
        return self

    def transform(self, X):
        """Apply R row-wise to samples on the uniform grid.

        Each row of length M holds f(2 pi j / M); the output row of length
        M / N holds (R f)(2 pi j / (M / N)).
        """
        check_is_fitted(self, "transition_")
        N = self.filter_.scale
        X = check_grid_samples(X, N)
        return np.vstack([apply_grid(self.filter_, GridFn(row)).samples for row in X])

    def peripheral_eigenvalues(self) -> np.ndarray:
        """Transition eigenvalues within ``tol`` of the unit circle."""
        check_is_fitted(self, "eigenvalues_")
        v = self.eigenvalues_
        return v[np.abs(np.abs(v) - 1) < self.tol]

"""The transfer operator R f(z) = (1/N) sum_{w^N = z} |m0|^2(w) f(w).

Three carriers are supported: exact Laurent coefficient vectors
(:class:`TrigPoly`), samples on uniform grids (:class:`GridFn`) and lazily
evaluated closures (:class:`CircleFn`). On trigonometric polynomials of degree
at most ``K = ceil(M / (N - 1))`` the operator is the finite matrix
``T[k, m] = b_{Nk - m}`` built by :func:`transition_matrix`.

Trigonometric polynomials use the same sign convention as the filter:
``f(theta) = sum_n c_n exp(-i n theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ConvergenceError, ValidationError
from .filters import TWO_PI, Filter, autocorrelation, modulus_squared

__all__ = [
    "TrigPoly",
    "GridFn",
    "CircleFn",
    "TransitionMatrix",
    "EigenPair",
    "apply_poly",
    "apply_grid",
    "apply_circlefn",
    "transition_matrix",
    "eigen",
    "spectral_radius",
    "power_growth",
    "invariant_degree",
]


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Coefficients ``c_n`` for ``n = -K .. K`` of ``sum_n c_n exp(-i n theta)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValidationError("TrigPoly needs an odd-length symmetric coefficient window")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        """Half-width of the stored index window."""
        return (self.coeffs.size - 1) // 2

    @property
    def degree(self) -> int:
        """Largest |n| with a nonzero coefficient (0 for the zero polynomial)."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.K)))

    @classmethod
    def from_dict(cls, terms: dict[int, complex], K: int | None = None) -> "TrigPoly":
        K = max((abs(n) for n in terms), default=0) if K is None else K
        c = np.zeros(2 * K + 1, dtype=complex)
        for n, v in terms.items():
            c[n + K] = v
        return cls(c)

    @classmethod
    def random(cls, K: int, rng: np.random.Generator) -> "TrigPoly":
        return cls(rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))

    def padded(self, K: int) -> "TrigPoly":
        if K < self.K:
            if self.degree > K:
                raise ValidationError(f"cannot truncate degree {self.degree} polynomial to {K}")
            return TrigPoly(self.coeffs[self.K - K : self.K + K + 1])
        pad = K - self.K
        return TrigPoly(np.pad(self.coeffs, (pad, pad)))

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.K:
            return 0j
        return complex(self.coeffs[n + self.K])

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = np.arange(-self.K, self.K + 1)
        return np.exp(-1j * np.multiply.outer(theta, n)) @ self.coeffs


@dataclass(frozen=True, eq=False)
class GridFn:
    """Samples at ``theta_j = 2 pi (j + s) / M`` with ``s = 1/2`` when ``offset`` is set.

    The half-step offset keeps every sample off the angle 0, which matters for
    functions built from objects singular at the origin.
    """

    samples: np.ndarray
    offset: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 2:
            raise ValidationError("GridFn needs at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.size

    @property
    def angles(self) -> np.ndarray:
        return grid_angles(self.M, self.offset)

    @classmethod
    def sample(cls, f: Callable, M: int, offset: bool = False) -> "GridFn":
        return cls(np.asarray(f(grid_angles(M, offset)), dtype=complex), offset)

    def sup(self) -> float:
        return float(np.max(np.abs(self.samples)))


def grid_angles(M: int, offset: bool = False) -> np.ndarray:
    return TWO_PI * (np.arange(M) + (0.5 if offset else 0.0)) / M


class CircleFn:
    """A 2 pi-periodic function given by a vectorized evaluation callable.

    The callable must be deterministic and free of hidden state; it receives
    an ndarray of angles and returns an array of the same shape.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], label: str = ""):
        self._func = func
        self.label = label

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.asarray(self._func(theta), dtype=complex)

    def sample(self, M: int, offset: bool = False) -> GridFn:
        return GridFn(self(grid_angles(M, offset)), offset)

    def __add__(self, other: "CircleFn") -> "CircleFn":
        return CircleFn(lambda t: self(t) + other(t))

    def __rmul__(self, c: complex) -> "CircleFn":
        return CircleFn(lambda t: c * self(t))

    def __repr__(self):
        return f"CircleFn({self.label})" if self.label else "CircleFn()"


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Matrix of R on polynomials of degree <= K; rows and columns indexed ``-K .. K``."""

    matrix: np.ndarray
    K: int
    scale: int

    @property
    def dim(self) -> int:
        return 2 * self.K + 1

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "scale": self.scale,
            "indices": list(range(-self.K, self.K + 1)),
            "rows": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
        }


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float

    def to_dict(self, with_vector: bool = True) -> dict:
        d = {
            "value": [float(self.value.real), float(self.value.imag)],
            "modulus": float(abs(self.value)),
            "residual": float(self.residual),
        }
        if with_vector:
            d["vector"] = [[float(v.real), float(v.imag)] for v in self.vector]
        return d


def invariant_degree(filt: Filter) -> int:
    """Smallest K with R mapping degree <= K polynomials into themselves."""
    return math.ceil(filt.width / (filt.scale - 1))


def apply_poly(filt: Filter, f: TrigPoly) -> TrigPoly:
    """R f computed exactly on Laurent coefficients: (R f)_k = sum_m b_{Nk - m} c_m."""
    b = autocorrelation(filt)
    N = filt.scale
    # d_n = sum_m b_{n-m} c_m, indexed n = -(M + K) .. M + K
    d = np.convolve(b.coeffs, f.coeffs)
    half = b.M + f.K
    kmax = half // N
    k = np.arange(-kmax, kmax + 1)
    return TrigPoly(d[N * k + half])


def apply_grid(filt: Filter, f: GridFn) -> GridFn:
    """R f on the coarse grid of size M/N from samples on the fine grid of size M.

    Every preimage of a coarse grid point is itself a fine grid point, so the
    result is exact up to rounding.
    """
    N = filt.scale
    M = f.M
    if M % N:
        raise ValidationError(f"grid size {M} is not divisible by the scale {N}")
    Mc = M // N
    w = modulus_squared(filt, grid_angles(M, f.offset))
    # fine index j + k*Mc is the k-th preimage of coarse index j
    prod = (w * f.samples).reshape(N, Mc)
    return GridFn(prod.sum(axis=0) / N, f.offset)


def apply_circlefn(filt: Filter, f: Callable) -> CircleFn:
    """Closure for R f; composes, so ``apply_circlefn`` n times gives R^n f."""
    N = filt.scale
    shifts = TWO_PI * np.arange(N)

    def rf(theta):
        theta = np.asarray(theta, dtype=float)
        pre = (theta[..., None] + shifts) / N
        vals = modulus_squared(filt, pre) * np.asarray(f(pre), dtype=complex)
        return vals.sum(axis=-1) / N

    return CircleFn(rf, "R f")


def transition_matrix(filt: Filter) -> TransitionMatrix:
    b = autocorrelation(filt)
    N = filt.scale
    K = invariant_degree(filt)
    idx = np.arange(-K, K + 1)
    T = b.at(N * idx[:, None] - idx[None, :])
    return TransitionMatrix(T, K, N)


def eigen(T: TransitionMatrix | np.ndarray, max_iter: int = 500) -> list[EigenPair]:
    """All eigenpairs sorted by decreasing modulus.

    Delegates to LAPACK's dense nonsymmetric solver. Vectors are normalized to
    unit 2-norm with their largest entry made real and positive so output is
    reproducible.
    """
    A = T.matrix if isinstance(T, TransitionMatrix) else np.asarray(T, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValidationError("eigen needs a non-empty square matrix")
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"eigenvalue iteration did not converge within {max_iter} iterations: {exc}"
        ) from None
    pairs = []
    for lam, v in zip(vals, vecs.T):
        v = v / np.linalg.norm(v)
        j = int(np.argmax(np.abs(v)))
        v = v * (abs(v[j]) / v[j])
        res = float(np.linalg.norm(A @ v - lam * v))
        pairs.append(EigenPair(complex(lam), v, res))
    # round the sort key so ties (e.g. repeated eigenvalues) order stably
    pairs.sort(key=lambda e: (-round(abs(e.value), 9), round(np.angle(e.value), 9)))
    return pairs


def spectral_radius(filt: Filter) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(transition_matrix(filt).matrix))))


def power_growth(filt: Filter, f: Callable, n: int, M: int = 256) -> list[float]:
    """Sup norms of R^j f, j = 0..n, estimated on a grid of size M."""
    if n > 12:
        raise ValidationError("power_growth supports n <= 12")
    theta = grid_angles(M)
    out = []
    g = f
    for j in range(n + 1):
        out.append(float(np.max(np.abs(np.asarray(g(theta), dtype=complex)))))
        if j < n:
            g = apply_circlefn(filt, g)
    return out

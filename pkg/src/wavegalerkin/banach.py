"""Eigenfunctions in L^inf and norm behaviour in L^p.

Unit-modulus eigenvalues in L^inf come from self-similar functions
``f(x) = f(x / N) / lam`` on the real line: ``h_f = Per(f |phi|^2)`` satisfies
``R h_f = lam h_f``. In L^p the operator norm is at most N^(1/p); the bound is
approached by concentrating mass where |m0|^2 = N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constructors import InfiniteProduct, ProductParams, scaling_product
from .exceptions import ConvergenceError, ValidationError
from .filters import TWO_PI, Filter
from .transfer import GridFn, TrigPoly, apply_grid, grid_angles, transition_matrix

__all__ = [
    "SelfSimilarFn",
    "HfResult",
    "LpReport",
    "ProbeReport",
    "self_similar",
    "indicator",
    "hf_build",
    "hf_build_many",
    "hf_family_independence",
    "lp_norm",
    "lp_contraction_check",
    "lp_sharpness_demo",
    "sharpness_table",
    "peripheral_nonexistence_probe",
]


def _annulus_index(ax: np.ndarray, N: int) -> np.ndarray:
    """Integer l with N^l <= ax < N^(l+1), robust to rounding in the logarithm."""
    l = np.floor(np.log(ax) / math.log(N)).astype(np.int64)
    lo = np.power(float(N), l)
    l = np.where(lo > ax, l - 1, l)
    l = np.where(np.power(float(N), l + 1) <= ax, l + 1, l)
    return l


def self_similar(lam: complex, g: Callable, x, scale: int = 2):
    """Extend a seed g on [-N, -1] U [1, N] to f on R \\ {0} with f(x) = f(x / N) / lam.

    For N^l <= |x| < N^(l+1) the value is lam^(-l) g(x / N^l).
    """
    lam = complex(lam)
    if abs(abs(lam) - 1) > 1e-12:
        raise ValidationError(f"|lambda| = {abs(lam)} must be 1")
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ValidationError("self-similar functions are undefined at x = 0")
    l = _annulus_index(np.abs(x), scale)
    y = x / np.power(float(scale), l)
    return np.asarray(g(y), dtype=complex) * lam ** (-l.astype(float))


class SelfSimilarFn:
    """f(x) = lam^(-l) g(x / N^l) on N^l <= |x| < N^(l+1)."""

    def __init__(self, lam: complex, seed: Callable, scale: int = 2):
        lam = complex(lam)
        if abs(abs(lam) - 1) > 1e-12:
            raise ValidationError(f"|lambda| = {abs(lam)} must be 1")
        self.lam = lam
        self.seed = seed
        self.scale = int(scale)

    def __call__(self, x):
        return self_similar(self.lam, self.seed, x, self.scale)


def indicator(lo: float, hi: float) -> Callable:
    """Seed equal to 1 on [lo, hi) and 0 elsewhere."""

    def g(y):
        y = np.asarray(y, dtype=float)
        return ((y >= lo) & (y < hi)).astype(float)

    return g


@dataclass(eq=False)
class HfResult:
    """h_f = Per(f |phi|^2) sampled on an offset grid, with its eigen-residual."""

    lam: complex
    samples: GridFn
    fine: GridFn = field(repr=False)
    residual: float
    tail: float

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "residual": self.residual,
            "tail_estimate": self.tail,
            "sup": self.samples.sup(),
        }


def _phi2_translates(phi: InfiniteProduct, theta, K):
    v = phi.on_translates(theta, K)
    return v.real**2 + v.imag**2


def _hf_samples(filt, fs: Sequence[SelfSimilarFn], params, phi=None):
    """Fine offset-grid samples of Per(f |phi|^2) for several f sharing one |phi|^2 table."""
    N = filt.scale
    M = params.grid
    K = params.per_range
    phi = phi if phi is not None else scaling_product(filt, params)
    theta = grid_angles(M * N, offset=True)
    x = theta[:, None] + TWO_PI * np.arange(-K, K + 1)
    phi2 = _phi2_translates(phi, theta, K)
    h, q = K // 2, K // 4
    out = []
    for f in fs:
        terms = f(x) * phi2
        full = terms.sum(axis=1)
        half = terms[:, K - h : K + h + 1].sum(axis=1)
        quarter = terms[:, K - q : K + q + 1].sum(axis=1)
        out.append((full, full - half, half - quarter))
    return out


def hf_build(filt: Filter, f: SelfSimilarFn, params: ProductParams = ProductParams()) -> HfResult:
    """Eigenfunction h_f = Per(f |phi|^2) for the unit-modulus eigenvalue of ``f``.

    Sampled on the half-step offset grid so no translate x + 2 k pi hits 0.
    The residual ||R h_f - lam h_f||_inf is computed with :func:`apply_grid` and
    is limited by the periodization tail.
    """
    return hf_build_many(filt, [f], params)[0]


def hf_build_many(
    filt: Filter, fs: Sequence[SelfSimilarFn], params: ProductParams = ProductParams()
) -> list[HfResult]:
    """:func:`hf_build` for several self-similar functions sharing one |phi|^2 table."""
    N = filt.scale
    for f in fs:
        if f.scale != N:
            raise ValidationError("self-similar function and filter use different scales")
    phi = scaling_product(filt, params)
    samples = _hf_samples(filt, fs, params, phi)
    if N % 2:
        # coarse offset point j sits at fine offset index N j + (N - 1) / 2
        coarse = [GridFn(full[(N - 1) // 2 :: N], offset=True) for full, _, _ in samples]
    else:
        coarse = _coarse_offset(filt, fs, params, phi)
    out = []
    for f, (full, d1, d0), c in zip(fs, samples, coarse):
        tail, prev = float(np.max(np.abs(d1))), float(np.max(np.abs(d0)))
        if tail > 1e-13 and tail >= prev:
            raise ConvergenceError(
                f"h_f periodization tail not decreasing ({prev:.3e} -> {tail:.3e})"
            )
        fine = GridFn(full, offset=True)
        res = float(np.max(np.abs(apply_grid(filt, fine).samples - f.lam * c.samples)))
        out.append(HfResult(f.lam, c, fine, res, tail))
    return out


def _coarse_offset(filt, fs, params, phi=None):
    coarse_params = ProductParams(params.terms, params.per_range, params.grid // filt.scale)
    return [GridFn(full, offset=True) for full, _, _ in _hf_samples(filt, fs, coarse_params, phi)]


def hf_family_independence(
    filt: Filter,
    lam: complex,
    seeds: Sequence[Callable],
    params: ProductParams = ProductParams(),
    rtol: float = 1e-8,
) -> dict:
    """Numerical rank of the Gram matrix of h_{f_1}, ..., h_{f_q} on the grid."""
    fs = [SelfSimilarFn(lam, g, filt.scale) for g in seeds]
    samples = _hf_samples(filt, fs, params)
    H = np.array([full for full, _, _ in samples])
    G = (H.conj() @ H.T) * (TWO_PI / H.shape[1])
    ev = np.linalg.eigvalsh(G)
    rank = int(np.sum(ev > rtol * ev.max())) if ev.max() > 0 else 0
    return {
        "gram": G,
        "eigenvalues": ev[::-1],
        "rank": rank,
        "expected": len(fs),
        "norms": np.sqrt(np.abs(np.diag(G))),
    }


def lp_norm(f, p: float, normalized: bool = False) -> float:
    """(sum_j |f_j|^p 2 pi / M)^(1/p); with ``normalized`` the measure is d theta / 2 pi."""
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    s = f.samples if isinstance(f, GridFn) else np.asarray(f)
    w = 1.0 / s.size if normalized else TWO_PI / s.size
    return float((np.sum(np.abs(s) ** p) * w) ** (1.0 / p))


@dataclass
class LpReport:
    p: float
    ratios: list[float]
    bound: float
    sharpness: float | None = None
    label: str = "random trials"

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.bound * (1 + 1e-6)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "trials": len(self.ratios),
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "within_bound": self.ok,
            "sharpness": self.sharpness,
        }


def _random_trial(rng, M, filt, kind):
    if kind == 0:
        return rng.standard_normal(M) + 1j * rng.standard_normal(M)
    if kind == 1:
        K = int(rng.integers(1, 9))
        return TrigPoly.random(K, rng)(grid_angles(M))
    # concentrated bump near a random point: the near-extremal case
    c = rng.uniform(0, TWO_PI)
    w = rng.uniform(2 * TWO_PI / M, 0.3)
    d = np.abs(np.mod(grid_angles(M) - c + np.pi, TWO_PI) - np.pi)
    return np.maximum(0.0, 1 - d / w) + 0j


def lp_contraction_check(
    filt: Filter, p: float, trials: int = 100, M: int = 512, seed: int = 0
) -> LpReport:
    """Ratios ||R f||_p / ||f||_p over random grid functions; all must stay below N^(1/p)."""
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    N = filt.scale
    Mf = M * N
    rng = np.random.default_rng(seed)
    ratios = []
    for t in range(trials):
        f = GridFn(_random_trial(rng, Mf, filt, t % 3))
        ratios.append(lp_norm(apply_grid(filt, f), p) / lp_norm(f, p))
    return LpReport(p, ratios, N ** (1.0 / p))


def lp_sharpness_demo(
    filt: Filter, p: float, eps: float, grid: int | None = None, center: float = 0.0
) -> float:
    """||R f||_p / ||f||_p for f the indicator of the arc of half-width eps at ``center``.

    With ``center`` on an m0-cycle (|m0|^2 = N there) the ratio tends to N^(1/p) as eps -> 0.
    """
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    if grid is None:
        grid = 1 << math.ceil(math.log2(64 / eps))
        grid = max(grid, 2 * filt.scale)
        grid -= grid % filt.scale
    if grid * eps < 64:
        raise ValidationError(f"grid {grid} too coarse for eps = {eps:g}; need M >= {64 / eps:.0f}")
    if grid % filt.scale:
        raise ValidationError(f"grid size {grid} is not divisible by the scale {filt.scale}")
    d = np.abs(np.mod(grid_angles(grid) - center + np.pi, TWO_PI) - np.pi)
    f = GridFn((d <= eps).astype(complex))
    return lp_norm(apply_grid(filt, f), p) / lp_norm(f, p)


def sharpness_table(filt: Filter, p: float, eps_list: Sequence[float]) -> list[dict]:
    bound = filt.scale ** (1.0 / p)
    rows = []
    for eps in eps_list:
        r = lp_sharpness_demo(filt, p, eps)
        rows.append({"p": p, "epsilon": eps, "ratio": r, "bound": bound, "gap": bound - r})
    return rows


@dataclass
class ProbeReport:
    p: float
    lam: complex
    sigma_min: float
    sigma_min_circle: float
    label: str = (
        "subspace probe: smallest singular value of T - lambda I on polynomials of degree <= K; "
        "evidence, not a proof, that no eigenvalue has modulus N^(1/p)"
    )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": [self.lam.real, self.lam.imag],
            "sigma_min": self.sigma_min,
            "sigma_min_over_circle": self.sigma_min_circle,
            "label": self.label,
        }


def peripheral_nonexistence_probe(
    filt: Filter, p: float, lam: complex | None = None, n_phases: int = 360
) -> ProbeReport:
    """Smallest singular value of T - lam I, at lam and minimized over |lam|'s circle.

    The coefficient 2-norm equals the L^2 norm up to a constant, so for p = 2
    this is exactly min ||R f - lam f|| / ||f|| over the polynomial subspace.
    """
    if lam is None:
        lam = filt.scale ** (1.0 / p)
    lam = complex(lam)
    T = transition_matrix(filt).matrix
    I = np.eye(T.shape[0])
    circle = abs(lam) * np.exp(1j * TWO_PI * np.arange(n_phases) / n_phases)
    zs = np.append(lam, circle)
    # one batched SVD over the whole circle
    smin = np.linalg.svd(T[None] - zs[:, None, None] * I, compute_uv=False)[:, -1]
    return ProbeReport(p, lam, float(smin[0]), float(smin.min()))

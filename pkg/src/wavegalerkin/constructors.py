"""Explicit eigenfunctions of the transfer operator.

* :func:`scaling_product` and :func:`peripheral_phi` build truncated infinite
  products on the real line; :func:`periodize` folds ``|phi|^2`` onto the circle.
* :func:`peripheral_basis` assembles unit-modulus eigenfunctions from m0-cycles.
* :func:`kernel_function` builds a continuous ``f`` with ``R f = 0`` supported on
  two arcs; :func:`h_series` turns it into an eigenfunction for any ``|lambda| < 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C

from .cycles import Cycle, predict_peripheral
from .exceptions import ConvergenceError, NotAnEigenvalueError, ValidationError
from .filters import TWO_PI, Filter, modulus_squared, qmf_residual, zeros
from .transfer import CircleFn, GridFn, apply_grid, grid_angles

__all__ = [
    "ProductParams",
    "InfiniteProduct",
    "Periodization",
    "PeripheralBasis",
    "KernelFn",
    "HSeries",
    "iterated_filter",
    "scaling_product",
    "periodize",
    "peripheral_phi",
    "peripheral_basis",
    "kernel_function",
    "h_series",
    "independence_matrix",
    "h_family_gram",
    "discrete_slope",
    "verification_grid",
]


@dataclass(frozen=True)
class ProductParams:
    """Truncation controls.

    terms : number of factors kept in each infinite product.
    per_range : periodization sums run over ``|k| <= per_range``.
    grid : verification grid size M.
    """

    terms: int = 40
    per_range: int = 256
    grid: int = 1024

    def __post_init__(self):
        if self.terms < 10:
            raise ValidationError("product truncation needs terms >= 10")
        if self.per_range < 16:
            raise ValidationError("periodization needs per_range >= 16")
        if self.grid < 2:
            raise ValidationError("grid must have at least 2 points")


def iterated_filter(filt: Filter, n: int) -> CircleFn:
    """m0^(n)(xi) = m0(xi) m0(N xi) ... m0(N^(n-1) xi)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    N = filt.scale

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape, dtype=complex)
        x = np.mod(xi, TWO_PI)
        for _ in range(n):
            out = out * filt(x)
            x = np.mod(N * x, TWO_PI)
        return out

    return CircleFn(f, f"m0^({n})")


def _chebval_complex(y, c):
    # two real Clenshaw passes are cheaper than one complex pass over a real argument
    return C.chebval(y, c.real) + 1j * C.chebval(y, c.imag)


class InfiniteProduct:
    """x -> prod_{l=1}^{terms} factor(x / step^l), with factor(0) close to 1.

    For large |x| the leading factors are evaluated directly until the argument
    falls into ``[-window, window]``; the remaining factors form a smooth function
    there, which is replaced by a Chebyshev interpolant of the same truncated
    product. The interpolants are built eagerly and checked against direct
    evaluation, so evaluation is reentrant.
    """

    def __init__(self, factor: Callable, step: float, terms: int, window: float = 1.0, deg: int = 24):
        self.factor = factor
        self.step = float(step)
        self.terms = int(terms)
        self._log_step = math.log(self.step)
        self.window, self._tails = self._build_tails(window, deg)

    def direct(self, x) -> np.ndarray:
        """Plain term-by-term product, used as the reference."""
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape, dtype=complex)
        for l in range(1, self.terms + 1):
            out = out * self.factor(x / self.step**l)
        return out

    def _partial(self, y, n):
        out = np.ones(np.shape(y), dtype=complex)
        for l in range(1, n + 1):
            out = out * self.factor(y / self.step**l)
        return out

    def _build_tails(self, window, deg):
        rng = np.random.default_rng(12345)
        for _ in range(30):
            tails = [
                C.chebinterpolate(lambda t, n=n: self._partial(t * window, n), deg)
                for n in range(self.terms + 1)
            ]
            probe = rng.uniform(-1.0, 1.0, 33)
            err = max(
                float(np.max(np.abs(C.chebval(probe, tails[n]) - self._partial(probe * window, n))))
                for n in (self.terms, max(self.terms // 2, 1))
            )
            if err < 1e-13:
                return window, tails
            window /= 2.0
        raise ConvergenceError("could not build an accurate interpolant for the product tail")

    def _lead_counts(self, ax):
        # s = number of leading factors taken directly, so |x| / step^s <= window
        with np.errstate(divide="ignore"):
            s = np.ceil(np.log(ax / self.window) / self._log_step)
        return np.clip(np.nan_to_num(s, neginf=0.0), 0, self.terms).astype(int)

    def _finish(self, x, s, out):
        for n_lead in np.unique(s):
            if n_lead >= self.terms:
                continue
            sel = s == n_lead
            y = x[sel] / (self.step**n_lead * self.window)
            out[sel] *= _chebval_complex(y, self._tails[self.terms - n_lead])
        exact0 = x == 0
        if exact0.any():
            out[exact0] = self.direct(0.0)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        s = self._lead_counts(np.abs(x))
        out = np.ones(x.shape, dtype=complex)
        for l in range(1, int(s.max(initial=0)) + 1):
            sel = s >= l
            out[sel] *= self.factor(x[sel] / self.step**l)
        return self._finish(x, s, out).reshape(shape)

    def on_translates(self, theta, K: int) -> np.ndarray:
        """Values at theta_i + 2 pi k for |k| <= K, shape (len(theta), 2K + 1).

        Same result as ``self(theta[:, None] + 2 pi k)`` up to interpolation error.
        Every point takes the same number of leading factors (extra exact factors
        never hurt), and the l-th factor depends on k only through k mod step^l
        (the factor is 2 pi-periodic), so small-l factors are computed once per
        residue and gathered.
        """
        theta = np.asarray(theta, dtype=float).ravel()
        k = np.arange(-K, K + 1)
        # one lead count for the whole table; blocks of rows keep the work in cache
        x_max = np.abs(theta).max(initial=0.0) + TWO_PI * K
        s = int(self._lead_counts(np.array([x_max]))[0])
        rows = max(1, self._BLOCK // (2 * K + 1))
        out = np.empty((theta.size, 2 * K + 1), dtype=complex)
        for i in range(0, theta.size, rows):
            out[i : i + rows] = self._translate_block(theta[i : i + rows], k, s)
        return out

    _BLOCK = 1 << 14

    def _translate_block(self, theta, k, s):
        x = theta[:, None] + TWO_PI * k
        out = np.ones(x.shape, dtype=complex)
        step_int = int(round(self.step))
        for l in range(1, s + 1):
            sl = self.step**l
            if step_int == self.step and step_int**l <= k.size:
                r = step_int**l
                base = self.factor((theta[:, None] + TWO_PI * np.arange(r)) / sl)
                out *= base[:, np.mod(k, r)]
            else:
                out *= self.factor(x / sl)
        if s < self.terms:
            out *= _chebval_complex(x / (self.step**s * self.window), self._tails[self.terms - s])
        zero = x == 0
        if zero.any():
            out[zero] = self.direct(0.0)
        return out

    def tail_deviation(self, x_max: float) -> float:
        """|factor - 1| at the last kept term for |x| = x_max: a truncation diagnostic."""
        t = x_max / self.step**self.terms
        return float(max(abs(self.factor(np.array(t)) - 1), abs(self.factor(np.array(-t)) - 1)))


def scaling_product(filt: Filter, params: ProductParams = ProductParams()) -> InfiniteProduct:
    """Truncated product prod_n m0(x / N^n) / sqrt(N); equals 1 at x = 0."""
    N = filt.scale
    root = math.sqrt(N)
    if abs(filt(0.0) - root) > 1e-10:
        raise ValidationError(f"m0(0) = {complex(filt(0.0))} but must equal sqrt(N); call normalize()")
    if qmf_residual(filt) > 1e-8:
        warnings.warn("filter does not satisfy R1 = 1; product may not be square integrable",
                      RuntimeWarning, stacklevel=2)
    return InfiniteProduct(lambda t: filt(t) / root, N, params.terms)


class Periodization(CircleFn):
    """theta -> sum_{|k| <= K} func(theta + 2 pi k) with doubling-delta tail estimates."""

    def __init__(self, func: Callable, per_range: int, label: str = "Per", translates: Callable | None = None):
        self.func = func
        self.per_range = int(per_range)
        self._translates = translates
        super().__init__(self._eval, label)

    def _terms(self, theta):
        K = self.per_range
        if self._translates is not None:
            flat = np.asarray(theta).ravel()
            return self._translates(flat, K).reshape(np.shape(theta) + (2 * K + 1,))
        k = np.arange(-K, K + 1)
        return self.func(theta[..., None] + TWO_PI * k)

    def _eval(self, theta):
        return self.evaluate(theta)[0]

    def evaluate(self, theta):
        """(S_K, S_K - S_{K/2}, S_{K/2} - S_{K/4}) at the given angles."""
        theta = np.asarray(theta, dtype=float)
        vals = self._terms(theta)
        K = self.per_range
        h, q = K // 2, K // 4
        s_full = vals.sum(axis=-1)
        s_half = vals[..., K - h : K + h + 1].sum(axis=-1)
        s_quarter = vals[..., K - q : K + q + 1].sum(axis=-1)
        return s_full, s_full - s_half, s_half - s_quarter

    def tail(self, theta):
        """Last doubling delta S_K - S_{K/2}, used as the tail estimate."""
        return self.evaluate(theta)[1]

    def extrapolated(self, theta):
        """S_K plus the doubling delta: removes the leading 1/K tail of |phi|^2 ~ 1/x^2 decay."""
        s, d1, _ = self.evaluate(theta)
        return s + d1

    def check_convergence(self, n_probe: int = 64) -> tuple[float, float]:
        """Sup-norm doubling deltas on an offset probe grid; raises if they do not decrease."""
        _, d1, d0 = self.evaluate(grid_angles(n_probe, offset=True))
        last, prev = float(np.max(np.abs(d1))), float(np.max(np.abs(d0)))
        if last > 1e-13 and last >= prev:
            raise ConvergenceError(
                f"periodization tail is not decreasing: delta(K/4->K/2) = {prev:.3e}, "
                f"delta(K/2->K) = {last:.3e}"
            )
        return prev, last


def periodize(phi: Callable, params: ProductParams = ProductParams()) -> Periodization:
    """Per|phi|^2 truncated at ``|k| <= params.per_range``."""

    def sq(x):
        v = phi(x)
        return (v.real**2 + v.imag**2).astype(complex)

    def sq_translates(theta, K):
        v = phi.on_translates(theta, K)
        return (v.real**2 + v.imag**2).astype(complex)

    translates = sq_translates if isinstance(phi, InfiniteProduct) else None
    per = Periodization(sq, params.per_range, "Per|phi|^2", translates)
    per.check_convergence()
    return per


def _cycle_phase(filt: Filter, cycle: Cycle) -> complex:
    m = filt(cycle.angles)
    return complex(np.prod(m / np.abs(m)))


def peripheral_phi(filt: Filter, cycle: Cycle, k: int, params: ProductParams = ProductParams()) -> InfiniteProduct:
    """Product for the k-th point (1-based) of an m0-cycle of period p.

    Each factor is exp(-i theta) m0^(p)(beta_k + t) / N^(p/2), where theta is the
    accumulated phase of m0 around the cycle, so factors tend to 1 as t -> 0.
    """
    if not cycle.is_m0_cycle:
        raise ValidationError(f"cycle {cycle} is not an m0-cycle")
    p = cycle.period
    if not 1 <= k <= p:
        raise ValidationError(f"k must lie in 1..{p}")
    N = filt.scale
    phase = _cycle_phase(filt, cycle)
    norm = np.conj(phase) / N ** (p / 2)
    # N^j beta_k reduced exactly: it is the angle of z_{k+j}
    base = [TWO_PI * float(cycle.turns[(k - 1 + j) % p]) for j in range(p)]

    def factor(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, norm, dtype=complex)
        for j in range(p):
            out = out * filt(base[j] + N**j * t)
        return out

    return InfiniteProduct(factor, float(N**p), params.terms)


@dataclass(eq=False)
class PeripheralBasis:
    """Eigenfunctions for a unit-modulus lambda, one per contributing m0-cycle."""

    lam: complex
    cycles: list[Cycle]
    functions: list[GridFn]
    residuals: list[float]
    tails: list[float]
    fine: list[GridFn] = field(repr=False)

    @property
    def gram(self) -> np.ndarray:
        """Normalized Gram matrix of the basis on the grid."""
        F = np.array([g.samples / np.linalg.norm(g.samples) for g in self.functions])
        return F.conj() @ F.T

    @property
    def gram_det(self) -> float:
        return float(abs(np.linalg.det(self.gram)))

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "cycles": [c.to_dict() for c in self.cycles],
            "residuals": self.residuals,
            "tail_estimates": self.tails,
            "gram_det": self.gram_det,
        }


def _peripheral_combination(filt, cycle, lam, params, theta, cache=None):
    """Sum_k lam^(-k+1) g_k(theta) and its doubling delta, g_k = Per|phi_k|^2(. - beta_k).

    ``cache`` maps (cycle turns, k) to the sampled g_k so that several
    eigenvalues sharing a cycle reuse one periodization.
    """
    cache = {} if cache is None else cache
    total = np.zeros(theta.shape, dtype=complex)
    delta = np.zeros(theta.shape, dtype=complex)
    for k in range(1, cycle.period + 1):
        key = (cycle.turns, k, theta.size)
        if key not in cache:
            per = periodize(peripheral_phi(filt, cycle, k, params), params)
            beta = TWO_PI * float(cycle.turns[k - 1])
            cache[key] = per.evaluate(np.mod(theta - beta, TWO_PI))[:2]
        s, d = cache[key]
        c = lam ** (-(k - 1))
        total += c * s
        delta += c * d
    return total, delta


def peripheral_basis(
    filt: Filter,
    lam: complex,
    params: ProductParams = ProductParams(),
    max_period: int | None = None,
    cache: dict | None = None,
) -> PeripheralBasis:
    """Eigenfunctions of R for a peripheral eigenvalue, sampled on ``params.grid`` points.

    For each m0-cycle with lam^p = 1 the basis function is
    sum_{k=1}^{p} lam^(-k+1) g_k with g_k(x) = Per|phi_k|^2(x - beta_k).
    The residual ||R g - lam g||_inf is measured through :func:`apply_grid`.
    Pass the same ``cache`` dict across calls to share periodizations between
    eigenvalues of one filter.
    """
    lam = complex(lam)
    if abs(abs(lam) - 1) > 1e-9:
        raise ValidationError(f"|lambda| = {abs(lam)} is not 1")
    pred = predict_peripheral(filt, max_period)
    contributing = [c for e in pred.eigenvalues for c in e.cycles if abs(e.value - lam) < 1e-9]
    if not contributing:
        raise NotAnEigenvalueError(
            f"lambda = {lam} is not a peripheral eigenvalue: no m0-cycle of period "
            f"<= {pred.max_period} has lambda**p == 1"
        )
    M = params.grid
    N = filt.scale
    theta = grid_angles(M * N)
    funcs, fine, res, tails = [], [], [], []
    for c in contributing:
        vals, delta = _peripheral_combination(filt, c, lam, params, theta, cache)
        gf = GridFn(vals)
        coarse = GridFn(vals[::N])
        funcs.append(coarse)
        fine.append(gf)
        res.append(float(np.max(np.abs(apply_grid(filt, gf).samples - lam * coarse.samples))))
        tails.append(float(np.max(np.abs(delta[::N]))))
    return PeripheralBasis(lam, contributing, funcs, res, tails, fine)


def discrete_slope(g: GridFn) -> float:
    """max |g_{j+1} - g_j| / h on the periodic grid: a sampled Lipschitz constant."""
    s = g.samples
    return float(np.max(np.abs(np.roll(s, -1) - s)) / (TWO_PI / g.M))


def _wrap(d):
    """Angle difference mapped to (-pi, pi]."""
    return np.mod(d + np.pi, TWO_PI) - np.pi


def _circ_dist(a, b) -> float:
    return float(abs(_wrap(a - b)))


class KernelFn(CircleFn):
    """Continuous f with R f = 0: a tent at z_0 plus its compensating copy on the rotated arc.

    On ``[beta_0 - delta, beta_0 + delta]`` f is the tent 1 - |theta - beta_0| / delta.
    On the arc rotated by 2 pi / N,
    f(z) = -|m0|^2(e^{-2 pi i/N} z) f(e^{-2 pi i/N} z) / |m0|^2(z),
    which cancels the tent in every sum over the N preimages. Elsewhere f = 0.
    """

    def __init__(self, filt: Filter, cycle: Cycle, delta: float):
        self.filter = filt
        self.cycle = cycle
        self.delta = float(delta)
        self.center = TWO_PI * float(cycle.turns[0])
        self.rotation = TWO_PI / filt.scale
        self.sup_residual = math.nan
        super().__init__(self._eval, f"kernel@{cycle.turns[0]}")

    @property
    def arcs(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c, d, r = self.center, self.delta, self.rotation
        return (c - d, c + d), (c + r - d, c + r + d)

    def _eval(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        d0 = _wrap(theta - self.center)
        in0 = np.abs(d0) < self.delta
        out[in0] = 1.0 - np.abs(d0[in0]) / self.delta
        d1 = _wrap(theta - self.center - self.rotation)
        in1 = np.abs(d1) < self.delta
        if in1.any():
            t = theta[in1]
            tent = 1.0 - np.abs(d1[in1]) / self.delta
            out[in1] = -modulus_squared(self.filter, t - self.rotation) * tent / modulus_squared(self.filter, t)
        return out

    def residual(self, M: int) -> float:
        """||R f||_inf on the grid of size M."""
        fine = self.sample(M * self.filter.scale)
        return float(np.max(np.abs(apply_grid(self.filter, fine).samples)))


def _arc_obstacles(filt: Filter, cycle: Cycle, zero_tol: float):
    N = filt.scale
    t0 = cycle.turns[0]
    t1 = (t0 + Fraction(1, N)) % 1
    if t1 in cycle.turns[1:]:
        raise ValidationError(
            f"cycle too short: the rotated point exp(2 pi i/N) z_0 lies on the cycle {cycle}"
        )
    b0 = TWO_PI * float(t0)
    b1 = TWO_PI * float(t1)
    for b, label in ((b0, "z_0"), (b1, "exp(2 pi i/N) z_0")):
        if abs(filt(b)) < zero_tol:
            raise ValidationError(f"cycle too short: m0 vanishes at {label} (angle {b:.6f})")
    zs = zeros(filt, tol=zero_tol) if filt.width else []
    others = [TWO_PI * float(t) for t in cycle.turns[1:]]
    return b0, b1, zs, others


def _arc_ok(delta, N, b0, b1, zs, others) -> bool:
    if delta >= math.pi / N:
        return False
    for b in (b0, b1):
        if any(_circ_dist(b, z) <= delta for z in zs):
            return False
        if any(_circ_dist(b, o) <= delta for o in others):
            return False
    return True


def kernel_function(
    filt: Filter,
    cycle: Cycle,
    params: ProductParams = ProductParams(),
    delta: float | None = None,
    zero_tol: float = 1e-9,
) -> KernelFn:
    """Kernel function for the first point z_0 of ``cycle``: R f = 0, f(z_0) = 1, f = 0 on the rest.

    The arc half-width starts at a quarter of the smallest distance from z_0 or
    its rotation to a zero of m0 or another cycle point (capped at pi/N) and is
    halved until both arcs are clear and the N rotated copies are disjoint.
    An explicit ``delta`` is validated instead and rejected if inadmissible.
    """
    N = filt.scale
    b0, b1, zs, others = _arc_obstacles(filt, cycle, zero_tol)
    if delta is not None:
        if not _arc_ok(delta, N, b0, b1, zs, others):
            raise ValidationError(
                f"arc half-width {delta} is inadmissible: arcs must avoid zeros of m0 and "
                f"other cycle points, and delta must be < pi/N = {math.pi / N:.6f}"
            )
    else:
        dists = [math.pi / N]
        dists += [_circ_dist(b, z) for b in (b0, b1) for z in zs]
        dists += [_circ_dist(b, o) for b in (b0, b1) for o in others]
        delta = min(dists) / 4
        for _ in range(60):
            if _arc_ok(delta, N, b0, b1, zs, others):
                break
            delta /= 2
        else:
            raise ConvergenceError(
                f"no admissible arc for cycle {cycle}: nearest zero distance "
                f"{min([_circ_dist(b, z) for b in (b0, b1) for z in zs], default=math.inf):.3e}, "
                f"nearest cycle point distance "
                f"{min([_circ_dist(b, o) for b in (b0, b1) for o in others], default=math.inf):.3e}"
            )
    kf = KernelFn(filt, cycle, delta)
    kf.sup_residual = kf.residual(params.grid)
    return kf


class HSeries(CircleFn):
    """h(z) = sum_{n=0}^{n_terms-1} lam^n f(z^(N^n)) for a kernel function f.

    ``sample`` evaluates on a uniform grid with exact integer index arithmetic
    for z -> z^N, and ``cycle_values`` does the same with exact fractions, so
    neither suffers the precision loss of repeatedly multiplying float angles.
    """

    def __init__(self, kernel: KernelFn, lam: complex, n_terms: int):
        self.kernel = kernel
        self.lam = complex(lam)
        self.n_terms = int(n_terms)
        self.residual = math.nan
        super().__init__(self._eval, f"h[lambda={lam}]")

    def _eval(self, theta):
        # float path: accurate while N^n_terms * eps stays small relative to the arc width
        theta = np.asarray(theta, dtype=float)
        N = self.kernel.filter.scale
        out = np.zeros(theta.shape, dtype=complex)
        x = np.mod(theta, TWO_PI)
        c = 1.0 + 0j
        for _ in range(self.n_terms):
            out += c * self.kernel(x)
            x = np.mod(N * x, TWO_PI)
            c *= self.lam
        return out

    def sample(self, M: int, offset: bool = False) -> GridFn:
        if offset:
            return super().sample(M, offset)
        N = self.kernel.filter.scale
        idx = np.arange(M, dtype=np.int64)
        out = np.zeros(M, dtype=complex)
        c = 1.0 + 0j
        for _ in range(self.n_terms):
            out += c * self.kernel(TWO_PI * idx / M)
            idx = (idx * N) % M
            c *= self.lam
        return GridFn(out)

    def value_at_turn(self, t: Fraction) -> complex:
        N = self.kernel.filter.scale
        total = 0j
        c = 1.0 + 0j
        for _ in range(self.n_terms):
            total += c * complex(self.kernel(np.array(TWO_PI * float(t))))
            t = (N * t) % 1
            c *= self.lam
        return total

    def cycle_values(self) -> np.ndarray:
        return np.array([self.value_at_turn(t) for t in self.kernel.cycle.turns])

    def grid_residual(self, M: int) -> float:
        """||R h - lam h||_inf on the grid of size M."""
        N = self.kernel.filter.scale
        fine = self.sample(M * N)
        coarse = fine.samples[::N]
        return float(np.max(np.abs(apply_grid(self.kernel.filter, fine).samples - self.lam * coarse)))


def h_series(
    kernel: KernelFn,
    lam: complex,
    params: ProductParams = ProductParams(),
    eps: float = 1e-10,
    max_terms: int = 200,
) -> HSeries:
    """Eigenfunction with eigenvalue lam (|lam| < 1) built from a kernel function.

    Truncated after ceil(log eps / log|lam|) terms (one term when lam = 0, with
    the convention lam^0 = 1), capped at ``max_terms``.
    """
    lam = complex(lam)
    if abs(lam) >= 1:
        raise ValidationError(f"|lambda| = {abs(lam)} must be < 1 for the h-series")
    if lam == 0:
        n = 1
    else:
        n = max(1, math.ceil(math.log(eps) / math.log(abs(lam))))
        if n > max_terms:
            warnings.warn(
                f"|lambda| = {abs(lam):.3f} needs {n} terms for eps = {eps:g}; capped at "
                f"{max_terms} (truncation ~ {abs(lam) ** max_terms:.1e})",
                RuntimeWarning,
                stacklevel=2,
            )
            n = max_terms
    h = HSeries(kernel, lam, n)
    h.residual = h.grid_residual(verification_grid(params.grid, kernel.filter.scale))
    return h


def verification_grid(M: int, N: int) -> int:
    """M, or M (N + 1) / N when M is a power of N.

    On a pure power-of-N grid every orbit of z -> z^N reaches 1 after a few
    steps, which would make h-series checks nearly vacuous.
    """
    m = M
    while m % N == 0 and m > 1:
        m //= N
    if m == 1 and M >= N:
        return M // N * (N + 1)
    return M


def independence_matrix(p: int, lam: complex) -> tuple[np.ndarray, complex]:
    """Cycle-value matrix of the h-series times (1 - lam^p): entries lam^((j - k) mod p).

    Its determinant is (1 - lam^p)^(p - 1), nonzero for |lam| < 1.
    """
    if p < 1:
        raise ValidationError("p must be >= 1")
    lam = complex(lam)
    j = np.arange(p)
    A = lam ** ((j[:, None] - j[None, :]) % p)
    return A, complex(np.linalg.det(A))


def h_family_gram(
    filt: Filter,
    cycle: Cycle,
    lam: complex,
    params: ProductParams = ProductParams(),
) -> dict:
    """Gram matrix of h_{z_0}, ..., h_{z_{p-1}} on the verification grid."""
    M = verification_grid(params.grid, filt.scale)
    rows = []
    for k in range(cycle.period):
        kf = kernel_function(filt, cycle.rotated(k), params)
        rows.append(h_series(kf, lam, params).sample(M).samples)
    H = np.array(rows)
    G = (H.conj() @ H.T) * (TWO_PI / M)
    return {"gram": G, "cond": float(np.linalg.cond(G)), "det": complex(np.linalg.det(G))}

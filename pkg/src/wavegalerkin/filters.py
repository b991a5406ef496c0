"""Low-pass filters m0(xi) = sum_k a_k exp(-i k xi) and their coefficient-level checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import ValidationError

__all__ = [
    "Filter",
    "Autocorrelation",
    "evaluate",
    "modulus_squared",
    "autocorrelation",
    "qmf_residual",
    "zeros",
    "builtin",
    "BUILTIN_NAMES",
    "load_filter",
    "save_filter",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Filter:
    """Finitely supported filter with coefficients ``a_k`` for ``k = offset .. offset + len - 1``.

    Parameters
    ----------
    coeffs : array_like of complex
        Filter taps, lowest index first.
    scale : int, default=2
        Dilation factor N >= 2.
    offset : int, default=0
        Index ``k_min`` of the first tap.
    name : str, optional
        Label carried into reports.
    """

    coeffs: np.ndarray
    scale: int = 2
    offset: int = 0
    name: str | None = None
    _poly: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if a.ndim != 1 or a.size == 0:
            raise ValidationError("filter needs a non-empty 1-D coefficient list")
        if not np.any(a != 0):
            raise ValidationError("filter is identically zero")
        if int(self.scale) != self.scale or self.scale < 2:
            raise ValidationError(f"scale must be an integer >= 2, got {self.scale!r}")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "scale", int(self.scale))
        object.__setattr__(self, "offset", int(self.offset))
        # np.polyval wants the highest power first
        object.__setattr__(self, "_poly", a[::-1].copy())

    @property
    def k_min(self) -> int:
        return self.offset

    @property
    def k_max(self) -> int:
        return self.offset + self.coeffs.size - 1

    @property
    def width(self) -> int:
        """Support width ``k_max - k_min``; also the degree bound of the autocorrelation."""
        return self.coeffs.size - 1

    def __call__(self, xi):
        return evaluate(self, xi)

    def derivative(self, xi):
        """d m0 / d xi."""
        xi = np.asarray(xi, dtype=float)
        k = np.arange(self.k_min, self.k_max + 1)
        return Filter(-1j * k * self.coeffs, self.scale, self.offset)(xi)

    def normalize(self) -> "Filter":
        """Rescale so that m0(0) = sqrt(N)."""
        s = self.coeffs.sum()
        if abs(s) == 0:
            raise ValidationError("cannot normalize a filter with m0(0) = 0")
        return Filter(self.coeffs * (np.sqrt(self.scale) / s), self.scale, self.offset, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scale": self.scale,
            "offset": self.offset,
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Filter":
        try:
            scale = d["scale"]
            raw = d["coefficients"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"filter file is missing field {exc}") from None
        if not isinstance(scale, int) or scale < 2:
            raise ValidationError(f"scale must be an integer >= 2, got {scale!r}")
        if not raw:
            raise ValidationError("filter file has no coefficients")
        coeffs = []
        for c in raw:
            if isinstance(c, (int, float)):
                coeffs.append(complex(c))
            elif isinstance(c, (list, tuple)) and len(c) == 2:
                coeffs.append(complex(float(c[0]), float(c[1])))
            else:
                raise ValidationError(f"coefficient {c!r} is not [re, im]")
        return cls(np.array(coeffs), scale, int(d.get("offset", 0)), d.get("name"))

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Filter({label}N={self.scale}, k={self.k_min}..{self.k_max})"


@dataclass(frozen=True, eq=False)
class Autocorrelation:
    """Fourier coefficients ``b_n`` of |m0|^2, stored for ``n = -M .. M``."""

    coeffs: np.ndarray

    @property
    def M(self) -> int:
        return (self.coeffs.size - 1) // 2

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.M:
            return 0j
        return complex(self.coeffs[n + self.M])

    def at(self, n) -> np.ndarray:
        """Vectorized ``b_n`` lookup, zero outside the support."""
        n = np.asarray(n)
        out = np.zeros(n.shape, dtype=complex)
        inside = np.abs(n) <= self.M
        out[inside] = self.coeffs[n[inside] + self.M]
        return out

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        n = np.arange(-self.M, self.M + 1)
        return np.exp(-1j * np.multiply.outer(xi, n)) @ self.coeffs


def evaluate(filt: Filter, xi):
    """m0(xi) for scalar or array ``xi`` (radians)."""
    xi = np.asarray(xi, dtype=float)
    z = np.exp(-1j * xi)
    out = np.polyval(filt._poly, z)
    if filt.k_min:
        out = out * z**filt.k_min
    return out


def modulus_squared(filt: Filter, xi):
    m = evaluate(filt, xi)
    return m.real**2 + m.imag**2


def autocorrelation(filt: Filter) -> Autocorrelation:
    # np.correlate(a, a)[M + n] = sum_k a_{k+n} conj(a_k) = b_n
    a = filt.coeffs
    b = np.correlate(a, a, mode="full")
    return Autocorrelation(b)


def qmf_residual(filt: Filter) -> float:
    """Deviation of R1 from 1, read off the autocorrelation.

    (1/N) sum_{w^N = z} |m0|^2(w) = sum_l b_{Nl} z^l, so R1 = 1 exactly when
    b_0 = 1 and every other b_{Nl} vanishes.
    """
    b = autocorrelation(filt)
    N = filt.scale
    res = abs(b[0] - 1.0)
    lmax = b.M // N
    for l in range(1, lmax + 1):
        res = max(res, abs(b[N * l]), abs(b[-N * l]))
    return float(res)


def zeros(filt: Filter, tol: float = 1e-9, n_grid: int = 4096) -> list[float]:
    """Angles in [0, 2 pi) where |m0| < tol.

    Scans |m0|^2 on a uniform grid, then refines every discrete local minimum
    by golden-section search. Zeros closer than 1e-6 are merged.
    """
    n_grid = max(int(n_grid), 4096, 8 * filt.width)
    h = TWO_PI / n_grid
    grid = h * np.arange(n_grid)
    f = modulus_squared(filt, grid)
    cand = np.flatnonzero((f <= np.roll(f, 1)) & (f <= np.roll(f, -1)))

    def obj(x):
        return float(modulus_squared(filt, x))

    found: list[float] = []
    for i in cand:
        x0 = grid[i]
        try:
            res = minimize_scalar(
                obj, bracket=(x0 - h, x0, x0 + h), method="golden", tol=1e-15
            )
        except ValueError:
            # flat bracket (ties on the grid); the bounded variant does not need one
            res = minimize_scalar(
                obj, bounds=(x0 - h, x0 + h), method="bounded", options={"xatol": 1e-14}
            )
        x = float(np.mod(res.x, TWO_PI))
        if abs(evaluate(filt, x)) < tol:
            if not any(_circ_dist(x, y) < 1e-6 for y in found):
                found.append(x)
    # degree bound: |m0|^2 z^M is a polynomial of degree 2M
    if len(found) > 2 * filt.width:
        raise ValidationError(
            f"found {len(found)} zeros, more than the degree bound {2 * filt.width}; "
            "tolerance or grid is misconfigured"
        )
    return sorted(found)


def _circ_dist(x: float, y: float) -> float:
    d = abs(x - y) % TWO_PI
    return min(d, TWO_PI - d)


_S2 = np.sqrt(2.0)
_S3 = np.sqrt(3.0)
_BUILTINS = {
    "haar": (np.array([1.0, 1.0]) / _S2, 2),
    "stretched-haar": (np.array([1.0, 0.0, 0.0, 1.0]) / _S2, 2),
    "daubechies4": (np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * _S2), 2),
}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str) -> Filter:
    """Return one of the bundled filters ``haar``, ``stretched-haar``, ``daubechies4``."""
    try:
        coeffs, scale = _BUILTINS[name]
    except KeyError:
        raise ValidationError(
            f"unknown builtin filter {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    return Filter(coeffs, scale, 0, name)


def load_filter(source: str | Path) -> Filter:
    """Load a filter from a JSON file, or by builtin name."""
    if isinstance(source, str) and source in _BUILTINS:
        return builtin(source)
    path = Path(source)
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such filter file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return Filter.from_dict(d)


def save_filter(filt: Filter, path: str | Path) -> None:
    Path(path).write_text(json.dumps(filt.to_dict(), indent=2) + "\n")

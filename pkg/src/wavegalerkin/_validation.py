"""Input checks shared by the estimator and the CLI."""
from __future__ import annotations

import re

import numpy as np

from .exceptions import ValidationError
from .filters import Filter, load_filter

_COMPLEX = re.compile(
    r"^\s*(?P<re>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?"
    r"\s*(?P<im>[+-]\s*(\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?)?\s*(?P<unit>[ij])?\s*$"
)


def check_filter(filt) -> Filter:
    """Accept a Filter, a builtin name, a JSON path, or a dict in the file schema."""
    if isinstance(filt, Filter):
        return filt
    if isinstance(filt, dict):
        return Filter.from_dict(filt)
    if isinstance(filt, str) or hasattr(filt, "__fspath__"):
        return load_filter(filt)
    raise ValidationError(f"cannot interpret {type(filt).__name__} as a filter")


def check_grid_samples(X, scale: int) -> np.ndarray:
    """2-D complex array whose row length is a positive multiple of ``scale``."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValidationError(f"expected a 2-D array of grid samples, got shape {X.shape}")
    if X.shape[1] == 0 or X.shape[1] % scale:
        raise ValidationError(
            f"row length {X.shape[1]} must be a positive multiple of the scale {scale}"
        )
    X = X.astype(complex)
    if not np.all(np.isfinite(X)):
        raise ValidationError("grid samples contain NaN or inf")
    return X


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_unit_modulus(lam: complex, tol: float = 1e-12) -> complex:
    lam = complex(lam)
    if abs(abs(lam) - 1) > tol:
        raise ValidationError(f"|lambda| = {abs(lam):.6g}; expected a unit-modulus value")
    return lam


def parse_complex(text: str) -> complex:
    """Parse ``RE+IMi`` style input: ``-1+0i``, ``0.5``, ``i``, ``0.4-0.3j``."""
    t = text.strip().replace(" ", "")
    m = _COMPLEX.match(t)
    if not t or m is None:
        raise ValidationError(f"cannot parse {text!r} as a complex number (use RE+IMi)")
    re_s, im_s, unit = m.group("re"), m.group("im"), m.group("unit")
    if unit is None:
        if im_s is not None:
            raise ValidationError(f"cannot parse {text!r} as a complex number (use RE+IMi)")
        return complex(float(re_s), 0.0)
    if im_s is None:
        # a lone "2i" or "i": the real part is really the imaginary coefficient
        im = float(re_s) if re_s else 1.0
        return complex(0.0, im)
    sign = -1.0 if im_s[0] == "-" else 1.0
    mag = im_s[1:]
    im = sign * (float(mag) if mag else 1.0)
    return complex(float(re_s) if re_s else 0.0, im)

"""Cycles of z -> z^N on the circle, m0-cycles, and the peripheral eigenvalues they predict.

Points are kept as exact fractions of a full turn, ``z = exp(2 pi i q / (N^p - 1))``,
so the orbit identity ``z_j^N = z_{j+1}`` is checked in integer arithmetic.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import ValidationError
from .filters import TWO_PI, Filter

__all__ = [
    "Cycle",
    "PeripheralEigenvalue",
    "PeripheralPrediction",
    "enumerate_cycles",
    "classify_cycles",
    "detect_m0_cycles",
    "predict_peripheral",
    "match_peripheral",
    "default_max_period",
]

MAX_DENOMINATOR = 2**31


@dataclass(frozen=True)
class Cycle:
    """Orbit ``z_1 -> z_2 -> ... -> z_p -> z_1`` under z -> z^N, stored as turn fractions."""

    turns: tuple[Fraction, ...]
    scale: int
    is_m0_cycle: bool = False
    gap: float = math.nan

    @property
    def period(self) -> int:
        return len(self.turns)

    @property
    def angles(self) -> np.ndarray:
        return np.array([TWO_PI * float(t) for t in self.turns])

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def rotated(self, k: int) -> "Cycle":
        """Same cycle listed from ``z_{k+1}`` (0-based start index ``k``)."""
        k %= self.period
        return Cycle(self.turns[k:] + self.turns[:k], self.scale, self.is_m0_cycle, self.gap)

    def is_closed(self) -> bool:
        N = self.scale
        p = self.period
        return all((N * self.turns[j]) % 1 == self.turns[(j + 1) % p] for j in range(p))

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "turns": [f"{t.numerator}/{t.denominator}" for t in self.turns],
            "angles": [float(a) for a in self.angles],
            "is_m0_cycle": self.is_m0_cycle,
            "gap": self.gap,
        }

    def __str__(self):
        pts = ", ".join(str(t) for t in self.turns)
        return f"{{{pts}}} (turns)"


@dataclass(frozen=True)
class PeripheralEigenvalue:
    """A root of unity ``exp(2 pi i turn)`` with its predicted multiplicity."""

    turn: Fraction
    multiplicity: int
    cycles: tuple[Cycle, ...] = field(repr=False)

    @property
    def value(self) -> complex:
        if self.turn == 0:
            return 1 + 0j
        if self.turn == Fraction(1, 2):
            return -1 + 0j
        return complex(np.exp(2j * np.pi * float(self.turn)))

    def to_dict(self) -> dict:
        v = self.value
        return {
            "value": [v.real, v.imag],
            "turn": f"{self.turn.numerator}/{self.turn.denominator}",
            "multiplicity": self.multiplicity,
            "cycle_periods": [c.period for c in self.cycles],
        }


@dataclass(frozen=True)
class PeripheralPrediction:
    eigenvalues: tuple[PeripheralEigenvalue, ...]
    max_period: int

    def multiplicity(self, lam: complex, tol: float = 1e-6) -> int:
        for e in self.eigenvalues:
            if abs(e.value - lam) < tol:
                return e.multiplicity
        return 0

    def cycles_for(self, lam: complex, tol: float = 1e-6) -> tuple[Cycle, ...]:
        for e in self.eigenvalues:
            if abs(e.value - lam) < tol:
                return e.cycles
        return ()

    def as_mapping(self) -> dict[complex, int]:
        return {e.value: e.multiplicity for e in self.eigenvalues}

    def to_dict(self) -> dict:
        return {
            "max_period": self.max_period,
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
        }


def default_max_period(N: int) -> int:
    """Largest p with N^p - 1 <= 255 (8 for N = 2)."""
    p = 1
    while N ** (p + 1) - 1 <= 255:
        p += 1
    return p


def _exact_period(q: int, N: int, d: int) -> int:
    x = (q * N) % d
    k = 1
    while x != q:
        x = (x * N) % d
        k += 1
    return k


def enumerate_cycles(N: int, max_period: int) -> list[Cycle]:
    """Every cycle of exact period p <= max_period, each listed once.

    A cycle starts at its smallest angle and then follows the orbit.
    """
    if N < 2:
        raise ValidationError("scale must be >= 2")
    if max_period < 1:
        raise ValidationError("max_period must be >= 1")
    if N**max_period - 1 > MAX_DENOMINATOR:
        raise ValidationError(
            f"N^max_period - 1 = {N ** max_period - 1} exceeds 2^31; lower max_period"
        )
    out: list[Cycle] = []
    for p in range(1, max_period + 1):
        d = N**p - 1
        seen: set[int] = set()
        for q in range(d):
            if q in seen:
                continue
            if _exact_period(q, N, d) != p:
                continue
            orbit = [q]
            x = (q * N) % d
            while x != q:
                orbit.append(x)
                x = (x * N) % d
            seen.update(orbit)
            # q is the smallest unseen orbit member because we scan upward
            out.append(Cycle(tuple(Fraction(v, d) for v in orbit), N))
    return out


def classify_cycles(filt: Filter, max_period: int | None = None, tol: float = 1e-9) -> list[Cycle]:
    """All cycles up to ``max_period`` with the m0-cycle flag and |m0| gap filled in."""
    N = filt.scale
    if max_period is None:
        max_period = default_max_period(N)
    root = math.sqrt(N)
    out = []
    for c in enumerate_cycles(N, max_period):
        gap = float(np.max(np.abs(root - np.abs(filt(c.angles)))))
        out.append(Cycle(c.turns, N, gap < tol, gap))
    return out


def detect_m0_cycles(filt: Filter, max_period: int | None = None, tol: float = 1e-9) -> list[Cycle]:
    """Cycles on which |m0| = sqrt(N) at every point, within ``tol``."""
    return [c for c in classify_cycles(filt, max_period, tol) if c.is_m0_cycle]


def predict_peripheral(
    filt: Filter, max_period: int | None = None, tol: float = 1e-9
) -> PeripheralPrediction:
    """Unit-modulus eigenvalues implied by the m0-cycles found up to ``max_period``.

    lambda is peripheral exactly when lambda^p = 1 for the period p of some
    m0-cycle; its multiplicity counts those cycles.
    """
    if max_period is None:
        max_period = default_max_period(filt.scale)
    m0c = detect_m0_cycles(filt, max_period, tol)
    if not m0c:
        warnings.warn(
            f"no m0-cycle of period <= {max_period}; peripheral prediction is empty",
            RuntimeWarning,
            stacklevel=2,
        )
    turns: dict[Fraction, list[Cycle]] = {}
    for c in m0c:
        for r in range(c.period):
            turns.setdefault(Fraction(r, c.period), []).append(c)
    eigs = tuple(
        PeripheralEigenvalue(t, len(cs), tuple(cs)) for t, cs in sorted(turns.items())
    )
    return PeripheralPrediction(eigs, max_period)


def match_peripheral(prediction: PeripheralPrediction, eigenvalues, tol: float = 1e-6) -> dict:
    """Match unit-modulus transition eigenvalues against a prediction.

    Returns the matched values with observed vs predicted multiplicity, and
    every observed peripheral value with no predicted partner as anomalous.
    """
    vals = [complex(v) for v in eigenvalues if abs(abs(v) - 1.0) < tol]
    matched = []
    used = [False] * len(vals)
    for e in prediction.eigenvalues:
        hits = [i for i, v in enumerate(vals) if abs(v - e.value) < tol]
        for i in hits:
            used[i] = True
        matched.append(
            {
                "value": [e.value.real, e.value.imag],
                "predicted": e.multiplicity,
                "observed": len(hits),
            }
        )
    anomalous = [[v.real, v.imag] for v, u in zip(vals, used) if not u]
    consistent = not anomalous and all(m["observed"] <= m["predicted"] for m in matched)
    return {"matched": matched, "anomalous": anomalous, "consistent": consistent}

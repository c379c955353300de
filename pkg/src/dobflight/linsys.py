"""Real-rational SISO transfer functions and their discrete realization.

Polynomials are dense coefficient sequences in descending powers of ``s``.
Nothing here cancels common factors; callers decide when to simplify.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

POLE_ON_AXIS_TOL = 1e-12


class EvaluationError(ValueError):
    """Raised when a transfer function has a pole on the imaginary axis."""


class CompositionError(ValueError):
    """Raised when a feedback interconnection is degenerate."""


class DiscretizationError(ValueError):
    """Raised when a transfer function cannot be realized as a causal filter."""


def _trim(coeffs) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coefficient list must be a nonempty 1-D sequence")
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return (0.0,)
    return tuple(float(c) for c in arr[nz[0]:])


@dataclass(frozen=True)
class TransferFunction:
    """``num(s) / den(s)`` with real coefficients.

    Improper transfer functions are allowed (an inverse nominal model is one);
    only :func:`discretize_bilinear` insists on properness.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "num", _trim(self.num))
        object.__setattr__(self, "den", _trim(self.den))
        if self.den == (0.0,):
            raise ValueError("denominator must not be identically zero")

    @classmethod
    def constant(cls, k: float) -> "TransferFunction":
        return cls((k,), (1.0,))

    @property
    def relative_degree(self) -> int:
        num_deg = 0 if self.num == (0.0,) else len(self.num) - 1
        return (len(self.den) - 1) - num_deg

    @property
    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    def dc_gain(self) -> float:
        return float(freq_eval(self, 0.0).real)

    def __call__(self, omega):
        return freq_eval(self, omega)

    def __mul__(self, other):
        return compose(self, _as_tf(other), "series")

    __rmul__ = __mul__

    def __add__(self, other):
        return compose(self, _as_tf(other), "parallel")

    __radd__ = __add__

    def __neg__(self):
        return TransferFunction(tuple(-c for c in self.num), self.den)

    def inverse(self) -> "TransferFunction":
        if self.num == (0.0,):
            raise ZeroDivisionError("cannot invert a zero transfer function")
        return TransferFunction(self.den, self.num)


def _as_tf(x) -> TransferFunction:
    if isinstance(x, TransferFunction):
        return x
    return TransferFunction.constant(float(x))


def freq_eval(tf: TransferFunction, omega):
    """Evaluate ``tf`` at ``s = j*omega``; scalar in, scalar out.

    Accepts an array of frequencies as well.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be nonnegative")
    s = 1j * w
    den = np.polyval(tf.den, s)
    scale = max(abs(c) for c in tf.den)
    if np.any(np.abs(den) < POLE_ON_AXIS_TOL * scale):
        raise EvaluationError(f"pole on the imaginary axis near omega={omega}")
    val = np.polyval(tf.num, s) / den
    if val.ndim == 0:
        return complex(val)
    return val


def compose(tf_a: TransferFunction, tf_b: TransferFunction, mode: str) -> TransferFunction:
    """Series, parallel or negative-feedback interconnection of two blocks.

    For ``negative_feedback`` the forward path is ``tf_a`` and the return
    path ``tf_b``: ``a / (1 + a*b)``.
    """
    na, da = np.array(tf_a.num), np.array(tf_a.den)
    nb, db = np.array(tf_b.num), np.array(tf_b.den)
    if mode == "series":
        return TransferFunction(np.polymul(na, nb), np.polymul(da, db))
    if mode == "parallel":
        return TransferFunction(np.polyadd(np.polymul(na, db), np.polymul(nb, da)),
                                np.polymul(da, db))
    if mode == "negative_feedback":
        den = np.polyadd(np.polymul(da, db), np.polymul(na, nb))
        if not np.any(den):
            raise CompositionError("1 + a*b is identically zero")
        return TransferFunction(np.polymul(na, db), den)
    raise ValueError(f"unknown composition mode {mode!r}")


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex samples on a strictly increasing grid of angular frequencies."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D with equal length")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_tf(cls, tf: TransferFunction, grid) -> "FrequencyResponse":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, freq_eval(tf, grid))

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def __len__(self):
        return self.grid.size


def log_grid(lo: float = 1e-2, hi: float = 1e3, n: int = 400) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), n)


class DiscreteFilter:
    """Transposed direct-form II filter in powers of ``z**-1``.

    ``den[0]`` is normalized to 1 on construction.
    """

    def __init__(self, num, den, dt: float, state=None):
        num = np.atleast_1d(np.asarray(num, dtype=float))
        den = np.atleast_1d(np.asarray(den, dtype=float))
        if den[0] == 0:
            raise ValueError("leading denominator coefficient must be nonzero")
        n = max(num.size, den.size)
        self.num = np.pad(num, (0, n - num.size)) / den[0]
        self.den = np.pad(den, (0, n - den.size)) / den[0]
        self.dt = float(dt)
        # plain lists keep the per-sample loop cheap
        self._b = self.num.tolist()
        self._a = self.den.tolist()
        if state is None:
            self._z = [0.0] * (n - 1)
        else:
            self._z = [float(v) for v in state]
            if len(self._z) != n - 1:
                raise ValueError("state length must equal the filter order")

    @property
    def state(self) -> np.ndarray:
        return np.array(self._z)

    @property
    def order(self) -> int:
        return len(self._b) - 1

    def reset(self, value: float = 0.0):
        """Zero the delay line, or preload the steady state for a constant input."""
        if value == 0.0:
            self._z = [0.0] * self.order
        else:
            self._z = _steady_state(self._b, self._a, value)

    def step(self, u: float) -> float:
        return filter_step(self, u)

    def dc_gain(self) -> float:
        return sum(self._b) / sum(self._a)

    def __repr__(self):
        return f"DiscreteFilter(num={self.num.tolist()}, den={self.den.tolist()}, dt={self.dt})"


def _steady_state(b, a, u):
    n = len(b) - 1
    y = u * sum(b) / sum(a)
    z = [0.0] * n
    # z[i] = sum_{k>i} (b[k] u - a[k] y)
    acc = 0.0
    for i in range(n - 1, -1, -1):
        acc += b[i + 1] * u - a[i + 1] * y
        z[i] = acc
    return z


def filter_step(f: DiscreteFilter, u: float) -> float:
    """Advance ``f`` by one sample and return the output."""
    b, a, z = f._b, f._a, f._z
    n = len(z)
    if n == 0:
        return b[0] * u
    y = b[0] * u + z[0]
    for i in range(n - 1):
        z[i] = b[i + 1] * u - a[i + 1] * y + z[i + 1]
    z[n - 1] = b[n] * u - a[n] * y
    return y


def discretize_bilinear(tf: TransferFunction, dt: float) -> DiscreteFilter:
    """Tustin map ``s <- (2/dt)(1 - z^-1)/(1 + z^-1)``, no prewarping."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not tf.is_proper:
        raise DiscretizationError(
            "transfer function is improper (relative degree "
            f"{tf.relative_degree}); pre-multiply it by a Q-filter of sufficient "
            "relative degree before discretizing")
    num, den = signal.bilinear(tf.num, tf.den, fs=1.0 / dt)
    return DiscreteFilter(np.atleast_1d(num), np.atleast_1d(den), dt)

"""Functions on the discrete cube {-1, 1}^n with the uniform probability.

Points are encoded as integers ``b`` in ``[0, 2**n)``; coordinate ``i`` of the
point is ``(-1) ** ((b >> i) & 1)``. A coordinate set ``A`` is an ``n``-bit mask
and the Walsh character ``w_A`` is ``prod_{i in A} x_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapacityError, DomainError

MAX_BITS = 24


def check_bits(n: int, max_bits: int = MAX_BITS) -> int:
    n = int(n)
    if n < 0:
        raise DomainError(f"coordinate count must be >= 0, got {n}")
    if n > max_bits:
        raise CapacityError(f"{n} coordinates exceed the cap of {max_bits} bits")
    return n


def check_mask(n: int, mask: int) -> int:
    mask = int(mask)
    if mask < 0 or mask >= (1 << n):
        raise DomainError(f"mask {mask} is not a subset of {n} coordinates")
    return mask


def parity(x: np.ndarray) -> np.ndarray:
    """Popcount parity of a non-negative integer array (values below 2**32)."""
    x = np.asarray(x, dtype=np.uint64).copy()
    for shift in (16, 8, 4, 2, 1):
        x ^= x >> np.uint64(shift)
    return (x & np.uint64(1)).astype(np.int8)


@dataclass(frozen=True, eq=False)
class HypercubeFunction:
    """A real function on {-1, 1}^n stored in canonical point order."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        n = check_bits(self.n)
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != 1 << n:
            raise DomainError(
                f"expected {1 << n} values for n={n}, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise DomainError("function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return 1 << self.n

    def __add__(self, other: HypercubeFunction) -> HypercubeFunction:
        _same_cube(self, other)
        return HypercubeFunction(self.n, self.values + other.values)

    def __sub__(self, other: HypercubeFunction) -> HypercubeFunction:
        _same_cube(self, other)
        return HypercubeFunction(self.n, self.values - other.values)

    def __mul__(self, scalar: float) -> HypercubeFunction:
        return HypercubeFunction(self.n, self.values * float(scalar))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"n": self.n, "values": [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, data: dict) -> HypercubeFunction:
        return cls(int(data["n"]), np.asarray(data["values"], dtype=np.float64))

    @classmethod
    def constant(cls, n: int, value: float = 1.0) -> HypercubeFunction:
        return cls(n, np.full(1 << check_bits(n), float(value)))

    @classmethod
    def zeros(cls, n: int) -> HypercubeFunction:
        return cls.constant(n, 0.0)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """Probability-normalised Walsh coefficients, ``coeffs[A] = E[f w_A]``."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if coeffs.shape[0] != 1 << check_bits(self.n):
            raise DomainError("spectrum length must be 2**n")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def to_dict(self) -> dict:
        return {"n": self.n, "coeffs": [float(c) for c in self.coeffs]}


def _same_cube(f: HypercubeFunction, g: HypercubeFunction) -> None:
    if f.n != g.n:
        raise DomainError(f"functions live on different cubes ({f.n} vs {g.n} bits)")


def character_values(n: int, mask: int) -> np.ndarray:
    check_bits(n)
    mask = check_mask(n, mask)
    points = np.arange(1 << n, dtype=np.uint64)
    return 1.0 - 2.0 * parity(points & np.uint64(mask))


def character(n: int, mask: int) -> HypercubeFunction:
    """The Walsh character ``w_A`` for the coordinate set encoded by ``mask``."""
    return HypercubeFunction(n, character_values(n, mask))


def character_matrix(n: int, masks) -> np.ndarray:
    """Columns are the characters of ``masks``; shape ``(2**n, len(masks))``."""
    check_bits(n)
    masks = [check_mask(n, m) for m in masks]
    points = np.arange(1 << n, dtype=np.uint64)
    out = np.empty((1 << n, len(masks)))
    for j, m in enumerate(masks):
        out[:, j] = 1.0 - 2.0 * parity(points & np.uint64(m))
    return out


def hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform along the last axis."""
    a = np.array(values, dtype=np.float64)
    size = a.shape[-1]
    if size & (size - 1):
        raise DomainError("transform length must be a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(lead + (size // (2 * h), 2, h))
        lo = a[..., 0, :]
        hi = a[..., 1, :]
        a = np.stack((lo + hi, lo - hi), axis=-2)
        h *= 2
    return a.reshape(lead + (size,))


def fwht(f, direction: Literal["forward", "inverse"] = "forward"):
    """Walsh transform between a function and its spectrum.

    ``forward`` takes a :class:`HypercubeFunction` and returns a
    :class:`WalshSpectrum` with coefficients divided by ``2**n``;
    ``inverse`` takes a spectrum and rebuilds the function.
    """
    if direction == "forward":
        if not isinstance(f, HypercubeFunction):
            raise DomainError("forward transform expects a HypercubeFunction")
        return WalshSpectrum(f.n, hadamard(f.values) / f.size)
    if direction == "inverse":
        if not isinstance(f, WalshSpectrum):
            raise DomainError("inverse transform expects a WalshSpectrum")
        return HypercubeFunction(f.n, hadamard(f.coeffs))
    raise DomainError(f"unknown direction {direction!r}")


def synthesize(n: int, masks, coeffs) -> HypercubeFunction:
    """``sum_i coeffs[i] * w_{masks[i]}`` evaluated on the whole cube."""
    spectrum = np.zeros(1 << check_bits(n))
    masks = [check_mask(n, m) for m in masks]
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (len(masks),):
        raise DomainError("need one coefficient per mask")
    np.add.at(spectrum, masks, coeffs)
    return HypercubeFunction(n, hadamard(spectrum))


def lp_norm_values(values: np.ndarray, p: float, axis: int = -1,
                   weights: np.ndarray | None = None) -> np.ndarray:
    """L_p norm w.r.t. a probability vector (uniform when ``weights`` is None)."""
    p = float(p)
    if not p >= 1:
        raise DomainError(f"exponent must be >= 1, got {p}")
    a = np.abs(np.asarray(values, dtype=np.float64))
    if np.isinf(p):
        return a.max(axis=axis)
    if p == 1:
        powered = a
    elif p == 2:
        powered = a * a
    elif p.is_integer() and p <= 16:
        powered = a ** int(p)
    else:
        powered = a ** p
    if weights is None:
        mean = powered.mean(axis=axis)
    else:
        mean = np.tensordot(powered, weights, axes=([axis], [0]))
    return mean ** (1.0 / p)


def lp_norm(f: HypercubeFunction, p: float) -> float:
    """``(E |f|^p)^(1/p)`` under the uniform probability; ``max |f|`` for p = inf."""
    return float(lp_norm_values(f.values, p))


def inner(f: HypercubeFunction, g: HypercubeFunction) -> float:
    """Probability inner product ``E[f g]``."""
    _same_cube(f, g)
    return float(np.dot(f.values, g.values) / f.size)


def block_average(array: np.ndarray, n: int, mask: int, axis: int = 0) -> np.ndarray:
    """Average out every coordinate outside ``mask`` along ``axis``.

    Works on stacked data: ``array.shape[axis]`` must be ``2**n``.
    """
    mask = check_mask(n, mask)
    a = np.moveaxis(np.asarray(array, dtype=np.float64), axis, 0)
    rest = a.shape[1:]
    if a.shape[0] != 1 << n:
        raise DomainError("axis length must be 2**n")
    if n == 0:
        return np.moveaxis(a.copy(), 0, axis)
    cube = a.reshape((2,) * n + rest)
    # reshape axis k carries bit n-1-k
    drop = tuple(k for k in range(n) if not (mask >> (n - 1 - k)) & 1)
    if drop:
        cube = np.broadcast_to(cube.mean(axis=drop, keepdims=True), cube.shape)
    return np.moveaxis(np.ascontiguousarray(cube).reshape(a.shape), 0, axis)


def conditional_expectation(f: HypercubeFunction, mask: int) -> HypercubeFunction:
    """Project ``f`` onto functions of the coordinates in ``mask``.

    The result keeps exactly the Walsh coefficients of sets contained in
    ``mask``.
    """
    return HypercubeFunction(f.n, block_average(f.values, f.n, mask))

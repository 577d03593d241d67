"""Functions on the unit sphere S^(n-1) and quadrature rules that integrate them.

All sphere integrals carry the normalized measure (2*pi)^(-n) * d_S internally,
so downstream formulas can be written without loose powers of 2*pi.

Supported dimensions are n in {1, 2, 3}:

* n = 1: S^0 is the two points +-1 with counting measure.
* n = 2: equispaced trapezoid rule on the circle, exact for trigonometric
  polynomials of degree < M.
* n = 3: product Gauss-Legendre (polar cosine) x trapezoid (azimuth) rule.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numerics import gauss_legendre
from .errors import DimensionError

SURFACE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

DEFAULT_RESOLUTION = 4


@dataclass(frozen=True)
class AngularProfile:
    """A smooth complex function on S^(n-1), the angular part of one term.

    ``kind`` is one of:

    * ``"const"``: constant value (any n),
    * ``"pair"``: values at +1 and -1 (n = 1),
    * ``"fourier"``: finite Fourier series in the polar angle (n = 2),
      ``data`` maps mode k to the coefficient of exp(i*k*theta),
    * ``"callable"``: general smooth vectorized evaluator.
    """

    n: int
    kind: str
    data: object
    label: str = ""

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(n: int, value: complex = 1.0) -> "AngularProfile":
        return AngularProfile(n, "const", complex(value), "const")

    @staticmethod
    def pair(value_plus: complex, value_minus: complex) -> "AngularProfile":
        return AngularProfile(1, "pair", (complex(value_plus), complex(value_minus)), "pair")

    @staticmethod
    def fourier(modes: dict[int, complex]) -> "AngularProfile":
        clean = {int(k): complex(v) for k, v in modes.items() if v != 0}
        return AngularProfile(2, "fourier", tuple(sorted(clean.items())), "fourier")

    @staticmethod
    def trig(cos_coeffs=(), sin_coeffs=(), const: complex = 0.0) -> "AngularProfile":
        """n=2 profile const + sum_k cos_coeffs[k-1] cos(k t) + sin_coeffs[k-1] sin(k t)."""
        modes: dict[int, complex] = {0: complex(const)}
        for k, c in enumerate(cos_coeffs, start=1):
            modes[k] = modes.get(k, 0.0) + c / 2.0
            modes[-k] = modes.get(-k, 0.0) + c / 2.0
        for k, s in enumerate(sin_coeffs, start=1):
            modes[k] = modes.get(k, 0.0) + s / (2.0j)
            modes[-k] = modes.get(-k, 0.0) - s / (2.0j)
        return AngularProfile.fourier(modes)

    @staticmethod
    def coordinate(n: int, axis: int = 0) -> "AngularProfile":
        """The odd profile omega_axis."""
        if n == 1:
            return AngularProfile.pair(1.0, -1.0)
        if n == 2 and axis == 0:
            return AngularProfile.trig(cos_coeffs=(1.0,))
        if n == 2 and axis == 1:
            return AngularProfile.trig(sin_coeffs=(1.0,))
        return AngularProfile(n, "callable", lambda nodes: nodes[:, axis] + 0j,
                              f"omega_{axis}")

    @staticmethod
    def from_callable(n: int, fn: Callable[[np.ndarray], np.ndarray],
                      label: str = "callable") -> "AngularProfile":
        return AngularProfile(n, "callable", fn, label)

    # -- evaluation ----------------------------------------------------------

    def eval_nodes(self, nodes: np.ndarray) -> np.ndarray:
        """Evaluate at an (m, n) array of unit vectors."""
        nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
        if nodes.shape[1] != self.n:
            raise DimensionError(f"profile dimension {self.n} vs nodes {nodes.shape[1]}")
        if self.kind == "const":
            return np.full(nodes.shape[0], self.data, dtype=complex)
        if self.kind == "pair":
            vp, vm = self.data
            return np.where(nodes[:, 0] > 0, vp, vm).astype(complex)
        if self.kind == "fourier":
            theta = np.arctan2(nodes[:, 1], nodes[:, 0])
            out = np.zeros(nodes.shape[0], dtype=complex)
            for k, c in self.data:
                out += c * np.exp(1j * k * theta)
            return out
        return np.asarray(self.data(nodes), dtype=complex)

    def __call__(self, omega) -> complex:
        return complex(self.eval_nodes(np.atleast_2d(omega))[0])

    # -- algebra -------------------------------------------------------------

    def scaled(self, c: complex) -> "AngularProfile":
        c = complex(c)
        if self.kind == "const":
            return AngularProfile(self.n, "const", self.data * c, self.label)
        if self.kind == "pair":
            vp, vm = self.data
            return AngularProfile.pair(vp * c, vm * c)
        if self.kind == "fourier":
            return AngularProfile.fourier({k: v * c for k, v in self.data})
        fn = self.data
        return AngularProfile(self.n, "callable", lambda nodes: c * fn(nodes), self.label)

    def __mul__(self, other: "AngularProfile") -> "AngularProfile":
        if self.n != other.n:
            raise DimensionError("profile dimensions differ")
        if self.kind == "const":
            return other.scaled(self.data)
        if other.kind == "const":
            return self.scaled(other.data)
        if self.kind == "pair" and other.kind == "pair":
            return AngularProfile.pair(self.data[0] * other.data[0],
                                       self.data[1] * other.data[1])
        if self.kind == "fourier" and other.kind == "fourier":
            modes: dict[int, complex] = {}
            for k1, c1 in self.data:
                for k2, c2 in other.data:
                    modes[k1 + k2] = modes.get(k1 + k2, 0.0) + c1 * c2
            return AngularProfile.fourier(modes)
        a, b = self, other
        return AngularProfile(self.n, "callable",
                              lambda nodes: a.eval_nodes(nodes) * b.eval_nodes(nodes),
                              f"{self.label}*{other.label}")

    def __add__(self, other: "AngularProfile") -> "AngularProfile":
        if self.n != other.n:
            raise DimensionError("profile dimensions differ")
        if self.kind == "const" and other.kind == "const":
            return AngularProfile(self.n, "const", self.data + other.data, "const")
        if self.kind == "pair" and other.kind == "pair":
            return AngularProfile.pair(self.data[0] + other.data[0],
                                       self.data[1] + other.data[1])
        if self.kind == "fourier" and other.kind == "fourier":
            modes = dict(self.data)
            for k, v in other.data:
                modes[k] = modes.get(k, 0.0) + v
            return AngularProfile.fourier(modes)
        if self.kind == "const" and other.kind == "fourier":
            modes = dict(other.data)
            modes[0] = modes.get(0, 0.0) + self.data
            return AngularProfile.fourier(modes)
        if self.kind == "fourier" and other.kind == "const":
            return other + self
        a, b = self, other
        return AngularProfile(self.n, "callable",
                              lambda nodes: a.eval_nodes(nodes) + b.eval_nodes(nodes),
                              f"{self.label}+{other.label}")

    def times_omega_sign(self) -> "AngularProfile":
        """n=1 only: multiply by omega (used by xi-differentiation)."""
        if self.n != 1:
            raise DimensionError("times_omega_sign is n=1 only")
        if self.kind == "const":
            return AngularProfile.pair(self.data, -self.data)
        vp, vm = self.data
        return AngularProfile.pair(vp, -vm)

    def merge_key(self):
        """Structural key for coalescing identical profiles, or None."""
        if self.kind in ("const", "pair", "fourier"):
            return (self.n, self.kind, self.data)
        return None

    @property
    def smoothness_class(self) -> str:
        if self.kind == "const":
            return "constant"
        if self.kind in ("pair", "fourier"):
            return "trig-polynomial"
        return "general-smooth"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights integrating smooth functions on S^(n-1).

    ``exactness`` describes the class integrated exactly.  Weights sum to the
    raw surface area; the (2*pi)^(-n) normalization is applied by
    :func:`integrate_sphere`.
    """

    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    exactness: str = ""
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        total = float(np.sum(self.weights))
        area = SURFACE_AREA[self.n]
        if abs(total - area) > 1e-12 * area:
            raise AssertionError("quadrature weights do not sum to the sphere area")
        norms = np.linalg.norm(np.atleast_2d(self.nodes), axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-14:
            raise AssertionError("quadrature nodes are not unit vectors")


@functools.lru_cache(maxsize=32)
def sphere_quadrature(n: int, resolution: int = DEFAULT_RESOLUTION) -> QuadratureRule:
    """Build the quadrature rule for S^(n-1) at the given dyadic resolution.

    For n = 2 the node count is M = 2^(resolution+2) (64 at the default
    resolution 4); doubling ``resolution`` by one doubles M.
    """
    if n not in (1, 2, 3):
        raise DimensionError(f"unsupported dimension n={n}; supported: 1, 2, 3")
    if resolution < 1:
        raise DimensionError("resolution must be >= 1")
    if n == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
        return QuadratureRule(1, nodes, weights, "all functions on S^0", resolution)
    if n == 2:
        m = 2 ** (resolution + 2)
        theta = 2.0 * np.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(m, 2.0 * np.pi / m)
        return QuadratureRule(2, nodes, weights,
                              f"trig polynomials of degree < {m}", resolution)
    npolar = 2 ** (resolution + 1)
    mazim = 2 ** (resolution + 2)
    x, w = gauss_legendre(npolar)          # x = cos(polar angle)
    theta = 2.0 * np.pi * np.arange(mazim) / mazim
    sin_phi = np.sqrt(1.0 - x ** 2)
    nodes = []
    weights = []
    for xi, wi in zip(x, w):
        s = math.sqrt(max(0.0, 1.0 - xi * xi))
        for t in theta:
            nodes.append((s * math.cos(t), s * math.sin(t), xi))
            weights.append(wi * 2.0 * np.pi / mazim)
    del sin_phi
    return QuadratureRule(3, np.array(nodes), np.array(weights),
                          f"spherical polynomials of degree < {npolar}", resolution)


def integrate_sphere(p: AngularProfile, rule: QuadratureRule) -> complex:
    """Normalized sphere integral (2*pi)^(-n) * sum_i w_i p(node_i)."""
    if p.n != rule.n:
        raise DimensionError(f"profile dimension {p.n} vs rule dimension {rule.n}")
    vals = p.eval_nodes(rule.nodes)
    return complex(np.dot(rule.weights, vals)) / (2.0 * math.pi) ** rule.n


def integrate_profile(p: AngularProfile, resolution: int = DEFAULT_RESOLUTION) -> complex:
    """Convenience wrapper building the matching rule."""
    return integrate_sphere(p, sphere_quadrature(p.n, resolution))


def integrate_sphere_function(n: int, fn: Callable[[np.ndarray], np.ndarray],
                              resolution: int = DEFAULT_RESOLUTION,
                              max_resolution: int = 8, tol: float = 1e-11) -> complex:
    """Normalized integral of a general smooth function, doubling until stable.

    Used for integrands that are smooth but not trigonometric polynomials
    (e.g. log|C^(-1) omega| factors), where the equispaced rules converge
    spectrally but need enough nodes.
    """
    prev = None
    res = resolution
    while True:
        rule = sphere_quadrature(n, res)
        val = complex(np.dot(rule.weights, np.asarray(fn(rule.nodes), dtype=complex)))
        val /= (2.0 * math.pi) ** n
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        if res >= max_resolution:
            return val
        prev = val
        res += 1

"""Laurent expansion of z -> finite-part integral of a holomorphic family.

The analytic route assembles the coefficients from local data at z0:

    b_1 = -(1/alpha'(z0)) * int_S sigma(z0)_{-n},
    c_0 = fp(sigma(z0)) - (1/alpha') int_S sigma'(z0)_{-n,0}
          + (alpha''/2 alpha'^2) int_S sigma(z0)_{-n},
    c_k = fp(sigma^(k)(z0)) - k! sum_{m=0}^{k+1} c_{k-m} s_m / m!,

with s_m the sphere integral of the log-free degree -n part of the m-th
derivative slice and c_* the reciprocal-order-series coefficients.  Poles are
at most simple for non-critical order paths.

The empirical route never sees those formulas: it evaluates the finite-part
integral of slices on a ring around z0 and extracts coefficients by discrete
contour integrals.  Acceptance compares the two.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as num
from .angular import integrate_sphere, integrate_sphere_function, sphere_quadrature
from .errors import NonCriticalOrderError
from .families import HolomorphicFamily, reciprocal_order_series
from .finitepart import finite_part_integral, default_truncation, residue_density

DEG_TOL = 1e-9


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated Laurent data at z0: principal b_j and regular c_k of (z-z0)^k/k!."""

    z0: complex
    principal: tuple[complex, ...]
    regular: tuple[complex, ...]
    K: int
    method: str = "analytic"
    fit_residual: float = 0.0

    @property
    def residue(self) -> complex:
        return self.principal[0] if self.principal else 0.0 + 0.0j

    def b(self, j: int) -> complex:
        return self.principal[j - 1] if 1 <= j <= len(self.principal) else 0.0 + 0.0j

    def c(self, k: int) -> complex:
        return self.regular[k] if 0 <= k <= self.K else 0.0 + 0.0j

    def evaluate(self, z: complex) -> complex:
        w = z - self.z0
        val = sum(bj * w ** (-(j + 1)) for j, bj in enumerate(self.principal))
        val += sum(ck * w ** k / math.factorial(k)
                   for k, ck in enumerate(self.regular))
        return val

    def scaled(self, factor: complex) -> "LaurentSeries":
        return LaurentSeries(self.z0, tuple(factor * b for b in self.principal),
                             tuple(factor * c for c in self.regular),
                             self.K, self.method, self.fit_residual * abs(factor))


def _sphere_moments(F: HolomorphicFamily, z0: complex, K: int, x: float,
                    resolution: int) -> np.ndarray:
    """s_m = int_S (sigma^(m)(z0))_{-n, 0} for m = 0..K."""
    j0 = F.pole_component(z0)
    s = np.zeros(K + 1, dtype=complex)
    if j0 is None:
        return s
    rule = sphere_quadrature(F.n, resolution)
    for j, prof, xc, _ext, C in F.component_jets(z0, K):
        if j != j0:
            continue
        ang = integrate_sphere(prof, rule) * complex(xc(x))
        for m in range(K + 1):
            s[m] += math.factorial(m) * C[m, 0] * ang
    return s


def laurent_expansion(F: HolomorphicFamily, z0: complex, K: int = 3,
                      x: float = 0.0, resolution: int = 4,
                      N: int | None = None) -> LaurentSeries:
    """Analytic Laurent expansion of z -> fp-integral of sigma(z) at z0."""
    if K < 0:
        raise ValueError("K must be >= 0")
    j0 = F.pole_component(z0)
    fp = []
    for k in range(K + 1):
        sl = F.derivative_slice(z0, k)
        fp.append(finite_part_integral(sl, N if N is not None
                                       else default_truncation(sl), x, resolution))
    if j0 is None:
        return LaurentSeries(z0, (), tuple(fp), K, "analytic")
    c = reciprocal_order_series(F.path, z0, K + 1)  # c[p] = c_{p-1}
    s = _sphere_moments(F, z0, K + 1, x, resolution)
    b1 = -c[0] * s[0]
    regular = []
    for k in range(K + 1):
        corr = 0.0 + 0.0j
        for m in range(k + 2):
            corr += c[k - m + 1] * s[m] / math.factorial(m)
        regular.append(fp[k] - math.factorial(k) * corr)
    principal = (b1,) if abs(b1) > 0 else (b1,)
    return LaurentSeries(z0, principal, tuple(regular), K, "analytic")


def default_ring_radius(F: HolomorphicFamily, z0: complex) -> float:
    """A quarter of the gap to the nearest other candidate pole."""
    others = [p for p in F.poles() if abs(p - z0) > 1e-8]
    gap = min((abs(p - z0) for p in others), default=1.0)
    return 0.25 * min(gap, 1.0)


def empirical_laurent(F: HolomorphicFamily, z0: complex, K: int = 3,
                      ring_radius: float | None = None, points: int = 64,
                      x: float = 0.0, resolution: int = 4,
                      threads: int = 1, deepest_pole: int = 3) -> LaurentSeries:
    """Contour-extraction oracle for the same Laurent coefficients."""
    r = ring_radius if ring_radius is not None else default_ring_radius(F, z0)
    for p in F.poles():
        if abs(p - z0) > 1e-8 and abs(p - z0) <= r + 1e-12:
            raise ValueError(f"ring of radius {r} around {z0} touches the pole {p}")
    zs = num.ring_points(z0, r, points)

    def fp_at(z):
        sl = F.slice(z)
        return finite_part_integral(sl, default_truncation(sl), x, resolution)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = np.array(list(ex.map(fp_at, zs)), dtype=complex)
    else:
        vals = np.array([fp_at(z) for z in zs], dtype=complex)
    coeffs = num.ring_coefficients(vals, r, -deepest_pole, K)
    resid = num.ring_fit_residual(vals, coeffs, r)
    principal = tuple(coeffs[-j] for j in range(1, deepest_pole + 1))
    regular = tuple(math.factorial(k) * coeffs[k] for k in range(K + 1))
    return LaurentSeries(z0, principal, regular, K, "empirical", resid)


def model_trace(F: HolomorphicFamily, z0: complex, K: int = 3,
                geometry: str = "s1", method: str = "analytic",
                resolution: int = 4, **kwargs) -> LaurentSeries:
    """Laurent series of the model trace: x-integral of the pointwise series.

    On the circle model the x-integral of a trigonometric-polynomial
    coefficient is 2*pi times its constant Fourier mode; the point model has
    no x-integral.
    """
    if geometry not in ("s1", "point"):
        raise ValueError(f"unsupported model geometry {geometry!r}")
    fam = F.x_averaged() if geometry == "s1" else F
    vol = 2.0 * math.pi if geometry == "s1" else 1.0
    if method == "analytic":
        series = laurent_expansion(fam, z0, K, 0.0, resolution)
    elif method == "empirical":
        series = empirical_laurent(fam, z0, K, resolution=resolution, **kwargs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return series.scaled(vol)


@dataclass(frozen=True)
class DensityInvarianceReport:
    """Combined canonical-plus-residue density before/after a linear pullback."""

    combined_x: complex
    combined_y: complex
    tr_shift: complex
    res_shift: complex

    @property
    def mismatch(self) -> float:
        return abs(self.combined_x - self.combined_y)


def density_invariance_check(F: HolomorphicFamily, z0: complex, C: np.ndarray,
                             x: float = 0.0, resolution: int = 4)\
        -> DensityInvarianceReport:
    """Check invariance of fp(sigma(z0)) - (1/alpha') res_0(sigma'(z0)).

    The transformed value uses the pullback xi -> C xi with the |det C|
    Jacobian factor on both the finite-part and the residue term; the two
    individual shifts are generically nonzero and opposite, their sum is a
    coordinate-free density value.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    det = abs(np.linalg.det(C))
    if det < 1e-14:
        raise ValueError("C must be invertible")
    Cinv = np.linalg.inv(C)
    alpha_p = F.path.prime(z0)
    if abs(alpha_p) < 1e-14:
        raise NonCriticalOrderError("critical order point")
    from .finitepart import transform_finite_part  # local to avoid cycle noise

    slice0 = F.slice(z0)
    deriv1 = F.derivative_slice(z0, 1)
    fp_x = finite_part_integral(slice0, default_truncation(slice0), x, resolution)
    res_x = residue_density(deriv1, x, resolution)
    fp_y = transform_finite_part(slice0, C, None, x, resolution)
    res_y = 0.0 + 0.0j
    neg_n_terms = [t for t in deriv1.terms if abs(t.degree + F.n) < DEG_TOL]
    if neg_n_terms:
        def fn(nodes):
            img = nodes @ C.T
            rho = np.linalg.norm(img, axis=1)
            acc = np.zeros(nodes.shape[0], dtype=complex)
            for t in neg_n_terms:
                vals = t.profile.eval_nodes(img / rho[:, None]) * rho ** (-F.n)
                if t.log_power:
                    vals = vals * np.log(rho) ** t.log_power
                acc += t.coeff * complex(t.x_coeff(x)) * vals
            return acc
        res_y = det * integrate_sphere_function(F.n, fn, resolution,
                                                max_resolution=9)
    combined_x = fp_x - res_x / alpha_p
    combined_y = fp_y - res_y / alpha_p
    return DensityInvarianceReport(combined_x, combined_y,
                                   fp_y - fp_x, -(res_y - res_x) / alpha_p)

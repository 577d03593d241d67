"""Independent spectral ground truth on the circle.

Multiplier models act diagonally on Fourier modes: A e^{ikx} = a(k) e^{ikx},
Q e^{ikx} = lambda(k) e^{ikx} with lambda nonvanishing.  The generalized zeta
function sum_k a(k) lambda(k)^(-z) is continued meromorphically by peeling off
finitely many polyhomogeneous tail terms, each summed in closed form through
the Hurwitz zeta function, plus a rapidly convergent correction sum.

This module never touches the symbol calculus: it is the ground truth the
symbol-side Laurent data is compared against (residues must agree at every
pole; constant terms differ by an entire Poisson-type correction).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import _numerics as num
from .errors import PoleError, UnsupportedModelError

# B_{2r} for r = 1..12 (Euler-Maclaurin correction terms)
_BERNOULLI = (
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0,
    -174611.0 / 330.0, 854513.0 / 138.0, -236364091.0 / 2730.0,
)

_SHIFT_THRESHOLD = 20.0


def hurwitz_zeta(s: complex, a: float) -> complex:
    """Hurwitz zeta by Euler-Maclaurin with 12 Bernoulli correction terms.

    Requires a > 0 and s != 1; accurate to ~1e-13 for moderate |s| once the
    argument is shifted to a + N >= 20.
    """
    s = complex(s)
    if abs(s - 1.0) < 1e-14:
        raise PoleError("Hurwitz zeta pole at s = 1", 1.0)
    if a <= 0:
        raise ValueError("hurwitz_zeta needs a > 0")
    N = max(0, int(math.ceil(_SHIFT_THRESHOLD - a)))
    base = sum((a + k) ** (-s) for k in range(N))
    w = a + N
    total = base + w ** (1.0 - s) / (s - 1.0) + 0.5 * w ** (-s)
    poch = s
    fact = 1.0
    for r, b2r in enumerate(_BERNOULLI, start=1):
        fact *= (2.0 * r) * (2.0 * r - 1.0)
        total += b2r / fact * poch * w ** (-s - 2 * r + 1)
        poch *= (s + 2 * r - 1) * (s + 2 * r)
    return total


def riemann_zeta(s: complex) -> complex:
    return hurwitz_zeta(s, 1.0)


# ---------------------------------------------------------------------------
# Series helpers in the 1/k variable
# ---------------------------------------------------------------------------

def _series_log1p(v: np.ndarray) -> np.ndarray:
    """Series of log(1 + v) for v with v[0] = 0."""
    J = len(v)
    out = np.zeros(J, dtype=complex)
    power = np.zeros(J, dtype=complex)
    power[0] = 1.0
    for m in range(1, J):
        power = num.jet_mul(power, v)
        out += (-1.0) ** (m + 1) / m * power
    return out


def _series_pow(v: np.ndarray, w: complex) -> np.ndarray:
    """Series of (1 + v)^w for v with v[0] = 0."""
    return num.jet_exp(w * _series_log1p(v))


# ---------------------------------------------------------------------------
# Multiplier models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyhomTail:
    """Declared tail sum_j coeffs[j] |k|^(d - j), valid for |k| > k0."""

    d: float
    coeffs: tuple[complex, ...]

    def value(self, k: np.ndarray) -> np.ndarray:
        k = np.abs(np.asarray(k, dtype=float))
        out = np.zeros(k.shape, dtype=complex)
        for j, c in enumerate(self.coeffs):
            if c != 0:
                out = out + c * k ** (self.d - j)
        return out


@dataclass(frozen=True)
class MultiplierModel:
    """Fourier multiplier pair (a, lambda) with polyhomogeneous tails.

    ``a_fn``/``lam_fn`` evaluate exactly at integers; the tails declare the
    large-|k| expansions used for the meromorphic continuation.  ``smooth``
    optionally extends lambda (and a) to smooth functions of a real variable
    for Poisson-summation checks.
    """

    label: str
    k0: int
    a_fn: Callable[[np.ndarray], np.ndarray]
    lam_fn: Callable[[np.ndarray], np.ndarray]
    a_tail: PolyhomTail
    lam_tail: PolyhomTail
    exact_tail: bool = False
    smooth: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        ks = np.arange(-self.k0, self.k0 + 1)
        lam = np.asarray(self.lam_fn(ks), dtype=complex)
        if np.min(np.abs(lam)) < 1e-12:
            raise UnsupportedModelError("model multiplier has a kernel mode")
        if self.lam_tail.coeffs[0] == 0:
            raise UnsupportedModelError("leading tail coefficient vanishes")

    # -- continuation ---------------------------------------------------------

    def tail_exponent_coeffs(self, z: complex, J: int = 12):
        """[(s_j(z), w_j(z))]: a(k) lam(k)^(-z) ~ sum_j w_j k^(-s_j) for k > k0."""
        lamc = np.array(self.lam_tail.coeffs, dtype=complex)
        if len(lamc) < J:
            lamc = np.concatenate([lamc, np.zeros(J - len(lamc), dtype=complex)])
        c0 = lamc[0]
        v = lamc[:J] / c0
        v[0] = 0.0
        powz = _series_pow(v, -z)
        ac = np.array(self.a_tail.coeffs, dtype=complex)
        if len(ac) < J:
            ac = np.concatenate([ac, np.zeros(J - len(ac), dtype=complex)])
        w = num.jet_mul(powz, ac[:J]) * c0 ** (-z)
        out = []
        for j in range(J):
            s_j = self.lam_tail.d * z - self.a_tail.d + j
            out.append((s_j, w[j]))
        return out

    def poles(self, re_min: float = -4.0, re_max: float = 4.0,
              J: int = 16) -> list[complex]:
        """Candidate poles (1 + d_a - j)/d_lam of the continued zeta sum."""
        out = []
        for j in range(J):
            z = (1.0 + self.a_tail.d - j) / self.lam_tail.d
            if re_min - 1e-9 <= z <= re_max + 1e-9:
                out.append(complex(z))
        return out

    def residue_at(self, z0: complex, J: int = 12) -> complex:
        """Residue of the continued sum at a candidate pole."""
        res = 0.0 + 0.0j
        for s_j, w_j in self.tail_exponent_coeffs(z0, J):
            if abs(s_j - 1.0) < 1e-9:
                res += 2.0 * w_j / self.lam_tail.d
        return res


def multiplier_zeta(model: MultiplierModel, z: complex, J: int = 12,
                    correction_cap: int = 4000, tol: float = 1e-13) -> complex:
    """sum_k a(k) lambda(k)^(-z), meromorphically continued.

    Direct values for |k| <= k0, Hurwitz-zeta closed forms for the declared
    tail terms, and a rapidly convergent correction sum for the difference
    between the exact multiplier and its tail model.
    """
    z = complex(z)
    coeffs = model.tail_exponent_coeffs(z, J)
    for s_j, w_j in coeffs:
        if abs(s_j - 1.0) < 1e-10 and abs(w_j) > 1e-15:
            raise PoleError(f"zeta evaluation at pole z={z}", z,
                            model.residue_at(z, J))
    ks = np.arange(-model.k0, model.k0 + 1)
    lam = np.asarray(model.lam_fn(ks), dtype=complex)
    avals = np.asarray(model.a_fn(ks), dtype=complex)
    total = complex(np.sum(avals * np.exp(-z * np.log(lam))))
    for s_j, w_j in coeffs:
        if w_j != 0:
            total += 2.0 * w_j * hurwitz_zeta(s_j, model.k0 + 1.0)
    if not model.exact_tail:
        def model_vals(k):
            return model.a_tail.value(k) * \
                np.exp(-z * np.log(model.lam_tail.value(k)))

        def tail_model(k):
            out = np.zeros(k.shape, dtype=complex)
            for s_j, w_j in coeffs:
                out = out + w_j * np.abs(k) ** (-s_j)
            return out

        block = 64
        k = model.k0 + 1
        while k < correction_cap:
            ks = np.arange(k, min(k + block, correction_cap), dtype=float)
            lam = np.asarray(model.lam_fn(ks), dtype=complex)
            av = np.asarray(model.a_fn(ks), dtype=complex)
            lamm = np.asarray(model.lam_fn(-ks), dtype=complex)
            avm = np.asarray(model.a_fn(-ks), dtype=complex)
            direct = av * np.exp(-z * np.log(lam)) \
                + avm * np.exp(-z * np.log(lamm))
            corr = direct - 2.0 * tail_model(ks)
            total += complex(np.sum(corr))
            # stop at tolerance or at the float cancellation floor of the
            # direct terms, whichever is reached first
            floor = 32.0 * 2.2e-16 * float(np.max(np.abs(direct)))
            if np.max(np.abs(corr)) < max(tol, floor):
                break
            k += block
        else:
            warnings.warn(f"correction sum for {model.label} not converged "
                          f"below {tol} within {correction_cap} terms")
    return total


def spectral_laurent(model: MultiplierModel, z0: complex, K: int = 3,
                     ring_radius: float | None = None, points: int = 64,
                     J: int = 12, deepest_pole: int = 3):
    """Contour-fit Laurent data of the continued spectral zeta around z0."""
    from .laurent import LaurentSeries
    if ring_radius is None:
        others = [p for p in model.poles() if abs(p - z0) > 1e-8]
        gap = min((abs(p - z0) for p in others), default=1.0)
        ring_radius = 0.25 * min(gap, 1.0)
    zs = num.ring_points(z0, ring_radius, points)
    vals = np.array([multiplier_zeta(model, z, J) for z in zs], dtype=complex)
    coeffs = num.ring_coefficients(vals, ring_radius, -deepest_pole, K)
    resid = num.ring_fit_residual(vals, coeffs, ring_radius)
    principal = tuple(coeffs[-j] for j in range(1, deepest_pole + 1))
    regular = tuple(math.factorial(k) * coeffs[k] for k in range(K + 1))
    return LaurentSeries(z0, principal, regular, K, "spectral", resid)


# ---------------------------------------------------------------------------
# Poisson-type correction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonCorrection:
    value: complex
    terms: tuple[complex, ...]
    converged: bool


def poisson_correction(model: MultiplierModel, z: complex,
                       M_max: int) -> PoissonCorrection:
    """sum_{0 < |m| <= M_max} fhat_z(2 pi m) for f_z = a lambda^(-z) smooth.

    Requires the model to declare a smooth extension and Re(z) large enough
    for absolute convergence of the transform.
    """
    if M_max <= 0:
        return PoissonCorrection(0.0 + 0.0j, (), True)
    if model.smooth is None:
        raise UnsupportedModelError(
            f"model {model.label} declares no smooth extension")
    z = complex(z)
    if model.lam_tail.d * z.real <= 1.0:
        raise UnsupportedModelError("poisson correction needs the absolutely "
                                    "convergent range Re(z) > 1/d")

    def f(xi):
        arr = np.atleast_1d(np.asarray(xi, dtype=float))
        return np.asarray(model.smooth(arr), dtype=complex) ** (-z)

    terms = []
    for m in range(1, M_max + 1):
        w = 2.0 * math.pi * m
        re = quad(lambda t: f(t)[0].real, 0.0, np.inf, weight="cos", wvar=w,
                  limit=400)[0]
        im = quad(lambda t: f(t)[0].imag, 0.0, np.inf, weight="cos", wvar=w,
                  limit=400)[0]
        # fhat(2 pi m) = 2 int_0^inf f cos (f even); the +-m pair doubles it
        terms.append(4.0 * (re + 1j * im))
    total = complex(sum(terms))
    converged = len(terms) < 2 or abs(terms[-1]) < 1e-9 \
        or abs(terms[-1]) < 1e-6 * max(1.0, abs(total))
    if not converged:
        warnings.warn("poisson correction tail not converged in M_max")
    return PoissonCorrection(total, tuple(terms), converged)


def direct_sum_minus_integral(model: MultiplierModel, z: complex,
                              k_cut: int = 4000) -> complex:
    """sum_k f_z(k) - int f_z dxi evaluated directly (Re z large)."""
    if model.smooth is None:
        raise UnsupportedModelError("needs a smooth extension")
    z = complex(z)

    def f(xi):
        arr = np.atleast_1d(np.asarray(xi, dtype=float))
        return np.asarray(model.smooth(arr), dtype=complex) ** (-z)

    ks = np.arange(-k_cut, k_cut + 1, dtype=float)
    s = complex(np.sum(f(ks)))
    re = quad(lambda t: f(t)[0].real, -np.inf, np.inf, limit=400)[0]
    im = quad(lambda t: f(t)[0].imag, -np.inf, np.inf, limit=400)[0]
    return s - (re + 1j * im)


# ---------------------------------------------------------------------------
# Shipped models
# ---------------------------------------------------------------------------

def model_abs(label: str = "abs") -> MultiplierModel:
    """lambda(k) = max(|k|, 1): zeta is 1 + 2 zeta_R(z)."""
    return MultiplierModel(
        label, 1,
        a_fn=lambda k: np.ones(np.shape(k)),
        lam_fn=lambda k: np.maximum(np.abs(np.asarray(k, dtype=float)), 1.0),
        a_tail=PolyhomTail(0.0, (1.0,)),
        lam_tail=PolyhomTail(1.0, (1.0,)),
        exact_tail=True)


def model_sqrt(k0: int = 24, J: int = 14, label: str = "sqrt") -> MultiplierModel:
    """lambda(k) = sqrt(1 + k^2): smooth, poles at 1 - 2m."""
    coeffs = [0.0] * J
    for m in range(0, (J + 1) // 2):
        c = 1.0
        for i in range(m):
            c *= (0.5 - i) / (i + 1.0)
        if 2 * m < J:
            coeffs[2 * m] = c
    return MultiplierModel(
        label, k0,
        a_fn=lambda k: np.ones(np.shape(k)),
        lam_fn=lambda k: np.sqrt(1.0 + np.asarray(k, dtype=float) ** 2),
        a_tail=PolyhomTail(0.0, (1.0,)),
        lam_tail=PolyhomTail(1.0, tuple(coeffs)),
        smooth=lambda xi: np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2))


def model_laplace(label: str = "laplace") -> MultiplierModel:
    """lambda(k) = k^2 + 1 (differential model -Delta + 1)."""
    return MultiplierModel(
        label, 1,
        a_fn=lambda k: np.ones(np.shape(k)),
        lam_fn=lambda k: np.asarray(k, dtype=float) ** 2 + 1.0,
        a_tail=PolyhomTail(0.0, (1.0,)),
        lam_tail=PolyhomTail(2.0, (1.0, 0.0, 1.0)),
        exact_tail=True,
        smooth=lambda xi: np.asarray(xi, dtype=float) ** 2 + 1.0)


def model_linear_shift(shift: float = 0.5, label: str = "linshift") -> MultiplierModel:
    """lambda(k) = |k| + shift for k != 0, lambda(0) = shift."""
    def lam(k):
        k = np.abs(np.asarray(k, dtype=float))
        return k + shift

    return MultiplierModel(
        label, 1,
        a_fn=lambda k: np.ones(np.shape(k)),
        lam_fn=lam,
        a_tail=PolyhomTail(0.0, (1.0,)),
        lam_tail=PolyhomTail(1.0, (1.0, shift)),
        exact_tail=True)


SHIPPED_MODELS = {
    "abs": model_abs,
    "sqrt": model_sqrt,
    "laplace": model_laplace,
    "linshift": model_linear_shift,
}


def symbol_model(model: MultiplierModel, n: int = 1):
    """The elliptic symbol-side model matching a multiplier's tail."""
    from .zeta import EllipticModelSymbol
    c0 = complex(model.lam_tail.coeffs[0]).real
    lower = tuple((j, complex(c) / c0, None)
                  for j, c in enumerate(model.lam_tail.coeffs)
                  if j >= 1 and c != 0)
    return EllipticModelSymbol(n, c0, model.lam_tail.d, lower)

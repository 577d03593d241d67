"""Shared low-level numerics: quadrature panels, truncated Taylor jets, contours.

Everything here is pure and cache-backed; the caches are read-only after
construction and safe to share between threads.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import roots_legendre


@functools.lru_cache(maxsize=64)
def gauss_legendre(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = roots_legendre(npts)
    return x.copy(), w.copy()


def panel_nodes(a: float, b: float, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    x, w = gauss_legendre(npts)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def integrate_panels(f, edges, npts: int = 32) -> complex:
    """Integrate a vectorized callable over consecutive panels given by edges."""
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = panel_nodes(a, b, npts)
        total += complex(np.dot(w, f(x)))
    return total


def _merge_edges(edges: list[float], extra, lo: float, hi: float) -> list[float]:
    pts = set(edges)
    for b in extra or ():
        if lo < b < hi:
            pts.add(float(b))
    return sorted(pts)


def integrate_dyadic_unit(f, levels: int = 48, npts: int = 24,
                          breakpoints=()) -> complex:
    """Integrate f over (0, 1] with panels refined dyadically toward 0.

    Handles integrable algebraic/log endpoint behaviour at 0; nodes never
    touch 0 itself.  ``breakpoints`` are extra panel edges at radii where the
    integrand loses smoothness.
    """
    edges = [1.0]
    for m in range(1, levels + 1):
        edges.append(2.0 ** (-m))
    edges.append(0.0)
    edges.reverse()
    edges = _merge_edges(edges, breakpoints, 0.0, 1.0)
    return integrate_panels(f, edges, npts)


def integrate_inverse_dyadic(f, upper: float = math.inf, levels: int = 48,
                             npts: int = 24, breakpoints=()) -> complex:
    """Integrate f over [1, upper) via r = 1/t with dyadic refinement at t=0.

    Requires f integrable at infinity.  For finite upper the substitution
    integrates [1, upper] exactly on t in [1/upper, 1].
    """
    t_lo = 0.0 if math.isinf(upper) else 1.0 / upper

    def g(t):
        r = 1.0 / t
        return f(r) * r * r

    edges = [1.0]
    m = 1
    while 2.0 ** (-m) > t_lo and m <= levels:
        edges.append(2.0 ** (-m))
        m += 1
    edges.append(t_lo)
    edges.reverse()
    if edges[0] == edges[1]:
        edges = edges[1:]
    edges = _merge_edges(edges, [1.0 / b for b in (breakpoints or ()) if b > 1.0],
                         t_lo, 1.0)
    return integrate_panels(g, edges, npts)


# ---------------------------------------------------------------------------
# Closed-form radial integrals for one homogeneous log term.
#
# With a = degree + n != 0:
#   I(R) = int_1^R r^(a-1) log^l r dr
#        = R^a * sum_{i=0..l} (-1)^(l-i) (l!/i!) log^i R / a^(l-i+1)
#          + (-1)^(l+1) l! / a^(l+1)
# and for a = 0: I(R) = log^(l+1) R / (l+1), no constant part.
# ---------------------------------------------------------------------------

def radial_divergent_coeffs(a: complex, l: int) -> list[tuple[int, complex]]:
    """Coefficients [(i, c_i)] of R^a log^i R in int_1^R r^(a-1) log^l r dr."""
    out = []
    for i in range(l + 1):
        c = (-1.0) ** (l - i) * math.factorial(l) / math.factorial(i)
        out.append((i, c / a ** (l - i + 1)))
    return out


def radial_constant_part(a: complex, l: int) -> complex:
    """R-independent part of int_1^R r^(a-1) log^l r dr for a != 0."""
    return (-1.0) ** (l + 1) * math.factorial(l) / a ** (l + 1)


def radial_unit_ball_closed(a: complex, l: int) -> complex:
    """int_0^1 r^(a-1) log^l r dr in closed form; needs Re a > 0."""
    if a.real <= 0:
        raise ValueError("closed-form unit-ball integral needs Re(degree)+n > 0")
    return (-1.0) ** l * math.factorial(l) / a ** (l + 1)


# ---------------------------------------------------------------------------
# Truncated Taylor jets.  A jet is a 1-D complex ndarray j with j[m] the
# coefficient of w^m; all operations truncate at the shorter length.
# ---------------------------------------------------------------------------

def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b) if len(b) else 0)
    n = min(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    for m in range(n):
        out[m] = np.dot(a[: m + 1], b[m::-1])
    return out


def jet_scale(a: np.ndarray, c: complex) -> np.ndarray:
    return a * c


def jet_shift_derivative(a: np.ndarray) -> np.ndarray:
    """Jet of f' from the jet of f (one order shorter)."""
    n = len(a)
    return np.array([(m + 1) * a[m + 1] for m in range(n - 1)], dtype=complex)


def jet_exp(g: np.ndarray) -> np.ndarray:
    """Jet of exp(g)."""
    n = len(g)
    out = np.zeros(n, dtype=complex)
    out[0] = np.exp(g[0])
    for m in range(1, n):
        acc = 0.0 + 0.0j
        for i in range(1, m + 1):
            acc += i * g[i] * out[m - i]
        out[m] = acc / m
    return out


def jet_reciprocal(a: np.ndarray) -> np.ndarray:
    """Jet of 1/f; requires a[0] != 0."""
    if a[0] == 0:
        raise ZeroDivisionError("reciprocal of a jet with zero constant term")
    n = len(a)
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0 / a[0]
    for m in range(1, n):
        out[m] = -np.dot(a[1: m + 1], out[m - 1:: -1]) / a[0]
    return out


def jet_falling_binomial(e: np.ndarray, m: int) -> np.ndarray:
    """Jet of binom(f, m) = f(f-1)...(f-m+1)/m! from the jet of f."""
    out = np.zeros_like(e)
    out[0] = 1.0
    for i in range(m):
        shifted = e.copy()
        shifted[0] -= i
        out = jet_mul(out, shifted)
    return out / math.factorial(m)


# ---------------------------------------------------------------------------
# Bivariate jets in (w, L): 2-D arrays B with B[m, l] the coefficient of
# w^m L^l.  Used for z-derivatives of |xi|^(alpha(z)-j) families where
# L stands for log|xi|.
# ---------------------------------------------------------------------------

def ljet_from_order_jet(alpha_jet: np.ndarray) -> np.ndarray:
    """Bivariate jet of exp((alpha(z) - alpha(z0)) L).

    alpha_jet[m] is the Taylor coefficient of alpha at z0; the constant term
    drops out.  Result B has shape (K+1, K+2); B[m, l] multiplies w^m L^l.
    """
    k1 = len(alpha_jet)
    out = np.zeros((k1, k1 + 1), dtype=complex)
    out[0, 0] = 1.0
    # F' = G' F with G = sum_{m>=1} alpha_jet[m] w^m L
    for m in range(1, k1):
        for i in range(1, m + 1):
            # g_i = alpha_jet[i] * L: multiplying by it raises l by one
            out[m, 1:] += (i / m) * alpha_jet[i] * out[m - i, :-1]
    return out


def ljet_mul_scalar_jet(big: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Multiply a bivariate jet by a scalar jet in w."""
    k1 = min(big.shape[0], len(h))
    out = np.zeros((k1, big.shape[1]), dtype=complex)
    for m in range(k1):
        for i in range(m + 1):
            out[m] += h[i] * big[m - i]
    return out


# ---------------------------------------------------------------------------
# Discrete contour (ring) Laurent extraction.
# ---------------------------------------------------------------------------

def ring_points(z0: complex, radius: float, npts: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(npts) / npts
    return z0 + radius * np.exp(1j * theta)


def ring_coefficients(values: np.ndarray, radius: float, m_min: int,
                      m_max: int) -> dict[int, complex]:
    """Laurent coefficients a_m of sum a_m (z-z0)^m from equispaced ring values."""
    values = np.asarray(values, dtype=complex)
    npts = len(values)
    fhat = np.fft.fft(values) / npts
    out = {}
    for m in range(m_min, m_max + 1):
        out[m] = fhat[m % npts] * radius ** (-m)
    return out


def ring_fit_residual(values: np.ndarray, coeffs: dict[int, complex],
                      radius: float) -> float:
    """Max reconstruction error of the truncated series on its own ring."""
    npts = len(values)
    theta = 2.0 * np.pi * np.arange(npts) / npts
    w = radius * np.exp(1j * theta)
    recon = np.zeros(npts, dtype=complex)
    for m, c in coeffs.items():
        recon += c * w ** m
    return float(np.max(np.abs(recon - values)))

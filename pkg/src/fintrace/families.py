"""Holomorphic families of symbols with controlled z-derivatives.

A family is a finite list of components

    sigma(z)(x, xi) = sum_j  h_j(z) * profile(omega) * x_coeff(x)
                              * rad(|xi|)^(alpha(z) - j) * log^l0 |xi|

with an order path alpha(z) and per-entry scalar coefficient functions h(z)
that carry exact Taylor jets.  All z-differentiation is done with truncated
Taylor arithmetic: writing |xi|^(alpha(z)-j) = |xi|^(alpha(z0)-j) *
exp((alpha(z)-alpha(z0)) L) with L = log|xi| turns the k-th z-derivative of a
component into a bivariate jet in (z - z0, L), so derivative slices are exact
log-polyhomogeneous symbols of raised log degree.

The same component derivatives are also implemented through the sphere-
restriction recursion (top / middle / bottom rules); the two routes are
independent and cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import _numerics as num
from .angular import AngularProfile
from .errors import NonCriticalOrderError
from .symbols import (LogHomogeneousTerm, Remainder, SymbolExpansion, TrigPoly,
                      XC_ONE)


# ---------------------------------------------------------------------------
# Order paths
# ---------------------------------------------------------------------------

class OrderPath:
    """Holomorphic order function with exact derivative access."""

    is_affine = False

    def value(self, z: complex) -> complex:
        raise NotImplementedError

    def jet(self, z0: complex, K: int) -> np.ndarray:
        """Taylor coefficients alpha^(m)(z0)/m! for m = 0..K."""
        raise NotImplementedError

    def derivative(self, z: complex, m: int = 1) -> complex:
        return self.jet(z, m)[m] * math.factorial(m)

    def prime(self, z: complex) -> complex:
        return self.derivative(z, 1)

    def __call__(self, z: complex) -> complex:
        return self.value(z)

    def solve(self, target: complex, center: complex, radius: float) -> list[complex]:
        """Solutions of alpha(z) = target inside the disc, by damped Newton."""
        sols: list[complex] = []
        seeds = [center + 0.5 * radius * (a + 1j * b)
                 for a in (-1.2, -0.6, 0.0, 0.6, 1.2)
                 for b in (-1.2, -0.6, 0.0, 0.6, 1.2)]
        for z in seeds:
            for _ in range(60):
                f = self.value(z) - target
                if abs(f) < 1e-13:
                    break
                fp = self.prime(z)
                if abs(fp) < 1e-14:
                    break
                step = f / fp
                if abs(step) > 0.5 * radius:
                    step *= 0.5 * radius / abs(step)
                z = z - step
            else:
                continue
            if abs(self.value(z) - target) < 1e-11 and abs(z - center) <= radius + 1e-9:
                if not any(abs(z - s) < 1e-8 for s in sols):
                    sols.append(z)
        return sorted(sols, key=lambda w: (w.real, w.imag))


class AffinePath(OrderPath):
    """alpha(z) = q z + b."""

    is_affine = True

    def __init__(self, q: complex, b: complex = 0.0):
        self.q = complex(q)
        self.b = complex(b)

    def value(self, z):
        return self.q * z + self.b

    def jet(self, z0, K):
        out = np.zeros(K + 1, dtype=complex)
        out[0] = self.value(z0)
        if K >= 1:
            out[1] = self.q
        return out

    def solve(self, target, center, radius):
        z = (target - self.b) / self.q
        return [z] if abs(z - center) <= radius + 1e-9 else []


class MoebiusPath(OrderPath):
    """alpha(z) = z / (1 + mu z), holomorphic away from -1/mu."""

    def __init__(self, mu: float):
        self.mu = complex(mu)

    def value(self, z):
        return z / (1.0 + self.mu * z)

    def jet(self, z0, K):
        out = np.zeros(K + 1, dtype=complex)
        w = 1.0 + self.mu * z0
        out[0] = z0 / w
        for m in range(1, K + 1):
            out[m] = (-1.0) ** (m + 1) * self.mu ** (m - 1) / w ** (m + 1)
        return out

    def solve(self, target, center, radius):
        den = 1.0 - self.mu * target
        if abs(den) < 1e-14:
            return []
        z = target / den
        return [z] if abs(z - center) <= radius + 1e-9 else []


class PolynomialPath(OrderPath):
    """alpha(z) = sum_p coeffs[p] z^p."""

    def __init__(self, coeffs: Sequence[complex]):
        self.coeffs = tuple(complex(c) for c in coeffs)
        self.is_affine = len(self.coeffs) <= 2

    def value(self, z):
        return sum(c * z ** p for p, c in enumerate(self.coeffs))

    def jet(self, z0, K):
        out = np.zeros(K + 1, dtype=complex)
        for p, c in enumerate(self.coeffs):
            for m in range(min(p, K) + 1):
                out[m] += c * math.comb(p, m) * z0 ** (p - m)
        return out

    def solve(self, target, center, radius):
        coeffs = list(self.coeffs)
        coeffs[0] -= target
        roots = np.roots(coeffs[::-1]) if len(coeffs) > 1 else []
        out = [complex(r) for r in roots if abs(complex(r) - center) <= radius + 1e-9]
        return sorted(out, key=lambda w: (w.real, w.imag))


class GeneralPath(OrderPath):
    """User-supplied holomorphic order function; jets via a Cauchy ring."""

    def __init__(self, fn: Callable[[complex], complex], ring_radius: float = 0.25,
                 ring_points: int = 32):
        self.fn = fn
        self.ring_radius = ring_radius
        self.ring_points = ring_points

    def value(self, z):
        return complex(self.fn(z))

    def jet(self, z0, K):
        pts = num.ring_points(z0, self.ring_radius, self.ring_points)
        vals = np.array([self.fn(z) for z in pts], dtype=complex)
        coeffs = num.ring_coefficients(vals, self.ring_radius, 0, K)
        return np.array([coeffs[m] for m in range(K + 1)], dtype=complex)


class AffineImagePath(OrderPath):
    """offset + scale * base(z); exact jets from the base path."""

    def __init__(self, base: OrderPath, scale: complex = 1.0, offset: complex = 0.0):
        self.base = base
        self.scale = complex(scale)
        self.offset = complex(offset)
        self.is_affine = base.is_affine

    def value(self, z):
        return self.offset + self.scale * self.base.value(z)

    def jet(self, z0, K):
        out = self.scale * self.base.jet(z0, K)
        out[0] += self.offset
        return out

    def solve(self, target, center, radius):
        return self.base.solve((target - self.offset) / self.scale, center, radius)


def find_poles(path: OrderPath, n: int, center: complex = 0.0,
               radius: float = 4.0, max_integer: int | None = None) -> list[complex]:
    """Candidate pole set alpha^(-1)(Z cap [-n, m_max]) inside the disc."""
    if max_integer is None:
        zs = num.ring_points(center, radius, 16)
        max_integer = int(math.ceil(max(path.value(z).real for z in zs))) + 1
    out: list[complex] = []
    for m in range(-n, max_integer + 1):
        for z in path.solve(m, center, radius):
            if not any(abs(z - w) < 1e-8 for w in out):
                out.append(z)
    return sorted(out, key=lambda w: (w.real, w.imag))


# ---------------------------------------------------------------------------
# Scalar coefficient functions with exact jets
# ---------------------------------------------------------------------------

class ZFunc:
    """A holomorphic scalar with value(z) and exact Taylor jets."""

    def __init__(self, value_fn, jet_fn):
        self._value = value_fn
        self._jet = jet_fn

    def value(self, z: complex) -> complex:
        return complex(self._value(z))

    def jet(self, z0: complex, K: int) -> np.ndarray:
        return np.asarray(self._jet(z0, K), dtype=complex)

    def __call__(self, z: complex) -> complex:
        return self.value(z)

    # -- constructors / combinators -----------------------------------------

    @staticmethod
    def constant(c: complex) -> "ZFunc":
        c = complex(c)

        def jet(z0, K):
            out = np.zeros(K + 1, dtype=complex)
            out[0] = c
            return out

        return ZFunc(lambda z: c, jet)

    @staticmethod
    def from_path(path: OrderPath) -> "ZFunc":
        return ZFunc(path.value, path.jet)

    @staticmethod
    def from_callable(fn, ring_radius: float = 0.25, ring_points: int = 32) -> "ZFunc":
        gp = GeneralPath(fn, ring_radius, ring_points)
        return ZFunc(gp.value, gp.jet)

    @staticmethod
    def power_coeff(e_path: OrderPath, m: int, log_c: complex,
                    scalar: complex) -> "ZFunc":
        """scalar * binom(e(z), m) * exp(e(z) * log_c)."""

        def value(z):
            e = e_path.value(z)
            b = 1.0 + 0.0j
            for i in range(m):
                b *= (e - i)
            return scalar * b / math.factorial(m) * np.exp(e * log_c)

        def jet(z0, K):
            e = e_path.jet(z0, K)
            b = num.jet_falling_binomial(e, m)
            g = e * log_c
            return scalar * num.jet_mul(b, num.jet_exp(g))

        return ZFunc(value, jet)

    def deriv(self) -> "ZFunc":
        base = self

        def value(z):
            return base.jet(z, 1)[1]

        def jet(z0, K):
            return num.jet_shift_derivative(base.jet(z0, K + 1))

        return ZFunc(value, jet)

    def __mul__(self, other: "ZFunc") -> "ZFunc":
        a, b = self, other

        def value(z):
            return a.value(z) * b.value(z)

        def jet(z0, K):
            return num.jet_mul(a.jet(z0, K), b.jet(z0, K))

        return ZFunc(value, jet)

    def scaled(self, c: complex) -> "ZFunc":
        base = self
        return ZFunc(lambda z: c * base.value(z), lambda z0, K: c * base.jet(z0, K))


ZF_ONE = ZFunc.constant(1.0)


# ---------------------------------------------------------------------------
# Family remainders with closed-form jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpFamilyRemainder:
    """Remainder generator sum_p g_p(z) w(xi)^p phi(x, xi) exp(e(z) w(xi)).

    Closed under z-differentiation; jets are computed with truncated series
    arithmetic, vectorized over xi.
    """

    phi: Callable[[float, np.ndarray], np.ndarray]
    w: Callable[[np.ndarray], np.ndarray]
    e_path: OrderPath
    prefixes: tuple[tuple[int, ZFunc], ...] = ((0, ZF_ONE),)
    decay: float | None = None
    support_radius: float = 1.0
    label: str = "family-remainder"

    def _eval_jets(self, z0: complex, K: int, x: float, xi: np.ndarray) -> np.ndarray:
        """Array of shape (K+1, npts): Taylor coefficients of rem(z)(x, xi)."""
        xi = np.atleast_2d(xi)
        W = np.asarray(self.w(xi), dtype=complex)
        P = np.asarray(self.phi(x, xi), dtype=complex)
        ej = self.e_path.jet(z0, K)
        npts = len(W)
        # F = exp(sum_{m>=1} ej[m] W d^m), coefficient arrays over xi
        F = np.zeros((K + 1, npts), dtype=complex)
        F[0] = 1.0
        for m in range(1, K + 1):
            for i in range(1, m + 1):
                F[m] += (i / m) * ej[i] * W * F[m - i]
        base = P * np.exp(ej[0] * W)
        out = np.zeros((K + 1, npts), dtype=complex)
        for p, g in self.prefixes:
            gj = g.jet(z0, K)
            GF = np.zeros_like(F)
            for m in range(K + 1):
                for i in range(m + 1):
                    GF[m] += gj[i] * F[m - i]
            out += GF * W ** p
        return out * base

    def slice_remainder(self, z: complex) -> Remainder:
        gen = self

        def fn(x, xi):
            return gen._eval_jets(z, 0, x, xi)[0]

        return Remainder(fn, self.decay, 1.0, self.label, self.support_radius)

    def derivative_remainder(self, z0: complex, k: int) -> Remainder:
        gen = self
        fact = math.factorial(k)

        def fn(x, xi):
            return fact * gen._eval_jets(z0, k, x, xi)[k]

        return Remainder(fn, self.decay, 1.0, f"{self.label}^({k})",
                         self.support_radius)

    def step_derivative(self) -> "ExpFamilyRemainder":
        eprime = ZFunc.from_path(self.e_path).deriv()
        new: dict[int, ZFunc] = {}

        def accumulate(p, g):
            new[p] = g if p not in new else _zsum(new[p], g)

        for p, g in self.prefixes:
            accumulate(p, g.deriv())
            accumulate(p + 1, g * eprime)
        return replace(self, prefixes=tuple(sorted(new.items())))


def _zsum(a: ZFunc, b: ZFunc) -> ZFunc:
    return ZFunc(lambda z: a.value(z) + b.value(z),
                 lambda z0, K: a.jet(z0, K) + b.jet(z0, K))


# ---------------------------------------------------------------------------
# The family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyTerm:
    """One component entry: h(z) * profile * x_coeff * |xi|^(alpha(z)-j) log^l0."""

    j: int
    log_power: int
    h: ZFunc
    profile: AngularProfile
    x_coeff: TrigPoly = XC_ONE
    extension: str = "cutoff"


@dataclass(frozen=True)
class HolomorphicFamily:
    """A holomorphic family of log-polyhomogeneous symbols on R^n."""

    n: int
    path: OrderPath
    terms: tuple[FamilyTerm, ...]
    remainder: ExpFamilyRemainder | None = None
    center: complex = 0.0
    radius: float = 4.0
    label: str = "family"

    @property
    def max_j(self) -> int:
        return max((t.j for t in self.terms), default=0)

    def order(self, z: complex) -> complex:
        return self.path.value(z)

    def in_domain(self, z: complex) -> bool:
        return abs(z - self.center) <= self.radius + 1e-12

    def slice(self, z: complex) -> SymbolExpansion:
        """The symbol at parameter z."""
        if not self.in_domain(z):
            raise ValueError(f"z={z} outside declared family domain")
        alpha = self.path.value(z)
        terms = []
        for t in self.terms:
            c = t.h.value(z)
            if c == 0:
                continue
            terms.append(LogHomogeneousTerm(alpha - t.j, t.log_power, t.profile,
                                            c, t.x_coeff, t.extension))
        rem = self.remainder.slice_remainder(z) if self.remainder else None
        return SymbolExpansion(self.n, alpha, tuple(terms), rem)

    # -- derivative machinery -------------------------------------------------

    def component_jets(self, z0: complex, K: int):
        """Per-entry bivariate jets of d_z^k sigma(z) at z0.

        Returns a list of (j, profile, x_coeff, extension, C) with C of shape
        (K+1, Lmax+1): the coefficient of the degree alpha(z0)-j component of
        sigma^{(k)}(z0)/k! carrying log^l |xi| is C[k, l].
        """
        ajet = self.path.jet(z0, K + 1)
        ljet = num.ljet_from_order_jet(ajet[: K + 1])
        out = []
        for t in self.terms:
            hjet = t.h.jet(z0, K)
            B = num.ljet_mul_scalar_jet(ljet, hjet)  # (K+1, K+2)
            C = np.zeros((K + 1, t.log_power + K + 2), dtype=complex)
            C[:, t.log_power:] = B
            out.append((t.j, t.profile, t.x_coeff, t.extension, C))
        return out

    def derivative_slice(self, z0: complex, k: int) -> SymbolExpansion:
        """The symbol d_z^k sigma(z)|_{z0}, log degree raised by k."""
        alpha0 = self.path.value(z0)
        fact = math.factorial(k)
        terms = []
        for j, prof, xc, ext, C in self.component_jets(z0, k):
            for l in range(C.shape[1]):
                c = fact * C[k, l]
                if abs(c) > 1e-300:
                    terms.append(LogHomogeneousTerm(alpha0 - j, l, prof, c, xc, ext))
        rem = self.remainder.derivative_remainder(z0, k) if self.remainder else None
        return SymbolExpansion(self.n, alpha0, tuple(terms), rem)

    def derivative_family(self, k: int = 1) -> "HolomorphicFamily":
        """The family z -> d_z^k sigma(z) via the one-step coefficient map."""
        fam = self
        for _ in range(k):
            aprime = ZFunc.from_path(fam.path).deriv()
            new_terms = []
            for t in fam.terms:
                new_terms.append(replace(t, h=t.h.deriv()))
                new_terms.append(replace(t, log_power=t.log_power + 1,
                                         h=t.h * aprime))
            rem = fam.remainder.step_derivative() if fam.remainder else None
            fam = replace(fam, terms=tuple(new_terms), remainder=rem,
                          label=fam.label + "'")
        return fam

    def poles(self, extra_radius: float | None = None) -> list[complex]:
        return find_poles(self.path, self.n, self.center,
                          extra_radius if extra_radius is not None else self.radius)

    def pole_component(self, z0: complex) -> int | None:
        """The index j0 with alpha(z0) - j0 = -n, if a stored component matches."""
        alpha0 = self.path.value(z0)
        j0 = alpha0 + self.n
        jr = round(j0.real)
        if abs(j0 - jr) < 1e-9 and 0 <= jr <= self.max_j:
            return jr
        return None

    def x_averaged(self) -> "HolomorphicFamily":
        terms = tuple(replace(t, x_coeff=TrigPoly.const(t.x_coeff.mean))
                      for t in self.terms)
        return replace(self, terms=terms)


def direct_family(n: int, path: OrderPath,
                  entries: Sequence[tuple[int, int, ZFunc, AngularProfile]],
                  center: complex = 0.0, radius: float = 4.0,
                  label: str = "direct") -> HolomorphicFamily:
    """Family from explicit (j, log_power, h, profile) component data."""
    terms = tuple(FamilyTerm(j, l, h, prof) for j, l, h, prof in entries)
    return HolomorphicFamily(n, path, terms, None, center, radius, label)


# ---------------------------------------------------------------------------
# Component derivatives by the sphere-restriction recursion
# ---------------------------------------------------------------------------

def component_derivative(F: HolomorphicFamily, j: int, k: int, z0: complex):
    """sigma^(k)(z0)_{alpha(z0)-j, l} via the inductive recursion.

    Returns a list of (l, AngularProfile, TrigPoly) triples with the profile
    scaled by the computed coefficient.  Independent of the jet route in
    :meth:`HolomorphicFamily.derivative_slice`; the two are cross-checked in
    the test-suite.
    """
    K = k + 2
    aprime_jet = num.jet_shift_derivative(F.path.jet(z0, K + 1))
    state: dict[int, list[tuple[np.ndarray, AngularProfile, TrigPoly]]] = {}
    for t in F.terms:
        if t.j != j:
            continue
        state.setdefault(t.log_power, []).append((t.h.jet(z0, K), t.profile, t.x_coeff))
    for step in range(k):
        new: dict[int, list] = {}

        def push(l, jet, prof, xc):
            new.setdefault(l, []).append((jet, prof, xc))

        maxl = max(state.keys(), default=-1)
        for l in range(maxl + 2):
            for jet, prof, xc in state.get(l - 1, []):
                push(l, num.jet_mul(aprime_jet, jet), prof, xc)
            for jet, prof, xc in state.get(l, []):
                push(l, num.jet_shift_derivative(jet), prof, xc)
        state = new
    out = []
    for l, entries in sorted(state.items()):
        for jet, prof, xc in entries:
            c = complex(jet[0])
            if c != 0:
                out.append((l, prof.scaled(c), xc))
    return out


# ---------------------------------------------------------------------------
# Reciprocal order series and the L_k symbols
# ---------------------------------------------------------------------------

def reciprocal_order_series(path: OrderPath, z0: complex, J: int) -> np.ndarray:
    """Coefficients (c_-1, c_0, ..., c_J) of 1/(alpha(z) - alpha(z0)).

    c_-1 = 1/alpha'(z0) and c_0 = -alpha''(z0)/(2 alpha'(z0)^2); computed by
    power-series inversion of the Taylor series of alpha(z) - alpha(z0).
    """
    t = path.jet(z0, J + 2)
    if abs(t[1]) < 1e-14:
        raise NonCriticalOrderError(f"critical order path at z0={z0}")
    u = num.jet_reciprocal(t[1: J + 3])
    return u  # u[p] = c_{p-1}


def L_k_symbol(F: HolomorphicFamily, z0: complex, k: int) -> SymbolExpansion:
    """The degree -n correction symbol entering the k-th Laurent coefficient.

    Assembled as k! * sum_{m=0}^{k+1} c_{k-m} sigma^(m)(z0)/m! restricted to
    the component of homogeneity degree -n; for an affine path this is
    sigma^(k+1)(z0)/(q (k+1)) on that component.  Returns the zero symbol when
    alpha(z0) + n is not a stored component index.
    """
    alpha0 = F.path.value(z0)
    j0 = F.pole_component(z0)
    if j0 is None:
        return SymbolExpansion(F.n, alpha0)
    c = reciprocal_order_series(F.path, z0, k + 1)
    terms = []
    for m in range(k + 2):
        cm = c[k - m + 1]  # c_{k-m}
        if cm == 0:
            continue
        deriv = F.derivative_slice(z0, m)
        for t in deriv.terms:
            if abs(t.degree + F.n) < 1e-9:
                coeff = math.factorial(k) / math.factorial(m) * cm * t.coeff
                terms.append(replace(t, coeff=coeff))
    return SymbolExpansion(F.n, alpha0, tuple(terms))

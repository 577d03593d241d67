"""Log-polyhomogeneous symbol expansions and their algebra.

A symbol is a finite sum of terms

    coeff * x_coeff(x) * profile(xi/|xi|) * rad(|xi|),
    rad(r) = psi(r) * r^degree * log^l r     (cutoff extension)
           = r^degree * log^l r              (homogeneous extension)

plus an optional remainder callable with declared decay.  The cutoff psi is a
fixed quintic smoothstep vanishing for r <= 1/4 and equal to 1 for r >= 1, so
every term is smooth and homogeneity holds exactly outside the unit ball.
The homogeneous extension is reserved for polynomial-type terms (degree a
non-negative integer, no log), where vanishing of the finite part must be
exact.

Composition is supported in the circle model (n = 1, trigonometric-polynomial
x-dependence).  Besides the graded Taylor terms it attaches an exact
remainder built from the closed form of the composed multiplier symbol,
sigma_{AB}(x, xi) = sum_M b_M(xi) * sigma_A(x, xi + M) * e^{iMx},
so finite parts of compositions are faithful, not truncation artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .angular import AngularProfile, sphere_quadrature
from .errors import DimensionError, NonIntegerOrderError

MERGE_EPS = 1e-15


# ---------------------------------------------------------------------------
# Radial cutoff
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialCutoff:
    """Smooth radial cutoff: 0 for r <= r0, 1 for r >= r1, quintic between."""

    r0: float = 0.25
    r1: float = 1.0

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        t = np.clip((r - self.r0) / (self.r1 - self.r0), 0.0, 1.0)
        return t ** 3 * (10.0 + t * (-15.0 + 6.0 * t))


CUTOFF = RadialCutoff()


# ---------------------------------------------------------------------------
# Trigonometric-polynomial x-coefficients (the S^1 base variable)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrigPoly:
    """Finite Fourier series sum_k c_k e^{ikx} in the base variable x."""

    modes: tuple[tuple[int, complex], ...] = ((0, 1.0 + 0j),)

    @staticmethod
    def const(value: complex = 1.0) -> "TrigPoly":
        value = complex(value)
        return TrigPoly(((0, value),) if value != 0 else ())

    @staticmethod
    def from_modes(modes: dict[int, complex]) -> "TrigPoly":
        clean = {int(k): complex(v) for k, v in modes.items() if v != 0}
        return TrigPoly(tuple(sorted(clean.items())))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k, c in self.modes:
            out = out + c * np.exp(1j * k * x)
        return out if out.shape else complex(out)

    @property
    def mean(self) -> complex:
        return dict(self.modes).get(0, 0.0 + 0j)

    @property
    def is_constant(self) -> bool:
        return all(k == 0 for k, _ in self.modes)

    def deriv(self) -> "TrigPoly":
        return TrigPoly.from_modes({k: 1j * k * c for k, c in self.modes})

    def scaled(self, c: complex) -> "TrigPoly":
        return TrigPoly.from_modes({k: c * v for k, v in self.modes})

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        out: dict[int, complex] = {}
        for k1, c1 in self.modes:
            for k2, c2 in other.modes:
                out[k1 + k2] = out.get(k1 + k2, 0.0) + c1 * c2
        return TrigPoly.from_modes(out)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.modes)
        for k, c in other.modes:
            out[k] = out.get(k, 0.0) + c
        return TrigPoly.from_modes(out)


XC_ONE = TrigPoly.const(1.0)


def _cancellation_radius(order_drop: float) -> float:
    """Radius where float cancellation noise reaches an exact-minus-kept
    remainder that is smaller than the subtracted terms by r^(-order_drop)."""
    return (1e-3 / 2.2e-16) ** (1.0 / max(1.0, order_drop))


# ---------------------------------------------------------------------------
# Terms and expansions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogHomogeneousTerm:
    """One term: coeff * x_coeff(x) * profile(omega) * r^degree log^l r."""

    degree: complex
    log_power: int
    profile: AngularProfile
    coeff: complex = 1.0
    x_coeff: TrigPoly = XC_ONE
    extension: str = "cutoff"  # "cutoff" | "homogeneous"

    def radial(self, r: np.ndarray, cutoff: RadialCutoff = CUTOFF) -> np.ndarray:
        """Radial factor r -> rad(r), vectorized, safe at r = 0."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        if self.extension == "cutoff":
            mask = r > cutoff.r0
            rs = r[mask]
            vals = cutoff(rs) * np.exp(self.degree * np.log(rs))
            if self.log_power:
                vals = vals * np.log(rs) ** self.log_power
            out[mask] = vals
            return out
        mask = r > 0.0
        rs = r[mask]
        vals = np.exp(self.degree * np.log(rs))
        if self.log_power:
            vals = vals * np.log(rs) ** self.log_power
        out[mask] = vals
        if self.degree == 0 and self.log_power == 0:
            out[~mask] = 1.0
        return out

    def xi_derivative(self) -> list["LogHomogeneousTerm"]:
        """d/dxi of the canonical term (n = 1 only): degree and log bookkeeping."""
        if self.profile.n != 1:
            raise DimensionError("term xi-derivative implemented for n=1 only")
        out = []
        p = self.profile.times_omega_sign()
        if self.coeff * self.degree != 0:
            out.append(replace(self, degree=self.degree - 1,
                               coeff=self.coeff * self.degree, profile=p))
        if self.log_power:
            out.append(replace(self, degree=self.degree - 1,
                               log_power=self.log_power - 1,
                               coeff=self.coeff * self.log_power, profile=p))
        return out


@dataclass(frozen=True)
class Remainder:
    """Residual part of an expansion: callable (x, XI) -> values.

    ``decay`` is the declared exponent rho with |rem| <= C (1+|xi|)^rho;
    ``None`` marks a compactly supported remainder, vanishing for
    |xi| >= ``support_radius``.  ``safe_radius`` bounds the region where the
    evaluator is numerically trustworthy: remainders defined as an exact
    evaluator minus kept terms suffer float cancellation once the subtracted
    magnitudes dwarf the true difference, so integrators must not probe
    beyond it (the tail is budgeted from ``decay`` instead).
    """

    fn: Callable[[float, np.ndarray], np.ndarray]
    decay: float | None
    bound: float = 1.0
    label: str = "remainder"
    support_radius: float = 1.0
    safe_radius: float = math.inf
    breakpoints: tuple[float, ...] = ()

    def __call__(self, x: float, xi: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(x, xi), dtype=complex)


@dataclass(frozen=True)
class SymbolExpansion:
    """A finite log-polyhomogeneous expansion of a given order."""

    n: int
    order: complex
    terms: tuple[LogHomogeneousTerm, ...] = ()
    remainder: Remainder | None = None
    cutoff: RadialCutoff = CUTOFF

    def __post_init__(self):
        for t in self.terms:
            if t.profile.n != self.n:
                raise DimensionError("term profile dimension mismatch")

    @property
    def log_degree(self) -> int:
        return max((t.log_power for t in self.terms), default=0)

    @property
    def max_offset(self) -> float:
        """Largest Re(order - degree) among stored terms."""
        return max((float((self.order - t.degree).real) for t in self.terms),
                   default=0.0)

    def term_offset(self, term: LogHomogeneousTerm) -> float:
        return float((self.order - term.degree).real)

    def j_of(self, term: LogHomogeneousTerm) -> int | None:
        off = self.order - term.degree
        j = round(off.real)
        if abs(off - j) < 1e-9 and j >= 0:
            return j
        return None

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, x: float, xi: np.ndarray) -> np.ndarray:
        """Pointwise value at base point x and an (m, n) array of xi."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if xi.shape[1] != self.n:
            raise DimensionError("xi dimension mismatch")
        r = np.linalg.norm(xi, axis=1)
        out = np.zeros(len(r), dtype=complex)
        nz = r > 0
        if np.any(nz):
            omega = xi[nz] / r[nz, None]
            for t in self.terms:
                vals = t.coeff * complex(t.x_coeff(x)) * t.profile.eval_nodes(omega)
                out[nz] += vals * t.radial(r[nz], self.cutoff)
        for t in self.terms:
            if t.extension == "homogeneous" and t.degree == 0 and t.log_power == 0:
                out[~nz] += t.coeff * complex(t.x_coeff(x))
        if self.remainder is not None:
            out += self.remainder(x, xi)
        return out

    def eval_point(self, x: float, xi) -> complex:
        return complex(self.evaluate(x, np.atleast_2d(xi))[0])

    def x_averaged(self) -> "SymbolExpansion":
        """Replace every x-coefficient by its mean mode (used by model traces)."""
        terms = tuple(replace(t, x_coeff=TrigPoly.const(t.x_coeff.mean))
                      for t in self.terms)
        rem = self.remainder
        if rem is not None and self.n == 1:
            rem = replace(rem, fn=_x_mean_fn(rem), label=rem.label + "|xavg")
        return replace(self, terms=terms, remainder=rem)


def _x_mean_fn(rem: Remainder, grid: int = 64):
    xs = 2.0 * np.pi * np.arange(grid) / grid

    def fn(x, xi):
        acc = np.zeros(np.atleast_2d(xi).shape[0], dtype=complex)
        for xg in xs:
            acc += rem(xg, xi)
        return acc / grid

    return fn


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def zero_symbol(n: int, order: complex = 0.0) -> SymbolExpansion:
    return SymbolExpansion(n, complex(order))


def make_power_symbol(n: int, s: complex, profile: AngularProfile | None = None,
                      x_coefficient: TrigPoly | None = None) -> SymbolExpansion:
    """Single-term classical symbol psi(|xi|) |xi|^s with the given angular part."""
    profile = profile if profile is not None else AngularProfile.constant(n)
    if profile.n != n:
        raise DimensionError("profile dimension mismatch")
    xc = x_coefficient if x_coefficient is not None else XC_ONE
    term = LogHomogeneousTerm(complex(s), 0, profile, 1.0, xc)
    return SymbolExpansion(n, complex(s), (term,))

def make_log_power_symbol(n: int, s: complex, log_power: int,
                          profile: AngularProfile | None = None,
                          coeff: complex = 1.0) -> SymbolExpansion:
    profile = profile if profile is not None else AngularProfile.constant(n)
    term = LogHomogeneousTerm(complex(s), log_power, profile, coeff)
    return SymbolExpansion(n, complex(s), (term,))


def make_polynomial_symbol(n: int, degree: int,
                           profile: AngularProfile | None = None,
                           coeff: complex = 1.0,
                           x_coefficient: TrigPoly | None = None) -> SymbolExpansion:
    """Homogeneous polynomial-type term extended through the origin."""
    if degree < 0 or degree != int(degree):
        raise ValueError("homogeneous extension needs a non-negative integer degree")
    if n == 1 and profile is None:
        # xi^degree = |xi|^degree * sign(xi)^degree
        profile = AngularProfile.pair(1.0, (-1.0) ** degree)
    profile = profile if profile is not None else AngularProfile.constant(n)
    xc = x_coefficient if x_coefficient is not None else XC_ONE
    term = LogHomogeneousTerm(complex(degree), 0, profile, coeff, xc, "homogeneous")
    return SymbolExpansion(n, complex(degree), (term,))


def make_constant_symbol(n: int, value: complex = 1.0) -> SymbolExpansion:
    """The exact constant symbol: psi-extended term plus (1 - psi) remainder."""
    term = LogHomogeneousTerm(0.0, 0, AngularProfile.constant(n), complex(value))

    def fn(x, xi):
        r = np.linalg.norm(np.atleast_2d(xi), axis=1)
        return complex(value) * (1.0 - CUTOFF(r))

    rem = Remainder(fn, None, abs(value), "one-minus-cutoff")
    return SymbolExpansion(n, 0.0, (term,), rem)


# ---------------------------------------------------------------------------
# Linear operations
# ---------------------------------------------------------------------------

def _merge_terms(terms: Iterable[LogHomogeneousTerm]) -> tuple[LogHomogeneousTerm, ...]:
    merged: dict = {}
    loose: list[LogHomogeneousTerm] = []
    for t in terms:
        pkey = t.profile.merge_key()
        if pkey is None:
            loose.append(t)
            continue
        key = (complex(t.degree), t.log_power, t.extension, pkey, t.x_coeff.modes)
        if key in merged:
            merged[key] = replace(merged[key], coeff=merged[key].coeff + t.coeff)
        else:
            merged[key] = t
    out = list(merged.values()) + loose
    scale = max((abs(t.coeff) for t in out), default=1.0)
    out = [t for t in out if abs(t.coeff) > MERGE_EPS * max(1.0, scale)]
    out.sort(key=lambda t: (-t.degree.real, t.log_power))
    return tuple(out)


def scale(c: complex, a: SymbolExpansion) -> SymbolExpansion:
    c = complex(c)
    if c == 0:
        return zero_symbol(a.n, a.order)
    terms = tuple(replace(t, coeff=c * t.coeff) for t in a.terms)
    rem = a.remainder
    if rem is not None:
        base = rem
        rem = replace(base, fn=lambda x, xi: c * base.fn(x, xi),
                      bound=abs(c) * base.bound)
    return replace(a, terms=terms, remainder=rem)


def add(a: SymbolExpansion, b: SymbolExpansion) -> SymbolExpansion:
    if a.n != b.n:
        raise DimensionError("cannot add symbols of different dimensions")
    order = a.order if a.order.real >= b.order.real else b.order
    terms = _merge_terms(a.terms + b.terms)
    rem = _add_remainders(a.remainder, b.remainder)
    return SymbolExpansion(a.n, order, terms, rem, a.cutoff)


def _add_remainders(r1: Remainder | None, r2: Remainder | None) -> Remainder | None:
    if r1 is None:
        return r2
    if r2 is None:
        return r1
    if r1.decay is None and r2.decay is None:
        decay = None
    elif r1.decay is None:
        decay = r2.decay
    elif r2.decay is None:
        decay = r1.decay
    else:
        decay = max(r1.decay, r2.decay)
    return Remainder(lambda x, xi: r1(x, xi) + r2(x, xi), decay,
                     r1.bound + r2.bound, f"{r1.label}+{r2.label}",
                     max(r1.support_radius, r2.support_radius),
                     min(r1.safe_radius, r2.safe_radius),
                     tuple(sorted(set(r1.breakpoints) | set(r2.breakpoints))))


# ---------------------------------------------------------------------------
# Graded product
# ---------------------------------------------------------------------------

def _product_term(t1: LogHomogeneousTerm, t2: LogHomogeneousTerm) -> LogHomogeneousTerm:
    ext = "homogeneous" if (t1.extension == t2.extension == "homogeneous") else "cutoff"
    return LogHomogeneousTerm(t1.degree + t2.degree, t1.log_power + t2.log_power,
                              t1.profile * t2.profile, t1.coeff * t2.coeff,
                              t1.x_coeff * t2.x_coeff, ext)


def multiply(a: SymbolExpansion, b: SymbolExpansion, depth: int = 8) -> SymbolExpansion:
    """Graded pointwise product truncated at relative offset < depth.

    Degrees add, log powers add, angular profiles multiply pointwise.  The
    remainder is the exact pointwise product minus the kept terms, so the
    result reproduces a(x, xi) * b(x, xi) everywhere.
    """
    if a.n != b.n:
        raise DimensionError("cannot multiply symbols of different dimensions")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    order = a.order + b.order
    kept, dropped_any = [], False
    for t1 in a.terms:
        for t2 in b.terms:
            t = _product_term(t1, t2)
            if (order - t.degree).real < depth - 0.5 + 1e-9:
                kept.append(t)
            else:
                dropped_any = True
    terms = _merge_terms(kept)
    exact_needed = (dropped_any or a.remainder is not None or b.remainder is not None
                    or any(t.extension == "cutoff" for t in terms))
    if not exact_needed:
        return SymbolExpansion(a.n, order, terms, None, a.cutoff)
    probe = SymbolExpansion(a.n, order, terms, None, a.cutoff)

    def fn(x, xi):
        return a.evaluate(x, xi) * b.evaluate(x, xi) - probe.evaluate(x, xi)

    decay = None if not dropped_any and a.remainder is None and b.remainder is None \
        else float(order.real) - depth
    # without dropped tails the mismatch lives in the cutoff region only
    if decay is not None and a.remainder is not None and a.remainder.decay is not None:
        decay = max(decay, a.remainder.decay + float(b.order.real))
    support = max(1.0, *(r.support_radius for r in (a.remainder, b.remainder)
                         if r is not None)) if decay is None else 1.0
    safe = math.inf if decay is None \
        else _cancellation_radius(float(order.real) - decay)
    rem = Remainder(fn, decay, 1.0, "product-exact", support, safe)
    return SymbolExpansion(a.n, order, terms, rem, a.cutoff)


# ---------------------------------------------------------------------------
# Composition in the circle model
# ---------------------------------------------------------------------------

def _mode_table(sym: SymbolExpansion) -> dict[int, list[LogHomogeneousTerm]]:
    table: dict[int, list[LogHomogeneousTerm]] = {}
    for t in sym.terms:
        for k, c in t.x_coeff.modes:
            table.setdefault(k, []).append(
                replace(t, coeff=t.coeff * c, x_coeff=XC_ONE))
    return table


def _remainder_modes(sym: SymbolExpansion, grid: int = 64) -> list[int]:
    if sym.remainder is None:
        return []
    span = max((abs(k) for t in sym.terms for k, _ in t.x_coeff.modes), default=0)
    return list(range(-span - 2, span + 3))


def _mode_component(sym: SymbolExpansion, mode: int, xi_flat: np.ndarray,
                    grid: int = 64) -> np.ndarray:
    """Mode coefficient b_mode(xi) of the full symbol (terms + remainder)."""
    xi2 = xi_flat.reshape(-1, 1)
    r = np.abs(xi_flat)
    out = np.zeros(len(xi_flat), dtype=complex)
    for t in _mode_table(sym).get(mode, []):
        pvals = np.where(xi_flat >= 0, t.profile(np.array([1.0])),
                         t.profile(np.array([-1.0])))
        out += t.coeff * pvals * t.radial(r, sym.cutoff)
    if sym.remainder is not None:
        xs = 2.0 * np.pi * np.arange(grid) / grid
        acc = np.zeros(len(xi_flat), dtype=complex)
        for xg in xs:
            acc += sym.remainder(xg, xi2) * np.exp(-1j * mode * xg)
        out += acc / grid
    return out


def _trig_only(sym: SymbolExpansion) -> bool:
    return all(isinstance(t.x_coeff, TrigPoly) for t in sym.terms)


def compose(a: SymbolExpansion, b: SymbolExpansion, depth: int = 8) -> SymbolExpansion:
    """Symbol of the operator product on the circle model (n = 1).

    Graded terms follow sum_m (1/m!) d_xi^m a * (-i d_x)^m b; the remainder is
    the exact composed symbol minus the kept terms.  For x-independent
    operands this coincides with :func:`multiply` exactly.
    """
    if a.n != 1 or b.n != 1:
        raise DimensionError("compose is defined on the circle model (n = 1)")
    if not (_trig_only(a) and _trig_only(b)):
        raise DimensionError("compose requires trigonometric-polynomial x-dependence")
    a_x_indep = all(t.x_coeff.is_constant for t in a.terms)
    b_x_indep = all(t.x_coeff.is_constant for t in b.terms)
    if a_x_indep and b_x_indep:
        return multiply(a, b, depth)

    order = a.order + b.order
    kept: list[LogHomogeneousTerm] = []
    dropped_any = False
    # m-th Taylor term: (1/m!) d_xi^m(a-term) * (-i)^m d_x^m(b-term)
    for t_a in a.terms:
        derivs: list[tuple[LogHomogeneousTerm, ...]] = [(t_a,)]
        for _ in range(depth):
            nxt = [d for t in derivs[-1] for d in t.xi_derivative()]
            derivs.append(tuple(nxt))
            if not nxt:
                break
        for t_b in b.terms:
            xc = t_b.x_coeff
            for m in range(len(derivs)):
                if m > 0:
                    xc = xc.deriv()
                    if not xc.modes:
                        break
                factor = (-1j) ** m / math.factorial(m)
                tb_m = replace(t_b, x_coeff=xc)
                for t_da in derivs[m]:
                    t = _product_term(t_da, tb_m)
                    t = replace(t, coeff=t.coeff * factor)
                    if (order - t.degree).real < depth - 0.5 + 1e-9:
                        kept.append(t)
                    else:
                        dropped_any = True
    terms = _merge_terms(kept)
    probe = SymbolExpansion(1, order, terms, None, a.cutoff)
    b_modes = sorted(set([k for t in b.terms for k, _ in t.x_coeff.modes]
                         + _remainder_modes(b)))

    def fn(x, xi):
        xi_flat = np.atleast_2d(xi)[:, 0].astype(float)
        out = np.zeros(len(xi_flat), dtype=complex)
        for mb in b_modes:
            bm = _mode_component(b, mb, xi_flat)
            if not np.any(bm):
                continue
            shifted = (xi_flat + mb).reshape(-1, 1)
            out += bm * a.evaluate(x, shifted) * np.exp(1j * mb * x)
        return out - probe.evaluate(x, np.atleast_2d(xi))

    decay = float(order.real) - depth
    safe = _cancellation_radius(depth)
    # the shifted evaluator sees cutoff knots and sign flips at |r +- M|
    knots = {a.cutoff.r0, a.cutoff.r1, 0.0}
    for r in (a.remainder, b.remainder):
        if r is not None:
            knots.update(r.breakpoints)
    breaks = set(k for k in knots if k > 0)
    for mb in b_modes:
        m = abs(mb)
        if m == 0:
            continue
        for k in knots:
            breaks.add(abs(m - k))
            breaks.add(m + k)
    breaks = tuple(sorted(b for b in breaks if 0.0 < b <= 64.0))
    rem = Remainder(fn, decay, 1.0, "compose-exact", 1.0, safe, breaks)
    return SymbolExpansion(1, order, terms, rem, a.cutoff)


def commutator(a: SymbolExpansion, b: SymbolExpansion, depth: int = 8) -> SymbolExpansion:
    return add(compose(a, b, depth), scale(-1.0, compose(b, a, depth)))


# ---------------------------------------------------------------------------
# Parity
# ---------------------------------------------------------------------------

def parity_class(a: SymbolExpansion, resolution: int = 4, tol: float = 1e-10) -> str:
    """Classify alternating parity: 'even-even', 'even-odd' or 'neither'."""
    ord_re = a.order.real
    if abs(a.order.imag) > 1e-12 or abs(ord_re - round(ord_re)) > 1e-9:
        raise NonIntegerOrderError("parity is defined for integer order only")
    rule = sphere_quadrature(a.n, resolution)
    nodes = rule.nodes
    even_even = even_odd = True
    for t in a.terms:
        d = t.degree
        if abs(d.imag) > 1e-12 or abs(d.real - round(d.real)) > 1e-9:
            raise NonIntegerOrderError("parity needs integer homogeneity degrees")
        sign = (-1.0) ** round(d.real)
        vals = t.profile.eval_nodes(nodes)
        flip = t.profile.eval_nodes(-nodes)
        scale_ = max(1.0, float(np.max(np.abs(vals))))
        if np.max(np.abs(flip - sign * vals)) > tol * scale_:
            even_even = False
        if np.max(np.abs(flip + sign * vals)) > tol * scale_:
            even_odd = False
    if even_even:
        return "even-even"
    if even_odd:
        return "even-odd"
    return "neither"


def with_cutoff(a: SymbolExpansion, new_cutoff: RadialCutoff) -> SymbolExpansion:
    """Rebuild the same total symbol with a different interior cutoff.

    The terms switch to ``new_cutoff`` and a compactly supported compensating
    remainder keeps the pointwise values identical.
    """
    old = a

    def fn(x, xi):
        xi = np.atleast_2d(xi)
        r = np.linalg.norm(xi, axis=1)
        out = np.zeros(len(r), dtype=complex)
        nz = r > 0
        omega = xi[nz] / r[nz, None]
        for t in old.terms:
            if t.extension != "cutoff":
                continue
            delta = t.radial(r[nz], old.cutoff) - t.radial(r[nz], new_cutoff)
            out[nz] += t.coeff * complex(t.x_coeff(x)) * t.profile.eval_nodes(omega) * delta
        return out

    comp = Remainder(fn, None, 1.0, "cutoff-compensation")
    rem = _add_remainders(a.remainder, comp)
    return replace(a, cutoff=new_cutoff, remainder=rem)

"""Symbol-level complex powers, zeta Laurent data, determinants, trace defects.

Model operators are positive-leading-symbol elliptic multipliers: the base
symbol is c |xi|^q0 (1 + lower-order terms).  Complex powers are built at
symbol level by the graded binomial expansion

    q^e(z) = c^e(z) |xi|^(q0 e(z)) (1 + u)^e(z),

whose component coefficients are elementary in z and therefore carry exact
jets.  The spectral cut is metadata only: positive leading symbols collapse
the principal-angle machinery (theta = pi by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .angular import AngularProfile
from .errors import AccuracyError, DimensionError, UnsupportedModelError
from .families import (AffinePath, AffineImagePath, ExpFamilyRemainder,
                       FamilyTerm, HolomorphicFamily, OrderPath, ZFunc)
from .finitepart import (default_truncation, finite_part_integral,
                         residue_density)
from .laurent import LaurentSeries, empirical_laurent, laurent_expansion, model_trace
from .symbols import (SymbolExpansion, TrigPoly, XC_ONE, add, commutator,
                      compose, make_power_symbol, scale)

XGRID = 64


@dataclass(frozen=True)
class EllipticModelSymbol:
    """Invertible positive model operator c |xi|^q0 (1 + sum_j u_j |xi|^-j).

    ``lower`` lists (j, coeff, profile) relative terms u_j; profiles default
    to the constant 1.  ``kernel_dim`` declares the generalized kernel
    dimension for non-invertible bookkeeping (default 0: invertible).
    """

    n: int
    c: float = 1.0
    q0: float = 1.0
    lower: tuple = ()
    theta: float = math.pi
    kernel_dim: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise UnsupportedModelError("leading coefficient must be positive")
        if self.q0 <= 0:
            raise UnsupportedModelError("model order must be positive")
        for j, coeff, prof in self.lower:
            if j < 1:
                raise ValueError("lower-order offsets must be >= 1")
            if prof is not None and prof.n != self.n:
                raise DimensionError("lower-term profile dimension mismatch")

    @property
    def invertible(self) -> bool:
        return self.kernel_dim == 0

    @property
    def order(self) -> float:
        return self.q0

    def base_symbol(self) -> SymbolExpansion:
        """The model's classical symbol (cutoff extension)."""
        sym = make_power_symbol(self.n, self.q0).terms[0]
        terms = [sym.__class__(self.q0, 0, AngularProfile.constant(self.n),
                               self.c, XC_ONE, "cutoff")]
        for j, coeff, prof in self.lower:
            p = prof if prof is not None else AngularProfile.constant(self.n)
            terms.append(sym.__class__(self.q0 - j, 0, p, self.c * coeff,
                                       XC_ONE, "cutoff"))
        return SymbolExpansion(self.n, complex(self.q0), tuple(terms))

    def homogeneous_value(self, xi: np.ndarray) -> np.ndarray:
        """c r^q0 (1 + sum u_j r^-j) without any cutoff (positive for r > 0)."""
        xi = np.atleast_2d(xi)
        r = np.linalg.norm(xi, axis=1)
        omega = np.where(r[:, None] > 0, xi / np.maximum(r, 1e-300)[:, None], 0.0)
        vals = np.ones(len(r), dtype=complex)
        for j, coeff, prof in self.lower:
            p = prof if prof is not None else AngularProfile.constant(self.n)
            vals = vals + coeff * p.eval_nodes(omega) * r ** (-float(j))
        return self.c * r ** self.q0 * vals

    def power_model(self, k: int, depth: int = 8) -> "EllipticModelSymbol":
        """The model of q^k (positive integer k): (1+u)^k expanded and truncated."""
        if k < 1:
            raise ValueError("power_model needs k >= 1")
        acc: dict = {}
        units = [(0, 1.0, None)] + [(j, c, p) for j, c, p in self.lower]
        state = [(0, 1.0, None)]
        for _ in range(k - 1):
            nxt = []
            for (j1, c1, p1) in state:
                for (j2, c2, p2) in units:
                    j = j1 + j2
                    if j >= depth:
                        continue
                    if p1 is None and p2 is None:
                        p = None
                    else:
                        a = p1 if p1 is not None else AngularProfile.constant(self.n)
                        b = p2 if p2 is not None else AngularProfile.constant(self.n)
                        p = a * b
                    nxt.append((j, c1 * c2, p))
            state = nxt
        for j, cc, p in state:
            key = (j, None if p is None else id(p))
            acc.setdefault(key, [j, 0.0, p])
            acc[key][1] += cc
        lower = tuple((j, cc, p) for (j, cc, p) in
                      (tuple(v) for v in acc.values()) if j >= 1 and cc != 0)
        return EllipticModelSymbol(self.n, self.c ** k, self.q0 * k, lower,
                                   self.theta, self.kernel_dim)


def _graded_unit_powers(q: EllipticModelSymbol, depth: int):
    """Relative terms of (1+u)^w: list over m of [(j, scalar, profile)]."""
    const = AngularProfile.constant(q.n)
    u = [(int(j), complex(c), p if p is not None else const) for j, c, p in q.lower]
    powers = [[(0, 1.0 + 0j, const)]]
    cur = powers[0]
    for _ in range(1, depth):
        nxt = []
        for (j1, c1, p1) in cur:
            for (j2, c2, p2) in u:
                if j1 + j2 < depth:
                    nxt.append((j1 + j2, c1 * c2, p1 * p2))
        if not nxt:
            break
        powers.append(nxt)
        cur = nxt
    return powers


def power_family(a: SymbolExpansion | None, q: EllipticModelSymbol,
                 exponent: OrderPath, depth: int = 8,
                 center: complex = 0.0, radius: float = 6.0,
                 label: str = "power") -> HolomorphicFamily:
    """The holomorphic family sigma(z) = a * q^exponent(z), graded to depth.

    The base q must be x-independent (multiplier calculus: operator powers
    coincide with pointwise powers); a may carry trigonometric-polynomial
    x-dependence.  Components are exact in z; the family truncates at relative
    offset < depth with no tail remainder (it is a valid finite family).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if a is None:
        a = make_power_symbol(q.n, 0.0)
    if a.n != q.n:
        raise DimensionError("coefficient symbol dimension mismatch")
    logc = math.log(q.c)
    powers = _graded_unit_powers(q, depth)
    terms = []
    for m, entries in enumerate(powers):
        for (ju, cu, pu) in entries:
            h0 = ZFunc.power_coeff(exponent, m, logc, cu)
            for t in a.terms:
                j_rel = round((a.order - t.degree).real)
                j = j_rel + ju
                if j >= depth + max(0, round(a.max_offset)):
                    continue
                ext = t.extension if (m == 0 and ju == 0) else "cutoff"
                terms.append(FamilyTerm(j, t.log_power, h0.scaled(t.coeff),
                                        t.profile * pu, t.x_coeff, ext))
    path = AffineImagePath(exponent, q.q0, a.order)
    remainder = None
    if a.remainder is not None:
        if a.remainder.decay is not None:
            raise UnsupportedModelError(
                "power_family supports compactly supported coefficient remainders")
        base_rem = a.remainder

        def w_fn(xi):
            return np.log(q.homogeneous_value(xi))

        remainder = ExpFamilyRemainder(base_rem.fn, w_fn, exponent,
                                       ((0, ZFunc.constant(1.0)),), None,
                                       base_rem.support_radius, "coeff-rem")
    return HolomorphicFamily(q.n, path, tuple(terms), remainder, center, radius,
                             label)


def log_symbol(q: EllipticModelSymbol, k: int = 1, depth: int = 8) -> SymbolExpansion:
    """k-th z-derivative of q^z at z = 0: log degree k, order 0.

    For k = 1 this is q0 log|xi| plus a classical order-0 part.
    """
    if not q.invertible:
        raise UnsupportedModelError("log symbol needs an invertible model")
    fam = power_family(None, q, AffinePath(1.0, 0.0), depth, label="q^z")
    return fam.derivative_slice(0.0, k)


# ---------------------------------------------------------------------------
# Zeta Laurent data
# ---------------------------------------------------------------------------

def zeta_family(a: SymbolExpansion | None, q: EllipticModelSymbol,
                depth: int = 8) -> HolomorphicFamily:
    """The family a * q^(-z) realizing the generalized zeta function."""
    return power_family(a, q, AffinePath(-1.0, 0.0), depth, label="a*q^-z")


def zeta_laurent(a: SymbolExpansion | None, q: EllipticModelSymbol,
                 z0: complex, K: int = 3, depth: int | None = None,
                 geometry: str = "s1", method: str = "analytic",
                 resolution: int = 4, **kwargs) -> LaurentSeries:
    """Laurent expansion of the model trace of a * q^(-z) around z0."""
    if depth is None:
        a_span = 0 if a is None else max(1, round(a.max_offset) + 1)
        depth = q.n + 4 + a_span + max(0, round((a.order.real if a else 0.0)
                                                + q.n))
    fam = zeta_family(a, q, depth)
    return model_trace(fam, z0, K, geometry, method, resolution, **kwargs)


def zeta_at_zero(a: SymbolExpansion | None, q: EllipticModelSymbol,
                 K: int = 3, depth: int | None = None, geometry: str = "s1",
                 kernel_traces=None, resolution: int = 4) -> LaurentSeries:
    """Laurent data of the zeta function at z0 = 0 with kernel corrections.

    For non-invertible models the caller must declare the kernel traces
    t_k = tr(a log^k q Pi); the correction (-1)^(k+1) t_k is added to c_k.
    """
    if not q.invertible and kernel_traces is None:
        raise UnsupportedModelError(
            "non-invertible model: declare kernel_traces=(tr(a pi), ...)")
    series = zeta_laurent(a, q, 0.0, K, depth, geometry, "analytic", resolution)
    if kernel_traces is None:
        return series
    regular = list(series.regular)
    for k in range(min(K + 1, len(kernel_traces))):
        regular[k] = regular[k] + (-1.0) ** (k + 1) * kernel_traces[k]
    return LaurentSeries(series.z0, series.principal, tuple(regular), K,
                         series.method, series.fit_residual)


def log_det(q: EllipticModelSymbol, depth: int = 8, geometry: str = "s1",
            resolution: int = 4, consistency_tol: float = 1e-8) -> complex:
    """log of the zeta determinant of the model.

    vol * [ fp(log q) - (1/2 q0) res_0(log^2 q) ]; asserted against -c_1 of
    the zeta expansion at zero.
    """
    if not q.invertible:
        raise UnsupportedModelError("zeta determinant needs an invertible model")
    vol = 2.0 * math.pi if geometry == "s1" else 1.0
    lq = log_symbol(q, 1, depth)
    lq2 = log_symbol(q, 2, depth)
    fp = finite_part_integral(lq, default_truncation(lq), 0.0, resolution)
    res2 = residue_density(lq2, 0.0, resolution)
    val = vol * (fp - res2 / (2.0 * q.q0))
    series = zeta_at_zero(None, q, 1, depth, geometry, None, resolution)
    if abs(val - (-series.c(1))) > consistency_tol * max(1.0, abs(val)):
        raise AccuracyError(
            f"log_det formula {val} vs -zeta'(0) {-series.c(1)}: inconsistent")
    return val


# ---------------------------------------------------------------------------
# Commutator and trace defects on the circle model
# ---------------------------------------------------------------------------

def circle_average(fn, grid: int = XGRID) -> complex:
    """(1/2 pi) int_0^{2 pi} fn(x) dx by the trig-exact trapezoid rule."""
    xs = 2.0 * np.pi * np.arange(grid) / grid
    return complex(sum(fn(x) for x in xs)) / grid


def integrated_fp(sym: SymbolExpansion, resolution: int = 4) -> complex:
    """int dx fp-integral over the circle: 2 pi times the x-average."""
    avg = sym.x_averaged()
    return 2.0 * math.pi * finite_part_integral(avg, default_truncation(avg),
                                                0.0, resolution)


def integrated_res(sym: SymbolExpansion, resolution: int = 4) -> complex:
    """int dx res_{x,0} over the circle."""
    avg = sym.x_averaged()
    return 2.0 * math.pi * residue_density(avg, 0.0, resolution)


def commutator_defect(a: SymbolExpansion, b: SymbolExpansion,
                      q: EllipticModelSymbol, depth: int = 8,
                      resolution: int = 4) -> complex:
    """int dx [ fp([A,B]) - (1/q0) res_0([A, B log Q]) ]; contract: ~ 0."""
    comm = commutator(a, b, depth)
    lq = log_symbol(q, 1, depth)
    bl = compose(b, lq, depth)
    comm_log = add(compose(a, bl, depth), scale(-1.0, compose(bl, a, depth)))
    return integrated_fp(comm, resolution) \
        - integrated_res(comm_log, resolution) / q.q0


@dataclass(frozen=True)
class TraceDefectReport:
    """Both routes of the trace defect formula plus the bracket-residue check."""

    defect: complex            # -(1/q0) res(a [b, log q])
    fp_route: complex          # int dx [ fp([A,B]) - (1/q0) res([A,B] log q) ]
    res_bracket: complex       # res([a,b] log q - [a, b log q])
    res_direct: complex        # res(a [b, log q])

    @property
    def mismatch(self) -> float:
        return abs(self.defect - self.fp_route)


def trace_defect(a: SymbolExpansion, b: SymbolExpansion,
                 q: EllipticModelSymbol, depth: int = 8,
                 resolution: int = 4) -> TraceDefectReport:
    """The trace defect identity and the global bracket-residue identity."""
    lq = log_symbol(q, 1, depth)
    b_lq_comm = add(compose(b, lq, depth), scale(-1.0, compose(lq, b, depth)))
    res_direct = integrated_res(compose(a, b_lq_comm, depth), resolution)
    defect = -res_direct / q.q0
    comm = commutator(a, b, depth)
    fp_route = integrated_fp(comm, resolution) \
        - integrated_res(compose(comm, lq, depth), resolution) / q.q0
    bl = compose(b, lq, depth)
    comm_log = add(compose(a, bl, depth), scale(-1.0, compose(bl, a, depth)))
    res_bracket = integrated_res(compose(comm, lq, depth), resolution) \
        - integrated_res(comm_log, resolution)
    return TraceDefectReport(defect, fp_route, res_bracket, res_direct)

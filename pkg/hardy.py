#!/usr/bin/env python3
"""
hardy.py

Hardy-space windows on the frequency side (angular, unitary Fourier convention):

    psi_n^alpha^(xi) = xi^(alpha/2) e^(-xi) L_n^alpha(2 xi)    for xi > 0, 0 otherwise

with norms, admissibility constants C_psi = int |f^(xi)|^2 dxi / xi and the
formal dimension ||psi||^2 / C_psi (closed form alpha/2).

Integrals over (0, inf) use composite Gauss-Legendre panels on (0, cutoff]
where the first panel is geometrically graded toward 0, so integrable
power singularities xi^beta (beta > -1) converge at the same rate as smooth
integrands.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from errors import AdmissibilityError, DomainError, QuadratureError
from halfplane import graded_gauss

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
TAIL_UNITS      = 80.0     # cutoff in units of 1 / (decay rate of the integrand)
UNIFORM_PANELS  = 48
PANEL_NODES     = 24
GRADING_LEVELS  = 90       # halvings of the first panel toward xi = 0
TAIL_TOL        = 1e-12    # relative size allowed for the last uniform panel
DIVERGENCE_RATIO = 1.0 - 1e-9  # level-to-level ratio at or above this counts as divergent


# ─── TYPES ─────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class FreqFunction:
    """xi -> f^(xi) on (0, inf), vectorized; zero on xi <= 0 by convention.

    `decay` is the exponential rate r with |f^(xi)| <= C xi^p e^(-r xi); it sets
    the truncation of every frequency integral involving f. `oscillation` is
    the largest |omega| among e^(i omega xi) factors of the rule.
    """
    rule: Callable
    decay: float = 1.0
    label: str = "f"
    oscillation: float = 0.0

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        pos = xi > 0
        values = np.asarray(self.rule(np.where(pos, xi, 1.0)), dtype=complex)
        out = np.where(pos, values, 0.0 + 0.0j)
        return out if out.ndim else complex(out)

    def scaled(self, c):
        return FreqFunction(lambda xi: c * self.rule(xi), self.decay,
                            f"{c}*{self.label}", self.oscillation)


@dataclass(frozen=True)
class Wavelet:
    """The window psi_n^alpha, optionally multiplied by an amplitude `scale`."""
    n: int
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"Laguerre index must be an integer >= 0, got n={self.n!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got alpha={self.alpha!r}")

    @property
    def weight(self):
        """Exponent 2n + alpha + 1 of the automorphy factor in the representation."""
        return 2 * self.n + self.alpha + 1

    def freq(self):
        return FreqFunction(lambda xi: psi_hat(self, xi), decay=1.0,
                            label=f"psi_{self.n}^{self.alpha:g}")


@dataclass(frozen=True)
class FreqQuadratureSpec:
    tail_units: float = TAIL_UNITS
    panels: int = UNIFORM_PANELS
    nodes: int = PANEL_NODES
    grading: int = GRADING_LEVELS
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        if self.panels < 1 or self.nodes < 1:
            raise DomainError(f"frequency quadrature needs panels, nodes >= 1, "
                              f"got {self.panels}, {self.nodes}")
        if self.grading < 2:
            raise DomainError(f"at least two graded levels are needed, got {self.grading}")

    def refined(self):
        return FreqQuadratureSpec(self.tail_units, self.panels * 2, self.nodes,
                                  self.grading, self.tail_tol)


DEFAULT_FREQ_SPEC = FreqQuadratureSpec()


# ─── LAGUERRE ──────────────────────────────────────────────────────────────────
def laguerre(n, alpha, x):
    """Generalized Laguerre polynomial L_n^alpha(x) by the three-term recurrence."""
    if n < 0:
        raise DomainError(f"Laguerre index must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


@lru_cache(maxsize=128)
def laguerre_coefficients(n, alpha):
    """Monomial coefficients c_j of L_n^alpha(x) = sum_j c_j x^j."""
    j = np.arange(n + 1)
    return tuple(float(c) for c in
                 (-1.0) ** j * special.binom(n + alpha, n - j) / special.factorial(j))


def psi_hat(w, xi):
    xi = np.asarray(xi, dtype=float)
    pos = xi > 0
    x = np.where(pos, xi, 1.0)
    values = w.scale * x ** (w.alpha / 2.0) * np.exp(-x) * laguerre(w.n, w.alpha, 2.0 * x)
    out = np.where(pos, values, 0.0)
    return out if out.ndim else float(out)


def profile_inner(w1, a1, b1, w2, a2, b2):
    """Closed form of <rho(a1,b1) psi_1, rho(a2,b2) psi_2> (vectorized over a, b).

    rho(a,b) acts on the frequency side by xi -> sqrt(a) e^(-i b xi) f^(a xi),
    so the integrand is a polynomial times xi^p e^(-s xi) with
    s = a1 + a2 + i (b1 - b2), Re s > 0, and each monomial integrates to
    Gamma(p + 1) s^(-(p + 1)) on the principal branch.
    """
    a1, b1, a2, b2 = (np.asarray(v, dtype=float) for v in (a1, b1, a2, b2))
    s = a1 + a2 + 1j * (b1 - b2)
    c1 = laguerre_coefficients(w1.n, w1.alpha)
    c2 = laguerre_coefficients(w2.n, w2.alpha)
    half = 0.5 * (w1.alpha + w2.alpha)
    total = np.zeros(np.broadcast(s, a1, a2).shape, dtype=complex)
    for j, cj in enumerate(c1):
        for l, cl in enumerate(c2):
            p = half + j + l + 1.0
            coeff = cj * cl * 2.0 ** (j + l) * special.gamma(p)
            total = total + coeff * a1 ** j * a2 ** l * np.power(s, -p)
    prefactor = w1.scale * w2.scale * np.sqrt(a1 * a2) * a1 ** (w1.alpha / 2.0) * a2 ** (w2.alpha / 2.0)
    return prefactor * total


# ─── FREQUENCY QUADRATURE ──────────────────────────────────────────────────────
def freq_nodes(spec, rate, oscillation=0.0):
    """Nodes/weights on (0, cutoff] for an integrand decaying like e^(-rate xi).

    Returns (xi, w, level) where level[k] is the grading level of node k
    (0 for the uniform panels, 1..grading for graded panels toward 0,
    grading + 1 for the innermost plain panel).
    `oscillation` is the largest |frequency| of e^(i omega xi) factors; it
    raises the panel count so each panel sees a bounded number of periods.
    """
    if not rate > 0:
        raise DomainError(f"decay rate must be positive, got {rate!r}")
    cutoff = spec.tail_units / rate
    panels = spec.panels
    if oscillation > 0:
        panels = max(panels, int(math.ceil(oscillation * cutoff / (0.25 * spec.nodes))))
    width = cutoff / panels
    uniform_edges = np.linspace(width, cutoff, panels)
    graded_edges = width * 2.0 ** (-np.arange(spec.grading, -1, -1, dtype=float))
    x_u, w_u = graded_gauss(uniform_edges, spec.nodes)
    x_g, w_g = graded_gauss(graded_edges, spec.nodes)
    # the innermost panel [0, width 2^-grading] is a plain Gauss panel
    x_0, w_0 = graded_gauss([0.0, graded_edges[0]], spec.nodes)
    xi = np.concatenate([x_0, x_g, x_u])
    w = np.concatenate([w_0, w_g, w_u])
    level = np.concatenate([
        np.full(x_0.size, spec.grading + 1),
        np.repeat(np.arange(spec.grading, 0, -1), spec.nodes),
        np.zeros(x_u.size, dtype=int),
    ])
    return xi, w, level


def _integrate(values, w, spec, what):
    """Weighted sum with a check that the last uniform panel is negligible."""
    weighted = values * w
    total = np.sum(weighted)
    if not np.isfinite(total):
        raise QuadratureError(f"{what}: non-finite quadrature sum", total=complex(total))
    mass = float(np.sum(np.abs(weighted)))
    last_panel = float(np.abs(np.sum(weighted[-spec.nodes:])))
    if last_panel > spec.tail_tol * mass:
        raise QuadratureError(f"{what}: tail beyond the cutoff is not negligible",
                              tail=last_panel, mass=mass)
    return complex(total) if np.iscomplexobj(total) else float(total)


def norm_sq(f, spec=DEFAULT_FREQ_SPEC):
    """||f||^2 = int_0^inf |f^(xi)|^2 dxi (Plancherel, constant 1)."""
    xi, w, _ = freq_nodes(spec, 2.0 * f.decay)
    return _integrate(np.abs(f(xi)) ** 2, w, spec, "norm_sq")


def admissibility_constant(f, spec=DEFAULT_FREQ_SPEC):
    """C_f = int_0^inf |f^(xi)|^2 dxi / xi.

    Near 0 the integrand behaves like c xi^beta, so the graded levels
    contribute a geometric sequence with ratio 2^-(beta + 1). The innermost
    panel is replaced by the sum of that sequence past the deepest level.
    A ratio that does not drop below 1 means the integral diverges at 0.
    """
    xi, w, level = freq_nodes(spec, 2.0 * f.decay)
    values = np.abs(f(xi)) ** 2 / xi
    total = _integrate(values, w, spec, "admissibility_constant")
    weighted = values * w
    innermost = float(np.sum(weighted[level > spec.grading]))
    deepest = float(np.sum(weighted[level == spec.grading]))
    previous = float(np.sum(weighted[level == spec.grading - 1]))
    if not (deepest > 0 and previous > 0):
        return total
    ratio = deepest / previous
    if ratio >= DIVERGENCE_RATIO:
        logger.debug("graded levels shrink by %.12f toward xi = 0", ratio)
        raise AdmissibilityError("admissibility integral does not converge at xi = 0",
                                 level_ratio=ratio, deepest_level=deepest)
    return total - innermost + deepest * ratio / (1.0 - ratio)


@dataclass(frozen=True)
class FormalDimension:
    quadrature: float
    closed_form: float
    norm_sq: float
    admissibility: float

    @property
    def residual(self):
        return abs(self.quadrature - self.closed_form)


def formal_dimension(w, spec=DEFAULT_FREQ_SPEC):
    """||psi||^2 / C_psi by quadrature, with the closed form alpha / 2 alongside."""
    f = w.freq()
    n2 = norm_sq(f, spec)
    c = admissibility_constant(f, spec)
    return FormalDimension(quadrature=n2 / c, closed_form=w.alpha / 2.0,
                           norm_sq=n2, admissibility=c)


def inner_product(f, g, spec=DEFAULT_FREQ_SPEC):
    """<f, g> = int f^(xi) conj(g^(xi)) dxi."""
    xi, w, _ = freq_nodes(spec, f.decay + g.decay, f.oscillation + g.oscillation)
    return _integrate(f(xi) * np.conj(g(xi)), w, spec, "inner_product")

#!/usr/bin/env python3
"""
wavelet.py

The wavelet transform W_psi f(z) = <f, rho(a,b) psi> (z = b + ai), the affine
action rho(a,b), the projective representation tau of PSL(2,R) on transforms
and residual-style checks of the identities that tie them together:
intertwining, rotation stationarity, Calderon's formula, the orthogonality
relations and invariance of the range under tau.

Conventions
  - rho(a,b) acts on the frequency side by xi -> sqrt(a) e^(-i b xi) f^(a xi).
  - tau(m)F(z) = j(m^-1, z) F(m^-1 z) with j(g, z) = (|cz+d| / (cz+d))^K,
    K = 2n + alpha + 1, principal argument of cz + d for the canonical sign.
  - Integrating over the shift b turns the frequency pairing into 2 pi times
    a delta, so pairings of transforms (and group averages of them) are taken
    against the plane / Haar measures divided by 2 pi. With this constant
    Calderon's formula reads <W f1, W f2> = C_psi <f1, f2> and the formal
    dimension of tau is ||psi||^2 / C_psi.

Transforms of finite combinations of dilated / translated windows are closed
forms (SpanFunction -> wavelet_of_span); only pairings are discretized.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from errors import DomainError, IllConditionedError, QuadratureError
from halfplane import (IDENTITY, ZERO_TOL, GeodesicDiskGrid, GroupElement, HaarQuadratureSpec,
                       HalfPlaneGrid, PointH, affine_embed, element_entries, geodesic_frame,
                       haar_integrate, hyperbolic_barycenter, inverse, mobius_array, rotation)
from hardy import (DEFAULT_FREQ_SPEC, FreqFunction, Wavelet, admissibility_constant,
                   inner_product, profile_inner, psi_hat)

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
SHIFT_PLANCHEREL = 1.0 / (2.0 * math.pi)
MODULUS_FLOOR    = 1e-6     # relative to the largest |W psi psi| on the probe grid
TRUNCATION_TOL   = 1e-4     # share of |F conj H| mass allowed on the outer grid ring
RHS_FLOOR        = 1e-8     # relative floor for the orthogonality-relation reference
IDEMPOTENCE_TOL  = 1e-2
RANGE_EVAL_RADIUS = 2.0    # hyperbolic radius about the center on which range residuals are measured
KERNEL_CHUNK     = 512      # kernel rows formed at a time

PLANE_GRID       = HalfPlaneGrid()
ORBIT_PLANE_GRID = HalfPlaneGrid(n_a=41, n_b=41)
ORTHO_HAAR_SPEC  = HaarQuadratureSpec(a_min=math.exp(-8.0), a_max=math.exp(8.0), n_a=33,
                                      half_width=8.0, n_b=33, n_theta=2)
RANGE_GRID       = GeodesicDiskGrid()


def probe_points(a_lo=0.1, a_hi=10.0, n_a=15, b_half=3.0, n_b=15):
    """Log-spaced scales times uniform shifts, flattened to complex z = b + ai."""
    a = np.geomspace(a_lo, a_hi, n_a)
    b = np.linspace(-b_half, b_half, n_b)
    return (b[None, :] + 1j * a[:, None]).ravel()


STATIONARITY_PROBES = probe_points()
INTERTWINE_PROBES   = probe_points(0.5, 2.0, 3, 1.0, 3)


# ─── TYPES ─────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Atom:
    """One term coeff * rho(scale, shift) window of a SpanFunction."""
    coeff: complex
    scale: float
    shift: float
    window: Wavelet

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"atom scale must be positive, got {self.scale!r}")

    @property
    def point(self):
        return complex(self.shift, self.scale)


@dataclass(frozen=True)
class SpanFunction:
    """f = sum_j c_j rho(a_j, b_j) psi_{P_j}: a vector with closed-form transforms."""
    atoms: Tuple[Atom, ...] = ()
    label: str = "f"

    @classmethod
    def of(cls, window, terms, label="f"):
        """Build from (coeff, a, b) triples sharing one window."""
        return cls(tuple(Atom(complex(c), float(a), float(b), window) for c, a, b in terms), label)

    @classmethod
    def random(cls, window, count, rng, label="f"):
        coeffs = rng.normal(size=count) + 1j * rng.normal(size=count)
        scales = np.exp(rng.uniform(-0.5, 0.5, size=count))
        shifts = rng.uniform(-1.0, 1.0, size=count)
        return cls.of(window, zip(coeffs, scales, shifts), label)

    def freq(self):
        atoms = self.atoms

        def rule(xi):
            total = np.zeros(np.shape(xi), dtype=complex)
            for at in atoms:
                total = total + (at.coeff * math.sqrt(at.scale) * np.exp(-1j * at.shift * xi)
                                 * psi_hat(at.window, at.scale * xi))
            return total

        decay = min((at.scale for at in atoms), default=1.0)
        oscillation = max((abs(at.shift) for at in atoms), default=0.0)
        return FreqFunction(rule, decay=decay, label=self.label, oscillation=oscillation)

    def moved(self, a, b):
        """rho(a, b) f, using rho(a,b) rho(a_j,b_j) = rho(a a_j, b + a b_j)."""
        return SpanFunction(tuple(replace(at, scale=a * at.scale, shift=b + a * at.shift)
                                  for at in self.atoms), f"rho({a:g},{b:g}){self.label}")

    def scaled(self, c):
        return SpanFunction(tuple(replace(at, coeff=c * at.coeff) for at in self.atoms),
                            f"{c}*{self.label}")

    def inner(self, other):
        """<self, other> in H^2 by the closed form of each atom pair."""
        total = 0.0 + 0.0j
        for p in self.atoms:
            for q in other.atoms:
                total += p.coeff * np.conj(q.coeff) * complex(
                    profile_inner(p.window, p.scale, p.shift, q.window, q.scale, q.shift))
        return total

    def norm_sq(self):
        return self.inner(self).real

    def center(self):
        if not self.atoms:
            return None
        weights = [abs(at.coeff) for at in self.atoms]
        if not sum(weights) > 0:
            return None
        return hyperbolic_barycenter([at.point for at in self.atoms], weights)


@dataclass(frozen=True)
class TransformFunction:
    """A function on C+ evaluated pointwise by `rule` (vectorized over complex z).

    `center` is a point where the function's mass concentrates; pairings use it
    to place their quadrature grid. `span`/`window` are set for closed-form
    transforms W_window(span).
    """
    rule: Callable
    provenance: str = "F"
    center: Optional[complex] = None
    span: Optional[SpanFunction] = field(default=None, compare=False)
    window: Optional[Wavelet] = None

    def __call__(self, z):
        if isinstance(z, PointH):
            z = z.z
        z = np.asarray(z, dtype=complex)
        out = np.asarray(self.rule(z), dtype=complex)
        out = np.broadcast_to(out, z.shape)
        return out if out.ndim else complex(out)

    def scaled(self, c):
        span = self.span.scaled(c) if self.span is not None else None
        return TransformFunction(lambda z: c * self.rule(z), f"{c}*{self.provenance}",
                                 self.center, span, self.window)


class PhaseReport(NamedTuple):
    phase: float
    dispersion: float
    modulus_residual: float
    points_used: int


class OrthoCheck(NamedTuple):
    lhs: complex
    rhs: complex
    relerr: float


ZERO_TRANSFORM = TransformFunction(lambda z: np.zeros(np.shape(z), dtype=complex), "0")


# ─── AFFINE ACTION AND TRANSFORMS ──────────────────────────────────────────────
def rho_apply(a, b, f):
    """rho(a,b) f on the frequency side (SpanFunctions stay closed form)."""
    if not a > 0:
        raise DomainError(f"affine scale must be positive, got a={a!r}")
    if isinstance(f, SpanFunction):
        return f.moved(a, b)
    root = math.sqrt(a)
    return FreqFunction(lambda xi: root * np.exp(-1j * b * xi) * f.rule(a * xi),
                        decay=a * f.decay, label=f"rho({a:g},{b:g}){f.label}",
                        oscillation=abs(b) + a * f.oscillation)


def _as_freq(f):
    return f.freq() if isinstance(f, SpanFunction) else f


def wavelet_transform(f, psi, spec=DEFAULT_FREQ_SPEC, center=None):
    """W_psi f by frequency quadrature, one pairing per evaluation point."""
    f_freq = _as_freq(f)
    window = psi.freq()
    if center is None and isinstance(f, SpanFunction):
        center = f.center()

    def rule(z):
        out = np.empty(z.shape, dtype=complex)
        for idx, zk in np.ndenumerate(z):
            out[idx] = inner_product(f_freq, rho_apply(zk.imag, zk.real, window), spec)
        return out

    return TransformFunction(rule, f"W[{f_freq.label}]", center, None, psi)


def wavelet_of_span(f, psi, center=None):
    """W_psi f in closed form for f in the span of dilated / translated windows."""
    atoms = f.atoms

    def rule(z):
        total = np.zeros(z.shape, dtype=complex)
        for at in atoms:
            total = total + at.coeff * profile_inner(at.window, at.scale, at.shift,
                                                     psi, z.imag, z.real)
        return total

    return TransformFunction(rule, f"W[{f.label}]", center if center is not None else f.center(),
                             f, psi)


def coherent_state(psi, z, window=None):
    """W_psi (rho(z) window) with window = psi unless given."""
    z = z.z if isinstance(z, PointH) else complex(z)
    span = SpanFunction.of(window or psi, [(1.0, z.imag, z.real)], label="psi")
    return wavelet_of_span(span, psi)


# ─── REPRESENTATION ────────────────────────────────────────────────────────────
def automorphy(m, z, weight):
    """(|cz+d| / (cz+d))^K for the canonical entries of m."""
    return np.exp(-1j * weight * np.angle(m.c * np.asarray(z, dtype=complex) + m.d))


def rep_apply(m, n, alpha, F):
    """tau_n^alpha(m) F, i.e. z -> j(m^-1, z) F(m^-1 z)."""
    weight = 2 * n + alpha + 1
    inv = inverse(m)
    rule = F.rule

    def moved(z):
        return automorphy(inv, z, weight) * rule(mobius_array(inv, z))

    center = None if F.center is None else complex(mobius_array(m, F.center))
    return TransformFunction(moved, f"tau({F.provenance})", center, None, F.window)


def intertwine_residual(f, psi, a, b, points=None, spec=DEFAULT_FREQ_SPEC):
    """sup |W(rho(a,b) f) - tau(m_{a,b}) W f| over the probe points.

    Both sides go through frequency quadrature independently.
    """
    points = INTERTWINE_PROBES if points is None else np.asarray(points, dtype=complex)
    f_freq = _as_freq(f)
    lhs = wavelet_transform(rho_apply(a, b, f_freq), psi, spec)
    rhs = rep_apply(affine_embed(a, b), psi.n, psi.alpha, wavelet_transform(f_freq, psi, spec))
    return float(np.max(np.abs(lhs(points) - rhs(points))))


def stationarity_report(n, alpha, theta, points=None, window=None, floor=MODULUS_FLOOR):
    """Compare tau(r_theta) W psi psi with W psi psi on the probe points.

    `window` replaces psi_n^alpha by another profile while the exponent stays
    2n + alpha + 1 (the mismatched control).
    """
    if not 0.0 <= theta < math.pi:
        raise DomainError(f"rotation angle must lie in [0, pi), got {theta!r}")
    psi = window or Wavelet(n, alpha)
    points = STATIONARITY_PROBES if points is None else np.asarray(points, dtype=complex)
    base = coherent_state(psi, 1j)
    turned = rep_apply(rotation(theta), n, alpha, base)
    f_vals, g_vals = base(points), turned(points)
    modulus = np.abs(f_vals)
    keep = modulus > floor * np.max(modulus, initial=0.0)
    if not np.any(keep):
        raise DomainError("stationarity probe grid lies entirely below the modulus floor")
    ratio = g_vals[keep] / f_vals[keep]
    units = ratio / np.abs(ratio)
    phase = float(np.angle(np.mean(units)))
    dispersion = float(np.max(np.abs(np.angle(units * np.exp(-1j * phase)))))
    residual = float(np.max(np.abs(np.abs(g_vals) - modulus)))
    logger.debug("stationarity n=%s alpha=%s theta=%s: phase %.6f dispersion %.3e",
                 n, alpha, theta, phase, dispersion)
    return PhaseReport(phase, dispersion, residual, int(np.count_nonzero(keep)))


# ─── PAIRINGS ──────────────────────────────────────────────────────────────────
def _pairing_frame(c1, c2):
    centers = sorted((c for c in (c1, c2) if c is not None), key=lambda c: (c.real, c.imag))
    if not centers:
        return IDENTITY
    if len(centers) == 1 or abs(centers[0] - centers[1]) == 0.0:
        return affine_embed(centers[0].imag, centers[0].real)
    return geodesic_frame(centers[0], centers[1])[0]


def wspace_inner(F, H, grid=None, tail_tol=TRUNCATION_TOL):
    """<F, H> = int F conj(H) da db / (2 pi a^2), on a grid moved to the centers.

    The grid is transported by an isometry that puts the two center hints
    symmetric about i; the measure is invariant so this is exact. With
    tail_tol=None the outer-ring check is skipped.
    """
    grid = grid or PLANE_GRID
    frame = _pairing_frame(F.center, H.center)
    z, w = grid.plane_nodes()
    zz = mobius_array(frame, z)
    values = F(zz) * np.conj(H(zz))
    if not np.all(np.isfinite(values)):
        raise QuadratureError("non-finite transform values in wspace_inner",
                              provenance=(F.provenance, H.provenance))
    weighted = values * w
    if tail_tol is not None:
        mass = np.abs(weighted).reshape(grid.n_a, grid.n_b)
        total = float(np.sum(mass))
        ring = total - float(np.sum(mass[1:-1, 1:-1]))
        if total > 0 and ring > tail_tol * total:
            raise QuadratureError("plane grid truncates the pairing",
                                  ring_share=ring / total, provenance=(F.provenance, H.provenance))
    return SHIFT_PLANCHEREL * complex(np.sum(weighted))


def group_average(f, spec, vectorized=False):
    """Haar integral with the W-space normalization (dmu_G / 2 pi)."""
    return SHIFT_PLANCHEREL * haar_integrate(f, spec, vectorized=vectorized)


def _closed_orbit_ready(F, H):
    spans = (F.span, H.span)
    if any(s is None for s in spans) or F.window is None or F.window != H.window:
        return False
    return all(at.window == F.window for s in spans for at in s.atoms)


def orbit_pairing(H, F, elements, grid=None, method="auto"):
    """<H, tau(m) F> for each m in `elements`.

    `elements` is a sequence of GroupElements or a (k, 4) array of matrix
    entries (any sign). method "closed" uses
    tau(m) W rho(z) psi = j(m^-1, m z) W rho(m z) psi, valid when both
    transforms come from spans of their own window; it is vectorized over all
    elements. "quadrature" pairs numerically per element.
    """
    if method not in ("auto", "closed", "quadrature"):
        raise DomainError(f"unknown pairing method {method!r}")
    ready = _closed_orbit_ready(F, H)
    if method == "closed" and not ready:
        raise DomainError("closed-form orbit pairing needs span transforms of one window")
    entries = element_entries(elements)
    if method == "quadrature" or not ready:
        grid = grid or ORBIT_PLANE_GRID
        psi = F.window
        if psi is None:
            raise DomainError("orbit pairing needs the transform window for the exponent")
        moved = (GroupElement(*row) for row in entries)
        return np.array([wspace_inner(H, rep_apply(m, psi.n, psi.alpha, F), grid, tail_tol=None)
                         for m in moved], dtype=complex)
    return _closed_orbit_pairing(H, F, entries)


@lru_cache(maxsize=32)
def calderon_constant(psi):
    return admissibility_constant(psi.freq())


def _inverse_bottom_rows(entries):
    """(c, d) of the canonical representative of m^-1 = (d, -b; -c, a), per row."""
    ma, mb, mc, md = entries.T
    sign = np.where(np.abs(md) > ZERO_TOL, np.sign(md),
                    np.where(np.abs(mc) > ZERO_TOL, -np.sign(mc),
                             np.where(np.abs(mb) > ZERO_TOL, -np.sign(mb), np.sign(ma))))
    return -sign * mc, sign * ma


def _closed_orbit_pairing(H, F, entries):
    psi = F.window
    weight = psi.weight
    ma, mb, mc, md = entries.T
    inv_c, inv_d = _inverse_bottom_rows(entries)
    total = np.zeros(ma.shape, dtype=complex)
    for at in F.span.atoms:
        moved = (ma * at.point + mb) / (mc * at.point + md)
        phase = np.exp(-1j * weight * np.angle(inv_c * moved + inv_d))
        for other in H.span.atoms:
            kernel = profile_inner(psi, other.scale, other.shift, psi, moved.imag, moved.real)
            total = total + other.coeff * np.conj(at.coeff * phase) * kernel
    return calderon_constant(psi) * total


def ortho_relation_check(f1, f2, g1, g2, psi, haar_spec=None, grid=None, formal_dim=None):
    """Orthogonality relations for tau on W psi-space.

    lhs = int <tau(m) W f1, W g1> conj<tau(m) W f2, W g2> dmu(m),
    rhs = (1/d) <W f1, W f2> conj<W g1, W g2>, d = alpha/2 unless overridden.
    """
    haar_spec = haar_spec or ORTHO_HAAR_SPEC
    grid = grid or ORBIT_PLANE_GRID
    d = psi.alpha / 2.0 if formal_dim is None else formal_dim
    if not d > 0:
        raise DomainError(f"formal dimension must be positive, got {d!r}")
    wf1, wf2, wg1, wg2 = (wavelet_of_span(f, psi) for f in (f1, f2, g1, g2))

    def pair(m, wf, wg):
        return wspace_inner(rep_apply(m, psi.n, psi.alpha, wf), wg, grid, tail_tol=None)

    if f1 == f2 and g1 == g2:
        def integrand(m):
            return abs(pair(m, wf1, wg1)) ** 2
    else:
        def integrand(m):
            return pair(m, wf1, wg1) * np.conj(pair(m, wf2, wg2))

    logger.info("Averaging over %d Haar nodes", haar_spec.n_a * haar_spec.n_b * haar_spec.n_theta)
    lhs = complex(group_average(integrand, haar_spec))
    rhs = complex(wspace_inner(wf1, wf2) * np.conj(wspace_inner(wg1, wg2)) / d)
    scale = math.sqrt(abs(wspace_inner(wf1, wf1) * wspace_inner(wf2, wf2)
                          * wspace_inner(wg1, wg1) * wspace_inner(wg2, wg2))) / d
    if abs(rhs) <= RHS_FLOOR * scale:
        raise IllConditionedError("orthogonality reference value is below the floor",
                                  lhs=lhs, rhs=rhs, scale=scale)
    return OrthoCheck(lhs, rhs, abs(lhs - rhs) / abs(rhs))


def _apply_kernel(psi, rows, cols, weights, values):
    """sum_w <rho_w psi, rho_z psi> weights(w) values(w) for each z in rows."""
    out = np.empty(rows.shape, dtype=complex)
    coeff = weights * values
    for start in range(0, rows.size, KERNEL_CHUNK):
        block = rows[start:start + KERNEL_CHUNK]
        kernel = profile_inner(psi, cols.imag[None, :], cols.real[None, :],
                               psi, block.imag[:, None], block.real[:, None])
        out[start:start + block.size] = kernel @ coeff
    return out


def range_residual(F, psi, grid=None, eval_radius=RANGE_EVAL_RADIUS,
                   idempotence_tol=IDEMPOTENCE_TOL):
    """||F - P F|| / ||F|| with P the discretized reproducing-kernel operator.

    P F(z) = C^-1 int F(w) <rho_w psi, rho_z psi> dmu_W(w). The integral runs
    over a geodesic disk about F's center (i when it has none); norms are taken
    on the inner disk of radius eval_radius, away from the truncated rim. A
    discretization too coarse for P to act as a projection on P F raises
    QuadratureError.
    """
    grid = grid or RANGE_GRID
    if not 0 < eval_radius < grid.radius:
        raise DomainError(f"evaluation radius must lie in (0, {grid.radius}), got {eval_radius!r}")
    frame = IDENTITY if F.center is None else affine_embed(F.center.imag, F.center.real)
    z, w, dist = grid.disk_nodes()
    zz = mobius_array(frame, z)
    mu = SHIFT_PLANCHEREL * w
    inner = dist <= eval_radius
    values = F(zz)
    norm = math.sqrt(float(np.sum(mu[inner] * np.abs(values[inner]) ** 2)))
    if not norm > 0:
        raise DomainError("range residual of a function vanishing on the grid")
    weights = mu / calderon_constant(psi)
    projected = _apply_kernel(psi, zz, zz, weights, values)
    again = _apply_kernel(psi, zz[inner], zz, weights, projected)
    defect = math.sqrt(float(np.sum(mu[inner] * np.abs(again - projected[inner]) ** 2))) / norm
    logger.debug("range residual on %d nodes (%d inner), idempotence defect %.3e",
                 zz.size, int(inner.sum()), defect)
    if defect > idempotence_tol:
        raise QuadratureError("grid too coarse: discretized kernel is not a projection",
                              idempotence_defect=defect)
    return math.sqrt(float(np.sum(mu[inner] * np.abs(values[inner] - projected[inner]) ** 2))) / norm

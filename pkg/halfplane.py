#!/usr/bin/env python3
"""
halfplane.py

PSL(2,R) and upper-half-plane geometry for the hyperlattice toolkit:
  - GroupElement: det-1 matrices modulo sign, with a fixed canonical sign
  - Mobius action, affine embedding m_{a,b}, rotations r_theta, NAK factoring
  - Haar measure on PSL(2,R) and hyperbolic measure on C+ with deterministic
    tensor quadrature (trapezoid in log-scale, uniform or sinh shift maps,
    periodic angles; composite Gauss-Legendre on vertical regions; geodesic
    polar grids on disks about i)

Haar normalization: dmu_G = (da db / a^2) (dtheta / pi), so PSO(2) has mass 1.
Everything here is a pure function of immutable values; vectorized helpers take
complex numpy arrays for the point z = x + iy.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from errors import DomainError, NumericError

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
DET_TOL      = 1e-12    # determinant-1 normalization check
ZERO_TOL     = 1e-12    # entries below this count as zero for the sign rule
EQUAL_TOL    = 1e-9     # element equality / dedup tolerance


# ─── GROUP ELEMENTS ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class GroupElement:
    """Element of PSL(2,R), stored as its canonical det-1 representative.

    The constructor rescales any matrix with positive determinant to det 1 and
    applies the sign rule: the first entry in the order (a, c, b, d) that is
    not zero is made nonnegative.
    """
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        entries = np.array([self.a, self.b, self.c, self.d], dtype=float)
        if not np.all(np.isfinite(entries)):
            raise DomainError(f"non-finite matrix entries {entries.tolist()}")
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if det <= 0:
            raise DomainError(f"matrix determinant must be positive, got {det!r}")
        entries /= math.sqrt(det)
        for idx in (0, 2, 1, 3):
            if abs(entries[idx]) > ZERO_TOL:
                if entries[idx] < 0:
                    entries = -entries
                break
        entries = entries + 0.0  # drop negative zeros
        for name, value in zip("abcd", entries):
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_matrix(cls, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    def det(self):
        return self.a * self.d - self.b * self.c

    def isclose(self, other, tol=EQUAL_TOL):
        return bool(np.max(np.abs(self.matrix() - other.matrix())) <= tol)

    def __matmul__(self, other):
        return compose(self, other)


IDENTITY = GroupElement(1.0, 0.0, 0.0, 1.0)


class ElementIndex:
    """Map from group elements to values, matching elements up to `tol`.

    Entries are bucketed on a grid of cell size tol in (a, b, c, d); a lookup
    scans the neighbouring cells of the query and of its negative, so matches
    that straddle a cell edge or the sign rule's threshold are still found.
    """

    def __init__(self, tol=EQUAL_TOL):
        if not tol > 0:
            raise DomainError(f"element tolerance must be positive, got {tol!r}")
        self.tol = tol
        self._cells = {}
        self._size = 0

    def _cell(self, entries):
        return tuple(math.floor(v / self.tol) for v in entries)

    def get(self, m, default=None):
        for sign in (1.0, -1.0):
            entries = tuple(sign * v for v in (m.a, m.b, m.c, m.d))
            base = self._cell(entries)
            for offset in itertools.product((-1, 0, 1), repeat=4):
                cell = tuple(c + o for c, o in zip(base, offset))
                for other, value in self._cells.get(cell, ()):
                    if max(abs(x - y) for x, y in zip(entries, other)) <= self.tol:
                        return value
        return default

    def __contains__(self, m):
        return self.get(m, _MISSING) is not _MISSING

    def add(self, m, value):
        entries = (m.a, m.b, m.c, m.d)
        self._cells.setdefault(self._cell(entries), []).append((entries, value))
        self._size += 1

    def __len__(self):
        return self._size


_MISSING = object()


@dataclass(frozen=True)
class PointH:
    """A point z = x + iy of the upper half-plane."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite point ({self.x}, {self.y})")
        if self.y <= 0:
            raise DomainError(f"points of C+ need y > 0, got y={self.y!r}")

    @classmethod
    def from_complex(cls, z):
        return cls(float(np.real(z)), float(np.imag(z)))

    @property
    def z(self):
        return complex(self.x, self.y)


@dataclass(frozen=True)
class NAKCoords:
    scale: float
    shift: float
    angle: float


def canonicalize(m):
    """Canonical representative of m (a GroupElement or any 2x2 array)."""
    if isinstance(m, GroupElement):
        return GroupElement(m.a, m.b, m.c, m.d)
    return GroupElement.from_matrix(m)


def compose(m1, m2):
    return GroupElement(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def inverse(m):
    return GroupElement(m.d, -m.b, -m.c, m.a)


def affine_embed(a, b):
    """m_{a,b} = (sqrt a, b/sqrt a; 0, 1/sqrt a), mapping i to b + ai."""
    if not a > 0:
        raise DomainError(f"affine scale must be positive, got a={a!r}")
    r = math.sqrt(a)
    return GroupElement(r, b / r, 0.0, 1.0 / r)


def rotation(theta):
    """r_theta = (cos, sin; -sin, cos); fixes i, projective period pi."""
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, s, -s, c)


# ─── MOBIUS ACTION ─────────────────────────────────────────────────────────────
def mobius_array(m, z):
    """(az + b) / (cz + d) for a complex array z in C+."""
    z = np.asarray(z, dtype=complex)
    return (m.a * z + m.b) / (m.c * z + m.d)


def mobius_apply(m, z):
    w = complex(mobius_array(m, z.z))
    # Im(m z) = y / |cz + d|^2 exactly; keep that form for the imaginary part
    denom = abs(m.c * z.z + m.d) ** 2
    return PointH(w.real, z.y / denom)


def nak_factor(m):
    """Write m = m_{a,b} r_theta and return (a, b, theta) with theta in [0, pi)."""
    w = complex(mobius_array(m, 1j))
    a, b = w.imag, w.real
    r = compose(inverse(affine_embed(a, b)), m)
    theta = math.atan2(r.b, r.a) % math.pi
    if theta >= math.pi - ZERO_TOL:
        theta = 0.0
    return NAKCoords(a, b, theta)


def nak_assemble(coords):
    return compose(affine_embed(coords.scale, coords.shift), rotation(coords.angle))


# ─── BATCHED ENTRIES ───────────────────────────────────────────────────────────
# Rows (a, b, c, d) of det-1 matrices; the sign is left as computed.
def element_entries(elements):
    """(k, 4) entry array for a sequence of GroupElements (arrays pass through)."""
    if isinstance(elements, np.ndarray):
        return np.asarray(elements, dtype=float).reshape(-1, 4)
    return np.array([(m.a, m.b, m.c, m.d) for m in elements], dtype=float).reshape(-1, 4)


def nak_entries(a, b, theta):
    """Entries of m_{a,b} r_theta for node arrays a, b, theta."""
    a, b, theta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, theta)))
    r = np.sqrt(a)
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack([r * cos - b / r * sin, r * sin + b / r * cos,
                     -sin / r, cos / r], axis=-1).reshape(-1, 4)


def batch_inverse(entries):
    a, b, c, d = np.asarray(entries, dtype=float).T
    return np.stack([d, -b, -c, a], axis=-1)


def batch_compose(left, right):
    """All products left[i] @ right[j], flattened row-major to (len(left) * len(right), 4)."""
    la, lb, lc, ld = (v[:, None] for v in np.asarray(left, dtype=float).T)
    ra, rb, rc, rd = (v[None, :] for v in np.asarray(right, dtype=float).T)
    return np.stack([la * ra + lb * rc, la * rb + lb * rd,
                     lc * ra + ld * rc, lc * rb + ld * rd], axis=-1).reshape(-1, 4)


def cayley(z):
    """Disk coordinate (z - i)/(z + i); sends i to 0."""
    z = np.asarray(z, dtype=complex)
    return (z - 1j) / (z + 1j)


def hyperbolic_distance(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    arg = 1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return np.arccosh(np.maximum(arg, 1.0))


def hyperbolic_barycenter(points, weights=None):
    """Weighted barycenter of points of C+ taken in the hyperboloid model."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    w = np.ones(z.shape) if weights is None else np.asarray(weights, dtype=float)
    if z.size == 0 or not np.sum(w) > 0:
        raise DomainError("barycenter needs at least one point with positive weight")
    x, y, r2 = z.real, z.imag, np.abs(z) ** 2
    h0 = np.sum(w * (r2 + 1.0) / (2.0 * y))
    h1 = np.sum(w * x / y)
    h2 = np.sum(w * (r2 - 1.0) / (2.0 * y))
    norm = math.sqrt(max(h0 * h0 - h1 * h1 - h2 * h2, np.finfo(float).tiny))
    h0, h1, h2 = h0 / norm, h1 / norm, h2 / norm
    height = 1.0 / (h0 - h2)
    return complex(h1 * height, height)


def geodesic_frame(z1, z2):
    """Isometry g and distance D with g(i e^{-D/2}) = z1 and g(i e^{D/2}) = z2."""
    z1, z2 = complex(z1), complex(z2)
    h1 = affine_embed(z1.imag, z1.real)
    w = complex(mobius_array(inverse(h1), z2))
    c = complex(cayley(w))
    radius = min(abs(c), 1.0 - 1e-16)
    dist = 2.0 * math.atanh(radius)
    theta = 0.5 * math.atan2(c.imag, c.real) if radius > 0 else 0.0
    g = compose(compose(h1, rotation(theta)), affine_embed(math.exp(dist / 2.0), 0.0))
    return g, dist


# ─── QUADRATURE RULES ──────────────────────────────────────────────────────────
@lru_cache(maxsize=64)
def _leggauss(nodes):
    return np.polynomial.legendre.leggauss(nodes)


def composite_gauss(lo, hi, panels, nodes):
    """Composite Gauss-Legendre nodes/weights on [lo, hi] with equal panels."""
    if panels < 1 or nodes < 1:
        raise DomainError("composite Gauss rule needs panels >= 1 and nodes >= 1")
    x, w = _leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def graded_gauss(edges, nodes):
    """Gauss-Legendre on arbitrary consecutive panels given by their edges."""
    x, w = _leggauss(nodes)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def trapezoid_nodes(lo, hi, count):
    if count < 2:
        raise DomainError(f"trapezoid rule needs at least 2 nodes, got {count}")
    pts = np.linspace(lo, hi, count)
    h = (hi - lo) / (count - 1)
    wts = np.full(count, h)
    wts[0] = wts[-1] = 0.5 * h
    return pts, wts


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Tensor grid over C+ for the hyperbolic measure da db / a^2.

    Scales are log-spaced over [a_min, a_max] (trapezoid in s = log a). Shifts
    are either uniform in b over [-half_width, half_width] ("uniform") or
    b = a sinh(v) with v uniform over [-half_width, half_width] ("sinh").
    """
    a_min: float = math.exp(-12.0)
    a_max: float = math.exp(12.0)
    n_a: int = 61
    half_width: float = 12.0
    n_b: int = 61
    shift_map: str = "sinh"

    def __post_init__(self):
        if not self.a_min > 0 or not self.a_max > self.a_min:
            raise DomainError(f"need 0 < a_min < a_max, got {self.a_min}, {self.a_max}")
        if self.n_a < 2 or self.n_b < 2:
            raise DomainError("all node counts must be >= 2")
        if not self.half_width > 0:
            raise DomainError("shift half width must be positive")
        if self.shift_map not in ("uniform", "sinh"):
            raise DomainError(f"unknown shift map {self.shift_map!r}")

    def refined(self, factor=2):
        """Same box, node spacing divided by factor."""
        return type(self)(**{**self.__dict__,
                             "n_a": (self.n_a - 1) * factor + 1,
                             "n_b": (self.n_b - 1) * factor + 1})

    def plane_nodes(self):
        """Flattened (z, weight) arrays; weights integrate against da db / a^2."""
        return _plane_nodes(self)


@lru_cache(maxsize=32)
def _plane_nodes(grid):
    s, ws = trapezoid_nodes(math.log(grid.a_min), math.log(grid.a_max), grid.n_a)
    u, wu = trapezoid_nodes(-grid.half_width, grid.half_width, grid.n_b)
    a = np.exp(s)[:, None]
    if grid.shift_map == "uniform":
        b = np.broadcast_to(u[None, :], (grid.n_a, grid.n_b))
        wts = ws[:, None] * wu[None, :] / a
    else:
        b = a * np.sinh(u)[None, :]
        wts = np.broadcast_to(ws[:, None] * (wu * np.cosh(u))[None, :], (grid.n_a, grid.n_b))
    z = (b + 1j * a).ravel()
    wts = np.array(wts).ravel()
    z.flags.writeable = False
    wts.flags.writeable = False
    return z, wts


@dataclass(frozen=True)
class HaarQuadratureSpec(HalfPlaneGrid):
    """HalfPlaneGrid plus n_theta uniform angles in [0, pi) of mass 1/n_theta."""
    n_theta: int = 4

    def __post_init__(self):
        super().__post_init__()
        if self.n_theta < 2:
            raise DomainError("all node counts must be >= 2")

    def haar_nodes(self):
        """NAK node arrays (a, b, theta) and weights for dmu_G."""
        z, wz = self.plane_nodes()
        theta = math.pi * np.arange(self.n_theta) / self.n_theta
        a = np.repeat(z.imag, self.n_theta)
        b = np.repeat(z.real, self.n_theta)
        th = np.tile(theta, z.size)
        wts = np.repeat(wz, self.n_theta) / self.n_theta
        return a, b, th, wts


def plane_integrate(f, grid):
    """Integrate a vectorized f(z) over C+ against da db / a^2."""
    z, w = grid.plane_nodes()
    values = np.asarray(f(z))
    _check_finite(values, z)
    return _collapse(np.sum(values * w))


def haar_integrate(f, spec, vectorized=False):
    """Integrate f: GroupElement -> scalar over PSL(2,R) against dmu_G.

    With vectorized=True, f is called once as f(a, b, theta) on the NAK node
    arrays of m = m_{a,b} r_theta instead of once per GroupElement.
    """
    a, b, th, w = spec.haar_nodes()
    if vectorized:
        values = np.asarray(f(a, b, th))
        bad = ~np.isfinite(values)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise NumericError("non-finite integrand in haar_integrate",
                               node=(float(a[k]), float(b[k]), float(th[k])), value=values[k])
        return _collapse(np.sum(values * w))
    total = 0.0 + 0.0j
    for idx in range(a.size):
        m = compose(affine_embed(a[idx], b[idx]), rotation(th[idx]))
        value = f(m)
        if not np.isfinite(value):
            raise NumericError("non-finite integrand in haar_integrate",
                               node=(float(a[idx]), float(b[idx]), float(th[idx])), value=value)
        total += w[idx] * value
    return _collapse(total)


@dataclass(frozen=True)
class GeodesicDiskGrid:
    """Geodesic polar nodes on the disk of hyperbolic radius `radius` about i.

    Radii are composite Gauss-Legendre in r; the ring at radius r carries
    about 2 pi sinh(r) / arc_step equally spaced angles (alternate rings
    offset by half a step), so cells keep a hyperbolic size near arc_step
    out to the rim. Weights integrate against da db / a^2 = sinh r dr dphi.
    """
    radius: float = 5.5
    panels: int = 11
    nodes: int = 3
    arc_step: float = 0.6
    min_angles: int = 8

    def __post_init__(self):
        if not self.radius > 0 or not self.arc_step > 0:
            raise DomainError(f"need positive radius and arc step, got {self.radius}, {self.arc_step}")
        if self.panels < 1 or self.nodes < 1 or self.min_angles < 2:
            raise DomainError("disk grid needs panels, nodes >= 1 and min_angles >= 2")

    def refined(self, factor=2):
        """Same disk, radial panels and arc spacing divided by factor."""
        return type(self)(self.radius, self.panels * factor, self.nodes,
                          self.arc_step / factor, self.min_angles)

    def disk_nodes(self):
        """Flattened (z, weight, r) arrays, r the hyperbolic distance from i."""
        return _disk_nodes(self)


@lru_cache(maxsize=8)
def _disk_nodes(grid):
    radii, wr = composite_gauss(0.0, grid.radius, grid.panels, grid.nodes)
    z_parts, w_parts, r_parts = [], [], []
    for k, (r, weight) in enumerate(zip(radii, wr)):
        count = max(grid.min_angles, math.ceil(2.0 * math.pi * math.sinh(r) / grid.arc_step))
        phi = 2.0 * math.pi * (np.arange(count) + 0.5 * (k % 2)) / count
        disk = math.tanh(0.5 * r) * np.exp(1j * phi)
        z_parts.append(1j * (1.0 + disk) / (1.0 - disk))
        w_parts.append(np.full(count, weight * math.sinh(r) * 2.0 * math.pi / count))
        r_parts.append(np.full(count, r))
    z, wts, dist = np.concatenate(z_parts), np.concatenate(w_parts), np.concatenate(r_parts)
    for arr in (z, wts, dist):
        arr.flags.writeable = False
    logger.debug("geodesic disk grid: %d nodes out to r=%g", z.size, grid.radius)
    return z, wts, dist


# ─── VERTICAL REGIONS ──────────────────────────────────────────────────────────
@dataclass(frozen=True)
class PanelRule:
    """Composite Gauss-Legendre: x panels, and panels in t = 1/y."""
    x_panels: int = 16
    y_panels: int = 4
    nodes: int = 16

    def refined(self, factor=2):
        return PanelRule(self.x_panels * factor, self.y_panels * factor, self.nodes)


@dataclass(frozen=True)
class VerticalRegion:
    """{x_min <= x <= x_max, floor(x) <= y <= ceiling}; floor > 0 required."""
    x_min: float
    x_max: float
    floor: Union[float, Callable] = 1.0
    ceiling: float = 10.0

    def floor_at(self, x):
        if callable(self.floor):
            return np.asarray(self.floor(x), dtype=float)
        return np.full_like(np.asarray(x, dtype=float), float(self.floor))

    def nodes(self, rule):
        xs, wx = composite_gauss(self.x_min, self.x_max, rule.x_panels, rule.nodes)
        lo = self.floor_at(xs)
        if np.any(lo <= 0) or not np.all(np.isfinite(lo)):
            raise DomainError("vertical region floor must stay positive")
        t_ref, w_ref = composite_gauss(0.0, 1.0, rule.y_panels, rule.nodes)
        t_lo = 1.0 / self.ceiling
        t_hi = 1.0 / np.minimum(lo, self.ceiling)
        span = (t_hi - t_lo)[:, None]
        t = t_lo + span * t_ref[None, :]
        wts = wx[:, None] * span * w_ref[None, :]
        z = xs[:, None] + 1j / t
        return z.ravel(), wts.ravel()


def hyperbolic_integrate(f, region, rule=None):
    """Integrate a vectorized f(z) over a vertical region against dx dy / y^2."""
    rule = rule or PanelRule()
    z, w = region.nodes(rule)
    values = np.asarray(f(z))
    _check_finite(values, z)
    return _collapse(np.sum(values * w))


def _check_finite(values, z):
    bad = ~np.isfinite(values)
    if np.any(bad):
        first = int(np.flatnonzero(bad.ravel())[0])
        raise NumericError("non-finite integrand value", node=complex(np.ravel(z)[first]))


def _collapse(total):
    total = complex(total)
    if total.imag == 0.0:
        return total.real
    return total

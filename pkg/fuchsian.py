#!/usr/bin/env python3
"""
fuchsian.py

Fuchsian lattices given by generator lists: the modular group PSL(2,Z) and the
Hecke groups G_q generated by S = (0 -1; 1 0) and T = (1 lambda; 0 1),
lambda = 2 cos(pi / q). Provides word balls, the standard fundamental domain
{|x| <= lambda/2, |z| >= 1} with a fixed boundary tie-break, the reduction map
into it, covolumes, and tile bookkeeping for point sets and vertical regions.

Words are tuples of (generator, exponent) tokens; "S T^-1" means S @ T^-1.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from errors import DomainError, NumericError
from halfplane import (IDENTITY, ElementIndex, GroupElement, PanelRule, PointH, VerticalRegion,
                       compose, element_entries, hyperbolic_integrate, inverse, mobius_array)

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
DEFAULT_CUSP_HEIGHT = 10.0
MAX_REDUCTION_STEPS = 10_000
ARC_TOL             = 1e-12   # |z|^2 within this of 1 counts as on the arc
BOUNDARY_TOL        = 1e-6    # points this close to a side of the domain are ambiguous
DEFAULT_RULE        = PanelRule()

S_MATRIX = GroupElement(0.0, -1.0, 1.0, 0.0)


# ─── WORDS ─────────────────────────────────────────────────────────────────────
Word = Tuple[Tuple[str, int], ...]


def append_token(word, token):
    """word followed by token, merging powers of the same generator (S^2 = 1)."""
    base, exp = token
    if word and word[-1][0] == base:
        exp += word[-1][1]
        word = word[:-1]
    if base == "S":
        exp %= 2
    if exp == 0:
        return word
    return word + ((base, exp),)


def format_word(word):
    if not word:
        return "I"
    return " ".join(base if exp == 1 else f"{base}^{exp}" for base, exp in word)


def word_length(word):
    return sum(abs(exp) for _, exp in word)


# ─── GROUPS ────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class FundamentalDomain:
    """{-h <= x < h, |z| >= 1} with the arc tie-break x <= 0; Y truncates the cusp."""
    half_width: float = 0.5
    cusp_height: float = DEFAULT_CUSP_HEIGHT

    def __post_init__(self):
        if not 0 < self.half_width < 1:
            raise DomainError(f"domain half width must lie in (0, 1), got {self.half_width!r}")
        if not self.cusp_height > 1:
            raise DomainError(f"cusp height must exceed 1, got {self.cusp_height!r}")

    def arc(self, x):
        return np.sqrt(1.0 - np.asarray(x, dtype=float) ** 2)

    def region(self):
        """The cusp-truncated domain as a vertical region (floor on the unit circle)."""
        return VerticalRegion(-self.half_width, self.half_width, self.arc, self.cusp_height)

    def contains(self, z):
        return in_domain(z, self)


@dataclass(frozen=True)
class FuchsianGroup:
    name: str
    generators: Tuple[GroupElement, ...]
    labels: Tuple[Tuple[str, int], ...]
    translation: float
    q: Optional[int] = None

    def __post_init__(self):
        if not self.generators:
            raise DomainError("a Fuchsian group needs at least one generator")
        if len(self.labels) != len(self.generators):
            raise DomainError("every generator needs a word token")
        for g in self.generators:
            if not any(inverse(g).isclose(h) for h in self.generators):
                raise DomainError(f"generator list of {self.name} is not closed under inverses")

    def domain(self, cusp_height=DEFAULT_CUSP_HEIGHT):
        return FundamentalDomain(self.translation / 2.0, cusp_height)

    def translate(self, k):
        return GroupElement(1.0, k * self.translation, 0.0, 1.0)

    def element(self, word):
        """Evaluate a token word to its group element."""
        m = IDENTITY
        for base, exp in word:
            m = compose(m, S_MATRIX if base == "S" else self.translate(exp))
        return m


def hecke_group(q):
    if int(q) != q or q < 3:
        raise DomainError(f"Hecke groups need an integer q >= 3, got q={q!r}")
    q = int(q)
    lam = 2.0 * math.cos(math.pi / q)
    if q == 3:
        lam = 1.0
    t = GroupElement(1.0, lam, 0.0, 1.0)
    return FuchsianGroup(name="modular" if q == 3 else f"hecke:{q}",
                         generators=(S_MATRIX, t, inverse(t)),
                         labels=(("S", 1), ("T", 1), ("T", -1)),
                         translation=lam, q=q)


def modular_group():
    """PSL(2,Z) = G_3."""
    return hecke_group(3)


def group_from_name(name, q=None):
    """'modular', 'hecke' (with q) or 'hecke:q'."""
    key = str(name).strip().lower()
    if key == "modular":
        return modular_group()
    if key.startswith("hecke"):
        _, _, tail = key.partition(":")
        if tail:
            try:
                q = int(tail)
            except ValueError:
                raise DomainError(f"bad Hecke index in {name!r}")
        if q is None:
            raise DomainError("a Hecke group needs q")
        return hecke_group(q)
    raise DomainError(f"unknown group {name!r}; expected modular or hecke:q")


# ─── WORD BALLS ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class WordBall:
    radius: int
    elements: Tuple[GroupElement, ...]
    words: Tuple[Word, ...]
    _index: ElementIndex = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = ElementIndex()
        for k, m in enumerate(self.elements):
            index.add(m, k)
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def lengths(self):
        return tuple(word_length(w) for w in self.words)

    def lookup(self, element):
        return self._index.get(element)

    def entries(self):
        return element_entries(self.elements)

    def to_frame(self):
        rows = [{"word": format_word(w), "length": word_length(w),
                 "a": m.a, "b": m.b, "c": m.c, "d": m.d}
                for m, w in zip(self.elements, self.words)]
        return pd.DataFrame(rows, columns=["word", "length", "a", "b", "c", "d"])


def enumerate_ball(group, radius):
    """All elements with word length <= radius, breadth first, deduplicated."""
    if int(radius) != radius or radius < 0:
        raise DomainError(f"ball radius must be an integer >= 0, got {radius!r}")
    elements = [IDENTITY]
    words = [()]
    seen = ElementIndex()
    seen.add(IDENTITY, 0)
    frontier = deque([0])
    for level in range(1, int(radius) + 1):
        logger.info("Processing ball level %d/%d (%d elements so far)", level, radius, len(elements))
        next_frontier = deque()
        for idx in frontier:
            for gen, token in zip(group.generators, group.labels):
                m = compose(elements[idx], gen)
                if m in seen:
                    continue
                seen.add(m, len(elements))
                elements.append(m)
                words.append(append_token(words[idx], token))
                next_frontier.append(len(elements) - 1)
        frontier = next_frontier
    logger.info("Ball of radius %d in %s has %d elements", radius, group.name, len(elements))
    return WordBall(int(radius), tuple(elements), tuple(words))


# ─── DOMAIN MEMBERSHIP AND REDUCTION ───────────────────────────────────────────
def _as_complex(z):
    return z.z if isinstance(z, PointH) else complex(z)


def in_domain(z, domain):
    z = _as_complex(z)
    h = domain.half_width
    if not -h <= z.real < h:
        return False
    r2 = z.real * z.real + z.imag * z.imag
    if r2 < 1.0 - ARC_TOL:
        return False
    if abs(r2 - 1.0) <= ARC_TOL:
        return z.real <= 0.0
    return True


class Reduction(NamedTuple):
    element: GroupElement
    point: PointH
    word: Word


def _strip_index(x, h, lam):
    """k with x - k lam in [-h, h), corrected for rounding at the edges."""
    k = math.floor((x + h) / lam)
    if x - k * lam >= h:
        k += 1
    elif x - k * lam < -h:
        k -= 1
    return k


def reduce_to_domain(z, group):
    """(gamma, z0, word) with z = gamma . z0 and z0 in the fundamental domain."""
    domain = group.domain()
    h, lam = domain.half_width, group.translation
    w = _as_complex(z)
    if not w.imag > 0:
        raise DomainError(f"points of C+ need y > 0, got {w!r}")
    gamma, word = IDENTITY, ()
    for _ in range(MAX_REDUCTION_STEPS):
        k = _strip_index(w.real, h, lam)
        if k:
            w = complex(w.real - k * lam, w.imag)
            gamma = compose(gamma, group.translate(k))
            word = append_token(word, ("T", k))
        r2 = w.real * w.real + w.imag * w.imag
        if r2 < 1.0 - ARC_TOL or (abs(r2 - 1.0) <= ARC_TOL and w.real > 0.0):
            w = complex(-w.real / r2, w.imag / r2)
            gamma = compose(gamma, S_MATRIX)
            word = append_token(word, ("S", 1))
            continue
        logger.debug("reduced %r to %r by %s", z, w, format_word(word))
        return Reduction(gamma, PointH(w.real, w.imag), word)
    raise NumericError("reduction did not reach the fundamental domain",
                       iterations=MAX_REDUCTION_STEPS, point=_as_complex(z), last=w)


def boundary_gap(z, domain):
    """Euclidean distance-like gap from z to the sides and the arc of the domain."""
    z = _as_complex(z)
    h = domain.half_width
    return min(abs(z.real + h), abs(z.real - h), abs(abs(z) - 1.0))


# ─── COVOLUME AND TILES ────────────────────────────────────────────────────────
def covolume(domain, rule=None):
    """Hyperbolic area of the domain: truncated quadrature plus the cusp tail 2h / Y."""
    rule = rule or DEFAULT_RULE
    body = hyperbolic_integrate(lambda z: np.ones(z.shape), domain.region(), rule)
    return float(body) + 2.0 * domain.half_width / domain.cusp_height


def domain_boundary(domain, samples=64):
    """Polyline of the truncated domain boundary: left side, arc, right side."""
    h, top = domain.half_width, domain.cusp_height
    corner = math.sqrt(1.0 - h * h)
    left = np.array([complex(-h, top), complex(-h, corner)])
    angles = np.linspace(math.pi - math.acos(h), math.acos(h), samples)
    arc = np.exp(1j * angles)
    right = np.array([complex(h, corner), complex(h, top)])
    return np.concatenate([left, arc[1:-1], right])


@dataclass
class TileHistogram:
    counts: Dict[str, int]
    elements: Dict[str, GroupElement]
    flagged: List[complex]
    outside_ball: int = 0
    words: Dict[str, Word] = field(default_factory=dict)

    @property
    def total(self):
        return sum(self.counts.values())

    def count_for(self, element):
        for word, m in self.elements.items():
            if m.isclose(element):
                return self.counts[word]
        return 0

    def to_frame(self):
        rows = [{"word": w, "count": c, "length": word_length(self.words.get(w, ()))}
                for w, c in self.counts.items()]
        frame = pd.DataFrame(rows, columns=["word", "count", "length"])
        return frame.sort_values(["count", "word"], ascending=[False, True]).reset_index(drop=True)


def tile_histogram(points, group, ball=None, tol=BOUNDARY_TOL):
    """Count points per tile gamma . Omega; boundary-ambiguous points are flagged."""
    domain = group.domain()
    counts, elements, words, flagged = {}, {}, {}, []
    outside = 0
    points = list(points)
    for z in points:
        gamma, z0, word = reduce_to_domain(z, group)
        if boundary_gap(z0, domain) < tol:
            flagged.append(_as_complex(z))
            continue
        if ball is not None and ball.lookup(gamma) is None:
            outside += 1
        label = format_word(word)
        counts[label] = counts.get(label, 0) + 1
        elements.setdefault(label, gamma)
        words.setdefault(label, word)
    logger.info("Assigned %d of %d points to %d tiles (%d flagged)",
                sum(counts.values()), len(points), len(counts), len(flagged))
    return TileHistogram(counts, elements, flagged, outside, words)


def tile_measures(region, group, rule=None):
    """Hyperbolic measure of each tile gamma . Omega inside `region`.

    Every quadrature node of the region is reduced and its weight booked to
    the tile it lands in, so the measures sum to the region's measure.
    """
    rule = rule or DEFAULT_RULE
    z, w = region.nodes(rule)
    words = [format_word(reduce_to_domain(zk, group).word) for zk in z]
    frame = pd.DataFrame({"word": words, "measure": w})
    return (frame.groupby("word", as_index=False)["measure"].sum()
            .sort_values("measure", ascending=False).reset_index(drop=True))


def tile_images(ball, domain, samples=64):
    """Boundary polylines of gamma . Omega for every gamma in the ball."""
    outline = domain_boundary(domain, samples)
    return [(format_word(w), mobius_array(m, outline)) for m, w in zip(ball.elements, ball.words)]

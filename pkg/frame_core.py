#!/usr/bin/env python3
"""
frame_core.py

Finite-dimensional frame algebra: Gram matrices, frame operators, frame and
Riesz bounds as extremal eigenvalues, canonical tight and dual frames, the
Riesz-to-orthonormal reduction, orbit systems of finite projective
representations, and the finite Weyl-Heisenberg group on C^N used for density
experiments (orbit cardinality K against the dimension N).

Vectors are rows of a complex (count, dimension) array; <x, y> = sum x conj(y).
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from errors import DomainError, NotAFrameError

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
EIGEN_FLOOR   = 1e-12     # relative; smaller eigenvalues count as 0
UNITARY_TOL   = 1e-12
COCYCLE_TOL   = 1e-12
NAMED_SELECTIONS = ("full", "translations", "modulations", "trivial")


# ─── TYPES ─────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class VectorSystem:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DomainError(f"a vector system needs shape (count >= 1, dimension >= 1), got {v.shape}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def count(self):
        return self.vectors.shape[0]

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def synthesis(self):
        """d x N matrix with the vectors as columns."""
        return self.vectors.T

    def extended(self, extra):
        return VectorSystem(np.vstack([self.vectors, np.atleast_2d(extra)]))


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.upper < self.lower:
            raise DomainError(f"frame bounds need 0 <= A <= B, got ({self.lower}, {self.upper})")

    @property
    def positive(self):
        return self.lower > 0

    @property
    def tight(self):
        return math.isclose(self.lower, self.upper, rel_tol=1e-10, abs_tol=1e-14)

    def as_dict(self):
        return {"A": self.lower, "B": self.upper}


# ─── SPECTRA ───────────────────────────────────────────────────────────────────
def gram(sys):
    """G[i, j] = <v_j, v_i>."""
    v = sys.vectors
    return np.conj(v) @ v.T


def frame_operator(sys):
    """S = sum_i v_i v_i^*."""
    v = sys.synthesis()
    return v @ np.conj(v).T


def _extremal(matrix):
    eig = np.linalg.eigh(matrix)[0]
    top = max(float(eig[-1]), 0.0)
    low = float(eig[0])
    if low <= EIGEN_FLOOR * max(top, 1.0):
        low = 0.0
    return FrameBounds(low, top)


def frame_bounds(sys):
    return _extremal(frame_operator(sys))


def riesz_bounds(sys):
    return _extremal(gram(sys))


def _spectral_power(matrix, power, restrict=False):
    """matrix^power for Hermitian PSD input; with restrict, on the range only."""
    eig, vec = np.linalg.eigh(matrix)
    floor = EIGEN_FLOOR * max(float(eig[-1]), 1.0)
    keep = eig > floor
    if not restrict and not np.all(keep):
        raise NotAFrameError(f"frame operator is singular (smallest eigenvalue {eig[0]:.3e})")
    vec = vec[:, keep]
    return (vec * eig[keep] ** power) @ np.conj(vec).T


def canonical_tight(sys):
    """{S^(-1/2) v_i}: a Parseval frame for the span of a frame."""
    root = _spectral_power(frame_operator(sys), -0.5)
    return VectorSystem((root @ sys.synthesis()).T)


def dual_frame(sys):
    """Canonical dual {S^-1 v_i}."""
    inv = _spectral_power(frame_operator(sys), -1.0)
    return VectorSystem((inv @ sys.synthesis()).T)


def riesz_orthonormalize(sys):
    """S^(-1/2) on the span of a Riesz sequence: an orthonormal sequence."""
    if not riesz_bounds(sys).positive:
        raise DomainError("system is not a Riesz sequence (Gram matrix is singular)")
    root = _spectral_power(frame_operator(sys), -0.5, restrict=True)
    return VectorSystem((root @ sys.synthesis()).T)


# ─── PROJECTIVE REPRESENTATIONS ────────────────────────────────────────────────
@dataclass(frozen=True)
class FiniteProjectiveRep:
    """U_g U_h = sigma(g, h) U_{gh}; `table[g, h]` is the index of gh."""
    labels: Tuple[tuple, ...]
    unitaries: np.ndarray
    table: np.ndarray
    cocycle: np.ndarray

    def __post_init__(self):
        if self.unitarity_residual() > UNITARY_TOL:
            raise DomainError("representing matrices are not unitary")
        if self.cocycle_residual() > COCYCLE_TOL:
            raise DomainError("cocycle table is inconsistent with the representing matrices")

    @property
    def order(self):
        return len(self.labels)

    @property
    def dimension(self):
        return self.unitaries.shape[1]

    def unitarity_residual(self):
        eye = np.eye(self.dimension)
        return max(float(np.max(np.abs(np.conj(u).T @ u - eye))) for u in self.unitaries)

    def cocycle_residual(self):
        """max |U_g U_h - sigma U_gh| and the associativity defect of sigma."""
        u, t, s = self.unitaries, self.table, self.cocycle
        product = np.einsum("gij,hjk->ghik", u, u)
        law = float(np.max(np.abs(product - s[:, :, None, None] * u[t])))
        g, h, k = np.meshgrid(*(np.arange(self.order),) * 3, indexing="ij")
        assoc = float(np.max(np.abs(s[g, h] * s[t[g, h], k] - s[h, k] * s[g, t[h, k]])))
        return max(law, assoc)

    def index(self, label):
        return self.labels.index(tuple(label))

    def subset(self, indices):
        """The restriction to `indices`, which must be closed under the product."""
        indices = sorted(set(int(i) for i in indices))
        if not indices:
            raise DomainError("subgroup selection is empty")
        members = set(indices)
        for g in indices:
            for h in indices:
                if int(self.table[g, h]) not in members:
                    raise DomainError(f"selection is not closed under the group law: "
                                      f"{self.labels[g]} * {self.labels[h]} leaves it")
        pos = {g: k for k, g in enumerate(indices)}
        sub = np.ix_(indices, indices)
        table = np.vectorize(pos.get)(self.table[sub])
        return FiniteProjectiveRep(tuple(self.labels[g] for g in indices),
                                   self.unitaries[indices], table, self.cocycle[sub])


def orbit_system(rep, F):
    F = np.asarray(F, dtype=complex).ravel()
    if F.size != rep.dimension:
        raise DomainError(f"vector length {F.size} does not match dimension {rep.dimension}")
    return VectorSystem(rep.unitaries @ F)


def commutation_residual(rep, sys):
    """max_g ||S U_g - U_g S|| (entrywise max) for the frame operator of sys."""
    s = frame_operator(sys)
    return max(float(np.max(np.abs(s @ u - u @ s))) for u in rep.unitaries)


def finite_weyl_heisenberg(N):
    """pi(k, l) = M_l T_k on C^N, with (T_k x)_j = x_{j-k}, (M_l x)_j = e^(2 pi i l j / N) x_j.

    pi(k, l) pi(k', l') = e^(-2 pi i k l' / N) pi(k + k', l + l').
    """
    if int(N) != N or N < 2:
        raise DomainError(f"finite Weyl-Heisenberg group needs N >= 2, got {N!r}")
    N = int(N)
    labels = tuple((k, l) for k in range(N) for l in range(N))
    j = np.arange(N)
    eye = np.eye(N)
    unitaries = np.empty((N * N, N, N), dtype=complex)
    for idx, (k, l) in enumerate(labels):
        shift = np.roll(eye, k, axis=0)
        unitaries[idx] = np.exp(2j * np.pi * l * j / N)[:, None] * shift
    kk = np.array([k for k, _ in labels])
    ll = np.array([l for _, l in labels])
    table = ((kk[:, None] + kk[None, :]) % N) * N + (ll[:, None] + ll[None, :]) % N
    cocycle = np.exp(-2j * np.pi * kk[:, None] * ll[None, :] / N)
    return FiniteProjectiveRep(labels, unitaries, table, cocycle)


# ─── DENSITY ANALOG ────────────────────────────────────────────────────────────
def selection_indices(rep, N, selection):
    """Indices of a named subgroup of Z_N x Z_N, 'lattice:p,q', or explicit (k, l) pairs."""
    if isinstance(selection, str):
        key = selection.strip().lower()
        if key == "full":
            pairs = rep.labels
        elif key == "translations":
            pairs = [(k, 0) for k in range(N)]
        elif key == "modulations":
            pairs = [(0, l) for l in range(N)]
        elif key == "trivial":
            pairs = [(0, 0)]
        elif key.startswith("lattice:"):
            try:
                p, q = (int(v) for v in key.split(":", 1)[1].split(","))
            except ValueError:
                raise DomainError(f"lattice selection must read lattice:p,q, got {selection!r}")
            if not (1 <= p <= N and 1 <= q <= N):
                raise DomainError(f"lattice steps must lie in 1..{N}, got {p}, {q}")
            pairs = [((p * a) % N, (q * b) % N) for a in range(N) for b in range(N)]
        else:
            raise DomainError(f"unknown subgroup selection {selection!r}; expected one of "
                              f"{', '.join(NAMED_SELECTIONS)} or lattice:p,q")
    else:
        pairs = [tuple(int(v) % N for v in pair) for pair in selection]
    return sorted({rep.index(pair) for pair in pairs})


def selection_for_size(N, K):
    """A subgroup selection of order K: the named ones first, then lattices."""
    if K == N * N:
        return "full"
    if K == N:
        return "translations"
    if K == 1:
        return "trivial"
    for p in range(1, N + 1):
        for q in range(1, N + 1):
            if N % p == 0 and N % q == 0 and (N // p) * (N // q) == K:
                return f"lattice:{p},{q}"
    raise DomainError(f"no subgroup of Z_{N} x Z_{N} of order {K}")


class AnalogReport(NamedTuple):
    N: int
    K: int
    selection: str
    frame_bounds: FrameBounds
    riesz_bounds: FrameBounds
    is_frame: bool
    is_riesz: bool
    density_ratio: float
    commutation: float
    consistent: bool

    def as_dict(self):
        return {"N": self.N, "K": self.K, "selection": self.selection,
                "frame_bounds": self.frame_bounds.as_dict(),
                "riesz_bounds": self.riesz_bounds.as_dict(),
                "is_frame": self.is_frame, "is_riesz": self.is_riesz,
                "density_ratio": self.density_ratio, "commutation": self.commutation,
                "consistent": self.consistent}


def generic_window(N, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=N) + 1j * rng.normal(size=N)


def density_analog_experiment(N, selection="full", F=None, seed=0):
    """Frame / Riesz bounds of the orbit of F under a subgroup of order K.

    The finite shadow of the density theorem: a frame needs K >= N, a Riesz
    sequence needs K <= N; `density_ratio` = N / K plays covolume x dimension.
    """
    rep = finite_weyl_heisenberg(N)
    indices = selection_indices(rep, int(N), selection)
    sub = rep.subset(indices)
    F = generic_window(int(N), seed) if F is None else np.asarray(F, dtype=complex)
    sys = orbit_system(sub, F)
    fb, rb = frame_bounds(sys), riesz_bounds(sys)
    K = sub.order
    consistent = (not fb.positive or K >= N) and (not rb.positive or K <= N)
    logger.info("Finite analog N=%d K=%d (%s): A=%.6g B=%.6g riesz A=%.6g",
                N, K, selection, fb.lower, fb.upper, rb.lower)
    label = selection if isinstance(selection, str) else "explicit"
    return AnalogReport(int(N), K, label, fb, rb, fb.positive, rb.positive,
                        N / K, commutation_residual(sub, sys), consistent)

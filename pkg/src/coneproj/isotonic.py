"""Certifying and refuting order-isotonicity of cone projections.

Given cones K and L, the question is whether x <=_L y implies
P_K x <=_L P_K y.  Structural certifiers implement the necessary
conditions (subduality, containment K within L within K*, sign-flip
feasibility on the generator Gram matrix, the orthant-isotone facet
pattern); a seeded randomized falsifier searches for concrete
counterexample pairs.  Refutations always come with an independently
re-checkable certificate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .cones import (
    DimensionMismatchError,
    Lorentz,
    MonotoneNonneg,
    Orthant,
    PolyhedralH,
    SignedOrthant,
    Simplicial,
    UnsupportedConeError,
    cone_margin,
    dim_of,
    dual,
    facet_normals,
    generator_matrix,
    gram,
    is_proper,
    membership,
    monotone_generators,
)
from .kernels import IndeterminateError, lp_feasible
from .projections import project

DEFAULT_TOL = 1e-9


class SamplingError(RuntimeError):
    """Rejection sampling of order directions failed to produce points."""


@dataclass(frozen=True)
class SubdualWitness:
    """Sign vector making the reflected cone subdual, with its index split."""

    epsilon: np.ndarray
    index_set: frozenset  # indices carrying +1


@dataclass(frozen=True)
class Obstruction:
    """Cycle of generator indices whose Gram signs admit no two-sided split.

    The cycle has an odd number of negative Gram edges; the minimal case is
    a triangle of pairwise-negative inner products.
    """

    cycle: tuple


@dataclass(frozen=True)
class ContainmentReport:
    k_in_l: bool
    l_in_k_dual: bool
    k_subdual: bool
    interior_kdual_l: bool
    interior_kdual_ldual: bool

    @property
    def refuted(self):
        """Necessary conditions violated while an interior condition holds."""
        applicable = self.interior_kdual_l or self.interior_kdual_ldual
        return applicable and not (self.k_in_l and self.l_in_k_dual and self.k_subdual)

    @property
    def inconclusive(self):
        return not self.refuted


@dataclass(frozen=True)
class Counterexample:
    """Ordered pair whose projections violate the ordering."""

    x: np.ndarray
    y: np.ndarray
    px: np.ndarray
    py: np.ndarray
    violation: np.ndarray  # py - px, outside L
    margin: float
    trial: int = 0


@dataclass(frozen=True)
class OrthantIsotoneReport:
    isotone: bool
    offending_normal: np.ndarray | None
    facet_count: int


@dataclass(frozen=True)
class FalsifierConfig:
    trials: int = 10_000
    seed: int = 42
    tol: float = DEFAULT_TOL
    scale: float = 10.0

    def __post_init__(self):
        if self.trials < 1 or self.tol <= 0 or self.scale <= 0:
            raise ValueError("invalid falsifier configuration")


Certificate = SubdualWitness | Obstruction | ContainmentReport | Counterexample


def leq(L, x, y, tol=DEFAULT_TOL):
    """Order test x <=_L y, i.e. y - x in L."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatchError("x and y dimensions disagree")
    return membership(L, y - x, tol)


def hyperplane_isotone(K, u, tol=DEFAULT_TOL):
    """True iff projection onto the hyperplane through 0 with normal u maps K into K.

    Checked on the generators, which suffices by linearity and convexity.
    Hyperplanes with nonzero anchor reduce to the same test because the
    ordering is translation invariant.
    """
    u = np.asarray(u, dtype=float)
    nu = float(np.linalg.norm(u))
    if abs(nu - 1.0) > 1e-9:
        raise ValueError("u must be unit length")
    V = generator_matrix(K)
    W = V - np.outer(u, u @ V)
    return all(membership(K, W[:, j], tol) for j in range(V.shape[1]))


def check_subdual(K, tol=DEFAULT_TOL):
    """True iff every pairwise generator inner product is >= -tol (K within K*)."""
    return float(np.min(gram(K))) >= -tol


def sign_flip_search_gram(G, tol=DEFAULT_TOL):
    """Two-sided index split compatible with the Gram sign pattern, or an odd cycle.

    Edges: G_ij > tol forces i, j onto the same side; G_ij < -tol onto
    opposite sides.  Breadth-first 2-coloring with parity either yields the
    split (SubdualWitness) or an odd cycle of constraints (Obstruction).
    """
    G = np.asarray(G, dtype=float)
    m = G.shape[0]
    # parity 0: same side, parity 1: opposite sides
    adj = [[] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if G[i, j] > tol:
                adj[i].append((j, 0))
                adj[j].append((i, 0))
            elif G[i, j] < -tol:
                adj[i].append((j, 1))
                adj[j].append((i, 1))

    color = np.full(m, -1, dtype=int)
    parent = np.full(m, -1, dtype=int)
    depth = np.zeros(m, dtype=int)
    for start in range(m):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, parity in adj[i]:
                expected = color[i] ^ parity
                if color[j] == -1:
                    color[j] = expected
                    parent[j] = i
                    depth[j] = depth[i] + 1
                    queue.append(j)
                elif color[j] != expected:
                    return Obstruction(cycle=_bfs_cycle(parent, depth, i, j))
    index_set = frozenset(int(i) for i in np.flatnonzero(color == 0))
    eps = np.where(color == 0, 1.0, -1.0)
    return SubdualWitness(epsilon=eps, index_set=index_set)


def _bfs_cycle(parent, depth, i, j):
    """Cycle through edge (i, j) and the BFS tree paths to their common ancestor."""
    pi, pj = [i], [j]
    a, b = i, j
    while depth[a] > depth[b]:
        a = parent[a]
        pi.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        pj.append(b)
    while a != b:
        a = parent[a]
        b = parent[b]
        pi.append(a)
        pj.append(b)
    # pi ends at the ancestor; pj's copy of it is dropped.
    return tuple(int(v) for v in (pi + pj[-2::-1]))


def sign_flip_search(K, tol=DEFAULT_TOL):
    """Search for a sign vector making the reflected cone subdual."""
    return sign_flip_search_gram(gram(K), tol)


def triple_obstruction(K, tol=DEFAULT_TOL):
    """Lexicographically first index triple with pairwise-negative Gram entries."""
    G = gram(K)
    m = G.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            if G[i, j] >= -tol:
                continue
            for k in range(j + 1, m):
                if G[i, k] < -tol and G[j, k] < -tol:
                    return (i, j, k)
    return None


def _h_rep(cone):
    """Facet normals, widening 2D Lorentz cones to their simplicial form."""
    if isinstance(cone, Lorentz) and cone.dim == 2:
        cone = Simplicial(columns=generator_matrix(cone))
    return facet_normals(cone)


def _v_rep(cone):
    if isinstance(cone, Lorentz) and cone.dim > 2:
        raise UnsupportedConeError("no finite generator form for the Lorentz cone")
    return generator_matrix(cone)


def certify_necessary(K, L, tol=DEFAULT_TOL):
    """Check the necessary conditions for P_K to be L-isotone.

    When one of the interior intersections int(K*) & L or int(K*) & L* is
    nonempty, isotonicity requires K subdual and K within L within K*.
    A report with an interior flag set and a failed containment or
    subduality flag is a structural refutation; anything else is
    inconclusive (the conditions are necessary, never sufficient).
    """
    if not is_proper(K) or not is_proper(L):
        raise ValueError("certify_necessary requires proper cones")
    GK = _v_rep(K)
    GL = _v_rep(L)
    UL = _h_rep(L)
    Ldual = dual(L)
    ULdual = _h_rep(Ldual)

    k_in_l = all(membership(L, GK[:, j], tol) for j in range(GK.shape[1]))
    l_in_k_dual = bool(np.min(GK.T @ GL) >= -tol)
    k_subdual = bool(np.min(GK.T @ GK) >= -tol)

    def interior_vs(normals):
        cons = [(g, 0.0, ">=") for g in GK.T]  # strict interior of K*
        cons += [(u, 0.0, "<=") for u in normals]
        res = lp_feasible(cons)
        if res.status == "indeterminate":
            raise IndeterminateError("interior intersection LP indeterminate")
        return res.status == "feasible"

    return ContainmentReport(
        k_in_l=k_in_l,
        l_in_k_dual=l_in_k_dual,
        k_subdual=k_subdual,
        interior_kdual_l=interior_vs(UL),
        interior_kdual_ldual=interior_vs(ULdual),
    )


def orthant_isotone_recognize(K, tol=DEFAULT_TOL):
    """Recognize cones whose projection is isotone for the coordinatewise order.

    Every facet normal may touch at most two coordinates, and where it
    touches two the entries must have opposite (or zero) signs; a cone in
    R^m then has at most m(m-1) facets.
    """
    U = facet_normals(K)
    m = dim_of(K)
    offending = None
    for u in U:
        nz = np.flatnonzero(np.abs(u) > tol)
        if nz.size > 2:
            offending = u
            break
        if nz.size == 2 and u[nz[0]] * u[nz[1]] > tol * tol:
            offending = u
            break
    count = int(U.shape[0])
    isotone = offending is None and count <= m * (m - 1)
    return OrthantIsotoneReport(
        isotone=isotone,
        offending_normal=None if offending is None else offending.copy(),
        facet_count=count,
    )


def alternatives_check(K, tol=DEFAULT_TOL):
    """For a coordinatewise-isotone proper cone: inside the orthant, or
    int(K*) disjoint from it.  Exactly one of the two flags is true.
    """
    if not is_proper(K):
        raise ValueError("alternatives_check requires a proper cone")
    if not orthant_isotone_recognize(K, tol).isotone:
        raise ValueError("alternatives_check requires a coordinatewise-isotone cone")
    GK = _v_rep(K)
    in_orthant = bool(np.min(GK) >= -tol)
    m = dim_of(K)
    eye = np.eye(m)
    cons = [(g, 0.0, ">=") for g in GK.T] + [(eye[i], 0.0, ">=") for i in range(m)]
    res = lp_feasible(cons)
    if res.status == "indeterminate":
        raise IndeterminateError("alternatives LP indeterminate")
    interior_disjoint = res.status == "infeasible"
    return in_orthant, interior_disjoint


# ---------------------------------------------------------------------------
# Randomized falsifier


def _direction_sampler(L, scale):
    """Per-trial sampler of directions d in L, specialized by family."""
    m = dim_of(L)
    if isinstance(L, Lorentz):

        def sample(rng):
            z = scale * rng.standard_normal(m - 1)
            extra = rng.exponential(scale)
            return np.append(z, np.linalg.norm(z) + extra)

        return sample
    if isinstance(L, PolyhedralH):
        U = L.normals

        def sample(rng):
            for _ in range(1000):
                d = scale * rng.uniform(-1.0, 1.0, m)
                if np.max(U @ d) <= 0.0:
                    return d
            raise SamplingError("rejection sampling failed for the halfspace cone")

        return sample
    V = generator_matrix(L)
    k = V.shape[1]

    def sample(rng):
        return V @ rng.exponential(scale, k)

    return sample


def _projector(K):
    """Per-trial projection closure, specialized for speed on simple families."""
    if isinstance(K, Orthant):
        return lambda x: np.maximum(x, 0.0)
    if isinstance(K, SignedOrthant):
        eps = K.epsilon
        return lambda x: eps * np.maximum(eps * x, 0.0)
    if isinstance(K, Simplicial):
        E = K.columns
        if float(np.max(np.abs(E.T @ E - np.eye(E.shape[1])))) < 1e-12:
            return lambda x: E @ np.maximum(E.T @ x, 0.0)
    return lambda x: project(K, x).point


def _margin_fn(L):
    if isinstance(L, Simplicial):
        Einv = np.linalg.inv(L.columns)
        return lambda v: float(np.min(Einv @ v))
    if isinstance(L, MonotoneNonneg):
        Einv = np.linalg.inv(monotone_generators(L.dim))
        return lambda v: float(np.min(Einv @ v))
    return lambda v: cone_margin(L, v)


def _trial_rng(seed, trial):
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def falsify(K, L, cfg=FalsifierConfig()):
    """Search for an ordered pair refuting L-isotonicity of the projection onto K.

    Trial t draws from an RNG keyed by (cfg.seed, t) only, so results are
    reproducible and independent of evaluation order; the returned
    counterexample is the one with the lowest trial index.  Returns None
    when no violation shows up within the budget; absence of a
    counterexample proves nothing.
    """
    if dim_of(K) != dim_of(L):
        raise DimensionMismatchError("K and L dimensions disagree")
    m = dim_of(K)
    sample_d = _direction_sampler(L, cfg.scale)
    proj = _projector(K)
    margin_l = _margin_fn(L)
    threshold = -10.0 * cfg.tol
    for t in range(1, cfg.trials + 1):
        rng = _trial_rng(cfg.seed, t)
        x = cfg.scale * rng.standard_normal(m)
        d = sample_d(rng)
        y = x + d
        px = proj(x)
        py = proj(y)
        v = py - px
        mg = margin_l(v)
        if mg < threshold * (1.0 + float(np.linalg.norm(v))):
            return Counterexample(
                x=x, y=y, px=px, py=py, violation=v, margin=mg, trial=t
            )
    return None


def verify_certificate(cert, K, L=None, tol=DEFAULT_TOL):
    """Independently re-check a certificate; False on any failure."""
    try:
        if isinstance(cert, SubdualWitness):
            eps = np.asarray(cert.epsilon, dtype=float)
            if not np.all(np.abs(eps) == 1.0):
                return False
            expected = frozenset(int(i) for i in np.flatnonzero(eps > 0))
            if expected != cert.index_set:
                return False
            G = gram(K)
            D = np.diag(eps)
            return float(np.min(D @ G @ D)) >= -tol
        if isinstance(cert, Obstruction):
            G = gram(K)
            cyc = list(cert.cycle)
            if len(cyc) < 3 or len(set(cyc)) != len(cyc):
                return False
            negatives = 0
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                g = G[a, b]
                if abs(g) <= tol:
                    return False
                if g < 0:
                    negatives += 1
            return negatives % 2 == 1
        if isinstance(cert, Counterexample):
            if L is None:
                return False
            if not leq(L, cert.x, cert.y, tol):
                return False
            px = project(K, cert.x).point
            py = project(K, cert.y).point
            v = py - px
            scale = 1.0 + float(np.linalg.norm(v))
            return cone_margin(L, v) < -10.0 * tol * scale
        if isinstance(cert, ContainmentReport):
            if L is None:
                return False
            return certify_necessary(K, L, tol) == cert
    except (ValueError, UnsupportedConeError, IndeterminateError):
        return False
    return False

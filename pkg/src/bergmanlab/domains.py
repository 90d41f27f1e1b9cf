"""Model domains with computable defining functions and Bergman kernels.

Three Reinhardt models are supported, chosen so that every boundary-geometry
class exercised by the rest of the package has one computable instance:

* ``disc``    -- unit disc in C,  r(z) = |z|^2 - 1
* ``ball2``   -- unit ball in C^2, r(z) = |z1|^2 + |z2|^2 - 1
* ``egg:m=k`` -- egg domain {|z1|^2 + |z2|^(2k) < 1}, k >= 2 integer

Kernels are available in closed form for all three models (for the egg the
monomial series sums exactly: the z1 sum is a binomial series and the
remaining z2 sum is rational in x = z2*conj(w2) * (1-t)^(-1/m)), and as
truncated Reinhardt monomial series with a geometric tail bound.  The series
path is the independent cross-check of the closed forms and the only path
that exercises truncation failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

# Kernel evaluation refuses points closer to the boundary than this; every
# experiment approaches the boundary along controlled sequences well above it.
R_FLOOR = 1e-8

DEFAULT_SERIES_DEGREE_1D = 200
DEFAULT_SERIES_DEGREE_2D = 120
DEFAULT_TAIL_RTOL = 1e-9
DEFAULT_TABLE_CAP = 1_000_000


class KernelStrategy(str, Enum):
    CLOSED_FORM = "closed_form"
    MONOMIAL_SERIES = "monomial_series"


class SeriesTruncationError(ValueError):
    """Truncated monomial series tail bound exceeds the requested tolerance."""


class BoundaryProximityError(ValueError):
    """Kernel evaluation requested too close to (or outside) the boundary."""


@dataclass(frozen=True)
class DomainModel:
    """A model domain: dimension, defining function, kernel strategy, type.

    ``m`` is the finite-type parameter: 1 for the strongly pseudoconvex
    models (disc, ball2) and the egg exponent for egg domains.
    """

    id: str
    n: int
    m: int
    kernel_strategy: KernelStrategy = KernelStrategy.CLOSED_FORM
    series_degree: int = DEFAULT_SERIES_DEGREE_1D
    tail_rtol: float = DEFAULT_TAIL_RTOL

    @property
    def is_egg(self) -> bool:
        return self.id.startswith("egg")


def unit_disc(strategy: KernelStrategy = KernelStrategy.CLOSED_FORM) -> DomainModel:
    return DomainModel("disc", n=1, m=1, kernel_strategy=strategy,
                       series_degree=DEFAULT_SERIES_DEGREE_1D)


def unit_ball2(strategy: KernelStrategy = KernelStrategy.CLOSED_FORM) -> DomainModel:
    return DomainModel("ball2", n=2, m=1, kernel_strategy=strategy,
                       series_degree=DEFAULT_SERIES_DEGREE_2D)


def egg(m: int, strategy: KernelStrategy = KernelStrategy.CLOSED_FORM) -> DomainModel:
    if not (isinstance(m, int) and m >= 2):
        raise ValueError(f"egg exponent must be an integer >= 2, got {m!r}")
    return DomainModel(f"egg:m={m}", n=2, m=m, kernel_strategy=strategy,
                       series_degree=DEFAULT_SERIES_DEGREE_2D)


def domain_from_id(domain_id: str, strategy: KernelStrategy | None = None) -> DomainModel:
    """Parse a string id ("disc", "ball2", "egg:m=2") into a DomainModel."""
    did = domain_id.strip().lower()
    kw = {} if strategy is None else {"strategy": strategy}
    if did == "disc":
        return unit_disc(**kw)
    if did == "ball2":
        return unit_ball2(**kw)
    if did.startswith("egg:m="):
        try:
            m = int(did.split("=", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad egg exponent in domain id {domain_id!r}") from exc
        return egg(m, **kw)
    raise ValueError(f"unknown domain id {domain_id!r} "
                     "(expected 'disc', 'ball2' or 'egg:m=<int>')")


# ---------------------------------------------------------------------------
# Defining function and elementary geometry
# ---------------------------------------------------------------------------

def _as_points(z) -> np.ndarray:
    """Coerce a point or an array of points to complex shape (N, n)."""
    arr = np.asarray(z, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def defining_function(domain: DomainModel, z):
    """Signed defining function r(z): negative inside, zero on the boundary.

    Accepts a single point (shape (n,) or scalar for n=1) or a batch (N, n);
    returns a scalar or an (N,) array accordingly.
    """
    pts = _as_points(z)
    if pts.shape[1] != domain.n:
        raise ValueError(f"point dimension {pts.shape[1]} != domain dimension {domain.n}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point")
    if domain.id == "disc":
        vals = np.abs(pts[:, 0]) ** 2 - 1.0
    elif domain.id == "ball2":
        vals = np.abs(pts[:, 0]) ** 2 + np.abs(pts[:, 1]) ** 2 - 1.0
    else:
        vals = np.abs(pts[:, 0]) ** 2 + np.abs(pts[:, 1]) ** (2 * domain.m) - 1.0
    return vals[0] if np.asarray(z).ndim <= 1 else vals


def volume(domain: DomainModel) -> float:
    """Exact Lebesgue volume of the domain."""
    if domain.id == "disc":
        return math.pi
    if domain.id == "ball2":
        return math.pi ** 2 / 2.0
    return math.pi ** 2 * domain.m / (domain.m + 1.0)


def nearest_boundary_point(domain: DomainModel, z) -> np.ndarray:
    """Boundary point hit by the ray from the origin through z.

    Exact for these star-shaped Reinhardt models (radial monotonicity of r).
    """
    pt = _as_points(z)[0]
    norm = np.linalg.norm(pt)
    if norm == 0.0:
        raise ValueError("ray projection undefined at the origin")
    direction = pt / norm
    if domain.id in ("disc", "ball2"):
        return direction
    g = lambda s: float(defining_function(domain, (s * direction).reshape(1, -1))[0])
    hi = 1.0
    while g(hi) < 0.0:
        hi *= 2.0
    s = brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15)
    return s * direction


def ray_points(domain: DomainModel, direction, deltas) -> np.ndarray:
    """Points z(delta) on the ray toward a boundary direction with |r(z)| = delta.

    ``direction`` is any nonzero point; it is projected to the boundary first.
    Returns an array of shape (len(deltas), n).
    """
    p = nearest_boundary_point(domain, direction)
    out = np.empty((len(deltas), domain.n), dtype=np.complex128)
    for i, delta in enumerate(deltas):
        if not (0.0 < delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        g = lambda s: float(defining_function(domain, (s * p).reshape(1, -1))[0]) + delta
        s = brentq(g, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
        out[i] = s * p
    return out


# ---------------------------------------------------------------------------
# Monomial norms (exact Beta-integral reduction)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialTable:
    """Squared L2 norms of monomials z^alpha, keyed by multi-index."""

    domain_id: str
    max_degree: int
    entries: dict

    def norm_sq(self, alpha) -> float:
        return self.entries[tuple(alpha)]


def squared_monomial_norm(domain: DomainModel, alpha) -> float:
    """Exact value of the squared L2(Omega) norm of z^alpha.

    Disc: pi / (k+1).  Ball2: pi^2 k1! k2! / (k1+k2+2)!.  Egg(m):
    (pi^2/m) k1! Gamma((k2+1)/m) / Gamma(k1 + 2 + (k2+1)/m), all obtained by
    reducing the radial integrals to Beta functions.
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != domain.n or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for n={domain.n}")
    if domain.id == "disc":
        return math.pi / (alpha[0] + 1.0)
    k1, k2 = alpha
    if domain.id == "ball2":
        log = 2 * math.log(math.pi) + math.lgamma(k1 + 1) + math.lgamma(k2 + 1) \
            - math.lgamma(k1 + k2 + 3)
        return math.exp(log)
    m = domain.m
    c = (k2 + 1.0) / m
    log = 2 * math.log(math.pi) - math.log(m) + math.lgamma(k1 + 1) \
        + math.lgamma(c) - math.lgamma(k1 + 2 + c)
    return math.exp(log)


def monomial_norms(domain: DomainModel, max_degree: int,
                   table_cap: int = DEFAULT_TABLE_CAP) -> MonomialTable:
    """Table of squared monomial norms up to per-variable degree max_degree."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    count = (max_degree + 1) ** domain.n
    if count > table_cap:
        raise ValueError(f"monomial table size {count} exceeds cap {table_cap}")
    entries = {}
    if domain.n == 1:
        for k in range(max_degree + 1):
            entries[(k,)] = squared_monomial_norm(domain, (k,))
    else:
        for k1 in range(max_degree + 1):
            for k2 in range(max_degree + 1):
                entries[(k1, k2)] = squared_monomial_norm(domain, (k1, k2))
    return MonomialTable(domain.id, max_degree, entries)


@lru_cache(maxsize=8)
def _cached_table(domain_id: str, max_degree: int):
    return monomial_norms(domain_from_id(domain_id), max_degree)


# ---------------------------------------------------------------------------
# Bergman kernels
# ---------------------------------------------------------------------------

def _check_interior(domain: DomainModel, pts: np.ndarray, floor: float = R_FLOOR):
    r = defining_function(domain, pts)
    r = np.atleast_1d(r)
    if np.any(r > -floor):
        worst = float(np.max(r))
        raise BoundaryProximityError(
            f"kernel evaluation requires r(z) <= -{floor:g}; worst r = {worst:g}")


def _closed_form_kernel(domain: DomainModel, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Vectorised closed-form kernel over broadcast pairs (Z_i, W_i)."""
    if domain.id == "disc":
        return 1.0 / (math.pi * (1.0 - Z[:, 0] * np.conj(W[:, 0])) ** 2)
    if domain.id == "ball2":
        inner = Z[:, 0] * np.conj(W[:, 0]) + Z[:, 1] * np.conj(W[:, 1])
        return 2.0 / (math.pi ** 2 * (1.0 - inner) ** 3)
    m = domain.m
    t = Z[:, 0] * np.conj(W[:, 0])
    s = Z[:, 1] * np.conj(W[:, 1])
    one_minus_t = 1.0 - t
    x = s * one_minus_t ** (-1.0 / m)
    head = one_minus_t ** (-2.0 - 1.0 / m) / (m * math.pi ** 2)
    return head * (2.0 / (1.0 - x) ** 3 + (m - 1.0) / (1.0 - x) ** 2)


def _series_kernel(domain: DomainModel, z: np.ndarray, w: np.ndarray) -> complex:
    """Truncated monomial-series kernel with a geometric tail bound.

    Shell sums S_d collect |term| over multi-indices with max component d;
    their successive ratios are eventually geometric, so the tail after the
    last computed shell is bounded by S_D * q / (1 - q) with q the largest
    recent ratio.  Raises SeriesTruncationError when that bound exceeds
    tail_rtol relative to the partial sum.
    """
    D = domain.series_degree
    table = _cached_table(domain.id, D)
    if domain.n == 1:
        p = z[0] * np.conj(w[0])
        k = np.arange(D + 1)
        inv = np.array([1.0 / table.entries[(int(i),)] for i in k])
        terms = inv * p ** k
        shells = np.abs(terms)
    else:
        t = z[0] * np.conj(w[0])
        s = z[1] * np.conj(w[1])
        k = np.arange(D + 1)
        inv = np.empty((D + 1, D + 1))
        for k1 in range(D + 1):
            for k2 in range(D + 1):
                inv[k1, k2] = 1.0 / table.entries[(k1, k2)]
        grid = inv * np.outer(t ** k, s ** k)
        absg = np.abs(grid)
        shells = np.array([
            absg[d, :d + 1].sum() + absg[:d, d].sum() for d in range(D + 1)
        ])
        terms = grid.ravel()
    total = complex(np.sum(terms))
    # geometric tail estimate from the last few shell ratios
    tail_window = shells[-4:]
    if np.any(tail_window[:-1] == 0.0):
        tail = 0.0
    else:
        q = float(np.max(tail_window[1:] / tail_window[:-1]))
        if q >= 0.999:
            raise SeriesTruncationError(
                f"series shell ratio {q:.6f} >= 1 at degree {D}; "
                "point too close to the boundary for this truncation")
        tail = float(shells[-1]) * q / (1.0 - q)
    if tail > domain.tail_rtol * max(abs(total), 1e-300):
        raise SeriesTruncationError(
            f"series tail bound {tail:.3e} exceeds rtol {domain.tail_rtol:g} "
            f"* |K| = {domain.tail_rtol * abs(total):.3e} at degree {D}")
    return total


def bergman_kernel(domain: DomainModel, z, w) -> complex:
    """Kernel value K(z, w) at a single interior pair, honouring the strategy."""
    Z, W = _as_points(z), _as_points(w)
    _check_interior(domain, Z)
    _check_interior(domain, W)
    if domain.kernel_strategy is KernelStrategy.CLOSED_FORM:
        return complex(_closed_form_kernel(domain, Z, W)[0])
    return _series_kernel(domain, Z[0], W[0])


def kernel_row(domain: DomainModel, z, W, check: bool = True) -> np.ndarray:
    """Vectorised K(z, w_j) over an array of points W of shape (N, n).

    This is the production evaluation path (closed forms for every model);
    the per-pair series path stays available through ``bergman_kernel``.
    """
    Z = _as_points(z)
    Wp = _as_points(W)
    if check:
        _check_interior(domain, Z)
        _check_interior(domain, Wp)
    Zb = np.broadcast_to(Z, Wp.shape) if Z.shape[0] == 1 else Z
    return _closed_form_kernel(domain, Zb, Wp)


def kernel_diag(domain: DomainModel, W, check: bool = True) -> np.ndarray:
    """K(w, w) over an array of points; always real positive."""
    vals = kernel_row(domain, _as_points(W), _as_points(W), check=check)
    return np.real(vals)


def kernel_matrix(domain: DomainModel, Z, W, block: int = 256) -> np.ndarray:
    """Dense matrix K(z_i, w_j); assembled in row blocks."""
    Zp, Wp = _as_points(Z), _as_points(W)
    _check_interior(domain, Zp)
    _check_interior(domain, Wp)
    out = np.empty((Zp.shape[0], Wp.shape[0]), dtype=np.complex128)
    for lo in range(0, Zp.shape[0], block):
        hi = min(lo + block, Zp.shape[0])
        blockZ = np.repeat(Zp[lo:hi], Wp.shape[0], axis=0)
        blockW = np.tile(Wp, (hi - lo, 1))
        out[lo:hi] = _closed_form_kernel(domain, blockZ, blockW).reshape(hi - lo, -1)
    return out


# ---------------------------------------------------------------------------
# Off-diagonal supremum and diagonal growth fits
# ---------------------------------------------------------------------------

def _boundary_graded_samples(domain: DomainModel, angular: int, depth_levels: int = 14):
    """Deterministic sample cloud graded toward the boundary, |r| down to 2^-depth."""
    ts = 2.0 ** (-np.arange(depth_levels, dtype=float))
    pts = []
    if domain.n == 1:
        for t in ts:
            rho = math.sqrt(1.0 - t)
            th = 2.0 * math.pi * (np.arange(angular) + 0.5) / angular
            pts.append(rho * np.exp(1j * th).reshape(-1, 1))
    else:
        ang = max(4, angular // 4)
        xs = np.linspace(0.05, 0.95, 7)
        for t in ts:
            s = 1.0 - t
            for x in xs:
                u, v = s * x, s * (1.0 - x)
                rho1 = math.sqrt(u)
                rho2 = v ** (1.0 / (2 * domain.m))
                th1 = 2.0 * math.pi * (np.arange(ang) + 0.5) / ang
                th2 = 2.0 * math.pi * (np.arange(ang) + 0.5) / ang
                g1, g2 = np.meshgrid(th1, th2, indexing="ij")
                pts.append(np.stack([rho1 * np.exp(1j * g1.ravel()),
                                     rho2 * np.exp(1j * g2.ravel())], axis=1))
    return np.concatenate(pts, axis=0)


def offdiagonal_sup(domain: DomainModel, separation: float, sample_count: int = 64) -> float:
    """Sup of |K(z, w)| over sampled pairs with |z - w| >= separation.

    Points are sampled arbitrarily close to the boundary (|r| down to ~6e-5).
    Returns 0.0 when no sampled pair meets the separation (e.g. separation
    larger than the domain diameter).
    """
    if separation <= 0.0:
        raise ValueError("separation must be positive")
    pts = _boundary_graded_samples(domain, sample_count)
    sup = 0.0
    n_pts = pts.shape[0]
    block = max(1, 2_000_000 // max(n_pts, 1))
    for lo in range(0, n_pts, block):
        hi = min(lo + block, n_pts)
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        mask = dist >= separation
        if not mask.any():
            continue
        ii, jj = np.nonzero(mask)
        vals = _closed_form_kernel(domain, pts[lo + ii], pts[jj])
        sup = max(sup, float(np.max(np.abs(vals))))
    return sup


def diagonal_growth_exponent(domain: DomainModel, direction, deltas) -> float:
    """Least-squares slope of log K(z,z) against log |r(z)| along a ray."""
    pts = ray_points(domain, direction, deltas)
    K = kernel_diag(domain, pts)
    r = np.abs(defining_function(domain, pts))
    slope = np.polyfit(np.log(r), np.log(K), 1)[0]
    return float(slope)

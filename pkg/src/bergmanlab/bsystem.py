"""Anisotropic kernel-growth systems at near-boundary base points.

At a base point z near the boundary, a family b_1, ..., b_n encodes the
kernel growth in each coordinate direction after a unitary change of
coordinates:

    b_1(z', w') = 1 / delta(z', w'),
    b_j(z', w') = sum_k (A_jk(z') / delta(z', w'))^(1/k),   j >= 2,

where delta is the pseudo-distance

    delta(z', w') = |r(z')| + |r(w')| + |z'_1 - w'_1|
                    + sum_{l>=2} sum_{s>=2} A_ls(z') |z'_l - w'_l|^s

and A_jk collects the absolute mixed derivatives of the defining function
of order k in the j-th coordinate.  For the model domains the derivative
tables are exact closed forms, the normalizing map is unitary (unit
Jacobian), and the diagonal comparability K(z,z) ~ prod b_j(z,z)^2 holds
with explicitly computable constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bergmanlab.domains import (
    R_FLOOR,
    DomainModel,
    defining_function,
    kernel_diag,
    kernel_row,
    nearest_boundary_point,
)

BOUNDARY_BAND = 0.2
DEFAULT_NEIGHBORHOOD = 0.25
ORDER_FLOOR = 1e-6


@dataclass(frozen=True)
class BSystem:
    domain: DomainModel
    base_point: np.ndarray        # original coordinates, shape (n,)
    base_point_norm: np.ndarray   # normalized coordinates U @ z
    unitary: np.ndarray           # (n, n); w' = U w, |det U| = 1
    coeffs: np.ndarray            # A[j-2, k-2], j = 2..n, k = 2..max_order
    max_order: int                # highest derivative order in the sums
    detected_order: int           # smallest k with A_jk bounded away from 0
    neighborhood_radius: float
    r_abs: float
    boundary_point: np.ndarray    # nearest boundary point, original coordinates

    @property
    def n(self) -> int:
        return self.domain.n

    def to_normalized(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.complex128)
        if pts.ndim == 1:
            return self.unitary @ pts
        return pts @ self.unitary.T

    def from_normalized(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.complex128)
        inv = self.unitary.conj().T
        if pts.ndim == 1:
            return inv @ pts
        return pts @ inv.T


def _egg_coeff_table(m: int, rho2: float, u1_abs: float, u2_abs: float,
                     max_order: int) -> np.ndarray:
    """A_2k for the egg model in normal-aligned coordinates.

    With the unitary sending the complex normal u to the first axis, the
    second normalized coordinate enters the defining function through
    |u2|^2 at order 2 (from the |w1|^2 part) and through |u1|^k times the
    exact derivative table of |w2|^(2m) at |w2| = rho2.
    """
    out = np.zeros(max_order - 1)
    out[0] = u2_abs ** 2
    for k in range(2, max_order + 1):
        total = 0.0
        for k1 in range(1, k):
            k2 = k - k1
            if k1 > m or k2 > m:
                continue
            coef = (math.factorial(m) / math.factorial(m - k1)) \
                * (math.factorial(m) / math.factorial(m - k2))
            total += coef * rho2 ** (2 * m - k)
        out[k - 2] += u1_abs ** k * total
    return out


def _coeff_table(domain: DomainModel, z_abs2: float, u1_abs: float, u2_abs: float,
                 max_order: int) -> np.ndarray:
    if domain.n == 1:
        return np.zeros((0, max_order - 1))
    if domain.id == "ball2":
        table = np.zeros((1, max_order - 1))
        table[0, 0] = 1.0
        return table
    return _egg_coeff_table(domain.m, z_abs2, u1_abs, u2_abs, max_order).reshape(1, -1)


def _phase(value: complex) -> complex:
    return value / abs(value) if value != 0.0 else 1.0 + 0.0j


def complex_normal(domain: DomainModel, p: np.ndarray) -> np.ndarray:
    """Unit complex normal conj(dr/dz) / |.| at a boundary point p."""
    if domain.id == "disc":
        nu = np.array([p[0]])
    elif domain.id == "ball2":
        nu = p.copy()
    else:
        m = domain.m
        nu = np.array([p[0], m * p[1] * abs(p[1]) ** (2 * m - 2)])
    return nu / np.linalg.norm(nu)


def build_bsystem(domain: DomainModel, z, *,
                  neighborhood_radius: float = DEFAULT_NEIGHBORHOOD,
                  band: float = BOUNDARY_BAND,
                  order_floor: float = ORDER_FLOOR) -> BSystem:
    """Construct the coordinate system and derivative table at a base point.

    The normalizing map is a unitary rotation: for the disc and the ball it
    sends the base point to the positive real axis of the first coordinate
    (the outward normal direction); for the egg it is the diagonal phase
    rotation making both coordinates real nonnegative, which preserves the
    decoupled defining function exactly.
    """
    zp = np.asarray(z, dtype=np.complex128).reshape(-1)
    if zp.shape[0] != domain.n:
        raise ValueError(f"point dimension {zp.shape[0]} != {domain.n}")
    r = float(defining_function(domain, zp))
    r_abs = abs(r)
    if r >= 0.0 or r_abs < R_FLOOR:
        raise ValueError(f"base point must be interior with |r| >= {R_FLOOR:g}")
    if r_abs > band:
        raise ValueError(f"base point outside boundary band: |r| = {r_abs:g} > {band:g}")
    p = nearest_boundary_point(domain, zp)

    if domain.id == "disc":
        U = np.array([[np.conj(_phase(p[0]))]])
    elif domain.id == "ball2":
        U = np.array([[np.conj(p[0]), np.conj(p[1])],
                      [-p[1], p[0]]])
    else:
        U = np.diag([np.conj(_phase(p[0])), np.conj(_phase(p[1]))])

    max_order = 2 if domain.id in ("disc", "ball2") else 2 * domain.m
    coeffs = _coeff_table(domain, float(abs(zp[1])) if domain.n == 2 else 0.0, max_order)
    boundary_coeffs = _coeff_table(domain, float(abs(p[1])) if domain.n == 2 else 0.0,
                                   max_order)

    detected = max_order
    if domain.n == 1:
        detected = 2
    else:
        for k in range(2, max_order + 1):
            if np.max(boundary_coeffs[:, k - 2]) >= order_floor:
                detected = k
                break

    if not np.all(np.isfinite(coeffs)) or np.any(coeffs < 0):
        raise ValueError("derivative table must be nonnegative and finite")

    return BSystem(domain=domain, base_point=zp, base_point_norm=U @ zp,
                   unitary=U, coeffs=coeffs, max_order=max_order,
                   detected_order=detected,
                   neighborhood_radius=neighborhood_radius,
                   r_abs=r_abs, boundary_point=p)


# ---------------------------------------------------------------------------
# Pseudo-distance, b-functions, polydiscs
# ---------------------------------------------------------------------------

def _r_abs_normalized(bsys: BSystem, w_norm: np.ndarray) -> float:
    return abs(float(defining_function(bsys.domain, bsys.from_normalized(w_norm))))


def pseudo_distance(bsys: BSystem, w_norm) -> float:
    """delta(z', w') for w' in normalized coordinates within the neighborhood."""
    w = np.asarray(w_norm, dtype=np.complex128).reshape(-1)
    zc = bsys.base_point_norm
    sep = float(np.linalg.norm(w - zc))
    if sep > bsys.neighborhood_radius + 1e-12:
        raise ValueError(f"point at distance {sep:g} outside neighborhood "
                         f"radius {bsys.neighborhood_radius:g}")
    total = bsys.r_abs + _r_abs_normalized(bsys, w) + abs(zc[0] - w[0])
    for j in range(2, bsys.n + 1):
        diff = abs(zc[j - 1] - w[j - 1])
        for k in range(2, bsys.max_order + 1):
            total += bsys.coeffs[j - 2, k - 2] * diff ** k
    return float(total)


def b_functions(bsys: BSystem, w_norm) -> np.ndarray:
    """Vector (b_1, ..., b_n) at a normalized point of the neighborhood."""
    delta = pseudo_distance(bsys, w_norm)
    return _b_from_delta(bsys, delta)


def _b_from_delta(bsys: BSystem, delta: float) -> np.ndarray:
    out = np.empty(bsys.n)
    out[0] = 1.0 / delta
    for j in range(2, bsys.n + 1):
        out[j - 1] = sum(
            (bsys.coeffs[j - 2, k - 2] / delta) ** (1.0 / k)
            for k in range(2, bsys.max_order + 1)
            if bsys.coeffs[j - 2, k - 2] > 0.0)
    return out


def diagonal_b(bsys: BSystem) -> np.ndarray:
    """b_j(z', z'), using delta(z', z') = 2 |r(z')| exactly."""
    return _b_from_delta(bsys, 2.0 * bsys.r_abs)


@dataclass(frozen=True)
class Polydisc:
    center_norm: np.ndarray
    radii: np.ndarray
    lam: float

    def contains(self, w_norm) -> bool:
        w = np.asarray(w_norm, dtype=np.complex128).reshape(-1)
        return bool(np.all(np.abs(w - self.center_norm) <= self.radii))


def polydisc(bsys: BSystem, lam: float) -> Polydisc:
    """Anisotropic polydisc with per-coordinate radii lam / b_j(z', z')."""
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    b = diagonal_b(bsys)
    if np.any(b <= 0.0):
        raise ValueError("degenerate direction: some b_j(z', z') = 0")
    return Polydisc(center_norm=bsys.base_point_norm, radii=lam / b, lam=lam)


def polydisc_volume(bsys: BSystem, lam: float) -> float:
    """Exactly pi^n lam^(2n) prod_j b_j(z',z')^(-2)."""
    b = diagonal_b(bsys)
    if np.any(b <= 0.0):
        raise ValueError("degenerate direction: some b_j(z', z') = 0")
    n = bsys.n
    return float(math.pi ** n * lam ** (2 * n) / np.prod(b) ** 2)


def polydisc_boundary_samples(pdisc: Polydisc, angles: int = 24) -> np.ndarray:
    """Deterministic samples of the distinguished boundary: faces and corners."""
    n = pdisc.radii.shape[0]
    th = 2.0 * math.pi * (np.arange(angles) + 0.5) / angles
    phases = np.exp(1j * th)
    if n == 1:
        return pdisc.center_norm + pdisc.radii[0] * phases.reshape(-1, 1)
    fractions = np.array([0.0, 0.5, 1.0])
    pts = []
    for tight in range(2):
        other = 1 - tight
        for frac in fractions:
            g1, g2 = np.meshgrid(phases, phases, indexing="ij")
            delta = np.zeros((angles * angles, 2), dtype=np.complex128)
            delta[:, tight] = pdisc.radii[tight] * g1.ravel()
            delta[:, other] = frac * pdisc.radii[other] * g2.ravel()
            pts.append(pdisc.center_norm + delta)
    return np.concatenate(pts, axis=0)


def polydisc_interior_samples(pdisc: Polydisc, count: int, rng) -> np.ndarray:
    """Area-uniform samples of the (product-disc) interior."""
    n = pdisc.radii.shape[0]
    radii = np.sqrt(rng.uniform(0.0, 1.0, (count, n))) * pdisc.radii
    phases = np.exp(2j * math.pi * rng.uniform(0.0, 1.0, (count, n)))
    return pdisc.center_norm + radii * phases


@dataclass(frozen=True)
class ContainmentCheck:
    contained: bool
    margin: float
    samples: int


def polydisc_containment_check(domain: DomainModel, bsys: BSystem, lam: float,
                               angles: int = 24) -> ContainmentCheck:
    """Sample the polydisc boundary; report r < 0 everywhere and worst margin.

    margin = max over samples of r(w) / |r(z)|; containment needs margin < 0.
    """
    pdisc = polydisc(bsys, lam)
    pts_norm = polydisc_boundary_samples(pdisc, angles=angles)
    pts = bsys.from_normalized(pts_norm)
    r = np.atleast_1d(defining_function(domain, pts))
    margin = float(np.max(r) / bsys.r_abs)
    return ContainmentCheck(contained=bool(np.all(r < 0.0)), margin=margin,
                            samples=pts.shape[0])


# ---------------------------------------------------------------------------
# Kernel-comparison checks
# ---------------------------------------------------------------------------

def _neighborhood_samples(bsys: BSystem, count: int,
                          min_r: float = 1e-7) -> np.ndarray:
    """Deterministic interior samples of the c-neighborhood (normalized coords).

    Geometric radius levels crossed with angle grids; doubling ``count``
    doubles the angular resolution and keeps earlier samples, so sampled
    suprema refine monotonically.
    """
    c = bsys.neighborhood_radius
    n = bsys.n
    if n == 1:
        levels = c * 2.0 ** (-0.5 * np.arange(12))
        A = max(8, count // 12)
        th = 2.0 * math.pi * np.arange(A) / A
        deltas = (levels[:, None] * np.exp(1j * th)[None, :]).reshape(-1, 1)
    else:
        levels = np.concatenate([[0.0], c * 2.0 ** (-0.75 * np.arange(6))])
        A = max(3, int(round(math.sqrt(count / len(levels) ** 2))))
        th = 2.0 * math.pi * np.arange(A) / A
        r1, t1, r2, t2 = np.meshgrid(levels, th, levels, th, indexing="ij")
        deltas = np.stack([
            (r1 * np.exp(1j * t1)).ravel() / math.sqrt(2.0),
            (r2 * np.exp(1j * t2)).ravel() / math.sqrt(2.0),
        ], axis=1)
    pts_norm = bsys.base_point_norm + deltas
    r = np.atleast_1d(defining_function(bsys.domain, bsys.from_normalized(pts_norm)))
    return pts_norm[r < -min_r]


def btype_upper_check(domain: DomainModel, bsys: BSystem,
                      sample_count: int = 400) -> float:
    """Max sampled |K(z', w')| / prod_j b_j(z', w')^2 over the c-neighborhood."""
    pts_norm = _neighborhood_samples(bsys, sample_count)
    pts_norm = np.concatenate([bsys.base_point_norm.reshape(1, -1), pts_norm])
    kernel = kernel_row(domain, bsys.base_point, bsys.from_normalized(pts_norm))
    best = 0.0
    for w_norm, kval in zip(pts_norm, kernel):
        b = b_functions(bsys, w_norm)
        best = max(best, abs(kval) / float(np.prod(b) ** 2))
    return best


@dataclass(frozen=True)
class SharpDiagonalCheck:
    ratio_min: float
    ratio_max: float
    ratios: np.ndarray

    @property
    def band(self) -> float:
        return self.ratio_max / self.ratio_min


def sharp_diagonal_check(domain: DomainModel, points) -> SharpDiagonalCheck:
    """min/max of K(z,z) / prod_j b_j(z,z)^2 over a ray of base points."""
    pts = np.asarray(points, dtype=np.complex128)
    ratios = np.empty(pts.shape[0])
    for i, z in enumerate(pts):
        bsys = build_bsystem(domain, z)
        kdiag = float(kernel_diag(domain, z.reshape(1, -1))[0])
        ratios[i] = kdiag / float(np.prod(diagonal_b(bsys)) ** 2)
    if np.any(ratios <= 0.0) or not np.all(np.isfinite(ratios)):
        raise ValueError("diagonal comparability ratio must be positive finite")
    return SharpDiagonalCheck(float(ratios.min()), float(ratios.max()), ratios)


def kernel_domination_check(domain: DomainModel, bsys: BSystem,
                            sample_count: int = 400) -> float:
    """Max sampled |K(z,w)| / [K(z,z) (|r(z)| / (|r(z)| + |r(w)|))^2].

    The ratio equals 4 exactly at w = z; the check reports the sampled max
    over the c-neighborhood.
    """
    pts_norm = _neighborhood_samples(bsys, sample_count)
    pts_norm = np.concatenate([bsys.base_point_norm.reshape(1, -1), pts_norm])
    pts = bsys.from_normalized(pts_norm)
    kernel = kernel_row(domain, bsys.base_point, pts)
    kdiag = float(kernel_diag(domain, bsys.base_point.reshape(1, -1))[0])
    r_w = np.abs(np.atleast_1d(defining_function(domain, pts)))
    bound = kdiag * (bsys.r_abs / (bsys.r_abs + r_w)) ** 2
    return float(np.max(np.abs(kernel) / bound))


def comparability_on_polydisc(domain: DomainModel, bsys: BSystem, lam: float,
                              sample_count: int = 512, seed: int = 0) -> float:
    """Max sampled K(w,w) / K(z,z) over the polydisc; containment comes first."""
    check = polydisc_containment_check(domain, bsys, lam)
    if not check.contained:
        raise ValueError(f"polydisc not contained (margin {check.margin:g}); "
                         "shrink lam before comparing kernels")
    pdisc = polydisc(bsys, lam)
    rng = np.random.default_rng(seed)
    pts_norm = polydisc_interior_samples(pdisc, sample_count, rng)
    pts_norm = np.concatenate([polydisc_boundary_samples(pdisc, angles=16), pts_norm])
    pts = bsys.from_normalized(pts_norm)
    r = np.atleast_1d(defining_function(domain, pts))
    pts = pts[r < -R_FLOOR]
    kdiag_w = kernel_diag(domain, pts)
    kdiag_z = float(kernel_diag(domain, bsys.base_point.reshape(1, -1))[0])
    return float(np.max(kdiag_w) / kdiag_z)

import math

import numpy as np
import pytest
from scipy import integrate

from bergmanlab.domains import (
    BoundaryProximityError,
    KernelStrategy,
    SeriesTruncationError,
    bergman_kernel,
    defining_function,
    diagonal_growth_exponent,
    domain_from_id,
    egg,
    kernel_diag,
    kernel_matrix,
    kernel_row,
    monomial_norms,
    nearest_boundary_point,
    offdiagonal_sup,
    ray_points,
    squared_monomial_norm,
    unit_ball2,
    unit_disc,
    volume,
)

DISC = unit_disc()
BALL = unit_ball2()
EGG2 = egg(2)


def interior_samples(domain, count, rng, min_r=1e-6):
    """Rejection-sample interior points with |r| >= min_r."""
    pts = []
    while len(pts) < count:
        cand = rng.uniform(-1, 1, (4 * count, domain.n)) \
            + 1j * rng.uniform(-1, 1, (4 * count, domain.n))
        r = defining_function(domain, cand)
        keep = cand[r < -min_r]
        pts.extend(list(keep))
    return np.array(pts[:count])


class TestDefiningFunction:
    def test_disc_center(self):
        assert defining_function(DISC, [0.0]) == -1.0

    def test_egg_boundary_point(self):
        assert defining_function(EGG2, [0.0, 1.0]) == 0.0

    def test_ball_direct_arithmetic(self):
        z = np.array([0.6, 0.8 * 0.999])
        val = defining_function(BALL, z)
        assert val == pytest.approx(0.36 + 0.7992 ** 2 - 1.0, abs=1e-15)
        assert val == pytest.approx(-0.00128, abs=5e-6)

    def test_interior_negative_boundary_zero(self):
        rng = np.random.default_rng(0)
        for dom in (DISC, BALL, EGG2):
            pts = interior_samples(dom, 50, rng)
            assert np.all(defining_function(dom, pts) < 0)
            for z in pts:
                p = nearest_boundary_point(dom, z)
                assert defining_function(dom, p) == pytest.approx(0.0, abs=1e-12)

    def test_radial_monotonicity(self):
        rng = np.random.default_rng(1)
        for dom in (DISC, BALL, EGG2):
            pts = interior_samples(dom, 20, rng)
            for z in pts:
                scales = np.linspace(0.1, 1.0, 10)
                vals = [defining_function(dom, s * z) for s in scales]
                assert np.all(np.diff(vals) >= -1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            defining_function(BALL, [0.5])


class TestMonomialNorms:
    def test_disc_constant_is_area(self):
        assert squared_monomial_norm(DISC, (0,)) == pytest.approx(math.pi, rel=1e-15)

    def test_disc_degree_three(self):
        # int |z|^6 dV = 2 pi int_0^1 r^7 dr = pi / 4
        assert squared_monomial_norm(DISC, (3,)) == pytest.approx(math.pi / 4, rel=1e-15)

    def test_disc_general_formula(self):
        table = monomial_norms(DISC, 12)
        for k in range(13):
            assert table.norm_sq((k,)) == pytest.approx(math.pi / (k + 1), rel=1e-14)

    def test_egg_volume_entry(self):
        # volume of {|z1|^2 + |z2|^4 < 1} is 2 pi^2 / 3
        assert squared_monomial_norm(EGG2, (0, 0)) == pytest.approx(2 * math.pi ** 2 / 3, rel=1e-13)
        assert volume(EGG2) == pytest.approx(2 * math.pi ** 2 / 3, rel=1e-15)

    @pytest.mark.parametrize("dom,alpha", [
        (DISC, (5,)),
        (BALL, (2, 3)),
        (EGG2, (0, 0)),
        (EGG2, (1, 2)),
        (EGG2, (3, 1)),
    ])
    def test_numeric_quadrature_oracle(self, dom, alpha):
        # independent radial quadrature of int |z^alpha|^2 dV (angular factors
        # are exactly (2 pi)^n for monomials)
        if dom.n == 1:
            val, _ = integrate.quad(lambda r: r ** (2 * alpha[0] + 1), 0.0, 1.0,
                                    epsabs=1e-14, epsrel=1e-13)
            oracle = 2 * math.pi * val
        else:
            k1, k2 = alpha
            mm = dom.m
            val, _ = integrate.dblquad(
                lambda r1, r2: r1 ** (2 * k1 + 1) * r2 ** (2 * k2 + 1),
                0.0, 1.0,
                lambda r2: 0.0,
                lambda r2: math.sqrt(max(0.0, 1.0 - r2 ** (2 * mm))),
                epsabs=1e-13, epsrel=1e-12)
            oracle = (2 * math.pi) ** 2 * val
        assert squared_monomial_norm(dom, alpha) == pytest.approx(oracle, rel=1e-8)

    def test_all_entries_positive_finite(self):
        for dom in (DISC, BALL, EGG2):
            table = monomial_norms(dom, 8)
            vals = np.array(list(table.entries.values()))
            assert np.all(vals > 0) and np.all(np.isfinite(vals))

    def test_table_cap(self):
        with pytest.raises(ValueError, match="cap"):
            monomial_norms(BALL, 2000, table_cap=10_000)


class TestBergmanKernel:
    def test_disc_center(self):
        assert bergman_kernel(DISC, [0.0], [0.0]) == pytest.approx(1 / math.pi, rel=1e-14)

    def test_disc_center_series_oracle(self):
        dom = unit_disc(KernelStrategy.MONOMIAL_SERIES)
        assert bergman_kernel(dom, [0.0], [0.0]) == pytest.approx(1 / math.pi, rel=1e-12)

    def test_ball_center(self):
        assert bergman_kernel(BALL, [0, 0], [0, 0]) == pytest.approx(2 / math.pi ** 2, rel=1e-14)

    def test_disc_antipodal(self):
        val = bergman_kernel(DISC, [0.9], [-0.9])
        assert val == pytest.approx(1.0 / (math.pi * 1.81 ** 2), rel=1e-14)
        assert val == pytest.approx(0.09717, rel=1e-4)

    def test_center_value_is_reciprocal_volume(self):
        for dom in (DISC, BALL, EGG2):
            z = np.zeros(dom.n)
            assert bergman_kernel(dom, z, z) == pytest.approx(1.0 / volume(dom), rel=1e-13)

    @pytest.mark.parametrize("dom", [DISC, BALL, EGG2])
    def test_series_matches_closed_form(self, dom):
        series_dom = domain_from_id(dom.id, KernelStrategy.MONOMIAL_SERIES)
        rng = np.random.default_rng(7)
        pts = interior_samples(dom, 24, rng, min_r=0.35)
        for i in range(0, 24, 2):
            z, w = pts[i], pts[i + 1]
            closed = bergman_kernel(dom, z, w)
            series = bergman_kernel(series_dom, z, w)
            assert abs(series - closed) <= 1e-7 * abs(closed) + 1e-14

    def test_hermitian_symmetry_closed_form(self):
        rng = np.random.default_rng(11)
        for dom in (DISC, BALL, EGG2):
            pts = interior_samples(dom, 2000, rng)
            Z, W = pts[:1000], pts[1000:]
            a = kernel_row(dom, Z, W) if False else np.array(
                [bergman_kernel(dom, z, w) for z, w in zip(Z[:100], W[:100])])
            b = np.array([bergman_kernel(dom, w, z) for z, w in zip(Z[:100], W[:100])])
            assert np.all(np.abs(a - np.conj(b)) <= 1e-12 * np.abs(a))

    def test_diag_positive_and_monotone_along_ray(self):
        for dom in (DISC, BALL, EGG2):
            direction = np.full(dom.n, 0.6)
            scales = np.linspace(0.05, 0.95, 12)
            p = nearest_boundary_point(dom, direction)
            vals = [float(kernel_diag(dom, (s * p).reshape(1, -1))[0]) for s in scales]
            assert all(v > 0 for v in vals)
            assert np.all(np.diff(vals) > 0)

    def test_series_truncation_error_near_boundary(self):
        dom = egg(2, KernelStrategy.MONOMIAL_SERIES)
        z = np.array([0.7071, 0.840895]) * 0.99999  # near a strongly pseudoconvex point
        with pytest.raises(SeriesTruncationError):
            bergman_kernel(dom, z, z)

    def test_boundary_proximity_error(self):
        with pytest.raises(BoundaryProximityError):
            bergman_kernel(DISC, [1.0 - 1e-10], [0.0])
        with pytest.raises(BoundaryProximityError):
            bergman_kernel(DISC, [1.5], [0.0])

    def test_kernel_row_matches_scalar(self):
        rng = np.random.default_rng(3)
        for dom in (DISC, BALL, EGG2):
            pts = interior_samples(dom, 8, rng)
            z = pts[0]
            row = kernel_row(dom, z, pts)
            for j in range(8):
                assert row[j] == pytest.approx(bergman_kernel(dom, z, pts[j]), rel=1e-13)

    def test_kernel_matrix_blocks(self):
        rng = np.random.default_rng(4)
        pts = interior_samples(DISC, 10, rng)
        mat = kernel_matrix(DISC, pts, pts, block=3)
        for i in range(10):
            assert np.allclose(mat[i], kernel_row(DISC, pts[i], pts))


class TestOffdiagonalSup:
    def test_disc_separation_one_finite_stable(self):
        coarse = offdiagonal_sup(DISC, 1.0, sample_count=48)
        fine = offdiagonal_sup(DISC, 1.0, sample_count=96)
        assert 0 < coarse < np.inf
        assert abs(fine - coarse) <= 0.10 * fine

    def test_disc_near_diameter(self):
        # sup approached along antipodal boundary pairs: 1/(pi (1+rho^2)^2) -> 1/(4 pi)
        val = offdiagonal_sup(DISC, 1.99, sample_count=96)
        assert val == pytest.approx(1.0 / (4 * math.pi), rel=0.05)

    def test_separation_beyond_diameter_empty(self):
        assert offdiagonal_sup(DISC, 5.0, sample_count=16) == 0.0


class TestRaysAndFits:
    def test_ray_points_hit_requested_depths(self):
        deltas = [1e-1, 1e-2, 1e-3, 1e-4]
        for dom in (DISC, BALL, EGG2):
            pts = ray_points(dom, np.ones(dom.n), deltas)
            r = np.abs(defining_function(dom, pts))
            assert np.allclose(r, deltas, rtol=1e-10)

    def test_fefferman_exponents(self):
        deltas = np.geomspace(1e-4, 1e-1, 12)
        assert diagonal_growth_exponent(DISC, [1.0], deltas) == pytest.approx(-2.0, abs=0.05)
        assert diagonal_growth_exponent(BALL, [1.0, 0.0], deltas) == pytest.approx(-3.0, abs=0.05)

    def test_egg_weak_ray_exponent(self):
        deltas = np.geomspace(1e-4, 1e-1, 12)
        slope = diagonal_growth_exponent(EGG2, [1.0, 0.0], deltas)
        assert slope == pytest.approx(-2.5, abs=0.10)

    def test_egg_strong_ray_exponent(self):
        deltas = np.geomspace(1e-5, 1e-3, 10)
        p = np.array([math.sqrt(0.5), 0.5 ** 0.25])
        slope = diagonal_growth_exponent(EGG2, p, deltas)
        assert slope == pytest.approx(-3.0, abs=0.1)

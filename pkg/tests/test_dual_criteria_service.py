import math

import numpy as np
import pytest

from systolic.models.errors import CapacityError
from systolic.models.schemas import GramMatrix, LatticeBasis


class TestFootprint:
    def test_rank_one(self, dual_service):
        footprint = dual_service.short_vector_footprint(GramMatrix.from_rows([[1]]))
        np.testing.assert_array_equal(footprint, [[1.0], [1.0]])

    def test_hexagonal(self, dual_service, hexagonal):
        footprint = dual_service.short_vector_footprint(hexagonal)
        assert footprint.shape == (6, 2)
        lengths = np.linalg.norm(footprint, axis=1)
        np.testing.assert_allclose(lengths[:3], 1.0, rtol=1e-14)
        np.testing.assert_allclose(lengths[3:], 2 / math.sqrt(3), rtol=1e-14)

    def test_square_coincident(self, dual_service, identity):
        footprint = dual_service.short_vector_footprint(identity(2))
        assert footprint.shape == (4, 2)
        np.testing.assert_allclose(footprint[:2], footprint[2:])

    def test_dual_vectors_pair_integrally(self, dual_service, lattice_service, fcc):
        # embedded primal and dual vectors have integer inner products
        footprint = dual_service.short_vector_footprint(fcc)
        primal, dual = footprint[:6], footprint[6:]
        products = primal @ dual.T
        np.testing.assert_allclose(products, np.rint(products), atol=1e-12)


class TestDualPerfection:
    @pytest.mark.parametrize("rows", [[[1]], [[1, "1/2"], ["1/2", 1]], [[2, 1, 1], [1, 2, 1], [1, 1, 2]]])
    def test_dual_perfect_exact(self, dual_service, rows):
        report = dual_service.is_dual_perfect(GramMatrix.from_rows(rows, exact=True))
        assert report.is_dual_perfect
        assert report.span_dim == report.target_dim

    @pytest.mark.parametrize("b", [2, 3])
    def test_square_not_dual_perfect(self, dual_service, identity, b):
        report = dual_service.is_dual_perfect(identity(b, exact=True))
        assert not report.is_dual_perfect
        assert report.span_dim == b
        assert report.target_dim == b * (b + 1) // 2

    def test_float_path_agrees(self, dual_service, fcc, identity):
        assert dual_service.is_dual_perfect(fcc).is_dual_perfect
        assert not dual_service.is_dual_perfect(identity(3)).is_dual_perfect

    @pytest.mark.parametrize("exact", [False, True])
    def test_span_invariant_under_change_of_basis(self, dual_service, fcc, fcc_exact, exact):
        gram = fcc_exact if exact else fcc
        moved = gram.transformed(np.array([[1, 1, 0], [0, 1, 2], [0, 0, 1]]))
        before = dual_service.is_dual_perfect(gram)
        after = dual_service.is_dual_perfect(moved)
        assert (after.span_dim, after.footprint_size) == (before.span_dim, before.footprint_size)

    def test_span_invariant_under_rotation(self, dual_service, lattice_service):
        angle = 0.7
        rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        basis = np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]])
        rotated = lattice_service.gram_from_basis(LatticeBasis(columns=rotation @ basis))
        reference = lattice_service.gram_from_basis(LatticeBasis(columns=basis))
        for gram in (reference, rotated):
            report = dual_service.is_dual_perfect(gram)
            assert report.span_dim == 3 and report.footprint_size == 6
        np.testing.assert_allclose(np.sort(np.linalg.norm(dual_service.short_vector_footprint(rotated), axis=1)),
                                   np.sort(np.linalg.norm(dual_service.short_vector_footprint(reference), axis=1)),
                                   rtol=1e-12)


class TestCertificate:
    def test_hexagonal_critical(self, dual_service, hexagonal_exact):
        certificate = dual_service.certify_against_known(hexagonal_exact)
        assert certificate.verdict == "critical-within-tol"
        assert abs(certificate.gap) <= 1e-12

    def test_fcc_critical(self, dual_service, fcc):
        assert dual_service.certify_against_known(fcc).verdict == "critical-within-tol"

    def test_square_suboptimal(self, dual_service, identity):
        certificate = dual_service.certify_against_known(identity(2))
        assert certificate.verdict == "suboptimal"
        assert certificate.gap == pytest.approx(2 / math.sqrt(3) - 1, rel=1e-12)

    def test_unknown_dimension(self, dual_service, identity):
        certificate = dual_service.certify_against_known(identity(4))
        assert certificate.verdict == "unknown-dimension"
        assert certificate.gap is None and certificate.known_constant is None


class TestIsoduality:
    def test_square(self, dual_service, identity):
        assert dual_service.is_isodual(identity(2)).is_isodual

    def test_hexagonal(self, dual_service, hexagonal, lattice_service):
        report = dual_service.is_isodual(hexagonal)
        assert report.is_isodual
        target = lattice_service.dual_gram(hexagonal).scaled(report.scale).entries
        u = report.transform
        np.testing.assert_allclose(u.T @ target @ u, hexagonal.entries, atol=1e-12)

    def test_fcc_not_isodual(self, dual_service, fcc):
        assert not dual_service.is_isodual(fcc).is_isodual

    def test_capacity(self, dual_service, identity):
        with pytest.raises(CapacityError):
            dual_service.is_isodual(identity(5))

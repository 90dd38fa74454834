import math

import numpy as np
import pytest
from scipy.special import i0

from systolic.models.errors import DegenerateLatticeError, DomainError, ReconstructionError, ResolutionError
from systolic.models.schemas import DiscreteOneForm, FlatTorus, GramMatrix

SQUARE = np.eye(2)
HEXAGONAL = np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]])
LOEWNER = 2.0 / math.sqrt(3.0)


def bump(x, y):
    return 0.2 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


def seeded_potential(seed: int, amplitude: float = 0.2):
    rng = np.random.default_rng(seed)
    k1, k2 = rng.integers(-2, 3, size=2)
    if k1 == 0 and k2 == 0:
        k1 = 1
    theta = rng.uniform(0, 2 * np.pi)

    def phi(x, y):
        return amplitude * np.sin(2 * np.pi * (k1 * x + k2 * y) + theta)

    return phi


class TestMesh:
    def test_counts_and_area(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (64, 192, 128)
        assert mesh.area == pytest.approx(1.0, abs=1e-14)

    def test_hexagonal_area(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 16)
        assert abs(mesh.area - math.sqrt(3) / 2) <= 1e-12

    def test_conformal_area(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 16, lambda x, y: 0.2 * np.sin(2 * np.pi * x))
        assert mesh.area > 1.0
        assert mesh.area == pytest.approx(i0(0.4), abs=1e-10)
        assert np.all(mesh.conformal_factor > 0)

    def test_resolution(self, hodge_service):
        with pytest.raises(ResolutionError):
            hodge_service.build_torus_mesh(SQUARE, 7)

    def test_singular_lattice(self, hodge_service):
        with pytest.raises(DegenerateLatticeError):
            hodge_service.build_torus_mesh([[1, 2], [2, 4]], 8)

    def test_non_finite_metric(self, hodge_service):
        def broken(s, t):
            g = np.broadcast_to(np.eye(2), (len(s), 2, 2)).copy()
            g[0] = np.nan
            return g

        with pytest.raises(DegenerateLatticeError):
            hodge_service.build_mesh_from_metric(SQUARE, 8, broken)

    def test_boundary_of_boundary(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        ops = hodge_service.operators(mesh)
        assert abs(ops.d1 @ ops.d0).max() == 0


class TestForms:
    def test_reference_forms(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        assert not np.any(hodge_service.closed_reference_form(mesh, (0, 0)).edge_values)
        dx = hodge_service.closed_reference_form(mesh, (1, 0))
        np.testing.assert_array_equal(dx.edge_values, mesh.edge_displacements[:, 0])
        mixed = hodge_service.closed_reference_form(mesh, (2, -1))
        assert np.max(np.abs(hodge_service.exterior_derivative(mesh, mixed))) <= 1e-12
        assert hodge_service.periods(mesh, mixed) == pytest.approx((2.0, -1.0), abs=1e-12)

    def test_flat_harmonic_is_constant(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 16)
        harmonic = hodge_service.harmonic_representative(mesh, (1, 0))
        reference = hodge_service.closed_reference_form(mesh, (1, 0))
        np.testing.assert_allclose(harmonic.edge_values, reference.edge_values, atol=1e-12)
        assert hodge_service.check_constant_norm(mesh, harmonic, 1e-12).is_constant

    def test_perturbed_harmonic(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 32, bump)
        harmonic = hodge_service.harmonic_representative(mesh, (1, 0))
        assert np.max(np.abs(hodge_service.codifferential(mesh, harmonic))) <= 1e-10
        assert hodge_service.periods(mesh, harmonic) == pytest.approx((1.0, 0.0), abs=1e-10)
        assert not hodge_service.check_constant_norm(mesh, harmonic, 1e-3).is_constant

    def test_zero_class(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8, bump)
        assert not np.any(hodge_service.harmonic_representative(mesh, (0, 0)).edge_values)

    def test_harmonic_minimizes_energy(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 16, bump)
        harmonic = hodge_service.harmonic_representative(mesh, (1, 1))
        best = hodge_service.lp_norm(mesh, harmonic, 2)
        rng = np.random.default_rng(0)
        for _ in range(100):
            other = hodge_service.add_exact(mesh, harmonic, rng.normal(0.0, 0.05, mesh.n_vertices))
            assert best <= hodge_service.lp_norm(mesh, other, 2) + 1e-14


class TestNorms:
    def test_zero_form(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        zero = DiscreteOneForm(edge_values=np.zeros(mesh.n_edges))
        for p in (1, 2, math.inf):
            assert hodge_service.lp_norm(mesh, zero, p) == 0.0

    def test_constant_form_all_exponents(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        dx = hodge_service.closed_reference_form(mesh, (1, 0))
        for p in (1, 2, 3.5, 4, math.inf):
            assert hodge_service.lp_norm(mesh, dx, p) == pytest.approx(1.0, abs=1e-12)

    def test_l2_matches_quadratic_form(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 16, bump)
        rng = np.random.default_rng(1)
        form = hodge_service.add_exact(mesh, hodge_service.closed_reference_form(mesh, (3, -2)),
                                       rng.normal(size=mesh.n_vertices))
        assert hodge_service.lp_norm(mesh, form, 2) ** 2 == pytest.approx(
            hodge_service.l2_energy(mesh, form), rel=1e-12)

    def test_non_closed_data(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        noise = DiscreteOneForm(edge_values=np.random.default_rng(2).normal(size=mesh.n_edges))
        with pytest.raises(ReconstructionError):
            hodge_service.lp_norm(mesh, noise, 2)

    @pytest.mark.parametrize("p", [0.5, -1.0, float("nan")])
    def test_exponent_domain(self, hodge_service, p):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        with pytest.raises(DomainError):
            hodge_service.lp_norm(mesh, hodge_service.closed_reference_form(mesh, (1, 0)), p)


class TestHolderChain:
    def test_flat_constant(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 32)
        table = hodge_service.holder_chain(mesh, (1, 0), [1, 2, 4, math.inf])
        values = list(table.entries.values())
        assert max(values) - min(values) <= 1e-10
        assert table.monotone
        assert table.upper_bound_labels == ["1", "4", "inf"]

    def test_seeded_perturbations_monotone(self, hodge_service):
        for seed in range(10):
            mesh = hodge_service.build_torus_mesh(SQUARE, 32, seeded_potential(seed))
            table = hodge_service.holder_chain(mesh, (1, 0), [2, 4, math.inf])
            values = [table.entries[label] for label in ("2", "4", "inf")]
            assert all(b - a >= -1e-8 for a, b in zip(values, values[1:]))
            assert table.monotone

    def test_margin_grows_with_amplitude(self, hodge_service):
        margins = []
        for amplitude in (0.05, 0.1, 0.2):
            mesh = hodge_service.build_torus_mesh(
                SQUARE, 32, lambda x, y, a=amplitude: a * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))
            table = hodge_service.holder_chain(mesh, (1, 0), [2, math.inf])
            margins.append(table.entries["inf"] - table.entries["2"])
        assert 0 < margins[0] < margins[1] < margins[2]

    def test_minimized_entries(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 16, bump)
        harmonic = hodge_service.holder_chain(mesh, (1, 0), [2, 4, math.inf])
        minimized = hodge_service.holder_chain(mesh, (1, 0), [2, 4, math.inf], minimize=True)
        assert minimized.minimized_labels == ["4"]
        assert minimized.upper_bound_labels == ["inf"]
        assert minimized.entries["4"] <= harmonic.entries["4"] + 1e-12
        assert minimized.entries["4"] >= minimized.entries["2"] - 1e-8
        assert minimized.monotone

    def test_minimizer_domain(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        with pytest.raises(DomainError):
            hodge_service.lp_minimizer(mesh, (1, 0), 2)

    def test_minimizer_zero_class(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8, bump)
        minimized = hodge_service.lp_minimizer(mesh, (0, 0), 4)
        assert not np.any(minimized.edge_values)

    @pytest.mark.parametrize("klass, exponents", [((0, 0), [2, 4]), ((1, 0), [4, 2]), ((1, 0), [1, 4])])
    def test_preconditions(self, hodge_service, klass, exponents):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        with pytest.raises(DomainError):
            hodge_service.holder_chain(mesh, klass, exponents)


class TestLoops:
    def test_square(self, hodge_service):
        loop = hodge_service.shortest_loop(hodge_service.build_torus_mesh(SQUARE, 16))
        assert loop.length == pytest.approx(1.0, abs=1e-12)
        assert loop.period in {(1, 0), (0, 1), (-1, 0), (0, -1)}

    def test_hexagonal_matches_lambda1(self, hodge_service, lattice_service):
        loop = hodge_service.shortest_loop(hodge_service.build_torus_mesh(HEXAGONAL, 16))
        lambda1 = lattice_service.shortest_vectors(GramMatrix(entries=HEXAGONAL.T @ HEXAGONAL)).lambda1
        assert loop.length == pytest.approx(lambda1, abs=1e-12)

    def test_bump_away_from_loop(self, hodge_service):
        def localized(x, y):
            return 0.5 * np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.005)

        loop = hodge_service.shortest_loop(hodge_service.build_torus_mesh(SQUARE, 32, localized))
        assert loop.length == pytest.approx(1.0, abs=1e-9)

    def test_in_class(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 16)
        fiber = hodge_service.shortest_loop_in_class(mesh, (0, 1))
        assert fiber.length == pytest.approx(1.0, abs=1e-12)
        assert fiber.period == (0, 1)
        diagonal = hodge_service.shortest_loop_in_class(mesh, (2, 1))
        assert diagonal.period == (2, 1)
        assert math.sqrt(5) <= diagonal.length <= 1 + math.sqrt(2) + 1e-12

    def test_in_class_rejects_zero(self, hodge_service):
        with pytest.raises(DomainError):
            hodge_service.shortest_loop_in_class(hodge_service.build_torus_mesh(SQUARE, 8), (0, 0))


class TestLoewner:
    def test_square(self, hodge_service):
        report = hodge_service.loewner_check(hodge_service.build_torus_mesh(SQUARE, 16))
        assert report.ratio == pytest.approx(1.0, abs=1e-12)
        assert report.passed

    def test_hexagonal_equality(self, hodge_service):
        report = hodge_service.loewner_check(hodge_service.build_torus_mesh(HEXAGONAL, 64))
        assert LOEWNER * 0.98 <= report.ratio <= LOEWNER * 1.02
        assert report.passed

    @pytest.mark.slow
    def test_hexagonal_refinement(self, hodge_service):
        coarse = hodge_service.loewner_check(hodge_service.build_torus_mesh(HEXAGONAL, 64))
        fine = hodge_service.loewner_check(hodge_service.build_torus_mesh(HEXAGONAL, 128))
        assert abs(fine.ratio - LOEWNER) <= abs(coarse.ratio - LOEWNER) + 1e-9

    def test_perturbed_hexagonal_strict(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 32, lambda x, y: 0.2 * np.sin(2 * np.pi * (y + 0.3)))
        assert hodge_service.loewner_check(mesh).ratio < LOEWNER

    def test_refinement_toward_continuum(self, hodge_service):
        def phi(x, y):
            return -0.2 * np.cos(2 * np.pi * y)

        continuum = math.exp(-0.4) / i0(0.4)
        deviations = [abs(hodge_service.loewner_check(hodge_service.build_torus_mesh(SQUARE, n, phi)).ratio - continuum)
                      for n in (16, 32)]
        assert deviations[1] <= deviations[0] + 1e-9


class TestConformalSystole:
    def test_square(self, hodge_service):
        assert hodge_service.confsys_estimate(hodge_service.build_torus_mesh(SQUARE, 8)) == pytest.approx(1.0, abs=1e-10)

    def test_matches_flat_torus(self, hodge_service, torus_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 32)
        flat = torus_service.torus_systoles(FlatTorus.from_gram(GramMatrix(entries=HEXAGONAL.T @ HEXAGONAL)))
        assert hodge_service.confsys_estimate(mesh) == pytest.approx(flat.confsys1, rel=1e-10)

    def test_conformal_invariance(self, hodge_service):
        flat = hodge_service.confsys_estimate(hodge_service.build_torus_mesh(HEXAGONAL, 32))
        for seed in range(10):
            mesh = hodge_service.build_torus_mesh(HEXAGONAL, 32, seeded_potential(seed))
            assert hodge_service.confsys_estimate(mesh) == pytest.approx(flat, rel=1e-8)


class TestConstantNorm:
    def test_zero_form(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(SQUARE, 8)
        with pytest.raises(DomainError):
            hodge_service.check_constant_norm(mesh, DiscreteOneForm(edge_values=np.zeros(mesh.n_edges)), 1e-3)

    def test_flat(self, hodge_service):
        mesh = hodge_service.build_torus_mesh(HEXAGONAL, 16)
        report = hodge_service.check_constant_norm(mesh, hodge_service.harmonic_representative(mesh, (1, 2)), 1e-12)
        assert report.is_constant and report.deviation <= 1e-12

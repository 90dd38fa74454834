import math

import numpy as np
import pytest

from systolic.models.errors import DegenerateLatticeError, DomainError
from systolic.models.schemas import GramMatrix, OptimizerConfig
from systolic.services.bm_optimizer_service import HERMITE_CONSTANTS, BmOptimizerService, unit_determinant

TARGETS = {2: 2 / math.sqrt(3), 3: math.sqrt(1.5)}


def test_unit_determinant():
    scaled = unit_determinant(np.diag([2.0, 8.0]))
    assert np.linalg.det(scaled) == pytest.approx(1.0)
    assert unit_determinant(np.diag([1.0, -1.0])) is None


class TestPerturbAscend:
    def test_history_monotone_and_unimodular(self, optimizer_service, identity):
        config = OptimizerConfig(max_iters=200, seed=1)
        trace = optimizer_service.perturb_ascend(identity(2), config)
        values = [value for _, value in trace.history]
        assert values == sorted(values)
        assert trace.best_gram.determinant == pytest.approx(1.0, abs=1e-9)
        assert trace.best_value >= 1.0
        assert trace.best_value <= TARGETS[2] + 1e-9

    def test_deterministic(self, optimizer_service, identity):
        config = OptimizerConfig(max_iters=100, seed=42)
        first = optimizer_service.perturb_ascend(identity(2), config)
        second = optimizer_service.perturb_ascend(identity(2), config)
        assert first.best_value == second.best_value
        np.testing.assert_array_equal(first.best_gram.entries, second.best_gram.entries)

    def test_already_optimal_start(self, optimizer_service, hexagonal):
        trace = optimizer_service.perturb_ascend(GramMatrix(entries=unit_determinant(hexagonal.entries)),
                                                 OptimizerConfig(max_iters=100))
        assert trace.best_value == pytest.approx(TARGETS[2], abs=1e-9)


class TestRestarts:
    @pytest.mark.parametrize("b", [0, 7])
    def test_dimension_domain(self, optimizer_service, b):
        with pytest.raises(DomainError):
            optimizer_service.run_restarts(b, OptimizerConfig(restarts=1, max_iters=1))

    def test_restarts_indexed_in_order(self, optimizer_service):
        traces = optimizer_service.run_restarts(2, OptimizerConfig(restarts=3, max_iters=50, seed=9))
        assert [trace.restart_index for trace in traces] == [0, 1, 2]

    def test_best_of_restarts(self, optimizer_service):
        config = OptimizerConfig(restarts=3, max_iters=300, seed=4)
        value, gram = optimizer_service.estimate_bm_constant(2, config)
        traces = optimizer_service.run_restarts(2, config)
        assert value == max(trace.best_value for trace in traces)
        assert gram.determinant == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("b", [2, 3])
    def test_recovers_known_constant(self, optimizer_service, b):
        traces = optimizer_service.run_restarts(b, OptimizerConfig(restarts=10, seed=0))
        close = [trace for trace in traces if abs(trace.best_value - TARGETS[b]) <= 1e-3]
        assert len(close) >= 8


class TestBounds:
    def test_critical_values_pass(self, optimizer_service):
        for b, value in TARGETS.items():
            report = optimizer_service.check_bounds(b, value)
            assert report.passed
            assert report.upper_bound == pytest.approx(2 * b / 3)
            assert report.hermite_constant == HERMITE_CONSTANTS[b]
            assert report.within_hermite

    def test_above_bound_fails(self, optimizer_service):
        assert not optimizer_service.check_bounds(3, 2.5).passed

    def test_asymptotic_window_informational(self, optimizer_service):
        report = optimizer_service.check_bounds(2, TARGETS[2])
        low, high = report.asymptotic_window
        assert low == pytest.approx(2 / (2 * math.pi * math.e))
        assert high == pytest.approx(2 / (math.pi * math.e))
        assert report.passed and not report.inside_asymptotic_window

    def test_rank_one_refused(self, optimizer_service):
        with pytest.raises(DomainError):
            optimizer_service.check_bounds(1, 1.0)

    def test_no_hermite_value_above_eight(self, optimizer_service):
        report = optimizer_service.check_bounds(9, 3.0)
        assert report.hermite_constant is None and report.within_hermite is None


def test_non_positive_start_rejected(optimizer_service):
    with pytest.raises(DegenerateLatticeError):
        optimizer_service.perturb_ascend(GramMatrix(entries=np.diag([1.0, 1e-300])), OptimizerConfig(max_iters=1))


class TestInvariants:
    def test_every_iterate_feasible(self, lattice_service, identity, monkeypatch):
        service = BmOptimizerService(lattice_service)
        evaluate = service._evaluate
        feasible = []

        def recording(entries):
            result = evaluate(entries)
            if result is not None:
                feasible.append(result[0])
            return result

        monkeypatch.setattr(service, "_evaluate", recording)
        trace = service.perturb_ascend(identity(3), OptimizerConfig(max_iters=150, seed=3))
        assert len(feasible) > 1
        for gram in feasible + [trace.best_gram]:
            assert np.all(np.linalg.eigvalsh(gram.entries) > 0)
            assert abs(gram.determinant - 1.0) <= 1e-9

    def test_fcc_optimum_stable(self, optimizer_service, fcc):
        start = GramMatrix(entries=unit_determinant(fcc.entries))
        trace = optimizer_service.perturb_ascend(start, OptimizerConfig(max_iters=200, seed=5))
        assert trace.best_value == pytest.approx(TARGETS[3], abs=1e-9)
        assert trace.best_value <= TARGETS[3] + 1e-9

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from systolic.config import get_settings
from systolic.models.errors import DegenerateLatticeError, DomainError, IllConditionedError
from systolic.models.schemas import BoundsReport, GramMatrix, OptimizationTrace, OptimizerConfig
from systolic.services.lattice_service import LatticeService

logger = logging.getLogger(__name__)

# Hermite constants γ_b, known for b ≤ 8
HERMITE_CONSTANTS = {
    1: 1.0,
    2: math.sqrt(4.0 / 3.0),
    3: 2.0 ** (1.0 / 3.0),
    4: math.sqrt(2.0),
    5: 8.0 ** (1.0 / 5.0),
    6: (64.0 / 3.0) ** (1.0 / 6.0),
    7: 64.0 ** (1.0 / 7.0),
    8: 2.0,
}

MAX_OPTIMIZER_DIM = 6


def unit_determinant(entries: np.ndarray) -> Optional[np.ndarray]:
    """Rescale to determinant 1; None when the matrix is not positive definite"""
    det = np.linalg.det(entries)
    if not np.isfinite(det) or det <= 0:
        return None
    return entries / det ** (1.0 / len(entries))


class BmOptimizerService:
    """Random ascent of λ1(L)·λ1(L*) over unit-determinant Gram matrices"""

    def __init__(self, lattice_service: Optional[LatticeService] = None):
        self.settings = get_settings()
        self.lattice = lattice_service or LatticeService()

    def _evaluate(self, entries: np.ndarray) -> Optional[Tuple[GramMatrix, float]]:
        normalized = unit_determinant(entries)
        if normalized is None:
            return None
        try:
            gram = GramMatrix(entries=normalized)
        except DegenerateLatticeError:
            return None
        try:
            return gram, self.lattice.bm_product(gram)
        except IllConditionedError:
            return None

    @staticmethod
    def _direction(rng: np.random.Generator, b: int) -> np.ndarray:
        a = rng.standard_normal((b, b))
        s = 0.5 * (a + a.T)
        return s / np.linalg.norm(s)

    def perturb_ascend(self,
                       start: GramMatrix,
                       config: OptimizerConfig,
                       restart_index: int = 0,
                       rng: Optional[np.random.Generator] = None) -> OptimizationTrace:
        """Accept G + step·S (renormalized to det 1) only when it strictly raises the objective.

        Each random direction is tried with both signs. The step shrinks by
        ``step_decay`` after a rejection and grows by ``step_decay⁻⁴`` after an
        acceptance, capped at ``initial_step``. The run stops early once the
        step falls below ``tolerance``.
        """
        rng = rng or np.random.default_rng([config.seed, restart_index])
        evaluated = self._evaluate(start.entries)
        if evaluated is None:
            raise DegenerateLatticeError("Starting Gram matrix is not positive definite")
        current, best = evaluated
        history = [(0, best)]
        step = config.initial_step
        b = start.dim

        for iteration in range(1, config.max_iters + 1):
            direction = self._direction(rng, b)
            accepted = False
            for sign in (1.0, -1.0):
                candidate = self._evaluate(current.entries + sign * step * direction)
                if candidate is None:
                    continue
                if candidate[1] > best:
                    current, best = candidate
                    history.append((iteration, best))
                    accepted = True
                    break

            if accepted:
                step = min(step / config.step_decay ** 4, config.initial_step)
            else:
                step *= config.step_decay

            if iteration % config.reduce_every == 0:
                current = self.lattice.reduce_basis(current).gram
            if step < config.tolerance:
                logger.debug("Restart %d converged at iteration %d", restart_index, iteration)
                break

        return OptimizationTrace(best_gram=current, best_value=best, history=history,
                                 restart_index=restart_index)

    def random_start(self, b: int, rng: np.random.Generator) -> GramMatrix:
        """LLᵀ for a random lower-triangular L with positive diagonal, scaled to det 1"""
        lower = np.tril(rng.standard_normal((b, b)), -1) + np.diag(np.exp(rng.normal(0.0, 0.3, b)))
        return GramMatrix(entries=unit_determinant(lower @ lower.T))

    def _restart(self, b: int, config: OptimizerConfig, restart_index: int) -> OptimizationTrace:
        rng = np.random.default_rng([config.seed, restart_index])
        start = self.random_start(b, rng)
        trace = self.perturb_ascend(start, config, restart_index=restart_index, rng=rng)
        logger.info("Restart %d finished with value %.12f", restart_index, trace.best_value)
        return trace

    def run_restarts(self, b: int, config: OptimizerConfig) -> List[OptimizationTrace]:
        if not 1 <= b <= MAX_OPTIMIZER_DIM:
            raise DomainError(f"Optimizer supports dimensions 1..{MAX_OPTIMIZER_DIM}, got {b}")
        logger.info("Running %d restarts in dimension %d", config.restarts, b)
        return Parallel(n_jobs=self.settings.THREADS)(
            delayed(self._restart)(b, config, index) for index in range(config.restarts)
        )

    def estimate_bm_constant(self, b: int, config: OptimizerConfig) -> Tuple[float, GramMatrix]:
        """Best value and Gram matrix over all restarts; ties go to the lowest restart index"""
        traces = self.run_restarts(b, config)
        best = max(traces, key=lambda trace: (trace.best_value, -trace.restart_index))
        return best.best_value, best.best_gram

    def check_bounds(self, b: int, value: float) -> BoundsReport:
        """Check value ≤ (2/3)·b; the asymptotic window and γ_b are informational"""
        if b < 2:
            raise DomainError(f"Bounds are stated for b ≥ 2, got {b}")
        upper = 2.0 * b / 3.0
        window = (b / (2 * math.pi * math.e), b / (math.pi * math.e))
        hermite = HERMITE_CONSTANTS.get(b)
        return BoundsReport(
            dim=b,
            value=value,
            upper_bound=upper,
            passed=value <= upper + self.settings.BOUND_TOL,
            asymptotic_window=window,
            inside_asymptotic_window=window[0] <= value <= window[1],
            hermite_constant=hermite,
            within_hermite=None if hermite is None else value <= hermite + self.settings.BOUND_TOL,
        )

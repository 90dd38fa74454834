import logging
import math
from typing import Dict, List, Optional

import numpy as np
import sympy as sp

from systolic.config import get_settings
from systolic.models.errors import CapacityError
from systolic.models.schemas import (
    DualCriticalCertificate,
    GramMatrix,
    IsodualityReport,
    RankOneSpanReport,
)
from systolic.services.lattice_service import LatticeService

logger = logging.getLogger(__name__)

# Known values of λ1(L)·λ1(L*) maximized over rank-b lattices
KNOWN_CONSTANTS: Dict[int, float] = {
    1: 1.0,
    2: 2.0 / math.sqrt(3.0),
    3: math.sqrt(1.5),
}


def symmetric_coordinates(vectors: np.ndarray) -> np.ndarray:
    """Isometric coordinates of the rank-one forms ssᵀ in the space of symmetric matrices"""
    b = vectors.shape[1]
    rows, cols = np.triu_indices(b)
    weights = np.where(rows == cols, 1.0, math.sqrt(2.0))
    return vectors[:, rows] * vectors[:, cols] * weights


class DualCriteriaService:
    """Dual perfection and comparison against the known dual-critical constants"""

    def __init__(self, lattice_service: Optional[LatticeService] = None):
        self.settings = get_settings()
        self.lattice = lattice_service or LatticeService()

    def short_vector_footprint(self, gram: GramMatrix) -> np.ndarray:
        """Short vectors of L and of L*, embedded in one Euclidean space.

        With G = RᵀR, a primal coefficient vector v lands at Rv and a dual
        coefficient vector w at R⁻ᵀw. Rows hold primal vectors first.
        """
        upper = gram.cholesky_upper()
        primal = np.array(self.lattice.shortest_vectors(gram).vectors, dtype=float)
        dual = np.array(self.lattice.shortest_vectors(self.lattice.dual_gram(gram)).vectors, dtype=float)
        embedded_primal = primal @ upper.T
        embedded_dual = np.linalg.solve(upper.T, dual.T).T
        return np.vstack([embedded_primal, embedded_dual])

    def is_dual_perfect(self, gram: GramMatrix) -> RankOneSpanReport:
        """Whether the forms ssᵀ over both short-vector sets span all symmetric forms"""
        b = gram.dim
        target = b * (b + 1) // 2
        if gram.is_exact:
            span, size = self._exact_span(gram)
        else:
            footprint = self.short_vector_footprint(gram)
            size = len(footprint)
            singular = np.linalg.svd(symmetric_coordinates(footprint), compute_uv=False)
            span = int(np.sum(singular > self.settings.RANK_THRESHOLD * singular[0]))
        logger.info("Rank-one span %d of %d from %d short vectors", span, target, size)
        return RankOneSpanReport(span_dim=span, target_dim=target, is_dual_perfect=span == target,
                                 footprint_size=size)

    def _exact_span(self, gram: GramMatrix):
        # X ↦ R⁻¹XR⁻ᵀ maps the embedded forms to vvᵀ and (G⁻¹w)(G⁻¹w)ᵀ, all rational
        inverse = gram.rational.inv()
        primal = [sp.Matrix(v) for v in self.lattice.shortest_vectors(gram).vectors]
        dual = [inverse * sp.Matrix(w)
                for w in self.lattice.shortest_vectors(self.lattice.dual_gram(gram)).vectors]
        b = gram.dim
        rows = []
        for s in primal + dual:
            form = s * s.T
            rows.append([form[i, j] for i in range(b) for j in range(i, b)])
        return sp.Matrix(rows).rank(), len(rows)

    def certify_against_known(self, gram: GramMatrix) -> DualCriticalCertificate:
        """Compare λ1(L)·λ1(L*) with the dual-critical constant of its dimension"""
        value = self.lattice.bm_product(gram)
        tolerance = self.settings.CRITICAL_TOL_EXACT if gram.is_exact else self.settings.CRITICAL_TOL_FLOAT
        known = KNOWN_CONSTANTS.get(gram.dim)
        if known is None:
            return DualCriticalCertificate(bm_value=value, verdict="unknown-dimension", tolerance=tolerance)

        gap = known - value
        if gap < -tolerance:
            logger.warning("λ1·λ1* = %.17g exceeds the known constant %.17g in dimension %d",
                           value, known, gram.dim)
        verdict = "critical-within-tol" if abs(gap) <= tolerance else "suboptimal"
        return DualCriticalCertificate(bm_value=value, known_constant=known, gap=gap, verdict=verdict,
                                       tolerance=tolerance)

    def is_isodual(self, gram: GramMatrix) -> IsodualityReport:
        """Whether L is similar to L*, found by searching for U with Uᵀ(c·G⁻¹)U = G"""
        b = gram.dim
        if b > self.settings.ISODUAL_MAX_DIM:
            raise CapacityError(f"Isoduality search is capped at dimension {self.settings.ISODUAL_MAX_DIM}")

        g = gram.entries
        scale = gram.determinant ** (2.0 / b)
        target = self.lattice.dual_gram(gram).scaled(scale)
        tolerance = 1e-8 * float(np.max(np.abs(g)))

        radius = float(np.max(np.diag(g)))
        pool = [np.array(v) for v, _ in self.lattice.vectors_within(target, radius)]
        candidates: List[List[np.ndarray]] = []
        for i in range(b):
            column = [s * v for v in pool for s in (1, -1)
                      if abs(target.norm_squared(v) - g[i, i]) <= tolerance]
            candidates.append(column)

        chosen: List[np.ndarray] = []

        def extend(i: int) -> bool:
            if i == b:
                return round(abs(np.linalg.det(np.column_stack(chosen)))) == 1
            for v in candidates[i]:
                if all(abs(chosen[j] @ target.entries @ v - g[j, i]) <= tolerance for j in range(i)):
                    chosen.append(v)
                    if extend(i + 1):
                        return True
                    chosen.pop()
            return False

        if extend(0):
            return IsodualityReport(is_isodual=True, scale=scale, transform=np.column_stack(chosen))
        return IsodualityReport(is_isodual=False, scale=scale)

import logging
import math
from typing import Optional, Sequence

import numpy as np

from systolic.config import get_settings
from systolic.models.errors import DomainError
from systolic.models.schemas import FlatTorus, IdentityCheck, InequalityVerdict, SystoleReport
from systolic.services.dual_criteria_service import KNOWN_CONSTANTS
from systolic.services.lattice_service import LatticeService

logger = logging.getLogger(__name__)


class TorusSystoleService:
    """Closed-form systoles of flat tori and the inequalities they satisfy"""

    def __init__(self, lattice_service: Optional[LatticeService] = None):
        self.settings = get_settings()
        self.lattice = lattice_service or LatticeService()

    def dual_torus(self, torus: FlatTorus) -> FlatTorus:
        return FlatTorus.from_gram(self.lattice.dual_gram(torus.gram))

    def torus_systoles(self, torus: FlatTorus) -> SystoleReport:
        """Stable, conformal and codimension-one systoles of ℝⁿ/L.

        For a flat torus the stable 1-systole is λ1(L), the conformal one is
        λ1(L)·vol^(−1/n), and the (n−1)-systole is λ1(L*)·vol.
        """
        n = torus.dim
        volume = torus.volume
        stsys1 = self.lattice.shortest_vectors(torus.gram).lambda1
        dual_lambda1 = self.lattice.shortest_vectors(self.lattice.dual_gram(torus.gram)).lambda1
        confsys1 = stsys1 * volume ** (-1.0 / n)
        sys_nminus1 = dual_lambda1 * volume
        lhs = confsys1 * sys_nminus1

        scale = volume ** ((n - 1.0) / n)
        known = KNOWN_CONSTANTS.get(n)
        rhs = None if known is None else known * scale
        rhs_bound = 2.0 * n / 3.0 * scale if n >= 2 else None
        return SystoleReport(
            dim=n,
            stsys1=stsys1,
            confsys1=confsys1,
            sys_nminus1=sys_nminus1,
            volume=volume,
            lhs=lhs,
            rhs=rhs,
            rhs_bound=rhs_bound,
            equality_gap=None if rhs is None else rhs - lhs,
            bound_only=rhs is None,
        )

    def verify_main_inequality(self, torus: FlatTorus) -> InequalityVerdict:
        """confsys₁·sys_{n−1} ≤ γ'_b·vol^((n−1)/n); falls back to the (2/3)·b bound when γ'_b is unknown"""
        report = self.torus_systoles(torus)
        rhs = report.rhs if report.rhs is not None else report.rhs_bound
        gap = rhs - report.lhs
        passed = report.lhs <= rhs + self.settings.INEQUALITY_TOL
        if not passed:
            logger.error("Main inequality violated: lhs %.17g > rhs %.17g", report.lhs, rhs)
        return InequalityVerdict(passed=passed, lhs=report.lhs, rhs=rhs, gap=gap, relative_gap=gap / rhs,
                                 bound_only=report.bound_only)

    def verify_stable_conformal_relation(self, torus: FlatTorus) -> IdentityCheck:
        """stsys₁ = confsys₁·vol^(1/n), which holds with equality on flat tori"""
        report = self.torus_systoles(torus)
        rhs = report.confsys1 * report.volume ** (1.0 / report.dim)
        return self._identity("stable-conformal", report.stsys1, rhs)

    def hebda_specialization(self, torus: FlatTorus) -> IdentityCheck:
        """stsys₁·sys_{n−1} = vol on a circle ℝ/cℤ"""
        if torus.dim != 1:
            raise DomainError(f"Circle specialization needs b = 1, got {torus.dim}")
        report = self.torus_systoles(torus)
        return self._identity("circle", report.stsys1 * report.sys_nminus1, report.volume)

    def coarea_lower_bound_check(self, torus: FlatTorus, covector: Sequence[int]) -> IdentityCheck:
        """‖α‖_{L²}·vol^(1/2) against ‖PD(α)‖ for an integral class α ∈ L*.

        The harmonic representative of α is constant with pointwise norm
        |α|* = √(αᵀG⁻¹α), so its L² norm is |α|*·vol^(1/2). The Poincaré dual
        is a union of parallel hyperplanes whose total mass is |α|*·vol.
        """
        covector = np.asarray(covector, dtype=float)
        if covector.shape != (torus.dim,):
            raise DomainError(f"Class must have {torus.dim} integer coordinates")
        if not np.any(covector):
            raise DomainError("Class must be nonzero")
        dual = self.lattice.dual_gram(torus.gram)
        pointwise = math.sqrt(dual.norm_squared(covector))
        l2_norm = math.sqrt(pointwise ** 2 * torus.volume)
        lhs = l2_norm * math.sqrt(torus.volume)
        # level sets {α = k} are parallel hyperplanes spaced 1/|α|* apart
        spacing = 1.0 / pointwise
        rhs = torus.volume / spacing
        return self._identity("coarea", lhs, rhs)

    def verify_norm_family(self, torus: FlatTorus, p: float, p_prime: float) -> InequalityVerdict:
        """λ1(H₁, ‖·‖_p)·λ1(H_{n−1}, ‖·‖_{p′}) ≤ γ'_b·vol^(1 − 1/p − 1/p′) for p, p′ ∈ [2, ∞]"""
        if not (2 <= p <= math.inf and 2 <= p_prime <= math.inf):
            raise DomainError("Exponents must lie in [2, ∞]")
        n = torus.dim
        volume = torus.volume
        inverse_p = 0.0 if math.isinf(p) else 1.0 / p
        inverse_q = 0.0 if math.isinf(p_prime) else 1.0 / p_prime
        primal = self.lattice.shortest_vectors(torus.gram).lambda1 * volume ** (-inverse_p)
        dual = self.lattice.shortest_vectors(self.lattice.dual_gram(torus.gram)).lambda1 * volume * volume ** (-inverse_q)
        lhs = primal * dual
        constant = KNOWN_CONSTANTS.get(n, 2.0 * n / 3.0)
        rhs = constant * volume ** (1.0 - inverse_p - inverse_q)
        gap = rhs - lhs
        return InequalityVerdict(passed=lhs <= rhs + self.settings.INEQUALITY_TOL, lhs=lhs, rhs=rhs, gap=gap,
                                 relative_gap=gap / rhs, bound_only=n not in KNOWN_CONSTANTS)

    def _identity(self, name: str, lhs: float, rhs: float) -> IdentityCheck:
        deviation = abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)
        return IdentityCheck(name=name, passed=deviation <= self.settings.IDENTITY_TOL, lhs=lhs, rhs=rhs,
                             deviation=deviation)

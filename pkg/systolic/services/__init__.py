from systolic.services.bm_optimizer_service import BmOptimizerService
from systolic.services.dual_criteria_service import DualCriteriaService
from systolic.services.extremal_construction_service import ExtremalConstructionService
from systolic.services.hodge_service import HodgeService
from systolic.services.lattice_service import LatticeService
from systolic.services.torus_systole_service import TorusSystoleService

__all__ = [
    "BmOptimizerService",
    "DualCriteriaService",
    "ExtremalConstructionService",
    "HodgeService",
    "LatticeService",
    "TorusSystoleService",
]

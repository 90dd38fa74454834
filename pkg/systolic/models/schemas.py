import math
from functools import reduce
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import sympy as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from systolic.models.errors import DegenerateLatticeError, DomainError


def frozen_array(value, dtype=float) -> np.ndarray:
    """Copy into a read-only numpy array"""
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class ArrayModel(BaseModel):
    """Immutable model carrying numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

class GramMatrix(ArrayModel):
    """Symmetric positive-definite matrix of inner products of a lattice basis.

    ``rational`` is the exact counterpart used in exact mode; ``entries`` is
    always present and is the float image of ``rational`` when both exist.
    """
    entries: np.ndarray
    rational: Optional[sp.ImmutableMatrix] = None

    @field_validator("entries", mode="before")
    @classmethod
    def _check_entries(cls, value):
        gram = np.array(value, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] < 1:
            raise DegenerateLatticeError(f"Gram matrix must be square, got shape {gram.shape}")
        if not np.all(np.isfinite(gram)):
            raise DegenerateLatticeError("Gram matrix has non-finite entries")
        scale = max(float(np.max(np.abs(gram))), np.finfo(float).tiny)
        if np.max(np.abs(gram - gram.T)) > 1e-10 * scale:
            raise DegenerateLatticeError("Gram matrix is not symmetric")
        gram = 0.5 * (gram + gram.T)
        try:
            np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise DegenerateLatticeError("Gram matrix is not positive definite")
        return frozen_array(gram)

    @model_validator(mode="after")
    def _check_rational(self):
        if self.rational is not None:
            if self.rational.shape != self.entries.shape:
                raise DegenerateLatticeError("Exact Gram matrix shape does not match")
            if self.rational != self.rational.T:
                raise DegenerateLatticeError("Exact Gram matrix is not symmetric")
        return self

    @classmethod
    def from_rows(cls, rows, exact: bool = False) -> "GramMatrix":
        """Build from nested rows of numbers or decimal strings"""
        if not exact:
            return cls(entries=[[float(x) for x in row] for row in rows])
        rational = sp.ImmutableMatrix([[sp.Rational(str(x)) for x in row] for row in rows])
        return cls(entries=np.array(rational.evalf(30).tolist(), dtype=float), rational=rational)

    @classmethod
    def from_rational(cls, rational) -> "GramMatrix":
        rational = sp.ImmutableMatrix(rational)
        return cls(entries=np.array(rational.evalf(30).tolist(), dtype=float), rational=rational)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.rational is not None

    @property
    def determinant(self) -> float:
        if self.is_exact:
            return float(self.rational.det())
        return float(np.linalg.det(self.entries))

    def cholesky_upper(self) -> np.ndarray:
        """Upper triangular R with G = RᵀR"""
        return np.linalg.cholesky(self.entries).T

    def scaled(self, factor: float) -> "GramMatrix":
        if self.is_exact and isinstance(factor, (int, sp.Rational)):
            return GramMatrix.from_rational(self.rational * factor)
        return GramMatrix(entries=self.entries * float(factor))

    def transformed(self, unimodular: np.ndarray) -> "GramMatrix":
        """Gram of the basis changed by an integer matrix U: UᵀGU"""
        u = np.asarray(unimodular)
        if self.is_exact:
            exact_u = sp.ImmutableMatrix(u.astype(int).tolist())
            return GramMatrix.from_rational(exact_u.T * self.rational * exact_u)
        return GramMatrix(entries=u.T @ self.entries @ u)

    def norm_squared(self, coefficients) -> float:
        v = np.asarray(coefficients, dtype=float)
        return float(v @ self.entries @ v)

    def exact_norm_squared(self, coefficients) -> sp.Rational:
        v = sp.Matrix([int(x) for x in coefficients])
        return (v.T * self.rational * v)[0, 0]


class LatticeBasis(ArrayModel):
    """Basis vectors stored as the columns of a square matrix"""
    columns: np.ndarray
    rational: Optional[sp.ImmutableMatrix] = None

    @field_validator("columns", mode="before")
    @classmethod
    def _check_columns(cls, value):
        basis = np.array(value, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1] or basis.shape[0] < 1:
            raise DegenerateLatticeError(f"Basis must be a square matrix, got shape {basis.shape}")
        if not np.all(np.isfinite(basis)):
            raise DegenerateLatticeError("Basis has non-finite entries")
        return frozen_array(basis)

    @property
    def dim(self) -> int:
        return self.columns.shape[0]


class ShortVectorSet(BaseModel):
    """Minimum of a lattice and its minimal vectors, one per ± pair"""
    lambda1: float = Field(gt=0)
    vectors: List[Tuple[int, ...]]
    radius_used: float = Field(gt=0)
    lambda1_squared_exact: Optional[str] = None

    @model_validator(mode="after")
    def _check_vectors(self):
        if not self.vectors:
            raise DegenerateLatticeError("Short vector set is empty")
        seen = set(self.vectors)
        for vector in self.vectors:
            if reduce(math.gcd, (abs(x) for x in vector)) != 1:
                raise DegenerateLatticeError(f"Short vector {vector} is not primitive")
            if tuple(-x for x in vector) in seen:
                raise DegenerateLatticeError(f"Short vector {vector} listed with both signs")
        return self

    @property
    def count(self) -> int:
        return len(self.vectors)


class ReducedBasis(ArrayModel):
    """Reduced Gram matrix together with the unimodular change of basis"""
    gram: GramMatrix
    transform: np.ndarray

    @field_validator("transform", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value, dtype=np.int64)


# ---------------------------------------------------------------------------
# Dual criteria
# ---------------------------------------------------------------------------

class RankOneSpanReport(BaseModel):
    """Dimension of the span of the rank-one forms ssᵀ over the footprint"""
    span_dim: int = Field(ge=0)
    target_dim: int = Field(ge=1)
    is_dual_perfect: bool
    footprint_size: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_span(self):
        if self.span_dim > self.target_dim:
            raise DegenerateLatticeError("Span dimension exceeds the space of symmetric forms")
        if self.is_dual_perfect != (self.span_dim == self.target_dim):
            raise DegenerateLatticeError("Dual perfection flag disagrees with span dimension")
        return self


Verdict = Literal["critical-within-tol", "suboptimal", "unknown-dimension"]


class DualCriticalCertificate(BaseModel):
    """Comparison of λ1(L)·λ1(L*) against the known constant of its dimension"""
    bm_value: float = Field(gt=0)
    known_constant: Optional[float] = None
    gap: Optional[float] = None
    verdict: Verdict
    tolerance: float

    @model_validator(mode="after")
    def _check_gap(self):
        if (self.gap is None) != (self.known_constant is None):
            raise DomainError("Gap must be reported exactly when a known constant exists")
        if self.verdict == "critical-within-tol" and abs(self.gap) > self.tolerance:
            raise DomainError("Critical verdict requires the gap to be within tolerance")
        return self


class IsodualityReport(ArrayModel):
    """Whether L is similar to its dual, with the witnessing change of basis"""
    is_isodual: bool
    scale: float
    transform: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

class OptimizerConfig(BaseModel):
    """Parameters of the random ascent on unit-determinant Gram matrices"""
    restarts: int = Field(default=10, gt=0)
    max_iters: int = Field(default=3000, gt=0)
    initial_step: float = Field(default=0.2, gt=0)
    step_decay: float = Field(default=0.99, gt=0, lt=1)
    reduce_every: int = Field(default=25, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    tolerance: float = Field(default=1e-9, gt=0)


class OptimizationTrace(BaseModel):
    """Best Gram matrix of one restart with its improvement history"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    best_gram: GramMatrix
    best_value: float
    history: List[Tuple[int, float]]
    restart_index: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_trace(self):
        values = [value for _, value in self.history]
        if any(later < earlier for earlier, later in zip(values, values[1:])):
            raise DomainError("Optimization history is not monotone")
        if abs(self.best_gram.determinant - 1.0) > 1e-9:
            raise DomainError(f"Best Gram has determinant {self.best_gram.determinant}, expected 1")
        return self


class BoundsReport(BaseModel):
    """Upper bound check of an estimated constant with informational windows"""
    dim: int
    value: float
    upper_bound: float
    passed: bool
    asymptotic_window: Tuple[float, float]
    inside_asymptotic_window: bool
    hermite_constant: Optional[float] = None
    within_hermite: Optional[bool] = None


# ---------------------------------------------------------------------------
# Flat tori
# ---------------------------------------------------------------------------

class FlatTorus(BaseModel):
    """Flat torus ℝ^b/L given by the Gram matrix of L"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gram: GramMatrix
    volume: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_volume(self):
        det = self.gram.determinant
        if abs(self.volume ** 2 - det) > 1e-12 * det:
            raise DegenerateLatticeError(f"Torus volume {self.volume} does not match √det = {math.sqrt(det)}")
        return self

    @classmethod
    def from_gram(cls, gram: GramMatrix) -> "FlatTorus":
        return cls(gram=gram, volume=math.sqrt(gram.determinant))

    @property
    def dim(self) -> int:
        return self.gram.dim


class SystoleReport(BaseModel):
    """Systolic quantities of a flat torus"""
    dim: int
    stsys1: float = Field(gt=0)
    confsys1: float = Field(gt=0)
    sys_nminus1: float = Field(gt=0)
    volume: float = Field(gt=0)
    lhs: float = Field(gt=0)
    rhs: Optional[float] = None
    rhs_bound: Optional[float] = None
    equality_gap: Optional[float] = None
    bound_only: bool = False


class InequalityVerdict(BaseModel):
    """Outcome of checking lhs ≤ rhs"""
    passed: bool
    lhs: float
    rhs: float
    gap: float
    relative_gap: float
    bound_only: bool = False


class IdentityCheck(BaseModel):
    """Outcome of checking an identity lhs = rhs"""
    name: str
    passed: bool
    lhs: float
    rhs: float
    deviation: float


# ---------------------------------------------------------------------------
# Meshes and forms
# ---------------------------------------------------------------------------

class TorusMesh(ArrayModel):
    """Triangulated fundamental domain of ℝ²/L with per-face metrics.

    Vertex (i, j) sits at fractional coordinates (i/N, j/N); face metrics are
    expressed in those fractional coordinates, so the flat metric of the
    lattice is its Gram matrix.
    """
    lattice: np.ndarray
    resolution: int
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_displacements: np.ndarray
    face_edges: np.ndarray
    face_edge_signs: np.ndarray
    face_metrics: np.ndarray
    conformal_factor: Optional[np.ndarray] = None

    @field_validator("lattice", "vertices", "edge_displacements", "face_metrics", "conformal_factor", mode="before")
    @classmethod
    def _freeze_float(cls, value):
        return None if value is None else frozen_array(value)

    @field_validator("triangles", "edges", "face_edges", "face_edge_signs", mode="before")
    @classmethod
    def _freeze_int(cls, value):
        return frozen_array(value, dtype=np.int64)

    @model_validator(mode="after")
    def _check_mesh(self):
        n_vertices = len(self.vertices)
        n_edges = len(self.edges)
        n_faces = len(self.triangles)
        if n_vertices - n_edges + n_faces != 0:
            raise DegenerateLatticeError("Mesh Euler characteristic is not zero")
        if np.any(np.bincount(self.face_edges.ravel(), minlength=n_edges) != 2):
            raise DegenerateLatticeError("Mesh edge is not shared by exactly two triangles")
        g = self.face_metrics
        if not np.isfinite(g).all():
            raise DegenerateLatticeError("Face metric has non-finite entries")
        det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        if np.any(g[:, 0, 0] <= 0) or np.any(det <= 0):
            raise DegenerateLatticeError("Face metric is not positive definite")
        if self.conformal_factor is not None and np.any(self.conformal_factor <= 0):
            raise DegenerateLatticeError("Conformal factor must be positive")
        return self

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @property
    def face_areas(self) -> np.ndarray:
        g = self.face_metrics
        det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        return np.sqrt(det) / (2 * self.resolution ** 2)

    @property
    def area(self) -> float:
        return float(np.sum(self.face_areas))


class DiscreteOneForm(ArrayModel):
    """Real value per undirected edge in its canonical orientation"""
    edge_values: np.ndarray

    @field_validator("edge_values", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value)


class CohomologyClass(BaseModel):
    """Integer periods over the two generating loops of the deck lattice"""
    model_config = ConfigDict(frozen=True)

    periods: Tuple[int, int]

    @property
    def is_zero(self) -> bool:
        return self.periods == (0, 0)


class NormTable(BaseModel):
    """Normalized L^p norms ‖α‖*_p·vol^(−1/p) keyed by p label ("1", "2", "inf", ...)"""
    entries: Dict[str, float]
    upper_bound_labels: List[str] = []
    minimized_labels: List[str] = []
    monotone: bool = True

    @model_validator(mode="after")
    def _check_entries(self):
        for label, value in self.entries.items():
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"Norm table entry {label} = {value} is not positive and finite")
        return self


class LoopResult(BaseModel):
    """Shortest closed edge path of a nonzero deck class"""
    length: float
    period: Tuple[int, int]
    base_vertex: int


class LoewnerReport(BaseModel):
    ratio: float
    systole: float
    area: float
    period: Tuple[int, int]
    bound: float
    tolerance: float
    passed: bool


class ConstantNormReport(BaseModel):
    is_constant: bool
    deviation: float


# ---------------------------------------------------------------------------
# Extremal construction
# ---------------------------------------------------------------------------

class FiberFamily(ArrayModel):
    """Fiber densities ρ(u, v) of T² → S¹ sampled on the periodic M×K grid"""
    base_length: float = Field(gt=0)
    density: np.ndarray
    fiber_volume: float = Field(gt=0)

    @field_validator("density", mode="before")
    @classmethod
    def _check_density(cls, value):
        rho = np.array(value, dtype=float)
        if rho.ndim != 2 or min(rho.shape) < 2:
            raise DomainError(f"Density must be an M×K grid, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise DomainError("Fiber density must be positive everywhere")
        return frozen_array(rho)

    @property
    def base_res(self) -> int:
        return self.density.shape[0]

    @property
    def fiber_res(self) -> int:
        return self.density.shape[1]


class FiberValidationReport(BaseModel):
    ok: bool
    fiber_volume: float
    worst_column: int
    worst_deviation: float


class HorizontalLift(ArrayModel):
    """Lift field h with V = ∂u + h∂v and the kernel parameter c(u)"""
    h: np.ndarray
    c: np.ndarray
    residual: float

    @field_validator("h", "c", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value)


class ConstructedMetric(ArrayModel):
    """Metric components g_uu, g_uv, g_vv on the M×K grid"""
    g_uu: np.ndarray
    g_uv: np.ndarray
    g_vv: np.ndarray

    @field_validator("g_uu", "g_uv", "g_vv", mode="before")
    @classmethod
    def _freeze(cls, value):
        return frozen_array(value)

    @model_validator(mode="after")
    def _check_metric(self):
        if not (self.g_uu.shape == self.g_uv.shape == self.g_vv.shape):
            raise DomainError("Metric components must share one grid")
        if np.any(self.g_uu <= 0) or np.any(self.determinant <= 0):
            raise DomainError("Metric is not positive definite")
        return self

    @property
    def determinant(self) -> np.ndarray:
        return self.g_uu * self.g_vv - self.g_uv ** 2

    @property
    def shape(self) -> Tuple[int, int]:
        return self.g_uu.shape


class SubmersionReport(BaseModel):
    passed: bool
    deviation: float


class MinimalityReport(BaseModel):
    residual: float
    tolerance: float
    passed: bool


class HarmonicNormReport(BaseModel):
    passed: bool
    deviation: float
    resolution: int


class HebdaReport(BaseModel):
    base_stable_systole: float
    fiber_systole: float
    volume: float
    ratio: float
    passed: bool


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

Subcommand = Literal["svp", "dual", "bm", "perfect", "optimize", "torus", "hodge", "construct"]


class RunManifest(BaseModel):
    """Provenance embedded in every report"""
    subcommand: Subcommand
    inputs: Dict[str, str] = {}
    seed: int = Field(default=0, ge=0, lt=2**64)
    mode: Literal["exact", "float"] = "float"
    output: Optional[str] = None
    tool_version: str


class GramDocument(BaseModel):
    """Gram-matrix input file; entries may be decimal strings for the exact path"""
    dim: int = Field(ge=1)
    gram: List[List[Union[int, float, str]]]

    @model_validator(mode="after")
    def _check_shape(self):
        if len(self.gram) != self.dim or any(len(row) != self.dim for row in self.gram):
            raise ValueError(f"gram must be a {self.dim}×{self.dim} array")
        return self


class LatticeDocument(BaseModel):
    """Deck lattice input file: basis vectors, or a Gram matrix"""
    basis: Optional[List[List[float]]] = None
    gram: Optional[List[List[Union[int, float, str]]]] = None

    @model_validator(mode="after")
    def _check_one(self):
        if (self.basis is None) == (self.gram is None):
            raise ValueError("exactly one of basis and gram must be given")
        return self

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.csgraph import dijkstra
from scipy.sparse.linalg import factorized, spsolve

from systolic.config import get_settings
from systolic.models.errors import (
    DegenerateLatticeError,
    DomainError,
    NumericalError,
    ReconstructionError,
    ResolutionError,
)
from systolic.models.schemas import (
    CohomologyClass,
    ConstantNormReport,
    DiscreteOneForm,
    GramMatrix,
    LoewnerReport,
    LoopResult,
    NormTable,
    TorusMesh,
)
from systolic.services.lattice_service import LatticeService
from systolic.utils.helpers import exponent_label

logger = logging.getLogger(__name__)

LOEWNER_CONSTANT = 2.0 / math.sqrt(3.0)

PotentialField = Callable[[np.ndarray, np.ndarray], np.ndarray]
MetricField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MeshOperators:
    """Sparse operators of a mesh, assembled once per mesh"""
    d0: sparse.csr_matrix
    d1: sparse.csr_matrix
    reconstruction: sparse.csr_matrix
    metric_inverse: np.ndarray
    areas: np.ndarray
    stiffness: sparse.csr_matrix
    laplacian: sparse.csr_matrix
    solve_pinned: Callable[[np.ndarray], np.ndarray]


def _topology(n: int) -> Dict[str, np.ndarray]:
    """Periodic n×n grid: each cell split along its (1,1) diagonal.

    Edge 3c is (i,j)→(i+1,j), 3c+1 is (i,j)→(i,j+1), 3c+2 is (i,j)→(i+1,j+1)
    for cell c = i·n + j. Face 2c is the lower triangle, 2c+1 the upper one.
    """
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()

    def vid(a, b):
        return (a % n) * n + (b % n)

    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    cells = n * n

    edges = np.empty((3 * cells, 2), dtype=np.int64)
    edges[0::3] = np.column_stack([v00, v10])
    edges[1::3] = np.column_stack([v00, v01])
    edges[2::3] = np.column_stack([v00, v11])

    displacements = np.empty((3 * cells, 2))
    displacements[0::3] = (1.0 / n, 0.0)
    displacements[1::3] = (0.0, 1.0 / n)
    displacements[2::3] = (1.0 / n, 1.0 / n)

    horizontal, vertical, diagonal = 3 * v00, 3 * v00 + 1, 3 * v00 + 2
    horizontal_above = 3 * v01
    vertical_right = 3 * v10 + 1

    triangles = np.empty((2 * cells, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([v00, v10, v11])
    triangles[1::2] = np.column_stack([v00, v11, v01])

    face_edges = np.empty((2 * cells, 3), dtype=np.int64)
    face_edges[0::2] = np.column_stack([horizontal, vertical_right, diagonal])
    face_edges[1::2] = np.column_stack([diagonal, horizontal_above, vertical])

    face_edge_signs = np.empty((2 * cells, 3), dtype=np.int64)
    face_edge_signs[0::2] = (1, 1, -1)
    face_edge_signs[1::2] = (1, -1, -1)

    barycenters = np.empty((2 * cells, 2))
    barycenters[0::2] = np.column_stack([(i + 2.0 / 3.0) / n, (j + 1.0 / 3.0) / n])
    barycenters[1::2] = np.column_stack([(i + 1.0 / 3.0) / n, (j + 2.0 / 3.0) / n])

    grid = np.column_stack([i / n, j / n])
    return dict(edges=edges, displacements=displacements, triangles=triangles, face_edges=face_edges,
                face_edge_signs=face_edge_signs, barycenters=barycenters, grid=grid)


class HodgeService:
    """Discrete Hodge theory on triangulated flat or curved 2-tori"""

    def __init__(self, lattice_service: Optional[LatticeService] = None):
        self.settings = get_settings()
        self.lattice = lattice_service or LatticeService()
        self._operators: Dict[int, Tuple[TorusMesh, MeshOperators]] = {}

    # ------------------------------------------------------------------
    # Meshes
    # ------------------------------------------------------------------

    def _check_mesh_input(self, lattice, n: int) -> np.ndarray:
        if n < self.settings.MIN_MESH_RESOLUTION:
            raise ResolutionError(f"Mesh resolution must be at least {self.settings.MIN_MESH_RESOLUTION}, got {n}")
        basis = np.asarray(lattice, dtype=float)
        if basis.shape != (2, 2):
            raise DegenerateLatticeError(f"Deck lattice basis must be 2×2, got shape {basis.shape}")
        if abs(np.linalg.det(basis)) <= 1e-12 * max(np.max(np.abs(basis)) ** 2, np.finfo(float).tiny):
            raise DegenerateLatticeError("Deck lattice basis is singular")
        return basis

    def build_torus_mesh(self, lattice, n: int, phi: Optional[PotentialField] = None) -> TorusMesh:
        """Mesh of ℝ²/L with the conformal metric e^{2φ}·(flat); φ takes fractional coordinates (s, t)"""
        basis = self._check_mesh_input(lattice, n)
        topology = _topology(n)
        flat = basis.T @ basis
        if phi is None:
            face_factor = np.ones(2 * n * n)
            vertex_factor = np.ones(n * n)
        else:
            bary = topology["barycenters"]
            grid = topology["grid"]
            face_factor = np.exp(2.0 * phi(bary[:, 0], bary[:, 1]))
            vertex_factor = np.exp(2.0 * phi(grid[:, 0], grid[:, 1]))
        return self._assemble_mesh(basis, n, topology, face_factor[:, None, None] * flat, vertex_factor)

    def build_mesh_from_metric(self, lattice, n: int, metric: MetricField) -> TorusMesh:
        """Mesh whose face metrics are arbitrary 2×2 tensors in fractional coordinates"""
        basis = self._check_mesh_input(lattice, n)
        topology = _topology(n)
        bary = topology["barycenters"]
        return self._assemble_mesh(basis, n, topology, np.asarray(metric(bary[:, 0], bary[:, 1])), None)

    @staticmethod
    def _assemble_mesh(basis, n, topology, face_metrics, conformal_factor) -> TorusMesh:
        return TorusMesh(
            lattice=basis,
            resolution=n,
            vertices=topology["grid"] @ basis.T,
            triangles=topology["triangles"],
            edges=topology["edges"],
            edge_displacements=topology["displacements"],
            face_edges=topology["face_edges"],
            face_edge_signs=topology["face_edge_signs"],
            face_metrics=face_metrics,
            conformal_factor=conformal_factor,
        )

    def operators(self, mesh: TorusMesh) -> MeshOperators:
        cached = self._operators.get(id(mesh))
        if cached is not None and cached[0] is mesh:
            return cached[1]

        n_v, n_e, n_f = mesh.n_vertices, mesh.n_edges, mesh.n_faces
        edge_index = np.arange(n_e)
        d0 = sparse.csr_matrix(
            (np.concatenate([-np.ones(n_e), np.ones(n_e)]),
             (np.concatenate([edge_index, edge_index]), np.concatenate([mesh.edges[:, 0], mesh.edges[:, 1]]))),
            shape=(n_e, n_v))
        face_index = np.repeat(np.arange(n_f), 3)
        d1 = sparse.csr_matrix((mesh.face_edge_signs.ravel().astype(float),
                                (face_index, mesh.face_edges.ravel())), shape=(n_f, n_e))

        # covector of a face from its first two boundary edges: D c = σω
        first_two = mesh.face_edges[:, :2]
        signs = mesh.face_edge_signs[:, :2].astype(float)
        frame = mesh.edge_displacements[first_two] * signs[..., None]
        frame_inverse = np.linalg.inv(frame)
        rows = (2 * np.arange(n_f))[:, None, None] + np.arange(2)[None, :, None]
        rows = np.broadcast_to(rows, (n_f, 2, 2))
        cols = np.broadcast_to(first_two[:, None, :], (n_f, 2, 2))
        vals = frame_inverse * signs[:, None, :]
        reconstruction = sparse.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(2 * n_f, n_e))

        metric_inverse = np.linalg.inv(mesh.face_metrics)
        areas = mesh.face_areas
        block_rows = (2 * np.arange(n_f))[:, None, None] + np.arange(2)[None, :, None]
        block_cols = (2 * np.arange(n_f))[:, None, None] + np.arange(2)[None, None, :]
        weights = sparse.csr_matrix(
            ((areas[:, None, None] * metric_inverse).ravel(),
             (np.broadcast_to(block_rows, (n_f, 2, 2)).ravel(), np.broadcast_to(block_cols, (n_f, 2, 2)).ravel())),
            shape=(2 * n_f, 2 * n_f))
        stiffness = (reconstruction.T @ weights @ reconstruction).tocsr()
        laplacian = (d0.T @ stiffness @ d0).tocsr()
        solve_pinned = factorized(laplacian[1:, 1:].tocsc())

        operators = MeshOperators(d0=d0, d1=d1, reconstruction=reconstruction, metric_inverse=metric_inverse,
                                  areas=areas, stiffness=stiffness, laplacian=laplacian, solve_pinned=solve_pinned)
        if len(self._operators) > 8:
            self._operators.clear()
        self._operators[id(mesh)] = (mesh, operators)
        logger.debug("Assembled operators for mesh with %d vertices", n_v)
        return operators

    # ------------------------------------------------------------------
    # Forms
    # ------------------------------------------------------------------

    @staticmethod
    def _as_class(klass) -> CohomologyClass:
        return klass if isinstance(klass, CohomologyClass) else CohomologyClass(periods=tuple(klass))

    def closed_reference_form(self, mesh: TorusMesh, klass) -> DiscreteOneForm:
        """Pullback of the constant form with the given periods: m₁ds + m₂dt"""
        periods = np.asarray(self._as_class(klass).periods, dtype=float)
        return DiscreteOneForm(edge_values=mesh.edge_displacements @ periods)

    def periods(self, mesh: TorusMesh, form: DiscreteOneForm) -> Tuple[float, float]:
        """Integrals over the generator loops through vertex 0"""
        n = mesh.resolution
        values = form.edge_values
        along_first = values[3 * n * np.arange(n)].sum()
        along_second = values[3 * np.arange(n) + 1].sum()
        return float(along_first), float(along_second)

    def exterior_derivative(self, mesh: TorusMesh, form: DiscreteOneForm) -> np.ndarray:
        return self.operators(mesh).d1 @ form.edge_values

    def codifferential(self, mesh: TorusMesh, form: DiscreteOneForm) -> np.ndarray:
        ops = self.operators(mesh)
        return ops.d0.T @ (ops.stiffness @ form.edge_values)

    def add_exact(self, mesh: TorusMesh, form: DiscreteOneForm, potential: np.ndarray) -> DiscreteOneForm:
        """ω + df"""
        return DiscreteOneForm(edge_values=form.edge_values + self.operators(mesh).d0 @ potential)

    def harmonic_representative(self, mesh: TorusMesh, klass) -> DiscreteOneForm:
        """ω₀ + df minimizing the L² norm; solves the metric-weighted Laplace system with f(0) = 0"""
        reference = self.closed_reference_form(mesh, klass)
        if self._as_class(klass).is_zero:
            return reference
        ops = self.operators(mesh)
        load = -(ops.d0.T @ (ops.stiffness @ reference.edge_values))
        potential = np.zeros(mesh.n_vertices)
        potential[1:] = ops.solve_pinned(load[1:])
        harmonic = self.add_exact(mesh, reference, potential)

        residual = float(np.max(np.abs(self.codifferential(mesh, harmonic))))
        scale = max(1.0, float(np.max(np.abs(load))))
        if residual > self.settings.SOLVER_TOL * scale:
            raise NumericalError("Harmonic solve did not converge", residual)
        return harmonic

    def face_covectors(self, mesh: TorusMesh, form: DiscreteOneForm) -> np.ndarray:
        """Constant covector of each face in fractional coordinates; rejects non-closed data"""
        ops = self.operators(mesh)
        values = form.edge_values
        residual = float(np.max(np.abs(ops.d1 @ values))) if len(values) else 0.0
        scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
        if residual > self.settings.RECONSTRUCTION_TOL * scale:
            raise ReconstructionError(residual, self.settings.RECONSTRUCTION_TOL)
        return (ops.reconstruction @ values).reshape(-1, 2)

    def face_norms(self, mesh: TorusMesh, form: DiscreteOneForm) -> np.ndarray:
        covectors = self.face_covectors(mesh, form)
        ops = self.operators(mesh)
        squared = np.einsum("fa,fab,fb->f", covectors, ops.metric_inverse, covectors)
        return np.sqrt(np.maximum(squared, 0.0))

    def lp_norm(self, mesh: TorusMesh, form: DiscreteOneForm, p: float) -> float:
        """(∫|ω|^p dA)^(1/p), or the largest face norm for p = ∞"""
        if not (1 <= p <= math.inf):
            raise DomainError(f"Exponent must lie in [1, ∞], got {p}")
        norms = self.face_norms(mesh, form)
        if math.isinf(p):
            return float(np.max(norms))
        return float(np.sum(self.operators(mesh).areas * norms ** p) ** (1.0 / p))

    def l2_energy(self, mesh: TorusMesh, form: DiscreteOneForm) -> float:
        """ωᵀKω with the assembled stiffness matrix K"""
        values = form.edge_values
        return float(values @ (self.operators(mesh).stiffness @ values))

    def lp_minimizer(self, mesh: TorusMesh, klass, p: float) -> DiscreteOneForm:
        """Iteratively reweighted minimizer of the L^p norm over ω₀ + df, for 2 < p < ∞"""
        if not (2 < p < math.inf):
            raise DomainError(f"L^p minimization is implemented for 2 < p < ∞, got {p}")
        ops = self.operators(mesh)
        reference = self.closed_reference_form(mesh, klass)
        current = self.harmonic_representative(mesh, klass)
        current_value = self.lp_norm(mesh, current, p)
        if current_value == 0:
            return current
        for iteration in range(self.settings.IRLS_MAX_ITERS):
            norms = self.face_norms(mesh, current)
            floor = 1e-12 * max(float(np.max(norms)), np.finfo(float).tiny)
            weights = np.maximum(norms, floor) ** (p - 2.0)
            n_f = mesh.n_faces
            block_rows = np.broadcast_to((2 * np.arange(n_f))[:, None, None] + np.arange(2)[None, :, None], (n_f, 2, 2))
            block_cols = np.broadcast_to((2 * np.arange(n_f))[:, None, None] + np.arange(2)[None, None, :], (n_f, 2, 2))
            weighted = sparse.csr_matrix(
                (((ops.areas * weights)[:, None, None] * ops.metric_inverse).ravel(),
                 (block_rows.ravel(), block_cols.ravel())), shape=(2 * n_f, 2 * n_f))
            stiffness = ops.reconstruction.T @ weighted @ ops.reconstruction
            laplacian = (ops.d0.T @ stiffness @ ops.d0).tocsc()
            load = -(ops.d0.T @ (stiffness @ reference.edge_values))
            potential = np.zeros(mesh.n_vertices)
            potential[1:] = spsolve(laplacian[1:, 1:], load[1:])
            proposal = self.add_exact(mesh, reference, potential)

            step = 1.0
            while step > 1e-4:
                trial = DiscreteOneForm(edge_values=current.edge_values
                                        + step * (proposal.edge_values - current.edge_values))
                trial_value = self.lp_norm(mesh, trial, p)
                if trial_value <= current_value:
                    break
                step *= 0.5
            else:
                break
            change = (current_value - trial_value) / current_value
            current, current_value = trial, trial_value
            if change < self.settings.IRLS_TOL:
                break
        logger.debug("L^%g minimizer stopped after %d iterations at %.12g", p, iteration + 1, current_value)
        return current

    def holder_chain(self, mesh: TorusMesh, klass, exponents: Sequence[float], minimize: bool = False) -> NormTable:
        """Normalized norms ‖α‖*_p·vol^(−1/p) and whether they increase with p from p = 2 on.

        Entries other than p = 2 come from the harmonic representative and are
        upper bounds for the infimum, unless ``minimize`` replaces a finite
        p > 2 entry by the L^p minimizer.
        """
        klass = self._as_class(klass)
        exponents = list(exponents)
        if klass.is_zero:
            raise DomainError("Hölder chain needs a nonzero class")
        if exponents != sorted(exponents) or 2 not in exponents:
            raise DomainError("Exponent list must be sorted ascending and contain 2")

        harmonic = self.harmonic_representative(mesh, klass)
        volume = mesh.area
        entries: Dict[str, float] = {}
        upper_bounds: List[str] = []
        minimized: List[str] = []
        for p in exponents:
            label = exponent_label(p)
            form = harmonic
            if minimize and 2 < p < math.inf:
                form = self.lp_minimizer(mesh, klass, p)
                minimized.append(label)
            elif p != 2:
                upper_bounds.append(label)
            scale = 1.0 if math.isinf(p) else volume ** (-1.0 / p)
            entries[label] = self.lp_norm(mesh, form, p) * scale

        tail = [entries[exponent_label(p)] for p in exponents if p >= 2]
        monotone = all(b >= a - self.settings.HOLDER_TOL for a, b in zip(tail, tail[1:]))
        return NormTable(entries=entries, upper_bound_labels=upper_bounds, minimized_labels=minimized,
                         monotone=monotone)

    def check_constant_norm(self, mesh: TorusMesh, form: DiscreteOneForm, tol: float) -> ConstantNormReport:
        """(max − min)/mean of the face norms against tol"""
        norms = self.face_norms(mesh, form)
        mean = float(np.mean(norms))
        if mean == 0.0:
            raise DomainError("Constant-norm check needs a nonzero form")
        deviation = float((np.max(norms) - np.min(norms)) / mean)
        return ConstantNormReport(is_constant=deviation <= tol, deviation=deviation)

    # ------------------------------------------------------------------
    # Loops
    # ------------------------------------------------------------------

    def edge_lengths(self, mesh: TorusMesh) -> np.ndarray:
        """Length of each edge, averaged over its two faces"""
        displacement = mesh.edge_displacements[mesh.face_edges]
        per_face = np.sqrt(np.einsum("fki,fij,fkj->fk", displacement, mesh.face_metrics, displacement))
        return np.bincount(mesh.face_edges.ravel(), weights=per_face.ravel(), minlength=mesh.n_edges) / 2.0

    def _cover_graph(self, mesh: TorusMesh, copies: int) -> sparse.csr_matrix:
        """Edge graph of the copies×copies cover, nodes numbered I·(copies·n) + J"""
        n = mesh.resolution
        size = copies * n
        big_i, big_j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        big_i, big_j = big_i.ravel(), big_j.ravel()
        base = 3 * ((big_i % n) * n + (big_j % n))
        node = big_i * size + big_j
        right = ((big_i + 1) % size) * size + big_j
        above = big_i * size + (big_j + 1) % size
        diagonal = ((big_i + 1) % size) * size + (big_j + 1) % size
        lengths = self.edge_lengths(mesh)
        weights = np.concatenate([lengths[base], lengths[base + 1], lengths[base + 2]])
        return sparse.csr_matrix((weights, (np.tile(node, 3), np.concatenate([right, above, diagonal]))),
                                 shape=(size * size, size * size))

    @staticmethod
    def _lift_period(predecessors: np.ndarray, source: int, target: int, size: int, n: int) -> Tuple[int, int]:
        """Deck class of the path source → target, read off the unwrapped displacement"""
        node = target
        di = dj = 0
        while node != source:
            previous = int(predecessors[node])
            if previous < 0:
                raise NumericalError("Covering graph path is broken", math.inf)
            pi, pj = divmod(previous, size)
            ci, cj = divmod(node, size)
            di += (ci - pi + 1) % size - 1
            dj += (cj - pj + 1) % size - 1
            node = previous
        return di // n, dj // n

    def _search(self, mesh: TorusMesh, copies: int, offsets: List[Tuple[int, int]],
                sources: np.ndarray) -> Tuple[float, int, Tuple[int, int], Tuple[int, int]]:
        n = mesh.resolution
        size = copies * n
        graph = self._cover_graph(mesh, copies)
        best = (math.inf, -1, (0, 0))
        for chunk in np.array_split(sources, max(1, len(sources) // 32)):
            si, sj = np.divmod(chunk, n)
            start = si * size + sj
            distances = dijkstra(graph, directed=False, indices=start)
            for a, b in offsets:
                target = ((si + a * n) % size) * size + (sj + b * n) % size
                reach = distances[np.arange(len(chunk)), target]
                k = int(np.argmin(reach))
                if reach[k] < best[0]:
                    best = (float(reach[k]), int(chunk[k]), (a, b))

        length, vertex, (a, b) = best
        si, sj = divmod(vertex, n)
        start = si * size + sj
        target = ((si + a * n) % size) * size + (sj + b * n) % size
        _, predecessors = dijkstra(graph, directed=False, indices=start, return_predecessors=True)
        period = self._lift_period(predecessors, start, target, size, n)
        return length, vertex, (a, b), period

    @staticmethod
    def _crossing_vertices(n: int, first_axis: bool, second_axis: bool) -> np.ndarray:
        """Vertices on the cuts s = 0 and/or t = 0, which every loop of the matching classes meets"""
        chosen = set()
        if first_axis:
            chosen.update(range(n))
        if second_axis:
            chosen.update(i * n for i in range(n))
        return np.array(sorted(chosen), dtype=np.int64)

    def shortest_loop(self, mesh: TorusMesh, class_bound: int = 1) -> LoopResult:
        """Shortest closed edge path over all nonzero deck classes.

        Runs Dijkstra on the (2·bound+1)-fold cover from every vertex on the
        two cuts; primitive classes are never ≡ 0 modulo the cover, so the
        systolic class is always found.
        """
        if class_bound < 1:
            raise DomainError(f"Class bound must be at least 1, got {class_bound}")
        copies = 2 * class_bound + 1
        offsets = [(a, b) for a in range(copies) for b in range(copies) if (a, b) != (0, 0)]
        sources = self._crossing_vertices(mesh.resolution, True, True)
        length, vertex, _, period = self._search(mesh, copies, offsets, sources)
        logger.info("Shortest loop length %.12g in class %s", length, period)
        return LoopResult(length=length, period=period, base_vertex=vertex)

    def shortest_loop_in_class(self, mesh: TorusMesh, period: Tuple[int, int]) -> LoopResult:
        """Shortest closed edge path whose lift has the given deck displacement"""
        period = tuple(int(x) for x in period)
        if period == (0, 0):
            raise DomainError("Class must be nonzero")
        reach = max(abs(period[0]), abs(period[1]))
        sources = self._crossing_vertices(mesh.resolution, period[0] != 0, period[0] == 0)
        copies = 2 * reach + 1
        for _ in range(4):
            offset = [(period[0] % copies, period[1] % copies)]
            length, vertex, _, found = self._search(mesh, copies, offset, sources)
            if found == period:
                return LoopResult(length=length, period=period, base_vertex=vertex)
            copies += 2
        logger.warning("Shortest path to the %s-translate runs in class %s", period, found)
        return LoopResult(length=length, period=found, base_vertex=vertex)

    def loewner_check(self, mesh: TorusMesh) -> LoewnerReport:
        """sys₁²/area against 2/√3 with a c/N discretization allowance"""
        loop = self.shortest_loop(mesh)
        area = mesh.area
        ratio = loop.length ** 2 / area
        tolerance = self.settings.LOEWNER_C / mesh.resolution
        return LoewnerReport(ratio=ratio, systole=loop.length, area=area, period=loop.period,
                             bound=LOEWNER_CONSTANT, tolerance=tolerance, passed=ratio <= LOEWNER_CONSTANT + tolerance)

    # ------------------------------------------------------------------
    # Conformal systole
    # ------------------------------------------------------------------

    def harmonic_gram(self, mesh: TorusMesh) -> np.ndarray:
        """L² inner products of the harmonic forms of the classes (1,0) and (0,1)"""
        basis = [self.harmonic_representative(mesh, (1, 0)), self.harmonic_representative(mesh, (0, 1))]
        stiffness = self.operators(mesh).stiffness
        gram = np.array([[a.edge_values @ (stiffness @ b.edge_values) for b in basis] for a in basis])
        return 0.5 * (gram + gram.T)

    def confsys_estimate(self, mesh: TorusMesh) -> float:
        """λ1 of the integral homology lattice under the L² norm dual to the harmonic Gram"""
        homology = GramMatrix(entries=np.linalg.inv(self.harmonic_gram(mesh)))
        return self.lattice.shortest_vectors(homology).lambda1

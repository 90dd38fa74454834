import logging
import math
from typing import Callable, Optional

import numpy as np

from systolic.config import get_settings
from systolic.models.errors import DomainError, NumericalError, PreconditionError
from systolic.models.schemas import (
    ConstructedMetric,
    FiberFamily,
    FiberValidationReport,
    HarmonicNormReport,
    HebdaReport,
    HorizontalLift,
    MinimalityReport,
    SubmersionReport,
    TorusMesh,
)
from systolic.services.hodge_service import HodgeService

logger = logging.getLogger(__name__)

HEBDA_WINDOW = (0.98, 1.02)
CONSTANT_NORM_TOL = 1e-3

DensityField = Callable[[np.ndarray, np.ndarray], np.ndarray]


def periodic_grid(m: int, k: int):
    """u_i = i/M and v_j = j/K on the unit square, indexed [i, j]"""
    return np.meshgrid(np.arange(m) / m, np.arange(k) / k, indexing="ij")


def spectral_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Derivative of a periodic sample along axis, on a period of length 1"""
    n = values.shape[axis]
    coefficients = np.fft.rfft(values, axis=axis)
    wavenumbers = 2j * np.pi * np.arange(coefficients.shape[axis])
    if n % 2 == 0:
        wavenumbers[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.irfft(coefficients * wavenumbers.reshape(shape), n=n, axis=axis)


def spectral_antiderivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Periodic antiderivative vanishing at index 0; the mean of values is dropped"""
    n = values.shape[axis]
    coefficients = np.fft.rfft(values, axis=axis)
    wavenumbers = 2j * np.pi * np.arange(coefficients.shape[axis])
    inverse = np.zeros_like(wavenumbers)
    inverse[1:] = 1.0 / wavenumbers[1:]
    if n % 2 == 0:
        inverse[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = -1
    primitive = np.fft.irfft(coefficients * inverse.reshape(shape), n=n, axis=axis)
    return primitive - np.take(primitive, [0], axis=axis)


def finite_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Fourth-order periodic central difference"""
    step = 1.0 / values.shape[axis]
    return (-np.roll(values, -2, axis) + 8 * np.roll(values, -1, axis)
            - 8 * np.roll(values, 1, axis) + np.roll(values, 2, axis)) / (12 * step)


def central_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Second-order periodic central difference"""
    step = 1.0 / values.shape[axis]
    return (np.roll(values, -1, axis) - np.roll(values, 1, axis)) / (2 * step)


def fourier_interpolation_matrix(n: int, points: np.ndarray) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of n periodic samples at the given points"""
    frequencies = np.fft.fftfreq(n, d=1.0 / n)
    analysis = np.fft.fft(np.eye(n), axis=0) / n
    return (np.exp(2j * np.pi * np.outer(points, frequencies)) @ analysis).real


class ExtremalConstructionService:
    """Riemannian submersions T² → S¹ with minimal fibers, built from prescribed fiber densities.

    The base coordinate is u ∈ [0, 1) (the circle ℝ/lℤ after scaling by l) and
    the fiber coordinate is v ∈ [0, 1). Fibers carry the metric ρ(u, v)²dv².
    """

    def __init__(self, hodge_service: Optional[HodgeService] = None):
        self.settings = get_settings()
        self.hodge = hodge_service or HodgeService()

    def _d_u(self, values: np.ndarray) -> np.ndarray:
        if self.settings.DERIVATIVE_SCHEME == "finite":
            return finite_derivative(values, axis=0)
        return spectral_derivative(values, axis=0)

    def build_fiber_family(self, density: DensityField, base_length: float, m: int, k: int) -> FiberFamily:
        """Sample ρ(u, v) on the M×K grid; the fiber volume is read off the first column"""
        if m < 2 or k < 2:
            raise DomainError(f"Grid must be at least 2x2, got {m}x{k}")
        u, v = periodic_grid(m, k)
        rho = np.broadcast_to(np.asarray(density(u, v), dtype=float), (m, k))
        fiber_volume = float(np.mean(rho[0]))
        return FiberFamily(base_length=base_length, density=rho, fiber_volume=fiber_volume)

    def validate_fiber_family(self, rho: np.ndarray, fiber_volume: float) -> FiberValidationReport:
        """Periodic trapezoidal integral of every column against the common fiber volume"""
        rho = np.asarray(rho, dtype=float)
        if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
            raise DomainError("Fiber density must be positive everywhere")
        volumes = rho.mean(axis=1)
        deviations = np.abs(volumes - fiber_volume)
        worst = int(np.argmax(deviations))
        ok = bool(deviations[worst] <= self.settings.FIBER_VOLUME_TOL)
        if not ok:
            logger.info("Fiber volume varies: column %d integrates to %.17g, expected %.17g",
                        worst, volumes[worst], fiber_volume)
        return FiberValidationReport(ok=ok, fiber_volume=fiber_volume, worst_column=worst,
                                     worst_deviation=float(deviations[worst]))

    def lift_residual(self, family: FiberFamily, h: np.ndarray) -> float:
        """max |∂_u ρ + ∂_v(ρh)| over the grid"""
        rho = family.density
        return float(np.max(np.abs(self._d_u(rho) + spectral_derivative(rho * h, axis=1))))

    def moser_lift(self, family: FiberFamily, c: Optional[np.ndarray] = None) -> HorizontalLift:
        """h = (c(u) − ∫₀^v ∂_u ρ dv′)/ρ, the volume-preserving lift of ∂u"""
        validation = self.validate_fiber_family(family.density, family.fiber_volume)
        if not validation.ok:
            raise PreconditionError(
                f"Fiber volumes differ by {validation.worst_deviation:.3g} at column {validation.worst_column}")
        c = np.zeros(family.base_res) if c is None else np.asarray(c, dtype=float)
        if c.shape != (family.base_res,):
            raise DomainError(f"Kernel parameter must have {family.base_res} samples, got shape {c.shape}")

        rho = family.density
        flux = spectral_antiderivative(self._d_u(rho), axis=1)
        h = (c[:, None] - flux) / rho
        residual = self.lift_residual(family, h)
        if residual > self.settings.LIFT_RESIDUAL_TOL:
            raise NumericalError("Volume-preservation residual above tolerance", residual)
        logger.info("Moser lift on %dx%d grid, residual %.3e", family.base_res, family.fiber_res, residual)
        return HorizontalLift(h=h, c=c, residual=residual)

    @staticmethod
    def assemble_metric(family: FiberFamily, lift: HorizontalLift) -> ConstructedMetric:
        """g with ∂v of length ρ and l⁻¹(∂u + h∂v) a unit vector orthogonal to the fibers"""
        rho_squared = family.density ** 2
        h = lift.h
        return ConstructedMetric(
            g_uu=family.base_length ** 2 + h ** 2 * rho_squared,
            g_uv=-h * rho_squared,
            g_vv=rho_squared,
        )

    def check_submersion(self, metric: ConstructedMetric, family: FiberFamily) -> SubmersionReport:
        """|du|² = g^{uu} must equal 1/l² everywhere"""
        inverse_uu = metric.g_vv / metric.determinant
        deviation = float(np.max(np.abs(inverse_uu * family.base_length ** 2 - 1.0)))
        return SubmersionReport(passed=deviation <= self.settings.SUBMERSION_TOL, deviation=deviation)

    def check_minimal_fibers(self, metric: ConstructedMetric) -> MinimalityReport:
        """Largest geodesic curvature of the fibers v ↦ (u₀, v).

        The curvature is Γ^u_vv/(|du|·g_vv). Christoffel symbols come from
        periodic central differences, so the tolerance scales like 1/M² + 1/K².
        """
        g_uv, g_vv = metric.g_uv, metric.g_vv
        det = metric.determinant
        inverse_uu = g_vv / det
        inverse_uv = -g_uv / det
        christoffel = (0.5 * inverse_uu * (2.0 * central_derivative(g_uv, 1) - central_derivative(g_vv, 0))
                       + 0.5 * inverse_uv * central_derivative(g_vv, 1))
        curvature = np.abs(christoffel) / (np.sqrt(inverse_uu) * g_vv)
        m, k = metric.shape
        tolerance = self.settings.MINIMALITY_C * (1.0 / m ** 2 + 1.0 / k ** 2)
        residual = float(np.max(curvature))
        return MinimalityReport(residual=residual, tolerance=tolerance, passed=residual <= tolerance)

    def metric_to_mesh(self, metric: ConstructedMetric, n: int) -> TorusMesh:
        """Torus mesh of [0,1)² whose face metrics are the Fourier interpolant of the grid metric"""
        m, k = metric.shape
        components = (metric.g_uu, metric.g_uv, metric.g_vv)

        def face_metric(s: np.ndarray, t: np.ndarray) -> np.ndarray:
            along_u = fourier_interpolation_matrix(m, s)
            along_v = fourier_interpolation_matrix(k, t)
            g_uu, g_uv, g_vv = (np.sum((along_u @ c) * along_v, axis=1) for c in components)
            return np.stack([np.stack([g_uu, g_uv], axis=-1), np.stack([g_uv, g_vv], axis=-1)], axis=-2)

        return self.hodge.build_mesh_from_metric(np.eye(2), n, face_metric)

    def check_harmonic_constant_norm(self, metric: ConstructedMetric, n: int = 64) -> HarmonicNormReport:
        """Whether the harmonic representative of the base class has constant pointwise norm"""
        mesh = self.metric_to_mesh(metric, n)
        harmonic = self.hodge.harmonic_representative(mesh, (1, 0))
        report = self.hodge.check_constant_norm(mesh, harmonic, CONSTANT_NORM_TOL)
        return HarmonicNormReport(passed=report.is_constant, deviation=report.deviation, resolution=n)

    def hebda_equality(self, metric: ConstructedMetric, n: int = 64) -> HebdaReport:
        """stsys₁ of the base class times the fiber systole, over the area.

        The stable systole of the base class is 1/sup|ω| for its harmonic
        representative ω; the fiber systole is the shortest loop in class (0, 1).
        """
        mesh = self.metric_to_mesh(metric, n)
        harmonic = self.hodge.harmonic_representative(mesh, (1, 0))
        sup_norm = self.hodge.lp_norm(mesh, harmonic, math.inf)
        base_systole = 1.0 / sup_norm
        fiber = self.hodge.shortest_loop_in_class(mesh, (0, 1))
        volume = mesh.area
        ratio = base_systole * fiber.length / volume
        logger.info("Hebda ratio %.12g (base %.12g, fiber %.12g, area %.12g)",
                    ratio, base_systole, fiber.length, volume)
        return HebdaReport(base_stable_systole=base_systole, fiber_systole=fiber.length, volume=volume,
                           ratio=ratio, passed=HEBDA_WINDOW[0] <= ratio <= HEBDA_WINDOW[1])

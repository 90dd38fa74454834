import logging
import math
from typing import List, Tuple

import numpy as np
import sympy as sp

from systolic.config import get_settings
from systolic.models.errors import CapacityError, DegenerateLatticeError, IllConditionedError
from systolic.models.schemas import GramMatrix, LatticeBasis, ReducedBasis, ShortVectorSet

logger = logging.getLogger(__name__)


def normalize_sign(vector) -> Tuple[int, ...]:
    """Representative of ±v whose first nonzero coefficient is positive"""
    vector = tuple(int(x) for x in vector)
    for x in vector:
        if x != 0:
            return vector if x > 0 else tuple(-y for y in vector)
    return vector


def _gram_schmidt(gram: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gram–Schmidt coefficients μ and squared lengths |b*_i|² read off a Cholesky factor"""
    lower = np.linalg.cholesky(gram)
    pivots = np.diag(lower)
    return lower / pivots[None, :], pivots ** 2


class LatticeService:
    """Gram matrices, duals, LLL reduction and shortest-vector enumeration"""

    def __init__(self):
        self.settings = get_settings()
        self.shell = (1.0 + self.settings.SHELL_TOLERANCE) ** 2

    def gram_from_basis(self, basis: LatticeBasis) -> GramMatrix:
        """Inner products of the basis columns"""
        columns = basis.columns
        scale = np.prod(np.linalg.norm(columns, axis=0))
        if scale == 0 or abs(np.linalg.det(columns)) <= 1e-12 * scale:
            raise DegenerateLatticeError("Basis columns are linearly dependent")
        if basis.rational is not None:
            return GramMatrix.from_rational(basis.rational.T * basis.rational)
        return GramMatrix(entries=columns.T @ columns)

    def dual_gram(self, gram: GramMatrix) -> GramMatrix:
        """Gram matrix of the dual lattice in the dual basis, i.e. G⁻¹"""
        condition = float(np.linalg.cond(gram.entries))
        if condition > self.settings.MAX_CONDITION:
            raise IllConditionedError(condition, self.settings.MAX_CONDITION)
        if gram.is_exact:
            return GramMatrix.from_rational(gram.rational.inv())
        return GramMatrix(entries=np.linalg.inv(gram.entries))

    def reduce_basis(self, gram: GramMatrix) -> ReducedBasis:
        """LLL reduction carried out on the Gram matrix; returns UᵀGU and U"""
        g = gram.entries
        b = gram.dim
        delta = self.settings.LLL_DELTA
        transform = np.eye(b, dtype=np.int64)
        current = g.copy()
        k = 1
        swaps = 0
        max_swaps = 1000 * b * b
        while k < b:
            for j in range(k - 1, -1, -1):
                mu, _ = _gram_schmidt(current)
                q = int(np.rint(mu[k, j]))
                if q:
                    transform[:, k] -= q * transform[:, j]
                    current = transform.T @ g @ transform
            mu, lengths = _gram_schmidt(current)
            if lengths[k] >= (delta - mu[k, k - 1] ** 2) * lengths[k - 1]:
                k += 1
                continue
            transform[:, [k - 1, k]] = transform[:, [k, k - 1]]
            current = transform.T @ g @ transform
            k = max(k - 1, 1)
            swaps += 1
            if swaps > max_swaps:
                logger.warning("LLL stopped after %d swaps without converging", swaps)
                break
        return ReducedBasis(gram=gram.transformed(transform), transform=transform)

    def _enumerate(self, gram: np.ndarray, bound: float, shrink: bool) -> List[np.ndarray]:
        """Fincke–Pohst enumeration of nonzero v with vᵀGv ≤ bound, one per ± pair.

        With ``shrink`` the bound drops to shell × (best norm found) as
        enumeration proceeds.
        """
        upper = np.linalg.cholesky(gram).T
        pivots = np.diag(upper)
        b = len(gram)
        coeffs = np.zeros(b, dtype=np.int64)
        found: List[Tuple[np.ndarray, float]] = []
        state = {"bound": bound, "nodes": 0}

        def descend(level: int, partial: float, leading: bool):
            center = -float(upper[level, level + 1:] @ coeffs[level + 1:]) / pivots[level]
            slack = state["bound"] - partial
            if slack < 0:
                return
            width = math.sqrt(slack) / pivots[level]
            low = math.ceil(center - width)
            high = math.floor(center + width)
            if leading:
                low = max(low, 0)
            for x in range(low, high + 1):
                state["nodes"] += 1
                coeffs[level] = x
                step = pivots[level] * (x - center)
                total = partial + step * step
                if total > state["bound"]:
                    continue
                if level > 0:
                    descend(level - 1, total, leading and x == 0)
                elif not (leading and x == 0):
                    found.append((coeffs.copy(), total))
                    if shrink:
                        state["bound"] = min(state["bound"], total * self.shell * (1 + 1e-12))
            coeffs[level] = 0

        descend(b - 1, 0.0, True)
        logger.debug("Enumeration visited %d nodes, kept %d candidates", state["nodes"], len(found))
        return [v for v, total in found if total <= state["bound"]]

    def shortest_vectors(self, gram: GramMatrix) -> ShortVectorSet:
        """λ1 and every minimal vector (up to sign) in the coordinates of the given basis"""
        if gram.dim > self.settings.MAX_ENUM_DIM:
            raise CapacityError(
                f"Enumeration is capped at dimension {self.settings.MAX_ENUM_DIM}, got {gram.dim}")

        reduced = self.reduce_basis(gram)
        seed = float(np.min(np.diag(reduced.gram.entries)))
        candidates = self._enumerate(reduced.gram.entries, seed * self.shell * (1 + 1e-12), shrink=True)
        vectors = [reduced.transform @ v for v in candidates]

        exact_minimum = None
        if gram.is_exact:
            exact_norms = [gram.exact_norm_squared(v) for v in vectors]
            exact_minimum = min(exact_norms)
            vectors = [v for v, n in zip(vectors, exact_norms) if n == exact_minimum]
            minimum = float(exact_minimum)
        else:
            norms = [gram.norm_squared(v) for v in vectors]
            minimum = min(norms)
            vectors = [v for v, n in zip(vectors, norms) if n <= minimum * self.shell]

        return ShortVectorSet(
            lambda1=math.sqrt(minimum),
            vectors=sorted({normalize_sign(v) for v in vectors}),
            radius_used=math.sqrt(seed),
            lambda1_squared_exact=None if exact_minimum is None else str(exact_minimum),
        )

    def vectors_within(self, gram: GramMatrix, radius_squared: float) -> List[Tuple[Tuple[int, ...], float]]:
        """All nonzero lattice vectors with vᵀGv ≤ radius², one per ± pair, sorted by norm"""
        if gram.dim > self.settings.MAX_ENUM_DIM:
            raise CapacityError(
                f"Enumeration is capped at dimension {self.settings.MAX_ENUM_DIM}, got {gram.dim}")
        reduced = self.reduce_basis(gram)
        candidates = self._enumerate(reduced.gram.entries, radius_squared * (1 + 1e-12), shrink=False)
        vectors = {normalize_sign(reduced.transform @ v) for v in candidates}
        return sorted(((v, gram.norm_squared(v)) for v in vectors), key=lambda item: (item[1], item[0]))

    def bm_product(self, gram: GramMatrix) -> float:
        """λ1(L)·λ1(L*)"""
        primal = self.shortest_vectors(gram)
        dual = self.shortest_vectors(self.dual_gram(gram))
        if primal.lambda1_squared_exact is not None and dual.lambda1_squared_exact is not None:
            product = sp.Rational(primal.lambda1_squared_exact) * sp.Rational(dual.lambda1_squared_exact)
            return float(sp.sqrt(product).evalf(30))
        return primal.lambda1 * dual.lambda1

    def hermite_invariant(self, gram: GramMatrix) -> float:
        """λ1² / det^(1/b)"""
        minimum = self.shortest_vectors(gram).lambda1 ** 2
        return minimum / gram.determinant ** (1.0 / gram.dim)

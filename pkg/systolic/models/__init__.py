from systolic.models.errors import SystolicError
from systolic.models.schemas import FlatTorus, GramMatrix, LatticeBasis, RunManifest, ShortVectorSet, TorusMesh

__all__ = ["SystolicError", "FlatTorus", "GramMatrix", "LatticeBasis", "RunManifest", "ShortVectorSet", "TorusMesh"]

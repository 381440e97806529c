import numpy as np
import pytest
from hypothesis import settings

from orthostab.algebra import ScalarAlgebra
from orthostab.orthogonality import OrthogonalityRelation
from orthostab.pexider import GroundTruth, PexiderInstance
from orthostab.spaces import NormedSpace

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def make_instance(
    dim=3,
    parity="general",
    quad=0.0,
    linear=None,
    offsets=None,
    delta=0.0,
    seed=0,
    alpha=None,
    field="real",
    kind="inner_product",
    norm_kind="euclidean",
    p=None,
):
    X = NormedSpace(dim, field=field, norm_kind=norm_kind, p=p)
    rel = OrthogonalityRelation(kind, X)
    L = np.zeros((dim, dim), dtype=X.dtype) if linear is None else np.asarray(linear)
    C = np.zeros((3, dim), dtype=X.dtype) if offsets is None else np.asarray(offsets)
    g = GroundTruth(quad, L, C, delta, seed, alpha)
    return PexiderInstance(g, X, X, rel, parity)


def algebras_for(space):
    if space.field == "complex":
        return [ScalarAlgebra("real_signs", space), ScalarAlgebra("complex_circle", space)]
    return [ScalarAlgebra("real_signs", space), ScalarAlgebra("diagonal_real", space)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqk import (
    DimensionMismatchError,
    FrameMismatchError,
    NotARightInverseError,
    RankDeficientError,
    ReducedFrame,
    build_projection,
    compose_projections,
    identity_projection,
    kernel_decomposition,
)
from pqk import ratlin
from pqk.frames import ProjectionMatrix

K1 = ReducedFrame(("k1",))
K2 = ReducedFrame(("k1", "k2"))
K2p = ReducedFrame(("p1", "p2"))
K3 = ReducedFrame(("q1", "q2", "q3"))


def test_build_projection_copies_coefficients():
    p = build_projection(K1, K2p, {"k1": [1, 1]})
    assert p.entries == ratlin.mat([[1, 1]])
    assert p.target_frame == K1 and p.source_frame == K2p


def test_identity_projection_from_identity_combos():
    p = build_projection(K2, K2, {"k1": [1, 0], "k2": [0, 1]})
    assert p.entries == ratlin.identity(2)
    assert p.entries == identity_projection(K2).entries


def test_build_projection_rank_deficient():
    with pytest.raises(RankDeficientError):
        build_projection(K2, K2p, {"k1": [1, 0], "k2": [1, 0]})


def test_build_projection_dimension_errors():
    with pytest.raises(DimensionMismatchError):
        build_projection(K1, K2p, {"k1": [1]})
    with pytest.raises(DimensionMismatchError):
        build_projection(K1, K2p, {})


def test_compose_projections_is_matrix_product():
    outer = build_projection(K1, K2, {"k1": [1, 1]})
    inner = build_projection(K2, K3, {"k1": [1, 0, 0], "k2": [0, 1, 1]})
    composed = compose_projections(outer, inner)
    assert composed.entries == ratlin.mat([[1, 1, 1]])
    assert composed.target_frame == K1 and composed.source_frame == K3


def test_compose_with_identity():
    p = build_projection(K1, K2, {"k1": [1, 1]})
    assert compose_projections(identity_projection(K1), p).entries == p.entries


def test_compose_frame_mismatch():
    p = build_projection(K1, K2, {"k1": [1, 1]})
    q = build_projection(K1, K2p, {"k1": [1, 0]})
    with pytest.raises(FrameMismatchError):
        compose_projections(p, q)


def test_kernel_decomposition_one_dim_kernel():
    p = build_projection(K1, K2, {"k1": [1, 1]})
    dec = kernel_decomposition(p, [[1], [0]])
    assert ratlin.is_zero(ratlin.matmul(p.entries, dec.kernel_basis))
    assert dec.lebesgue_factor == 1
    assert dec.kernel_dim == 1


def test_kernel_decomposition_zero_dim_kernel_is_det_w():
    p = ProjectionMatrix([[2]], source_frame=K1, target_frame=ReducedFrame(("z",)))
    dec = kernel_decomposition(p, [[Fraction(1, 2)]])
    assert ratlin.shape(dec.kernel_basis) == (1, 0)
    assert dec.lebesgue_factor == Fraction(1, 2)


def test_kernel_decomposition_identity():
    p = identity_projection(K2)
    dec = kernel_decomposition(p, ratlin.identity(2))
    assert ratlin.shape(dec.kernel_basis) == (2, 0)
    assert dec.lebesgue_factor == 1


def test_kernel_decomposition_rejects_non_right_inverse():
    p = build_projection(K1, K2, {"k1": [1, 1]})
    with pytest.raises(NotARightInverseError):
        kernel_decomposition(p, [[1], [1]])


small_rat = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda n: st.tuples(
            st.lists(st.lists(small_rat, min_size=n, max_size=n), min_size=n, max_size=n),
            st.lists(st.lists(small_rat, min_size=n, max_size=n), min_size=n, max_size=n),
            st.lists(st.lists(small_rat, min_size=n, max_size=n), min_size=n, max_size=n),
        )
    )
)
def test_composition_associativity(mats):
    a, b, c = (ratlin.mat(m) for m in mats)
    left = ratlin.matmul(ratlin.matmul(a, b), c)
    right = ratlin.matmul(a, ratlin.matmul(b, c))
    assert left == right
    fl = ratlin.to_float(a) @ ratlin.to_float(b) @ ratlin.to_float(c)
    assert np.abs(fl - ratlin.to_float(left)).max() <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda r: st.integers(0, 2).flatmap(
            lambda extra: st.lists(
                st.lists(small_rat, min_size=r + extra, max_size=r + extra),
                min_size=r,
                max_size=r,
            )
        )
    )
)
def test_rank_agrees_between_exact_and_svd(rows):
    m = ratlin.mat(rows)
    exact = ratlin.rank(m)
    fl = ratlin.to_float(m)
    sv = np.linalg.svd(fl, compute_uv=False)
    svd_rank = int(np.sum(sv > 1e-10 * (sv.max() if sv.size else 1.0)))
    assert exact == svd_rank

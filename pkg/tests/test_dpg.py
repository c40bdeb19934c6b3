import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqk import (
    DpgLabel,
    EdgeWord,
    Face,
    Graph,
    TestConnection,
    decompose_edges,
    dof_id,
    dual_flux_basis,
    flux_operator,
    graph_join,
    graph_refines,
    holonomy,
    incidence_number,
    materialize,
    pairing_matrix,
    refines,
    system_join,
    witness_connection,
    word,
)
from pqk import ratlin
from pqk.dpg import random_system, same_edges, word_values

atoms3 = ("a", "b", "c")


def random_word(draw_atoms, signs):
    return EdgeWord(tuple(zip(draw_atoms, signs)))


conn_strategy = st.fixed_dictionaries(
    {a: st.integers(-5, 5) for a in atoms3}
).map(lambda d: TestConnection(tuple((k, Fraction(v)) for k, v in d.items())))

word_strategy = st.lists(
    st.sampled_from(atoms3), min_size=1, max_size=3, unique=True
).flatmap(
    lambda ats: st.lists(
        st.sampled_from((-1, 1)), min_size=len(ats), max_size=len(ats)
    ).map(lambda sg: EdgeWord(tuple(zip(ats, sg))))
)


# --- holonomy -----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(word_strategy, conn_strategy)
def test_holonomy_inverse_flips_sign(e, conn):
    assert holonomy(e.inverse(), conn) == -holonomy(e, conn)


@settings(max_examples=80, deadline=None)
@given(conn_strategy)
def test_holonomy_additive_under_composition(conn):
    e1 = word("a")
    e2 = word("b", "c")
    composed = word("a", "b", "c")
    assert holonomy(composed, conn) == holonomy(e1, conn) + holonomy(e2, conn)


def test_holonomy_single_atom():
    e = word("a")
    assert holonomy(e, TestConnection((("a", Fraction(5, 2)),))) == Fraction(5, 2)


# --- witness connections --------------------------------------------------------


def test_witness_connection_hits_targets():
    g = Graph((word("a"), word("b", "c")))
    conn = witness_connection(g, [1, -3])
    assert holonomy(g.edges[0], conn) == 1
    assert holonomy(g.edges[1], conn) == -3


def test_witness_connection_zero():
    g = Graph((word("a"), word("b")))
    conn = witness_connection(g, [0, 0])
    assert conn.values == ()


def test_witness_connection_reversed_first_letter():
    g = Graph((word("-a", "-b"),))
    conn = witness_connection(g, [1])
    assert conn.value_map["a"] == -1
    assert holonomy(g.edges[0], conn) == 1


# --- incidence numbers ----------------------------------------------------------


def test_incidence_zero_on_untouched_atoms():
    s = Face("S", (("a", Fraction(0)),))
    assert incidence_number(s, word("a", "b")) == 0


def test_incidence_transversal_puncture():
    s = Face("S", (("a", Fraction(1)),))
    assert incidence_number(s, word("a")) == 1
    assert incidence_number(s, word("-a")) == -1


def test_incidence_antisymmetric_exhaustively():
    values = (Fraction(-1), Fraction(-1, 2), Fraction(1, 2), Fraction(1))
    faces = [
        Face("S", tuple(zip(atoms3, combo)))
        for combo in itertools.product(values, repeat=3)
    ]
    words = [word(a) for a in atoms3] + [word(f"-{a}") for a in atoms3]
    for a, b in itertools.permutations(atoms3, 2):
        for sa in (1, -1):
            for sb in (1, -1):
                words.append(EdgeWord(((a, sa), (b, sb))))
    for s in faces[:16]:
        for e in words:
            assert incidence_number(s, e.inverse()) == -incidence_number(s, e)


def test_incidence_half_integer():
    s = Face("S", (("a", Fraction(1, 2)), ("b", Fraction(-1))))
    val = incidence_number(s, word("a", "b"))
    assert val == Fraction(-1, 2)
    assert (2 * val).denominator == 1


# --- flux operators -------------------------------------------------------------


def test_flux_dual_face_is_indicator():
    g = Graph((word("a"), word("b")))
    s = Face("S", (("a", Fraction(1)),))
    op = flux_operator(s, g)
    assert op.on(dof_id(word("a"))) == 1
    assert op.on(dof_id(word("b"))) == 0


def test_flux_empty_face_is_zero_operator():
    g = Graph((word("a"),))
    op = flux_operator(Face("S", ()), g)
    assert op.on(dof_id(word("a"))) == 0


def test_flux_additive_in_incidence():
    g = Graph((word("a", "b"),))
    s1 = Face("S1", (("a", Fraction(1, 2)),))
    s2 = Face("S2", (("a", Fraction(1, 2)), ("b", Fraction(-1))))
    total = Face("S", (("a", Fraction(1)), ("b", Fraction(-1))))
    e = g.edges[0]
    assert incidence_number(s1, e) + incidence_number(s2, e) == incidence_number(
        total, e
    )


# --- graph order ----------------------------------------------------------------


def test_decompose_composed_edge():
    fine = Graph((word("a"), word("b")))
    coarse = Graph((word("a", "b"),))
    dec = decompose_edges(fine, coarse)
    assert dec.accepted
    assert dec.factors[coarse.edges[0]] == ((word("a"), 1), (word("b"), 1))


def test_decompose_disjoint_supports_refused():
    fine = Graph((word("a"),))
    coarse = Graph((word("b"),))
    dec = decompose_edges(fine, coarse)
    assert not dec.accepted
    assert dec.failed_edge == coarse.edges[0]


def test_decompose_witness_matches_refines(deep_system):
    rs = deep_system
    for e in rs.order[:6]:
        fine = rs.dlabels[e.upper]
        coarse = rs.dlabels[e.lower]
        dec = decompose_edges(fine.graph, coarse.graph)
        assert dec.accepted
        assert refines(rs.labels[e.upper], rs.labels[e.lower], e.witness)


def test_graph_refines_iff_linear_combination():
    fine = Graph((word("a"), word("b"), word("c")))
    coarse = Graph((word("a", "b"), word("-c")))
    assert graph_refines(fine, coarse)
    dec = decompose_edges(fine, coarse)
    values = word_values((*fine.edges, *coarse.edges))
    for e, parts in dec.factors.items():
        combo = {}
        for f, sign in parts:
            combo[dof_id(f)] = combo.get(dof_id(f), 0) + sign
        lhs = values[dof_id(e)]
        rhs = {}
        for f_dof, c in combo.items():
            for atom, v in values[f_dof].items():
                rhs[atom] = rhs.get(atom, Fraction(0)) + c * v
        assert {k: v for k, v in rhs.items() if v != 0} == lhs


# --- graph join -----------------------------------------------------------------


def test_graph_join_shared_prefix():
    g1 = Graph((word("a", "b"),))
    g2 = Graph((word("a", "c"),))
    joined = graph_join(g1, g2)
    assert same_edges(joined, Graph((word("a"), word("b"), word("c"))))
    assert graph_refines(joined, g1)
    assert graph_refines(joined, g2)


def test_graph_join_idempotent():
    g = Graph((word("a", "b"), word("-c")))
    joined = graph_join(g, g)
    assert same_edges(joined, g)


def test_graph_join_disjoint_union():
    g1 = Graph((word("a"),))
    g2 = Graph((word("b", "c"),))
    joined = graph_join(g1, g2)
    assert same_edges(joined, Graph((word("a"), word("b", "c"))))


def test_graph_join_preserves_atom_support():
    g1 = Graph((word("a", "b", "c"),))
    g2 = Graph((word("b"),))
    joined = graph_join(g1, g2)
    assert joined.atoms == g1.atoms | g2.atoms
    assert graph_refines(joined, g1)
    assert graph_refines(joined, g2)


def test_graph_join_interleaved_overlap():
    g1 = Graph((EdgeWord((("a", 1), ("b", 1), ("c", 1), ("d", 1))),))
    g2 = Graph((EdgeWord((("a", 1), ("b", 1), ("x", 1), ("c", 1), ("d", 1))),))
    joined = graph_join(g1, g2)
    expected = Graph((word("a", "b"), word("c", "d"), word("x")))
    assert same_edges(joined, expected)


def test_graph_join_reversed_copy_is_identified():
    g1 = Graph((word("a", "b"),))
    g2 = Graph((EdgeWord((("b", -1), ("a", -1))),))
    joined = graph_join(g1, g2)
    assert len(joined.edges) == 1
    assert graph_refines(joined, g1) and graph_refines(joined, g2)


def _random_graph_pair(rng, n_atoms=9):
    """Two valid graphs over a shared atom pool with arbitrary overlaps."""
    atoms = [f"t{i}" for i in range(n_atoms)]

    def graph():
        pool = atoms[:]
        rng.shuffle(pool)
        take = rng.randint(1, n_atoms - 1)
        pool = pool[:take]
        edges = []
        while pool:
            k = min(rng.randint(1, 3), len(pool))
            letters = tuple((a, rng.choice((-1, 1))) for a in pool[:k])
            pool = pool[k:]
            edges.append(EdgeWord(letters))
        return Graph(tuple(edges))

    return graph(), graph()


@pytest.mark.parametrize("seed", range(40))
def test_graph_join_randomized_stress(seed):
    import random as pyrandom

    rng = pyrandom.Random(seed)
    for _ in range(12):
        g1, g2 = _random_graph_pair(rng)
        joined = graph_join(g1, g2)  # Graph() validates pairwise disjointness
        assert graph_refines(joined, g1)
        assert graph_refines(joined, g2)
        assert joined.atoms == g1.atoms | g2.atoms


def test_decompose_refusal_matches_no_combination():
    fine = Graph((word("a", "b"),))
    coarse = Graph((word("a"),))
    dec = decompose_edges(fine, coarse)
    assert not dec.accepted
    # and indeed no scalar multiple of the fine holonomy equals the coarse one
    values = word_values((*fine.edges, *coarse.edges))
    fine_vec = values[dof_id(fine.edges[0])]
    coarse_vec = values[dof_id(coarse.edges[0])]
    assert all(
        {a: c * v for a, v in fine_vec.items() if c * v != 0} != coarse_vec
        for c in (Fraction(1), Fraction(-1), Fraction(1, 2))
    )


# --- dual flux basis ------------------------------------------------------------


def test_dual_flux_basis_identity_pairing():
    g = Graph((word("a"), word("b", "c"), word("-d")))
    label = DpgLabel("L", g, dual_flux_basis(g))
    sys_label = materialize(label, g.edges)
    assert pairing_matrix(sys_label) == ratlin.identity(3)


def test_dual_flux_basis_single_loop_edge():
    g = Graph((word("a"),))
    faces = dual_flux_basis(g)
    assert len(faces) == 1
    assert incidence_number(faces[0], g.edges[0]) == 1


def test_dual_flux_basis_orientation_reversed():
    g = Graph((word("-a", "-b"),))
    faces = dual_flux_basis(g)
    assert incidence_number(faces[0], g.edges[0]) == 1


# --- system join ----------------------------------------------------------------


def _label(name, graph):
    return DpgLabel(name, graph, dual_flux_basis(graph, prefix=f"{name}.f"))


def test_system_join_self_is_block_form():
    g = Graph((word("a", "b"), word("c")))
    la = _label("A", g)
    res = system_join(la, la, "J")
    joined = materialize(res.label, list(res.label.graph.edges) + list(g.edges))
    assert pairing_matrix(joined) == ratlin.identity(res.label.graph.frame().dim)
    assert refines(joined, materialize(la, list(res.label.graph.edges) + list(g.edges)), res.witness_a)


def test_system_join_disjoint_single_edges():
    la = _label("A", Graph((word("a"),)))
    lb = _label("B", Graph((word("b"),)))
    res = system_join(la, lb, "J")
    assert len(res.label.graph.edges) == 2
    uni = list(res.label.graph.edges) + [word("a"), word("b")]
    joined = materialize(res.label, uni)
    assert pairing_matrix(joined) == ratlin.identity(2)
    assert refines(joined, materialize(la, uni), res.witness_a)
    assert refines(joined, materialize(lb, uni), res.witness_b)


def _assert_block_form(g, m):
    n = len(g)
    for i in range(n):
        for j in range(n):
            if i < m and j < m:
                assert g[i][j] == (1 if i == j else 0)
            elif i >= m:
                assert g[i][j] == (1 if i == j else 0)
    assert ratlin.det(g) == 1


@pytest.mark.parametrize("seed", range(12))
def test_system_join_randomized_block_form(seed):
    rs = random_system(1 + seed % 4, 2, seed)
    a, b = rs.dlabels["b0"], rs.dlabels["b1"]
    res = system_join(a, b, "probe")
    uni = list(
        dict.fromkeys(
            (*res.label.graph.edges, *a.graph.edges, *b.graph.edges)
        )
    )
    joined = materialize(res.label, uni)
    _assert_block_form(pairing_matrix(joined), res.span_dim)
    assert refines(joined, materialize(a, uni), res.witness_a)
    assert refines(joined, materialize(b, uni), res.witness_b)


# --- random systems -------------------------------------------------------------


def test_random_system_minimal():
    rs = random_system(1, 1, seed=0)
    assert sorted(rs.labels) == ["b0"]
    label = rs.labels["b0"]
    assert pairing_matrix(label) == ratlin.identity(label.dim)
    assert rs.order == ()


def test_random_system_depth_two_structure():
    rs = random_system(3, 2, seed=5)
    assert {"b0", "b1", "j(b0+b1)"} <= set(rs.labels)
    pairs = {(e.upper, e.lower) for e in rs.order}
    assert ("j(b0+b1)", "b0") in pairs
    assert ("j(b0+b1)", "b1") in pairs


def test_random_system_deterministic():
    r1 = random_system(3, 2, seed=42)
    r2 = random_system(3, 2, seed=42)
    assert sorted(r1.labels) == sorted(r2.labels)
    for name in r1.labels:
        assert r1.labels[name] == r2.labels[name]
    assert [(e.upper, e.lower) for e in r1.order] == [
        (e.upper, e.lower) for e in r2.order
    ]
    for e1, e2 in zip(r1.order, r2.order):
        assert e1.witness.combos == e2.witness.combos
        assert e1.witness.op_membership == e2.witness.op_membership


def test_random_system_chains_exist_at_depth_three(deep_system):
    assert deep_system.chains()

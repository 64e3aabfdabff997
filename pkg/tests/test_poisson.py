import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinflow.bases import levi_civita
from spinflow.coordinates import chart
from spinflow.matrix_core import InputError, random_hermitian
from spinflow.poisson import (BracketTable, canonical_consistency_check, casimir_commutation_check,
                              centrality_residual, extended_table, is_rational_table, jacobi_residual,
                              master_table, mismatch_report, project_subalgebra, table_trace_polynomial)
from spinflow.poisson.tables import element_layout


def coordinate_forms(dim):
    """``E_k`` with ``x_k = tr(E_k X)`` for the layout diag, Re, Im."""
    out = []
    for kind, a, b in element_layout(dim):
        E = np.zeros((dim, dim), dtype=complex)
        if kind == "diag":
            E[a, a] = 1
        elif kind == "re":
            E[a, b] = E[b, a] = 0.5
        else:
            E[b, a] = 0.5 / 1j
            E[a, b] = -0.5 / 1j
        out.append(E)
    return out


def entry_bracket(X, d):
    """``{g_ab, X_cr} = -i (X_cb d_ar - X_ar d_cb)`` as a 4-index array."""
    e = np.eye(d)
    return -1j * (np.einsum("cb,ar->abcr", X, e) - np.einsum("ar,cb->abcr", X, e))


def test_master_table_matches_entry_brackets(rng):
    d = 3
    t = master_table(d)
    E = coordinate_forms(d)
    g = random_hermitian(d, rng, traceless=False)
    x = np.array([np.trace(Ek @ g).real for Ek in E])
    B = entry_bracket(g, d)
    oracle = np.array([[np.einsum("ba,rc,abcr->", Ek, El, B).real for El in E] for Ek in E])
    np.testing.assert_allclose(t.bracket(x), oracle, atol=1e-13)


def test_extended_table_matches_entry_brackets(rng):
    d = 2
    t = extended_table(d, 1)
    E = coordinate_forms(d)
    n = len(E)
    g = random_hermitian(d, rng, traceless=False)
    a = random_hermitian(d, rng, traceless=False)
    x = np.concatenate([[np.trace(Ek @ g).real for Ek in E], [np.trace(Ek @ a).real for Ek in E]])
    br = t.bracket(x)
    Bga = entry_bracket(a, d)
    oracle = np.array([[np.einsum("ba,rc,abcr->", Ek, El, Bga).real for El in E] for Ek in E])
    np.testing.assert_allclose(br[:n, n:], oracle, atol=1e-13)
    np.testing.assert_allclose(br[n:, n:], 0, atol=1e-15)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_antisymmetry_jacobi_centrality(dim):
    for t in (master_table(dim), extended_table(dim, 1)):
        assert t.antisymmetry_residual() == 0
        assert jacobi_residual(t) < 1e-12
        assert centrality_residual(t) < 1e-12


def brute_jacobi(t, x):
    """``{{x_a, x_b}, x_c} + cyclic`` evaluated by explicit loops at a point."""
    f = t.constants
    n = len(t)
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                s = 0.0
                for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
                    # {x_i, x_j} = f_ijm x_m, then {x_m, x_k} = f_mkl x_l
                    s += sum(f[i, j, m] * f[m, k, l] * x[l] for m in range(n) for l in range(n))
                worst = max(worst, abs(s))
    return worst


def test_jacobi_by_explicit_loops(rng):
    t = master_table(2)
    assert brute_jacobi(t, rng.normal(size=len(t))) < 1e-12


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_canonical_pair_reproduces_master_bracket(dim):
    assert canonical_consistency_check(dim, 100, np.random.default_rng(dim)) < 1e-12


def test_canonical_check_rejects_zero_trials():
    with pytest.raises(InputError):
        canonical_consistency_check(2, 0)


def test_spin_half_projection_is_levi_civita():
    t = project_subalgebra(master_table(2), chart("pauli"))
    assert t.labels == ("s_x", "s_y", "s_z")
    np.testing.assert_array_equal(t.constants, levi_civita())
    assert t.metadata["closed"]


@pytest.mark.parametrize("name", ["pauli", "uniaxial", "biaxial", "spin1", "spin1_extended", "spin1_nematic",
                                  "spin32", "su2xsu2", "dirac", "so4", "so5", "so5_tensor"])
def test_chart_tables_close_and_are_rational(name):
    ch = chart(name)
    src = master_table(ch.dim) if ch.n_order == 0 else extended_table(ch.dim, ch.n_order)
    t = project_subalgebra(src, ch)
    assert t.metadata["closed"], t.metadata["offending"]
    assert is_rational_table(t)
    assert jacobi_residual(t) < 1e-12


def test_uniaxial_relations():
    t = project_subalgebra(extended_table(2, 1), chart("uniaxial"))
    eps = levi_civita()
    s = [t.index(f"s_{c}") for c in "xyz"]
    n = [t.index(f"n_{c}") for c in "xyz"]
    f = t.constants
    np.testing.assert_array_equal(f[np.ix_(s, s, s)], eps)
    np.testing.assert_array_equal(f[np.ix_(s, n, n)], eps)
    np.testing.assert_array_equal(f[np.ix_(n, n)], 0)


def test_printed_report_flags_only_the_known_lines():
    rep = mismatch_report()
    flagged = {(r.group, r.name): r for r in rep.flagged()}
    assert set(flagged) == {("spin_one_ordered", "w_q"), ("spin_three_halves", "v_q"), ("dirac", "sigma_sigma")}
    assert flagged["spin_three_halves", "v_q"].best_ratio == pytest.approx(-1)
    assert flagged["spin_one_ordered", "w_q"].corrected.status == "match"
    assert flagged["dirac", "sigma_sigma"].corrected.best_ratio == pytest.approx(-1)
    assert all(r.status == "match" for r in rep.lines if (r.group, r.name) not in flagged)


def test_table_json_round_trip_is_exact():
    t = master_table(3)
    back = BracketTable.from_json(json.loads(json.dumps(t.to_json())))
    assert back.labels == t.labels
    np.testing.assert_array_equal(back.constants, t.constants)


def test_loading_non_antisymmetric_table_fails():
    data = {"labels": ["x", "y"], "f_abc": [[0, 1, 0, 1.0]]}
    with pytest.raises(InputError):
        BracketTable.from_json(data)


def trace_power_at(x, t, n):
    d = t.metadata["dim"]
    E = coordinate_forms(d)
    # rebuild the Hermitian matrix from its coordinates
    g = np.zeros((d, d), dtype=complex)
    for xk, (kind, a, b) in zip(x, element_layout(d)):
        if kind == "diag":
            g[a, a] = xk
        elif kind == "re":
            g[a, b] += xk
            g[b, a] += xk
        else:
            g[a, b] += 1j * xk
            g[b, a] -= 1j * xk
    assert np.allclose([np.trace(Ek @ g).real for Ek in E], x)
    return np.trace(np.linalg.matrix_power(g, n)).real


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_trace_casimirs_commute(dim, seed):
    t = master_table(dim)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=len(t))
    for n in range(2, dim + 1):
        p = table_trace_polynomial(t, n)
        assert p.evaluate(x) == pytest.approx(trace_power_at(x, t, n), rel=1e-10, abs=1e-10)
        assert casimir_commutation_check(t, p, trials=3, rng=rng) < 1e-10


def test_casimir_degree_above_dimension_is_rejected():
    t = master_table(2)
    p = table_trace_polynomial(master_table(3), 3)
    with pytest.raises(InputError):
        casimir_commutation_check(t, p)

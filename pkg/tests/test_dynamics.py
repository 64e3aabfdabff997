import numpy as np
import pytest

from spinflow.dynamics import (IntegrationError, Projections, SimState, integrate, nearest_orthogonal,
                               orthogonality_error, random_smooth_state, rhs, richardson_ratio,
                               single_mode_state, step_rk4, suggest_dt, uniform_state)
from spinflow.dynamics import pictures
from spinflow.dynamics.rhs import PRINTED_DEVIATIONS, rhs_antisymmetric
from spinflow.energy import MATRIX_CASES, CaseId, EnergyModel, energy_rate
from spinflow.matrix_core import InputError

CONST = dict(J=0.7, Jbar=1.3, A=0.4, B=0.9)
PICTURE_CASES = [CaseId.LL_HEISENBERG, CaseId.SU3_NORMAL, CaseId.SO6, CaseId.SO4, CaseId.SO5_FULL,
                 CaseId.SO5_TENSOR]


def model_for(case, dim=3):
    return EnergyModel(case, dim=dim, **CONST)


def exact_spin_wave(n, h, amp, sz, Jbar, t):
    # on the lattice the transverse part is an eigenvector of the Laplacian,
    # so the wave precesses rigidly: phase k x - Jbar sz k2 t
    k = 2 * np.pi / (n * h)
    k2 = 4 * np.sin(k * h / 2) ** 2 / h ** 2
    phase = k * np.arange(n) * h - Jbar * sz * k2 * t
    return np.stack([amp * np.cos(phase), amp * np.sin(phase), np.full(n, sz)], axis=-1), Jbar * sz * k2


def test_spin_wave_one_period_matches_exact_solution():
    n, h, amp = 16, 1.0, 0.3
    sz = np.sqrt(1 - amp ** 2)
    m = EnergyModel(CaseId.LL_HEISENBERG, J=0.0, Jbar=1.0)
    s0, omega = exact_spin_wave(n, h, amp, sz, 1.0, 0.0)
    T = 2 * np.pi / omega
    st = integrate(SimState({"s": s0}, (h,)), m, T / 1000, 1000)
    want, _ = exact_spin_wave(n, h, amp, sz, 1.0, st.time)
    assert st.time == pytest.approx(T, rel=1e-12)
    assert np.max(np.abs(st.fields["s"] - want)) / amp < 1e-6


def test_single_mode_state_shape():
    st = single_mode_state((16,), (1.0,), (2,), s0=1.0, amplitude=0.1)
    np.testing.assert_allclose(np.linalg.norm(st.fields["s"], axis=-1), 1.0, atol=1e-15)
    with pytest.raises(InputError):
        single_mode_state((16,), (1.0,), amplitude=2.0)


def test_landau_lifshitz_rhs_by_site_loop(rng):
    s = rng.normal(size=(7, 3))
    m = EnergyModel(CaseId.LL_HEISENBERG, J=0.3, Jbar=1.7)
    got = rhs(SimState({"s": s}, (0.5,)), m)["s"]
    for i in range(7):
        lap = (s[(i + 1) % 7] + s[i - 1] - 2 * s[i]) / 0.25
        want = [-1.7 * (lap[(a + 1) % 3] * s[i][(a + 2) % 3] - lap[(a + 2) % 3] * s[i][(a + 1) % 3])
                for a in range(3)]
        np.testing.assert_allclose(got[i], want, atol=1e-13)


def test_normal_matrix_rhs_by_site_loop(rng):
    m = model_for(CaseId.NORMAL_SU_N)
    st = random_smooth_state(m, (6,), (1.0,), seed=1)
    g = st.fields["g"]
    got = rhs(st, m)["g"]
    for i in range(6):
        L = g[(i + 1) % 6] + g[i - 1] - 2 * g[i]
        np.testing.assert_allclose(got[i], -1j * 1.3 * (g[i] @ L - L @ g[i]), atol=1e-13)


def test_uniform_matrix_state_only_advances_time():
    m = model_for(CaseId.NORMAL_SU_N)
    st = uniform_state(m, (8,), (1.0,), seed=2)
    out = step_rk4(st, m, 0.1)
    np.testing.assert_array_equal(out.fields["g"], st.fields["g"])
    assert out.time == pytest.approx(0.1) and out.step == 1


@pytest.mark.parametrize("case", list(CaseId))
def test_flow_conserves_energy_pointwise_in_time(case):
    m = model_for(case)
    st = random_smooth_state(m, (32,), (1.0,), seed=3)
    r = rhs(st, m)
    scale = sum(float(np.sum(np.abs(v) ** 2)) for v in r.values()) ** 0.5
    assert abs(energy_rate(m, st, r)) < 1e-12 * max(scale, 1.0)


@pytest.mark.parametrize("case", [CaseId.UNIAXIAL, CaseId.BIAXIAL])
def test_printed_variants_break_energy_conservation(case):
    m = model_for(case)
    st = random_smooth_state(m, (32,), (1.0,), seed=3)
    r = rhs(st, m, as_printed=True)
    base = rhs(st, m)
    assert any(np.max(np.abs(r[k] - base[k])) > 1e-6 for k in r)
    assert abs(energy_rate(m, st, r)) > 1e-6


@pytest.mark.parametrize("case", [CaseId.SO5_FULL, CaseId.SO5_TENSOR])
def test_printed_so5_variant_leaves_the_matrix_flow(case):
    # the flipped tensor term still conserves energy but is no longer the commutator flow
    m = model_for(case)
    st = random_smooth_state(m, (16,), (1.0,), seed=3)
    g = SimState({"g": pictures.to_matrix(case, st.fields)}, st.spacing)
    mat = rhs(g, pictures.matrix_model(m))["g"]
    printed = pictures.to_matrix(case, rhs(st, m, as_printed=True))
    assert np.max(np.abs(printed - mat)) > 1e-3 * np.max(np.abs(mat))


def test_printed_switch_covers_the_deviating_cases():
    assert set(PRINTED_DEVIATIONS) == {CaseId.UNIAXIAL, CaseId.BIAXIAL, CaseId.SO5_FULL, CaseId.SO5_TENSOR}


@pytest.mark.parametrize("case", MATRIX_CASES)
def test_trace_invariants_are_locally_stationary(case):
    m = model_for(case)
    st = random_smooth_state(m, (16,), (1.0,), seed=4)
    r = rhs(st, m)
    key = "g" if case == CaseId.NORMAL_SU_N else "a"
    x, dx = st.fields[key], r[key]
    for n in range(2, 4):
        rate = np.einsum("...ij,...ji->...", np.linalg.matrix_power(x, n - 1), dx)
        assert np.max(np.abs(rate)) < 1e-12


def test_vector_invariants_are_locally_stationary():
    m = model_for(CaseId.UNIAXIAL)
    st = random_smooth_state(m, (16,), (1.0,), seed=4)
    s, n = st.fields["s"], st.fields["n"]
    r = rhs(st, m)
    assert np.max(np.abs(np.sum(n * r["n"], -1))) < 1e-13
    assert np.max(np.abs(np.sum(r["s"] * n + s * r["n"], -1))) < 1e-13
    m = model_for(CaseId.BIAXIAL)
    st = random_smooth_state(m, (16,), (1.0,), seed=4)
    R, dR = st.fields["R"], rhs(st, m)["R"]
    RtdR = np.einsum("...ka,...kb->...ab", R, dR)
    assert np.max(np.abs(RtdR + np.swapaxes(RtdR, -1, -2))) < 1e-13


@pytest.mark.parametrize("case", PICTURE_CASES)
def test_matrix_picture_rhs_matches_component_rhs(case):
    m = model_for(case)
    st = random_smooth_state(m, (16,), (1.0,), seed=6)
    g = SimState({"g": pictures.to_matrix(case, st.fields)}, st.spacing)
    mat = rhs(g, pictures.matrix_model(m))["g"]
    comp = pictures.to_matrix(case, rhs(st, m))
    np.testing.assert_allclose(mat, comp, atol=1e-12 * np.max(np.abs(comp)))


@pytest.mark.parametrize("case", PICTURE_CASES)
def test_picture_maps_round_trip(case):
    st = random_smooth_state(model_for(case), (8,), (1.0,), seed=7)
    back = pictures.from_matrix(case, pictures.to_matrix(case, st.fields))
    for k, v in st.fields.items():
        np.testing.assert_allclose(back[k], v, atol=1e-14)


def test_antisymmetric_sector_matches_spin_one_flow():
    m = model_for(CaseId.SU3_NORMAL)
    st = random_smooth_state(m, (16,), (1.0,), seed=8)
    st = st.replace({"s": st.fields["s"], "q": np.zeros_like(st.fields["q"])})
    A = SimState({"g_anti": pictures.spin_one_to_antisymmetric(st.fields["s"])}, st.spacing)
    ds = rhs(st, m)["s"]
    dA = rhs_antisymmetric(A, m)["g_anti"]
    np.testing.assert_allclose(pictures.antisymmetric_to_spin(dA), ds, atol=1e-12)


def test_rk4_self_convergence_ratio():
    m = model_for(CaseId.LL_HEISENBERG)
    st = random_smooth_state(m, (32,), (1.0,), seed=1)
    ratio, e1, e2 = richardson_ratio(st, m, 32 * suggest_dt(st, m), steps=4)
    assert e2 < e1
    assert 16 * 0.8 <= ratio <= 16 * 1.2


def test_orthogonalize_projection_keeps_rotations_exact():
    m = model_for(CaseId.BIAXIAL)
    st = random_smooth_state(m, (16,), (1.0,), seed=2)
    out = integrate(st, m, 0.05, 20, projections=Projections(orthogonalize=True))
    assert orthogonality_error(out.fields["R"]) < 1e-13
    R = np.eye(3) + 1e-3 * np.arange(9).reshape(3, 3)
    assert orthogonality_error(nearest_orthogonal(R)) < 1e-14


def test_nonpositive_dt_rejected():
    m = model_for(CaseId.LL_HEISENBERG)
    st = random_smooth_state(m, (8,), (1.0,))
    for dt in (0.0, -1.0, float("nan")):
        with pytest.raises(InputError):
            step_rk4(st, m, dt)


def test_blow_up_raises_with_last_finite_state():
    m = model_for(CaseId.NORMAL_SU_N)
    st = random_smooth_state(m, (16,), (1.0,), seed=3, amplitude=1.0)
    with pytest.raises(IntegrationError) as info:
        integrate(st, m, 50.0, 200)
    assert info.value.state.is_finite()
    assert not info.value.bad.is_finite()


def test_suggested_step_shrinks_with_spacing():
    m = model_for(CaseId.LL_HEISENBERG)
    a = suggest_dt(random_smooth_state(m, (16,), (1.0,)), m)
    b = suggest_dt(random_smooth_state(m, (16,), (0.5,)), m)
    assert 0 < b < a

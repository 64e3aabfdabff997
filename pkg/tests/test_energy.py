import numpy as np
import pytest

from spinflow.dynamics import SimState, random_smooth_state, uniform_state
from spinflow.dynamics.pictures import spin_one_to_matrix
from spinflow.energy import (CaseId, EnergyModel, energy_density, energy_rate, functional_derivative,
                             total_energy)
from spinflow.matrix_core import InputError, random_hermitian

CONST = dict(J=0.7, Jbar=1.3, A=0.4, B=0.9)


def model_for(case, dim=3):
    return EnergyModel(case, dim=dim, **CONST)


def test_uniform_spin_energy():
    s0 = np.array([0.3, -0.4, 1.2])
    st = SimState({"s": np.tile(s0, (10, 1))}, (0.5,))
    m = model_for(CaseId.LL_HEISENBERG)
    assert total_energy(m, st) == pytest.approx(-0.7 * (s0 @ s0) * 10 * 0.5, rel=1e-14)


def test_uniform_matrix_energy(rng):
    g0 = random_hermitian(3, rng)
    st = SimState({"g": np.broadcast_to(g0, (6, 5, 3, 3)).copy()}, (1.0, 2.0))
    m = model_for(CaseId.NORMAL_SU_N)
    want = 0.7 / 2 * np.trace(g0 @ g0).real * 30 * 2.0
    assert total_energy(m, st) == pytest.approx(want, rel=1e-13)


def test_gradient_energy_of_spin_wave():
    # s = (cos kx, sin kx, 0): each forward/backward difference has |.|^2 = 4 sin^2(kh/2)/h^2
    n, h = 16, 1.0
    k = 2 * np.pi / n
    x = np.arange(n) * h
    s = np.stack([np.cos(k * x), np.sin(k * x), np.zeros(n)], axis=-1)
    m = EnergyModel(CaseId.LL_HEISENBERG, J=0.0, Jbar=2.0)
    dens = energy_density(m, SimState({"s": s}, (h,)))
    np.testing.assert_allclose(dens, 2.0 / 2 * 4 * np.sin(k * h / 2) ** 2 / h ** 2, atol=1e-14)


def finite_difference(m, st, other, eps=1e-6):
    d = {k: other.fields[k] - st.fields[k] for k in st.fields}
    plus = st.replace({k: st.fields[k] + eps * d[k] for k in d})
    minus = st.replace({k: st.fields[k] - eps * d[k] for k in d})
    fd = (total_energy(m, plus) - total_energy(m, minus)) / (2 * eps)
    return fd, energy_rate(m, st, d)


@pytest.mark.parametrize("case", list(CaseId))
def test_functional_derivative_matches_finite_difference(case):
    m = model_for(case)
    st = random_smooth_state(m, (24,), (0.8,), seed=2)
    other = random_smooth_state(m, (24,), (0.8,), seed=9)
    fd, an = finite_difference(m, st, other)
    assert fd == pytest.approx(an, rel=1e-8)


def test_functional_derivative_in_two_dimensions():
    m = model_for(CaseId.DEGENERATE_SU_N)
    st = random_smooth_state(m, (8, 6), (0.5, 0.7), seed=4)
    other = random_smooth_state(m, (8, 6), (0.5, 0.7), seed=5)
    fd, an = finite_difference(m, st, other)
    assert fd == pytest.approx(an, rel=1e-8)


def test_matrix_energy_is_unitarily_invariant(rng):
    m = model_for(CaseId.NORMAL_SU_N)
    st = random_smooth_state(m, (12,), (1.0,), seed=3)
    U, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    rot = st.replace({"g": U @ st.fields["g"] @ U.conj().T})
    assert total_energy(m, rot) == pytest.approx(total_energy(m, st), rel=1e-12)


def test_spin_one_energy_reduces_to_spin_form_without_quadrupole(rng):
    s = rng.normal(size=(10, 3))
    st3 = SimState({"s": s, "q": np.zeros((10, 3, 3))}, (1.0,))
    stll = SimState({"s": s}, (1.0,))
    e3 = energy_density(model_for(CaseId.SU3_NORMAL), st3)
    ell = energy_density(EnergyModel(CaseId.LL_HEISENBERG, J=0.7, Jbar=1.3), stll)
    np.testing.assert_allclose(e3, ell, atol=1e-13)


def test_spin_one_trace_identity(rng):
    s = rng.normal(size=3)
    q = rng.normal(size=(3, 3))
    q = (q + q.T) / 2
    q -= np.trace(q) / 3 * np.eye(3)
    g = spin_one_to_matrix(s, q)
    assert np.trace(g @ g).real == pytest.approx(np.sum(q * q) + s @ s / 2, rel=1e-13)


def test_uniform_state_has_no_gradient_energy():
    m = model_for(CaseId.SO6)
    st = uniform_state(m, (6,), (1.0,), seed=1)
    flat = EnergyModel(CaseId.SO6, J=0.0, Jbar=1.0)
    assert total_energy(flat, st) == 0.0
    assert total_energy(m, st) > 0


@pytest.mark.parametrize("kw", [dict(Jbar=0.0), dict(Jbar=-1.0), dict(J=float("nan"))])
def test_invalid_constants_are_rejected(kw):
    with pytest.raises(InputError):
        EnergyModel(CaseId.NORMAL_SU_N, **kw)


def test_nonpositive_B_rejected_only_where_used():
    with pytest.raises(InputError):
        EnergyModel(CaseId.UNIAXIAL, B=0.0)
    EnergyModel(CaseId.LL_HEISENBERG, B=0.0)


def test_unknown_case_lists_valid_ones():
    with pytest.raises(InputError, match="NORMAL_SU_N"):
        EnergyModel("NOT_A_CASE")


def test_missing_field_and_unknown_derivative():
    m = model_for(CaseId.UNIAXIAL)
    st = SimState({"s": np.zeros((5, 3))}, (1.0,))
    with pytest.raises(InputError):
        total_energy(m, st)
    st = random_smooth_state(m, (5,), (1.0,))
    with pytest.raises(InputError):
        functional_derivative(m, st, "g")

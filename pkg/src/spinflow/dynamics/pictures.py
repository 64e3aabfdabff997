"""Maps between the matrix picture (one Hermitian g per site) and component pictures.

Normalization constants below say which matrix-picture stiffness reproduces a
component-picture equation with stiffness ``Jbar``:

* spin 1/2, ``g = s . sigma``: the matrix flow ``-i Jbar_m [g, lap g]`` gives
  ``s' = -2 Jbar_m lap(s) x s``, so ``Jbar_m = Jbar / 2``.
* spin 1, ``g = q - i eps.s/2``: the commutator equations for (q, eps_hat) are
  the matrix flow with ``Jbar_m = Jbar``.
* Dirac and SO(5) decompositions of a 4x4 g: ``Jbar_m = Jbar``.
* the antisymmetric sector of spin 1 is ``A = -eps_hat`` with unchanged ``Jbar``.

The spin-1 homogeneous constants match as well: with ``g`` as above,
``tr g^2 = tr q^2 + s^2/2``, so ``-2 J tr g^2`` at ``q = 0`` equals ``-J s^2``.
"""

from __future__ import annotations

import numpy as np

from ..bases import dirac_matrices, levi_civita, pauli_matrices, so5_matrices
from ..energy import CaseId, EnergyModel
from .rhs import eps_hat, spin_from_eps_hat

JBAR_MATRIX_PER_COMPONENT = {
    CaseId.LL_HEISENBERG: 0.5,
    CaseId.SU3_NORMAL: 1.0,
    CaseId.SO6: 1.0,
    CaseId.SO5_FULL: 1.0,
    CaseId.SO5_TENSOR: 1.0,
    CaseId.SO4: 1.0,
}

MATRIX_DIM = {
    CaseId.LL_HEISENBERG: 2,
    CaseId.SU3_NORMAL: 3,
    CaseId.SO6: 4,
    CaseId.SO5_FULL: 4,
    CaseId.SO5_TENSOR: 4,
    CaseId.SO4: 4,
}


def normalization_constants() -> dict:
    return {
        "jbar_matrix_per_component": {k.value: v for k, v in JBAR_MATRIX_PER_COMPONENT.items()},
        "spin_half": "g = s . sigma",
        "spin_one": "g = q - i eps_abc s_c / 2; s_a = i eps_abc g_bc, q = (g + g^T)/2",
        "dirac": "g = g5 G5 + gamma_m G_m + gammabar_m Gbar_m + sigma_mn S_mn / 2; gamma_a = tr(g G_a)/4",
        "so5": "g = ga G_a + gab G_ab / 2; ga = tr(g G_a)/4, gab = tr(g G_ab)/4",
        "antisymmetric": "A = -eps_hat",
    }


def matrix_model(model: EnergyModel) -> EnergyModel:
    """Matrix-picture model whose flow reproduces the component case."""
    scale = JBAR_MATRIX_PER_COMPONENT[model.case]
    return EnergyModel(CaseId.NORMAL_SU_N, J=model.J, Jbar=model.Jbar * scale, dim=MATRIX_DIM[model.case])


def _tr(g, K):
    return np.einsum("...ij,ji->...", g, K).real


# spin 1/2 ---------------------------------------------------------------------

def spin_half_to_matrix(s: np.ndarray) -> np.ndarray:
    return np.einsum("...a,aij->...ij", s, pauli_matrices().astype(complex))


def matrix_to_spin_half(g: np.ndarray) -> np.ndarray:
    return np.stack([_tr(g, sg) / 2 for sg in pauli_matrices()], axis=-1)


# spin 1 -----------------------------------------------------------------------

def spin_one_to_matrix(s: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=complex) - 1j * eps_hat(s)


def matrix_to_spin_one(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.einsum("abc,...bc->...a", levi_civita(), 1j * g).real
    q = ((g + np.swapaxes(g, -1, -2)) / 2).real
    return s, q


def spin_one_to_antisymmetric(s: np.ndarray) -> np.ndarray:
    return -eps_hat(s)


def antisymmetric_to_spin(A: np.ndarray) -> np.ndarray:
    return spin_from_eps_hat(-A)


# Dirac decomposition ------------------------------------------------------------

def dirac_to_matrix(gamma5, gamma, gammabar, sigma) -> np.ndarray:
    m = dirac_matrices()
    return (np.asarray(gamma5)[..., None, None] * m["gamma5"]
            + np.einsum("...m,mij->...ij", gamma, m["gamma"])
            + np.einsum("...m,mij->...ij", gammabar, m["gammabar"])
            + np.einsum("...mn,mnij->...ij", sigma, m["sigma"]) / 2)


def matrix_to_dirac(g: np.ndarray) -> dict:
    m = dirac_matrices()
    return {
        "gamma5": _tr(g, m["gamma5"]) / 4,
        "gamma": np.einsum("...ij,mji->...m", g, m["gamma"]).real / 4,
        "gammabar": np.einsum("...ij,mji->...m", g, m["gammabar"]).real / 4,
        "sigma": np.einsum("...ij,mnji->...mn", g, m["sigma"]).real / 4,
    }


# SO(5) decomposition ------------------------------------------------------------

def so5_to_matrix(ga, gab) -> np.ndarray:
    Ga, Gab = so5_matrices()
    out = np.einsum("...ab,abij->...ij", gab, Gab) / 2
    if ga is not None:
        out = out + np.einsum("...a,aij->...ij", ga, Ga)
    return out


def matrix_to_so5(g: np.ndarray) -> dict:
    Ga, Gab = so5_matrices()
    return {
        "ga": np.einsum("...ij,aji->...a", g, Ga).real / 4,
        "gab": np.einsum("...ij,abji->...ab", g, Gab).real / 4,
    }


# dispatch ---------------------------------------------------------------------

def to_matrix(case: CaseId, fields: dict) -> np.ndarray:
    if case == CaseId.LL_HEISENBERG:
        return spin_half_to_matrix(fields["s"])
    if case == CaseId.SU3_NORMAL:
        return spin_one_to_matrix(fields["s"], fields["q"])
    if case == CaseId.SO6:
        return dirac_to_matrix(fields["gamma5"], fields["gamma"], fields["gammabar"], fields["sigma"])
    if case == CaseId.SO4:
        z = np.zeros(fields["sigma"].shape[:-2])
        zv = np.zeros(z.shape + (4,))
        return dirac_to_matrix(z, zv, zv, fields["sigma"])
    if case in (CaseId.SO5_FULL, CaseId.SO5_TENSOR):
        return so5_to_matrix(fields.get("ga"), fields["gab"])
    raise KeyError(f"no matrix picture for {case}")


def from_matrix(case: CaseId, g: np.ndarray) -> dict:
    if case == CaseId.LL_HEISENBERG:
        return {"s": matrix_to_spin_half(g)}
    if case == CaseId.SU3_NORMAL:
        s, q = matrix_to_spin_one(g)
        return {"s": s, "q": q}
    if case == CaseId.SO6:
        return matrix_to_dirac(g)
    if case == CaseId.SO4:
        return {"sigma": matrix_to_dirac(g)["sigma"]}
    if case == CaseId.SO5_FULL:
        return matrix_to_so5(g)
    if case == CaseId.SO5_TENSOR:
        return {"gab": matrix_to_so5(g)["gab"]}
    raise KeyError(f"no matrix picture for {case}")

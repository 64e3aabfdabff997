"""Right-hand sides of the equations of motion, one function per case.

All functions take a :class:`SimState` (or anything with ``fields`` and
``spacing``) plus an :class:`EnergyModel` and return a dict of time
derivatives keyed like the input fields. Laplacians use the narrow stencil of
:mod:`spinflow.field_grid`.

Four cases have an ``as_printed`` switch. The default follows the Hamiltonian
flow of the case's energy; ``as_printed=True`` reproduces the displayed
formula where the two differ:

* UNIAXIAL: the displayed n-equation carries an extra ``-B lap(n) x n`` term.
* BIAXIAL: the displayed R-equation has the opposite sign of ``J``.
* SO5_FULL / SO5_TENSOR: the displayed tensor-tensor term has the opposite sign.
"""

from __future__ import annotations

import numpy as np

from ..bases import levi_civita
from ..energy import CaseId, EnergyModel, require_fields
from ..field_grid import laplacian_array
from ..matrix_core import InputError

PRINTED_DEVIATIONS = (CaseId.UNIAXIAL, CaseId.BIAXIAL, CaseId.SO5_FULL, CaseId.SO5_TENSOR)


def _comm(a, b):
    return a @ b - b @ a


def _prep(state, model: EnergyModel, case: CaseId | tuple):
    cases = case if isinstance(case, tuple) else (case,)
    if model.case not in cases:
        raise InputError(f"model case {model.case.value} does not match {', '.join(c.value for c in cases)}")
    require_fields(model, state.fields)
    h = state.spacing
    return state.fields, (lambda x: laplacian_array(np.asarray(x), h))


def rhs_matrix_normal(state, model: EnergyModel) -> dict:
    """``g' = -i Jbar [g, lap g]``."""
    f, lap = _prep(state, model, CaseId.NORMAL_SU_N)
    g = f["g"]
    return {"g": -1j * model.Jbar * _comm(g, lap(g))}


def rhs_matrix_degenerate(state, model: EnergyModel) -> dict:
    """``g' = -i Jbar [g, lap g] - i B [a, lap a]``,  ``a' = i [a, J g - Jbar lap g]``."""
    f, lap = _prep(state, model, (CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN))
    g, a = f["g"], f["a"]
    Lg = lap(g)
    gdot = -1j * (model.Jbar * _comm(g, Lg) + model.B * _comm(a, lap(a)))
    adot = 1j * _comm(a, model.J * g - model.Jbar * Lg)
    return {"g": gdot, "a": adot}


def rhs_landau_lifshitz(state, model: EnergyModel) -> dict:
    """``s'_a = -Jbar eps_abc (lap s)_b s_c``."""
    f, lap = _prep(state, model, CaseId.LL_HEISENBERG)
    s = f["s"]
    return {"s": -model.Jbar * np.cross(lap(s), s)}


def rhs_uniaxial(state, model: EnergyModel, as_printed: bool = False) -> dict:
    f, lap = _prep(state, model, CaseId.UNIAXIAL)
    s, n = f["s"], f["n"]
    Ln = lap(n)
    sdot = -model.B * np.cross(Ln, n)
    if as_printed:
        ndot = np.cross(model.J * s - model.B * Ln, n)
    else:
        ndot = model.J * np.cross(s, n)
    return {"s": sdot, "n": ndot}


def rhs_biaxial(state, model: EnergyModel, as_printed: bool = False) -> dict:
    """``s'_a = -B eps_abc (lap R)_lb R_lc``,  ``R'_ab = J R_ar eps_rbc s_c``.

    Rotations act on the second index of R, so ``R^T R'`` is antisymmetric
    whenever R is orthogonal and the entries of ``R R^T`` are conserved.
    """
    f, lap = _prep(state, model, CaseId.BIAXIAL)
    eps = levi_civita()
    s, R = f["s"], f["R"]
    sdot = -model.B * np.einsum("abc,...lb,...lc->...a", eps, lap(R), R)
    sign = -1.0 if as_printed else 1.0
    Rdot = sign * model.J * np.einsum("...ar,rbc,...c->...ab", R, eps, s)
    return {"s": sdot, "R": Rdot}


def eps_hat(s: np.ndarray) -> np.ndarray:
    """``eps_ab = eps_abc s_c / 2``."""
    return np.einsum("abc,...c->...ab", levi_civita(), s) / 2


def spin_from_eps_hat(e: np.ndarray) -> np.ndarray:
    return np.einsum("abc,...ab->...c", levi_civita(), e)


def rhs_su3_components(state, model: EnergyModel) -> dict:
    """Commutator equations for the quadrupole matrix q and the spin matrix eps_hat."""
    f, lap = _prep(state, model, CaseId.SU3_NORMAL)
    q, e = f["q"], eps_hat(f["s"])
    Lq, Le = lap(q), lap(e)
    Jb = model.Jbar
    qdot = Jb * (_comm(Le, q) + _comm(Lq, e))
    edot = Jb * (_comm(q, Lq) + _comm(Le, e))
    return {"s": spin_from_eps_hat(edot), "q": qdot}


def rhs_nematic(state, model: EnergyModel) -> dict:
    f, lap = _prep(state, model, CaseId.NEMATIC)
    eps = levi_civita()
    s, w = f["s"], f["w"]
    sdot = -2 * model.B * np.einsum("abc,...bl,...cl->...a", eps, lap(w), w)
    rot = np.einsum("agr,...rb->...bga", eps, w)
    wdot = -model.J * np.einsum("...a,...bga->...bg", s, rot + np.swapaxes(rot, -2, -3))
    return {"s": sdot, "w": wdot}


def rhs_su2xsu2(state, model: EnergyModel) -> dict:
    f, lap = _prep(state, model, CaseId.SU2xSU2)
    s, u = f["s"], f["u"]
    Ls, Lu = lap(s), lap(u)
    Jb = model.Jbar
    udot = -Jb * (np.cross(Ls, u) + np.cross(Lu, s))
    sdot = -Jb * (np.cross(Lu, u) + np.cross(Ls, s))
    return {"u": udot, "s": sdot}


def _sigma_sigma(sig, Lsig):
    """``sigma_ml lap(sigma)_ln - sigma_ln lap(sigma)_ml``."""
    return sig @ Lsig - np.einsum("...ln,...ml->...mn", sig, Lsig)


def rhs_so6(state, model: EnergyModel) -> dict:
    f, lap = _prep(state, model, CaseId.SO6)
    g5, gm, gb, sig = f["gamma5"], f["gamma"], f["gammabar"], f["sigma"]
    L5, Lm, Lb, Ls = lap(g5), lap(gm), lap(gb), lap(sig)
    c = 2 * model.Jbar
    d5 = c * (np.sum(gb * Lm, -1) - np.sum(gm * Lb, -1))
    dm = c * (g5[..., None] * Lb - gb * L5[..., None]
              + np.einsum("...mn,...n->...m", sig, Lm) - np.einsum("...n,...mn->...m", gm, Ls))
    db = c * (gm * L5[..., None] - g5[..., None] * Lm
              + np.einsum("...n,...nm->...m", gb, Ls) - np.einsum("...nm,...n->...m", sig, Lb))
    ds = c * (np.einsum("...n,...m->...mn", gm, Lm) - np.einsum("...m,...n->...mn", gm, Lm)
              + np.einsum("...n,...m->...mn", gb, Lb) - np.einsum("...m,...n->...mn", gb, Lb)
              + _sigma_sigma(sig, Ls))
    return {"gamma5": d5, "gamma": dm, "gammabar": db, "sigma": ds}


def rhs_so4(state, model: EnergyModel) -> dict:
    f, lap = _prep(state, model, CaseId.SO4)
    sig = f["sigma"]
    return {"sigma": 2 * model.Jbar * _sigma_sigma(sig, lap(sig))}


def _tensor_term(gab, Lgab):
    """``gamma_ac lap(gamma)_cb - gamma_cb lap(gamma)_ac``."""
    return gab @ Lgab - np.einsum("...cb,...ac->...ab", gab, Lgab)


def rhs_so5(state, model: EnergyModel, as_printed: bool = False) -> dict:
    f, lap = _prep(state, model, (CaseId.SO5_FULL, CaseId.SO5_TENSOR))
    gab = f["gab"]
    Lab = lap(gab)
    c = 2 * model.Jbar
    sign = -1.0 if as_printed else 1.0
    dab = c * sign * _tensor_term(gab, Lab)
    if model.case == CaseId.SO5_TENSOR:
        return {"gab": dab}
    ga = f["ga"]
    La = lap(ga)
    da = c * (np.einsum("...ab,...b->...a", gab, La) - np.einsum("...b,...ab->...a", ga, Lab))
    dab = dab + c * (np.einsum("...b,...a->...ab", ga, La) - np.einsum("...a,...b->...ab", ga, La))
    return {"ga": da, "gab": dab}


def rhs_antisymmetric(state, model: EnergyModel) -> dict:
    """``A' = [A, D]`` for the real antisymmetric part ``A`` of g.

    With the quadratic energy ``J |A|^2/2 + Jbar |grad A|^2/2`` the derivative in
    the trace pairing is ``D = Jbar lap A - J A``, so ``A' = Jbar [A, lap A]``.
    The model's case is not consulted; only ``J`` and ``Jbar`` are read.
    """
    if "g_anti" not in state.fields:
        raise InputError("antisymmetric dynamics needs field 'g_anti'")
    A = np.asarray(state.fields["g_anti"])
    if A.shape[-1] < 3:
        raise InputError("antisymmetric dynamics needs matrix dimension >= 3")
    D = model.Jbar * laplacian_array(A, state.spacing) - model.J * A
    return {"g_anti": _comm(A, D)}


_DISPATCH = {
    CaseId.NORMAL_SU_N: rhs_matrix_normal,
    CaseId.DEGENERATE_SU_N: rhs_matrix_degenerate,
    CaseId.SU3_BROKEN: rhs_matrix_degenerate,
    CaseId.LL_HEISENBERG: rhs_landau_lifshitz,
    CaseId.UNIAXIAL: rhs_uniaxial,
    CaseId.BIAXIAL: rhs_biaxial,
    CaseId.SU3_NORMAL: rhs_su3_components,
    CaseId.NEMATIC: rhs_nematic,
    CaseId.SU2xSU2: rhs_su2xsu2,
    CaseId.SO6: rhs_so6,
    CaseId.SO4: rhs_so4,
    CaseId.SO5_FULL: rhs_so5,
    CaseId.SO5_TENSOR: rhs_so5,
}


def rhs(state, model: EnergyModel, as_printed: bool = False) -> dict:
    """Time derivative of every dynamical field of the model's case."""
    fn = _DISPATCH[model.case]
    if model.case in PRINTED_DEVIATIONS:
        return fn(state, model, as_printed=as_printed)
    return fn(state, model)

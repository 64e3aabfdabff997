"""Conservation monitors, flux fields, continuity residuals and spin-wave dispersion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bases import levi_civita
from .dynamics import pictures
from .dynamics.rhs import rhs as case_rhs
from .energy import MATRIX_CASES, CaseId, EnergyModel, energy_density, functional_derivatives, total_energy
from .field_grid import (cell_volume, divergence_array, forward_array, gradient_array, volume_integral_array)
from .matrix_core import InputError

FLUX_CASES = (CaseId.NORMAL_SU_N, CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN, CaseId.LL_HEISENBERG,
              CaseId.UNIAXIAL, CaseId.BIAXIAL, CaseId.SU3_NORMAL, CaseId.NEMATIC, CaseId.SU2xSU2)

# fields whose volume integrals are conserved, per case
CHARGED_FIELDS = {
    CaseId.NORMAL_SU_N: ("g",),
    CaseId.DEGENERATE_SU_N: ("g",),
    CaseId.SU3_BROKEN: ("g",),
    CaseId.LL_HEISENBERG: ("s",),
    CaseId.UNIAXIAL: ("s",),
    CaseId.BIAXIAL: ("s",),
    CaseId.SU3_NORMAL: ("s", "q"),
    CaseId.NEMATIC: ("s",),
    CaseId.SU2xSU2: ("s", "u"),
    CaseId.SO6: ("gamma5", "gamma", "gammabar", "sigma"),
    CaseId.SO4: ("sigma",),
    CaseId.SO5_FULL: ("ga", "gab"),
    CaseId.SO5_TENSOR: ("gab",),
}

_AX = "xyz"


def _comm(a, b):
    return a @ b - b @ a


def _trpow(g: np.ndarray, n: int) -> np.ndarray:
    return np.trace(np.linalg.matrix_power(g, n), axis1=-2, axis2=-1).real


# -- pointwise Casimirs and charges ---------------------------------------------------

def _matrix_of(model: EnergyModel, state) -> np.ndarray:
    return state.fields["g"] if model.case in MATRIX_CASES else pictures.to_matrix(model.case, state.fields)


def _casimir_table(model: EnergyModel, state) -> dict[str, tuple[np.ndarray, float]]:
    """name -> (pointwise invariant, natural scale = (largest field norm)^degree)."""
    f = state.fields
    c = model.case

    def nmax(x, nd):
        x = np.asarray(x)
        return float(np.sqrt(np.max(np.sum(np.abs(x) ** 2, axis=tuple(range(-nd, 0)))))) if x.size else 0.0

    if c == CaseId.NORMAL_SU_N:
        N = nmax(f["g"], 2)
        return {f"tr_g{n}": (_trpow(f["g"], n), N ** n) for n in range(2, model.dim + 1)}
    if c in (CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN):
        N = nmax(f["a"], 2)
        return {f"tr_a{n}": (_trpow(f["a"], n), N ** n) for n in range(2, model.dim + 1)}
    if c == CaseId.LL_HEISENBERG:
        return {"s2": (np.sum(f["s"] ** 2, -1), nmax(f["s"], 1) ** 2)}
    if c == CaseId.UNIAXIAL:
        Ns, Nn = nmax(f["s"], 1), nmax(f["n"], 1)
        return {"s.n": (np.sum(f["s"] * f["n"], -1), Ns * Nn), "n2": (np.sum(f["n"] ** 2, -1), Nn ** 2)}
    if c == CaseId.BIAXIAL:
        RRt = np.einsum("...ik,...jk->...ij", f["R"], f["R"])
        N2 = nmax(f["R"], 2) ** 2
        return {f"RRt_{_AX[i]}{_AX[j]}": (RRt[..., i, j], N2) for i in range(3) for j in range(i, 3)}
    if c == CaseId.NEMATIC:
        N = nmax(f["w"], 2)
        return {f"tr_w{n}": (_trpow(f["w"], n), N ** n) for n in (1, 2, 3)}
    if c == CaseId.SU2xSU2:
        s, u = f["s"], f["u"]
        N2 = nmax(s, 1) ** 2 + nmax(u, 1) ** 2
        return {"s2+u2": (np.sum(s * s + u * u, -1), N2), "s.u": (np.sum(s * u, -1), N2)}
    g = _matrix_of(model, state)
    N = nmax(g, 2)
    # odd traces vanish identically on the so(4) and so(5) spinor blocks
    powers = {CaseId.SU3_NORMAL: (2, 3), CaseId.SO4: (2, 4), CaseId.SO5_TENSOR: (2, 4)}.get(c, (2, 3, 4))
    return {f"tr_g{n}": (_trpow(g, n), N ** n) for n in powers}


def casimir_densities(model: EnergyModel, state) -> dict[str, np.ndarray]:
    """Pointwise invariants of each case's bracket algebra."""
    return {k: v for k, (v, _) in _casimir_table(model, state).items()}


def casimir_scales(model: EnergyModel, state) -> dict[str, float]:
    """Natural magnitude of each invariant: the largest field norm to the invariant's degree."""
    return {k: max(sc, float(np.max(np.abs(v)))) or 1.0 for k, (v, sc) in _casimir_table(model, state).items()}


ANTISYMMETRIC_FIELDS = ("sigma", "gab")


def _components(name: str, total: np.ndarray, antisymmetric: bool = False) -> dict[str, float]:
    """Independent real components of an integrated payload (fixed set per field)."""
    total = np.asarray(total)
    if total.ndim == 0:
        return {name: float(total.real)}
    if total.ndim == 1:
        labels = _AX if total.shape[0] == 3 else [str(i + 1) for i in range(total.shape[0])]
        return {f"{name}_{lab}": float(total[i].real) for i, lab in enumerate(labels)}
    out = {}
    d = total.shape[-1]
    for i in range(d):
        for j in range(i, d):
            tag = f"{i + 1}{j + 1}"
            if np.iscomplexobj(total):
                if i == j:
                    out[f"{name}_{tag}"] = float(total[i, j].real)
                else:
                    out[f"{name}_re{tag}"] = float(total[i, j].real)
                    out[f"{name}_im{tag}"] = float(total[i, j].imag)
            elif not (antisymmetric and i == j):
                out[f"{name}_{tag}"] = float(total[i, j])
    return out


def charges(model: EnergyModel, state) -> dict[str, float]:
    """Volume integrals of the conserved densities, split into real components."""
    out = {}
    for name in CHARGED_FIELDS[model.case]:
        total = volume_integral_array(np.asarray(state.fields[name]), state.spacing)
        label = name.upper() if len(name) == 1 else name
        out.update(_components(label, total, name in ANTISYMMETRIC_FIELDS))
    return out


def charge_scale(state) -> float:
    """Volume times the largest per-site field norm; the unit for charge drift."""
    from .dynamics.integrate import max_field_norm

    V = cell_volume(state.spacing) * int(np.prod(state.grid))
    return V * max_field_norm(state) or 1.0


# -- conservation report ------------------------------------------------------------

@dataclass
class ConservationReport:
    time: float
    step: int
    energy: float
    charges: dict
    casimir_min: dict
    casimir_max: dict
    drift: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = ["step", "time", "energy", "energy_drift"] + list(self.charges)
        for k in self.casimir_min:
            cols += [f"{k}_min", f"{k}_max"]
        return cols

    def row(self) -> list:
        vals = [self.step, self.time, self.energy, self.drift.get("energy", 0.0)] + list(self.charges.values())
        for k in self.casimir_min:
            vals += [self.casimir_min[k], self.casimir_max[k]]
        return vals


def conservation_report(state, model: EnergyModel, reference: ConservationReport | None = None,
                        scales: dict | None = None) -> ConservationReport:
    """Energy, charges and Casimir extrema; drifts relative to ``reference`` when given.

    Drift conventions: energy relative to ``|H(0)|`` (absolute when ``H(0) = 0``);
    charges relative to ``scales['charge']`` (volume times the largest initial
    field norm); Casimir extrema relative to ``scales['casimir'][name]``, the
    natural magnitude from :func:`casimir_scales` at the reference state.
    """
    cas = casimir_densities(model, state)
    rep = ConservationReport(
        time=float(state.time), step=int(state.step), energy=total_energy(model, state),
        charges=charges(model, state),
        casimir_min={k: float(np.min(v)) for k, v in cas.items()},
        casimir_max={k: float(np.max(v)) for k, v in cas.items()},
    )
    if reference is None:
        rep.drift = {"energy": 0.0} | {k: 0.0 for k in rep.charges} | {f"{k}_min": 0.0 for k in cas} \
            | {f"{k}_max": 0.0 for k in cas}
        return rep
    scales = scales or {}
    e0 = abs(reference.energy)
    rep.drift["energy"] = abs(rep.energy - reference.energy) / (e0 if e0 > 0 else 1.0)
    qs = scales.get("charge", 1.0)
    for k, v in rep.charges.items():
        rep.drift[k] = abs(v - reference.charges[k]) / qs
    cscale = scales.get("casimir", {})
    for k in cas:
        cs = cscale.get(k) or max(abs(reference.casimir_min[k]), abs(reference.casimir_max[k])) or 1.0
        rep.drift[f"{k}_min"] = abs(rep.casimir_min[k] - reference.casimir_min[k]) / cs
        rep.drift[f"{k}_max"] = abs(rep.casimir_max[k] - reference.casimir_max[k]) / cs
    return rep


class ConservationMonitor:
    """Collects time-ordered reports against the first state it sees."""

    def __init__(self, model: EnergyModel, state):
        self.model = model
        self.reference = conservation_report(state, model)
        self.scales = {"charge": charge_scale(state), "casimir": casimir_scales(model, state)}
        self.reports = [self.reference]

    def record(self, state) -> ConservationReport:
        if state.time <= self.reports[-1].time:
            raise InputError("reports must be strictly time-ordered")
        rep = conservation_report(state, self.model, self.reference, self.scales)
        self.reports.append(rep)
        return rep

    def max_drift(self) -> dict:
        keys = self.reports[-1].drift
        return {k: max(r.drift.get(k, 0.0) for r in self.reports) for k in keys}


# -- fluxes ---------------------------------------------------------------------------

def _unsupported(case: CaseId, what: str):
    names = ", ".join(c.value for c in FLUX_CASES)
    raise NotImplementedError(f"{what} is not implemented for {case.value}; supported cases: {names}")


def flux_field(state, model: EnergyModel) -> dict[str, list[np.ndarray]]:
    """Link-centred fluxes of the conserved densities, one array per axis.

    Entry ``i`` along axis ``k`` lives on the link between sites ``i`` and
    ``i + e_k``; ``divergence_array(..., centering='link')`` of these fluxes is
    minus the time derivative of the density, exactly.
    """
    c = model.case
    if c not in FLUX_CASES:
        _unsupported(c, "flux_field")
    f = state.fields
    h = state.spacing
    axes = range(len(h))

    def fw(x, k):
        return forward_array(np.asarray(x), h, k)

    if c in MATRIX_CASES:
        out = {"g": []}
        for k in axes:
            j = 1j * model.Jbar * _comm(f["g"], fw(f["g"], k))
            if c != CaseId.NORMAL_SU_N:
                j = j + 1j * model.B * _comm(f["a"], fw(f["a"], k))
            out["g"].append(j)
        return out
    if c == CaseId.LL_HEISENBERG:
        return {"s": [model.Jbar * np.cross(fw(f["s"], k), f["s"]) for k in axes]}
    if c == CaseId.UNIAXIAL:
        return {"s": [model.B * np.cross(fw(f["n"], k), f["n"]) for k in axes]}
    eps = levi_civita()
    if c == CaseId.BIAXIAL:
        return {"s": [model.B * np.einsum("abc,...lb,...lc->...a", eps, fw(f["R"], k), f["R"]) for k in axes]}
    if c == CaseId.NEMATIC:
        return {"s": [2 * model.B * np.einsum("abc,...bl,...cl->...a", eps, fw(f["w"], k), f["w"]) for k in axes]}
    if c == CaseId.SU2xSU2:
        s, u = f["s"], f["u"]
        return {
            "u": [model.Jbar * (np.cross(fw(s, k), u) + np.cross(fw(u, k), s)) for k in axes],
            "s": [model.Jbar * (np.cross(fw(u, k), u) + np.cross(fw(s, k), s)) for k in axes],
        }
    if c == CaseId.SU3_NORMAL:
        g = pictures.to_matrix(c, f)
        out = {"s": [], "q": []}
        for k in axes:
            s, q = pictures.matrix_to_spin_one(1j * model.Jbar * _comm(g, fw(g, k)))
            out["s"].append(s)
            out["q"].append(q)
        return out
    _unsupported(c, "flux_field")


def charge_continuity_residual(state, model: EnergyModel) -> dict[str, float]:
    """``max |d(rho)/dt + div j|`` per conserved field."""
    rates = case_rhs(state, model)
    flux = flux_field(state, model)
    return {k: float(np.max(np.abs(rates[k] + divergence_array(v, state.spacing, "link"))))
            for k, v in flux.items()}


def energy_flux(state, model: EnergyModel) -> list[np.ndarray]:
    """Site-centred energy flux ``q_k = tr(D j_k)`` for the matrix cases.

    ``D`` is the functional derivative of the energy and ``j_k`` the site-centred
    charge flux built from central gradients. For degenerate states the extra
    term ``i tr(D_a [a, Jbar grad_k g])`` is added ahead of ``tr(D_g j_k)``.
    """
    c = model.case
    if c not in MATRIX_CASES:
        names = ", ".join(x.value for x in MATRIX_CASES)
        raise NotImplementedError(f"energy_flux is not implemented for {c.value}; supported cases: {names}")
    f = state.fields
    h = state.spacing
    D = functional_derivatives(model, state)
    out = []
    for k in range(len(h)):
        dg = gradient_array(f["g"], h, k)
        j = 1j * model.Jbar * _comm(f["g"], dg)
        qk = 0.0
        if c != CaseId.NORMAL_SU_N:
            da = gradient_array(f["a"], h, k)
            j = j + 1j * model.B * _comm(f["a"], da)
            qk = np.einsum("...ij,...ji->...", D["a"], 1j * _comm(f["a"], model.Jbar * dg)).real
        out.append(qk + np.einsum("...ij,...ji->...", D["g"], j).real)
    return out


def energy_rate_density(state, model: EnergyModel) -> np.ndarray:
    """Pointwise ``de/dt`` along the flow.

    The energy densities of the matrix cases are quadratic, so
    ``(e(x + v) - e(x - v)) / 2`` is their exact derivative along ``v``.
    """
    v = case_rhs(state, model)
    plus = state.replace({k: state.fields[k] + v[k] for k in state.fields})
    minus = state.replace({k: state.fields[k] - v[k] for k in state.fields})
    return (energy_density(model, plus) - energy_density(model, minus)) / 2


def energy_continuity_residual(state, model: EnergyModel) -> float:
    """``max |de/dt + div q|`` with the site-centred divergence; small only to stencil order."""
    q = energy_flux(state, model)
    return float(np.max(np.abs(energy_rate_density(state, model) + divergence_array(q, state.spacing, "site"))))


# -- dispersion -----------------------------------------------------------------------

@dataclass
class DispersionFit:
    omega: float
    residual: float
    degenerate: bool
    samples: int

    def to_json(self) -> dict:
        return {"omega": self.omega, "residual": self.residual, "degenerate": self.degenerate,
                "samples": self.samples}


def discrete_k2(mode, grid, spacing) -> float:
    """``sum_k (2/h_k^2)(1 - cos(k_k h_k))`` for integer mode numbers."""
    mode = tuple(mode) + (0,) * (len(grid) - len(mode))
    return float(sum(2.0 / h ** 2 * (1 - math.cos(2 * math.pi * m / n)) for m, n, h in zip(mode, grid, spacing)))


def mode_amplitude(s: np.ndarray, mode, spacing) -> complex:
    """Fourier amplitude of ``s_x + i s_y`` at the given integer mode."""
    grid = s.shape[:-1]
    mode = tuple(mode) + (0,) * (len(grid) - len(mode))
    c = s[..., 0] + 1j * s[..., 1]
    idx = np.meshgrid(*[np.arange(n) for n in grid], indexing="ij")
    phase = sum(2 * np.pi * m * i / n for m, i, n in zip(mode, idx, grid))
    return complex(np.mean(c * np.exp(-1j * phase)))


def measure_dispersion(times, amplitudes, min_amplitude: float = 1e-12) -> DispersionFit:
    """Fit ``arg c(t) = phi0 - omega t`` by least squares on the unwrapped phase.

    The fit is flagged degenerate when any amplitude is below ``min_amplitude``
    or fewer than three samples are given.
    """
    t = np.asarray(times, dtype=float)
    c = np.asarray(amplitudes, dtype=complex)
    if t.shape != c.shape:
        raise InputError("times and amplitudes differ in length")
    if len(t) < 3 or np.min(np.abs(c)) < min_amplitude:
        return DispersionFit(float("nan"), float("nan"), True, len(t))
    phi = np.unwrap(np.angle(c))
    X = np.stack([np.ones_like(t), t], axis=1)
    coef, *_ = np.linalg.lstsq(X, phi, rcond=None)
    resid = float(np.max(np.abs(X @ coef - phi)))
    return DispersionFit(float(-coef[1]), resid, False, len(t))

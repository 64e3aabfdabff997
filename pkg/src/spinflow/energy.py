"""Quadratic exchange-energy models and their functional derivatives.

Every model is a sum of a homogeneous part (a quadratic Casimir-type
polynomial of the fields) and an inhomogeneous part built from squared
lattice gradients. The gradient part of a field ``f`` with stiffness ``c`` is
evaluated per site as

    c/2 * sum_k (|forward_k f|^2 + |backward_k f|^2) / 2

so that its summed variation is exactly ``-c * laplacian(f)`` with the same
stencil the equations of motion use.

Functional derivatives use the trace pairing for complex Hermitian fields
(``dH = dV * sum_sites Re tr(D dg)``) and the plain entrywise pairing for real
fields (``dH = dV * sum_sites sum_i D_i dx_i``). For real antisymmetric or
symmetric arrays every stored entry counts as a coordinate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .field_grid import backward_array, cell_volume, forward_array, laplacian_array
from .matrix_core import InputError


class CaseId(str, enum.Enum):
    NORMAL_SU_N = "NORMAL_SU_N"
    DEGENERATE_SU_N = "DEGENERATE_SU_N"
    LL_HEISENBERG = "LL_HEISENBERG"
    UNIAXIAL = "UNIAXIAL"
    BIAXIAL = "BIAXIAL"
    SU3_NORMAL = "SU3_NORMAL"
    NEMATIC = "NEMATIC"
    SU3_BROKEN = "SU3_BROKEN"
    SU2xSU2 = "SU2xSU2"
    SO6 = "SO6"
    SO4 = "SO4"
    SO5_FULL = "SO5_FULL"
    SO5_TENSOR = "SO5_TENSOR"

    @classmethod
    def parse(cls, name: str) -> "CaseId":
        try:
            return cls(str(name).strip())
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise InputError(f"unknown case id {name!r}; valid cases: {valid}") from None


# field name -> payload shape (None means "d x d complex", d taken from the model)
CASE_FIELDS: dict[CaseId, dict[str, tuple | None]] = {
    CaseId.NORMAL_SU_N: {"g": None},
    CaseId.DEGENERATE_SU_N: {"g": None, "a": None},
    CaseId.LL_HEISENBERG: {"s": (3,)},
    CaseId.UNIAXIAL: {"s": (3,), "n": (3,)},
    CaseId.BIAXIAL: {"s": (3,), "R": (3, 3)},
    CaseId.SU3_NORMAL: {"s": (3,), "q": (3, 3)},
    CaseId.NEMATIC: {"s": (3,), "w": (3, 3)},
    CaseId.SU3_BROKEN: {"g": None, "a": None},
    CaseId.SU2xSU2: {"s": (3,), "u": (3,)},
    CaseId.SO6: {"gamma5": (), "gamma": (4,), "gammabar": (4,), "sigma": (4, 4)},
    CaseId.SO4: {"sigma": (4, 4)},
    CaseId.SO5_FULL: {"ga": (5,), "gab": (5, 5)},
    CaseId.SO5_TENSOR: {"gab": (5, 5)},
}

MATRIX_CASES = (CaseId.NORMAL_SU_N, CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN)

# Constants each case actually reads; the rest are ignored.
CASE_CONSTANTS: dict[CaseId, tuple[str, ...]] = {
    CaseId.NORMAL_SU_N: ("J", "Jbar"),
    CaseId.DEGENERATE_SU_N: ("J", "Jbar", "A", "B"),
    CaseId.LL_HEISENBERG: ("J", "Jbar"),
    CaseId.UNIAXIAL: ("J", "A", "B"),
    CaseId.BIAXIAL: ("J", "A", "B"),
    CaseId.SU3_NORMAL: ("J", "Jbar"),
    CaseId.NEMATIC: ("J", "A", "B"),
    CaseId.SU3_BROKEN: ("J", "Jbar", "A", "B"),
    CaseId.SU2xSU2: ("Jbar",),
    CaseId.SO6: ("J", "Jbar"),
    CaseId.SO4: ("Jbar",),
    CaseId.SO5_FULL: ("J", "Jbar"),
    CaseId.SO5_TENSOR: ("Jbar",),
}

# Sign of the homogeneous exchange term as each case writes it.
HOMOGENEOUS_SIGN = {c: 1 for c in CaseId} | {CaseId.LL_HEISENBERG: -1, CaseId.SU3_NORMAL: -1}


@dataclass(frozen=True)
class EnergyModel:
    case: CaseId
    J: float = 1.0
    Jbar: float = 1.0
    A: float = 0.0
    B: float = 1.0
    dim: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "case", CaseId.parse(self.case) if not isinstance(self.case, CaseId) else self.case)
        used = CASE_CONSTANTS[self.case]
        for name in ("J", "Jbar", "A", "B"):
            if not np.isfinite(getattr(self, name)):
                raise InputError(f"constant {name} must be finite")
        if "Jbar" in used and not self.Jbar > 0:
            raise InputError(f"Jbar must be positive for {self.case.value}, got {self.Jbar}")
        if "B" in used and not self.B > 0:
            raise InputError(f"B must be positive for {self.case.value}, got {self.B}")
        if self.case in MATRIX_CASES:
            if self.case == CaseId.SU3_BROKEN and self.dim != 3:
                raise InputError("SU3_BROKEN works with 3x3 matrices")
            if self.dim < 2:
                raise InputError("matrix dimension must be at least 2")

    @property
    def field_shapes(self) -> dict[str, tuple]:
        d = self.dim
        return {k: ((d, d) if v is None else v) for k, v in CASE_FIELDS[self.case].items()}

    @property
    def stiffness(self) -> float:
        """Effective gradient coefficient of the fastest linear mode.

        With both ``Jbar`` and ``B`` present (the g, a cases) the linearized
        flow couples the two fields and its frequencies reach
        ``(Jbar/2 + sqrt(Jbar^2/4 + B Jbar)) k^2`` per unit field norm.
        """
        used = CASE_CONSTANTS[self.case]
        if "Jbar" in used and "B" in used:
            jb, b = abs(self.Jbar), abs(self.B)
            return jb / 2 + float(np.sqrt(jb * jb / 4 + b * jb))
        return max(abs(getattr(self, k)) for k in used if k in ("Jbar", "B"))

    @property
    def homogeneous(self) -> float:
        used = CASE_CONSTANTS[self.case]
        vals = [abs(getattr(self, k)) for k in used if k in ("J", "A")]
        return max(vals, default=0.0)


def require_fields(model: EnergyModel, fields: dict) -> None:
    for name, shape in model.field_shapes.items():
        if name not in fields:
            raise InputError(f"{model.case.value} needs field {name!r}; got {sorted(fields)}")
        arr = np.asarray(fields[name])
        if tuple(arr.shape[arr.ndim - len(shape):]) != tuple(shape):
            raise InputError(f"field {name!r} has payload {arr.shape}, expected trailing {shape}")


def _fields(state) -> dict:
    return state.fields if hasattr(state, "fields") else state


def _sq(x: np.ndarray, payload_ndim: int) -> np.ndarray:
    """Sum of squared magnitudes over the payload axes."""
    v = np.abs(x) ** 2 if np.iscomplexobj(x) else x * x
    return np.sum(v, axis=tuple(range(-payload_ndim, 0))) if payload_ndim else v


def gradient_density(f: np.ndarray, spacing, payload_ndim: int) -> np.ndarray:
    """``sum_k (|forward_k f|^2 + |backward_k f|^2) / 2`` per site."""
    out = 0.0
    for ax in range(len(spacing)):
        out = out + 0.5 * (_sq(forward_array(f, spacing, ax), payload_ndim)
                           + _sq(backward_array(f, spacing, ax), payload_ndim))
    return out


def trace_square(g: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...ji->...", g, g).real


def energy_density(model: EnergyModel, state) -> np.ndarray:
    """Pointwise energy density on the grid."""
    f = _fields(state)
    require_fields(model, f)
    h = state.spacing
    c = model.case
    J, Jb, A, B = model.J, model.Jbar, model.A, model.B

    def G(name, nd):
        return gradient_density(np.asarray(f[name]), h, nd)

    if c == CaseId.NORMAL_SU_N:
        return J * trace_square(f["g"]) / 2 + Jb * G("g", 2) / 2
    if c in (CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN):
        return (J * trace_square(f["g"]) / 2 + A * trace_square(f["a"]) / 2
                + Jb * G("g", 2) / 2 + B * G("a", 2) / 2)
    if c == CaseId.LL_HEISENBERG:
        return -J * _sq(f["s"], 1) + Jb * G("s", 1) / 2
    if c == CaseId.UNIAXIAL:
        s, n = f["s"], f["n"]
        sn = np.sum(s * n, axis=-1)
        return J * _sq(s, 1) / 2 + A * sn ** 2 / 2 + B * G("n", 1) / 2
    if c == CaseId.BIAXIAL:
        return J * _sq(f["s"], 1) / 2 + A * _sq(f["R"], 2) / 2 + B * G("R", 2) / 2
    if c == CaseId.SU3_NORMAL:
        # g = q - i eps.s/2, so tr g^2 = tr q^2 + s^2/2 and tr (grad g)^2 likewise
        g2 = _sq(f["q"], 2) + _sq(f["s"], 1) / 2
        return -2 * J * g2 + Jb * (G("q", 2) + G("s", 1) / 2)
    if c == CaseId.NEMATIC:
        return J * _sq(f["s"], 1) / 2 + A * _sq(f["w"], 2) / 2 + B * G("w", 2) / 2
    if c == CaseId.SU2xSU2:
        return Jb * (G("s", 1) + G("u", 1)) / 2
    if c == CaseId.SO6:
        # tr g^2 = 4 (g5^2 + gamma^2 + gammabar^2) + 2 sum_{mu nu} sigma^2
        hom = 4 * (_sq(f["gamma5"], 0) + _sq(f["gamma"], 1) + _sq(f["gammabar"], 1)) + 2 * _sq(f["sigma"], 2)
        grad = 4 * (G("gamma5", 0) + G("gamma", 1) + G("gammabar", 1)) + 2 * G("sigma", 2)
        return J * hom / 2 + Jb * grad / 2
    if c == CaseId.SO4:
        return Jb * G("sigma", 2) / 4
    if c == CaseId.SO5_FULL:
        hom = 4 * _sq(f["ga"], 1) + 2 * _sq(f["gab"], 2)
        grad = 4 * G("ga", 1) + 2 * G("gab", 2)
        return J * hom / 2 + Jb * grad / 2
    if c == CaseId.SO5_TENSOR:
        return Jb * G("gab", 2)
    raise InputError(f"no energy for {c}")


def total_energy(model: EnergyModel, state) -> float:
    e = energy_density(model, state)
    return float(np.sum(e) * cell_volume(state.spacing))


def functional_derivatives(model: EnergyModel, state) -> dict[str, np.ndarray]:
    """``dH/d(field)`` for every field of the case, in the pairings described above."""
    f = _fields(state)
    require_fields(model, f)
    h = state.spacing
    c = model.case
    J, Jb, A, B = model.J, model.Jbar, model.A, model.B

    def L(name):
        return laplacian_array(np.asarray(f[name]), h)

    if c == CaseId.NORMAL_SU_N:
        return {"g": J * f["g"] - Jb * L("g")}
    if c in (CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN):
        return {"g": J * f["g"] - Jb * L("g"), "a": A * f["a"] - B * L("a")}
    if c == CaseId.LL_HEISENBERG:
        return {"s": -2 * J * f["s"] - Jb * L("s")}
    if c == CaseId.UNIAXIAL:
        s, n = f["s"], f["n"]
        sn = np.sum(s * n, axis=-1)[..., None]
        return {"s": J * s + A * sn * n, "n": A * sn * s - B * L("n")}
    if c == CaseId.BIAXIAL:
        return {"s": J * f["s"], "R": A * f["R"] - B * L("R")}
    if c == CaseId.SU3_NORMAL:
        return {"s": -2 * J * f["s"] - Jb * L("s"), "q": -4 * J * f["q"] - 2 * Jb * L("q")}
    if c == CaseId.NEMATIC:
        return {"s": J * f["s"], "w": A * f["w"] - B * L("w")}
    if c == CaseId.SU2xSU2:
        return {"s": -Jb * L("s"), "u": -Jb * L("u")}
    if c == CaseId.SO6:
        out = {k: 4 * J * f[k] - 4 * Jb * L(k) for k in ("gamma5", "gamma", "gammabar")}
        out["sigma"] = 2 * J * f["sigma"] - 2 * Jb * L("sigma")
        return out
    if c == CaseId.SO4:
        return {"sigma": -Jb * L("sigma") / 2}
    if c == CaseId.SO5_FULL:
        return {"ga": 4 * J * f["ga"] - 4 * Jb * L("ga"), "gab": 2 * J * f["gab"] - 2 * Jb * L("gab")}
    if c == CaseId.SO5_TENSOR:
        return {"gab": -2 * Jb * L("gab")}
    raise InputError(f"no functional derivative for {c}")


def functional_derivative(model: EnergyModel, state, name: str) -> np.ndarray:
    ders = functional_derivatives(model, state)
    if name not in ders:
        raise InputError(f"{model.case.value} has no field {name!r}; fields are {sorted(ders)}")
    return ders[name]


def pairing(model: EnergyModel, name: str, D: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Per-site pairing of a derivative with a variation of field ``name``."""
    if model.case in MATRIX_CASES:
        return np.einsum("...ij,...ji->...", D, dx).real
    nd = len(model.field_shapes[name])
    prod = D * dx
    return np.sum(prod, axis=tuple(range(-nd, 0))) if nd else prod


def energy_rate(model: EnergyModel, state, rates: dict) -> float:
    """``dH/dt`` implied by the given field rates through the functional derivatives."""
    ders = functional_derivatives(model, state)
    tot = sum(np.sum(pairing(model, k, ders[k], rates[k])) for k in ders)
    return float(tot * cell_volume(state.spacing))

"""Simulation state: named grid arrays plus clock."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..field_grid import LatticeField, _check_grid
from ..matrix_core import InputError

ORTHOGONALITY_TOL = 1e-8


@dataclass
class SimState:
    """Dynamical fields on a common periodic grid.

    ``fields`` maps a name (``g``, ``a``, ``s``, ``n``, ``R``, ``q``, ``w``,
    ``u``, ``gamma5``, ``gamma``, ``gammabar``, ``sigma``, ``ga``, ``gab``,
    ``g_anti``) to an array whose leading axes are the grid.
    """

    fields: dict
    spacing: tuple
    time: float = 0.0
    step: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.spacing = tuple(float(h) for h in self.spacing)
        if any(h <= 0 for h in self.spacing):
            raise InputError("lattice spacing must be positive")
        grids = set()
        for name, arr in self.fields.items():
            arr = np.asarray(arr)
            _check_grid(arr, self.spacing)
            grids.add(arr.shape[: len(self.spacing)])
            self.fields[name] = arr
        if len(grids) > 1:
            raise InputError(f"fields live on different grids: {sorted(grids)}")

    @property
    def grid(self) -> tuple[int, ...]:
        first = next(iter(self.fields.values()))
        return first.shape[: len(self.spacing)]

    @property
    def ndim(self) -> int:
        return len(self.spacing)

    def field(self, name: str) -> LatticeField:
        if name not in self.fields:
            raise InputError(f"state has no field {name!r}; fields are {sorted(self.fields)}")
        return LatticeField(self.fields[name], self.spacing)

    def replace(self, fields: dict, time: float | None = None, step: int | None = None) -> "SimState":
        return SimState(dict(fields), self.spacing, self.time if time is None else time,
                        self.step if step is None else step, dict(self.meta))

    def copy(self) -> "SimState":
        return self.replace({k: np.array(v, copy=True) for k, v in self.fields.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.fields.values())


def orthogonality_error(R: np.ndarray) -> float:
    RtR = np.einsum("...ji,...jk->...ik", R, R)
    return float(np.max(np.abs(RtR - np.eye(R.shape[-1]))))


def check_orthogonal(R: np.ndarray, tol: float = ORTHOGONALITY_TOL) -> None:
    err = orthogonality_error(R)
    if err > tol:
        raise InputError(f"R is not orthogonal: max |R^T R - I| = {err:.3e}")

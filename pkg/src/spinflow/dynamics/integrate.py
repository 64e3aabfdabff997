"""Classical RK4 stepping with optional post-step projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..energy import EnergyModel
from ..matrix_core import InputError, hermitize
from .rhs import rhs as case_rhs
from .state import SimState

DT_SAFETY = 0.2
# RK4 damps a mode of frequency w by about (w dt)^6/72 per step; halving the
# step below the stability estimate keeps that loss under 1e-8 over 1e4 steps
# once nonlinear cascades have filled the high wavenumbers.
ACCURACY_MARGIN = 2.0
PROJECTIONS = ("hermitize", "orthogonalize", "normalize_n")


class IntegrationError(RuntimeError):
    """Raised when a step produces non-finite values; ``state`` is the last finite state."""

    def __init__(self, message: str, state: SimState, bad: SimState | None = None):
        super().__init__(message)
        self.state = state
        self.bad = bad


@dataclass(frozen=True)
class Projections:
    hermitize: bool = False
    orthogonalize: bool = False
    normalize_n: bool = False

    def enabled(self) -> list[str]:
        return [p for p in PROJECTIONS if getattr(self, p)]


def nearest_orthogonal(R: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(R)
    return U @ Vt


def apply_projections(fields: dict, proj: Projections) -> dict:
    out = dict(fields)
    if proj.hermitize:
        for k in ("g", "a"):
            if k in out:
                out[k] = hermitize(out[k])
    if proj.orthogonalize and "R" in out:
        out["R"] = nearest_orthogonal(out["R"])
    if proj.normalize_n and "n" in out:
        out["n"] = out["n"] / np.linalg.norm(out["n"], axis=-1, keepdims=True)
    return out


def max_field_norm(state: SimState) -> float:
    """Largest per-site Euclidean (Frobenius) norm over all fields."""
    nd = state.ndim
    best = 0.0
    for v in state.fields.values():
        v = np.asarray(v)
        sq = np.abs(v) ** 2
        if v.ndim > nd:
            sq = np.sum(sq, axis=tuple(range(nd, v.ndim)))
        best = max(best, float(np.sqrt(np.max(sq))))
    return best


def suggest_dt(state: SimState, model: EnergyModel, c: float = DT_SAFETY) -> float:
    """``c / (2 margin norm (stiffness * sum_k 4/h_k^2 + homogeneous))``.

    ``sum_k 4/h_k^2`` is the largest eigenvalue of the lattice Laplacian and the
    homogeneous constants set the precession rate of order-parameter fields.
    The factor 2 bounds the spread of eigenvalues of a commutator with a field
    of norm ``norm`` and ``margin`` is :data:`ACCURACY_MARGIN`. A zero state
    gets ``c * min(h)^2``.
    """
    if c <= 0:
        raise InputError("dt safety factor must be positive")
    norm = max_field_norm(state)
    lap_max = sum(4.0 / (h * h) for h in state.spacing)
    rate = 2 * ACCURACY_MARGIN * norm * (model.stiffness * lap_max + model.homogeneous)
    if rate <= 0 or not np.isfinite(rate):
        return c * min(state.spacing) ** 2
    return c / rate


def _axpy(fields: dict, k: dict, a: float) -> dict:
    return {name: fields[name] + a * k[name] for name in fields}


def step_rk4(state: SimState, model: EnergyModel, dt: float, rhs_fn=None,
             projections: Projections | None = None, as_printed: bool = False) -> SimState:
    """One classical fourth-order Runge-Kutta step of every dynamical field."""
    if not dt > 0:
        raise InputError(f"dt must be positive, got {dt}")
    fn = rhs_fn or (lambda st: case_rhs(st, model, as_printed=as_printed))
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4(state, dt, fn, projections)


def _rk4(state: SimState, dt: float, fn, projections) -> SimState:
    y = state.fields
    k1 = fn(state)
    names = list(k1)
    y0 = {n: y[n] for n in names}
    k2 = fn(state.replace({**y, **_axpy(y0, k1, dt / 2)}))
    k3 = fn(state.replace({**y, **_axpy(y0, k2, dt / 2)}))
    k4 = fn(state.replace({**y, **_axpy(y0, k3, dt)}))
    new = dict(y)
    for n in names:
        new[n] = y0[n] + (dt / 6) * (k1[n] + 2 * k2[n] + 2 * k3[n] + k4[n])
    finite = all(np.all(np.isfinite(new[n])) for n in names)
    if projections is not None and finite:
        new = apply_projections(new, projections)
    out = state.replace(new, time=state.time + dt, step=state.step + 1)
    if not out.is_finite():
        bad = [n for n in names if not np.all(np.isfinite(new[n]))]
        raise IntegrationError(f"non-finite values in {bad} at step {out.step}", state, out)
    return out


def integrate(state: SimState, model: EnergyModel, dt: float, steps: int, callback=None, **kw) -> SimState:
    """Run ``steps`` RK4 steps, calling ``callback(state)`` after each one."""
    for _ in range(int(steps)):
        state = step_rk4(state, model, dt, **kw)
        if callback is not None:
            callback(state)
    return state


def richardson_ratio(state: SimState, model: EnergyModel, horizon: float, steps: int = 4, **kw) -> tuple[float, float, float]:
    """Self-convergence ratio ``|y_n - y_2n| / |y_2n - y_4n|`` over a fixed horizon.

    ``y_n`` is the state after ``n`` steps of size ``horizon / n``; a fourth
    order method gives a ratio near 16. Returns ``(ratio, e_n, e_2n)``.
    """
    if steps < 1 or not horizon > 0:
        raise InputError("horizon must be positive and steps >= 1")
    ys = []
    for n in (steps, 2 * steps, 4 * steps):
        ys.append(integrate(state, model, horizon / n, n, **kw))
    names = list(state.fields)

    def dist(a, b):
        return max(float(np.max(np.abs(a.fields[k] - b.fields[k]))) for k in names)

    e1, e2 = dist(ys[0], ys[1]), dist(ys[1], ys[2])
    return (e1 / e2 if e2 > 0 else float("inf")), e1, e2

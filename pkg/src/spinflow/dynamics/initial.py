"""Initial-condition generators.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), consumed
in a fixed order, so a seed fully determines the state.
"""

from __future__ import annotations

import numpy as np

from ..energy import CaseId, EnergyModel
from ..matrix_core import InputError
from .pictures import matrix_to_spin_one
from .state import SimState

IC_KINDS = ("uniform", "random_smooth", "single_mode", "domain_wall")


def coordinates(grid, spacing) -> list[np.ndarray]:
    """Broadcastable site coordinates ``x_k = i_k h_k``."""
    out = []
    for ax, (n, h) in enumerate(zip(grid, spacing)):
        shape = [1] * len(grid)
        shape[ax] = n
        out.append((np.arange(n) * h).reshape(shape))
    return out


def smooth_profile(grid, spacing, rng: np.random.Generator, payload=(), modes: int = 3,
                   amplitude: float = 1.0) -> np.ndarray:
    """Sum of ``modes`` random low-wavenumber cosines with random payload coefficients."""
    xs = coordinates(grid, spacing)
    lengths = [n * h for n, h in zip(grid, spacing)]
    out = np.zeros(tuple(grid) + tuple(payload))
    for _ in range(modes):
        m = rng.integers(-modes, modes + 1, size=len(grid))
        if not np.any(m):
            m[0] = 1
        phase = rng.uniform(0, 2 * np.pi)
        coef = rng.normal(size=payload)
        arg = sum(2 * np.pi * mk * x / L for mk, x, L in zip(m, xs, lengths)) + phase
        out += np.cos(arg)[(...,) + (None,) * len(payload)] * coef
    return amplitude * out / np.sqrt(modes)


def _hermitian_profile(grid, spacing, rng, dim, modes, amplitude):
    re = smooth_profile(grid, spacing, rng, (dim, dim), modes, amplitude)
    im = smooth_profile(grid, spacing, rng, (dim, dim), modes, amplitude)
    g = (re + np.swapaxes(re, -1, -2)) / 2 + 1j * (im - np.swapaxes(im, -1, -2)) / 2
    return g - np.trace(g, axis1=-2, axis2=-1)[..., None, None] * np.eye(dim) / dim


def _random_traceless(rng, dim):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = (X + X.conj().T) / 2
    H -= np.trace(H) * np.eye(dim) / dim
    return H / np.linalg.norm(H)


def rotation_field(theta: np.ndarray) -> np.ndarray:
    """Rodrigues rotation matrices for rotation vectors ``theta`` (last axis 3)."""
    ang = np.linalg.norm(theta, axis=-1)
    safe = np.where(ang > 0, ang, 1.0)
    k = theta / safe[..., None]
    K = np.zeros(theta.shape[:-1] + (3, 3))
    K[..., 0, 1], K[..., 0, 2], K[..., 1, 2] = -k[..., 2], k[..., 1], -k[..., 0]
    K = K - np.swapaxes(K, -1, -2)
    s, c = np.sin(ang)[..., None, None], np.cos(ang)[..., None, None]
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def _antisym(x):
    return (x - np.swapaxes(x, -1, -2)) / 2


def _sym(x):
    return (x + np.swapaxes(x, -1, -2)) / 2


def uniform_state(model: EnergyModel, grid, spacing, seed: int = 0) -> SimState:
    """Spatially constant fields drawn once from the seed."""
    st = random_smooth_state(model, grid, spacing, seed=seed, amplitude=0.0)
    return st


def random_smooth_state(model: EnergyModel, grid, spacing, seed: int = 0, amplitude: float = 0.3,
                        modes: int = 3) -> SimState:
    """Order-one uniform background plus a smooth random perturbation of size ``amplitude``."""
    rng = np.random.default_rng(seed)
    grid = tuple(int(n) for n in grid)
    one = np.ones(grid)[..., None]

    def prof(payload):
        return smooth_profile(grid, spacing, rng, payload, modes, amplitude)

    def vec(bg):
        return one * np.asarray(bg, dtype=float) + prof((3,))

    c = model.case
    d = model.dim
    if c in (CaseId.NORMAL_SU_N, CaseId.DEGENERATE_SU_N, CaseId.SU3_BROKEN):
        g = _random_traceless(rng, d) + _hermitian_profile(grid, spacing, rng, d, modes, amplitude)
        fields = {"g": g}
        if c != CaseId.NORMAL_SU_N:
            fields["a"] = _random_traceless(rng, d) + _hermitian_profile(grid, spacing, rng, d, modes, amplitude)
    elif c == CaseId.LL_HEISENBERG:
        fields = {"s": vec([0, 0, 1])}
    elif c == CaseId.UNIAXIAL:
        n = vec([1, 0, 0])
        fields = {"s": vec([0, 0, 0.5]), "n": n / np.linalg.norm(n, axis=-1, keepdims=True)}
    elif c == CaseId.BIAXIAL:
        theta = one * rng.normal(size=3) + prof((3,))
        fields = {"s": vec([0, 0, 0.5]), "R": rotation_field(theta)}
    elif c == CaseId.SU3_NORMAL:
        g = _random_traceless(rng, 3) + _hermitian_profile(grid, spacing, rng, 3, modes, amplitude)
        s, q = matrix_to_spin_one(g)
        fields = {"s": s, "q": q}
    elif c == CaseId.NEMATIC:
        w0 = _sym(rng.normal(size=(3, 3)))
        fields = {"s": vec([0, 0, 0.5]), "w": one[..., None] * w0 + _sym(prof((3, 3)))}
    elif c == CaseId.SU2xSU2:
        fields = {"s": vec([0, 0, 1]), "u": vec([0.5, 0, 0])}
    elif c in (CaseId.SO6, CaseId.SO4):
        sig = _antisym(one[..., None] * rng.normal(size=(4, 4)) + prof((4, 4)))
        if c == CaseId.SO4:
            fields = {"sigma": sig}
        else:
            fields = {
                "gamma5": np.ones(grid) * rng.normal() + prof(()),
                "gamma": one * rng.normal(size=4) + prof((4,)),
                "gammabar": one * rng.normal(size=4) + prof((4,)),
                "sigma": sig,
            }
        fields = {k: v / 2 for k, v in fields.items()}
    elif c in (CaseId.SO5_FULL, CaseId.SO5_TENSOR):
        gab = _antisym(one[..., None] * rng.normal(size=(5, 5)) + prof((5, 5))) / 2
        fields = {"gab": gab}
        if c == CaseId.SO5_FULL:
            fields["ga"] = (one * rng.normal(size=5) + prof((5,))) / 2
    else:
        raise InputError(f"no initial condition for {c}")
    return SimState(fields, spacing, meta={"ic": "random_smooth", "seed": int(seed), "amplitude": amplitude})


def single_mode_state(grid, spacing, mode=(1,), s0: float = 1.0, amplitude: float = 1e-4) -> SimState:
    """Spin wave about ``s0 z``: ``s_x + i s_y = amplitude * exp(i k.x)``, ``|s| = s0``."""
    grid = tuple(int(n) for n in grid)
    mode = tuple(mode) + (0,) * (len(grid) - len(mode))
    if abs(amplitude) >= abs(s0):
        raise InputError("spin-wave amplitude must be smaller than s0")
    xs = coordinates(grid, spacing)
    arg = sum(2 * np.pi * m * x / (n * h) for m, x, n, h in zip(mode, xs, grid, spacing)) + np.zeros(grid)
    s = np.stack([amplitude * np.cos(arg), amplitude * np.sin(arg),
                  np.full(grid, np.sqrt(s0 ** 2 - amplitude ** 2))], axis=-1)
    return SimState({"s": s}, spacing, meta={"ic": "single_mode", "mode": list(mode), "s0": s0,
                                             "amplitude": amplitude})


def domain_wall_state(grid, spacing, width: float = 4.0, s0: float = 1.0) -> SimState:
    """Wall and anti-wall pair along axis 0 (periodic), rotating s from +z to -z and back in the xz plane."""
    grid = tuple(int(n) for n in grid)
    x = coordinates(grid, spacing)[0] + np.zeros(grid)
    L = grid[0] * spacing[0]
    theta = 2 * np.arctan(np.exp((x - L / 4) / width)) - 2 * np.arctan(np.exp((x - 3 * L / 4) / width))
    s = s0 * np.stack([np.sin(theta), np.zeros(grid), np.cos(theta)], axis=-1)
    return SimState({"s": s}, spacing, meta={"ic": "domain_wall", "width": width, "s0": s0})


def make_initial_state(model: EnergyModel, kind: str, grid, spacing, seed: int = 0, amplitude: float = 0.3,
                       mode=(1,), s0: float = 1.0, modes: int = 3, width: float = 4.0) -> SimState:
    if kind == "uniform":
        return uniform_state(model, grid, spacing, seed)
    if kind == "random_smooth":
        return random_smooth_state(model, grid, spacing, seed, amplitude, modes)
    if kind in ("single_mode", "domain_wall"):
        if model.case != CaseId.LL_HEISENBERG:
            raise InputError(f"initial condition {kind!r} is defined for LL_HEISENBERG only")
        if kind == "single_mode":
            return single_mode_state(grid, spacing, mode, s0, amplitude)
        return domain_wall_state(grid, spacing, width, s0)
    raise InputError(f"unknown initial condition {kind!r}; valid kinds: {', '.join(IC_KINDS)}")

"""Physical coordinates as linear functionals of the generator matrices.

Every physical variable (spin vector, quadrupole tensor, Dirac components, ...)
is a real linear functional ``phi = Re tr(g K_0) + sum_l Re tr(a_l K_l)`` of the
generator density ``g`` and of ``n_order`` order-parameter matrices ``a_l``. A
:class:`Chart` stores the Hermitian kernels ``K`` for each variable family and
the subset of components treated as independent coordinates.

Kernels are stacked with a leading "slot" axis: slot 0 pairs with ``g``, slot
``l + 1`` with the order parameter ``a_l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .bases import AXES, dirac_matrices, levi_civita, pauli_matrices, so5_matrices, spin_one_matrices
from .matrix_core import InputError


def unit(dim: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((dim, dim), dtype=complex)
    E[i, j] = 1.0
    return E


@dataclass(frozen=True)
class Chart:
    name: str
    dim: int
    n_order: int
    traceless: bool
    families: dict  # family -> kernels, shape (*index, slots, dim, dim)
    labels: tuple[str, ...]
    label_index: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def slots(self) -> int:
        return 1 + self.n_order

    def kernel(self, family: str, index: tuple[int, ...] = ()) -> np.ndarray:
        return self.families[family][tuple(index)]

    @property
    def kernels(self) -> np.ndarray:
        """Kernels of the independent labelled coordinates, shape (n, slots, d, d)."""
        return np.array([self.kernel(f, i) for f, i in self.label_index])

    def evaluate(self, g: np.ndarray, a: np.ndarray | None = None) -> dict[str, np.ndarray]:
        """Return every family evaluated on (a lattice of) matrices.

        ``a`` has shape ``(*grid, n_order, d, d)`` (or ``(*grid, d, d)`` when
        ``n_order == 1``).
        """
        g = np.asarray(g)
        out = {}
        for fam, K in self.families.items():
            idx_nd = K.ndim - 3
            val = np.einsum("...ij,Kji->...K", g, K.reshape(-1, *K.shape[-3:])[:, 0]).real
            if self.n_order:
                if a is None:
                    raise InputError(f"chart {self.name} needs order-parameter matrices")
                aa = np.asarray(a)
                if aa.ndim == g.ndim:
                    aa = aa[..., None, :, :]
                val = val + np.einsum("...lij,Klji->...K", aa,
                                      K.reshape(-1, *K.shape[-3:])[:, 1:]).real
            out[fam] = val.reshape(val.shape[:-1] + K.shape[:idx_nd])
        return out


def _make_chart(name, dim, n_order, traceless, families, label_index) -> Chart:
    fams = {}
    for k, v in families.items():
        v = np.asarray(v, dtype=complex)
        v.setflags(write=False)
        fams[k] = v
    labels = tuple(_label(f, i) for f, i in label_index)
    return Chart(name, dim, n_order, traceless, fams, labels, tuple(label_index))


def _label(family: str, index: tuple[int, ...]) -> str:
    if not index:
        return family
    if family in ("s", "n", "u", "v", "q", "w", "R"):
        return family + "_" + "".join(AXES[i] for i in index)
    return family + "_" + "".join(str(i + 1) for i in index)


def _slotted(K: np.ndarray, slot: int, slots: int) -> np.ndarray:
    """Place kernels ``K`` (shape (*index, d, d)) into ``slot`` of a slotted array."""
    out = np.zeros(K.shape[:-2] + (slots,) + K.shape[-2:], dtype=complex)
    out[..., slot, :, :] = K
    return out


def _spin_kernels(dim: int) -> np.ndarray:
    """Kernels for ``s_a = i eps_abc g_bc`` on the leading 3x3 block."""
    eps = levi_civita()
    K = np.zeros((3, dim, dim), dtype=complex)
    for a, b, c in product(range(3), repeat=3):
        K[a, c, b] += 1j * eps[a, b, c]
    return K


def _sym_kernels(dim: int, trace_shift: bool) -> np.ndarray:
    """Kernels for ``(g_ab + g_ba)/2`` (a, b < 3), optionally minus ``d_ab g_cc / 3``."""
    K = np.zeros((3, 3, dim, dim), dtype=complex)
    for a, b in product(range(3), repeat=2):
        K[a, b] = (unit(dim, b, a) + unit(dim, a, b)) / 2
        if trace_shift and a == b:
            K[a, b] -= sum(unit(dim, c, c) for c in range(3)) / 3
    return K


VEC = [(i,) for i in range(3)]
SYM5 = [(0, 1), (0, 2), (1, 2), (0, 0), (1, 1)]
SYM6 = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


@lru_cache(maxsize=None)
def chart(name: str, dim: int | None = None) -> Chart:
    """Build a named chart. ``dim`` is only used by the matrix-part charts."""
    builder = _BUILDERS.get(name)
    if builder is None:
        raise InputError(f"unknown chart {name!r}; known: {sorted(_BUILDERS)}")
    return builder(dim) if name in _DIM_CHARTS else builder()


def _pauli():
    sig = pauli_matrices() / 2
    return _make_chart("pauli", 2, 0, True, {"s": _slotted(sig, 0, 1)}, [("s", i) for i in VEC])


def _uniaxial():
    sig = pauli_matrices() / 2
    fams = {"s": _slotted(sig, 0, 2), "n": _slotted(sig, 1, 2)}
    return _make_chart("uniaxial", 2, 1, True, fams, [("s", i) for i in VEC] + [("n", i) for i in VEC])


def _biaxial():
    sig = pauli_matrices() / 2
    R = np.zeros((3, 3, 4, 2, 2), dtype=complex)
    for b, lam in product(range(3), repeat=2):
        R[b, lam, 1 + lam] = sig[b]
    fams = {"s": _slotted(sig, 0, 4), "R": R}
    labels = [("s", i) for i in VEC] + [("R", (b, lam)) for b, lam in product(range(3), repeat=2)]
    return _make_chart("biaxial", 2, 3, True, fams, labels)


def _spin1():
    fams = {"s": _slotted(_spin_kernels(3), 0, 1), "q": _slotted(_sym_kernels(3, False), 0, 1)}
    return _make_chart("spin1", 3, 0, True, fams, [("s", i) for i in VEC] + [("q", i) for i in SYM5])


def _spin1_extended():
    S, Q = _spin_kernels(3), _sym_kernels(3, False)
    fams = {"s": _slotted(S, 0, 2), "q": _slotted(Q, 0, 2), "n": _slotted(S, 1, 2), "w": _slotted(Q, 1, 2)}
    labels = ([("s", i) for i in VEC] + [("q", i) for i in SYM5]
              + [("n", i) for i in VEC] + [("w", i) for i in SYM5])
    return _make_chart("spin1_extended", 3, 1, True, fams, labels)


def _spin1_nematic():
    fams = {"s": _slotted(_spin_kernels(3), 0, 2), "w": _slotted(_sym_kernels(3, False), 1, 2)}
    return _make_chart("spin1_nematic", 3, 1, True, fams, [("s", i) for i in VEC] + [("w", i) for i in SYM5])


def _spin32_families():
    u = np.array([1j * (unit(4, 3, a) - unit(4, a, 3)) for a in range(3)])
    v = np.array([unit(4, 3, a) + unit(4, a, 3) for a in range(3)])
    return {
        "s": _slotted(_spin_kernels(4), 0, 1),
        "u": _slotted(u, 0, 1),
        "v": _slotted(v, 0, 1),
        "q": _slotted(_sym_kernels(4, True), 0, 1),
        "g44": _slotted(unit(4, 3, 3), 0, 1),
    }


def _spin32():
    labels = ([("s", i) for i in VEC] + [("u", i) for i in VEC] + [("v", i) for i in VEC]
              + [("q", i) for i in SYM5] + [("g44", ())])
    return _make_chart("spin32", 4, 0, True, _spin32_families(), labels)


def _su2xsu2():
    f = _spin32_families()
    return _make_chart("su2xsu2", 4, 0, True, {"s": f["s"], "u": f["u"]},
                       [("s", i) for i in VEC] + [("u", i) for i in VEC])


def _su2xsu2_v():
    f = _spin32_families()
    return _make_chart("su2xsu2_v", 4, 0, True, {"s": f["s"], "v": f["v"]},
                       [("s", i) for i in VEC] + [("v", i) for i in VEC])


def _dirac_families():
    m = dirac_matrices()
    return {
        "gamma5": _slotted(m["gamma5"] / 4, 0, 1),
        "gamma": _slotted(m["gamma"] / 4, 0, 1),
        "gammabar": _slotted(m["gammabar"] / 4, 0, 1),
        "sigma": _slotted(m["sigma"] / 4, 0, 1),
    }


PAIRS4 = [(m, n) for m in range(4) for n in range(m + 1, 4)]
PAIRS5 = [(a, b) for a in range(5) for b in range(a + 1, 5)]


def _dirac():
    labels = ([("gamma5", ())] + [("gamma", (m,)) for m in range(4)]
              + [("gammabar", (m,)) for m in range(4)] + [("sigma", p) for p in PAIRS4])
    return _make_chart("dirac", 4, 0, True, _dirac_families(), labels)


def _so4():
    return _make_chart("so4", 4, 0, True, {"sigma": _dirac_families()["sigma"]},
                       [("sigma", p) for p in PAIRS4])


def _so5():
    ga, gab = so5_matrices()
    fams = {"ga": _slotted(ga / 4, 0, 1), "gab": _slotted(gab / 4, 0, 1)}
    return _make_chart("so5", 4, 0, True, fams, [("ga", (a,)) for a in range(5)] + [("gab", p) for p in PAIRS5])


def _so5_tensor():
    _, gab = so5_matrices()
    return _make_chart("so5_tensor", 4, 0, True, {"gab": _slotted(gab / 4, 0, 1)}, [("gab", p) for p in PAIRS5])


def _antisymmetric(dim):
    dim = 3 if dim is None else int(dim)
    K = np.zeros((dim, dim, dim, dim), dtype=complex)
    for a, b in product(range(dim), repeat=2):
        K[a, b] = (unit(dim, b, a) - unit(dim, a, b)) / 2j
    labels = [("ga", (a, b)) for a in range(dim) for b in range(a + 1, dim)]
    return _make_chart("antisymmetric", dim, 0, True, {"ga": _slotted(K, 0, 1)}, labels)


def _sym_antisym(dim):
    dim = 3 if dim is None else int(dim)
    A = np.zeros((dim, dim, dim, dim), dtype=complex)
    S = np.zeros((dim, dim, dim, dim), dtype=complex)
    for a, b in product(range(dim), repeat=2):
        A[a, b] = (unit(dim, b, a) - unit(dim, a, b)) / 2j
        S[a, b] = (unit(dim, b, a) + unit(dim, a, b)) / 2
    labels = ([("ga", (a, b)) for a in range(dim) for b in range(a + 1, dim)]
              + [("gs", (a, b)) for a in range(dim) for b in range(a, dim) if (a, b) != (dim - 1, dim - 1)])
    fams = {"ga": _slotted(A, 0, 1), "gs": _slotted(S, 0, 1)}
    return _make_chart("sym_antisym", dim, 0, True, fams, labels)


_BUILDERS = {
    "pauli": _pauli,
    "uniaxial": _uniaxial,
    "biaxial": _biaxial,
    "spin1": _spin1,
    "spin1_extended": _spin1_extended,
    "spin1_nematic": _spin1_nematic,
    "spin32": _spin32,
    "su2xsu2": _su2xsu2,
    "su2xsu2_v": _su2xsu2_v,
    "dirac": _dirac,
    "so4": _so4,
    "so5": _so5,
    "so5_tensor": _so5_tensor,
    "antisymmetric": _antisymmetric,
    "sym_antisym": _sym_antisym,
}

_DIM_CHARTS = ("antisymmetric", "sym_antisym")
CHART_NAMES = tuple(_BUILDERS)


def spin_one_matrix(s: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Spin-1 generator matrix ``g = q - i eps s / 2`` from spin vector and symmetric q."""
    eps_hat = np.einsum("abc,...c->...ab", levi_civita(), s) / 2
    return np.asarray(q, dtype=complex) - 1j * eps_hat


def check_spin_one_expansion(g: np.ndarray) -> float:
    """Residual of ``g = s_a s^_a / 2 + q_ab q^_ba`` with s, q from the spin-1 chart."""
    spin, quad = spin_one_matrices()
    c = chart("spin1").evaluate(g)
    rec = np.einsum("...a,aij->...ij", c["s"], spin) / 2 + np.einsum("...ab,baij->...ij", c["q"], quad)
    return float(np.max(np.abs(rec - g)))

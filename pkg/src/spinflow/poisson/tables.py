"""Structure-constant tables for ultralocal linear Poisson brackets.

A table over real variables ``x_a`` stores ``f[a, b, c]`` with
``{x_a, x_b} = sum_c f[a, b, c] x_c``. The master and extended tables use the
real matrix-element coordinates of each matrix: ``g_aa`` on the diagonal and
``Re g_ab``, ``Im g_ab`` for ``a < b``. The trace is kept as a coordinate so
that its centrality can be checked rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..coordinates import Chart
from ..matrix_core import InputError

CLOSURE_TOL = 1e-10


@dataclass(frozen=True)
class BracketTable:
    labels: tuple[str, ...]
    constants: np.ndarray
    casimirs: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        f = np.asarray(self.constants, dtype=float)
        n = len(self.labels)
        if f.shape != (n, n, n):
            raise InputError(f"constants must have shape {(n, n, n)}, got {f.shape}")
        f.setflags(write=False)
        object.__setattr__(self, "constants", f)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def bracket(self, x: np.ndarray) -> np.ndarray:
        """Matrix ``{x_a, x_b}`` evaluated at the point ``x``."""
        return np.einsum("abc,...c->...ab", self.constants, x)

    def antisymmetry_residual(self) -> float:
        f = self.constants
        return float(np.max(np.abs(f + f.transpose(1, 0, 2)))) if f.size else 0.0

    def nonzero(self, tol: float = 1e-14) -> list[tuple[int, int, int, float]]:
        idx = np.argwhere(np.abs(self.constants) > tol)
        return [(int(a), int(b), int(c), float(self.constants[a, b, c])) for a, b, c in idx]

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "f_abc": [list(t) for t in self.nonzero(0.0)],
            "casimirs": [dict(c) for c in self.casimirs],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BracketTable":
        if data.get("derivative_terms"):
            raise InputError("brackets with derivative-of-delta terms are not supported")
        labels = tuple(data["labels"])
        n = len(labels)
        f = np.zeros((n, n, n))
        for a, b, c, val in data["f_abc"]:
            f[int(a), int(b), int(c)] = float(val)
        table = cls(labels, f, tuple(data.get("casimirs", ())), dict(data.get("metadata", {})))
        if table.antisymmetry_residual() > 1e-12:
            raise InputError("loaded table is not antisymmetric")
        return table

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "BracketTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# -- matrix-element coordinates ------------------------------------------------

def element_layout(dim: int) -> list[tuple[str, int, int]]:
    """Ordering of the real coordinates of one Hermitian matrix."""
    out = [("diag", a, a) for a in range(dim)]
    for a in range(dim):
        for b in range(a + 1, dim):
            out.append(("re", a, b))
            out.append(("im", a, b))
    return out


def _coord_label(name: str, kind: str, a: int, b: int) -> str:
    if kind == "diag":
        return f"{name}_{a + 1}{b + 1}"
    return f"{kind} {name}_{a + 1}{b + 1}"


def entry_map(dim: int, n_matrices: int) -> np.ndarray:
    """Complex tensor ``M[m, a, b, k]`` with ``(matrix m)_ab = sum_k M[m, a, b, k] x_k``."""
    lay = element_layout(dim)
    n = dim * dim
    M = np.zeros((n_matrices, dim, dim, n_matrices * n), dtype=complex)
    for m in range(n_matrices):
        for k, (kind, a, b) in enumerate(lay):
            col = m * n + k
            if kind == "diag":
                M[m, a, a, col] = 1.0
            elif kind == "re":
                M[m, a, b, col] = 1.0
                M[m, b, a, col] = 1.0
            else:
                M[m, a, b, col] = 1j
                M[m, b, a, col] = -1j
    return M


def coordinate_projector(dim: int, n_matrices: int) -> np.ndarray:
    """Complex tensor ``P[k, m, a, b]`` with ``x_k = sum P[k, m, a, b] (matrix m)_ab``."""
    lay = element_layout(dim)
    n = dim * dim
    P = np.zeros((n_matrices * n, n_matrices, dim, dim), dtype=complex)
    for m in range(n_matrices):
        for k, (kind, a, b) in enumerate(lay):
            row = m * n + k
            if kind == "diag":
                P[row, m, a, a] = 1.0
            elif kind == "re":
                P[row, m, a, b] = 0.5
                P[row, m, b, a] = 0.5
            else:
                P[row, m, a, b] = 0.5 / 1j
                P[row, m, b, a] = -0.5 / 1j
    return P


def matrices_to_coords(mats: np.ndarray) -> np.ndarray:
    """Real coordinates of stacked Hermitian matrices, shape (n_matrices, d, d) -> (n_matrices*d*d,)."""
    mats = np.asarray(mats)
    P = coordinate_projector(mats.shape[-1], mats.shape[0])
    return np.einsum("kmab,mab->k", P, mats).real


def coords_to_matrices(x: np.ndarray, dim: int, n_matrices: int) -> np.ndarray:
    return np.einsum("mabk,k->mab", entry_map(dim, n_matrices), x)


def _entry_brackets(dim: int, n_matrices: int) -> np.ndarray:
    """Brackets between matrix entries as x-linear forms.

    ``C[m1, a, b, m2, c, r, k]`` holds the coefficient of ``x_k`` in
    ``{(m1)_ab, (m2)_cr}``. Matrix 0 is the generator density; the others are
    order parameters, which bracket with each other to zero.
    """
    M = entry_map(dim, n_matrices)
    d = np.eye(dim)
    nx = M.shape[-1]
    C = np.zeros((n_matrices, dim, dim, n_matrices, dim, dim, nx), dtype=complex)
    # i{X_ab, g_cr} = X_cb d_ar - X_ar d_cb  for X = g or an order parameter
    for m in range(n_matrices):
        form = -1j * (np.einsum("cbk,ar->abcrk", M[m], d) - np.einsum("ark,cb->abcrk", M[m], d))
        C[m, :, :, 0] = form
        if m:
            C[0, :, :, m] = -form.transpose(2, 3, 0, 1, 4)
    return C


def _build_table(dim: int, n_matrices: int, names: list[str], kind: str) -> BracketTable:
    if dim < 2:
        raise InputError("matrix dimension must be at least 2")
    C = _entry_brackets(dim, n_matrices)
    P = coordinate_projector(dim, n_matrices)
    f = np.einsum("kmab,lncr,mabncrj->klj", P, P, C)
    if np.max(np.abs(f.imag)) > 1e-13:
        raise RuntimeError("non-real structure constants")
    labels = [_coord_label(names[m], kind_, a, b)
              for m in range(n_matrices) for kind_, a, b in element_layout(dim)]
    trace_rows = [[m * dim * dim + a for a in range(dim)] for m in range(n_matrices)]
    meta = {"kind": kind, "dim": dim, "n_matrices": n_matrices, "trace_coordinates": trace_rows}
    return BracketTable(tuple(labels), f.real, (), meta)


def master_table(dim: int) -> BracketTable:
    """Bracket of the generator density over its real matrix-element coordinates."""
    return _build_table(dim, 1, ["g"], "master")


def extended_table(dim: int, n_order: int = 1) -> BracketTable:
    """Generator density plus ``n_order`` order-parameter matrices."""
    if n_order < 1:
        raise InputError("extended table needs at least one order-parameter matrix")
    names = ["g"] + (["a"] if n_order == 1 else [f"a{l + 1}" for l in range(n_order)])
    return _build_table(dim, 1 + n_order, names, "extended")


# -- checks ----------------------------------------------------------------------

def jacobi_tensor(table: BracketTable) -> np.ndarray:
    f = table.constants
    return (np.einsum("abd,dce->abce", f, f)
            + np.einsum("bcd,dae->abce", f, f)
            + np.einsum("cad,dbe->abce", f, f))


def jacobi_residual(table: BracketTable) -> float:
    if len(table) == 0:
        return 0.0
    return float(np.max(np.abs(jacobi_tensor(table))))


def trace_rows(table: BracketTable) -> np.ndarray:
    """Rows (over table variables) of the trace of each matrix."""
    rows = table.metadata.get("trace_coordinates", [])
    T = np.zeros((len(rows), len(table)))
    for i, r in enumerate(rows):
        T[i, r] = 1.0
    return T


def centrality_residual(table: BracketTable) -> float:
    """Max size of ``{tr X, x_b}`` for every matrix trace ``tr X``."""
    T = trace_rows(table)
    if T.size == 0:
        return 0.0
    return float(np.max(np.abs(np.einsum("ta,abc->tbc", T, table.constants))))


# -- projection onto physical coordinates ---------------------------------------

def kernel_row(table: BracketTable, kernel: np.ndarray) -> np.ndarray:
    """Row vector ``L`` with ``Re sum_m tr(X_m K_m) = L . x`` for a slotted kernel."""
    dim = table.metadata["dim"]
    nm = table.metadata["n_matrices"]
    K = np.asarray(kernel)
    if K.shape[-2:] != (dim, dim) or K.shape[0] > nm:
        raise InputError(f"kernel shape {K.shape} incompatible with table (dim {dim}, {nm} matrices)")
    M = entry_map(dim, nm)[: K.shape[0]]
    return np.einsum("mabk,mba->k", M, K).real


def bracket_row(table: BracketTable, K1: np.ndarray, K2: np.ndarray) -> np.ndarray:
    """Bracket of two kernel functionals, as a row over table variables."""
    return np.einsum("a,b,abc->c", kernel_row(table, K1), kernel_row(table, K2), table.constants)


def _span_fit(target: np.ndarray, rows: np.ndarray, extra: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients of ``target`` on ``rows`` plus unreported ``extra`` rows.

    Returns the coefficients on ``rows`` and the residual vector.
    """
    B = np.vstack([rows, extra]) if extra.size else rows
    coef, *_ = np.linalg.lstsq(B.T, target, rcond=None)
    return coef[: rows.shape[0]], target - B.T @ coef


def _rank(rows: np.ndarray, tol: float) -> int:
    return int(np.linalg.matrix_rank(rows, tol=tol)) if rows.size else 0


def project_subalgebra(table: BracketTable, chart: Chart, subset=None,
                       tol: float = CLOSURE_TOL) -> BracketTable:
    """Restrict ``table`` to the chart coordinates named in ``subset``.

    Each bracket of two subset coordinates is fitted by least squares on the
    span of the subset (plus the matrix traces when the chart is traceless,
    since those vanish on the physical states). Brackets that leave the span
    are reported in ``metadata["offending"]``; they are a result, not an error.
    """
    subset = list(chart.labels if subset is None else subset)
    missing = [s for s in subset if s not in chart.labels]
    if missing:
        raise InputError(f"labels not in chart {chart.name}: {missing}")
    if chart.dim != table.metadata.get("dim") or chart.slots > table.metadata.get("n_matrices", 1):
        raise InputError(f"chart {chart.name} does not fit table {table.metadata}")
    kern = chart.kernels
    L = np.array([kernel_row(table, kern[chart.labels.index(s)]) for s in subset])
    T = trace_rows(table) if chart.traceless else np.zeros((0, len(table)))
    k = len(subset)
    independent = _rank(np.vstack([L, T]), tol) - _rank(T, tol) == k
    F = np.zeros((k, k, k))
    offending = []
    worst = 0.0
    for i, j in product(range(k), repeat=2):
        v = np.einsum("a,b,abc->c", L[i], L[j], table.constants)
        F[i, j], resid = _span_fit(v, L, T)
        res = float(np.max(np.abs(resid)))
        worst = max(worst, res)
        if res > tol:
            terms = {table.labels[c]: float(resid[c]) for c in np.argsort(-np.abs(resid))[:4]
                     if abs(resid[c]) > tol}
            offending.append({"pair": [subset[i], subset[j]], "residual": res, "outside_terms": terms})
    F = snap_rational(F)
    meta = {
        "kind": "projected",
        "source": table.metadata.get("kind"),
        "chart": chart.name,
        "dim": chart.dim,
        "closed": not offending,
        "independent": bool(independent),
        "closure_residual": worst,
        "offending": offending,
    }
    return BracketTable(tuple(subset), F, (), meta)


def snap_rational(values: np.ndarray, max_denominator: int = 96, tol: float = 1e-12) -> np.ndarray:
    """Replace entries lying within ``tol`` of a small-denominator rational by that rational."""
    out = np.array(values, dtype=float)
    for idx, v in np.ndenumerate(out):
        q = Fraction(float(v)).limit_denominator(max_denominator)
        if abs(float(q) - v) <= tol:
            out[idx] = float(q)
    return out


def as_fractions(values: np.ndarray, max_denominator: int = 96, tol: float = 1e-12):
    """Snap constants to rationals; returns (fractions, max snapping error)."""
    vals = np.asarray(values, dtype=float)
    fr = np.empty(vals.shape, dtype=object)
    err = 0.0
    for idx, v in np.ndenumerate(vals):
        q = Fraction(float(v)).limit_denominator(max_denominator)
        fr[idx] = q
        err = max(err, abs(float(q) - v))
    return fr, err


def is_rational_table(table: BracketTable, max_denominator: int = 96, tol: float = 1e-12) -> bool:
    _, err = as_fractions(table.constants, max_denominator)
    return err <= tol


def dual_matrices(chart: Chart, subset=None) -> np.ndarray:
    """Traceless Hermitian matrices ``T_k`` with ``phi_l(T_k) = delta_kl`` on the subset.

    Returns shape ``(n, slots, d, d)``: slot 0 is the generator-density part,
    slot ``l + 1`` the part in order parameter ``l``. A point of the projected
    table with coordinates ``y`` corresponds to ``g = sum_k y_k T_k[0]`` (and
    likewise for each order parameter).
    """
    subset = list(chart.labels if subset is None else subset)
    ref = master_table(chart.dim) if chart.n_order == 0 else extended_table(chart.dim, chart.n_order)
    L = np.array([kernel_row(ref, chart.kernels[chart.labels.index(s)]) for s in subset])
    T = trace_rows(ref)
    A = np.vstack([L, T])
    rhs = np.vstack([np.eye(len(subset)), np.zeros((T.shape[0], len(subset)))])
    X, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.max(np.abs(A @ X - rhs)) > 1e-10:
        raise InputError(f"chart {chart.name} coordinates are not independent")
    return np.einsum("mabk,kl->lmab", entry_map(chart.dim, chart.slots), X)

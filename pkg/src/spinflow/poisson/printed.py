"""Reference bracket relations in their published component form, and a comparator.

Each :class:`PrintedLine` gives the right-hand side of one published bracket
relation as a list of ``(coefficient, family, index)`` terms. The comparator
evaluates the same bracket from the master or extended table and reports, per
line, whether the two agree exactly (modulo the matrix traces, which vanish on
physical states), and if not, the best single scale factor between them.

Lines whose published text cannot be evaluated literally carry an
``ill_formed`` reason and, where a reading exists that makes sense of them, a
``corrected`` right-hand side that is checked in their place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np

from ..bases import levi_civita
from ..coordinates import chart as get_chart
from .tables import bracket_row, extended_table, kernel_row, master_table, trace_rows

EPS = levi_civita()
D3 = np.eye(3)
D4 = np.eye(4)
D5 = np.eye(5)
R3 = range(3)
R4 = range(4)
R5 = range(5)

Terms = list  # list of (coefficient, family, index)


@dataclass(frozen=True)
class PrintedLine:
    name: str
    left: tuple[str, str]
    rhs: Callable[..., Terms] | None
    ill_formed: str | None = None
    corrected: Callable[..., Terms] | None = None


@dataclass(frozen=True)
class PrintedGroup:
    name: str
    chart: str
    table: str  # "master" or "extended"
    n_order: int
    lines: tuple[PrintedLine, ...]
    chart_dim: int | None = None


@dataclass
class LineReport:
    group: str
    name: str
    status: str  # "match", "mismatch" or "ill-formed"
    residual: float
    best_ratio: float
    ratio_residual: float
    checked: int
    worst_index: tuple = ()
    note: str = ""
    corrected: "LineReport | None" = None

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "corrected"}
        out["worst_index"] = list(self.worst_index)
        if self.corrected is not None:
            out["corrected"] = self.corrected.as_dict()
        return out


@dataclass
class PrintedReport:
    lines: list[LineReport] = field(default_factory=list)

    def by_name(self, group: str, name: str) -> LineReport:
        for r in self.lines:
            if r.group == group and r.name == name:
                return r
        raise KeyError((group, name))

    def flagged(self) -> list[LineReport]:
        return [r for r in self.lines if r.status != "match"]

    def text(self) -> str:
        out = []
        for r in self.lines:
            s = f"[{r.status:10s}] {r.group}/{r.name}: residual {r.residual:.2e}"
            if r.status == "mismatch":
                s += f", best-fit ratio derived/printed {r.best_ratio:+.4g} (residual {r.ratio_residual:.2e})"
            if r.note:
                s += f" -- {r.note}"
            out.append(s)
            if r.corrected is not None:
                c = r.corrected
                s = f"    corrected reading: {c.status}, residual {c.residual:.2e}"
                if c.status == "mismatch":
                    s += f", best-fit ratio {c.best_ratio:+.4g} (residual {c.ratio_residual:.2e})"
                out.append(s)
        return "\n".join(out)


# -- relation definitions ----------------------------------------------------------

def _eps_vec(fam):
    """``{x_a, y_b} = eps_abc fam_c``."""
    return lambda i, j: [(EPS[i[0], j[0], c], fam, (c,)) for c in R3]


def _zero(i, j):
    return []


def _spin_quad(fam):
    """``eps_abr fam_rc + eps_acr fam_rb`` for ``{s_a, fam_bc}``-type brackets."""
    def rhs(i, j):
        a, (b, c) = i[0], j
        return ([(EPS[a, b, r], fam, (r, c)) for r in R3]
                + [(EPS[a, c, r], fam, (r, b)) for r in R3])
    return rhs


def _quad_quad(fam):
    """``fam_g (eps_gan d_bm + eps_gbm d_an + eps_gbn d_am + eps_gam d_bn) / 4``."""
    def rhs(i, j):
        (a, b), (m, n) = i, j
        return [((EPS[g, a, n] * D3[b, m] + EPS[g, b, m] * D3[a, n]
                  + EPS[g, b, n] * D3[a, m] + EPS[g, a, m] * D3[b, n]) / 4, fam, (g,)) for g in R3]
    return rhs


def _ordered_quad_corrected(i, j):
    # left side read as {w_ab, q_mn}; the repeated index g is summed
    (a, b), (m, n) = i, j
    return [((EPS[a, n, g] * D3[b, m] + EPS[b, m, g] * D3[a, n]
              + EPS[b, n, g] * D3[a, m] + EPS[a, m, g] * D3[b, n]) / 4, "n", (g,)) for g in R3]


def _spin_w(i, j):
    a, (b, c) = i[0], j
    return ([(EPS[a, c, r], "w", (b, r)) for r in R3] + [(EPS[a, b, r], "w", (c, r)) for r in R3])


def _vq(fam):
    def rhs(i, j):
        a, (b, c) = i[0], j
        return [(D3[a, b] / 2, fam, (c,)), (D3[a, c] / 2, fam, (b,)), (-D3[b, c] / 3, fam, (a,))]
    return rhs


def _uv(i, j):
    a, b = i[0], j[0]
    return [(8 * D3[a, b] / 3, "g44", ()), (-2.0, "q", (a, b))]


def _anti_anti(i, j):
    (a, b), (c, r) = i, j
    d = np.eye(3)
    return [(d[a, r] / 2, "ga", (b, c)), (d[b, c] / 2, "ga", (a, r)),
            (d[a, c] / 2, "ga", (r, b)), (d[b, r] / 2, "ga", (c, a))]


def _sym_sym(i, j):
    (a, b), (c, r) = i, j
    d = np.eye(3)
    return [(-d[a, r] / 2, "ga", (b, c)), (-d[b, c] / 2, "ga", (a, r)),
            (-d[a, c] / 2, "ga", (b, r)), (-d[b, r] / 2, "ga", (a, c))]


def _anti_sym(i, j):
    (a, b), (c, r) = i, j
    d = np.eye(3)
    return [(-d[a, r] / 2, "gs", (b, c)), (d[b, c] / 2, "gs", (a, r)),
            (-d[a, c] / 2, "gs", (b, r)), (d[b, r] / 2, "gs", (c, a))]


def _d_sigma_sigma(literal: bool):
    def rhs(i, j):
        (m, n), (l, r) = i, j
        terms = [(-D4[n, l] / 2, "sigma", (m, r)), (-D4[m, r] / 2, "sigma", (n, l)),
                 (-D4[m, l] / 2, "sigma", (r, n))]
        if not literal:
            terms.append((-D4[n, r] / 2, "sigma", (l, m)))
        return terms
    return rhs


def _d_vec_sigma(fam):
    def rhs(i, j):
        lam, (m, n) = i[0], j
        return [(D4[lam, m] / 2, fam, (n,)), (-D4[lam, n] / 2, fam, (m,))]
    return rhs


def _so5_ab(i, j):
    return [(-0.5, "gab", (i[0], j[0]))]


def _so5_c_ab(i, j):
    c, (a, b) = i[0], j
    return [(D5[a, c] / 2, "ga", (b,)), (-D5[b, c] / 2, "ga", (a,))]


def _so5_ab_cd(i, j):
    (a, b), (c, d) = i, j
    return [(D5[b, c] / 2, "gab", (a, d)), (-D5[a, c] / 2, "gab", (b, d)),
            (D5[b, d] / 2, "gab", (c, a)), (-D5[a, d] / 2, "gab", (c, b))]


GROUPS: tuple[PrintedGroup, ...] = (
    PrintedGroup("spin_half", "pauli", "master", 0, (
        PrintedLine("s_s", ("s", "s"), _eps_vec("s")),
    )),
    PrintedGroup("uniaxial", "uniaxial", "extended", 1, (
        PrintedLine("s_s", ("s", "s"), _eps_vec("s")),
        PrintedLine("s_n", ("s", "n"), _eps_vec("n")),
        PrintedLine("n_n", ("n", "n"), _zero),
    )),
    PrintedGroup("biaxial", "biaxial", "extended", 3, (
        PrintedLine("s_R", ("s", "R"),
                    lambda i, j: [(EPS[i[0], j[0], c], "R", (c, j[1])) for c in R3]),
        PrintedLine("R_R", ("R", "R"), _zero),
    )),
    PrintedGroup("spin_one", "spin1", "master", 0, (
        PrintedLine("s_s", ("s", "s"), _eps_vec("s")),
        PrintedLine("s_q", ("s", "q"), _spin_quad("q")),
        PrintedLine("q_q", ("q", "q"), _quad_quad("s")),
    )),
    PrintedGroup("spin_one_ordered", "spin1_extended", "extended", 1, (
        PrintedLine("s_n", ("s", "n"), _eps_vec("n")),
        PrintedLine("n_q", ("n", "q"), _spin_quad("w")),
        PrintedLine("s_w", ("s", "w"), _spin_w),
        PrintedLine("w_q", ("w", "q"), None,
                    ill_formed="right side carries free indices that do not appear on the left side",
                    corrected=_ordered_quad_corrected),
    )),
    PrintedGroup("spin_three_halves", "spin32", "master", 0, (
        PrintedLine("s_s", ("s", "s"), _eps_vec("s")),
        PrintedLine("u_u", ("u", "u"), _eps_vec("s")),
        PrintedLine("s_u", ("s", "u"), _eps_vec("u")),
        PrintedLine("s_q", ("s", "q"), _spin_quad("q")),
        PrintedLine("s_v", ("s", "v"), _eps_vec("v")),
        PrintedLine("v_v", ("v", "v"), _eps_vec("s")),
        PrintedLine("u_q", ("u", "q"), _vq("v")),
        PrintedLine("v_q", ("v", "q"), _vq("u")),
        PrintedLine("u_g", ("u", "g44"), lambda i, j: [(-1.0, "v", i)]),
        PrintedLine("v_g", ("v", "g44"), lambda i, j: [(1.0, "u", i)]),
        PrintedLine("u_v", ("u", "v"), _uv),
    )),
    PrintedGroup("dirac", "dirac", "master", 0, (
        PrintedLine("g5_gamma", ("gamma5", "gamma"), lambda i, j: [(-0.5, "gammabar", j)]),
        PrintedLine("g5_gammabar", ("gamma5", "gammabar"), lambda i, j: [(0.5, "gamma", j)]),
        PrintedLine("gamma_gamma", ("gamma", "gamma"), lambda i, j: [(-0.5, "sigma", (i[0], j[0]))]),
        PrintedLine("gammabar_gammabar", ("gammabar", "gammabar"),
                    lambda i, j: [(-0.5, "sigma", (i[0], j[0]))]),
        PrintedLine("gamma_gammabar", ("gamma", "gammabar"),
                    lambda i, j: [(-D4[i[0], j[0]] / 2, "gamma5", ())]),
        PrintedLine("sigma_sigma", ("sigma", "sigma"), None,
                    ill_formed="one term is a product of Kronecker deltas with no field factor",
                    corrected=_d_sigma_sigma(literal=False)),
        PrintedLine("gamma_sigma", ("gamma", "sigma"), _d_vec_sigma("gamma")),
        PrintedLine("gammabar_sigma", ("gammabar", "sigma"), _d_vec_sigma("gammabar")),
    )),
    PrintedGroup("so5", "so5", "master", 0, (
        PrintedLine("a_b", ("ga", "ga"), _so5_ab),
        PrintedLine("c_ab", ("ga", "gab"), _so5_c_ab),
        PrintedLine("ab_cd", ("gab", "gab"), _so5_ab_cd),
    )),
    PrintedGroup("matrix_parts", "sym_antisym", "master", 0, (
        PrintedLine("anti_anti", ("ga", "ga"), _anti_anti),
        PrintedLine("sym_sym", ("gs", "gs"), _sym_sym),
        PrintedLine("anti_sym", ("ga", "gs"), _anti_sym),
    ), chart_dim=3),
)


def group(name: str) -> PrintedGroup:
    for g in GROUPS:
        if g.name == name:
            return g
    raise KeyError(name)


@lru_cache(maxsize=None)
def _table_for(kind: str, dim: int, n_order: int):
    return master_table(dim) if kind == "master" else extended_table(dim, n_order)


def _modulo_trace(vec: np.ndarray, T: np.ndarray) -> np.ndarray:
    if T.size == 0:
        return vec
    coef, *_ = np.linalg.lstsq(T.T, vec, rcond=None)
    return vec - T.T @ coef


def compare_line(grp: PrintedGroup, line: PrintedLine, rhs=None, tol: float = 1e-12) -> LineReport:
    ch = get_chart(grp.chart, grp.chart_dim)
    table = _table_for(grp.table, ch.dim, grp.n_order)
    T = trace_rows(table)
    rhs = line.rhs if rhs is None else rhs
    f1, f2 = line.left
    shp1 = ch.families[f1].shape[:-3]
    shp2 = ch.families[f2].shape[:-3]
    derived, printed, idx = [], [], []
    for i in product(*[range(n) for n in shp1]):
        for j in product(*[range(n) for n in shp2]):
            v = bracket_row(table, ch.kernel(f1, i), ch.kernel(f2, j))
            p = np.zeros(len(table))
            for coef, fam, k in rhs(i, j):
                if coef:
                    p += coef * kernel_row(table, ch.kernel(fam, tuple(k)))
            derived.append(_modulo_trace(v, T))
            printed.append(_modulo_trace(p, T))
            idx.append((i, j))
    V = np.array(derived)
    P = np.array(printed)
    diff = np.max(np.abs(V - P), axis=1)
    worst = int(np.argmax(diff))
    residual = float(diff[worst])
    pp = float(np.sum(P * P))
    ratio = float(np.sum(V * P) / pp) if pp > 0 else 0.0
    ratio_res = float(np.max(np.abs(V - ratio * P))) if V.size else 0.0
    status = "match" if residual <= tol else "mismatch"
    return LineReport(grp.name, line.name, status, residual, ratio, ratio_res, len(idx),
                      tuple(tuple(int(t) for t in x) for x in idx[worst]))


def compare_group(grp: PrintedGroup) -> list[LineReport]:
    out = []
    for line in grp.lines:
        if line.ill_formed:
            rep = LineReport(grp.name, line.name, "ill-formed", float("nan"), float("nan"),
                             float("nan"), 0, note=line.ill_formed)
            if line.corrected is not None:
                rep.corrected = compare_line(grp, line, rhs=line.corrected)
            out.append(rep)
        else:
            out.append(compare_line(grp, line))
    return out


def mismatch_report(groups=None) -> PrintedReport:
    groups = GROUPS if groups is None else [group(g) if isinstance(g, str) else g for g in groups]
    rep = PrintedReport()
    for g in groups:
        rep.lines.extend(compare_group(g))
    return rep

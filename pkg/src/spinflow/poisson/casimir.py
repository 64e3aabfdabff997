"""Polynomial invariants and the check that they commute with every variable."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..coordinates import Chart
from ..matrix_core import InputError
from .tables import BracketTable, dual_matrices, entry_map

MAX_DEGREE = 4


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in ``n_vars`` variables stored as {sorted index tuple: coefficient}."""

    n_vars: int
    terms: dict
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def evaluate(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x[list(m)]) for m, c in self.terms.items()))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.n_vars)
        for mono, c in self.terms.items():
            for pos, var in enumerate(mono):
                rest = mono[:pos] + mono[pos + 1:]
                g[var] += c * np.prod(x[list(rest)])
        return g

    def descriptor(self) -> dict:
        return {"name": self.name, "degree": self.degree, **self.meta}


def _mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            key = tuple(sorted(m1 + m2))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _add(p: dict, q: dict, scale=1.0) -> dict:
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + scale * c
    return out


def _clean(p: dict, tol: float = 1e-14) -> dict:
    out = {}
    for m, c in p.items():
        if abs(c.imag if isinstance(c, complex) else 0.0) > 1e-10:
            raise RuntimeError("polynomial with non-real coefficient")
        c = float(np.real(c))
        if abs(c) > tol:
            out[m] = c
    return out


def trace_power_polynomial(linear_map: np.ndarray, n: int, name: str = "") -> Polynomial:
    """``tr X^n`` where ``X_ab = sum_k linear_map[a, b, k] y_k``."""
    if n < 1 or n > MAX_DEGREE:
        raise InputError(f"trace power degree must be 1..{MAX_DEGREE}, got {n}")
    d = linear_map.shape[0]
    nv = linear_map.shape[-1]
    entry = [[{(k,): linear_map[a, b, k] for k in range(nv) if linear_map[a, b, k] != 0}
              for b in range(d)] for a in range(d)]
    power = entry
    for _ in range(n - 1):
        nxt = []
        for a in range(d):
            row = []
            for b in range(d):
                acc: dict = {}
                for c in range(d):
                    acc = _add(acc, _mul(power[a][c], entry[c][b]))
                row.append(acc)
            nxt.append(row)
        power = nxt
    tr: dict = {}
    for a in range(d):
        tr = _add(tr, power[a][a])
    return Polynomial(nv, _clean(tr), name or f"tr X^{n}", {"kind": "trace_power", "n": n})


def table_trace_polynomial(table: BracketTable, n: int, matrix: int = 0) -> Polynomial:
    """``tr X^n`` for matrix ``matrix`` of a master or extended table."""
    dim = table.metadata["dim"]
    M = entry_map(dim, table.metadata["n_matrices"])[matrix]
    name = ("g" if matrix == 0 else f"a{matrix}") + f"^{n}"
    return trace_power_polynomial(M, n, name=f"tr {name}")


def chart_trace_polynomial(chart: Chart, n: int, subset=None, slot: int = 0) -> Polynomial:
    """``tr X^n`` written in the chart coordinates; slot 0 is g, slot l is order parameter l."""
    mats = dual_matrices(chart, subset)[:, slot]
    name = "g" if slot == 0 else ("a" if chart.n_order == 1 else f"a{slot}")
    return trace_power_polynomial(np.moveaxis(mats, 0, -1), n, name=f"tr {name}^{n}")


def quadratic_form(labels: tuple[str, ...], pairs: list[tuple[str, str, float]], name: str) -> Polynomial:
    """Sum of ``c * y_p * y_q`` over the given label pairs."""
    terms: dict = {}
    for p, q, c in pairs:
        key = tuple(sorted((labels.index(p), labels.index(q))))
        terms[key] = terms.get(key, 0.0) + c
    return Polynomial(len(labels), _clean(terms), name, {"kind": "quadratic"})


def casimir_bracket(table: BracketTable, casimir: Polynomial, x: np.ndarray) -> np.ndarray:
    """``{C, x_a}`` for every variable, by the chain rule through the table."""
    return np.einsum("b,bac,c->a", casimir.gradient(x), table.constants, x)


def casimir_commutation_check(table: BracketTable, casimir: Polynomial, trials: int = 100,
                              rng: np.random.Generator | None = None) -> float:
    """Max ``|{C, x_a}|`` over random points with standard-normal coordinates."""
    if casimir.n_vars != len(table):
        raise InputError("casimir variable count does not match the table")
    if casimir.degree > MAX_DEGREE:
        raise InputError(f"casimir degree {casimir.degree} exceeds {MAX_DEGREE}")
    dim = table.metadata.get("dim")
    if dim is not None and casimir.meta.get("kind") == "trace_power" and casimir.degree > dim:
        raise InputError(f"degree {casimir.degree} exceeds matrix dimension {dim}")
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        x = rng.normal(size=len(table))
        worst = max(worst, float(np.max(np.abs(casimir_bracket(table, casimir, x)))))
    return worst


def _dot(labels, f1, f2, name):
    return quadratic_form(labels, [(f"{f1}_{c}", f"{f2}_{c}", 1.0) for c in "xyz"], name)


def chart_casimirs(chart: Chart) -> list[Polynomial]:
    """Invariants of the projected algebra of a chart, in its coordinates."""
    lab = chart.labels
    name = chart.name
    if name == "pauli":
        return [_dot(lab, "s", "s", "s.s")]
    if name == "uniaxial":
        return [_dot(lab, "s", "n", "s.n"), _dot(lab, "n", "n", "n.n")]
    if name == "biaxial":
        out = []
        for i, li in enumerate("xyz"):
            for lj in "xyz"[i:]:
                pairs = [(f"R_{b}{li}", f"R_{b}{lj}", 1.0) for b in "xyz"]
                out.append(quadratic_form(lab, pairs, f"(R^T R)_{li}{lj}"))
        return out
    if name == "su2xsu2":
        s2 = quadratic_form(lab, [(f"{f}_{c}", f"{f}_{c}", 1.0) for f in "su" for c in "xyz"], "s.s+u.u")
        return [s2, _dot(lab, "s", "u", "s.u")]
    if name == "su2xsu2_v":
        s2 = quadratic_form(lab, [(f"{f}_{c}", f"{f}_{c}", 1.0) for f in "sv" for c in "xyz"], "s.s+v.v")
        return [s2, _dot(lab, "s", "v", "s.v")]
    if chart.n_order:
        return [chart_trace_polynomial(chart, n, slot=1) for n in range(2, chart.dim + 1)]
    return [chart_trace_polynomial(chart, n) for n in range(2, chart.dim + 1)]

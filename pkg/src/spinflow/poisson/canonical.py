"""Bracket of the generator density computed from the canonical pair (a, b)."""

from __future__ import annotations

import numpy as np

from ..matrix_core import InputError, random_hermitian


def canonical_generator_bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``{g_ab, g_cr}`` for ``g = i[b, a]`` from the canonical brackets of a and b.

    The only nonzero canonical brackets are ``{a_xy, b_yx} = 1`` and
    ``{b_yx, a_xy} = -1``, so for functions of the matrix entries
    ``{F, G} = sum_xy (dF/da_xy dG/db_yx - dF/db_yx dG/da_xy)``.
    """
    d = a.shape[-1]
    e = np.eye(d)
    # dg_ab/da_xy = i (b_ax d_yb - d_ax b_yb);  dg_ab/db_xy = i (d_ax a_yb - a_ax d_yb)
    dga = 1j * (np.einsum("ax,yb->abxy", b, e) - np.einsum("ax,yb->abxy", e, b))
    dgb = 1j * (np.einsum("ax,yb->abxy", e, a) - np.einsum("ax,yb->abxy", a, e))
    return np.einsum("abxy,cryx->abcr", dga, dgb) - np.einsum("abyx,crxy->abcr", dgb, dga)


def master_bracket_rhs(g: np.ndarray) -> np.ndarray:
    """``{g_ab, g_cr} = -i (g_cb d_ar - g_ar d_cb)``."""
    e = np.eye(g.shape[-1])
    return -1j * (np.einsum("cb,ar->abcr", g, e) - np.einsum("ar,cb->abcr", g, e))


def canonical_consistency_check(dim: int, trials: int, rng: np.random.Generator | None = None,
                                a: np.ndarray | None = None) -> float:
    """Max deviation between the canonical-pair bracket and the master bracket."""
    if trials < 1:
        raise InputError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        aa = random_hermitian(dim, rng, traceless=False) if a is None else np.asarray(a, dtype=complex)
        bb = random_hermitian(dim, rng, traceless=False)
        g = 1j * (bb @ aa - aa @ bb)
        res = np.max(np.abs(canonical_generator_bracket(aa, bb) - master_bracket_rhs(g)))
        worst = max(worst, float(res))
    return worst

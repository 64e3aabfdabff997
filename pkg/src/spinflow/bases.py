"""Concrete generator bases for spin 1/2, 1 and 3/2.

Dirac representation used throughout (Hermitian, gamma_4 diagonal)::

    gamma_k = [[0, -i sigma_k], [i sigma_k, 0]]   (k = 1, 2, 3)
    gamma_4 = diag(1, 1, -1, -1)
    gamma_5 = gamma_1 gamma_2 gamma_3 gamma_4

With all four gamma_mu Hermitian the product gamma_1 gamma_2 gamma_3 gamma_4 is
already Hermitian and squares to the identity, so no extra factor of i is
applied. The derived elements are gammabar_mu = i gamma_5 gamma_mu and
sigma_mu_nu = i [gamma_mu, gamma_nu] / 2.
"""

from __future__ import annotations

import json
from functools import lru_cache
from itertools import permutations

import numpy as np

from .matrix_core import BasisSet

AXES = "xyz"


@lru_cache(maxsize=None)
def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for perm in permutations(range(3)):
        eps[perm] = np.linalg.det(np.eye(3)[list(perm)])
    eps.setflags(write=False)
    return eps


@lru_cache(maxsize=None)
def pauli_matrices() -> np.ndarray:
    sig = np.array([
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ], dtype=complex)
    sig.setflags(write=False)
    return sig


@lru_cache(maxsize=None)
def pauli_basis() -> BasisSet:
    return BasisSet(2, pauli_matrices(), ("s_x", "s_y", "s_z"))


@lru_cache(maxsize=None)
def spin_one_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Spin operators ``(s_a)_{mn} = -i eps_{amn}`` and the nine quadrupole matrices.

    ``quad[b, a]`` holds ``(q_{ba})_{mn} = (d_bm d_an + d_bn d_am - 2 d_ba d_mn / 3) / 2``.
    """
    eps = levi_civita()
    d = np.eye(3)
    spin = -1j * eps
    quad = 0.5 * (np.einsum("bm,an->banm", d, d) + np.einsum("bn,am->banm", d, d)
                  - 2.0 / 3.0 * np.einsum("ba,mn->banm", d, d))
    spin = spin.astype(complex)
    quad = quad.astype(complex)
    spin.setflags(write=False)
    quad.setflags(write=False)
    return spin, quad


@lru_cache(maxsize=None)
def spin1_basis() -> BasisSet:
    """Three spin matrices plus five mutually orthogonal quadrupole combinations."""
    spin, quad = spin_one_matrices()
    els = [spin[0], spin[1], spin[2], quad[0, 1], quad[0, 2], quad[1, 2],
           quad[0, 0] - quad[1, 1], quad[2, 2]]
    labels = ("s_x", "s_y", "s_z", "q_xy", "q_xz", "q_yz", "q_xx-yy", "q_zz")
    return BasisSet(3, np.array(els), labels)


@lru_cache(maxsize=None)
def dirac_matrices() -> dict[str, np.ndarray]:
    sig = pauli_matrices()
    Z = np.zeros((2, 2), dtype=complex)
    I2 = np.eye(2, dtype=complex)
    gamma = np.array([np.block([[Z, -1j * s], [1j * s, Z]]) for s in sig]
                     + [np.block([[I2, Z], [Z, -I2]])])
    gamma5 = gamma[0] @ gamma[1] @ gamma[2] @ gamma[3]
    gammabar = np.array([1j * gamma5 @ g for g in gamma])
    sigma = 0.5j * (np.einsum("mij,njk->mnik", gamma, gamma) - np.einsum("nij,mjk->mnik", gamma, gamma))
    out = {"gamma": gamma, "gamma5": gamma5, "gammabar": gammabar, "sigma": sigma}
    for v in out.values():
        v.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def dirac_basis() -> BasisSet:
    m = dirac_matrices()
    els = [m["gamma5"]]
    labels = ["gamma5"]
    for mu in range(4):
        els.append(m["gamma"][mu])
        labels.append(f"gamma_{mu + 1}")
    for mu in range(4):
        els.append(m["gammabar"][mu])
        labels.append(f"gammabar_{mu + 1}")
    for mu in range(4):
        for nu in range(mu + 1, 4):
            els.append(m["sigma"][mu, nu])
            labels.append(f"sigma_{mu + 1}{nu + 1}")
    return BasisSet(4, np.array(els), tuple(labels))


@lru_cache(maxsize=None)
def so5_matrices() -> tuple[np.ndarray, np.ndarray]:
    """``(gamma_a, gamma_ab)`` with gamma_a = (gamma_mu, gamma_5) and gamma_ab = i[gamma_a, gamma_b]/2."""
    m = dirac_matrices()
    ga = np.concatenate([m["gamma"], m["gamma5"][None]], axis=0)
    gab = 0.5j * (np.einsum("aij,bjk->abik", ga, ga) - np.einsum("bij,ajk->abik", ga, ga))
    ga.setflags(write=False)
    gab.setflags(write=False)
    return ga, gab


@lru_cache(maxsize=None)
def so5_basis() -> BasisSet:
    ga, gab = so5_matrices()
    els = list(ga)
    labels = [f"g_{a + 1}" for a in range(5)]
    for a in range(5):
        for b in range(a + 1, 5):
            els.append(gab[a, b])
            labels.append(f"g_{a + 1}{b + 1}")
    return BasisSet(4, np.array(els), tuple(labels))


@lru_cache(maxsize=None)
def so6_generators() -> np.ndarray:
    """Generators ``S[i, k]`` (0-based, i, k < 6) of so(6) built from the Dirac set.

    Index 4 plays the role of "5" and index 5 the role of "6". With this index
    order the generators satisfy
    ``i[S_ik, S_lm] = d_im S_kl - d_il S_km - d_km S_il + d_kl S_im``.
    Reversing every index pair flips the overall sign of that identity.
    """
    m = dirac_matrices()
    S = np.zeros((6, 6, 4, 4), dtype=complex)

    def put(i, k, M):
        S[i, k] = M / 2
        S[k, i] = -M / 2

    for mu in range(4):
        put(mu, 5, m["gamma"][mu])
        put(mu, 4, m["gammabar"][mu])
        for nu in range(4):
            if nu != mu:
                S[nu, mu] = m["sigma"][mu, nu] / 2
    put(4, 5, m["gamma5"])
    S.setflags(write=False)
    return S


def all_bases() -> dict[str, BasisSet]:
    return {
        "pauli": pauli_basis(),
        "spin1": spin1_basis(),
        "dirac": dirac_basis(),
        "so5": so5_basis(),
    }


def basis_to_json(basis: BasisSet) -> dict:
    return {
        "dim": basis.dim,
        "labels": list(basis.labels),
        "elements": [[[[float(z.real), float(z.imag)] for z in row] for row in el]
                     for el in basis.elements],
        "gram": basis.gram.tolist(),
    }


def basis_from_json(data: dict) -> BasisSet:
    els = np.array(data["elements"], dtype=float)
    return BasisSet(int(data["dim"]), els[..., 0] + 1j * els[..., 1], tuple(data["labels"]))


def dump_basis(basis: BasisSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(basis_to_json(basis), fh, indent=1)

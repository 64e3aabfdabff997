"""Dense complex-matrix arithmetic for small Hermitian generator matrices.

All routines broadcast over leading axes, so a lattice of matrices with shape
``(*grid, d, d)`` can be passed wherever a single ``(d, d)`` matrix is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12


class InputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


def _check_square(A: np.ndarray) -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InputError(f"expected square matrices, got shape {A.shape}")


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Return ``AB - BA``.

    For Hermitian inputs the result is anti-Hermitian; multiply by ``1j`` to get
    a Hermitian matrix.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    _check_square(A)
    _check_square(B)
    if A.shape[-1] != B.shape[-1]:
        raise InputError(f"dimension mismatch: {A.shape[-1]} vs {B.shape[-1]}")
    return A @ B - B @ A


def hermiticity_error(A: np.ndarray) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - dagger(A))))


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(A) <= tol


def hermitize(A: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, ``(A + A^+)/2``."""
    return 0.5 * (A + dagger(A))


def trace_power(A: np.ndarray, n: int) -> np.ndarray | complex:
    """Return ``tr(A^n)`` (broadcast over leading axes)."""
    A = np.asarray(A)
    _check_square(A)
    if int(n) != n or n < 1:
        raise InputError(f"trace power needs an integer n >= 1, got {n!r}")
    P = A
    for _ in range(int(n) - 1):
        P = P @ A
    tr = np.trace(P, axis1=-2, axis2=-1)
    return complex(tr) if np.ndim(tr) == 0 else tr


def split_sym_antisym(A: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split Hermitian ``A`` as ``A = S + iK`` with ``S`` real symmetric and ``K`` real antisymmetric."""
    A = np.asarray(A)
    _check_square(A)
    err = hermiticity_error(A)
    if err > tol:
        raise InputError(f"matrix is not Hermitian (deviation {err:.3e})")
    At = np.swapaxes(A, -1, -2)
    sym = 0.5 * (A + At)
    anti = (A - At) / 2j
    return sym.real.copy(), anti.real.copy()


def join_sym_antisym(sym: np.ndarray, anti: np.ndarray) -> np.ndarray:
    return np.asarray(sym, dtype=complex) + 1j * np.asarray(anti)


@dataclass(frozen=True)
class BasisSet:
    """Ordered set of Hermitian traceless matrices with their trace Gram matrix."""

    dim: int
    elements: np.ndarray  # (n, dim, dim) complex
    labels: tuple[str, ...]
    gram: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        els = np.asarray(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1:] != (self.dim, self.dim):
            raise InputError(f"basis elements must have shape (n, {self.dim}, {self.dim})")
        if len(self.labels) != els.shape[0]:
            raise InputError("one label per basis element required")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)
        gram = np.einsum("aij,bji->ab", els, els).real
        gram.setflags(write=False)
        object.__setattr__(self, "gram", gram)

    def __len__(self) -> int:
        return self.elements.shape[0]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def element(self, label: str) -> np.ndarray:
        return self.elements[self.index(label)]

    @property
    def normalization(self) -> np.ndarray:
        return np.diag(self.gram).copy()

    def is_orthogonal(self, tol: float = 1e-13) -> bool:
        off = self.gram - np.diag(np.diag(self.gram))
        return bool(np.max(np.abs(off)) <= tol)

    def rank(self, tol: float = 1e-10) -> int:
        flat = np.concatenate([self.elements.real.reshape(len(self), -1),
                               self.elements.imag.reshape(len(self), -1)], axis=1)
        return int(np.linalg.matrix_rank(flat, tol=tol))


@dataclass(frozen=True)
class Expansion:
    coefficients: np.ndarray
    residual: float
    representable: bool


def expand(A: np.ndarray, basis: BasisSet, tol: float = 1e-12) -> Expansion:
    """Coefficients ``c_a = tr(A T_a) / tr(T_a T_a)`` plus the reconstruction residual.

    The residual is reported rather than raised: an incomplete basis simply flags
    ``representable=False``.
    """
    A = np.asarray(A, dtype=complex)
    _check_square(A)
    if A.shape[-1] != basis.dim:
        raise InputError(f"dimension mismatch: matrix {A.shape[-1]} vs basis {basis.dim}")
    coeff = np.einsum("...ij,aji->...a", A, basis.elements).real / np.diag(basis.gram)
    residual = float(np.max(np.abs(reconstruct(coeff, basis) - A))) if A.size else 0.0
    return Expansion(coeff, residual, residual <= tol)


def reconstruct(coefficients: np.ndarray, basis: BasisSet) -> np.ndarray:
    return np.einsum("...a,aij->...ij", np.asarray(coefficients, dtype=float), basis.elements)


def random_hermitian(dim: int, rng: np.random.Generator, traceless: bool = True,
                     size: tuple[int, ...] = ()) -> np.ndarray:
    X = rng.normal(size=size + (dim, dim)) + 1j * rng.normal(size=size + (dim, dim))
    H = hermitize(X)
    if traceless:
        H = H - np.trace(H, axis1=-2, axis2=-1)[..., None, None] * np.eye(dim) / dim
    return H


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))

"""Quasitriangular Lie bialgebras and their double Lie algebras.

Conventions used throughout (all verified by the test suite):

* An element rho of g (x) g is stored as its coefficient matrix,
  r = sum_ij rho[i, j] e_i (x) e_j.
* ``r2`` is the operator m -> g obtained by evaluating a dual vector
  against the *second* tensor slot, so r2(phi) has coefficients
  rho @ phi; ``r1`` evaluates against the first slot, giving rho.T @ phi.
* The symmetric part 2 r_+ = rho + rho.T is required ad-invariant and
  invertible; its inverse is the map K : g -> m.
* The cobracket is delta(xi) = A rho + rho A^T with A = ad_xi, and the
  dual algebra m carries the opposite of the transpose bracket:
  the coefficient of f_k in [f_a, f_b] is -delta(e_k)[a, b].
* The double d = g (+) m has brackets
    [xi, eta]   = g-bracket,
    [phi, psi]  = m-bracket,
    [phi, xi]   = phi |> xi - phi <| xi,
  where phi |> xi = delta(xi) evaluated against phi in the *first* slot
  (a g-vector) and phi <| xi = the m-cobracket of phi evaluated against
  xi in the second slot (an m-vector).  The m-cobracket of f_a is the
  tensor with coefficients D_a[b, c] = c_g[b, c, a].  This is the unique
  sign choice for which the double satisfies the Jacobi identity and the
  pairing below is ad-invariant (both anchors are enforced in tests).
* The invariant pairing is <xi (+) phi, eta (+) psi> = phi(eta) + psi(xi);
  both factors are isotropic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .liecore import (
    AlgebraVector,
    BilinearForm,
    LieAlgebra,
    LinearOperator,
    ad_matrix,
)

__all__ = [
    "TwoTensor",
    "QuasiBialgebra",
    "DoubleAlgebra",
    "cybe_residual",
    "symmetric_part_invariance_residual",
    "cobracket",
    "cobracket_matrix",
    "cocycle_residual",
    "dual_algebra",
    "build_double",
    "double_iso_lr",
    "pairing_ad_invariance_residual",
    "tensor_conjugate",
]


@dataclass
class TwoTensor:
    """An element of left (x) right with dense coefficient matrix."""

    left: LieAlgebra
    right: LieAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.left.dim, self.right.dim):
            raise ValueError("tensor coefficient matrix has wrong shape")

    def eval_second(self, v: np.ndarray) -> np.ndarray:
        """Pair the second slot against a dual coefficient vector."""
        return self.coeffs @ np.asarray(v, dtype=complex)

    def eval_first(self, v: np.ndarray) -> np.ndarray:
        return self.coeffs.T @ np.asarray(v, dtype=complex)


def cybe_residual(algebra: LieAlgebra, rho: np.ndarray) -> float:
    """Max-norm of [[r, r]] = [r12, r13] + [r12, r23] + [r13, r23]."""
    rho = np.asarray(rho, dtype=complex)
    c = algebra.c
    t1 = np.einsum("ij,kl,ikm->mjl", rho, rho, c)
    t2 = np.einsum("ij,kl,jkm->iml", rho, rho, c)
    t3 = np.einsum("ij,kl,jlm->ikm", rho, rho, c)
    return float(np.max(np.abs(t1 + t2 + t3)))


def symmetric_part_invariance_residual(algebra: LieAlgebra, rho: np.ndarray) -> float:
    """Ad-invariance defect of the symmetric part rho + rho.T."""
    s = np.asarray(rho, dtype=complex)
    s = s + s.T
    worst = 0.0
    for i in range(algebra.dim):
        a = ad_matrix(algebra, np.eye(algebra.dim)[i])
        worst = max(worst, float(np.max(np.abs(a @ s + s @ a.T))))
    return worst


def cobracket_matrix(algebra: LieAlgebra, rho: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Coefficient matrix of delta(xi) = (ad_xi (x) 1 + 1 (x) ad_xi) r."""
    a = ad_matrix(algebra, xi)
    rho = np.asarray(rho, dtype=complex)
    return a @ rho + rho @ a.T


def cobracket(bialgebra: "QuasiBialgebra", xi: AlgebraVector) -> TwoTensor:
    m = cobracket_matrix(bialgebra.g, bialgebra.rho, xi.coeffs)
    return TwoTensor(bialgebra.g, bialgebra.g, m)


def cocycle_residual(bialgebra: "QuasiBialgebra") -> float:
    """1-cocycle defect of the cobracket over all basis pairs."""
    g, rho = bialgebra.g, bialgebra.rho
    n = g.dim
    worst = 0.0
    eye = np.eye(n)
    for i in range(n):
        ai = ad_matrix(g, eye[i])
        di = cobracket_matrix(g, rho, eye[i])
        for j in range(n):
            aj = ad_matrix(g, eye[j])
            dj = cobracket_matrix(g, rho, eye[j])
            br = np.einsum("ijk->k", g.c[i : i + 1, j : j + 1, :])
            dbr = cobracket_matrix(g, rho, br)
            res = dbr - (ai @ dj + dj @ ai.T) + (aj @ di + di @ aj.T)
            worst = max(worst, float(np.max(np.abs(res))))
    return worst


def dual_algebra(bialgebra: "QuasiBialgebra") -> LieAlgebra:
    """The dual m with bracket dual to the cobracket (opposite twist)."""
    g, rho = bialgebra.g, bialgebra.rho
    n = g.dim
    cm = np.zeros((n, n, n), dtype=complex)
    eye = np.eye(n)
    for k in range(n):
        cm[:, :, k] = -cobracket_matrix(g, rho, eye[k])
    labels = tuple(f"{lab}*" for lab in g.labels)
    return LieAlgebra(cm, labels, name=f"{g.name}*" if g.name else "dual")


@dataclass
class QuasiBialgebra:
    """A Lie algebra with a classical r-matrix of invertible symmetric part."""

    g: LieAlgebra
    rho: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (self.g.dim, self.g.dim):
            raise ValueError("r-matrix has wrong shape")

    @cached_property
    def m(self) -> LieAlgebra:
        return dual_algebra(self)

    @cached_property
    def kinv_matrix(self) -> np.ndarray:
        """Coefficient matrix of 2 r_+ (the inverse of K), as m -> g."""
        return self.rho + self.rho.T

    @cached_property
    def k_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.kinv_matrix)

    @property
    def r2(self) -> LinearOperator:
        return LinearOperator(self.m, self.g, self.rho)

    @property
    def r1(self) -> LinearOperator:
        return LinearOperator(self.m, self.g, self.rho.T)

    @property
    def k(self) -> LinearOperator:
        return LinearOperator(self.g, self.m, self.k_matrix)

    @property
    def k_form(self) -> BilinearForm:
        """K as a bilinear form on g: K(xi, eta) = <K xi, eta>."""
        return BilinearForm(self.g, self.g, self.k_matrix)

    @property
    def kinv_form(self) -> BilinearForm:
        """K^-1 as a bilinear form on m."""
        return BilinearForm(self.m, self.m, self.kinv_matrix)

    def rescaled(self, factor: complex, name: str = "") -> "QuasiBialgebra":
        """Same algebra with r multiplied by a scalar (still a CYBE solution)."""
        return QuasiBialgebra(self.g, self.rho * factor, name or self.name)


@dataclass
class DoubleAlgebra:
    """The double d = g (+) m with its hyperbolic invariant pairing."""

    base: QuasiBialgebra
    algebra: LieAlgebra
    pairing: BilinearForm

    @property
    def n(self) -> int:
        return self.base.g.dim

    def embed_g(self, xi: AlgebraVector) -> AlgebraVector:
        w = np.zeros(2 * self.n, dtype=complex)
        w[: self.n] = xi.coeffs
        return AlgebraVector(self.algebra, w)

    def embed_m(self, phi: AlgebraVector) -> AlgebraVector:
        w = np.zeros(2 * self.n, dtype=complex)
        w[self.n :] = phi.coeffs
        return AlgebraVector(self.algebra, w)

    def project_g(self, w: AlgebraVector) -> AlgebraVector:
        return AlgebraVector(self.base.g, w.coeffs[: self.n])

    def project_m(self, w: AlgebraVector) -> AlgebraVector:
        return AlgebraVector(self.base.m, w.coeffs[self.n :])


def build_double(bialgebra: QuasiBialgebra) -> DoubleAlgebra:
    g, rho = bialgebra.g, bialgebra.rho
    m = bialgebra.m
    n = g.dim
    c = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    c[:n, :n, :n] = g.c
    c[n:, n:, n:] = m.c
    eye = np.eye(n)
    for a in range(n):
        for j in range(n):
            # [f_a, e_j] = f_a |> e_j - f_a <| e_j
            dj = cobracket_matrix(g, rho, eye[j])
            c[n + a, j, :n] = dj[a, :]
            c[n + a, j, n:] = -g.c[:, j, a]
            c[j, n + a, :] = -c[n + a, j, :]
    labels = g.labels + m.labels
    double = LieAlgebra(c, labels, name=f"D({g.name})" if g.name else "double")
    p = np.zeros((2 * n, 2 * n), dtype=complex)
    p[:n, n:] = eye
    p[n:, :n] = eye
    pairing = BilinearForm(double, double, p)
    return DoubleAlgebra(bialgebra, double, pairing)


def pairing_ad_invariance_residual(double: DoubleAlgebra) -> float:
    """Defect of <[w, x], y> + <x, [w, y]> = 0 over basis w."""
    d = double.algebra
    p = double.pairing.matrix
    worst = 0.0
    for i in range(d.dim):
        a = ad_matrix(d, np.eye(d.dim)[i])
        worst = max(worst, float(np.max(np.abs(a.T @ p + p @ a))))
    return worst


def direct_sum_algebra(g: LieAlgebra) -> LieAlgebra:
    """g (+) g with componentwise brackets (left/right chiral copies)."""
    n = g.dim
    c = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    c[:n, :n, :n] = g.c
    c[n:, n:, n:] = g.c
    labels = tuple(f"{lab}_L" for lab in g.labels) + tuple(
        f"{lab}_R" for lab in g.labels
    )
    return LieAlgebra(c, labels, name=f"{g.name}(+){g.name}" if g.name else "sum")


def double_iso_lr(double: DoubleAlgebra) -> tuple[LinearOperator, BilinearForm]:
    """Isomorphism d -> g_L (+) g_R, xi (+) phi -> (xi + r2 phi, xi - r1 phi).

    Returns the operator and the pairing it transports to, which is the
    difference of K-forms on the two chiral factors.
    """
    b = double.base
    n = b.g.dim
    target = direct_sum_algebra(b.g)
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    mat[:n, :n] = np.eye(n)
    mat[:n, n:] = b.rho
    mat[n:, :n] = np.eye(n)
    mat[n:, n:] = -b.rho.T
    op = LinearOperator(double.algebra, target, mat)
    p = np.zeros((2 * n, 2 * n), dtype=complex)
    p[:n, :n] = b.k_matrix
    p[n:, n:] = -b.k_matrix
    form = BilinearForm(target, target, p)
    return op, form


def tensor_conjugate(t: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Apply a (x) a to a two-tensor coefficient matrix."""
    return a @ t @ a.T

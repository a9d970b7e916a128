"""Group-level machinery for the double of a quasitriangular bialgebra.

The connected double group is realized as pairs (k_L, k_R) of 2x2
unimodular matrices through the two chiral homomorphisms of the double
algebra,

    L(xi (+) phi) = xi + r2 phi,      R(xi (+) phi) = xi - r1 phi,

which are injective jointly.  G sits diagonally (k_L = k_R = u) and the
dual group M is generated by exponentials of (r2 phi, -r1 phi).  In this
realization adjoint actions, exponentials, dressing cocycles and the
Poisson cocycles Pi / Pi-hat are all exact linear algebra; no numerical
differentiation is needed (finite differences survive only as oracles in
the test suite).

For su2 the k_L chiral factor of M is upper triangular with positive
diagonal, so the factorization D = G.M is the Iwasawa (QR) decomposition
of k_L.  For sl2r the factorization is local and LU-based; leaving the
factorisable chart raises :class:`FactorizationError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bialgebra import QuasiBialgebra, tensor_conjugate

__all__ = [
    "DoubleElement",
    "GroupKit",
    "FactorizationError",
    "expm2",
    "logm2",
]


class FactorizationError(RuntimeError):
    """Raised when a group factorization leaves its valid chart."""


def expm2(x: np.ndarray) -> np.ndarray:
    """Closed-form exponential of a traceless 2x2 matrix."""
    x = np.asarray(x, dtype=complex)
    theta2 = -np.linalg.det(x)
    theta = np.sqrt(theta2)
    if abs(theta) < 1e-6:
        # series for cosh(theta) and sinh(theta)/theta, accurate to ~1e-38
        c = 1 + theta2 / 2 + theta2**2 / 24 + theta2**3 / 720
        s = 1 + theta2 / 6 + theta2**2 / 120 + theta2**3 / 5040
    else:
        c = np.cosh(theta)
        s = np.sinh(theta) / theta
    return c * np.eye(2) + s * x


def logm2(m: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unimodular 2x2 matrix (traceless result)."""
    m = np.asarray(m, dtype=complex)
    c = np.trace(m) / 2.0
    theta = np.arccosh(complex(c))
    if abs(theta) < 1e-8:
        s = 1.0 + theta**2 / 6
    else:
        s = np.sinh(theta) / theta
    return (m - c * np.eye(2)) / s


@dataclass
class DoubleElement:
    """An element of the double group as a chiral pair of 2x2 matrices."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        self.left = np.asarray(self.left, dtype=complex)
        self.right = np.asarray(self.right, dtype=complex)

    def __matmul__(self, other: "DoubleElement") -> "DoubleElement":
        return DoubleElement(self.left @ other.left, self.right @ other.right)

    def inverse(self) -> "DoubleElement":
        return DoubleElement(_inv2(self.left), _inv2(self.right))

    def det_normalized(self) -> "DoubleElement":
        return DoubleElement(_det_normalize(self.left), _det_normalize(self.right))

    def distance(self, other: "DoubleElement") -> float:
        return float(
            np.linalg.norm(self.left - other.left)
            + np.linalg.norm(self.right - other.right)
        )

    @staticmethod
    def identity() -> "DoubleElement":
        return DoubleElement(np.eye(2, dtype=complex), np.eye(2, dtype=complex))

    @staticmethod
    def from_group(u: np.ndarray) -> "DoubleElement":
        u = np.asarray(u, dtype=complex)
        return DoubleElement(u, u.copy())


def _inv2(m: np.ndarray) -> np.ndarray:
    d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / d


def _det_normalize(m: np.ndarray) -> np.ndarray:
    d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return m / np.sqrt(d)


_SU2_BASIS = np.array(
    [
        [[0.0, -0.5j], [-0.5j, 0.0]],
        [[0.0, -0.5], [0.5, 0.0]],
        [[-0.5j, 0.0], [0.0, 0.5j]],
    ],
    dtype=complex,
)

_SL2R_BASIS = np.array(
    [
        [[1.0, 0.0], [0.0, -1.0]],
        [[0.0, 1.0], [0.0, 0.0]],
        [[0.0, 0.0], [1.0, 0.0]],
    ],
    dtype=complex,
)


class GroupKit:
    """Exact group operations for the double of one bialgebra model."""

    def __init__(self, bialgebra: QuasiBialgebra, cond_cutoff: float = 1e8):
        self.b = bialgebra
        self.cond_cutoff = cond_cutoff
        name = bialgebra.g.name
        if name.startswith("su2"):
            self.flavor = "su2"
            self.basis = _SU2_BASIS
        elif name.startswith("sl2r"):
            self.flavor = "sl2r"
            self.basis = _SL2R_BASIS
        else:
            raise ValueError(f"no matrix realization for algebra '{name}'")
        n = bialgebra.g.dim
        # decomposition of traceless 2x2 matrices in the g-basis
        cols = np.stack(
            [np.array([e[0, 0], e[0, 1], e[1, 0]]) for e in self.basis], axis=1
        )
        self._demat = np.linalg.inv(cols)
        # chiral projection matrices d -> g (L and R) and their joint inverse
        rho = bialgebra.rho
        phi = np.zeros((2 * n, 2 * n), dtype=complex)
        phi[:n, :n] = np.eye(n)
        phi[:n, n:] = rho
        phi[n:, :n] = np.eye(n)
        phi[n:, n:] = -rho.T
        self.chi = phi
        self.chi_inv = np.linalg.inv(phi)

    # ---- algebra <-> matrix ------------------------------------------------

    def mat(self, xi: np.ndarray) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(xi, dtype=complex), self.basis)

    def coeffs(self, m: np.ndarray) -> np.ndarray:
        v = np.array([m[0, 0], m[0, 1], m[1, 0]], dtype=complex)
        return self._demat @ v

    def chiral_mats(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """The pair of 2x2 matrices representing a double-algebra element."""
        z = self.chi @ np.asarray(w, dtype=complex)
        n = self.b.g.dim
        return self.mat(z[:n]), self.mat(z[n:])

    def tangent_coeffs(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`chiral_mats` (a 6-vector of d-coefficients)."""
        z = np.concatenate([self.coeffs(left), self.coeffs(right)])
        return self.chi_inv @ z

    # ---- exponentials ------------------------------------------------------

    def exp_g(self, xi: np.ndarray) -> np.ndarray:
        return expm2(self.mat(xi))

    def exp_m(self, phi: np.ndarray) -> DoubleElement:
        phi = np.asarray(phi, dtype=complex)
        return DoubleElement(
            expm2(self.mat(self.b.rho @ phi)),
            expm2(self.mat(-self.b.rho.T @ phi)),
        )

    def exp_d(self, w: np.ndarray) -> DoubleElement:
        lm, rm = self.chiral_mats(w)
        return DoubleElement(expm2(lm), expm2(rm))

    # ---- adjoint actions ---------------------------------------------------

    def ad_g(self, u: np.ndarray) -> np.ndarray:
        """3x3 matrix of Ad_u on g (and its complexification)."""
        u = np.asarray(u, dtype=complex)
        uinv = _inv2(u)
        cols = [self.coeffs(u @ e @ uinv) for e in self.basis]
        return np.stack(cols, axis=1)

    def ad_d(self, k: DoubleElement) -> np.ndarray:
        """6x6 matrix of Ad_k on the double, exact via the chiral pair."""
        al = self.ad_g(k.left)
        ar = self.ad_g(k.right)
        n = self.b.g.dim
        blk = np.zeros((2 * n, 2 * n), dtype=complex)
        blk[:n, :n] = al
        blk[n:, n:] = ar
        return self.chi_inv @ blk @ self.chi

    def ad_d_group(self, u: np.ndarray) -> np.ndarray:
        return self.ad_d(DoubleElement.from_group(u))

    # ---- Poisson / dressing cocycles ----------------------------------------

    def pi(self, u: np.ndarray) -> np.ndarray:
        """Pi(u) = Ad_u r - r as a g(x)g coefficient matrix (m -> g map)."""
        a = self.ad_g(u)
        return tensor_conjugate(self.b.rho, a) - self.b.rho

    def pi_r(self, u: np.ndarray) -> np.ndarray:
        """Right-handed cocycle Pi^R(u) = Ad_{u^-1} Pi(u) = r - Ad_{u^-1} r."""
        ainv = self.ad_g(_inv2(u))
        return self.b.rho - tensor_conjugate(self.b.rho, ainv)

    def b_cocycle(self, u: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """The dressing derivative of M acting on u, left-translated to g.

        Equals the derivative at e of the G-factor of exp(eps phi) u times
        u^-1; the closed form -Pi(u) phi is verified against Richardson-
        extrapolated finite differences in the tests.
        """
        return -self.pi(u) @ np.asarray(phi, dtype=complex)

    def hat_pi(self, t: DoubleElement) -> np.ndarray:
        """Pi-hat(t) for t in M, as an m(x)m coefficient matrix (g -> m map).

        Built exactly from the double adjoint action: the m-component of
        Ad_{t^-1} on g measures the dressing cocycle, transported back
        with Ad_t.
        """
        n = self.b.g.dim
        adt = self.ad_d(t)
        adtinv = self.ad_d(t.inverse())
        # columns: second-slot evaluation against e_j
        cols = []
        for j in range(n):
            w = np.zeros(2 * n, dtype=complex)
            w[j] = 1.0
            chi = adtinv @ w
            lifted = np.zeros(2 * n, dtype=complex)
            lifted[n:] = chi[n:]
            v = adt @ lifted
            cols.append(v[n:])
        return np.stack(cols, axis=1)

    # ---- factorization -----------------------------------------------------

    def factorize_gm(self, k: DoubleElement) -> tuple[np.ndarray, DoubleElement]:
        """Split k = u s with u in G and s in M.

        Both flavors factor through the triangular decomposition of
        z = k_R^-1 k_L = s_R^-1 s_L: the M factor has an upper-triangular
        left component and a lower-triangular right component with
        reciprocal diagonals, so z is (lower unitriangular)(diag)(upper)
        with diag = (x^2, x^-2).  This construction is holomorphic in the
        chiral components; on the compact real form (k_R = (k_L^+)^-1)
        it coincides with the phase-fixed QR of k_L, but the flows treated
        here are holomorphic and need not stay on the real form, where QR
        would silently return a non-M second factor.
        """
        z = _inv2(k.right) @ k.left
        if abs(z[0, 0]) < 1e-12:
            raise FactorizationError("factorization chart: zero pivot")
        l21 = z[1, 0] / z[0, 0]
        d1 = z[0, 0]
        d2 = z[1, 1] - l21 * z[0, 1]
        if self.flavor == "sl2r" and (d1.real <= 0 or abs(d1.imag) > 1e-8 * abs(d1)):
            raise FactorizationError(
                "sl2r factorization chart: diagonal left identity component"
            )
        if abs(d1 * d2 - 1.0) > 1e-6:
            raise FactorizationError("element left the double group (det drift)")
        # principal branch: positive real on (and continuously near) the
        # locus where d1 is positive real, e.g. the compact real form
        sq1 = np.sqrt(complex(d1))
        s_left = np.array([[sq1, z[0, 1] / sq1], [0.0, 1.0 / sq1]], dtype=complex)
        u = k.left @ _inv2(s_left)
        if np.linalg.cond(s_left) > self.cond_cutoff:
            raise FactorizationError("factorization is numerically singular")
        s_right = _inv2(u) @ k.right
        return u, DoubleElement(s_left, s_right)

    def factorize_mg(self, k: DoubleElement) -> tuple[DoubleElement, np.ndarray]:
        """Split k = t v with t in M and v in G (via k^-1 = v^-1 t^-1)."""
        uprime, sprime = self.factorize_gm(k.inverse())
        return sprime.inverse(), _inv2(uprime)

    def m_part_norm(self, s: DoubleElement) -> float:
        """Distance of a factor from the identity (diagnostic)."""
        return s.distance(DoubleElement.identity())

    # ---- reality / constraint maintenance -----------------------------------

    def project_group(self, u: np.ndarray) -> np.ndarray:
        """Project a matrix back onto the model group (polar + det)."""
        if self.flavor == "su2":
            w, _, vh = np.linalg.svd(u)
            u = w @ vh
        return _det_normalize(u)

    def group_defect(self, u: np.ndarray) -> float:
        d = abs(u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0] - 1.0)
        if self.flavor == "su2":
            d += float(np.linalg.norm(u @ u.conj().T - np.eye(2)))
        else:
            d += float(np.linalg.norm(u.imag))
        return d

    # ---- dual group in vector coordinates (su2 only) ------------------------

    @cached_property
    def dual_scale(self) -> float:
        """The r-rescale factor, read off from the model's rho.

        Vector coordinates are provided for real positive rescalings only
        (the limiting families); other variants use the chiral pair form.
        """
        base = -1.0  # rho[0,0] of the unscaled su2 r-matrix
        c = self.b.rho[0, 0] / base
        if abs(c.imag) > 1e-12 or c.real <= 0:
            raise ValueError("vector coordinates need a real positive r-rescale")
        return float(c.real)

    def su2star_from_vector(self, s: np.ndarray) -> DoubleElement:
        """Vector coordinates (law s.t = s + (1 + c s3) t) to chiral pair."""
        if self.flavor != "su2":
            raise ValueError("vector coordinates exist for the su2 dual only")
        c = self.dual_scale
        s = np.asarray(s, dtype=float)
        x = np.sqrt(1.0 + c * s[2])
        zl = c * (s[0] - 1j * s[1]) / x
        zr = -c * (s[0] + 1j * s[1]) / x
        left = np.array([[x, zl], [0.0, 1.0 / x]], dtype=complex)
        right = np.array([[1.0 / x, 0.0], [zr, x]], dtype=complex)
        return DoubleElement(left, right)

    def su2star_to_vector(self, t: DoubleElement) -> np.ndarray:
        if self.flavor != "su2":
            raise ValueError("vector coordinates exist for the su2 dual only")
        c = self.dual_scale
        x = t.left[0, 0]
        if abs(x.imag) > 1e-9 or x.real <= 0:
            raise FactorizationError("element is not in the dual-group chart")
        z = t.left[0, 1]
        w = z * x / c
        s = np.array([w.real, -w.imag, ((x * x - 1.0) / c).real])
        return s

    def su2star_exp_vector(self, w: np.ndarray) -> np.ndarray:
        """Exponential coordinates to vector coordinates."""
        c = self.dual_scale
        w = np.asarray(w, dtype=float)
        a = c * w[2]
        if abs(a) < 1e-12:
            f = 1.0 + a / 2 + a * a / 6
        else:
            f = (np.exp(a) - 1.0) / a
        return w * f.real

    def su2star_nabla(self, s: np.ndarray, sdot: np.ndarray) -> np.ndarray:
        """Right-translated velocity t_dot t^-1 in vector coordinates."""
        c = self.dual_scale
        n3 = sdot[2] / (1.0 + c * s[2])
        return sdot - (c * n3) * s

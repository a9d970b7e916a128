"""Orthogonal splittings of the double and moving graph coordinates.

The two-parameter family of splittings is generated by

    E_e^-1 = (lam + 1) r1 + mu K^-1        (m -> g),
    T_e^-1 = -(lam + 1) r2 - mu K^-1       (m -> g),

whose graphs E_plus = {E_e^-1 phi (+) phi} and E_minus = {T_e^-1 phi (+)
phi} are complementary, mutually orthogonal subspaces of the double
whenever lam + 1 + 2 mu is away from zero.  The diagonal pairings are
+-(lam + 1 + 2 mu) K^-1 and the splitting is Ad_G-invariant iff lam = 0.

Moving graph coordinates slice the transported subspaces Ad_{u^-1} E_+-
as graphs over m; three independent routes to E_u^-1 (exact subspace
transport, the invariant-split closed form, and the cocycle form) agree
to machine precision and are kept separate deliberately.  The dual model
slices the same subspaces as graphs over g along the dual group, with
bar-form Ebar-hat_t^-1 = E_e + Pi-hat(t).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bialgebra import tensor_conjugate
from .groups import DoubleElement, GroupKit
from .models import ModelPreset

__all__ = [
    "SplittingError",
    "GraphBlowupError",
    "SplittingData",
    "GraphCoordinate",
    "DualGraphCoordinate",
    "splitting",
    "graph_at",
    "dual_graph_at",
    "lagrangian",
    "su2_trace_lagrangian",
    "dual_lagrangian",
    "su2_dual_vector_lagrangian",
    "su2_pi_vector",
    "su2_e_inv_closed",
    "su2_e_closed",
    "su2_dual_pi_vector",
    "su2_dual_e_inv_closed",
    "su2_dual_e_closed",
]


class SplittingError(ValueError):
    """The (lam, mu) parameters do not define a factorisable splitting."""


class GraphBlowupError(RuntimeError):
    """A moving graph coordinate left its invertible chart."""


@dataclass
class SplittingData:
    """Splitting operators, subspace bases and projectors for one preset."""

    preset: ModelPreset
    e_inv: np.ndarray  # E_e^-1 as m -> g matrix
    t_inv: np.ndarray  # T_e^-1 as m -> g matrix
    basis_plus: np.ndarray  # 2n x n, columns span E_+
    basis_minus: np.ndarray
    pi_plus: np.ndarray  # 2n x 2n projector onto E_+ along E_-
    pi_minus: np.ndarray
    pairing: np.ndarray  # 2n x 2n hyperbolic pairing matrix

    @property
    def pi_diff(self) -> np.ndarray:
        return self.pi_plus - self.pi_minus

    @cached_property
    def e_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.e_inv)

    @cached_property
    def t_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.t_inv)

    def orthogonality_defect(self) -> float:
        return float(
            np.max(np.abs(self.basis_plus.T @ self.pairing @ self.basis_minus))
        )

    def diagonal_pairing_defects(self) -> tuple[float, float]:
        """Deviation of the E_+- diagonal pairings from +-(lam+1+2mu) K^-1."""
        b = self.preset.bialgebra
        expected = self.preset.split_denominator * b.kinv_matrix
        dp = self.basis_plus.T @ self.pairing @ self.basis_plus - expected
        dm = self.basis_minus.T @ self.pairing @ self.basis_minus + expected
        return float(np.max(np.abs(dp))), float(np.max(np.abs(dm)))

    def projector_defects(self) -> float:
        n2 = self.pi_plus.shape[0]
        eye = np.eye(n2)
        worst = float(np.max(np.abs(self.pi_plus + self.pi_minus - eye)))
        worst = max(worst, float(np.max(np.abs(self.pi_plus @ self.pi_plus - self.pi_plus))))
        worst = max(worst, float(np.max(np.abs(self.pi_minus @ self.pi_minus - self.pi_minus))))
        worst = max(worst, float(np.max(np.abs(self.pi_plus @ self.pi_minus))))
        return worst


def splitting(preset: ModelPreset, cond_cutoff: float = 1e8) -> SplittingData:
    b = preset.bialgebra
    rho = b.rho
    kinv = b.kinv_matrix
    lam, mu = preset.lam, preset.mu
    if not preset.is_factorisable():
        raise SplittingError(
            f"lam + 1 + 2 mu = {preset.split_denominator:.3e} is degenerate; "
            "the splitting subspaces lose rank"
        )
    e_inv = (lam + 1.0) * rho.T + mu * kinv
    t_inv = -(lam + 1.0) * rho - mu * kinv
    n = b.g.dim
    eye = np.eye(n)
    basis_plus = np.vstack([e_inv, eye])
    basis_minus = np.vstack([t_inv, eye])
    joint = np.hstack([basis_plus, basis_minus])
    if np.linalg.cond(joint) > cond_cutoff:
        raise SplittingError("splitting subspaces are numerically degenerate")
    joint_inv = np.linalg.inv(joint)
    pi_plus = basis_plus @ joint_inv[:n]
    pi_minus = basis_minus @ joint_inv[n:]
    p = np.zeros((2 * n, 2 * n), dtype=complex)
    p[:n, n:] = eye
    p[n:, :n] = eye
    return SplittingData(
        preset, e_inv, t_inv, basis_plus, basis_minus, pi_plus, pi_minus, p
    )


@dataclass
class GraphCoordinate:
    """Moving graph data of the sigma-model at a group point u."""

    e_inv: np.ndarray  # E_u^-1 : m -> g
    t_inv: np.ndarray  # T_u^-1 : m -> g
    pi_diff: np.ndarray  # Ad_{u^-1} (pi_+ - pi_-) Ad_u, 2n x 2n
    cond_e: float
    cond_t: float

    def e_matrix(self, cond_cutoff: float = 1e8) -> np.ndarray:
        if self.cond_e > cond_cutoff:
            raise GraphBlowupError(
                f"E_u^-1 condition number {self.cond_e:.3e} exceeds cutoff"
            )
        return np.linalg.inv(self.e_inv)

    def t_matrix(self, cond_cutoff: float = 1e8) -> np.ndarray:
        if self.cond_t > cond_cutoff:
            raise GraphBlowupError(
                f"T_u^-1 condition number {self.cond_t:.3e} exceeds cutoff"
            )
        return np.linalg.inv(self.t_inv)


def _slice_over_m(transported: np.ndarray, n: int) -> np.ndarray:
    return transported[:n] @ np.linalg.inv(transported[n:])


def graph_at(
    kit: GroupKit,
    split: SplittingData,
    u: np.ndarray,
    route: str = "transport",
) -> GraphCoordinate:
    """Graph coordinates of Ad_{u^-1} E_+- over m, by the selected route.

    Routes (all equal; kept independent as cross-checks):

    * ``transport``: exact slice of the transported subspace bases.
    * ``invariant-split``: Ad_{u^-1}(X_e - r1) + r1, using that the
      Ad-invariant part conjugates trivially.
    * ``cocycle``: Ad_{u^-1}(X_e) + Pi(u^-1) with the r2 dressing cocycle
      Pi(v) = Ad_v rho Ad_v^T - rho (equal to r1 - Ad_v r1 Ad_v^T by the
      Ad-invariance of the symmetric part).
    """
    n = split.preset.bialgebra.g.dim
    uinv = np.linalg.inv(u)
    if route == "transport":
        ad = kit.ad_d(DoubleElement.from_group(uinv))
        e_inv = _slice_over_m(ad @ split.basis_plus, n)
        t_inv = _slice_over_m(ad @ split.basis_minus, n)
    elif route in ("invariant-split", "cocycle"):
        a = kit.ad_g(uinv)
        r1 = split.preset.bialgebra.rho.T
        if route == "invariant-split":
            e_inv = tensor_conjugate(split.e_inv - r1, a) + r1
            t_inv = tensor_conjugate(split.t_inv - r1, a) + r1
        else:
            rho = split.preset.bialgebra.rho
            pi2 = tensor_conjugate(rho, a) - rho  # r2 cocycle at u^-1
            e_inv = tensor_conjugate(split.e_inv, a) + pi2
            t_inv = tensor_conjugate(split.t_inv, a) + pi2
    else:
        raise ValueError(f"unknown graph route '{route}'")
    ad_uinv = kit.ad_d(DoubleElement.from_group(uinv))
    ad_u = kit.ad_d(DoubleElement.from_group(u))
    pi_diff = ad_uinv @ split.pi_diff @ ad_u
    return GraphCoordinate(
        e_inv,
        t_inv,
        pi_diff,
        float(np.linalg.cond(e_inv)),
        float(np.linalg.cond(t_inv)),
    )


@dataclass
class DualGraphCoordinate:
    """Graph data of the dual model at a dual-group point t."""

    e_inv: np.ndarray  # Ehat_t^-1 : g -> m (transported slice)
    e_inv_bar: np.ndarray  # Ebar-hat_t^-1 = E_e + Pi-hat(t) : g -> m
    t_inv: np.ndarray
    t_inv_bar: np.ndarray
    pi_diff: np.ndarray
    cond_e: float

    def e_bar_matrix(self, cond_cutoff: float = 1e8) -> np.ndarray:
        if np.linalg.cond(self.e_inv_bar) > cond_cutoff:
            raise GraphBlowupError("dual graph coordinate left its chart")
        return np.linalg.inv(self.e_inv_bar)


def dual_graph_at(
    kit: GroupKit, split: SplittingData, t: DoubleElement
) -> DualGraphCoordinate:
    n = split.preset.bialgebra.g.dim
    e_mat = split.e_matrix  # g -> m
    t_mat = split.t_matrix
    tinv = t.inverse()
    ad = kit.ad_d(tinv)
    bp = np.vstack([np.eye(n), e_mat])
    bm = np.vstack([np.eye(n), t_mat])
    tp = ad @ bp
    tm = ad @ bm
    e_inv = tp[n:] @ np.linalg.inv(tp[:n])
    t_inv = tm[n:] @ np.linalg.inv(tm[:n])
    hp = kit.hat_pi(t)
    e_inv_bar = e_mat + hp
    t_inv_bar = t_mat + hp
    ad_t = kit.ad_d(t)
    pi_diff = ad @ split.pi_diff @ ad_t
    return DualGraphCoordinate(
        e_inv, e_inv_bar, t_inv, t_inv_bar, pi_diff, float(np.linalg.cond(e_inv_bar))
    )


def lagrangian(
    kit: GroupKit,
    split: SplittingData,
    u: np.ndarray,
    xi_plus: np.ndarray,
    xi_minus: np.ndarray,
    route: str = "transport",
) -> complex:
    """Sigma-model Lagrangian density < E_u(u^-1 u_+), u^-1 u_- >.

    ``xi_plus`` and ``xi_minus`` are the left-translated lightcone
    derivatives of the path as g coefficient vectors.
    """
    g = graph_at(kit, split, u, route=route)
    e = g.e_matrix()
    return complex(np.asarray(xi_minus, dtype=complex) @ (e @ np.asarray(xi_plus, dtype=complex)))


def su2_trace_lagrangian(u: np.ndarray, w_plus: np.ndarray, w_minus: np.ndarray) -> complex:
    """su2 modified-principal Lagrangian in 2x2 trace form.

    ``w_plus`` / ``w_minus`` are the matrices of the left-translated
    lightcone derivatives u^-1 u_+- in the defining representation.
    L = (Tr[(1 - ps) w_+ w_-] - 1/2 Tr[ps w_+] Tr[ps w_-]) / |a|^2 with
    ps = [[0, b], [conj(b), 0]] u for u = [[a, b], [-conj(b), conj(a)]].
    """
    a, b = u[0, 0], u[0, 1]
    ps = np.array([[0.0, b], [np.conj(b), 0.0]], dtype=complex) @ u
    eye = np.eye(2)
    val = np.trace((eye - ps) @ w_plus @ w_minus)
    val -= 0.5 * np.trace(ps @ w_plus) * np.trace(ps @ w_minus)
    return complex(val / abs(a) ** 2)


def dual_lagrangian(
    kit: GroupKit,
    split: SplittingData,
    t: DoubleElement,
    phi_plus: np.ndarray,
    phi_minus: np.ndarray,
) -> complex:
    """Dual sigma-model Lagrangian < (E_e + Pi-hat(t))^-1 (t_+ t^-1), t_- t^-1 >.

    ``phi_plus`` / ``phi_minus`` are the right-translated lightcone
    derivatives of the dual path as m coefficient vectors.
    """
    dg = dual_graph_at(kit, split, t)
    e_bar = dg.e_bar_matrix()
    return complex(
        np.asarray(phi_plus, dtype=complex) @ (e_bar @ np.asarray(phi_minus, dtype=complex))
    )


def su2_dual_vector_lagrangian(
    t_vec: np.ndarray, grad_plus: np.ndarray, grad_minus: np.ndarray
) -> complex:
    """Dual modified-principal Lagrangian in explicit vector form.

    L-hat = 2/(1 - pi-hat^2) (g_+ . g_- - i pi-hat . (g_+ x g_-)
    - (pi-hat . g_+)(pi-hat . g_-)) with g_+- the right-translated
    lightcone derivatives as real 3-vectors.
    """
    ph = su2_dual_pi_vector(t_vec)
    gp = np.asarray(grad_plus, dtype=complex)
    gm = np.asarray(grad_minus, dtype=complex)
    denom = 1.0 - float(ph @ ph)
    return complex(
        2.0 / denom * (gp @ gm - 1j * ph @ np.cross(gp, gm) - (ph @ gp) * (ph @ gm))
    )


# ---- su2 closed forms -------------------------------------------------------

_EPS = np.zeros((3, 3, 3))
for _i in range(3):
    for _j in range(3):
        for _k in range(3):
            _EPS[_i, _j, _k] = (_i - _j) * (_j - _k) * (_k - _i) / 2.0


def su2_pi_vector(u: np.ndarray) -> np.ndarray:
    """pi = (Re(a conj(b)), Im(a conj(b)), -|b|^2) for u = [[a, b], [-b*, a*]]."""
    a, b = u[0, 0], u[0, 1]
    ab = a * np.conj(b)
    return np.array([ab.real, ab.imag, -abs(b) ** 2])


def su2_e_inv_closed(u: np.ndarray) -> np.ndarray:
    """Closed-form E_u^-1 for the su2 modified-principal splitting.

    Operator convention: columns act on dual coefficients, which is the
    transpose of the row-evaluated display -2(delta_ij + i eps_ijk pi_k).
    """
    pi = su2_pi_vector(u)
    return (-2.0 * (np.eye(3) + 1j * np.einsum("ijk,k->ij", _EPS, pi))).T


def su2_e_closed(u: np.ndarray) -> np.ndarray:
    """Closed-form inverse E_u (m -> g reversed) of :func:`su2_e_inv_closed`."""
    pi = su2_pi_vector(u)
    pi2 = float(pi @ pi)
    m = (
        np.eye(3)
        - 1j * np.einsum("ijk,k->ij", _EPS, pi)
        - np.outer(pi, pi)
    ) / (-2.0 * (1.0 - pi2))
    return m.T


def su2_dual_pi_vector(t_vec: np.ndarray) -> np.ndarray:
    """pi-hat = 2 t + (0, 0, t.t) in dual vector coordinates."""
    return 2.0 * np.asarray(t_vec, dtype=float) + np.array(
        [0.0, 0.0, float(t_vec @ t_vec)]
    )


def su2_dual_e_inv_closed(t_vec: np.ndarray) -> np.ndarray:
    """Closed-form Ebar-hat_t^-1 = -1/2 (delta + i eps pi-hat) (g -> m)."""
    ph = su2_dual_pi_vector(t_vec)
    return -0.5 * (np.eye(3) + 1j * np.einsum("ijk,k->ij", _EPS, ph))


def su2_dual_e_closed(t_vec: np.ndarray) -> np.ndarray:
    ph = su2_dual_pi_vector(t_vec)
    ph2 = float(ph @ ph)
    return (
        np.eye(3) - 1j * np.einsum("ijk,k->ij", _EPS, ph) - np.outer(ph, ph)
    ) * (-2.0 / (1.0 - ph2))

"""Generalized Pauli operator bases and Bloch-space machinery.

A GPO set for dimension d is a collection of d^2-1 traceless Hermitian
matrices with Tr[s_i s_j] = 2 delta_ij.  Together with the identity they span
the Hermitian operators, giving every state/observable a real coefficient
("Bloch") vector, and every unitary U an orthogonal image O_U acting on that
vector.  Basis ordering: x-type pairs (j<j' lexicographic), then y-type pairs,
then diagonal z-type by k ascending; for d=2 this is exactly (sigma_x,
sigma_y, sigma_z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qmat import hermitize, tensor_product

__all__ = [
    "GpoBasis",
    "BlochDecomposition",
    "gpo_basis",
    "bloch_vector",
    "orthogonal_image",
    "decompose",
    "reconstruct_local",
    "reconstruct_state",
    "reconstruct_interaction",
    "psd_ball_radius",
    "state_from_bloch",
]


@dataclass(frozen=True)
class GpoBasis:
    """Ordered GPO set for one tensor factor."""

    dim: int
    elements: np.ndarray = field(repr=False)  # shape (d^2-1, d, d)

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


_BASIS_CACHE: dict[int, GpoBasis] = {}


def gpo_basis(d: int) -> GpoBasis:
    """Build the GPO basis for dimension d >= 2.

    x-type: |j><j'| + |j'><j|, y-type: i(|j'><j| - |j><j'|) for j < j',
    z-type: sqrt(2/((k+1)(k+2))) (sum_{j<=k} |j><j| - (k+1)|k+1><k+1|).
    The z-type normalisation is fixed by the orthonormality requirement
    Tr[s_i s_j] = 2 delta_ij.
    """
    d = int(d)
    if d < 2:
        raise ValueError("GPO basis requires dimension >= 2")
    cached = _BASIS_CACHE.get(d)
    if cached is not None:
        return cached
    mats = []
    for j in range(d):
        for jp in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[j, jp] = 1.0
            m[jp, j] = 1.0
            mats.append(m)
    for j in range(d):
        for jp in range(j + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[jp, j] = 1.0j
            m[j, jp] = -1.0j
            mats.append(m)
    for k in range(d - 1):
        m = np.zeros((d, d), dtype=np.complex128)
        coeff = np.sqrt(2.0 / ((k + 1) * (k + 2)))
        for j in range(k + 1):
            m[j, j] = coeff
        m[k + 1, k + 1] = -coeff * (k + 1)
        mats.append(m)
    basis = GpoBasis(d, np.ascontiguousarray(np.array(mats)))
    _BASIS_CACHE[d] = basis
    return basis


def bloch_vector(op, basis: GpoBasis) -> np.ndarray:
    """Coefficients Tr[s_i op]; real for Hermitian input (imag <= 1e-10)."""
    op = np.asarray(op, dtype=np.complex128)
    coeffs = np.einsum("kab,ba->k", basis.elements, op)
    if np.max(np.abs(coeffs.imag)) > 1e-10 * max(1.0, float(np.max(np.abs(coeffs)))):
        raise ValueError("coefficients have a non-negligible imaginary part")
    return np.ascontiguousarray(coeffs.real)


def orthogonal_image(u, basis: GpoBasis, tol: float = 1e-10) -> np.ndarray:
    """Orthogonal matrix (O_U)_ij = Tr[s_i U s_j U†]/2 on Bloch space.

    Satisfies r(U rho U†) = O_U r(rho) and O_{UV} = O_U O_V.  For d=2 the
    image is all of SO(3); for d >= 3 it is a proper subgroup of SO(d^2-1).
    """
    u = np.asarray(u, dtype=np.complex128)
    d = basis.dim
    if u.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} unitary")
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > tol:
        raise ValueError("input is not unitary within tolerance")
    rotated = np.einsum("ab,kbc,dc->kad", u, basis.elements, u.conj())
    o = np.einsum("iab,kba->ik", basis.elements, rotated).real / 2.0
    return np.ascontiguousarray(o)


def psd_ball_radius(d: int) -> float:
    """Radius of the Bloch ball guaranteed to map onto physical states.

    Any r with |r| <= sqrt(2/(d(d-1))) reconstructs to a positive
    semidefinite rho = I/d + (1/2) sum_i r_i s_i; the bound is tight (the
    extremal direction is the last z-type element).
    """
    return float(np.sqrt(2.0 / (d * (d - 1))))


def state_from_bloch(r, basis: GpoBasis) -> np.ndarray:
    d = basis.dim
    return np.eye(d, dtype=np.complex128) / d + 0.5 * np.einsum(
        "k,kab->ab", np.asarray(r, dtype=float), basis.elements
    )


# ---------------------------------------------------------------------------
# joint decomposition of a bipartite system


@dataclass(frozen=True)
class BlochDecomposition:
    """GPO coefficients of (rho_SE, H_S, V_SE).

    r_i = Tr[s^i rho_S], q_j = Tr[s^j rho_E],
    t_ij = Tr[rho_SE (s^i x s^j)], h_i = Tr[s^i H_S]/2, c = Tr[H_S]/d_S,
    v_ij = Tr[V_SE (s^i x s^j)]/4.
    """

    d_s: int
    d_e: int
    r: np.ndarray
    q: np.ndarray
    t: np.ndarray
    h: np.ndarray
    c: float
    v: np.ndarray


def _real_part(x: np.ndarray, what: str) -> np.ndarray:
    if np.max(np.abs(x.imag)) > 1e-10 * max(1.0, float(np.max(np.abs(x)))):
        raise ValueError(f"{what} coefficients are not real")
    return np.ascontiguousarray(x.real)


def decompose(system, basis_s: GpoBasis | None = None, basis_e: GpoBasis | None = None) -> BlochDecomposition:
    """Expand a BipartiteSystem in the product GPO basis."""
    bs = basis_s or gpo_basis(system.d_s)
    be = basis_e or gpo_basis(system.d_e)
    d_s, d_e = system.d_s, system.d_e
    r = bloch_vector(system.rho_s(), bs)
    q = bloch_vector(system.rho_e(), be)
    rho4 = system.rho.reshape(d_s, d_e, d_s, d_e)
    t_half = np.einsum("iba,aebf->ief", bs.elements, rho4)
    t = _real_part(np.einsum("ief,jfe->ij", t_half, be.elements), "correlation")
    h = _real_part(np.einsum("kab,ba->k", bs.elements, system.h_s) / 2.0, "h")
    c = float(np.trace(system.h_s).real) / d_s
    v4 = system.v.reshape(d_s, d_e, d_s, d_e)
    v_half = np.einsum("iba,aebf->ief", bs.elements, v4)
    v = _real_part(np.einsum("ief,jfe->ij", v_half, be.elements) / 4.0, "coupling")
    return BlochDecomposition(d_s, d_e, r, q, t, h, float(c), v)


def reconstruct_local(dec: BlochDecomposition, basis_s: GpoBasis | None = None) -> np.ndarray:
    """H_S = c I + sum_i h_i s^i."""
    bs = basis_s or gpo_basis(dec.d_s)
    return dec.c * np.eye(dec.d_s, dtype=np.complex128) + np.einsum(
        "k,kab->ab", dec.h, bs.elements
    )


def reconstruct_state(
    dec: BlochDecomposition,
    basis_s: GpoBasis | None = None,
    basis_e: GpoBasis | None = None,
) -> np.ndarray:
    """rho_SE from (r, q, t).

    rho = I/(d_S d_E) + (1/(2 d_E)) sum r_i s^i x I + (1/(2 d_S)) sum q_j I x s^j
          + (1/4) sum t_ij s^i x s^j.
    """
    bs = basis_s or gpo_basis(dec.d_s)
    be = basis_e or gpo_basis(dec.d_e)
    d_s, d_e = dec.d_s, dec.d_e
    ident_e = np.eye(d_e, dtype=np.complex128)
    ident_s = np.eye(d_s, dtype=np.complex128)
    rho = np.eye(d_s * d_e, dtype=np.complex128) / (d_s * d_e)
    rho += tensor_product(np.einsum("k,kab->ab", dec.r, bs.elements), ident_e) / (2.0 * d_e)
    rho += tensor_product(ident_s, np.einsum("k,kab->ab", dec.q, be.elements)) / (2.0 * d_s)
    corr = np.einsum("ij,iab,jcd->acbd", dec.t, bs.elements, be.elements)
    rho += corr.reshape(d_s * d_e, d_s * d_e) / 4.0
    return hermitize(rho)


def reconstruct_interaction(
    dec: BlochDecomposition,
    basis_s: GpoBasis | None = None,
    basis_e: GpoBasis | None = None,
) -> np.ndarray:
    """V_SE = sum_ij v_ij s^i x s^j (valid when V has no identity components)."""
    bs = basis_s or gpo_basis(dec.d_s)
    be = basis_e or gpo_basis(dec.d_e)
    v = np.einsum("ij,iab,jcd->acbd", dec.v, bs.elements, be.elements)
    return hermitize(v.reshape(dec.d_s * dec.d_e, dec.d_s * dec.d_e))

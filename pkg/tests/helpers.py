"""Shared builders and independent oracles for the test suite.

The brute-force routines here deliberately avoid the package's own
optimizers: scipy BFGS over a 4-parameter (or d^2-parameter) Hermitian
generator chart provides an independent maximization of the extraction
functional, and itertools supplies exhaustive permutation minima.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import minimize

from ergoloc import gpo, qmat

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def random_coupling(d_s, d_e, rng, scale=1.0):
    """Coupling with zero partial trace on both sides (pure sigma x sigma)."""
    bs, be = gpo.gpo_basis(d_s), gpo.gpo_basis(d_e)
    coeff = rng.normal(size=(len(bs), len(be))) * scale / np.sqrt(len(bs) * len(be))
    v = np.einsum("ij,iab,jcd->acbd", coeff, bs.elements, be.elements)
    return v.reshape(d_s * d_e, d_s * d_e)


def random_system(d_s, d_e, rng, v_scale=1.0, h_scale=1.0, rank=None):
    return qmat.BipartiteSystem.build(
        d_s,
        d_e,
        qmat.random_density(d_s * d_e, rng, rank=rank),
        qmat.random_hermitian(d_s, rng, scale=h_scale),
        qmat.random_hermitian(d_e, rng, scale=h_scale),
        random_coupling(d_s, d_e, rng, scale=v_scale),
    )


def direct_objective(system, u):
    w = np.kron(u, np.eye(system.d_e))
    h = system.total_hamiltonian()
    return float(np.trace(h @ (system.rho - w @ system.rho @ w.conj().T)).real)


def _unitary_from_params(params, d):
    gen = np.zeros((d, d), dtype=complex)
    idx = 0
    for i in range(d):
        gen[i, i] = params[idx]
        idx += 1
    for i in range(d):
        for j in range(i + 1, d):
            gen[i, j] = params[idx] + 1j * params[idx + 1]
            gen[j, i] = params[idx] - 1j * params[idx + 1]
            idx += 2
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(1j * w)) @ v.conj().T


def brute_local_max(system, tries=30, seed=0):
    """Independent maximization of the local extraction functional."""
    d = system.d_s
    n_params = d * d
    best = 0.0  # identity is always feasible
    for t in range(tries):
        rng = np.random.default_rng(seed * 1000 + t)
        x0 = rng.normal(size=n_params)

        def neg(p):
            return -direct_objective(system, _unitary_from_params(p, d))

        res = minimize(neg, x0, method="BFGS", options={"gtol": 1e-12, "maxiter": 400})
        best = max(best, -res.fun)
    return best


def brute_assignment_min(cost):
    """Exhaustive assignment minimum; feasible up to 8x8."""
    n = cost.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(cost[i, perm[i]] for i in range(n))
        best = min(best, total)
    return best


def max_entangled_two_level(d, rng, gap=None, shift=None):
    """(h_s, v, k) with k = h_s x I + v having levels {shift-gap, shift}.

    Built from a rank-one projector onto a maximally entangled vector so the
    S-partial trace of k is proportional to the identity, which is exactly
    the condition for a zero-S-trace splitting to exist.
    """
    gap = float(rng.uniform(0.5, 2.0)) if gap is None else gap
    shift = float(rng.uniform(-1.0, 1.0)) if shift is None else shift
    ua, ub = qmat.haar_unitary(d, rng), qmat.haar_unitary(d, rng)
    omega = np.zeros(d * d, dtype=complex)
    omega[:: d + 1] = 1.0 / np.sqrt(d)
    chi = np.kron(ua, ub) @ omega
    k = -gap * np.outer(chi, chi.conj()) + shift * np.eye(d * d)
    h_s = qmat.partial_trace(k, d, d, side="E") / d
    v = k - np.kron(h_s, np.eye(d))
    return qmat.hermitize(h_s), qmat.hermitize(v), qmat.hermitize(k)

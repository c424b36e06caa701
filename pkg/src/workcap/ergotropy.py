"""Ergotropy, passive states and total ergotropy of finite-dimensional states.

The passive counterpart of a state assigns its eigenvalues, largest first, to
the Hamiltonian levels, lowest first.  The completely passive counterpart is
the Gibbs state carrying the same von Neumann entropy; the gap between the
mean energy and that Gibbs energy is the total ergotropy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TargetOutOfRange
from .qops import Hamiltonian, density_matrix, eig_hermitian

ENTROPY_FLOOR = 1e-14
ENTROPY_TOL = 1e-10
BETA_SPAN = 1e6


@dataclass(frozen=True)
class PassiveDecomposition:
    passive_state: np.ndarray
    passive_energy: float
    ergotropy: float


@dataclass(frozen=True)
class GibbsState:
    beta: float
    state: np.ndarray
    energy: float
    entropy: float


def _check_dims(rho: np.ndarray, h: Hamiltonian) -> None:
    if rho.shape != (h.dim, h.dim):
        raise DimensionMismatch(f"state of shape {rho.shape} vs Hamiltonian of dim {h.dim}")


def mean_energy(rho, h: Hamiltonian) -> float:
    """``Tr[rho h]``."""
    rho = np.asarray(rho, dtype=complex)
    _check_dims(rho, h)
    return float(np.real(np.sum(rho * h.op.T)))


def passive_energy_from_spectrum(probs, energies) -> float:
    """Energy of the passive arrangement of ``probs`` over ``energies``."""
    p = np.sort(np.asarray(probs, dtype=float))[::-1]
    e = np.sort(np.asarray(energies, dtype=float))
    return float(np.dot(p, e))


def _in_energy_basis(h: Hamiltonian, weights: np.ndarray) -> np.ndarray:
    """``sum_k weights[k] |E_k><E_k|`` as a matrix in the original basis."""
    if h.is_diagonal:
        # the eigenbasis is a permutation of the standard basis
        out = np.zeros((h.dim, h.dim), dtype=complex)
        idx = np.argmax(np.abs(h.basis), axis=0)
        out[idx, idx] = weights
        return out
    return (h.basis * weights) @ h.basis.conj().T


def passive_decompose(rho, h: Hamiltonian) -> PassiveDecomposition:
    rho = density_matrix(rho)
    _check_dims(rho, h)
    lam = eig_hermitian(rho).eigenvalues[::-1]
    passive = _in_energy_basis(h, lam)
    e_pass = float(np.dot(lam, h.energies))
    e_mean = mean_energy(rho, h)
    # round-off can leave the difference at -1e-16 for passive inputs
    erg = max(0.0, e_mean - e_pass)
    return PassiveDecomposition(passive, e_pass, erg)


def ergotropy(rho, h: Hamiltonian) -> float:
    return passive_decompose(rho, h).ergotropy


def entropy_from_probs(probs) -> float:
    return -math.fsum(p * math.log(p) for p in np.asarray(probs, dtype=float).tolist()
                      if p > ENTROPY_FLOOR)


def von_neumann_entropy(rho) -> float:
    """``-Tr[rho ln rho]`` in nats."""
    rho = density_matrix(rho)
    return entropy_from_probs(eig_hermitian(rho).eigenvalues)


def _gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    if math.isinf(beta):
        w = (energies <= _ground_tol(energies)).astype(float)
    else:
        w = np.exp(-beta * energies)
    return w / w.sum()


def _ground_tol(energies: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(energies[-1]))


def _gibbs_moments(levels: list, beta: float) -> tuple[float, float, float]:
    """Entropy, mean energy and energy variance at finite ``beta``."""
    # all terms are positive, so plain summation loses nothing
    w = [math.exp(-beta * e) for e in levels]
    we = [wi * e for wi, e in zip(w, levels)]
    z = sum(w)
    m1 = sum(we) / z
    m2 = sum(x * e for x, e in zip(we, levels)) / z
    return math.log(z) + beta * m1, m1, max(0.0, m2 - m1 * m1)


def gibbs_entropy_energy(energies, beta: float) -> tuple[float, float]:
    """Entropy and mean energy of the Gibbs distribution at inverse temperature ``beta``.

    ``energies`` must be sorted ascending with ground energy zero, which keeps
    the partition function at least one and the log stable for large ``beta``.
    """
    energies = np.asarray(energies, dtype=float)
    if math.isinf(beta):
        g = int(np.count_nonzero(energies <= _ground_tol(energies)))
        return math.log(g), 0.0
    s, e, _ = _gibbs_moments(energies.tolist(), beta)
    return s, e


class EntropyMatcher:
    """Inverts the Gibbs entropy ``S(beta)`` for one fixed spectrum.

    The spectrum (ascending, ground energy zero) is preprocessed once so
    repeated solves inside an optimiser stay cheap.
    """

    def __init__(self, energies):
        energies = np.asarray(energies, dtype=float)
        self.levels = energies.tolist()
        self.s_max = math.log(len(energies))
        positive = energies[energies > _ground_tol(energies)]
        self.gap = float(positive[0]) if positive.size else 0.0
        self.s_inf = math.log(len(energies) - positive.size)
        self._last = None
        self._last_energy = (math.nan, math.nan)

    def beta(self, target: float) -> float:
        """Inverse temperature whose Gibbs entropy equals ``target``.

        Returns ``0`` at the maximal entropy and ``inf`` when the target is
        at or below the ground-space entropy.  The upper bracket is doubled
        from the inverse smallest gap until the entropy falls below the
        target; beyond ``1e6`` over that gap the state is indistinguishable
        from the ground projector.  Inside the bracket a Newton step is taken
        whenever it stays in the bracket, bisection otherwise.
        """
        if target < -ENTROPY_TOL or target > self.s_max + ENTROPY_TOL:
            raise TargetOutOfRange(
                f"target entropy {target!r} outside [0, {self.s_max!r}]"
            )
        if self.gap == 0.0 or target >= self.s_max - 1e-15:
            return 0.0
        if target <= self.s_inf + 1e-15:
            return math.inf
        levels, gap = self.levels, self.gap
        lo, hi = 0.0, 1.0 / gap
        if self._last is not None:
            # reuse the previous root as the first bracket end
            hi = self._last
        near = None
        while True:
            s_hi, m_hi, var_hi = _gibbs_moments(levels, hi)
            if s_hi <= target:
                break
            near = (hi, s_hi, m_hi, var_hi)
            # overshoot the Newton estimate a little, double if it is useless
            slope = -hi * var_hi
            guess = hi - 1.5 * (s_hi - target) / slope if slope < 0.0 else math.inf
            lo, hi = hi, guess if hi < guess < 2.0 * hi else 2.0 * hi
            if hi * gap > BETA_SPAN:
                return math.inf
        beta, s, m, var = hi, s_hi, m_hi, var_hi
        # Newton from whichever bracket end is closer in entropy
        if near is not None and near[1] - target < target - s_hi:
            beta, s, m, var = near
        for _ in range(200):
            f = s - target
            if f == 0.0:
                break
            if f > 0.0:
                lo = beta
            else:
                hi = beta
            slope = -beta * var
            step = beta - f / slope if slope < 0.0 else math.nan
            if not lo < step < hi:
                step = 0.5 * (lo + hi)
            if abs(step - beta) <= 2e-16 * max(1.0, beta) or hi - lo <= 4e-16 * hi:
                beta = step
                break
            beta = step
            s, m, var = _gibbs_moments(levels, beta)
        self._last = beta
        self._last_energy = (beta, m)
        return beta

    def energy(self, target: float) -> float:
        """Energy of the completely passive state with entropy ``target``."""
        target = min(max(target, 0.0), self.s_max)
        beta = self.beta(target)
        if math.isinf(beta) or beta == 0.0:
            return 0.0 if math.isinf(beta) else float(np.mean(self.levels))
        b, m = self._last_energy
        return m if b == beta else _gibbs_moments(self.levels, beta)[1]


def solve_beta(energies, target: float) -> float:
    return EntropyMatcher(energies).beta(target)


def gibbs_state(h: Hamiltonian, beta: float) -> GibbsState:
    w = _gibbs_weights(h.energies, beta)
    state = _in_energy_basis(h, w)
    s = entropy_from_probs(w)
    return GibbsState(beta, state, float(np.dot(w, h.energies)), s)


def find_beta_star(h: Hamiltonian, target_entropy: float) -> GibbsState:
    """Gibbs state of ``h`` carrying the requested von Neumann entropy."""
    return gibbs_state(h, solve_beta(h.energies, target_entropy))


def cpass_energy_from_entropy(energies, target: float) -> float:
    """Energy of the completely passive state with entropy ``target``."""
    return EntropyMatcher(energies).energy(target)


def total_ergotropy(rho, h: Hamiltonian) -> float:
    """Mean energy minus the energy of the entropy-matched Gibbs state."""
    rho = density_matrix(rho)
    _check_dims(rho, h)
    s = entropy_from_probs(eig_hermitian(rho).eigenvalues)
    return mean_energy(rho, h) - find_beta_star(h, s).energy



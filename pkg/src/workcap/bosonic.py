"""Closed-form capacitances for phase-insensitive Gaussian channels.

The two-mode channel studied here attenuates one mode with a thermal
attenuator and resets the other to vacuum.  For coherent inputs its output is
a displaced ``tau_beta (x) |0><0|``, so the separable/local capacitance gap is
the energy difference between the passive and the completely passive
counterparts of that state, independent of the input energy.

All energies are in units of ``hbar * omega``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NoConvergence
from .ergotropy import passive_decompose, total_ergotropy, mean_energy
from .qops import Hamiltonian

SMALL_BETA = 0.05
MIN_TERMS = 50


@dataclass(frozen=True)
class AttenuatorParams:
    lam: float
    n_thermal: float
    hbar_omega: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise InvalidParams(f"attenuator transmissivity {self.lam!r} outside [0, 1)")
        if self.n_thermal < 0.0:
            raise InvalidParams(f"thermal photon number {self.n_thermal!r} is negative")
        if self.hbar_omega <= 0.0:
            raise InvalidParams("hbar_omega must be positive")


@dataclass(frozen=True)
class SeriesConfig:
    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.max_terms <= 0:
            raise InvalidParams("series tolerances must be positive")


def beta_eff(p: AttenuatorParams) -> float:
    """Inverse temperature of the attenuator's output for coherent inputs.

    ``ln(((1 - lam) N + 1) / ((1 - lam) N))``; infinite when ``N = 0``.
    """
    n_out = (1.0 - p.lam) * p.n_thermal
    if n_out == 0.0:
        return math.inf
    return math.log1p(1.0 / n_out)


def _check_beta(beta: float) -> None:
    if not beta > 0.0:
        raise InvalidParams(f"inverse temperature must be positive, got {beta!r}")


def thermal_entropy(beta: float) -> float:
    """Von Neumann entropy of a single-mode thermal state."""
    _check_beta(beta)
    if math.isinf(beta):
        return 0.0
    q = math.exp(-beta)
    return -math.log1p(-q) + beta / math.expm1(beta)


def thermal_energy(beta: float) -> float:
    """Mean photon number ``1/(e^beta - 1)`` of a single-mode thermal state."""
    _check_beta(beta)
    if math.isinf(beta):
        return 0.0
    return 1.0 / math.expm1(beta)


def beta_star_bosonic(beta: float) -> float:
    """Inverse temperature of the single-mode thermal state with half the entropy.

    Solves ``S(b) = S(beta) / 2`` for ``b`` by bisection on ``[beta, B]``,
    with ``B`` doubled until ``S(B)`` drops below the target.
    """
    _check_beta(beta)
    if math.isinf(beta):
        return math.inf
    target = 0.5 * thermal_entropy(beta)
    if target == 0.0:
        return math.inf
    lo, hi = beta, 2.0 * beta
    while thermal_entropy(hi) >= target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return math.inf
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if thermal_entropy(mid) > target:
            lo = mid
        else:
            hi = mid
    # pick whichever end matches the target better
    return lo if abs(thermal_entropy(lo) - target) <= abs(thermal_entropy(hi) - target) else hi


def cpass_energy(beta_star: float) -> float:
    """Mean energy of the two-mode thermal state at ``beta_star``."""
    return 2.0 * thermal_energy(beta_star)


def _block(k: int) -> range:
    """Indices of the thermal eigenvalues sent to two-mode energy ``k``."""
    start = k * (k + 1) // 2
    return range(start, start + k + 1)


def pass_energy(beta: float, cfg: SeriesConfig | None = None) -> float:
    """Energy of the passive counterpart of ``tau_beta (x) |0><0|``.

    The single-mode thermal eigenvalues, largest first, fill the two-mode
    levels in order; level ``k`` is ``(k+1)``-fold degenerate and receives
    the indices ``k(k+1)/2 ... k(k+1)/2 + k``.  The closed block sums and
    the explicit per-index sums are accumulated side by side and must agree.
    """
    cfg = cfg or SeriesConfig()
    _check_beta(beta)
    if math.isinf(beta):
        return 0.0
    max_terms = cfg.max_terms
    if beta < SMALL_BETA:
        warnings.warn(f"beta = {beta} is small; the passive-energy series converges slowly",
                      RuntimeWarning, stacklevel=2)
        max_terms = max(max_terms, int(100 / beta))
    one_minus_q = -math.expm1(-beta)
    closed, explicit = 0.0, 0.0
    for k in range(max_terms):
        a = k * (k + 1) / 2.0
        term = k * (math.exp(-a * beta) - math.exp(-(k * (k + 3) / 2.0 + 1.0) * beta))
        closed += term
        explicit += k * math.fsum(math.exp(-i * beta) * one_minus_q for i in _block(k))
        if k >= MIN_TERMS:
            # terms fall faster than a geometric series with this ratio
            ratio = (k + 1) / k * math.exp(-(k + 1) * beta)
            tail = term * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
            if tail <= cfg.rel_tol * closed:
                break
    else:
        raise NoConvergence(f"passive-energy series did not converge in {max_terms} terms")
    if abs(closed - explicit) > 1e-12 * max(1.0, abs(closed)):
        raise NoConvergence(
            f"block-sum and index-sum forms disagree: {closed!r} vs {explicit!r}"
        )
    return closed


def two_mode_gap(beta: float, cfg: SeriesConfig | None = None) -> float:
    """Capacitance gap of the two-mode attenuator-plus-reset channel.

    Does not depend on the input energy: both passive counterparts are
    functions of ``beta`` alone.
    """
    _check_beta(beta)
    if math.isinf(beta):
        return 0.0
    return pass_energy(beta, cfg) - cpass_energy(beta_star_bosonic(beta))


def gap_row(beta: float, cfg: SeriesConfig | None = None) -> dict:
    """All intermediate quantities of :func:`two_mode_gap` at one ``beta``."""
    bs = beta_star_bosonic(beta)
    e_pass = pass_energy(beta, cfg)
    e_cpass = cpass_energy(bs)
    return {"beta": beta, "beta_star": bs, "e_pass": e_pass, "e_cpass": e_cpass,
            "gap": e_pass - e_cpass}


def single_mode_capacitance(kind: str, params: dict, e: float) -> float:
    """Ergotropic capacitance of a single-mode channel at input energy ``e``.

    ``kind`` is ``"attenuator"`` (needs ``lam``), ``"amplifier"`` (needs
    ``mu``) or ``"additive"`` (needs ``n_thermal``).  All three are linear in
    ``e``, so separable and local capacitances coincide.
    """
    if e < 0:
        raise InvalidParams(f"input energy {e!r} is negative")
    n = params.get("n_thermal", 0.0)
    if n < 0:
        raise InvalidParams(f"thermal photon number {n!r} is negative")
    if kind == "attenuator":
        lam = params["lam"]
        if not 0.0 <= lam < 1.0:
            raise InvalidParams(f"attenuator transmissivity {lam!r} outside [0, 1)")
        return lam * e
    if kind == "amplifier":
        mu = params["mu"]
        if mu < 1.0:
            raise InvalidParams(f"amplifier gain {mu!r} below 1")
        return mu * e
    if kind == "additive":
        return e
    raise InvalidParams(f"unknown single-mode channel {kind!r}")


def truncated_two_mode(beta: float, cutoff: int = 60) -> tuple[np.ndarray, Hamiltonian]:
    """``tau_beta (x) |0><0|`` and ``H_2`` on the Fock states with ``n_A + n_B <= cutoff``.

    Both operators are diagonal in the Fock basis; the thermal distribution
    is renormalised after truncation.
    """
    _check_beta(beta)
    labels = [(na, n - na) for n in range(cutoff + 1) for na in range(n + 1)]
    energy = np.array([na + nb for na, nb in labels], dtype=float)
    weight = np.array([math.exp(-beta * na) if nb == 0 else 0.0 for na, nb in labels])
    weight /= weight.sum()
    return np.diag(weight).astype(complex), Hamiltonian.from_eigenvalues(energy)


def truncated_fock_energies(beta: float, cutoff: int = 60) -> tuple[float, float]:
    """Passive and completely passive energies from a finite Fock truncation.

    An independent route to :func:`pass_energy` and the completely passive
    energy, through the generic finite-dimensional ergotropy code.
    """
    rho, h = truncated_two_mode(beta, cutoff)
    e_pass = passive_decompose(rho, h).passive_energy
    e_cpass = mean_energy(rho, h) - total_ergotropy(rho, h)
    return e_pass, e_cpass

"""Energy-constrained maximal output (total) ergotropy and the envelope capacitances.

For a channel ``ch`` acting on a cell with Hamiltonian ``h``:

* ``E1(e)``     best output ergotropy over inputs with mean energy at most ``e``;
* ``E1_tot(e)`` the same with the total ergotropy as figure of merit;
* ``chi``       least concave majorant of ``E1`` (local capacitance);
* ``chi_tot``   least concave majorant of ``E1_tot`` (separable-input lower bound);
* ``gap``       ``chi_tot - chi``.

The maximisations are non-convex and solved by multi-start Nelder-Mead, so
every reported value is the objective of an explicit feasible input state:
a certified lower bound on the true maximum.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import minimize

from .ergotropy import EntropyMatcher, entropy_from_probs
from .errors import DimensionMismatch, EmptyCurve, EnergyOutOfRange, NoConvergence
from .qops import DIM_CAP, Hamiltonian, KrausChannel, kron_all, partial_trace, tensor_power

OBJECTIVES = ("erg", "tot")
ENERGY_TOL = 1e-12
# dips below the left neighbour larger than this trigger a warm-started re-run
REDO_TOL = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    n_starts: int = 32
    max_iters: int = 2000
    ftol: float = 1e-9
    seed: int = 0
    penalty_weight: float = 10.0
    simplex_step: float = 0.3
    screen_iters: int = 40
    n_polish: int = 3

    def __post_init__(self):
        if min(self.n_starts, self.max_iters, self.screen_iters, self.n_polish) < 1:
            raise ValueError("n_starts, max_iters, screen_iters and n_polish must be positive")
        if self.ftol <= 0 or self.penalty_weight <= 0 or self.simplex_step <= 0:
            raise ValueError("ftol, penalty_weight and simplex_step must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


# --------------------------------------------------------------------------
# state parametrisation


def _pairs(d: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(d) for k in range(j + 1, d)]


def n_params(d: int) -> int:
    """Angles and phases of ``d(d-1)/2`` Givens rotations plus ``d - 1`` weight angles."""
    return d * (d - 1) + d - 1


def unitary_from_params(x: np.ndarray, d: int) -> np.ndarray:
    """Product of complex Givens rotations in lexicographic pair order."""
    pairs = _pairs(d)
    m = len(pairs)
    xs = [float(t) for t in x[: 2 * m]]
    # plain complex arithmetic: numpy per-column updates dominate at d <= 4
    v = [[1.0 + 0j if r == c else 0j for c in range(d)] for r in range(d)]
    for n, (j, k) in enumerate(pairs):
        t, f = xs[n], xs[m + n]
        c, s = math.cos(t), math.sin(t)
        ph = complex(math.cos(f), math.sin(f)) * s
        phc = ph.conjugate()
        for row in v:
            vj, vk = row[j], row[k]
            row[j] = c * vj + ph * vk
            row[k] = c * vk - phc * vj
    return np.array(v, dtype=complex)


def probs_from_params(x: np.ndarray, d: int) -> np.ndarray:
    """Eigenvalue weights from hyperspherical angles: ``p_i = cos^2(a_i) prod_{j<i} sin^2(a_j)``.

    Every point of the simplex, including its faces, is reached without a
    redundant scale direction.
    """
    rem = 1.0
    p = []
    for a in x[len(x) - d + 1:].tolist():
        c2 = math.cos(a) ** 2
        p.append(rem * c2)
        rem *= 1.0 - c2
    p.append(rem)
    return np.array(p)


def _angles_from_probs(p: np.ndarray) -> list[float]:
    tail = np.cumsum(p[::-1])[::-1]
    return [math.atan2(math.sqrt(tail[i + 1]), math.sqrt(p[i])) for i in range(len(p) - 1)]


def state_from_params(x: np.ndarray, d: int) -> np.ndarray:
    v = unitary_from_params(x, d)
    p = probs_from_params(x, d)
    return (v * p) @ v.conj().T


def params_from_state(rho: np.ndarray) -> np.ndarray:
    """Inverse of :func:`state_from_params` up to irrelevant column phases.

    The eigenbasis is reduced to a diagonal unitary by Givens eliminations
    applied in the same pair order the forward map multiplies them in.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    w, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    p = np.clip(w, 0.0, None)
    p /= p.sum()
    pairs = _pairs(d)
    theta, phi = [], []
    for j, k in pairs:
        a, b = u[j, j], u[k, j]
        t = math.atan2(abs(b), abs(a))
        f = (np.angle(b) - np.angle(a)) if abs(b) > 0 else 0.0
        c, s = math.cos(t), math.sin(t)
        ph = complex(math.cos(f), math.sin(f))
        rj, rk = u[j, :].copy(), u[k, :]
        u[j, :] = c * rj + ph.conjugate() * s * rk
        u[k, :] = -ph * s * rj + c * rk
        theta.append(t)
        phi.append(f)
    return np.concatenate([theta, phi, _angles_from_probs(p)])


# --------------------------------------------------------------------------
# single-cell problem


class CellProblem:
    """Output (total) ergotropy of ``ch`` as a function of optimiser parameters.

    Everything is expressed in the energy eigenbasis of ``h`` so the
    Hamiltonian is diagonal and the ground state is the first basis vector.
    Inputs above the energy budget are mixed with the ground state until the
    budget is met exactly; the overshoot is also penalised linearly so the
    search does not drift far outside the feasible set.
    """

    def __init__(self, ch: KrausChannel, h: Hamiltonian, penalty_weight: float = 10.0):
        if ch.dim_in != h.dim or ch.dim_out != h.dim:
            raise DimensionMismatch(
                f"channel {ch.dim_in}->{ch.dim_out} does not act on a {h.dim}-level cell"
            )
        u = h.basis
        self.d = h.dim
        self.energies = np.asarray(h.energies, dtype=float)
        self.e_max = h.e_max
        self.kraus = np.stack([u.conj().T @ k @ u for k in ch.kraus_ops])
        # row-major vec(K rho K^dag) = (K kron conj K) vec(rho)
        self.transfer = sum(np.kron(k, k.conj()) for k in self.kraus)
        self.matcher = EntropyMatcher(self.energies)
        self.penalty_weight = penalty_weight
        ground = np.zeros((self.d, self.d), dtype=complex)
        ground[0, 0] = 1.0
        self.out_ground = self.channel(ground)
        self.basis = u

    def channel(self, rho: np.ndarray) -> np.ndarray:
        m = self.kraus @ rho @ self.kraus.conj().transpose(0, 2, 1)
        out = m.sum(axis=0)
        return 0.5 * (out + out.conj().T)

    def input_energy(self, rho: np.ndarray) -> float:
        return float(np.dot(np.real(np.diagonal(rho)), self.energies))

    def project(self, rho: np.ndarray, e: float) -> np.ndarray:
        """Mix ``rho`` with the ground state so its mean energy is at most ``e``."""
        eps = self.input_energy(rho)
        if eps <= e:
            return rho
        t = 1.0 - e / eps
        ground = np.zeros_like(rho)
        ground[0, 0] = 1.0
        return (1.0 - t) * rho + t * ground

    def values_of_output(self, out: np.ndarray, need_tot: bool = True) -> tuple[float, float]:
        lam = np.linalg.eigvalsh(out)
        e_mean = float(np.dot(np.real(np.diagonal(out)), self.energies))
        erg = e_mean - float(np.dot(lam[::-1], self.energies))
        if not need_tot:
            return erg, math.nan
        tot = e_mean - self.matcher.energy(entropy_from_probs(lam))
        return erg, tot

    def values_of_input(self, rho: np.ndarray) -> tuple[float, float]:
        """Exact output ergotropy and total ergotropy of one input state."""
        return self.values_of_output(self.channel(rho))

    def objective(self, x: np.ndarray, e: float, which: str) -> float:
        d = self.d
        v = unitary_from_params(x, d)
        p = probs_from_params(x, d)
        rho = (v * p) @ v.conj().T
        eps = float(rho.diagonal().real @ self.energies)
        out = (self.transfer @ rho.reshape(-1)).reshape(d, d)
        excess = 0.0
        if eps > e:
            t = e / eps
            out = t * out + (1.0 - t) * self.out_ground
            excess = eps - e
        lam = np.linalg.eigvalsh(out)
        e_mean = float(out.diagonal().real @ self.energies)
        if which == "erg":
            val = e_mean - float(lam[::-1] @ self.energies)
        else:
            val = e_mean - self.matcher.energy(entropy_from_probs(lam))
        return -val + self.penalty_weight * excess


# --------------------------------------------------------------------------
# multi-start search at one energy


@dataclass
class PointResult:
    """Best inputs found at one energy, with per-objective diagnostics."""

    e: float
    erg: float
    tot: float
    erg_state: np.ndarray = field(repr=False)
    tot_state: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    def value(self, which: str) -> float:
        return self.erg if which == "erg" else self.tot

    def state(self, which: str) -> np.ndarray:
        return self.erg_state if which == "erg" else self.tot_state


def seed_inputs(prob: CellProblem, e: float) -> list[np.ndarray]:
    """Deterministic starting states in the energy eigenbasis.

    Ground state, maximally mixed state, every eigenstate within the budget,
    and for each level pair the pure superposition whose energy meets the
    budget exactly when the upper level exceeds it.
    """
    d, en = prob.d, prob.energies
    seeds = [np.eye(d, dtype=complex)[:, [0]] @ np.eye(d, dtype=complex)[[0], :]]
    seeds.append(np.eye(d, dtype=complex) / d)
    for ell in range(1, d):
        if en[ell] <= e + ENERGY_TOL:
            seeds.append(np.diag(np.eye(d)[ell]).astype(complex))
    for j in range(d):
        for k in range(j + 1, d):
            if en[j] <= e < en[k]:
                w = (e - en[j]) / (en[k] - en[j])
                psi = np.zeros(d, dtype=complex)
                psi[j], psi[k] = math.sqrt(1 - w), math.sqrt(w)
                seeds.append(np.outer(psi, psi.conj()))
    return seeds


def _random_params(rng: np.random.Generator, d: int) -> np.ndarray:
    m = d * (d - 1) // 2
    theta = rng.uniform(0.0, 0.5 * math.pi, m)
    phi = rng.uniform(0.0, 2.0 * math.pi, m)
    w = _angles_from_probs(rng.dirichlet(np.ones(d)))
    return np.concatenate([theta, phi, w])


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    n = len(x0)
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += step if x0[i] <= 0.5 else -step
    return sim


def _nelder_mead(fun, x0: np.ndarray, cfg: OptimizerConfig, step: float, screen: bool = False):
    """One Nelder-Mead run; ``screen`` uses the short, loose first-stage budget."""
    iters = cfg.screen_iters if screen else cfg.max_iters
    return minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": iters,
            "maxfev": 4 * iters,
            "xatol": 1e-4 if screen else 1e-7,
            "fatol": max(cfg.ftol, 1e-6) if screen else cfg.ftol,
            "initial_simplex": _simplex(x0, step),
            "adaptive": len(x0) > 6,
        },
    )


def _distinct_best(values, k: int, sep: float = 1e-7) -> list[int]:
    """Indices of the ``k`` lowest values, skipping near-duplicates of ones already taken."""
    picked: list[int] = []
    for i in np.argsort(values, kind="stable"):
        if all(abs(values[i] - values[j]) > sep for j in picked):
            picked.append(int(i))
            if len(picked) == k:
                break
    return picked


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent random stream for grid point ``index``."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), index]))


def _check_energy(e: float, e_max: float) -> float:
    if not -ENERGY_TOL <= e <= e_max + ENERGY_TOL:
        raise EnergyOutOfRange(f"energy {e!r} outside [0, {e_max!r}]")
    return min(max(e, 0.0), e_max)


def optimize_point(
    ch: KrausChannel,
    h: Hamiltonian,
    e: float,
    cfg: OptimizerConfig | None = None,
    index: int = 0,
    objectives: tuple[str, ...] = OBJECTIVES,
    warm: list[np.ndarray] | None = None,
    prob: CellProblem | None = None,
) -> PointResult:
    """Best output ergotropy and total ergotropy for inputs of energy at most ``e``.

    Each objective gets a short screening Nelder-Mead run from every start
    (deterministic seeds, any ``warm`` states, ``cfg.n_starts`` random
    starts); the ``cfg.n_polish`` best distinct ones are continued at full
    tolerance and the winner is restarted once with a small simplex.  Every
    final input is scored under both
    objectives and each objective keeps the best score seen, so the total
    ergotropy value can never fall below the ergotropy value.
    """
    cfg = cfg or OptimizerConfig()
    prob = prob or CellProblem(ch, h, cfg.penalty_weight)
    e = _check_energy(e, prob.e_max)
    d = prob.d
    rng = point_rng(cfg.seed, index)
    starts = [params_from_state(s) for s in seed_inputs(prob, e)]
    # warm states arrive in the original basis
    warm = [prob.basis.conj().T @ s @ prob.basis for s in (warm or [])]
    starts += [params_from_state(s) for s in warm]
    starts += [_random_params(rng, d) for _ in range(cfg.n_starts)]

    candidates: list[tuple[np.ndarray, str, int]] = []
    diag: dict = {}
    if e <= ENERGY_TOL:
        # only the ground state is feasible
        candidates.append((starts[0], "seed", 0))
        for which in objectives:
            diag[which] = {"best_start": 0, "iterations": 0, "evaluations": 0}
    else:
        for which in objectives:
            f = lambda x, w=which: prob.objective(x, e, w)  # noqa: E731
            screened = [_nelder_mead(f, x0, cfg, cfg.simplex_step, screen=True) for x0 in starts]
            order = _distinct_best([r.fun for r in screened], cfg.n_polish)
            nfev = sum(r.nfev for r in screened)
            best, best_run = -1, None
            for i in order:
                r = _nelder_mead(f, screened[i].x, cfg, cfg.simplex_step)
                nfev += r.nfev
                candidates.append((screened[i].x, which, i))
                candidates.append((r.x, which, i))
                if best_run is None or r.fun < best_run.fun:
                    best, best_run = i, r
            restart = _nelder_mead(f, best_run.x, cfg, 0.05)
            nfev += restart.nfev
            candidates.append((restart.x, which, best))
            diag[which] = {
                "best_start": best,
                "iterations": int(screened[best].nit + best_run.nit + restart.nit),
                "evaluations": int(nfev),
            }

    best_val = {"erg": -math.inf, "tot": -math.inf}
    best_state: dict = {}
    for x, _, _ in candidates:
        rho = prob.project(state_from_params(x, d), e)
        erg, tot = prob.values_of_input(rho)
        for which, val in (("erg", erg), ("tot", tot)):
            if val > best_val[which]:
                best_val[which], best_state[which] = val, rho
    for s in warm:
        rho = prob.project(s, e)
        erg, tot = prob.values_of_input(rho)
        for which, val in (("erg", erg), ("tot", tot)):
            if val > best_val[which]:
                best_val[which], best_state[which] = val, rho
    if not all(math.isfinite(best_val[w]) for w in OBJECTIVES):
        raise NoConvergence(f"no finite objective value at energy {e!r}")
    for which in OBJECTIVES:
        rho = best_state[which]
        diag.setdefault(which, {})["feasibility_residual"] = max(
            0.0, prob.input_energy(rho) - e
        )
    u = prob.basis
    return PointResult(
        e=e,
        erg=best_val["erg"],
        tot=best_val["tot"],
        erg_state=u @ best_state["erg"] @ u.conj().T,
        tot_state=u @ best_state["tot"] @ u.conj().T,
        diagnostics=diag,
    )


def max_output_ergotropy(ch, h, e, cfg: OptimizerConfig | None = None) -> float:
    """Best output ergotropy over inputs with ``Tr[rho h] <= e`` (a lower bound)."""
    return optimize_point(ch, h, e, cfg, objectives=("erg",)).erg


def max_output_total_ergotropy(ch, h, e, cfg: OptimizerConfig | None = None) -> float:
    """Best output total ergotropy over inputs with ``Tr[rho h] <= e``.

    Runs the ergotropy search too and scores its optimum, so the result is
    never below :func:`max_output_ergotropy` for the same arguments.
    """
    return optimize_point(ch, h, e, cfg, objectives=OBJECTIVES).tot


# --------------------------------------------------------------------------
# curves and envelopes


@dataclass
class EnergyCurve:
    e_grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.e_grid = np.asarray(self.e_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.e_grid.shape != self.values.shape:
            raise ValueError("e_grid and values must have the same length")

    def __len__(self):
        return len(self.e_grid)

    def __call__(self, e):
        return np.interp(e, self.e_grid, self.values)


def upper_hull(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the upper convex hull of points sorted by ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0:
        raise EmptyCurve("cannot take the envelope of an empty curve")
    order = np.lexsort((-y, x))
    hull: list[int] = []
    for i in order:
        if hull and x[hull[-1]] == x[i]:
            continue
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return x[hull], y[hull]


def concave_envelope(curve: EnergyCurve) -> EnergyCurve:
    """Least concave majorant of the piecewise-linear curve, on the same grid."""
    if len(curve) == 0:
        raise EmptyCurve("cannot take the envelope of an empty curve")
    hx, hy = upper_hull(curve.e_grid, curve.values)
    vals = np.interp(curve.e_grid, hx, hy)
    vals = np.maximum(vals, curve.values)
    return EnergyCurve(curve.e_grid.copy(), vals, dict(curve.meta, envelope=True))


def supporting_chord(curve: EnergyCurve, e: float) -> tuple[float, float, float, float]:
    """Two-point energy distribution attaining the envelope at ``e``.

    Returns ``(p, e_left, e_right, value)`` with ``p`` the weight on
    ``e_left``, so ``p e_left + (1 - p) e_right == e`` and
    ``p E(e_left) + (1 - p) E(e_right) == value``.
    """
    hx, hy = upper_hull(curve.e_grid, curve.values)
    i = int(np.searchsorted(hx, e, side="right"))
    i = min(max(i, 1), len(hx) - 1) if len(hx) > 1 else 0
    if len(hx) == 1 or e <= hx[0]:
        return 1.0, float(hx[0]), float(hx[0]), float(hy[0])
    xl, xr = hx[i - 1], hx[i]
    p = (xr - e) / (xr - xl)
    return float(p), float(xl), float(xr), float(p * hy[i - 1] + (1 - p) * hy[i])


def second_differences(curve: EnergyCurve) -> np.ndarray:
    return np.diff(curve.values, 2)


def is_concave(curve: EnergyCurve, tol: float = 1e-12) -> bool:
    return bool(np.all(second_differences(curve) <= tol))


@dataclass
class Sweep:
    """Raw and enveloped curves for one channel, with per-point records."""

    e1: EnergyCurve
    e1_tot: EnergyCurve
    chi: EnergyCurve
    chi_tot: EnergyCurve
    gap: EnergyCurve
    points: list = field(repr=False, default_factory=list)
    timings: list = field(repr=False, default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name).values


def energy_grid(e_max: float, grid_size: int) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    return np.linspace(0.0, e_max, grid_size + 1)


def _adopt_left(cur: PointResult, left: PointResult) -> PointResult:
    """Take the left neighbour's optimum wherever it scores higher; it is feasible at ``cur.e``."""
    out = PointResult(cur.e, cur.erg, cur.tot, cur.erg_state, cur.tot_state, dict(cur.diagnostics))
    for which in OBJECTIVES:
        if left.value(which) > out.value(which):
            setattr(out, which, left.value(which))
            setattr(out, f"{which}_state", left.state(which))
    out.diagnostics["adopted_left"] = True
    return out


def _point_task(args):
    ch, h, e, cfg, index = args
    t0 = time.perf_counter()
    res = optimize_point(ch, h, e, cfg, index=index)
    return res, time.perf_counter() - t0


def sweep(
    ch: KrausChannel,
    h: Hamiltonian,
    grid_size: int = 64,
    cfg: OptimizerConfig | None = None,
    jobs: int = 1,
    meta: dict | None = None,
) -> Sweep:
    """Compute ``E1``, ``E1_tot`` on a uniform grid and their concave envelopes.

    Grid points are independent (each has its own random stream) and may be
    evaluated in ``jobs`` worker processes.  A sequential pass then makes
    both curves non-decreasing: a point more than ``REDO_TOL`` below its left
    neighbour is re-run warm-started from that neighbour's optimum, and a
    smaller dip simply takes over the neighbour's input, which is feasible at
    the larger energy.
    """
    cfg = cfg or OptimizerConfig()
    grid = energy_grid(h.e_max, grid_size)
    tasks = [(ch, h, float(e), cfg, i) for i, e in enumerate(grid)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_point_task, tasks))
    else:
        out = [_point_task(t) for t in tasks]
    points = [r for r, _ in out]
    timings = [t for _, t in out]

    prob = CellProblem(ch, h, cfg.penalty_weight)
    for i in range(1, len(points)):
        left, cur = points[i - 1], points[i]
        deficit = max(left.erg - cur.erg, left.tot - cur.tot)
        if 0 < deficit <= REDO_TOL:
            # round-off dip: the left optimum is feasible here and settles it
            points[i] = _adopt_left(cur, left)
        elif deficit > REDO_TOL:
            t0 = time.perf_counter()
            redo = optimize_point(
                ch, h, cur.e, cfg, index=i, prob=prob,
                warm=[left.erg_state, left.tot_state],
            )
            redo.diagnostics["warm_started"] = True
            timings[i] += time.perf_counter() - t0
            points[i] = _adopt_left(redo, left) if redo.erg < left.erg or redo.tot < left.tot else redo

    meta = dict(meta or {})
    meta["optimizer"] = asdict(cfg)
    e1 = EnergyCurve(grid, [p.erg for p in points], dict(meta, quantity="e1"))
    e1_tot = EnergyCurve(grid, [p.tot for p in points], dict(meta, quantity="e1_tot"))
    chi_c = concave_envelope(e1)
    chi_t = concave_envelope(e1_tot)
    chi_c.meta["quantity"] = "chi"
    chi_t.meta["quantity"] = "chi_tot"
    gap = EnergyCurve(grid, chi_t.values - chi_c.values, dict(meta, quantity="gap"))
    return Sweep(e1, e1_tot, chi_c, chi_t, gap, points, timings)


def chi(ch, h, grid_size: int = 64, cfg: OptimizerConfig | None = None) -> EnergyCurve:
    """Local capacitance: concave envelope of the maximal output ergotropy."""
    return sweep(ch, h, grid_size, cfg).chi


def chi_tot(ch, h, grid_size: int = 64, cfg: OptimizerConfig | None = None) -> EnergyCurve:
    """Separable-input lower bound: envelope of the maximal output total ergotropy."""
    return sweep(ch, h, grid_size, cfg).chi_tot


def gap_curve(ch, h, grid_size: int = 64, cfg: OptimizerConfig | None = None) -> EnergyCurve:
    """``chi_tot - chi``, a lower bound on the separable/local capacitance gap."""
    return sweep(ch, h, grid_size, cfg).gap


# --------------------------------------------------------------------------
# finite-n product-input check


@dataclass(frozen=True)
class FiniteNReport:
    lhs_per_cell: float
    chi_at_e: float
    ok: bool
    cell_energies: tuple = ()


class ProductProblem:
    """Per-cell local ergotropy of ``ch^(x)n`` on product inputs.

    The joint output is built with the tensor-power channel and each cell's
    ergotropy is read off its reduced state, which is exactly the local
    ergotropy of the product output.
    """

    def __init__(self, ch: KrausChannel, h: Hamiltonian, n: int, cap: int = DIM_CAP,
                 penalty_weight: float = 10.0):
        self.cell = CellProblem(ch, h, penalty_weight)
        self.n = n
        u = h.basis
        local = KrausChannel(tuple(u.conj().T @ k @ u for k in ch.kraus_ops))
        self.joint = tensor_power(local, n, cap)
        self.kraus = self.joint.stacked()
        self.penalty_weight = penalty_weight

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        return np.split(np.asarray(x), self.n)

    def cell_states(self, x: np.ndarray, e: float) -> list[np.ndarray]:
        """Cell inputs, jointly mixed with the ground state to meet ``n e``."""
        d = self.cell.d
        states = [state_from_params(xi, d) for xi in self.split(x)]
        total = sum(self.cell.input_energy(s) for s in states)
        budget = self.n * e
        if total > budget:
            t = 1.0 - budget / total
            ground = np.zeros((d, d), dtype=complex)
            ground[0, 0] = 1.0
            states = [(1 - t) * s + t * ground for s in states]
        return states

    def per_cell(self, states: list[np.ndarray]) -> float:
        joint_in = kron_all(states)
        out = (self.kraus @ joint_in @ self.kraus.conj().transpose(0, 2, 1)).sum(0)
        dims = [self.cell.d] * self.n
        total = 0.0
        for i in range(self.n):
            red = partial_trace(out, dims, i)
            total += self.cell.values_of_output(0.5 * (red + red.conj().T), need_tot=False)[0]
        return total / self.n

    def objective(self, x: np.ndarray, e: float) -> float:
        d = self.cell.d
        raw = sum(self.cell.input_energy(state_from_params(xi, d)) for xi in self.split(x))
        excess = max(0.0, raw - self.n * e)
        return -self.per_cell(self.cell_states(x, e)) + self.penalty_weight * excess


def finite_n_check(
    ch: KrausChannel,
    h: Hamiltonian,
    n: int,
    e: float,
    cfg: OptimizerConfig | None = None,
    reference: Sweep | None = None,
    grid_size: int = 16,
    tol: float = 1e-3,
    lower_tol: float = 5e-3,
) -> FiniteNReport:
    """Best per-cell ergotropy of ``n`` product inputs against ``chi(e)``.

    The ``n``-cell search is seeded with single-cell optima taken from the
    reference sweep: every cell at ``e``, and splits that place cells on the
    supporting chord of the envelope.  ``chi(e)`` comes from the envelope of
    the reference curve with the point ``e`` itself added.  The report is
    ``ok`` when ``chi(e) - lower_tol <= best <= chi(e) + tol``.
    """
    if n not in (2, 3):
        raise ValueError("finite-n check supports n = 2 or 3")
    cfg = cfg or OptimizerConfig()
    prob = ProductProblem(ch, h, n, penalty_weight=cfg.penalty_weight)
    e = _check_energy(e, h.e_max)
    reference = reference or sweep(ch, h, grid_size, cfg)
    at_e = optimize_point(ch, h, e, cfg, index=10_000, objectives=("erg",),
                          warm=[p.erg_state for p in reference.points if p.e <= e])
    xs = np.append(reference.e1.e_grid, e)
    ys = np.append(reference.e1.values, at_e.erg)
    hx, hy = upper_hull(xs, ys)
    chi_e = float(np.interp(e, hx, hy))

    by_e = {p.e: p for p in reference.points}
    by_e[e] = at_e
    energies_avail = sorted(by_e)
    u = h.basis

    def cell_x(rho):
        return params_from_state(u.conj().T @ rho @ u)

    seeds = [np.concatenate([cell_x(at_e.erg_state)] * n)]
    # k cells at el and n - k at er, within the joint budget
    for el in energies_avail:
        for er in energies_avail:
            if not el < e < er:
                continue
            for k in range(1, n):
                if k * el + (n - k) * er <= n * e + ENERGY_TOL:
                    cells = [by_e[el].erg_state] * k + [by_e[er].erg_state] * (n - k)
                    seeds.append(np.concatenate([cell_x(c) for c in cells]))
    rng = point_rng(cfg.seed, 20_000 + n)
    d = h.dim
    seeds += [np.concatenate([_random_params(rng, d) for _ in range(n)])
              for _ in range(max(1, cfg.n_starts // 4))]

    f = lambda x: prob.objective(x, e)  # noqa: E731
    best_val, best_states = -math.inf, None
    for x0 in seeds:
        states0 = prob.cell_states(x0, e)
        v0 = prob.per_cell(states0)
        if v0 > best_val:
            best_val, best_states = v0, states0
    scored = sorted(seeds, key=f)[: max(2, len(seeds) // 4)]
    for x0 in scored:
        r = _nelder_mead(f, x0, cfg, 0.05)
        states = prob.cell_states(r.x, e)
        v = prob.per_cell(states)
        if v > best_val:
            best_val, best_states = v, states
    cell_e = tuple(prob.cell.input_energy(s) for s in best_states)
    ok = chi_e - lower_tol <= best_val <= chi_e + tol
    return FiniteNReport(best_val, chi_e, ok, cell_e)

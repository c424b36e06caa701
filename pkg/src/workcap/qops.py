"""Dense linear algebra for small Hermitian operators, states and Kraus channels.

States and Hermitian operators are plain complex ``numpy`` arrays; the helpers
below validate and normalise them.  Hamiltonians and channels carry derived
data and are small frozen dataclasses.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionCap,
    DimensionMismatch,
    InvalidState,
    NoConvergence,
    NonHermitian,
    NotTracePreserving,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_CLIP_TOL = 1e-10
TP_TOL = 1e-10
JACOBI_TOL = 1e-14
DIM_CAP = 64


class Spectrum(NamedTuple):
    """Eigenvalues in ascending order and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``m`` as a complex square array, checking Hermiticity.

    The tolerance is absolute for matrices with entries of order one and is
    scaled by the largest entry otherwise.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * scale:
        raise NonHermitian("matrix is not Hermitian within tolerance")
    # symmetrise so downstream routines see an exactly Hermitian array
    return 0.5 * (a + a.conj().T)


def _is_diagonal(a: np.ndarray) -> bool:
    return not np.any(a - np.diag(np.diagonal(a)))


def eig_hermitian(m, method: str = "lapack") -> Spectrum:
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="lapack"`` calls :func:`numpy.linalg.eigh`; ``method="jacobi"``
    runs the cyclic complex Jacobi iteration in :func:`jacobi_eigh`.
    Diagonal inputs take an exact shortcut in both cases.
    """
    a = hermitian(m)
    if _is_diagonal(a):
        diag = np.diagonal(a).real
        order = np.argsort(diag, kind="stable")
        vecs = np.eye(a.shape[0], dtype=complex)[:, order]
        return Spectrum(diag[order], vecs)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
        return Spectrum(w, v)
    if method == "jacobi":
        return jacobi_eigh(a)
    raise ValueError(f"unknown eigensolver {method!r}")


def jacobi_eigh(m, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> Spectrum:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies a real plane rotation.  Iteration stops once the off-diagonal
    Frobenius mass drops below ``tol`` (relative to the Frobenius norm when
    that exceeds one).
    """
    a = hermitian(m)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))

    def off(x):
        # summed directly: ||x||^2 - sum diag^2 cancels catastrophically
        return float(np.linalg.norm(x - np.diag(np.diagonal(x))))

    for _ in range(max_sweeps):
        if off(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, app - aqq)
                c, s = np.cos(theta), np.sin(theta)
                u = np.array([[c, -s], [s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ u
                a[p, q] = a[q, p] = 0.0
    else:
        if off(a) >= tol * scale:
            raise NoConvergence("Jacobi iteration did not converge")
    w = np.diagonal(a).real.copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], v[:, order])


def density_matrix(m, tol: float = PSD_CLIP_TOL) -> np.ndarray:
    """Validate a density matrix; clip round-off negativity and renormalise."""
    a = hermitian(m)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"trace is {tr!r}, expected 1")
    w, v = eig_hermitian(a)
    if w[0] < -tol:
        raise InvalidState(f"smallest eigenvalue {w[0]:.3e} is below -{tol:g}")
    if w[0] < 0.0:
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        a = (v * w) @ v.conj().T
        a = 0.5 * (a + a.conj().T)
    return a


def ket(dim: int, index: int) -> np.ndarray:
    """Projector onto the computational basis state ``|index>``."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def pure_state(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: int) -> np.ndarray:
    """Reduced state of subsystem ``keep`` of a multipartite operator."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    for k in reversed(range(n)):
        if k == keep:
            continue
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    return t


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian Hamiltonian with its ground energy shifted to exactly zero.

    ``energies`` holds the eigenvalues in ascending order (``energies[0] == 0``)
    and ``basis`` the matching eigenvectors as columns.
    """

    op: np.ndarray
    energies: np.ndarray
    basis: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "Hamiltonian":
        spec = eig_hermitian(m)
        e0 = spec.eigenvalues[0]
        op = hermitian(m) - e0 * np.eye(len(spec.eigenvalues))
        energies = spec.eigenvalues - e0
        energies[0] = 0.0
        energies = np.clip(energies, 0.0, None)
        return cls(op, energies, spec.eigenvectors)

    @classmethod
    def from_eigenvalues(cls, levels) -> "Hamiltonian":
        levels = np.asarray(levels, dtype=float)
        return cls.from_matrix(np.diag(levels))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @property
    def e_max(self) -> float:
        return float(self.energies[-1])

    @property
    def is_diagonal(self) -> bool:
        return _is_diagonal(self.op)


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    kraus_ops: tuple
    dim_in: int = field(init=False)
    dim_out: int = field(init=False)

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise NotTracePreserving("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must share one 2-d shape")
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dim_out", shape[0])
        object.__setattr__(self, "dim_in", shape[1])
        dev = np.linalg.norm(self.completeness() - np.eye(self.dim_in))
        if dev > TP_TOL:
            raise NotTracePreserving(f"sum K^dag K deviates from identity by {dev:.3e}")

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus_ops)

    def stacked(self) -> np.ndarray:
        """Kraus operators as one ``(r, dim_out, dim_in)`` array."""
        return np.stack(self.kraus_ops)

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(self, rho)

    def __reduce__(self):
        return (KrausChannel, (tuple(np.array(k) for k in self.kraus_ops),))


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    """``sum_k K_k rho K_k^dag`` for a validated input state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionMismatch(
            f"channel expects a {ch.dim_in}x{ch.dim_in} input, got {rho.shape}"
        )
    k = ch.stacked()
    out = np.einsum("kij,jl,kml->im", k, rho, k.conj())
    return 0.5 * (out + out.conj().T)


def _check_cap(dim: int, n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("tensor power must be positive")
    if dim**n > cap:
        raise DimensionCap(f"dimension {dim}^{n} = {dim ** n} exceeds cap {cap}")


def tensor_power(ch: KrausChannel, n: int, cap: int = DIM_CAP) -> KrausChannel:
    """Kraus representation of ``ch`` applied independently to ``n`` cells."""
    _check_cap(max(ch.dim_in, ch.dim_out), n, cap)
    ops = list(ch.kraus_ops)
    for _ in range(n - 1):
        ops = [np.kron(a, b) for a in ops for b in ch.kraus_ops]
    return KrausChannel(tuple(ops))


def tensor_hamiltonian(h: Hamiltonian, n: int, cap: int = DIM_CAP) -> Hamiltonian:
    """Non-interacting ``n``-cell Hamiltonian ``h_1 + ... + h_n``."""
    _check_cap(h.dim, n, cap)
    eye = np.eye(h.dim)
    total = np.zeros((h.dim**n, h.dim**n), dtype=complex)
    for site in range(n):
        term = np.ones((1, 1))
        for j in range(n):
            term = np.kron(term, h.op if j == site else eye)
        total = total + term
    return Hamiltonian.from_matrix(total)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out

"""Constructors for the named noise channels, all returned as Kraus maps.

Multilevel amplitude damping (MAD) and its resonant variant (ReMAD) on a
qutrit are defined by their action on the density matrix entries; their
Kraus operators are extracted from the Choi matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParams, NotCP
from .qops import KrausChannel

CHOI_KEEP = 1e-12
CHOI_NEG_TOL = 1e-10


@dataclass(frozen=True)
class MadParams:
    gamma1: float
    gamma2: float
    gamma3: float

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            g = getattr(self, name)
            if not 0.0 <= g <= 1.0:
                raise InvalidParams(f"{name} = {g!r} outside [0, 1]")
        if self.gamma2 + self.gamma3 > 1.0 + 1e-15:
            raise InvalidParams(
                f"gamma2 + gamma3 = {self.gamma2 + self.gamma3!r} exceeds 1"
            )


def choi_matrix(fn: Callable[[np.ndarray], np.ndarray], dim_in: int) -> np.ndarray:
    """``sum_ij |i><j| (x) fn(|i><j|)`` with the input factor first."""
    blocks = []
    for i in range(dim_in):
        row = []
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[i, j] = 1.0
            row.append(np.asarray(fn(e), dtype=complex))
        blocks.append(row)
    return np.block(blocks)


def kraus_from_map(fn: Callable[[np.ndarray], np.ndarray], dim_in: int) -> KrausChannel:
    """Kraus operators of a linear map from the spectral decomposition of its Choi matrix.

    Raises :class:`NotCP` when the Choi matrix has an eigenvalue below
    ``-1e-10``.
    """
    choi = choi_matrix(fn, dim_in)
    dim_out = choi.shape[0] // dim_in
    choi = 0.5 * (choi + choi.conj().T)
    w, v = np.linalg.eigh(choi)
    if w[0] < -CHOI_NEG_TOL:
        raise NotCP(f"Choi matrix has eigenvalue {w[0]:.3e}; map is not completely positive")
    ops = [
        np.sqrt(mu) * v[:, k].reshape(dim_in, dim_out).T
        for k, mu in enumerate(w)
        if mu > CHOI_KEEP
    ]
    return KrausChannel(tuple(ops))


def mad_map(rho: np.ndarray, p: MadParams) -> np.ndarray:
    """Output density matrix of the qutrit MAD channel."""
    g1, g2, g3 = p.gamma1, p.gamma2, p.gamma3
    r = np.asarray(rho, dtype=complex)
    a = np.sqrt(1 - g1)
    b = np.sqrt(max(0.0, 1 - g2 - g3))
    out = np.empty((3, 3), dtype=complex)
    out[0, 0] = r[0, 0] + g1 * r[1, 1] + g3 * r[2, 2]
    out[1, 1] = (1 - g1) * r[1, 1] + g2 * r[2, 2]
    out[2, 2] = (1 - g2 - g3) * r[2, 2]
    out[0, 1] = a * r[0, 1]
    out[1, 0] = a * r[1, 0]
    out[0, 2] = b * r[0, 2]
    out[2, 0] = b * r[2, 0]
    out[1, 2] = a * b * r[1, 2]
    out[2, 1] = a * b * r[2, 1]
    return out


def remad_map(rho: np.ndarray, p: MadParams) -> np.ndarray:
    """Output of the resonant MAD channel: MAD plus mixing of the 01 and 12 coherences."""
    r = np.asarray(rho, dtype=complex)
    out = mad_map(r, p)
    mix = np.sqrt(p.gamma1 * p.gamma2)
    out[0, 1] += mix * r[1, 2]
    out[1, 0] += mix * r[2, 1]
    return out


def _params(p) -> MadParams:
    return p if isinstance(p, MadParams) else MadParams(*p)


def make_mad(p) -> KrausChannel:
    p = _params(p)
    return kraus_from_map(lambda r: mad_map(r, p), 3)


def make_remad(p) -> KrausChannel:
    p = _params(p)
    return kraus_from_map(lambda r: remad_map(r, p), 3)


def make_identity(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),))


def make_depolarizing(dim: int, p: float) -> KrausChannel:
    """``rho -> (1 - p) rho + p I/dim`` through the Weyl-Heisenberg basis."""
    if dim < 2:
        raise InvalidParams("depolarizing channel needs dim >= 2")
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"depolarizing probability {p!r} outside [0, 1]")
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    ops = []
    for a in range(dim):
        for b in range(dim):
            weight = 1 - p + p / dim**2 if a == b == 0 else p / dim**2
            if weight > 0:
                w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
                ops.append(np.sqrt(weight) * w)
    return KrausChannel(tuple(ops))


def make_qubit_ad(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise InvalidParams(f"damping {gamma!r} outside [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return KrausChannel((k0, k1))


@dataclass(frozen=True)
class ChannelSpec:
    """Declarative channel description, the target of JSON deserialisation.

    ``params`` holds the kind-specific reals; for ``custom_kraus`` it holds
    the Kraus matrices themselves.
    """

    kind: str
    dim: int | None = None
    params: tuple = ()

    KINDS = ("identity", "depolarizing", "qubit_amplitude_damping", "mad", "remad", "custom_kraus")

    def build(self) -> KrausChannel:
        kind, dim, params = self.kind, self.dim, self.params
        if kind == "identity":
            return make_identity(dim or 3)
        if kind == "depolarizing":
            (p,) = _expect(params, 1, kind)
            return make_depolarizing(dim or 3, p)
        if kind == "qubit_amplitude_damping":
            (g,) = _expect(params, 1, kind)
            return make_qubit_ad(g)
        if kind == "mad":
            return make_mad(MadParams(*_expect(params, 3, kind)))
        if kind == "remad":
            return make_remad(MadParams(*_expect(params, 3, kind)))
        if kind == "custom_kraus":
            return KrausChannel(tuple(np.asarray(k, dtype=complex) for k in params))
        raise InvalidParams(f"unknown channel kind {kind!r}; expected one of {self.KINDS}")

    def describe(self) -> dict:
        if self.kind == "custom_kraus":
            return {"kind": self.kind, "n_kraus": len(self.params)}
        return {"kind": self.kind, "dim": self.dim, "params": [float(x) for x in self.params]}


def _expect(params, n: int, kind: str) -> tuple:
    if len(params) != n:
        raise InvalidParams(f"{kind} expects {n} parameter(s), got {len(params)}")
    return tuple(float(x) for x in params)

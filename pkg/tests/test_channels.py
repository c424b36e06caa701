import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from workcap.channels import (
    ChannelSpec,
    MadParams,
    choi_matrix,
    kraus_from_map,
    mad_map,
    make_depolarizing,
    make_identity,
    make_mad,
    make_qubit_ad,
    make_remad,
    remad_map,
)
from workcap.errors import InvalidParams, NotCP
from workcap.qops import ket, pure_state


def random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def assert_same_channel(a, b, d, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        rho = random_state(rng, d)
        assert np.allclose(a(rho), b(rho), atol=1e-13)


@pytest.mark.parametrize("make", [make_mad, make_remad])
def test_zero_damping_is_identity(make):
    assert_same_channel(make((0, 0, 0)), make_identity(3), 3)


def test_full_damping_to_ground():
    ch = make_mad((1, 0, 1))
    rng = np.random.default_rng(1)
    for _ in range(5):
        p = rng.dirichlet(np.ones(3))
        assert np.allclose(ch(np.diag(p)), ket(3, 0), atol=1e-14)


def test_mad_coherence_02():
    rho = np.array([[0.5, 0, 0.5], [0, 0, 0], [0.5, 0, 0.5]], dtype=complex)
    out = make_mad((0.3, 0.2, 0.6))(rho)
    assert out[0, 2] == pytest.approx(0.5 * math.sqrt(0.2), abs=1e-14)


def test_remad_diagonal_action_matches_mad():
    rng = np.random.default_rng(2)
    for _ in range(5):
        g1, g2 = rng.uniform(0, 1, 2)
        g3 = rng.uniform(0, 1 - g2)
        rho = np.diag(rng.dirichlet(np.ones(3))).astype(complex)
        assert np.allclose(make_mad((g1, g2, g3))(rho), make_remad((g1, g2, g3))(rho), atol=1e-14)


def test_remad_mixes_coherences():
    out = make_remad((0.3, 0.2, 0.6))(pure_state([0, 1, 1]))
    assert out[0, 1] == pytest.approx(math.sqrt(0.3 * 0.2) / 2, abs=1e-14)
    assert make_mad((0.3, 0.2, 0.6))(pure_state([0, 1, 1]))[0, 1] == pytest.approx(0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_kraus_reproduces_entrywise_maps(g1, g2, frac, seed):
    p = MadParams(g1, g2, frac * (1 - g2))
    rho = random_state(np.random.default_rng(seed), 3)
    assert np.allclose(make_mad(p)(rho), mad_map(rho, p), atol=1e-12)
    assert np.allclose(make_remad(p)(rho), remad_map(rho, p), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_remad_choi_is_psd(g1, g2, frac):
    p = MadParams(g1, g2, frac * (1 - g2))
    choi = choi_matrix(lambda r: remad_map(r, p), 3)
    assert np.linalg.eigvalsh(choi).min() > -1e-10


def test_non_cp_map_rejected():
    with pytest.raises(NotCP):
        kraus_from_map(lambda r: r.T, 2)


@pytest.mark.parametrize("bad", [(-0.1, 0, 0), (0.3, 1.1, 0), (0.3, 0.6, 0.6)])
def test_mad_params_validated(bad):
    with pytest.raises(InvalidParams):
        MadParams(*bad)


def test_mad_params_message_names_constraint():
    with pytest.raises(InvalidParams, match=r"gamma2 \+ gamma3"):
        MadParams(0.3, 0.5, 0.7)


def test_depolarizing_examples():
    assert_same_channel(make_depolarizing(3, 0.0), make_identity(3), 3)
    rho = random_state(np.random.default_rng(3), 4)
    assert np.allclose(make_depolarizing(4, 1.0)(rho), np.eye(4) / 4, atol=1e-14)
    assert np.allclose(make_depolarizing(3, 0.5)(ket(3, 2)), np.diag([1 / 6, 1 / 6, 2 / 3]), atol=1e-14)
    with pytest.raises(InvalidParams):
        make_depolarizing(3, 1.5)


def test_qubit_amplitude_damping_examples():
    assert_same_channel(make_qubit_ad(0.0), make_identity(2), 2)
    assert np.allclose(make_qubit_ad(1.0)(ket(2, 1)), ket(2, 0))
    assert np.allclose(make_qubit_ad(0.5)(ket(2, 1)), np.diag([0.5, 0.5]))
    with pytest.raises(InvalidParams):
        make_qubit_ad(-0.2)


def test_channel_spec_builds_every_kind():
    for spec in (
        ChannelSpec("identity", 3),
        ChannelSpec("depolarizing", 2, (0.3,)),
        ChannelSpec("qubit_amplitude_damping", None, (0.4,)),
        ChannelSpec("mad", None, (0.3, 0.2, 0.6)),
        ChannelSpec("remad", None, (0.3, 0.2, 0.6)),
        ChannelSpec("custom_kraus", None, (np.eye(2),)),
    ):
        ch = spec.build()
        assert np.allclose(ch.completeness(), np.eye(ch.dim_in))
        assert spec.describe()["kind"] == spec.kind
    with pytest.raises(InvalidParams):
        ChannelSpec("mad", None, (0.3, 0.2)).build()
    with pytest.raises(InvalidParams):
        ChannelSpec("erasure").build()

"""Splitter-tree transfer matrices and threshold-detector click statistics."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfnet.core import (
    ChannelModel,
    DomainError,
    Encoding,
    ProtocolParams,
    Relationship,
    RunConfig,
    run_pairing,
)
from qfnet.optics import (
    PulsePattern,
    click_probability,
    complement_rows,
    oracle_click_profile,
    sylvester_hadamard,
    transfer_rows,
    tree_transfer,
)

S2 = 1 / math.sqrt(2)


def test_transfer_rows_two_ports():
    np.testing.assert_allclose(
        transfer_rows(2), np.array([[S2, S2], [S2, -S2]]), atol=1e-15
    )


def test_transfer_rows_four_ports():
    # row layout: total sum, left-pair tap, pair difference, right-pair tap
    want = np.array(
        [
            [0.5, 0.5, 0.5, 0.5],
            [S2, -S2, 0, 0],
            [0.5, 0.5, -0.5, -0.5],
            [0, 0, S2, -S2],
        ]
    )
    np.testing.assert_allclose(transfer_rows(4), want, atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_transfer_rows_orthonormal(n):
    rows = transfer_rows(n)
    np.testing.assert_allclose(rows @ rows.T, np.eye(n), atol=1e-12)


def test_transfer_rows_rejects_bad_port_counts():
    for n in (0, 1, 3, 6):
        with pytest.raises(DomainError):
            transfer_rows(n)


def test_complement_rows_pair_each_output():
    # complement row i is the other output port of the final splitter that
    # feeds detector i: same support, orthogonal, unit norm
    for n in (2, 4, 8):
        rows = transfer_rows(n)
        comp = complement_rows(n)
        for i in range(n):
            assert np.linalg.norm(comp[i]) == pytest.approx(1.0, abs=1e-12)
            assert abs(rows[i] @ comp[i]) < 1e-12


def test_complement_rows_four_ports_explicit():
    comp = complement_rows(4)
    rows = transfer_rows(4)
    np.testing.assert_allclose(comp[0], rows[2], atol=1e-15)
    np.testing.assert_allclose(comp[2], rows[0], atol=1e-15)
    np.testing.assert_allclose(comp[1], [S2, S2, 0, 0], atol=1e-15)
    np.testing.assert_allclose(comp[3], [0, 0, S2, S2], atol=1e-15)


def test_sylvester_hadamard_identity():
    for n in (2, 4, 8):
        h = sylvester_hadamard(n)
        assert set(np.unique(h)) == {-1.0, 1.0}
        np.testing.assert_allclose(h @ h.T, n * np.eye(n), atol=1e-12)
    # the tree transfer is not the (normalized) Sylvester matrix beyond n=2:
    # the pair taps have zero support on the opposite pair
    assert np.any(transfer_rows(4) == 0.0)


def test_tree_transfer_interference_extremes():
    equal = tree_transfer(PulsePattern(phases=(1, 1), amplitude_scale=(0.3, 0.3)))
    assert equal.intensities[0] == pytest.approx(2 * 0.3**2, rel=1e-12)
    assert equal.intensities[1] == pytest.approx(0.0, abs=1e-15)
    flipped = tree_transfer(PulsePattern(phases=(1, -1), amplitude_scale=(0.3, 0.3)))
    assert flipped.intensities[0] == pytest.approx(0.0, abs=1e-15)
    assert flipped.intensities[1] == pytest.approx(2 * 0.3**2, rel=1e-12)


def test_tree_transfer_single_flip_four_ports():
    a = 0.7
    out = tree_transfer(PulsePattern(phases=(1, 1, 1, -1), amplitude_scale=(a,) * 4))
    np.testing.assert_allclose(
        out.intensities, [a**2, 0.0, a**2, 2 * a**2], atol=1e-12
    )
    assert out.total == pytest.approx(4 * a**2, rel=1e-12)


@given(
    st.integers(1, 3),
    st.lists(st.floats(0, 10), min_size=8, max_size=8),
    st.lists(st.booleans(), min_size=8, max_size=8),
)
def test_tree_transfer_conserves_energy(log_n, amps, flips):
    n = 2**log_n
    pattern = PulsePattern(
        phases=tuple(-1.0 if f else 1.0 for f in flips[:n]),
        amplitude_scale=tuple(amps[:n]),
    )
    out = tree_transfer(pattern)
    assert out.total == pytest.approx(sum(a * a for a in amps[:n]), abs=1e-9)


def test_pulse_pattern_validation():
    with pytest.raises(DomainError):
        PulsePattern(phases=(1.0, 0.5), amplitude_scale=(1.0, 1.0))
    with pytest.raises(DomainError):
        PulsePattern(phases=(1.0, 1.0, 1.0), amplitude_scale=(1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        PulsePattern(phases=(1.0, 1.0), amplitude_scale=(1.0, -1.0))
    # complex unit phases are fine (two-bit encoding uses +-i)
    PulsePattern(phases=(1.0, 1.0j), amplitude_scale=(1.0, 1.0))


# --- click probability ------------------------------------------------------


def test_click_probability_edges():
    assert click_probability(0.0, 0.0) == 0.0
    assert click_probability(0.0, 1e-7) == pytest.approx(1e-7)
    assert click_probability(50.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert click_probability(1e9, 0.5) == 1.0  # clamped


def test_click_probability_small_intensity_is_linear():
    # 1 - exp(-I) ~= I must survive at intensities far below float epsilon
    for i in (1e-9, 1e-12, 1e-15):
        assert click_probability(i, 0.0) == pytest.approx(i, rel=1e-6)


def test_click_probability_visibility_mixing():
    i, ic, nu, dark = 0.8, 0.1, 0.97, 1e-5
    want = nu * (1 - math.exp(-i)) + (1 - nu) * (1 - math.exp(-ic)) + dark
    got = click_probability(i, dark, visibility=nu, complement_intensity=ic)
    assert got == pytest.approx(want, rel=1e-12)


def test_click_probability_validation():
    with pytest.raises(DomainError):
        click_probability(-1.0, 0.0)
    with pytest.raises(DomainError):
        click_probability(1.0, -0.1)
    with pytest.raises(DomainError):
        click_probability(1.0, 0.0, visibility=1.5)
    with pytest.raises(DomainError):
        click_probability(1.0, 0.0, complement_intensity=-2.0)


@given(st.floats(0, 5), st.floats(0, 5))
def test_click_probability_monotone_in_intensity(i1, i2):
    lo, hi = sorted((i1, i2))
    assert click_probability(lo, 0.0) <= click_probability(hi, 0.0) + 1e-15


# --- enumeration oracle sanity ----------------------------------------------


def _four_party_setup():
    pp = ProtocolParams(n=1000, c=2.0, delta=0.22, epsilon=1e-3, N=4)
    ch = ChannelModel(eta=(0.5, 0.5, 0.5, 0.5), dark_count=1e-6)
    run = RunConfig(
        alphas=(3.0, 3.0, 3.0, 3.0),
        pairing=run_pairing(1),
        thresholds=(0, 0, 0),
    )
    return pp, ch, run


def test_oracle_profile_shape_and_range():
    pp, ch, run = _four_party_setup()
    prof = oracle_click_profile(Relationship.from_label("AABC"), run, ch, pp)
    assert len(prof.per_detector) == 4
    assert prof.pulses == pp.m
    assert all(0.0 <= p <= 1.0 for p in prof.per_detector)


def test_oracle_all_equal_difference_ports_see_dark_only():
    pp, ch, run = _four_party_setup()
    prof = oracle_click_profile(Relationship.from_label("AAAA"), run, ch, pp)
    # with perfect visibility the difference ports click on dark counts only
    for d in (1, 2, 3):
        assert prof.per_detector[d] == pytest.approx(ch.dark_count, rel=1e-12)
    assert prof.per_detector[0] > ch.dark_count


def test_oracle_size_mismatch_rejected():
    pp, ch, run = _four_party_setup()
    with pytest.raises(DomainError):
        oracle_click_profile(Relationship.from_label("AB"), run, ch, pp)

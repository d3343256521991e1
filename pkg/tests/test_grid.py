import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcsbh.coherent import GCSParams
from gcsbh.grid import (
    VON_NEUMANN_SPACING,
    GlauberPoint,
    GridMode,
    GridSpec,
    SpacingWarning,
    bloch_coordinates,
    build_lattice,
    default_extent,
    export_bloch_csv,
    export_states_csv,
    gram_condition,
    gram_matrix,
    sample_ensemble,
    to_gcs,
)

SP = VON_NEUMANN_SPACING
TWO = np.array([-math.sqrt(0.7), math.sqrt(0.3)])


def half_i(M):
    xi = np.zeros(M, dtype=complex)
    xi[:2] = [1 / math.sqrt(2), 1j / math.sqrt(2)]
    return xi


def test_diagonal_lattice_25_points():
    spec = GridSpec(M=2, S=50, center=TWO, N=25, beta=SP / 4, mode="diagonal", extent=2)
    pts = build_lattice(spec)
    assert len(pts) == 25
    assert np.array_equal(pts[0].z, TWO.astype(complex))
    for p in pts:
        (m1, n1), (m2, n2) = p.indices
        assert (m1, n1) == (m2, n2)
        assert np.allclose(p.z, TWO + spec.beta * (m1 + 1j * n1))


def test_lattice_points_on_grid():
    spec = GridSpec(M=3, S=5, center=half_i(3), N=40, beta=0.3, seed=4)
    for p in build_lattice(spec):
        lab = (p.z - spec.center.xi) / spec.beta
        assert np.allclose(lab, np.round(lab.real) + 1j * np.round(lab.imag))


def test_random_determinism():
    spec = GridSpec(M=3, S=20, center=half_i(3), N=50, seed=11)
    a = sample_ensemble(spec)
    b = sample_ensemble(GridSpec(M=3, S=20, center=half_i(3), N=50, seed=11))
    assert all(np.array_equal(x.xi, y.xi) for x, y in zip(a, b))
    c = sample_ensemble(GridSpec(M=3, S=20, center=half_i(3), N=50, seed=12))
    assert not all(np.array_equal(x.xi, y.xi) for x, y in zip(a, c))


def test_six_mode_500_distinct():
    spec = GridSpec(M=6, S=20, center=half_i(6), N=500, beta=SP / 32)
    pts = build_lattice(spec)
    assert len({p.indices for p in pts}) == 500
    assert len(sample_ensemble(spec)) == 500


def test_six_mode_800_von_neumann():
    states = sample_ensemble(GridSpec(M=6, S=20, center=half_i(6), N=800, beta=SP))
    assert len(states) == 800


def test_capacity_errors():
    with pytest.raises(ValueError, match="available"):
        GridSpec(M=2, S=5, center=TWO, N=26, mode="diagonal", extent=2)
    with pytest.raises(ValueError):
        GridSpec(M=2, S=5, center=TWO, N=5, beta=0.0)
    with pytest.raises(ValueError):
        GridSpec(M=3, S=5, center=TWO, N=5)


def test_spacing_warning():
    with pytest.warns(SpacingWarning):
        GridSpec(M=2, S=5, center=TWO, N=3, beta=2.0)


def test_default_extent():
    assert default_extent(2, 25, GridMode.DIAGONAL) == 5
    assert (2 * default_extent(3, 50, "random") + 1) ** 6 >= 200
    assert default_extent(2, 1, "random") == 1


def test_to_gcs_examples():
    assert np.allclose(to_gcs(GlauberPoint(TWO.astype(complex)), 5).xi, TWO)
    assert np.allclose(to_gcs(GlauberPoint(np.array([2, 0j])), 5).xi, [1, 0])
    assert np.allclose(to_gcs(np.array([1 + 1j, 1 - 1j]), 5).xi, [(1 + 1j) / 2, (1 - 1j) / 2])
    with pytest.raises(ValueError):
        to_gcs(np.zeros(2), 5)


def test_bloch_examples():
    assert bloch_coordinates([1, 0]) == pytest.approx((0, 0))
    r = 1 / math.sqrt(2)
    assert bloch_coordinates([r, r]) == pytest.approx((math.pi / 2, 0))
    assert bloch_coordinates([r, 1j * r]) == pytest.approx((math.pi / 2, math.pi / 2))
    with pytest.raises(ValueError):
        bloch_coordinates([1, 0, 0])


@given(st.integers(0, 2**31), st.floats(0.05, 2 * math.pi))
def test_bloch_roundtrip_removes_global_phase(seed, gphase):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    th, ph = bloch_coordinates(v)
    th2, ph2 = bloch_coordinates(v * np.exp(1j * gphase))
    assert 0 <= th <= math.pi and 0 <= ph < 2 * math.pi
    assert th == pytest.approx(th2, abs=1e-9)
    assert min(abs(ph - ph2), 2 * math.pi - abs(ph - ph2)) < 1e-9
    rebuilt = np.array([math.cos(th / 2), math.sin(th / 2) * np.exp(1j * ph)])
    assert abs(abs(np.vdot(rebuilt, v)) - 1) < 1e-9


def test_mean_field_basis():
    states = sample_ensemble(GridSpec(M=2, S=50, center=TWO, N=1))
    assert len(states) == 1 and np.array_equal(states[0].xi, TWO.astype(complex))


def test_diagonal_gram_finite():
    spec = GridSpec(M=2, S=50, center=TWO, N=25, beta=SP / 4, mode="diagonal", extent=2)
    states = sample_ensemble(spec)
    assert len(states) == 25
    assert np.isfinite(gram_condition(states))


def test_zero_point_skipped():
    # with centre (r, r) and spacing r the label ((-1, 0), (-1, 0)) lands on z = 0
    r = 1 / math.sqrt(2)
    spec = GridSpec(M=2, S=4, center=np.array([r, r]), N=30, beta=r, extent=1)
    z = [p.z for p in build_lattice(GridSpec(M=2, S=4, center=np.array([r, r]), N=81,
                                             beta=r, extent=1))]
    assert any(np.all(v == 0) for v in z)
    states = sample_ensemble(spec)
    assert len(states) == 30
    assert all(np.all(np.isfinite(s.xi)) for s in states)


def test_projective_duplicates_removed():
    # for a centre with equal components every diagonal point is (w, w), i.e. the centre again
    r = 1 / math.sqrt(2)
    spec = GridSpec(M=2, S=3, center=np.array([r, r]), N=9, beta=0.25, mode="diagonal", extent=1)
    with pytest.raises(ValueError, match="exhausted after 1 "):
        sample_ensemble(spec)


@given(st.integers(2, 4), st.integers(1, 40), st.integers(0, 2**31),
       st.sampled_from([SP, SP / 4, SP / 16]))
def test_sample_invariants(M, N, seed, beta):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=M) + 1j * rng.normal(size=M)
    c /= np.linalg.norm(c)
    spec = GridSpec(M=M, S=10, center=c, N=N, beta=beta, seed=seed)
    states = sample_ensemble(spec)
    assert len(states) == N
    assert np.allclose(states[0].xi, c)
    xi = np.array([s.xi for s in states])
    assert np.all(np.abs(np.sum(np.abs(xi) ** 2, axis=1) - 1) <= 1e-14)
    ov = np.abs(xi.conj() @ xi.T)
    np.fill_diagonal(ov, 0)
    assert np.all(ov <= 1 - 1e-12)
    assert np.linalg.eigvalsh(gram_matrix(states)).min() >= -1e-10


def test_condition_grows_as_spacing_shrinks():
    conds = []
    # below the well-conditioned spacing around sqrt(pi)/4 the states crowd together
    for div in (4, 8, 16):
        spec = GridSpec(M=2, S=50, center=TWO, N=25, beta=SP / div, mode="diagonal", extent=2)
        conds.append(gram_condition(sample_ensemble(spec)))
    assert conds[0] < conds[1] < conds[2]


def test_exports(tmp_path):
    spec = GridSpec(M=2, S=5, center=TWO, N=4, seed=1)
    states = sample_ensemble(spec)
    p = export_states_csv(states, tmp_path / "s.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "basis_index,mode_index,re_xi,im_xi" and len(lines) == 9
    q = export_bloch_csv(states, tmp_path / "b.csv")
    assert len(q.read_text().splitlines()) == 5


def test_gcsparams_center_accepted():
    spec = GridSpec(M=2, S=5, center=GCSParams(TWO, 5), N=3)
    assert spec.center.S == 5

"""Meta-atom circuit model tests.

The impedance oracle value below was computed independently with mpmath at
50 decimal digits from the two-branch circuit formula; the matched-load
construction inverts the circuit analytically so the forward evaluation
must land on Z0.
"""
import numpy as np
import pytest

from irslink import metaatom
from irslink.errors import ConfigurationError, SingularityError
from irslink.metaatom import (CapacitanceBounds, CircuitProfile, default_profile,
                              expand_groups, impedance, interpolate_profile,
                              load_profile_csv, phase_sweep_deg,
                              reflection_coefficient, reflection_from_impedance,
                              reflection_vector, save_profile_csv)

Z0 = 376.73

# mpmath, 50 digits: Z(C=1 pF) and Gamma(C=1 pF) for the default profile.
Z_1PF_ORACLE = 45.359153471764744827 - 277.65699457856779627j
GAMMA_1PF_ORACLE = -0.24593135847896471003 - 0.81959357069715118281j


def test_impedance_matches_high_precision_oracle():
    z = impedance(1.0e-12, 30.0, default_profile())
    assert abs(z - Z_1PF_ORACLE) / abs(Z_1PF_ORACLE) < 1e-12


def test_reflection_matches_high_precision_oracle():
    g = reflection_coefficient(1.0e-12, 30.0, default_profile())
    assert abs(g - GAMMA_1PF_ORACLE) < 1e-12


def test_lossless_profile_gives_purely_imaginary_impedance():
    prof = CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([1.0e-9]),
                          c_t=np.array([0.7e-12]), r_t=np.array([0.0]),
                          l_b=np.array([1.5e-9]))
    for c in (0.4e-12, 1.0e-12, 2.7e-12):
        z = impedance(c, 0.0, prof)
        assert z.real == 0.0
        g = reflection_coefficient(c, 0.0, prof)
        assert abs(abs(g) - 1.0) < 1e-12


def test_impedance_singularity_raises():
    # f = 1/(2 pi) makes w = 1 up to rounding; with L_T = C_T = L_B = C = 1
    # and R_T = 0 the denominator j(2w - 2/w) collapses to ~1e-16 ohm.
    prof = CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([1.0]),
                          c_t=np.array([1.0]), r_t=np.array([0.0]),
                          l_b=np.array([1.0]), f=1.0 / (2.0 * np.pi))
    with pytest.raises(SingularityError) as err:
        impedance(1.0, 0.0, prof)
    assert "C=" in str(err.value) and "theta=" in str(err.value)


def test_matched_network_reflects_nothing():
    # Invert the circuit: pick L_B, solve for R_T and C so Z(C) = Z0 exactly.
    f = 5.195e9
    w = 2.0 * np.pi * f
    lb = 1.5e-9
    b = w * lb
    rt = Z0 * b * b / (b * b + Z0 * Z0)
    x_target = -Z0 * Z0 * b / (b * b + Z0 * Z0)  # required series reactance
    lt, ct = 1.0e-9, 1.0e-12
    inv_wc = w * lt - 1.0 / (w * ct) - x_target
    assert inv_wc > 0
    c = 1.0 / (w * inv_wc)
    prof = CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([lt]),
                          c_t=np.array([ct]), r_t=np.array([rt]),
                          l_b=np.array([lb]), f=f, z0=Z0)
    assert abs(reflection_coefficient(c, 0.0, prof)) < 1e-12


def test_reflection_from_impedance_closed_forms():
    assert reflection_from_impedance(3.0 * Z0, Z0) == pytest.approx(0.5)
    # purely reactive load: unit magnitude
    for x in (-250.0, 10.0, 415.0):
        assert abs(abs(reflection_from_impedance(1j * x, Z0)) - 1.0) < 1e-12
    with pytest.raises(SingularityError):
        reflection_from_impedance(-Z0, Z0)


def test_passivity_on_dense_grid():
    prof = default_profile()
    c = np.linspace(0.4e-12, 2.7e-12, 50)
    theta = np.linspace(0.0, 90.0, 50)
    gamma = metaatom.gamma_grid(prof, c, theta)
    assert np.all(np.abs(gamma) <= 1.0 + 1e-9)


def test_phase_sweep_exceeds_300_degrees():
    sweep = phase_sweep_deg(default_profile(), CapacitanceBounds(0.4e-12, 2.7e-12))
    assert sweep > 300.0


def _two_point_profile():
    return CircuitProfile(theta_deg=np.array([0.0, 90.0]),
                          l_t=np.array([1.0e-9, 3.0e-9]),
                          c_t=np.array([0.7e-12, 0.9e-12]),
                          r_t=np.array([1.0, 2.0]),
                          l_b=np.array([1.5e-9, 2.5e-9]))


def test_interpolation_midpoint_is_arithmetic_mean():
    prof = _two_point_profile()
    lt, ct, rt, lb = interpolate_profile(prof, 45.0)
    assert lt == pytest.approx(2.0e-9)
    assert ct == pytest.approx(0.8e-12)
    assert rt == pytest.approx(1.5)
    assert lb == pytest.approx(2.0e-9)


def test_interpolation_exact_at_samples_bitwise():
    prof = _two_point_profile()
    for i, theta in enumerate(prof.theta_deg):
        lt, ct, rt, lb = interpolate_profile(prof, theta)
        assert float(lt) == prof.l_t[i]
        assert float(ct) == prof.c_t[i]
        assert float(rt) == prof.r_t[i]
        assert float(lb) == prof.l_b[i]


def test_interpolation_constant_beyond_sampled_range():
    prof = CircuitProfile(theta_deg=np.array([30.0, 60.0]),
                          l_t=np.array([1.0e-9, 3.0e-9]),
                          c_t=np.array([0.7e-12, 0.9e-12]),
                          r_t=np.array([1.0, 2.0]),
                          l_b=np.array([1.5e-9, 2.5e-9]))
    lt_low, _, _, _ = interpolate_profile(prof, 0.0)
    lt_high, _, _, _ = interpolate_profile(prof, 90.0)
    assert float(lt_low) == 1.0e-9
    assert float(lt_high) == 3.0e-9


def test_interpolation_rejects_angles_outside_domain():
    prof = default_profile()
    with pytest.raises(ValueError):
        interpolate_profile(prof, -1.0)
    with pytest.raises(ValueError):
        interpolate_profile(prof, 90.5)


def test_profile_validation_errors():
    one = np.array([1.0])
    with pytest.raises(ConfigurationError):
        CircuitProfile(theta_deg=np.array([]), l_t=one[:0], c_t=one[:0],
                       r_t=one[:0], l_b=one[:0])
    with pytest.raises(ConfigurationError):  # unsorted angles
        CircuitProfile(theta_deg=np.array([50.0, 10.0]), l_t=np.array([1e-9, 1e-9]),
                       c_t=np.array([1e-12, 1e-12]), r_t=np.array([1.0, 1.0]),
                       l_b=np.array([1e-9, 1e-9]))
    with pytest.raises(ConfigurationError):  # negative inductance
        CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([-1e-9]),
                       c_t=np.array([1e-12]), r_t=np.array([1.0]),
                       l_b=np.array([1e-9]))
    with pytest.raises(ConfigurationError):  # NaN
        CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([np.nan]),
                       c_t=np.array([1e-12]), r_t=np.array([1.0]),
                       l_b=np.array([1e-9]))


def test_profile_csv_round_trip(tmp_path):
    prof = _two_point_profile()
    path = tmp_path / "profile.csv"
    save_profile_csv(prof, path)
    back = load_profile_csv(path, f=prof.f, z0=prof.z0)
    # theta and R_T are stored unscaled (exact); the pF/nH columns go
    # through one divide-multiply cycle, so allow a couple of ulps.
    np.testing.assert_array_equal(back.theta_deg, prof.theta_deg)
    np.testing.assert_array_equal(back.r_t, prof.r_t)
    np.testing.assert_allclose(back.l_t, prof.l_t, rtol=1e-14)
    np.testing.assert_allclose(back.c_t, prof.c_t, rtol=1e-14)
    np.testing.assert_allclose(back.l_b, prof.l_b, rtol=1e-14)


@pytest.mark.parametrize("content,fragment", [
    ("", "empty"),
    ("bad,header\n1,2\n", "header"),
    ("theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH\n", "no data"),
    ("theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH\n0,1,nan,1,1\n", "non-finite"),
    ("theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH\n0,1,x,1,1\n", "numeric"),
    ("theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH\n0,1,1,1,1\n0,2,1,1,1\n", "duplicate"),
    ("theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH\n50,1,1,1,1\n10,2,1,1,1\n", "sorted"),
], ids=["empty", "header", "nodata", "nan", "nonnumeric", "dup", "unsorted"])
def test_profile_csv_strict_parse(tmp_path, content, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(ConfigurationError) as err:
        load_profile_csv(path)
    assert fragment in str(err.value)


def test_expand_groups_layout():
    q = np.array([1.0, 2.0])
    np.testing.assert_array_equal(expand_groups(q, 6, 2), [1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
    with pytest.raises(ConfigurationError):
        expand_groups(q, 7, 2)  # not divisible
    with pytest.raises(ConfigurationError):
        expand_groups(q, 6, 3)  # wrong codeword length


def test_expand_groups_multiset():
    rng = np.random.default_rng(3)
    q = rng.uniform(0.4e-12, 2.7e-12, 5)
    full = expand_groups(q, 20, 5)
    values, counts = np.unique(full, return_counts=True)
    assert set(values) == set(q)
    assert np.all(counts == 4)


def test_reflection_vector_matches_per_element_loop():
    prof = _two_point_profile()
    rng = np.random.default_rng(11)
    q = rng.uniform(0.4e-12, 2.7e-12, 4)
    vec = reflection_vector(q, 37.0, prof, 12, 4)
    assert vec.shape == (12,)
    per_element = expand_groups(q, 12, 4)
    for i in range(12):
        assert vec[i] == reflection_coefficient(per_element[i], 37.0, prof)
    assert len(np.unique(vec)) == 4


def test_capacitance_bounds_validation():
    with pytest.raises(ConfigurationError):
        CapacitanceBounds(2.7e-12, 0.4e-12)
    with pytest.raises(ConfigurationError):
        CapacitanceBounds(0.0, 1e-12)
    b = CapacitanceBounds(0.4e-12, 2.7e-12)
    np.testing.assert_array_equal(b.clip(np.array([0.0, 1e-12, 5e-12])),
                                  [0.4e-12, 1e-12, 2.7e-12])


def test_impedance_rejects_bad_capacitance():
    with pytest.raises(ValueError):
        impedance(0.0, 0.0, default_profile())
    with pytest.raises(ValueError):
        impedance(-1e-12, 0.0, default_profile())

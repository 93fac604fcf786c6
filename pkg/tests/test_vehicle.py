import numpy as np
import pytest
import yaml
from hypothesis import given, strategies as st

from comshift.vehicle import (
    ConfigError,
    LimitViolation,
    MassState,
    VehicleParams,
    check_plate_position,
    com_displacement,
    inertia_matrix,
    load_vehicle,
    params_from_dict,
    step_plate,
    with_overrides,
)


def test_bundled_vehicle_reaches_full_offset(params):
    assert params.m == 3.12
    assert params.l_max_com == pytest.approx(0.48)
    assert params.l_max == pytest.approx(0.48)
    assert com_displacement(params.l_max, params) == pytest.approx(params.L)


def test_com_displacement_examples(params):
    assert com_displacement(0.0, params) == 0.0
    half = with_overrides(params, m_S=1.56)
    assert com_displacement(0.18, half) == pytest.approx(0.09)


@pytest.mark.parametrize("l, I_yy, I_zz", [
    (0.0, 0.0538, 0.0795),
    (0.3, 0.0979, 0.52 * 0.09 + 0.0795),
    (0.18, 0.49 * 0.0324 + 0.0538, 0.096348),
])
def test_inertia_regression_values(params, l, I_yy, I_zz):
    I = inertia_matrix(l, params)
    assert np.allclose(np.diag(I), [0.0444, I_yy, I_zz])
    assert np.count_nonzero(I - np.diag(np.diag(I))) == 0


def test_plate_limits_name_the_bound(params):
    with pytest.raises(LimitViolation) as exc:
        check_plate_position(0.5, params)
    assert exc.value.bound == "l <= (m/m_S)*L"
    with pytest.raises(LimitViolation) as exc:
        check_plate_position(-0.01, params)
    assert exc.value.bound == "l >= 0"
    short = with_overrides(params, L0=0.2)
    with pytest.raises(LimitViolation) as exc:
        check_plate_position(0.3, short)
    assert exc.value.bound == "l <= L+L0-0.5*l_S"


def test_step_plate_examples(params):
    assert step_plate(0.0, 0.0, 0.004, params) == 0.0
    assert step_plate(0.0, 0.18, 1.0, params) == pytest.approx(0.001)
    assert step_plate(0.1795, 0.18, 10.0, params) == 0.18
    with pytest.raises(LimitViolation):
        step_plate(0.0, 1.0, 0.004, params)
    with pytest.raises(ValueError):
        step_plate(0.0, 0.1, 0.0, params)


@given(st.floats(0.0, 0.48), st.floats(0.0, 0.48))
def test_com_is_linear_in_plate_position(l1, l2):
    p = load_vehicle()
    slope = p.m_S / p.m
    assert com_displacement(l1, p) - com_displacement(l2, p) == pytest.approx(slope * (l1 - l2), abs=1e-15)


@given(st.floats(0.0, 2.0))
def test_inertia_never_below_empty_plate(l):
    p = load_vehicle()
    assert np.all(np.diag(inertia_matrix(l, p)) >= np.diag(inertia_matrix(0.0, p)))


@given(st.floats(0.0, 0.48), st.floats(0.0, 0.48), st.floats(1e-4, 50.0))
def test_step_plate_rate_limit_and_no_overshoot(l, cmd, dt):
    p = load_vehicle()
    nxt = step_plate(l, cmd, dt, p)
    assert abs(nxt - l) <= p.v_plate * dt + 1e-15
    assert min(l, cmd) - 1e-15 <= nxt <= max(l, cmd) + 1e-15


def test_mass_state_consistency(params):
    ms = MassState.at(0.18, params)
    assert ms.d == pytest.approx(params.m_S / params.m * 0.18)
    assert ms.I.shape == (3, 3)


@pytest.mark.parametrize("bad", [dict(m_S=4.0), dict(L=-0.1), dict(k_t=0.0), dict(alpha_range=(-2.0, 0.5))])
def test_invalid_params_rejected(bad):
    with pytest.raises(ConfigError):
        VehicleParams(**bad)


def test_config_round_trip(tmp_path):
    cfg = {"vehicle": {"mass_kg": 3.0, "com_limit_m": 0.40, "arm_x_m": 0.12, "omega_max_rad_s": 900.0,
                       "inertia": {"Ixx_kg_m2": 0.05}}}
    path = tmp_path / "v.yaml"
    path.write_text(yaml.safe_dump(cfg))
    p = load_vehicle(path)
    assert p.m == 3.0 and p.L == 0.12
    assert p.l_max_com == pytest.approx(0.40)
    assert p.inertia_coeffs.I_xx == 0.05


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        params_from_dict({"mass": 3.0})
    with pytest.raises(ConfigError):
        params_from_dict({"inertia": {"Iyy": 1.0}})

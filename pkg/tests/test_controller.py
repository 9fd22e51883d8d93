import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from swarmctl.controller import (ControllerSpec, ControllerSpecError, EvaluationError, clamp_speed,
                                 evaluate, evaluate_batch, flatten_params, with_params)
from swarmctl.measurements import MeasurementFrame, ScalarExpr, ScalarSource as SS, VectorExpr, VectorSource as VS
from swarmctl.presets import COHESION_PARAMS, FLOCKING_PARAMS, cohesion_controller, flocking_controller


def spec_of(params, vmax=1000.0):
    params = np.asarray(params, dtype=float)
    m, n = params.shape
    return ControllerSpec(params, [ScalarExpr(SS.CONSTANT)] * n, [VectorExpr(VS.UNIT_TO_ORIGIN)] * m, vmax)


def explicit_sum(params, scalars, vectors):
    """Coefficient-by-coefficient expansion of the control law."""
    vx = vy = 0.0
    for j in range(len(params)):
        c = 0.0
        for i in range(len(scalars)):
            c += params[j][i] * scalars[i]
        vx += c * vectors[j][0]
        vy += c * vectors[j][1]
    return np.array([vx, vy])


def test_matrix_example():
    out = evaluate(spec_of([[1, 2], [3, 4]]), MeasurementFrame([5, 6], [[1, 0], [0, 1]]))
    assert np.array_equal(out.coefficients, [17, 39])
    assert np.array_equal(out.velocity, [17, 39])


def test_flocking_example_velocity():
    spec = ControllerSpec(FLOCKING_PARAMS, flocking_controller().scalar_exprs,
                          flocking_controller().vector_exprs, 1000.0)
    frame = MeasurementFrame([1, 0, 1], [[1, 0], [-1, 0], [1, 0], [0, 1], [0, 0]])
    out = evaluate(spec, frame)
    assert np.array_equal(out.coefficients, [-50, 0, 0.5, 25, 10])
    assert np.allclose(out.velocity, [-49.5, 25])


def test_zero_params_give_zero_velocity():
    out = evaluate(spec_of(np.zeros((3, 2))), MeasurementFrame([4, -2], np.ones((3, 2))))
    assert np.array_equal(out.velocity, [0, 0])


def test_speed_is_clamped_radially():
    out = evaluate(spec_of([[3.0], [4.0]], vmax=1.0), MeasurementFrame([1], [[1, 0], [0, 1]]))
    assert np.allclose(out.velocity, [0.6, 0.8])


def test_flatten_is_row_major():
    assert flatten_params(spec_of([[1, 2], [3, 4]])) == [1, 2, 3, 4]


def test_cohesion_matrix_round_trip():
    spec = cohesion_controller()
    flat = flatten_params(spec)
    assert len(flat) == 30
    assert np.array_equal(with_params(spec, flat).params, COHESION_PARAMS)


def test_with_params_rejects_wrong_length():
    with pytest.raises(ControllerSpecError):
        with_params(spec_of([[1, 2], [3, 4]]), [1, 2, 3])


@pytest.mark.parametrize("kw", [
    dict(params=[[1, 2]], n=1, m=1),
    dict(params=[[np.inf]], n=1, m=1),
    dict(params=[[1.0]], n=1, m=1, vmax=0.0),
])
def test_invalid_specs(kw):
    with pytest.raises(ControllerSpecError):
        ControllerSpec(kw["params"], [ScalarExpr(SS.CONSTANT)] * kw["n"],
                       [VectorExpr(VS.UNIT_TO_ORIGIN)] * kw["m"], kw.get("vmax", 1.0))


def test_params_are_read_only():
    spec = spec_of([[1.0]])
    with pytest.raises(ValueError):
        spec.params[0, 0] = 2.0


def test_frame_shape_mismatch():
    with pytest.raises(ControllerSpecError):
        evaluate(spec_of([[1, 2]]), MeasurementFrame([1], [[1, 0]]))


def test_overflow_raises():
    with pytest.raises(EvaluationError):
        evaluate(spec_of([[1e300]]), MeasurementFrame([1e300], [[1, 0]]))


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    spec = spec_of(rng.normal(size=(3, 4)), vmax=2.0)
    S, V = rng.normal(size=(7, 4)), rng.normal(size=(7, 3, 2))
    vel, coeffs = evaluate_batch(spec, S, V)
    for a in range(7):
        out = evaluate(spec, MeasurementFrame(S[a], V[a]))
        assert np.allclose(out.velocity, vel[a], atol=1e-14)
        assert np.allclose(out.coefficients, coeffs[a], atol=1e-14)


dims = st.tuples(st.integers(1, 5), st.integers(1, 5))
unit = st.floats(-1, 1)


@given(dims.flatmap(lambda mn: st.tuples(arrays(float, mn, elements=unit),
                                         arrays(float, mn[1], elements=unit),
                                         arrays(float, (mn[0], 2), elements=unit))))
def test_matrix_form_equals_expansion(case):
    P, S, V = case
    out = evaluate(spec_of(P), MeasurementFrame(S, V))
    assert np.allclose(out.velocity, explicit_sum(P, S, V), rtol=0, atol=1e-12)


@given(arrays(float, (6, 2), elements=st.floats(-100, 100)), st.floats(0.1, 10))
def test_clamp_never_exceeds_vmax_and_keeps_direction(raw, vmax):
    out = clamp_speed(raw, vmax)
    speed = np.hypot(out[:, 0], out[:, 1])
    assert np.all(speed <= vmax * (1 + 1e-12))
    assert np.allclose(raw[:, 0] * out[:, 1] - raw[:, 1] * out[:, 0], 0.0, atol=1e-9)


@given(dims.flatmap(lambda mn: arrays(float, mn, elements=st.floats(-1e3, 1e3))))
def test_flatten_round_trip(P):
    spec = spec_of(P)
    assert with_params(spec, flatten_params(spec)) == spec

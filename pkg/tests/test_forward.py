import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfwlines.forward import (
    DimensionError,
    Observation,
    apply,
    certificate,
    certificate_grad,
    objective,
    residual,
)
from sfwlines.kernels import CLConfig, GLConfig, kernel_image
from sfwlines.measures import DiscreteMeasure, ParamPoint, prune

GL = GLConfig(1.0, 1.0, 16)
CL = CLConfig(0.05, 48)


def two_lines():
    return DiscreteMeasure.from_arrays([-4.0, 6.0], [0.3, -0.5], [1.0, 0.7])


def test_observation_shapes():
    obs = Observation.from_image(np.arange(9.0).reshape(3, 3))
    assert obs.side == 3
    assert obs.image()[1, 2] == 5.0
    with pytest.raises(DimensionError):
        Observation(np.zeros(8), 3)
    with pytest.raises(DimensionError):
        Observation.from_image(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        obs.pixels[0] = 1.0


def test_apply_examples():
    assert not np.any(apply(GL, DiscreteMeasure()).pixels)
    x = ParamPoint(2.5, 0.4)
    one = apply(GL, DiscreteMeasure((x,), (2.0,)))
    np.testing.assert_array_equal(one.pixels, 2.0 * kernel_image(GL, x))
    m = two_lines()
    parts = [apply(GL, DiscreteMeasure((p,), (a,))).pixels for p, a in zip(m.points, m.amplitudes)]
    np.testing.assert_allclose(apply(GL, m).pixels, parts[0] + parts[1], rtol=1e-12)


def test_apply_linear_in_concatenation():
    m1 = two_lines()
    m2 = DiscreteMeasure.from_arrays([0.0], [1.1], [-0.4])
    both = DiscreteMeasure(m1.points + m2.points, m1.amplitudes + m2.amplitudes)
    np.testing.assert_allclose(apply(GL, both).pixels,
                               apply(GL, m1).pixels + apply(GL, m2).pixels, rtol=1e-12, atol=1e-15)


def test_residual_examples():
    rng = np.random.default_rng(0)
    y = Observation(rng.normal(size=GL.N ** 2), GL.N)
    assert residual(GL, DiscreteMeasure(), y) == y
    m = two_lines()
    assert not np.any(residual(GL, m, apply(GL, m)).pixels)
    with pytest.raises(DimensionError):
        residual(GL, m, Observation(np.zeros(16), 4))


def test_objective_examples():
    rng = np.random.default_rng(1)
    y = rng.normal(size=GL.N ** 2)
    assert objective(GL, DiscreteMeasure(), y, 0.5) == pytest.approx(0.5 * y @ y)
    m = two_lines()
    assert objective(GL, m, apply(GL, m), 0.3) == pytest.approx(0.3 * 1.7)
    with pytest.raises(ValueError):
        objective(GL, m, y, 0.0)


def test_objective_convex_along_amplitude_rays():
    rng = np.random.default_rng(2)
    m = two_lines()
    y = apply(GL, m).pixels + 0.1 * rng.normal(size=GL.N ** 2)
    ts = np.linspace(0, 3, 31)
    vals = np.array([objective(GL, m.with_amplitudes(t * m.alphas), y, 1.0) for t in ts])
    assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-9)


def test_zero_amplitude_spikes_are_free():
    y = np.random.default_rng(3).normal(size=GL.N ** 2)
    m = DiscreteMeasure.from_arrays([1.0, 2.0, 3.0], [0.1, 0.2, 0.3], [0.5, 0.0, 1.0])
    assert objective(GL, m, y, 2.0) - objective(GL, prune(m, 0.0), y, 2.0) == 0.0


@pytest.mark.parametrize("model,x0", [(GL, ParamPoint(1.5, 0.2)), (CL, ParamPoint(0.4, 0.3))])
def test_certificate_of_single_atom(model, x0):
    phi = kernel_image(model, x0)
    assert certificate(model, DiscreteMeasure(), phi, 1.0, x0) == pytest.approx(phi @ phi, rel=1e-12)
    m = DiscreteMeasure((x0,), (1.0,))
    assert certificate(model, m, phi, 1.0, ParamPoint(0.0, 0.0)) == 0.0
    assert certificate_grad(model, m, phi, 1.0, x0) == (0.0, 0.0)


def test_adjoint_identity():
    rng = np.random.default_rng(4)
    r = rng.normal(size=GL.N ** 2)
    x = ParamPoint(-2.0, 0.9)
    alpha = 1.7
    lhs = apply(GL, DiscreteMeasure((x,), (alpha,))).pixels @ r
    assert lhs == pytest.approx(alpha * certificate(GL, DiscreteMeasure(), r, 1.0, x), rel=1e-12)


@pytest.mark.parametrize("model", [GL, CL])
def test_certificate_grad_matches_fd(model):
    rng = np.random.default_rng(5)
    d = model.default_domain()
    m = DiscreteMeasure.from_arrays([d.center().eta], [0.2], [0.5])
    y = rng.normal(size=model.N ** 2)
    h = 1e-5
    for _ in range(20):
        x = ParamPoint(rng.uniform(d.eta_min / 2, d.eta_max / 2) if model.kind == "gl" else rng.uniform(0, 1),
                       rng.uniform(-1.2, 1.2))
        ge, gt = certificate_grad(model, m, y, 0.7, x)
        fe = (certificate(model, m, y, 0.7, ParamPoint(x.eta + h, x.theta))
              - certificate(model, m, y, 0.7, ParamPoint(x.eta - h, x.theta))) / (2 * h)
        ft = (certificate(model, m, y, 0.7, ParamPoint(x.eta, x.theta + h))
              - certificate(model, m, y, 0.7, ParamPoint(x.eta, x.theta - h))) / (2 * h)
        scale = max(abs(fe), abs(ft), 1e-12)
        assert abs(ge - fe) <= 1e-5 * scale
        assert abs(gt - ft) <= 1e-5 * scale


@given(st.floats(-10, 10), st.floats(-1.4, 1.4))
@settings(max_examples=25, deadline=None)
def test_certificate_lipschitz_smoke(eta, theta):
    # along a small step the change is bounded by the gradient norm times the step
    rng = np.random.default_rng(6)
    y = rng.normal(size=GL.N ** 2)
    x = ParamPoint(eta, theta)
    ge, gt = certificate_grad(GL, DiscreteMeasure(), y, 1.0, x)
    h = 1e-4
    c0 = certificate(GL, DiscreteMeasure(), y, 1.0, x)
    c1 = certificate(GL, DiscreteMeasure(), y, 1.0, ParamPoint(eta + h, theta + h))
    assert abs(c1 - c0) <= 2 * h * (abs(ge) + abs(gt)) + 1e-6

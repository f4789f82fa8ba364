import numpy as np
import pytest

from sfwlines.forward import apply, certificate
from sfwlines.kernels import CLConfig, GLConfig
from sfwlines.measures import DiscreteMeasure, ParamPoint
from sfwlines.sfw import STOP_KMAX, STOP_OPTIMAL, SFWConfig, SFWReport, sfw_run

GL65 = GLConfig(1.0, 1.0, 32)
GL = GLConfig(1.0, 1.0, 16)


def cfg_for(model, lam, **kw):
    return SFWConfig(lam=lam, domain=model.default_domain(),
                     radon_P=model.default_radon_size(), **kw)


def test_config_validation():
    d = GL.default_domain()
    for bad in (dict(lam=0.0), dict(lam=1.0, k_max=0), dict(lam=1.0, cert_tol=0.0),
                dict(lam=1.0, prune_tol=-1.0), dict(lam=1.0, radon_P=1)):
        with pytest.raises(ValueError):
            SFWConfig(domain=d, **bad)


def test_zero_image_is_optimal_at_once():
    rep = sfw_run(GL, np.zeros(GL.N ** 2), cfg_for(GL, 1.0))
    assert len(rep.measure) == 0
    assert rep.stop_reason == STOP_OPTIMAL
    assert rep.iterations == 1
    assert rep.objective_trace == (0.0,)


def test_non_finite_observation_rejected():
    y = np.zeros(GL.N ** 2)
    y[3] = np.inf
    with pytest.raises(ValueError):
        sfw_run(GL, y, cfg_for(GL, 1.0))


@pytest.mark.parametrize("x0", [ParamPoint(4.3, 0.37), ParamPoint(-11.0, -1.1)])
def test_noiseless_single_gl_line(x0):
    y = apply(GL65, DiscreteMeasure((x0,), (1.0,)))
    rep = sfw_run(GL65, y, cfg_for(GL65, 1e-3))
    assert rep.stop_reason == STOP_OPTIMAL
    assert len(rep.measure) == 1
    assert abs(rep.measure.etas[0] - x0.eta) <= 1e-3
    assert abs(rep.measure.thetas[0] - x0.theta) <= 1e-4
    assert abs(rep.measure.alphas[0] - 1.0) <= 1e-2


def test_two_lines_noisy_run_invariants():
    truth = DiscreteMeasure.from_arrays([-5.0, 6.0], [0.5, -0.3], [1.0, 0.8])
    rng = np.random.default_rng(0)
    y = apply(GL, truth).pixels + 0.1 * rng.normal(size=GL.N ** 2)
    lam = 3.0  # above the noise correlation level, so no spurious spikes
    cfg = cfg_for(GL, lam)
    rep = sfw_run(GL, y, cfg)
    tr = rep.objective_trace
    assert all(b <= a + 1e-12 * (1 + abs(a)) for a, b in zip(tr, tr[1:]))
    assert len(rep.measure) <= rep.iterations
    assert len(rep.cert_sup_trace) == rep.iterations
    assert rep.stop_reason == STOP_OPTIMAL
    assert rep.cert_sup_trace[-1] <= 1 + cfg.cert_tol
    for x in rep.measure.points:
        assert certificate(GL, rep.measure, y, lam, x) >= 1 - 10 * cfg.cert_tol
    assert len(rep.measure) == 2


def test_k_max_stops_early():
    truth = DiscreteMeasure.from_arrays([-5.0, 6.0], [0.5, -0.3], [1.0, 0.8])
    rep = sfw_run(GL, apply(GL, truth), cfg_for(GL, 1e-3, k_max=1))
    assert rep.stop_reason == STOP_KMAX
    assert rep.iterations == 1
    assert len(rep.measure) == 1


def test_deterministic_and_round_trip():
    truth = DiscreteMeasure.from_arrays([0.0, 3.0], [0.2, -1.0], [1.0, 1.0])
    rng = np.random.default_rng(1)
    y = apply(GL, truth).pixels + 0.2 * rng.normal(size=GL.N ** 2)
    a = sfw_run(GL, y, cfg_for(GL, 1.5))
    b = sfw_run(GL, y.copy(), cfg_for(GL, 1.5))
    assert a == b
    assert SFWReport.from_dict(a.to_dict()) == a


def test_noiseless_single_chirp_line():
    cl = CLConfig(0.05, 64)
    x0 = ParamPoint(0.45, -0.4)
    # the position bias grows like lam / ||phi||^2, and CL kernels carry little energy
    rep = sfw_run(cl, apply(cl, DiscreteMeasure((x0,), (1.0,))), cfg_for(cl, 1e-6))
    assert rep.stop_reason == STOP_OPTIMAL
    assert len(rep.measure) == 1
    assert abs(rep.measure.thetas[0] - x0.theta) <= 1e-4
    assert abs(rep.measure.etas[0] - x0.eta) <= 1e-4

import math

import numpy as np
import pytest

import pursuit_lab as pl


def test_constants():
    assert pl.d_closed_form(0.5) == pytest.approx(4.0, abs=1e-12)
    assert pl.prediction(pl.KernelSpec.lamperti(0.5)) == pytest.approx(0.25)
    assert pl.gaussian_tail(0.0) == pytest.approx(0.5)
    assert pl.log_gamma(complex(5.0, 0.0)).real == pytest.approx(math.log(24.0))


def test_kernel_values():
    k = pl.KernelSpec.lamperti(0.5)
    assert k.stationary
    assert k.correlation(2.0) == pytest.approx(math.exp(-1.0))
    assert k.spectral_density(0.0) == pytest.approx(2.0 / math.pi)
    assert not pl.KernelSpec.fbm(0.3).stationary
    with pytest.raises(ValueError):
        pl.KernelSpec.fbm(1.5)


def test_fbm_paths():
    grid = pl.GridSpec(0.0, 1.0, 65)
    x = pl.sample_fbm(0.7, grid, 3, 2000)
    assert x.shape == (2000, 65)
    assert np.all(x[:, 0] == 0.0)
    var = x[:, -1].var()
    assert abs(var - 1.0) < 5 * math.sqrt(2.0 / 2000)
    # Same seed, same paths.
    assert np.array_equal(x, pl.sample_fbm(0.7, grid, 3, 2000))


def test_brownian_survival_oracle():
    cfg = pl.EnsembleConfig.homogeneous(pl.KernelSpec.fbm(0.5), 1, 4.0, 1.0, pl.Formulation.SelfSimilar0T, 32.0)
    cfg.monitoring = pl.Monitoring.BrownianBridge
    est = pl.estimate_survival(cfg, 11, 20000)
    exact = 1.0 - 2.0 * pl.gaussian_tail(1.0 / math.sqrt(8.0))
    assert abs(est.p_hat - exact) < 4 * est.std_error
    ratio = pl.leadership_ratio(pl.MCEstimate.from_counts(10, 1000), 4.0, 8, pl.Formulation.Stationary0T)
    assert ratio.ci_low <= ratio.value <= ratio.ci_high


def test_fit_and_theory():
    pts = [(t, pl.MCEstimate.from_counts(int(1e6 * t ** -0.5), 1000000)) for t in (1.0, 4.0, 16.0)]
    fit = pl.fit_gamma_n(pts)
    assert fit.gamma == pytest.approx(0.5, abs=1e-3)
    assert pl.shannon_kernel(0.0, 11) == pytest.approx(1.0)
    report = pl.theory_report(1, 5000, 2000)
    names = {e["name"] for e in report}
    assert "lemma4_ladder" in names and "mills_ratio" in names

import io
import json
import math
import pickle

import numpy as np
import pytest

from fhsic import KernelSpec
from fhsic.errors import DimensionError, DomainError, ReplicateError
from fhsic.simulation import (
    ScenarioConfig,
    StudyResult,
    cauchy_from_uniform,
    cosine_basis,
    format_table,
    generate_pair,
    ks_distance_normal,
    null_z_diagnostic,
    replicate_rng,
    run_study,
    write_records,
)
from fhsic.kernels import Grid


class TestScenarioConfig:
    def test_defaults_match_study_setup(self):
        cfg = ScenarioConfig()
        assert (cfg.n, cfg.grid_points, cfg.series_terms, cfg.replicates) == (100, 51, 50, 300)
        assert (cfg.cauchy_location, cfg.cauchy_scale) == (0.0, 0.5)

    def test_link_spelling(self):
        assert ScenarioConfig(link="square-sin").link == "square_sin"

    @pytest.mark.parametrize("kw", [
        {"m": 51}, {"m": -1}, {"n": 1}, {"grid_points": 1}, {"replicates": 0},
        {"link": "cosh"}, {"cauchy_scale": 0.0}, {"master_seed": -2},
    ])
    def test_invalid(self, kw):
        with pytest.raises((DomainError, DimensionError)):
            ScenarioConfig(**kw)


class TestGenerator:
    def test_shapes_and_grid(self):
        x, y = generate_pair(ScenarioConfig(n=100, grid_points=51), 0)
        assert x.values.shape == y.values.shape == (100, 51)
        np.testing.assert_array_equal(x.grid.points, np.arange(51) / 50)

    def test_deterministic(self):
        cfg = ScenarioConfig(n=20, master_seed=9)
        a = generate_pair(cfg, 4)
        b = generate_pair(cfg, 4)
        assert np.array_equal(a[0].values, b[0].values)
        assert np.array_equal(a[1].values, b[1].values)
        c = generate_pair(cfg, 5)
        assert not np.array_equal(a[0].values, c[0].values)

    def test_dependence_only_through_first_m_terms(self):
        base = ScenarioConfig(n=15, m=0, master_seed=3)
        x0, y0 = generate_pair(base, 2)
        x3, y3 = generate_pair(ScenarioConfig(n=15, m=3, master_seed=3, link="square"), 2)
        assert np.array_equal(x0.values, x3.values)
        assert not np.array_equal(y0.values, y3.values)

    def test_series_recovers_coefficients(self):
        # the cosine basis is orthonormal on [0, 1]; on a fine grid the
        # trapezoid projection recovers the drawn coefficients
        cfg = ScenarioConfig(n=5, grid_points=2001, series_terms=6, m=6, link="cube")
        x, y = generate_pair(cfg, 0)
        rng = replicate_rng(cfg.master_seed, 0)
        xi = cauchy_from_uniform(rng.random((5, 6)), 0.0, 0.5)
        basis = cosine_basis(x.grid, 6)
        coeffs = (x.values * x.grid.weights) @ basis.T
        np.testing.assert_allclose(coeffs, xi, rtol=1e-5, atol=1e-5)
        ycoeffs = (y.values * y.grid.weights) @ basis.T
        np.testing.assert_allclose(ycoeffs, xi ** 3, rtol=1e-5, atol=1e-5)

    def test_cauchy_marginals(self):
        u = np.random.default_rng(1).random(100_000)
        draws = cauchy_from_uniform(u, 0.0, 0.5)
        q1, med, q3 = np.quantile(draws, [0.25, 0.5, 0.75])
        assert abs(med) < 0.02
        assert q3 - q1 == pytest.approx(1.0, abs=0.03)

    def test_normal_terms_are_standard(self):
        cfg = ScenarioConfig(n=2000, series_terms=4, grid_points=3, m=0)
        rng = replicate_rng(cfg.master_seed, 0)
        rng.random((2000, 4))
        nu = rng.standard_normal((2000, 4))
        assert abs(nu.mean()) < 0.05 and nu.var() == pytest.approx(1.0, abs=0.05)


class TestStudy:
    def test_single_replicate(self):
        res = run_study(ScenarioConfig(n=20, replicates=1))
        assert res.rejection_rate in (0.0, 1.0)
        assert len(res.records) == 1

    def test_rate_is_fraction_of_rejections(self):
        res = run_study(ScenarioConfig(n=30, m=2, replicates=12))
        assert res.rejection_rate == sum(r.reject for r in res.records) / 12

    def test_worker_count_does_not_change_records(self):
        cfg = ScenarioConfig(n=25, m=1, replicates=7, master_seed=5)
        assert run_study(cfg, workers=1).records == run_study(cfg, workers=3).records

    def test_permutation_baseline_records(self):
        res = run_study(ScenarioConfig(n=20, m=1, replicates=4), "permutation", permutations=9)
        for rec in res.records:
            assert math.isnan(rec.z)
            assert 0.1 <= rec.p <= 1.0
            assert rec.reject == (rec.p <= 0.05)

    def test_unknown_test(self):
        with pytest.raises(DomainError):
            run_study(ScenarioConfig(n=5, replicates=1), "acov")

    def test_errors_tagged_with_replicate(self, monkeypatch):
        import fhsic.simulation as sim

        def boom(cfg, index):
            raise DomainError("bad draw")

        monkeypatch.setattr(sim, "generate_pair", boom)
        with pytest.raises(ReplicateError, match="replicate 0: bad draw") as info:
            run_study(ScenarioConfig(n=5, replicates=2))
        assert info.value.replicate_index == 0
        assert pickle.loads(pickle.dumps(info.value)).replicate_index == 0

    def test_degenerate_counted_as_non_rejection(self, monkeypatch):
        import fhsic.simulation as sim

        monkeypatch.setattr(sim, "gram_matrix", lambda data, kernel: np.ones((data.n, data.n)))
        res = run_study(ScenarioConfig(n=6, replicates=3))
        assert res.degenerate_count == 3 and res.rejection_rate == 0.0

    def test_power_increases_with_dependence(self):
        # small-kernel setting where the null is well calibrated
        kernel = KernelSpec(1e-3)
        for link in ("cube", "square", "square_sin"):
            low = run_study(ScenarioConfig(m=1, link=link, master_seed=11), kernel=kernel)
            high = run_study(ScenarioConfig(m=10, link=link, master_seed=11), kernel=kernel)
            assert high.rejection_rate >= low.rejection_rate - 0.05


class TestDiagnostic:
    def test_ks_against_scipy(self):
        stats = pytest.importorskip("scipy.stats")
        z = np.random.default_rng(4).standard_normal(300) * 1.1 + 0.05
        assert ks_distance_normal(z) == pytest.approx(stats.kstest(z, "norm").statistic,
                                                      abs=1e-12)

    def test_requires_null(self):
        with pytest.raises(DomainError):
            null_z_diagnostic(ScenarioConfig(m=2))

    def test_summary(self):
        diag = null_z_diagnostic(ScenarioConfig(n=40, replicates=30), replicates=25)
        assert diag.used + diag.degenerate == 25
        assert diag.mean == pytest.approx(np.mean(diag.z_scores))
        assert 0.0 <= diag.ks_distance <= 1.0

    def test_degenerate_excluded(self, monkeypatch):
        import fhsic.simulation as sim

        monkeypatch.setattr(sim, "gram_matrix", lambda data, kernel: np.ones((data.n, data.n)))
        diag = null_z_diagnostic(ScenarioConfig(n=6, replicates=4))
        assert diag.used == 0 and diag.degenerate == 4 and math.isnan(diag.mean)


class TestReporting:
    def _results(self):
        return [run_study(ScenarioConfig(n=12, m=m, replicates=3, link=link))
                for link in ("cube", "square") for m in (0, 2)]

    def test_table_layout(self):
        table = format_table(self._results())
        lines = table.splitlines()
        assert lines[0].split() == ["f(x)", "method", "m=0", "m=2"]
        assert lines[2].startswith("x^3") and lines[3].startswith("x^2")

    def test_record_stream(self):
        buf = io.StringIO()
        results = self._results()
        write_records(results, buf)
        rows = [json.loads(line) for line in buf.getvalue().splitlines()]
        assert len(rows) == 12
        assert set(rows[0]) == {"scenario", "test", "link", "m", "replicate", "statistic",
                                "z", "p", "reject", "degenerate"}
        assert rows[0]["scenario"] == "cube-m0-n12"

    def test_rejection_rate_property(self):
        res = StudyResult(ScenarioConfig(n=5, replicates=2), "mhsic", 0.32, KernelSpec(), 0.05)
        assert res.rejections == 0

import json

import numpy as np
import pytest

from pccdr.data import DataMatrix, RunSeed
from pccdr.datasets import make_blobs, make_swiss_roll, random_centers
from pccdr.errors import DegenerateData, InvalidInput, NumericalError
from pccdr.metrics import evaluate
from pccdr.trainer import (
    FitReport,
    PccConfig,
    RefineConfig,
    fit_pcc,
    init_random_normal,
    refine_from_init,
)

TRACE_KEYS = {"iter", "total", "corr", "cluster", "anchor"}


@pytest.fixture(scope="module")
def blob_data():
    centers = random_centers(4, 10, RunSeed(3))
    return make_blobs(150, centers, 1.0, RunSeed(4))


class TestConfigValidation:
    def test_defaults_valid(self):
        PccConfig().validate()
        RefineConfig().validate()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_components": 0},
            {"n_refs": 1},
            {"beta": -0.5},
            {"cluster_counts": (4, 1)},
            {"beta": 0.0, "cluster_counts": ()},
            {"epsilon": 0.0},
            {"iters": 0},
            {"learning_rate": 0.0},
        ],
    )
    def test_bad_fit_config(self, kwargs):
        with pytest.raises(InvalidInput):
            PccConfig(**kwargs).validate()

    @pytest.mark.parametrize(
        "kwargs",
        [{"lam": -1.0}, {"iters": 0}, {"inner_steps": 0}, {"epsilon": -1.0}],
    )
    def test_bad_refine_config(self, kwargs):
        with pytest.raises(InvalidInput):
            RefineConfig(**kwargs).validate()


class TestInitRandomNormal:
    def test_deterministic(self):
        a = init_random_normal(50, 3, RunSeed(9))
        b = init_random_normal(50, 3, RunSeed(9))
        np.testing.assert_array_equal(a, b)

    def test_large_sample_moments(self):
        e = init_random_normal(10_000, 2, RunSeed(0))
        assert np.abs(e.mean(axis=0)).max() < 0.01
        np.testing.assert_allclose(e.std(axis=0), 0.1, atol=0.01)

    def test_zero_columns_rejected(self):
        with pytest.raises(InvalidInput):
            init_random_normal(10, 0, RunSeed(0))


class TestFitPcc:
    def test_returns_embedding_and_report(self, blob_data):
        cfg = PccConfig(n_refs=30, cluster_counts=(4,), iters=20, seed=0)
        emb, report = fit_pcc(blob_data, cfg)
        assert emb.shape == (150, 2)
        assert isinstance(report, FitReport)
        assert report.embedding is emb
        assert np.isfinite(emb).all()

    def test_bit_identical_reruns(self, blob_data):
        cfg = PccConfig(n_refs=30, cluster_counts=(4, 8), iters=30, seed=7)
        a, _ = fit_pcc(blob_data, cfg)
        b, _ = fit_pcc(blob_data, cfg)
        assert a.tobytes() == b.tobytes()

    def test_trace_shape_and_keys(self, blob_data):
        cfg = PccConfig(n_refs=30, cluster_counts=(4,), iters=25, seed=0)
        _, report = fit_pcc(blob_data, cfg)
        assert len(report.loss_trace) == 25
        for i, entry in enumerate(report.loss_trace, start=1):
            assert set(entry) == TRACE_KEYS
            assert entry["iter"] == i
            assert entry["anchor"] == 0.0
            assert all(np.isfinite(v) for v in entry.values())

    def test_windowed_loss_descent(self, blob_data):
        cfg = PccConfig(n_refs=60, cluster_counts=(4, 8), iters=160, seed=1)
        _, report = fit_pcc(blob_data, cfg)
        totals = [e["total"] for e in report.loss_trace]
        for i in range(len(totals) - 50):
            assert totals[i + 50] <= totals[i] + 1e-9

    def test_two_dim_input_recovered(self):
        # distances of 2-D data are exactly representable in a 2-D embedding,
        # so the optimizer should find a near-isometry
        rng = np.random.default_rng(42)
        x = rng.standard_normal((100, 2)) * np.array([3.0, 1.0])
        cfg = PccConfig(beta=1.0, cluster_counts=(), epsilon=0.01, seed=0)
        emb, _ = fit_pcc(DataMatrix(values=x), cfg)
        report = evaluate(x, emb, RunSeed(0))
        assert report.global_pearson >= 0.999

    def test_labels_never_read(self, blob_data):
        cfg = PccConfig(n_refs=30, cluster_counts=(4,), iters=20, seed=0)
        plain = DataMatrix(values=blob_data.values)
        relabeled = DataMatrix(
            values=blob_data.values,
            labels=np.arange(150, dtype=np.int64) % 3,
        )
        a, _ = fit_pcc(plain, cfg)
        b, _ = fit_pcc(relabeled, cfg)
        assert a.tobytes() == b.tobytes()

    def test_cluster_counts_above_n(self, blob_data):
        with pytest.raises(InvalidInput):
            fit_pcc(blob_data, PccConfig(cluster_counts=(4, 151), iters=5))

    def test_refs_capped_at_n(self, rng):
        data = DataMatrix(values=rng.standard_normal((30, 4)))
        emb, _ = fit_pcc(
            data, PccConfig(n_refs=100, cluster_counts=(3,), iters=10, seed=2)
        )
        assert emb.shape == (30, 2) and np.isfinite(emb).all()

    def test_constant_input_degenerate(self):
        data = DataMatrix(values=np.ones((20, 3)))
        with pytest.raises(DegenerateData):
            fit_pcc(data, PccConfig(cluster_counts=(), beta=1.0, iters=5))

    def test_divergence_reports_iteration(self, blob_data):
        cfg = PccConfig(
            n_refs=20, cluster_counts=(), beta=1.0, iters=5,
            learning_rate=1e200, seed=0,
        )
        with pytest.raises(NumericalError, match="iteration"):
            fit_pcc(blob_data, cfg)


class TestRefine:
    def test_returns_embedding_and_report(self, blob_data):
        init = init_random_normal(150, 2, RunSeed(5))
        cfg = RefineConfig(n_refs=30, iters=2, inner_steps=10, seed=5)
        emb, report = refine_from_init(blob_data, init, cfg)
        assert emb.shape == init.shape
        assert len(report.loss_trace) == 2
        for epoch, entry in enumerate(report.loss_trace, start=1):
            assert set(entry) == TRACE_KEYS
            assert entry["iter"] == epoch
            assert entry["cluster"] == 0.0

    def test_huge_lambda_pins_to_init(self, blob_data):
        init = init_random_normal(150, 2, RunSeed(5))
        cfg = RefineConfig(lam=1e9, n_refs=30, seed=5)
        emb, _ = refine_from_init(blob_data, init, cfg)
        assert np.abs(emb - init).max() < 1e-3

    def test_improves_global_metric(self):
        data = make_swiss_roll(300, 0.0, RunSeed(8))
        init = init_random_normal(300, 2, RunSeed(8))
        emb, _ = refine_from_init(
            data, init, RefineConfig(n_refs=60, seed=8)
        )
        before = evaluate(data.values, init, RunSeed(0)).global_pearson
        after = evaluate(data.values, emb, RunSeed(0)).global_pearson
        assert after > before

    def test_lambda_zero_matches_plain_fit(self):
        # with the anchor off and the same seed, refinement from the fit's own
        # starting point walks the identical optimization path
        data = make_swiss_roll(250, 0.0, RunSeed(11))
        fit_cfg = PccConfig(cluster_counts=(), beta=1.0, iters=300, seed=4)
        emb_fit, _ = fit_pcc(data, fit_cfg)
        init = init_random_normal(250, 2, RunSeed(4))
        ref_cfg = RefineConfig(lam=0.0, iters=3, inner_steps=100, seed=4)
        emb_ref, _ = refine_from_init(data, init, ref_cfg)
        gs_fit = evaluate(data.values, emb_fit, RunSeed(0)).gs_avg
        gs_ref = evaluate(data.values, emb_ref, RunSeed(0)).gs_avg
        assert gs_ref == pytest.approx(gs_fit, abs=0.02)

    def test_wrong_row_count(self, blob_data):
        init = init_random_normal(149, 2, RunSeed(0))
        with pytest.raises(InvalidInput):
            refine_from_init(blob_data, init, RefineConfig(iters=1))

    def test_wrong_column_count(self, blob_data):
        init = init_random_normal(150, 3, RunSeed(0))
        with pytest.raises(InvalidInput):
            refine_from_init(blob_data, init, RefineConfig(iters=1))

    def test_non_finite_init(self, blob_data):
        init = init_random_normal(150, 2, RunSeed(0))
        init[3, 1] = np.nan
        with pytest.raises(InvalidInput):
            refine_from_init(blob_data, init, RefineConfig(iters=1))

    def test_divergence_reports_iteration(self, blob_data):
        init = init_random_normal(150, 2, RunSeed(0))
        cfg = RefineConfig(
            n_refs=20, iters=1, inner_steps=5, learning_rate=1e200, seed=0
        )
        with pytest.raises(NumericalError, match="iteration"):
            refine_from_init(blob_data, init, cfg)


class TestFitReport:
    def test_json_document_shape(self, blob_data):
        cfg = PccConfig(n_refs=30, cluster_counts=(4,), iters=10, seed=0)
        _, report = fit_pcc(blob_data, cfg)
        doc = report.to_json_dict()
        assert set(doc) == {"config", "loss_trace", "wall_ms"}
        assert doc["config"]["mode"] == "fit"
        assert doc["config"]["n"] == 150
        assert doc["config"]["seed"] == 0
        assert doc["wall_ms"] > 0
        parsed = json.loads(json.dumps(doc))
        assert len(parsed["loss_trace"]) == 10

    def test_refine_report_mode(self, blob_data):
        init = init_random_normal(150, 2, RunSeed(1))
        cfg = RefineConfig(n_refs=20, iters=2, inner_steps=5, seed=1)
        _, report = refine_from_init(blob_data, init, cfg)
        doc = report.to_json_dict()
        assert doc["config"]["mode"] == "refine"
        assert doc["config"]["lam"] == 1.0
        json.dumps(doc)

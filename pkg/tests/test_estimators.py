import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from clubconv import ClubConvergence, LogIndexTransformer, LogTTest
from clubconv.logt import logt_test
from clubconv.synth import as_raw_index

from .conftest import four_clubs


def test_get_params_and_clone():
    est = ClubConvergence(c_star=-0.5, merge=False)
    params = est.get_params()
    assert params["c_star"] == -0.5 and params["merge"] is False
    other = clone(est).set_params(ordering="last_observation")
    assert other.ordering == "last_observation" and est.ordering == "mean_last_half"


def test_logt_test_estimator_matches_function():
    panel, _ = four_clubs(0)
    est = LogTTest().fit(panel.values)
    assert est.result_ == logt_test(panel.values)
    assert est.converged_ is False
    assert est.score() == est.result_.t_stat


def test_cluster_labels():
    panel, truth = four_clubs(0)
    labels = ClubConvergence().fit_predict(panel.values)
    np.testing.assert_array_equal(labels, truth)


def test_fit_with_unit_ids():
    panel, _ = four_clubs(0)
    est = ClubConvergence().fit(panel.values, unit_ids=list(panel.unit_ids))
    assert est.partition_.clubs[0].members[0].startswith("U0")
    assert est.n_clubs_ == 4


def test_pipeline_from_raw_index():
    panel, truth = four_clubs(2)
    raw = as_raw_index(panel).values
    # an extra leading column where every unit sits at the same level
    raw = np.column_stack([np.full(raw.shape[0], 50.0), raw])
    pipe = make_pipeline(LogIndexTransformer(), ClubConvergence())
    labels = pipe.fit_predict(raw)
    assert pipe[0].n_dropped_ == 1
    np.testing.assert_array_equal(labels, truth)


def test_transformer_rebases():
    X = np.array([[50.0, 100.0, 200.0], [10.0, 30.0, 10.0]])
    out = LogIndexTransformer(base_index=0).fit_transform(X)
    assert out.shape == (2, 2)
    np.testing.assert_allclose(np.exp(out), [[200.0, 400.0], [300.0, 100.0]])


def test_transformer_requires_fit():
    with pytest.raises(NotFittedError):
        LogIndexTransformer().transform(np.ones((2, 3)))


def test_input_validation():
    with pytest.raises(ValueError):
        ClubConvergence().fit(np.ones((1, 10)))
    with pytest.raises(ValueError):
        LogTTest().fit(np.array([[1.0, np.nan], [1.0, 2.0]]))

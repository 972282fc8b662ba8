from __future__ import annotations
import math

import numpy as np
import pytest
from scipy.special import logit

from conftest import snap
from Services import ada_abstain, ensemble, gbt
from Services.ada_abstain import AdaModel, WeightedStump
from Services.dataset import MIN_AGE_YEARS, age_bin, to_matrix
from Services.ensemble import EnsembleModel
from Services.gbt import GbtModel, GbtParams, LeafNode


def _fixed_ensemble(p_ada: float, p_gbt: float, threshold: float = 0.5) -> EnsembleModel:
    stumps = ()
    if p_ada != 0.5:
        # sigma(2 * alpha) = p_ada cuando el stump vota +1
        alpha = 0.5 * float(logit(p_ada))
        stumps = (WeightedStump(feature=0, bin=age_bin(5.0), threshold=0.0, polarity=1, alpha=alpha),)
    ada = AdaModel(rounds=1, stumps=stumps)
    tree = LeafNode(leaf=float(logit(p_gbt)))
    gbt_model = GbtModel(params=GbtParams(num_trees=1), trees=(tree,))
    return EnsembleModel(ada=ada, gbt=gbt_model, decision_threshold=threshold)


def test_average_of_sub_models():
    ens = _fixed_ensemble(0.6, 0.8)
    assert ensemble.predict_proba(ens, snap(hr=100)) == pytest.approx(0.7)
    same = _fixed_ensemble(0.8, 0.8)
    assert ensemble.predict_proba(same, snap(hr=100)) == pytest.approx(0.8)


def test_tie_at_threshold_is_transfer():
    ens = _fixed_ensemble(0.5, 0.5)
    x = snap(hr=100)
    assert ensemble.predict_proba(ens, x) == 0.5
    assert ensemble.classify(ens, x) == 1
    assert ensemble.classify(_fixed_ensemble(0.49, 0.49), x) == -1
    assert ensemble.classify(_fixed_ensemble(0.1, 0.1), x, threshold=0.0) == 1


def test_threshold_must_be_inside_unit_interval():
    with pytest.raises(ValueError):
        _fixed_ensemble(0.5, 0.5, threshold=1.0)


def test_probability_between_sub_models(small_cohort):
    params = GbtParams(num_trees=8)
    ens = ensemble.fit(small_cohort, ada_rounds=20, gbt_params=params)
    X = to_matrix(small_cohort)
    p_ada = ada_abstain.predict_probas(ens.ada, X)
    p_gbt = gbt.predict_probas(ens.gbt, X)
    p = ensemble.predict_probas(ens, X)
    assert (np.minimum(p_ada, p_gbt) <= p + 1e-15).all()
    assert (p <= np.maximum(p_ada, p_gbt) + 1e-15).all()

    swapped = (p_gbt + p_ada) / 2.0
    np.testing.assert_array_equal(p >= 0.5, swapped >= 0.5)


def test_tune_threshold_stays_inside_unit_interval(small_cohort):
    ens = ensemble.fit(small_cohort, ada_rounds=10, gbt_params=GbtParams(num_trees=4))
    tuned = ensemble.tune_threshold(ens, small_cohort)
    assert 0.0 < tuned.decision_threshold < 1.0
    assert tuned.ada == ens.ada and tuned.gbt == ens.gbt
    assert ens.decision_threshold == 0.5


def test_all_missing_snapshot_at_every_age(small_cohort):
    ens = ensemble.fit(small_cohort, ada_rounds=30, gbt_params=GbtParams(num_trees=16))
    ages = np.arange(MIN_AGE_YEARS, 20.0, 0.1)
    X = to_matrix([snap(age=float(a)) for a in ages])
    for probas in (
        ada_abstain.predict_probas(ens.ada, X),
        gbt.predict_probas(ens.gbt, X),
        ensemble.predict_probas(ens, X),
    ):
        assert all(0.0 < p < 1.0 and math.isfinite(p) for p in probas)

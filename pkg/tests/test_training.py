import math

import numpy as np
import pytest

from greeknlp.conllu import read_conllu_file
from greeknlp.encoder import EncoderConfig
from greeknlp.training import (AdamState, GradientError, HyperParams, adamw_step,
                               grid_search, micro_macro_f1, train_ner, train_tagger,
                               report_tsv)

BETA1, BETA2, EPS = 0.9, 0.999, 1e-8


def test_hyperparams_invariants():
    with pytest.raises(ValueError):
        HyperParams(learning_rate=0.0)
    with pytest.raises(ValueError):
        HyperParams(dropout=1.0)
    with pytest.raises(ValueError):
        HyperParams(grad_accumulation_steps=0)
    with pytest.raises(ValueError):
        HyperParams(weight_decay=-0.1)


def test_adamw_zero_gradient_no_decay_leaves_params():
    params = {"w": np.array([1.0, -2.0])}
    state = AdamState.init(params)
    hp = HyperParams(learning_rate=0.1, weight_decay=0.0)
    adamw_step(params, {"w": np.zeros(2)}, state, hp)
    np.testing.assert_array_equal(params["w"], [1.0, -2.0])


def test_adamw_single_step_closed_form():
    p0, g, lr = 1.0, 0.5, 0.1
    params = {"w": np.array([p0])}
    state = AdamState.init(params)
    adamw_step(params, {"w": np.array([g])}, state, HyperParams(learning_rate=lr, weight_decay=0.0))
    m_hat = ((1 - BETA1) * g) / (1 - BETA1)
    v_hat = ((1 - BETA2) * g * g) / (1 - BETA2)
    expected = p0 - lr * m_hat / (math.sqrt(v_hat) + EPS)
    assert math.isclose(params["w"][0], expected, rel_tol=1e-15)


def test_adamw_decoupled_decay_shrinks_by_exact_factor():
    params = {"w": np.array([2.0, -4.0])}
    state = AdamState.init(params)
    hp = HyperParams(learning_rate=0.01, weight_decay=0.5)
    adamw_step(params, {"w": np.zeros(2)}, state, hp)
    np.testing.assert_allclose(params["w"], np.array([2.0, -4.0]) * (1 - 0.01 * 0.5),
                               rtol=1e-15)


def test_adamw_rejects_nan_gradient():
    params = {"w": np.array([1.0])}
    state = AdamState.init(params)
    with pytest.raises(GradientError):
        adamw_step(params, {"w": np.array([np.nan])}, state, HyperParams())


# --- metrics -------------------------------------------------------------------

def test_micro_macro_perfect():
    assert micro_macro_f1(["a", "b"], ["a", "b"]) == (1.0, 1.0)


def test_micro_macro_hand_computed():
    pred = ["0", "0", "0", "0"]
    gold = ["0", "0", "1", "1"]
    micro, macro = micro_macro_f1(pred, gold)
    assert math.isclose(micro, 0.5)
    assert math.isclose(macro, (2 / 3 + 0.0) / 2)


def test_micro_macro_single_class_equal():
    micro, macro = micro_macro_f1(["x", "x"], ["x", "x"])
    assert micro == macro == 1.0


def test_micro_macro_length_mismatch():
    with pytest.raises(ValueError):
        micro_macro_f1(["a"], ["a", "b"])


# --- training loop ----------------------------------------------------------------

@pytest.fixture(scope="module")
def sentences(request):
    path = request.config.rootpath / "tests" / "data" / "toy_corpus.conllu"
    return [s for d in read_conllu_file(path) for s in d.sentences]


ENC = EncoderConfig(dim=16, layers=1, seed=0)


def test_training_is_bit_reproducible(sentences):
    hp = HyperParams(learning_rate=1e-3, epochs=3, seed=7, batch_size=8,
                     weight_decay=0.1, patience=None)
    _, rep1 = train_ner(sentences[:8], sentences[:8], hp, ENC)
    _, rep2 = train_ner(sentences[:8], sentences[:8], hp, ENC)
    assert rep1.loss_curve() == rep2.loss_curve()
    assert [e.dev_metric for e in rep1.epochs] == [e.dev_metric for e in rep2.epochs]


def test_gradient_accumulation_equivalence(sentences):
    subset = sentences[:8]
    base = dict(learning_rate=1e-3, dropout=0.0, weight_decay=0.1, epochs=1,
                seed=3, patience=None)
    hp_micro = HyperParams(grad_accumulation_steps=2, batch_size=4, **base)
    hp_full = HyperParams(grad_accumulation_steps=1, batch_size=8, **base)
    m1, _ = train_tagger(subset, subset, hp_micro, ENC)
    m2, _ = train_tagger(subset, subset, hp_full, ENC)
    for name in m1.params:
        np.testing.assert_allclose(m1.params[name], m2.params[name], rtol=0, atol=1e-6)


def test_dropout_draws_are_seeded(sentences):
    hp = HyperParams(learning_rate=1e-3, dropout=0.2, epochs=2, seed=11,
                     batch_size=8, patience=None)
    _, rep1 = train_tagger(sentences[:8], sentences[:8], hp, ENC)
    _, rep2 = train_tagger(sentences[:8], sentences[:8], hp, ENC)
    assert rep1.loss_curve() == rep2.loss_curve()


# --- grid search ---------------------------------------------------------------------

def small_grid(**axes):
    grid = {"learning_rate": (1e-3,), "dropout": (0.0,),
            "grad_accumulation_steps": (1,), "weight_decay": (0.0,)}
    grid.update(axes)
    return grid


def test_single_cell_grid(sentences):
    subset = sentences[:6]
    hp = HyperParams(epochs=2, seed=0, batch_size=8, patience=None)
    model, report = grid_search("pos", subset, subset, subset,
                                grid=small_grid(), base_hp=hp, enc_config=ENC)
    assert len(report.grid) == 1
    assert report.champion == 0
    assert report.test_metric is not None


def test_selection_prefers_the_learning_cell(sentences):
    subset = sentences[:8]
    hp = HyperParams(epochs=6, seed=0, batch_size=8, patience=None)
    # one cell can learn, the other has a vanishing learning rate
    model, report = grid_search(
        "pos", subset, subset, subset,
        grid=small_grid(learning_rate=(3e-3, 1e-12)), base_hp=hp, enc_config=ENC)
    assert report.grid[report.champion].hyperparams.learning_rate == 3e-3
    assert report.best_dev_metric == max(r.dev_metric for r in report.grid)


def test_grid_champion_matches_independent_rerun(sentences):
    subset = sentences[:6]
    hp = HyperParams(epochs=2, seed=5, batch_size=8, patience=None)
    grid = small_grid(learning_rate=(3e-3, 1e-3), dropout=(0.0, 0.1))
    model, report = grid_search("pos", subset, subset, subset, grid=grid,
                                base_hp=hp, enc_config=ENC)
    assert len(report.grid) == 4
    # rerun every cell independently and select the max dev metric
    rerun = []
    for row in report.grid:
        _, cell_rep = train_tagger(subset, subset, row.hyperparams, ENC)
        rerun.append(cell_rep.best_dev_metric)
        assert math.isclose(cell_rep.best_dev_metric, row.dev_metric, rel_tol=1e-12)
    assert math.isclose(report.best_dev_metric, max(rerun), rel_tol=1e-12)


def test_grid_empty_split_errors(sentences):
    with pytest.raises(ValueError):
        grid_search("pos", [], sentences[:2], sentences[:2], grid=small_grid())
    with pytest.raises(ValueError):
        grid_search("bogus", sentences[:2], sentences[:2], sentences[:2],
                    grid=small_grid())


def test_report_tsv_shape(sentences):
    subset = sentences[:4]
    hp = HyperParams(epochs=1, seed=0, batch_size=8, patience=None)
    _, report = grid_search("pos", subset, subset, subset,
                            grid=small_grid(learning_rate=(1e-3, 2e-3)),
                            base_hp=hp, enc_config=ENC)
    tsv = report_tsv(report)
    lines = tsv.strip().splitlines()
    assert lines[0].startswith("cell\t")
    assert len([l for l in lines if not l.startswith(("cell", "#"))]) == 2
    assert sum(l.endswith("*") for l in lines) == 1

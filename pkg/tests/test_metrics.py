import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmadetect.errors import InputError, UndefinedAUC
from pmadetect.harness import auc_roc, compute_metrics


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def _vectors(tp, fn, fp, tn):
    labels = [1] * (tp + fn) + [0] * (fp + tn)
    preds = [1] * tp + [0] * fn + [1] * fp + [0] * tn
    return preds, labels


def test_worked_confusion():
    m = compute_metrics(*_vectors(2, 0, 1, 1))
    assert (m.tpr, m.fpr, m.accuracy) == (1.0, 0.5, 0.75)


def test_all_correct():
    m = compute_metrics([1, 0, 0, 1], [1, 0, 0, 1])
    assert m.accuracy == 1.0 and m.fpr == 0.0


def test_single_class_rates_absent():
    m = compute_metrics([1, 0, 1], [1, 1, 1])
    assert m.fpr is None and m.tpr == 2 / 3
    assert compute_metrics([0, 0], [0, 0]).tpr is None
    assert m.as_row()["fpr"] == ""


def test_length_mismatch():
    with pytest.raises(InputError):
        compute_metrics([1, 0], [1])
    with pytest.raises(InputError):
        compute_metrics([], [])


def test_exhaustive_confusion_tables():
    for tp, fn, fp, tn in itertools.product(range(21), repeat=4):
        total = tp + fn + fp + tn
        if not 1 <= total <= 20:
            continue
        m = compute_metrics(*_vectors(tp, fn, fp, tn))
        assert (m.tp, m.fn, m.fp, m.tn) == (tp, fn, fp, tn)
        assert m.accuracy == (tp + tn) / total
        assert m.tpr == (tp / (tp + fn) if tp + fn else None)
        assert m.fpr == (fp / (fp + tn) if fp + tn else None)


def test_auc_worked_case():
    assert auc_roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auc_extremes():
    assert auc_roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc_roc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert auc_roc([0.5] * 4, [0, 1, 0, 1]) == 0.5


def test_auc_single_class():
    with pytest.raises(UndefinedAUC):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(InputError):
        auc_roc([0.1], [1, 0])


def test_auc_matches_pairwise_oracle():
    rng = np.random.Generator(np.random.PCG64(8))
    for _ in range(500):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        # coarse scores force plenty of ties
        scores = rng.integers(0, 6, size=n) / 5 if rng.random() < 0.5 else rng.random(n)
        assert abs(auc_roc(scores, labels) - pairwise_auc(scores, labels)) <= 1e-9


def test_auc_random_scores_near_half():
    rng = np.random.Generator(np.random.PCG64(99))
    labels = rng.integers(0, 2, size=1000)
    assert 0.45 <= auc_roc(rng.random(1000), labels) <= 0.55


@given(
    st.lists(st.tuples(st.floats(-1e6, 1e6, allow_nan=False), st.integers(0, 1)), min_size=2, max_size=50),
    st.sampled_from(["exp", "cube", "affine", "arctan"]),
)
def test_auc_invariant_under_monotone_transform(rows, kind):
    scores = np.array([s for s, _ in rows])
    labels = np.array([y for _, y in rows])
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    f = {
        "exp": lambda x: np.exp(x / 1e6),
        "cube": lambda x: x**3,
        "affine": lambda x: 3 * x - 7,
        "arctan": np.arctan,
    }[kind]
    transformed = f(scores)
    # a transform that collapses distinct scores is not strictly monotone in floats
    if len(np.unique(transformed)) != len(np.unique(scores)):
        return
    assert abs(auc_roc(transformed, labels) - auc_roc(scores, labels)) <= 1e-12


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_counts_sum_to_total(rows):
    preds, labels = zip(*rows)
    m = compute_metrics(preds, labels)
    assert m.tp + m.fn + m.fp + m.tn == len(rows)

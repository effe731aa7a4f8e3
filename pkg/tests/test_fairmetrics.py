"""Tests for fairness and performance metrics."""
import math
from pathlib import Path

import numpy as np
import pytest

from faircause.exceptions import (
    DivisionByZeroError, EmptyGroupError, InsufficientRowsError, SchemaError,
)
from faircause.fairmetrics import (
    METRIC_NAMES, PredictionTable, accuracy_f1, aod, compute_all, consistency, di, group_rates,
    load_prediction_table, metrics_row_text, spd, theil,
)


def table(sensitive: list, label: list, prediction: list, features: list = None) -> PredictionTable:
    if features is None:
        features = np.arange(len(sensitive), dtype=float)
    return PredictionTable(np.array(sensitive), np.array(label), np.array(prediction), np.array(features))


# Privileged group 1 selected twice, unprivileged group 0 selected once out of two.
FOUR_ROWS = table([1, 1, 0, 0], [1, 1, 1, 0], [1, 1, 1, 0])

# TPR (unpriv, priv) = (1.0, 0.5) and both FPRs 0.
EIGHT_ROWS = table(
    [0, 0, 0, 0, 1, 1, 1, 1],
    [1, 1, 0, 0, 1, 1, 0, 0],
    [1, 1, 0, 0, 1, 0, 0, 0],
)


def test_spd_hand_enumeration() -> None:
    assert spd(FOUR_ROWS) == pytest.approx(-0.5)


@pytest.mark.parametrize("t, expected", [
    (table([1, 0, 1, 0], [1, 1, 0, 0], [1, 1, 0, 0]), 0.0),
    (table([0, 0, 1, 1], [1, 1, 1, 1], [1, 1, 0, 0]), 1.0),
])
def test_spd_symmetry_and_extreme(t: PredictionTable, expected: float) -> None:
    assert spd(t) == pytest.approx(expected)


def test_di() -> None:
    assert di(FOUR_ROWS) == pytest.approx(0.5)
    assert di(table([1, 0, 1, 0], [1, 1, 0, 0], [1, 1, 0, 0])) == pytest.approx(1.0)


@pytest.mark.parametrize("t", [
    FOUR_ROWS,
    EIGHT_ROWS,
    table([0, 0, 0, 1, 1, 1], [1, 0, 1, 1, 0, 1], [1, 1, 0, 1, 0, 1]),
])
def test_di_is_reciprocal_under_group_swap(t: PredictionTable) -> None:
    assert di(t) * di(t.swap_groups()) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(3))
def test_metrics_ignore_row_order(seed: int) -> None:
    rng = np.random.default_rng(seed)
    n = 60
    t = table(
        rng.integers(0, 2, n).tolist(),
        rng.integers(0, 2, n).tolist(),
        rng.integers(0, 2, n).tolist(),
        rng.normal(size=(n, 2)),
    )
    order = rng.permutation(n)
    shuffled = PredictionTable(t.sensitive[order], t.label[order], t.prediction[order], t.features[order])
    expected = compute_all(t, k=3)
    for name, value in compute_all(shuffled, k=3).items():
        assert value == pytest.approx(expected[name], abs=1e-12, nan_ok=True), name


def test_di_zero_privileged_rate() -> None:
    with pytest.raises(DivisionByZeroError):
        di(table([1, 1, 0, 0], [1, 0, 1, 0], [0, 0, 1, 0]))


def test_aod() -> None:
    assert aod(EIGHT_ROWS) == pytest.approx(0.25)
    assert aod(EIGHT_ROWS.swap_groups()) == pytest.approx(-0.25)


def test_aod_perfect_classifier() -> None:
    perfect = table([0, 0, 1, 1], [1, 0, 1, 0], [1, 0, 1, 0])
    assert aod(perfect) == 0.0


def test_group_rates() -> None:
    r = group_rates(EIGHT_ROWS)
    assert (r.tpr_unpriv, r.tpr_priv) == (1.0, 0.5)
    assert (r.fpr_unpriv, r.fpr_priv) == (0.0, 0.0)
    assert (r.sel_unpriv, r.sel_priv) == (0.5, 0.25)


def test_group_rates_empty_group() -> None:
    with pytest.raises(EmptyGroupError):
        group_rates(table([1, 1], [1, 0], [1, 0]))


def test_theil() -> None:
    # benefits b = (2, 1, 1, 0)
    assert theil(table([0, 0, 1, 1], [0, 1, 0, 1], [1, 1, 0, 0])) == pytest.approx(0.3466, abs=1e-4)
    assert theil(table([0, 1], [1, 0], [1, 0])) == 0.0


def test_consistency_hand_placed_neighbours() -> None:
    t = table(
        [0, 1, 0, 1, 0, 1],
        [1, 0, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 0],
        [0.0, 0.1, 5.0, 5.1, 10.0, 10.1],
    )
    assert consistency(t, k=1) == pytest.approx(1 - 2 / 6, abs=1e-9)


def test_consistency_identical_predictions() -> None:
    t = table([0, 1, 0, 1, 0, 1, 0], [1] * 7, [1] * 7)
    assert consistency(t, k=5) == 1.0


def test_consistency_bounds() -> None:
    rng = np.random.default_rng(3)
    t = table(
        rng.integers(0, 2, 50).tolist(),
        rng.integers(0, 2, 50).tolist(),
        rng.integers(0, 2, 50).tolist(),
        rng.normal(size=(50, 3)),
    )
    assert 0.0 <= consistency(t) <= 1.0


def test_consistency_needs_more_rows_than_k() -> None:
    with pytest.raises(InsufficientRowsError):
        consistency(FOUR_ROWS, k=5)


@pytest.mark.parametrize("label, prediction, expected", [
    ([1, 1, 0, 0], [1, 1, 0, 0], (1.0, 1.0)),
    ([1, 1, 0, 0], [1, 0, 0, 0], (0.75, 2 / 3)),
    ([1, 1, 0, 0], [0, 0, 0, 0], (0.5, 0.0)),
])
def test_accuracy_f1(label: list, prediction: list, expected: tuple) -> None:
    acc, f1 = accuracy_f1(table([0, 1, 0, 1], label, prediction))
    assert acc == pytest.approx(expected[0])
    assert f1 == pytest.approx(expected[1], abs=1e-4)


def test_non_binary_columns_rejected() -> None:
    with pytest.raises(SchemaError):
        table([0, 2], [1, 0], [1, 0])


def test_compute_all_reports_undefined_metrics_as_nan(datadir: Path) -> None:
    t = load_prediction_table(datadir / "predictions.csv")
    metrics = compute_all(t, k=1)
    assert list(metrics) == list(METRIC_NAMES)
    assert metrics["spd"] == pytest.approx(-1 / 3)
    assert metrics["di"] == pytest.approx(0.5)
    assert metrics["acc"] == pytest.approx(4 / 6)
    # No positives in the unprivileged group: TPR is undefined.
    assert math.isnan(metrics["aod"])
    assert metrics_row_text(metrics).splitlines()[0] == ",".join(METRIC_NAMES)


def test_load_prediction_table_missing_column(datadir: Path) -> None:
    with pytest.raises(SchemaError) as excinfo:
        load_prediction_table(datadir / "no_label.csv")
    assert "no_label.csv" in str(excinfo.value)

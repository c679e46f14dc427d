from pathlib import Path

import pytest

from daxt.errors import ContractViolation
from daxt.render import (
    BinPalette,
    assign_bins,
    bin_cutoffs,
    ols_fit,
    pitch_point,
    pitch_scatter_svg,
    scatter_regression_svg,
)

GOLDEN = Path(__file__).parent / "golden" / "pitch_scatter_20.svg"


def _fixture_points():
    values = [0.001 * (i + 1) for i in range(20)]
    colors = assign_bins(values, values)
    return [(5.0 * i + 2.0, 3.0 * i + 4.0, color) for i, color in enumerate(colors)]


def test_bins_split_one_to_hundred_ten_twenty_twenty_fifty():
    population = list(range(1, 101))
    labels = assign_bins(population, population)

    assert bin_cutoffs(population) == [91.0, 71.0, 51.0]
    assert [labels.count(color) for color in ("blue", "green", "yellow", "red")] == [10, 20, 20, 50]
    assert assign_bins(population, [100, 90, 70, 50, 1000]) == ["blue", "green", "yellow", "red", "blue"]


def test_all_equal_population_lands_in_top_bin():
    assert set(assign_bins([0.2] * 7, [0.2] * 7)) == {"blue"}


def test_single_value_population_is_blue():
    assert assign_bins([0.03], [0.03]) == ["blue"]


def test_bins_need_a_population():
    with pytest.raises(ContractViolation):
        assign_bins([], [0.1])


def test_palette_must_be_consistent():
    with pytest.raises(ContractViolation):
        BinPalette(percents=(10, 30), colors=("blue",))
    with pytest.raises(ContractViolation):
        BinPalette(percents=(30, 10), colors=("a", "b", "c"))


def test_empty_pitch_has_markings_and_center_spot():
    document = pitch_scatter_svg([])

    assert document.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<svg')
    assert document.endswith("</svg>\n")
    assert '<circle cx="525.0000" cy="340.0000" r="3.0000" fill="black"/>' in document
    assert 'r="6.0000"' not in document


def test_marker_at_pitch_center_lands_on_the_center_spot():
    assert pitch_point(52.5, 34.0) == (525.0, 340.0)
    assert pitch_point(0.0, 0.0) == (0.0, 680.0)

    document = pitch_scatter_svg([(52.5, 34.0, "red")])
    marker = '<circle cx="525.0000" cy="340.0000" r="6.0000" fill="red" stroke="black" stroke-width="0.5000"/>'
    assert document.count(marker) == 1
    assert document.index('r="3.0000" fill="black"') < document.index(marker)


def test_pitch_scatter_matches_golden_file(tmp_path):
    document = pitch_scatter_svg(_fixture_points(), tmp_path / "figure.svg", title="Interceptions & tackles")

    assert document == GOLDEN.read_text(encoding="utf-8")
    assert (tmp_path / "figure.svg").read_text(encoding="utf-8") == document
    assert pitch_scatter_svg(_fixture_points(), title="Interceptions & tackles") == document


def test_ols_fit_recovers_a_line():
    intercept, slope = ols_fit([0.0, 1.0, 2.0, 3.0], [1.0, 3.0, 5.0, 7.0])
    assert intercept == pytest.approx(1.0)
    assert slope == pytest.approx(2.0)


def test_ols_fit_rejects_degenerate_input():
    with pytest.raises(ContractViolation):
        ols_fit([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ContractViolation):
        ols_fit([1.0], [1.0])


def test_scatter_regression_is_deterministic(tmp_path):
    x = [10.0, 20.0, 25.0, 40.0, 42.0]
    y = [5.0, 12.0, 9.0, 30.0, 22.0]
    document = scatter_regression_svg(x, y, tmp_path / "score.svg", title="Score vs value")

    assert document == scatter_regression_svg(x, y, title="Score vs value")
    assert document.count('fill="blue"') == 5
    assert 'stroke="red"' in document
    assert "r = " in document

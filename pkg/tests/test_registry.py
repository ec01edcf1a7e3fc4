from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cybersick.registry import (
    ATTRIBUTE_NAMES,
    AttributeGroup,
    LabelScheme,
    REGISTRY,
    Scenario,
    attribute_index,
    collapse_label,
    registry_checksum,
)


def test_registry_has_34_entries_in_fixed_groups():
    assert len(REGISTRY) == 34
    groups = [entry.group for entry in REGISTRY]
    expected = (
        [AttributeGroup.PROFILE] * 9
        + [AttributeGroup.QUESTIONNAIRE] * 8
        + [AttributeGroup.GAME] * 12
        + [AttributeGroup.CONFIG] * 5
    )
    assert groups == expected


def test_registry_names_unique():
    assert len(set(ATTRIBUTE_NAMES)) == 34


def test_attribute_index_round_trip():
    for i, entry in enumerate(REGISTRY):
        assert attribute_index(entry.name) == i
        assert REGISTRY[attribute_index(entry.name)] is entry


def test_attribute_index_known_positions():
    assert attribute_index("age") == 1  # second profile entry, after gender
    assert attribute_index("timestamp") == 17  # first game-group entry
    assert REGISTRY[17].group is AttributeGroup.GAME


def test_attribute_index_unknown_names_nearest():
    with pytest.raises(KeyError, match="timestamp"):
        attribute_index("timestmap")
    with pytest.raises(KeyError):
        attribute_index("no_such")


def test_registry_checksum_stable():
    assert registry_checksum() == registry_checksum()
    assert len(registry_checksum()) == 64


def test_collapse_label_examples():
    assert collapse_label(2, LabelScheme.BINARY) == 1  # moderate merges into discomfort
    assert collapse_label(0, LabelScheme.BINARY) == 0
    assert collapse_label(3, LabelScheme.QUARTERLY) == 3


def test_collapse_label_rejects_out_of_range():
    with pytest.raises(ValueError):
        collapse_label(4, LabelScheme.BINARY)
    with pytest.raises(ValueError):
        collapse_label(-1, LabelScheme.QUARTERLY)


@given(a=st.integers(0, 3), b=st.integers(0, 3), scheme=st.sampled_from(list(LabelScheme)))
def test_collapse_label_monotone(a, b, scheme):
    if a <= b:
        assert collapse_label(a, scheme) <= collapse_label(b, scheme)


def test_collapse_label_images():
    assert {collapse_label(v, LabelScheme.BINARY) for v in range(4)} == {0, 1}
    assert {collapse_label(v, LabelScheme.QUARTERLY) for v in range(4)} == {0, 1, 2, 3}


def test_scenario_game_selection():
    assert {g.value for g in Scenario.A.games} == {"race"}
    assert {g.value for g in Scenario.B.games} == {"flight"}
    assert {g.value for g in Scenario.C.games} == {"race", "flight"}


def test_scheme_class_counts():
    assert LabelScheme.BINARY.n_classes == 2
    assert LabelScheme.QUARTERLY.n_classes == 4

import pytest

from optionize.envs import builtin_layout
from optionize.envs import load_layout
from optionize.envs import parse_layout
from optionize.errors import ConfigurationError


def test_builtin_sizes() -> None:
    kdt1 = builtin_layout("kdt1")
    assert (kdt1.width, kdt1.height) == (19, 19)
    assert kdt1.start == (2, 2)
    assert kdt1.key == (6, 6)
    assert kdt1.door == (4, 9)
    assert kdt1.treasure == (4, 14)

    hazard = builtin_layout("hazard")
    assert (hazard.width, hazard.height) == (20, 15)
    assert hazard.key == (1, 13)
    assert hazard.door is None
    assert (1, 4) in hazard.fatal


def test_mirror_symmetry() -> None:
    assert builtin_layout("kdt1").is_mirror_symmetric()
    assert builtin_layout("kdt2").is_mirror_symmetric()
    assert not builtin_layout("hazard").is_mirror_symmetric()


def test_unknown_layout() -> None:
    with pytest.raises(ConfigurationError):
        builtin_layout("maze")


def test_parse_rejects_unknown_cell() -> None:
    with pytest.raises(ConfigurationError):
        parse_layout("###\n#S?\n###")


def test_parse_rejects_ragged_rows() -> None:
    with pytest.raises(ConfigurationError):
        parse_layout("###\n#S\n###")


def test_parse_rejects_missing_start() -> None:
    with pytest.raises(ConfigurationError):
        parse_layout("###\n#.#\n###")


def test_parse_rejects_duplicate_marks() -> None:
    with pytest.raises(ConfigurationError):
        parse_layout("#####\n#SKK#\n#####")


def test_load_layout(tmp_path) -> None:
    path = tmp_path / "tiny.txt"
    path.write_text("#####\n#S.K#\n#####\n", encoding="utf-8")
    layout = load_layout(path)
    assert layout.name == "tiny"
    assert layout.start == (1, 1)
    assert layout.key == (3, 1)
    assert layout.passable_cells() == [(1, 1), (2, 1), (3, 1)]


def test_load_missing_layout(tmp_path) -> None:
    with pytest.raises(ConfigurationError):
        load_layout(tmp_path / "missing.txt")

import pytest

from optionize.utils import file_digest
from optionize.utils import load_csv
from optionize.utils import load_json
from optionize.utils import save_csv
from optionize.utils import save_json


def test_csv_round_trip(tmp_path) -> None:
    path = tmp_path / "nested" / "rows.csv"
    save_csv([{"a": 1, "b": 0.1}, {"a": 2, "b": 1 / 3}], path, ["a", "b"])
    rows = load_csv(path)
    assert rows == [{"a": "1", "b": "0.1"}, {"a": "2", "b": repr(1 / 3)}]


def test_csv_is_byte_stable(tmp_path) -> None:
    rows = [{"a": 0.5}]
    save_csv(rows, tmp_path / "x.csv", ["a"])
    save_csv(rows, tmp_path / "y.csv", ["a"])
    assert file_digest(tmp_path / "x.csv") == file_digest(tmp_path / "y.csv")


def test_json_suffix_enforced(tmp_path) -> None:
    with pytest.raises(ValueError):
        save_json({}, tmp_path / "data.txt")
    with pytest.raises(ValueError):
        load_json(tmp_path / "data.txt")


def test_json_round_trip(tmp_path) -> None:
    save_json({"a": [1, 2]}, tmp_path / "data.json")
    assert load_json(tmp_path / "data.json") == {"a": [1, 2]}

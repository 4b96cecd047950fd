import csv
import json

import pytest

from app.repositories.result_repo import ResultRepository
from app.schemas.report_schema import SChainSummary


def test_write_csv_formats_values(out_dir):
    repo = ResultRepository(out_dir)
    path = repo.write_csv("table.csv", ["a", "b", "c", "d"], [(1, 0.1, True, None)])

    assert path.read_text(encoding="utf-8") == "a,b,c,d\n1,0.1,true,\n"


def test_write_csv_header_only(out_dir):
    repo = ResultRepository(out_dir)
    path = repo.write_csv("empty.csv", ["x", "y"], [])

    assert path.read_text(encoding="utf-8") == "x,y\n"


def test_write_csv_rejects_ragged_rows(out_dir):
    repo = ResultRepository(out_dir)

    with pytest.raises(ValueError):
        repo.write_csv("bad.csv", ["x", "y"], [(1,)])
    assert not (out_dir / "bad.csv").exists()


def test_floats_written_with_full_precision(out_dir):
    repo = ResultRepository(out_dir)
    value = 1 / 3
    path = repo.write_csv("p.csv", ["v"], [(value,)])

    assert float(path.read_text(encoding="utf-8").splitlines()[1]) == value


def test_write_json_model_and_dict(out_dir):
    repo = ResultRepository(out_dir)
    summary = SChainSummary(
        beta=1.0,
        delta=0.5,
        eigenvalues=[1.0, 0.5],
        detailed_balance_residual=0.0,
        mixing_time=2.0,
        negative_eigenvalues=False,
        lazy=False,
    )
    repo.write_json("summary.json", summary)
    repo.write_json("plain.json", {"b": 2, "a": 1})

    assert json.loads((out_dir / "summary.json").read_text())["delta"] == 0.5
    assert list(json.loads((out_dir / "plain.json").read_text())) == ["a", "b"]


def test_no_temporary_files_left(out_dir):
    repo = ResultRepository(out_dir)
    repo.write_csv("t.csv", ["x"], [(1,)])
    repo.write_json("t.json", {"x": 1})

    assert sorted(p.name for p in out_dir.iterdir()) == ["t.csv", "t.json"]


def test_write_csv_quotes_text_with_commas(out_dir):
    """Тест: текст с запятыми и кавычками читается обратно без изменений"""
    repo = ResultRepository(out_dir)
    message = 'DisconnectedChain: δ=0, компоненты "a", "b"'
    path = repo.write_csv("errors.csv", ["name", "errors"], [("x", message)])

    with path.open(encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))

    assert rows == [{"name": "x", "errors": message}]

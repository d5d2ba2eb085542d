import json
from pathlib import Path

import pytest

from slap.vectors import MODULES, render, write_vectors

CHECKED_IN = Path(__file__).resolve().parent.parent / "vectors"


@pytest.mark.parametrize("module", MODULES)
def test_regeneration_matches_checked_in(module):
    assert render(module) == (CHECKED_IN / f"{module}.jsonl").read_text()


@pytest.mark.parametrize("module", MODULES)
def test_every_vector_verifies(module):
    for line in (CHECKED_IN / f"{module}.jsonl").read_text().splitlines():
        row = json.loads(line)
        assert row.get("verifies", True) is True, row["name"]


def test_toy_line():
    row = json.loads((CHECKED_IN / "tlp.jsonl").read_text().splitlines()[0])
    assert {k: row[k] for k in ("n", "d", "e", "r", "z", "e_tilde", "m", "c")} == dict(
        n=253, d=27, e=163, r=32, z=351, e_tilde=383, m=2, c=52)


def test_write_vectors(tmp_path):
    paths = write_vectors(tmp_path, ["group"])
    assert [p.name for p in paths] == ["group.jsonl"]
    with pytest.raises(ValueError):
        write_vectors(tmp_path, ["nope"])

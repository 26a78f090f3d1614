import pathlib

import pytest


@pytest.fixture
def csv_file(tmp_path):
    """Write CSV text to a temp file and return its path."""

    def _write(text: str, name: str = "data.csv") -> str:
        p = pathlib.Path(tmp_path) / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write

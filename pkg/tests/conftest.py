import sys
from pathlib import Path

import pytest

# make the oracle helpers importable from every test module
sys.path.insert(0, str(Path(__file__).parent))

from codesum.asts import ast_from_record, validate_ast  # noqa: E402


@pytest.fixture
def tiny_ast():
    return validate_ast(
        ast_from_record(
            {
                "nodes": [
                    {"id": 0, "label": "root", "children": [1, 2]},
                    {"id": 1, "label": "ter_x", "children": []},
                    {"id": 2, "label": "ter_y", "children": []},
                ]
            }
        )
    )

import ast
from pathlib import Path

import billmap

SRC = Path(billmap.__file__).parent


def iter_imports(path: Path):
    tree = ast.parse(path.read_text(encoding="utf-8"))
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                yield alias.name
        elif isinstance(node, ast.ImportFrom):
            yield node.module or ""


def test_production_never_imports_oracles():
    for path in SRC.glob("*.py"):
        if path.name == "oracles.py":
            continue
        for module in iter_imports(path):
            assert "oracles" not in module, (
                f"{path.name} imports {module}; oracle code must stay test-only"
            )


def test_public_api_exports_resolve():
    for name in billmap.__all__:
        assert getattr(billmap, name, None) is not None, name


def test_version_present():
    assert billmap.__version__

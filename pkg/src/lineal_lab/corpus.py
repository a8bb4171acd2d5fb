"""Bundled example programs and their expectation headers.

A program file may start with comment lines of the form ``-- expect: T``,
``-- expect-type: A``, ``-- expect-exit: N`` and ``-- expect-dist: |0>=0.75 ...``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .terms import LAMBDA_S, LINEAL, ODOT

EXTENSIONS = {".lineal": LINEAL, ".lams": LAMBDA_S, ".sup": ODOT}
_HEADER = re.compile(r"--\s*(expect(?:-[a-z]+)?)\s*:\s*(.*?)\s*$")


def dialect_for(path) -> str | None:
    return EXTENSIONS.get(Path(path).suffix)


@dataclass(frozen=True)
class Program:
    name: str
    source: str
    dialect: str
    headers: dict[str, str] = field(default_factory=dict)

    @property
    def expected_dist(self) -> dict[str, float]:
        text = self.headers.get("expect-dist", "")
        return {k: float(v) for k, v in (item.split("=") for item in text.split())}


def parse_headers(source: str) -> dict[str, str]:
    headers = {}
    for line in source.splitlines():
        m = _HEADER.match(line.strip())
        if m:
            headers[m.group(1)] = m.group(2)
    return headers


def _program_dir():
    return resources.files(__package__) / "programs"


def load(path) -> Program:
    path = Path(path)
    source = path.read_text(encoding="utf-8")
    dialect = dialect_for(path)
    if dialect is None:
        raise ValueError(f"unknown program extension {path.suffix!r}")
    return Program(path.name, source, dialect, parse_headers(source))


def builtin(name: str) -> Program:
    entry = _program_dir() / name
    if not entry.is_file():
        raise FileNotFoundError(name)
    source = entry.read_text(encoding="utf-8")
    return Program(name, source, EXTENSIONS[Path(name).suffix], parse_headers(source))


def resolve(path) -> Program:
    """A file on disk, else the bundled program with the same base name."""
    p = Path(path)
    if p.is_file():
        return load(p)
    return builtin(p.name)


def example_programs() -> dict[str, Program]:
    return {
        entry.name: builtin(entry.name)
        for entry in sorted(_program_dir().iterdir(), key=lambda e: e.name)
        if Path(entry.name).suffix in EXTENSIONS
    }

"""Locating and loading the shipped corpus and the full-size fixtures."""

from __future__ import annotations

from pathlib import Path

from essence_robust.parser import parse_params, parse_spec

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
DATA = Path(__file__).resolve().parent / "data"


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.essence"))


def fixture_files() -> list[Path]:
    return sorted(DATA.glob("*.essence"))


def params_path(spec: Path) -> Path | None:
    p = spec.with_suffix(".param")
    return p if p.exists() else None


def load(path: Path):
    """(spec, params) for a corpus or fixture file."""
    p = params_path(path)
    params = parse_params(p.read_text()) if p else None
    return parse_spec(path.read_text()), params

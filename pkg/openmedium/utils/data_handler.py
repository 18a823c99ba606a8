# openmedium/utils/data_handler.py
from pathlib import Path

import pandas as pd
from cachetools import TTLCache, cached

from .events import FIELD_ORDER, read_events

CACHE = TTLCache(maxsize=64, ttl=600)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
FIXTURE_DIR = DATA_DIR / "fixtures"
DEFAULT_ANCESTOR = DATA_DIR / "ancestor.soup"
DEFAULT_RULES = DATA_DIR / "replicator.rules"

RUN_ARTIFACTS = {
    "metrics": "metrics.csv",
    "genotypes": "genotypes.csv",
    "events": "events.log",
}


# --------------------------------------------------
# shipped inputs (genomes, rule files)
# --------------------------------------------------
@cached(CACHE)
def read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def resolve_input(path: str, default: Path) -> Path:
    """Empty means the shipped default; bare names fall back to the data directory."""
    if not path:
        return default
    candidate = Path(path)
    if candidate.exists():
        return candidate
    for base in (DATA_DIR, FIXTURE_DIR):
        if (base / path).exists():
            return base / path
    raise FileNotFoundError(f"no such file: {path}")


def ancestor_text(path: str = "") -> str:
    return read_text(str(resolve_input(path, DEFAULT_ANCESTOR)))


def rules_text(rules_path: str = "") -> str:
    """Concatenate a comma-separated list of rule files in order."""
    names = [p.strip() for p in rules_path.split(",") if p.strip()] or [""]
    return "\n".join(read_text(str(resolve_input(name, DEFAULT_RULES))) for name in names)


# --------------------------------------------------
# run artifacts, read back for export and inspection
# --------------------------------------------------
def read_run_table(run_dir, table: str) -> pd.DataFrame:
    """Load one run artifact as a string-typed frame so values survive untouched."""
    path = Path(run_dir) / RUN_ARTIFACTS[table]
    if not path.exists():
        raise FileNotFoundError(f"{path} not found")
    if table == "events":
        rows = [
            {key: ("" if value is None else str(value)) for key, value in _event_row(event).items()}
            for event in read_events(path)
        ]
        return pd.DataFrame(rows, columns=list(FIELD_ORDER), dtype=str)
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def _event_row(event) -> dict:
    return {
        "step": event.step,
        "kind": event.kind,
        "org": event.org,
        "parent": event.parent,
        "genotype": None if event.genotype is None else f"{event.genotype:016x}",
        "addr": event.addr,
        "detail": event.detail,
    }


def missing_artifacts(run_dir) -> list:
    run_dir = Path(run_dir)
    return [name for name in RUN_ARTIFACTS.values() if not (run_dir / name).exists()]

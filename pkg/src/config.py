"""Load configuration from config/latticeforge.json and environment variables."""

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

DEFAULT_EVALUATION_BUDGET = 10**10
DEFAULT_SEARCH_BUDGET = 10**8
DEFAULT_TABLE_LIMIT = 512
DEFAULT_DENSE_LIMIT = 4096


@dataclass
class Config:
    evaluation_budget: int = DEFAULT_EVALUATION_BUDGET
    search_budget: int = DEFAULT_SEARCH_BUDGET
    threads: int = 1
    table_limit: int = DEFAULT_TABLE_LIMIT
    dense_limit: int = DEFAULT_DENSE_LIMIT
    max_permutohedron: int = 8
    max_cambrian: int = 14
    max_bmn_atoms: int = 12
    max_dot_size: int = 200
    max_gazpacho_branches: int = 100_000
    random_seed: int = 20240601
    report_file_path: str = "data/reproduce.json"


def _positive_int(name: str, value: object) -> int:
    try:
        number = int(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ValueError(f"'{name}' must be an integer, got {value!r}")
    if number < 1:
        raise ValueError(f"'{name}' must be positive, got {number}")
    return number


def load_config(path: Optional[str] = None) -> Config:
    """Load settings from config/latticeforge.json, then apply env overrides.

    Args:
        path: Alternative JSON file; defaults to config/latticeforge.json
            under the project root.

    Raises:
        ValueError: If a configured value is missing its expected type or range.
        FileNotFoundError: If the configuration file does not exist.
    """
    project_root = Path(__file__).resolve().parent.parent
    config_path = Path(path) if path else project_root / "config" / "latticeforge.json"

    with open(config_path, encoding="utf-8") as f:
        data = json.load(f)

    limits = data.get("limits", {})
    scan = data.get("scan", {})

    threads = scan.get("threads") or os.cpu_count() or 1
    budget = scan.get("evaluation_budget", DEFAULT_EVALUATION_BUDGET)

    env_budget = os.environ.get("LATTICEFORGE_BUDGET", "")
    if env_budget:
        budget = env_budget
    env_threads = os.environ.get("LATTICEFORGE_THREADS", "")
    if env_threads:
        threads = env_threads

    report_file_path = os.environ.get("LATTICEFORGE_REPORT", "") or str(
        project_root / data.get("report_file", "data/reproduce.json")
    )

    return Config(
        evaluation_budget=_positive_int("evaluation_budget", budget),
        search_budget=_positive_int(
            "search_budget", scan.get("search_budget", DEFAULT_SEARCH_BUDGET)
        ),
        threads=_positive_int("threads", threads),
        table_limit=_positive_int(
            "table_limit", limits.get("table_limit", DEFAULT_TABLE_LIMIT)
        ),
        dense_limit=_positive_int(
            "dense_limit", limits.get("dense_limit", DEFAULT_DENSE_LIMIT)
        ),
        max_permutohedron=_positive_int(
            "max_permutohedron", limits.get("max_permutohedron", 8)
        ),
        max_cambrian=_positive_int("max_cambrian", limits.get("max_cambrian", 14)),
        max_bmn_atoms=_positive_int("max_bmn_atoms", limits.get("max_bmn_atoms", 12)),
        max_dot_size=_positive_int("max_dot_size", limits.get("max_dot_size", 200)),
        max_gazpacho_branches=_positive_int(
            "max_gazpacho_branches", limits.get("max_gazpacho_branches", 100_000)
        ),
        random_seed=int(data.get("random_seed", 20240601)),
        report_file_path=report_file_path,
    )

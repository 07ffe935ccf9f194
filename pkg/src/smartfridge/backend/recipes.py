"""Recipe suggestions from the current inventory counts.

The catalog is a static JSON file mapping recipe name to its required
class -> quantity map. A recipe is suggested when every requirement is covered
by the current counts; results are ordered by number of distinct required
items (descending), then name.
"""

from __future__ import annotations

import json
from pathlib import Path


class CatalogError(ValueError):
    pass


def load_catalog(path) -> dict[str, dict[str, int]]:
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"recipe catalog not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CatalogError(f"recipe catalog is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CatalogError("recipe catalog must be an object of name -> requirements")
    catalog: dict[str, dict[str, int]] = {}
    for name, requirements in raw.items():
        if not isinstance(requirements, dict):
            raise CatalogError(f"recipe {name!r} requirements must be an object")
        normalized = {}
        for cls, qty in requirements.items():
            if isinstance(qty, bool) or not isinstance(qty, int) or qty < 1:
                raise CatalogError(f"recipe {name!r} needs a positive integer for {cls!r}")
            normalized[str(cls)] = qty
        catalog[str(name)] = normalized
    return catalog


def suggest_recipes(counts: dict, catalog: dict[str, dict[str, int]]) -> list[dict]:
    matches = [
        {"name": name, "requires": dict(requirements)}
        for name, requirements in catalog.items()
        if all(counts.get(cls, 0) >= qty for cls, qty in requirements.items())
    ]
    matches.sort(key=lambda r: (-len(r["requires"]), r["name"]))
    return matches

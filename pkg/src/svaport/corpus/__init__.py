"""Bundled desk-scale designs, assertion sets, and signal maps.

Five small RISC-V-flavoured modules (PMP check, CSR file, debug control,
interrupt handling, control flow) ship with matching assertion files and
signal maps, plus a campaign config wiring them together and a ``golden/``
directory holding the reference translation pair used by the test suite.
Everything is plain text; the helpers below just hand out paths.
"""

from __future__ import annotations

from pathlib import Path

MODULES = ("pmp_unit", "csr_unit", "debug_unit", "irq_unit", "cf_unit")


def root() -> Path:
    """Directory containing the bundled files."""
    return Path(__file__).resolve().parent


def design_path(module: str) -> Path:
    return _existing(root() / f"{module}.sv")


def assertions_path(module: str) -> Path:
    return _existing(root() / f"{_stem(module)}.sva")


def signal_map_path(module: str) -> Path:
    return _existing(root() / f"{_stem(module)}_map.json")


def campaign_path() -> Path:
    return _existing(root() / "campaign.json")


def golden_path(name: str) -> Path:
    return _existing(root() / "golden" / name)


def _stem(module: str) -> str:
    return module[: -len("_unit")] if module.endswith("_unit") else module


def _existing(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"no bundled corpus file {path.name}")
    return path

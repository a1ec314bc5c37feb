"""Shared fixtures: parsed corpus artifacts and one full campaign run.

The campaign pipeline (translate, inject, evaluate over the five bundled
modules) runs once per session into a temp directory; acceptance and CLI
tests read its artifacts instead of re-running the stages.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from svaport import corpus
from svaport.cli import main as cli_main
from svaport.config import ProjectConfig
from svaport.rtl_parser import parse_design
from svaport.sva import parse_assertions
from svaport.translate import SignalMap

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def corpus_designs():
    return {name: parse_design(corpus.design_path(name).read_text())
            for name in corpus.MODULES}


@pytest.fixture(scope="session")
def corpus_assertions():
    return {name: parse_assertions(corpus.assertions_path(name).read_text())
            for name in corpus.MODULES}


@pytest.fixture(scope="session")
def corpus_maps(corpus_designs):
    return {name: SignalMap.load(corpus.signal_map_path(name),
                                 netlist=corpus_designs[name])
            for name in corpus.MODULES}


@dataclass
class CampaignRun:
    config: ProjectConfig
    out_dir: Path
    elapsed: float
    report_text: str
    metrics: dict

    def module_dir(self, name: str) -> Path:
        return self.out_dir / name


@pytest.fixture(scope="session")
def campaign_run(tmp_path_factory) -> CampaignRun:
    """translate + inject + evaluate on the bundled campaign, timed."""
    out = tmp_path_factory.mktemp("campaign")
    cfg_path = str(corpus.campaign_path())
    started = time.perf_counter()
    rc = cli_main(["translate", "--config", cfg_path, "--out", str(out)])
    assert rc == 0, "translate stage failed"
    rc = cli_main(["inject", "--config", cfg_path, "--out", str(out)])
    assert rc == 0, "inject stage failed"
    rc = cli_main(["evaluate", "--config", cfg_path, "--out", str(out)])
    assert rc == 0, "evaluate stage failed"
    elapsed = time.perf_counter() - started
    config = ProjectConfig.load(cfg_path).override(out_dir=str(out))
    return CampaignRun(
        config=config,
        out_dir=out,
        elapsed=elapsed,
        report_text=(out / "report.txt").read_text(),
        metrics=json.loads((out / "metrics.json").read_text()),
    )

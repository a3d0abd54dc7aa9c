"""Sweep output in CSV or JSON, with a run manifest."""
from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .safety import SweepResult, SweepRow

CSV_COLUMNS = ("p", "scheme", "fading_m", "mean_collision_prob", "ci_halfwidth", "trials")

CONVENTIONS = {
    "n_cs_roster": "vehicles of the same sub-chain within r_CS of the transmitter (inclusive), "
                   "transmitter and receiver excluded",
    "collision_count": "distinct rear-ending vehicles per trial divided by n - 1",
    "cs_hop_success": "success given the transmitter attempts; transmitter access charged once in the delay model",
    "r_cs_auto": "per link r + r_I",
}


@dataclass
class RunManifest:
    config: dict
    seed: int
    trials: int
    p_grid: list
    version: str = ""
    conventions: dict = field(default_factory=lambda: dict(CONVENTIONS))
    timestamp: str | None = None

    def __post_init__(self):
        if not self.version:
            from . import __version__
            self.version = __version__


def _num(x) -> str:
    return repr(float(x))


def results_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in result.rows:
        buf.write(f"{_num(r.p)},{r.scheme},{int(r.fading_m)},{_num(r.mean_collision_prob)},"
                  f"{_num(r.ci_halfwidth)},{int(r.trials)}\n")
    return buf.getvalue()


def results_json(result: SweepResult, manifest: RunManifest) -> str:
    doc = {"manifest": asdict(manifest), "rows": [asdict(r) for r in result.rows]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_results(result: SweepResult, manifest: RunManifest, fmt: str = "csv", path=None) -> str:
    """Serialise a sweep.  Writes to ``path`` when given and returns the text.

    A CSV written to a file gets a ``<path>.manifest.json`` sidecar; JSON
    embeds the manifest next to the rows.
    """
    if not result.rows:
        raise ValueError("nothing to emit: empty sweep result")
    if fmt == "csv":
        text = results_csv(result)
    elif fmt == "json":
        text = results_json(result, manifest)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        path = Path(path)
        path.write_text(text)
        if fmt == "csv":
            sidecar = path.with_name(path.name + ".manifest.json")
            sidecar.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return text


def load_results_json(text: str):
    """Inverse of ``results_json``: ``(SweepResult, RunManifest)``."""
    doc = json.loads(text)
    rows = [SweepRow(**r) for r in doc["rows"]]
    return SweepResult(rows), RunManifest(**doc["manifest"])


def load_results_csv(text: str) -> SweepResult:
    lines = text.splitlines()
    if tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise ValueError("unexpected CSV header")
    rows = []
    for line in lines[1:]:
        p, scheme, m, mean, ci, trials = line.split(",")
        rows.append(SweepRow(float(p), scheme, int(m), float(mean), float(ci), int(trials)))
    return SweepResult(rows)

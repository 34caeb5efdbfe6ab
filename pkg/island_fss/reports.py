"""
Result files: per-run front CSVs, the JSON summary, EAF surface CSVs and the
SVG rendering of the attainment surfaces.

Numbers are written with 6 significant digits; every file can be read back
by the matching reader in this module.
"""

import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd
from matplotlib.figure import Figure

from island_fss.errors import ReportError
from island_fss.metrics import AttainmentSurfaces, AucSource, FrontSet
from island_fss.mocore import ObjectivePair, Solution

logger = logging.getLogger(__name__)

FRONT_COLUMNS = ["key", "cardinality_count", "cardinality_score", "train_auc", "test_auc", "mask"]
EAF_COLUMNS = ["level", "cardinality_score", "auc"]
FLOAT_FORMAT = "%.6g"


def front_filename(run: int) -> str:
    return f"front_run{run:02d}.csv"


def write_front(pop: list[Solution], path: str | Path) -> None:
    """One row per solution of the final population."""
    frame = pd.DataFrame(
        [
            {
                "key": s.key,
                "cardinality_count": s.popcount,
                "cardinality_score": s.cardinality,
                "train_auc": s.auc,
                "test_auc": s.test_auc,
                "mask": s.mask_string(),
            }
            for s in pop
        ],
        columns=FRONT_COLUMNS,
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_front_table(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"mask": str})
    except FileNotFoundError as e:
        raise ReportError(f"front file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ReportError(f"{path}: unreadable front file ({e})") from e
    missing = [c for c in FRONT_COLUMNS if c not in frame.columns]
    if missing:
        raise ReportError(f"{path}: missing columns {missing}")
    return frame


def read_front(path: str | Path, run_id: int = 0, auc_source: AucSource = "train") -> FrontSet:
    """Non-dominated objective pairs of a front file."""
    frame = read_front_table(path)
    column = "train_auc" if auc_source == "train" else "test_auc"
    if frame[column].isna().any():
        raise ReportError(f"{path}: column {column} has empty cells")
    # build throwaway solutions so FrontSet.from_population does the filtering
    pop = [
        Solution(
            i,
            [c == "1" for c in row.mask],
            auc=float(row.train_auc),
            cardinality=float(row.cardinality_score),
            test_auc=float(row.test_auc),
        )
        for i, row in enumerate(frame.itertuples(index=False))
    ]
    try:
        return FrontSet.from_population(pop, run_id, auc_source)
    except ValueError as e:
        raise ReportError(f"{path}: {e}") from e


def write_summary(summary: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def read_summary(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ReportError(f"summary not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ReportError(f"{path}: malformed summary ({e})") from e
    if not isinstance(data, dict):
        raise ReportError(f"{path}: malformed summary (not an object)")
    return data


def read_hv_per_run(path: str | Path) -> list[float]:
    """Per-run hypervolume list of a summary file (at least 2 values)."""
    values = read_summary(path).get("hv_per_run")
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
        raise ReportError(f"{path}: malformed summary (hv_per_run must be a list of numbers)")
    if len(values) < 2:
        raise ReportError(f"{path}: hv_per_run needs at least 2 runs, has {len(values)}")
    return [float(v) for v in values]


def write_eaf(surfaces: AttainmentSurfaces, path: str | Path) -> None:
    rows = [
        {"level": level, "cardinality_score": p.cardinality, "auc": p.auc}
        for level, corners in surfaces.levels().items()
        for p in corners
    ]
    pd.DataFrame(rows, columns=EAF_COLUMNS).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_eaf(path: str | Path) -> dict[str, list[ObjectivePair]]:
    try:
        frame = pd.read_csv(path)
    except (FileNotFoundError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ReportError(f"{path}: unreadable EAF file ({e})") from e
    if list(frame.columns) != EAF_COLUMNS:
        raise ReportError(f"{path}: expected columns {EAF_COLUMNS}, got {list(frame.columns)}")
    surfaces: dict[str, list[ObjectivePair]] = {"best": [], "median": [], "worst": []}
    for row in frame.itertuples(index=False):
        surfaces.setdefault(row.level, []).append(ObjectivePair(float(row.cardinality_score), float(row.auc)))
    return surfaces


def render_eaf_svg(surfaces: AttainmentSurfaces, path: str | Path, title: str = "") -> None:
    """Draw the three staircases on [0, 1] x [0, 1] and save as SVG."""
    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot()
    styles = {"best": ("tab:green", "--"), "median": ("tab:blue", "-"), "worst": ("tab:red", ":")}
    for level, corners in surfaces.levels().items():
        if not corners:
            continue
        cards = [p.cardinality for p in corners] + [1.0]
        aucs = [p.auc for p in corners] + [corners[-1].auc]
        color, linestyle = styles[level]
        ax.step(cards, aucs, where="post", color=color, linestyle=linestyle, label=level)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("cardinality score")
    ax.set_ylabel("AUC")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    fig.savefig(path, format="svg")
    logger.debug(f"Rendered EAF surfaces to {path}")

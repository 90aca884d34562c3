"""Run outputs: one ``manifest.json`` plus CSV frames per ``--out`` directory."""
import json
import logging
from pathlib import Path
from typing import Union

import pandas as pd

from glassceiling import __version__
from glassceiling.spsa_optimizer import LogitParams

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.json"
THETA_NAME = "theta"


def write_manifest(out_dir: PathLike, command: str, payload: dict) -> Path:
    """Write the run manifest. Contains no timestamps, so identical runs write identical bytes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"version": __version__, "command": command, **payload}
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def read_manifest(out_dir: PathLike) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))


def write_frame(out_dir: PathLike, name: str, frame: pd.DataFrame) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_frame(out_dir: PathLike, name: str) -> pd.DataFrame:
    return pd.read_csv(Path(out_dir) / f"{name}.csv", float_precision="round_trip")


def write_logit_params(out_dir: PathLike, params: LogitParams, mask=None) -> Path:
    return write_frame(out_dir, THETA_NAME, params.to_frame(mask))


def load_logit_params(path: PathLike) -> LogitParams:
    """Read a ``theta.csv`` written by :func:`write_logit_params`."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = {"class_index", "k", "k_prime", "theta"} - set(frame.columns)
    if missing:
        raise ValueError(f"{path} is missing columns {sorted(missing)}")
    return LogitParams.from_frame(frame)

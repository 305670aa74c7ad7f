#!/usr/bin/env python3
"""
Data I/O - CSV Datasets and JSON Reports

CSV files carry a header row of snake_case column names with the unit in
the name (energy_nj, tau_us, detuning_hz). Values are written with full
float precision (pandas writes the shortest round-trip repr) so that
fit(synth(...)) reads back exactly what synth wrote.
JSON reports carry schema_version, command, inputs and results.
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from errors import ValidationError
from estimation import FringeDataset, RabiDataset
from ion_physics import UNITS

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

RABI_COLUMNS = ("energy_nj", "p_down", "repetitions")
FRINGE_COLUMNS = ("tau_us", "detuning_hz", "p_up", "repetitions")
REVIVAL_COLUMNS = ("tau_us", "visibility", "visibility_err")

PathLike = Union[str, Path]


def _frame(columns: Dict[str, Sequence[float]]) -> pd.DataFrame:
    arrays = {name: np.atleast_1d(np.asarray(values, dtype=float)) for name, values in columns.items()}
    if len({a.size for a in arrays.values()}) > 1:
        raise ValidationError("CSV columns must have equal length")
    return pd.DataFrame(arrays)


def csv_text(columns: Dict[str, Sequence[float]]) -> str:
    """Format equal-length columns as CSV text with a header row"""
    return _frame(columns).to_csv(index=False, lineterminator="\n")


def write_csv(path: PathLike, columns: Dict[str, Sequence[float]]) -> Path:
    """Write equal-length columns to a CSV file with a header row"""
    path = Path(path)
    df = _frame(columns)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")
    logger.debug("wrote %d rows to %s", len(df), path)
    return path


def read_csv(path: PathLike) -> Dict[str, np.ndarray]:
    """Read a headered numeric CSV into {column: array}"""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"input file not found: {path}")
    try:
        # cells stay text so float() parses every value exactly
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ValidationError(f"{path} is empty")
    except pd.errors.ParserError as e:
        raise ValidationError(f"{path}: rows do not match the header ({e})")
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}")

    if df.empty:
        raise ValidationError(f"{path} has no data rows")
    df.columns = [str(name).strip() for name in df.columns]
    if df.isna().any().any():
        raise ValidationError(f"{path}: rows do not match the header")
    try:
        values = df.astype(float)
    except ValueError as e:
        raise ValidationError(f"{path}: non-numeric value ({e})")
    return {name: values[name].to_numpy() for name in values.columns}


def rabi_columns(dataset: RabiDataset) -> Dict[str, np.ndarray]:
    return {
        "energy_nj": dataset.energy / 1e-9,
        "p_down": dataset.p_down,
        "repetitions": dataset.repetitions,
    }


def fringe_columns(dataset: FringeDataset) -> Dict[str, np.ndarray]:
    return {
        "tau_us": dataset.wait_time / 1e-6,
        "detuning_hz": UNITS.angular_to_hz(dataset.detuning),
        "p_up": dataset.p_up,
        "repetitions": dataset.repetitions,
    }


def write_dataset(path: PathLike, dataset: Union[RabiDataset, FringeDataset]) -> Path:
    if isinstance(dataset, RabiDataset):
        return write_csv(path, rabi_columns(dataset))
    return write_csv(path, fringe_columns(dataset))


def _has(columns: Dict[str, np.ndarray], names: Sequence[str]) -> bool:
    return all(name in columns for name in names)


def columns_to_dataset(columns: Dict[str, np.ndarray]) -> Union[RabiDataset, FringeDataset]:
    """Recognize a dataset from its column names"""
    if _has(columns, RABI_COLUMNS):
        return RabiDataset(energy=columns["energy_nj"] * 1e-9, p_down=columns["p_down"],
                           repetitions=columns["repetitions"])
    if _has(columns, FRINGE_COLUMNS):
        return FringeDataset(wait_time=columns["tau_us"] * 1e-6,
                             detuning=UNITS.hz_to_angular(columns["detuning_hz"]),
                             p_up=columns["p_up"], repetitions=columns["repetitions"])
    raise ValidationError(f"unrecognized dataset columns: {sorted(columns)}")


def read_dataset(path: PathLike) -> Union[RabiDataset, FringeDataset]:
    """Read a Rabi or fringe dataset written by write_dataset"""
    return columns_to_dataset(read_csv(path))


def to_jsonable(value):
    """Convert numpy values and non-finite floats into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def build_report(command: str, inputs: dict, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": to_jsonable(inputs),
        "results": to_jsonable(results),
    }


def write_report(path: Optional[PathLike], command: str, inputs: dict, results: dict) -> str:
    """Serialize a report; write it to path when given and return the text"""
    text = json.dumps(build_report(command, inputs, results), indent=2)
    if path is not None:
        path = Path(path)
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            f.write(text + "\n")
    return text


def read_report(path: PathLike) -> dict:
    try:
        with open(path, 'r') as f:
            report = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read report {path}: {e}")
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported report schema {report.get('schema_version')!r}")
    return report

"""
File utilities for the Gaze-Guided Generation Service
"""

import os
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence
import pandas as pd
from ..core.exceptions import FileFormatError, InputValidationError

logger = logging.getLogger(__name__)


def ensure_file_exists(file_path: str) -> str:
    """
    Ensure an input file exists

    Args:
        file_path: Path to check

    Returns:
        The same path

    Raises:
        InputValidationError: when the file is missing
    """
    if not os.path.isfile(file_path):
        raise InputValidationError(f"File not found: {file_path}")
    return file_path


def ensure_parent_dir(file_path: str) -> None:
    """Create the directory of an output file if needed"""
    parent = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(parent, exist_ok=True)


def write_model_file(file_path: str, magic: str, payload: Dict[str, Any]) -> None:
    """
    Write a versioned model file: magic header line followed by sorted JSON

    Args:
        file_path: Output path
        magic: Header identifying format and version
        payload: JSON-serializable model content
    """
    ensure_parent_dir(file_path)
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(magic + "\n")
        f.write(json.dumps(payload, sort_keys=True, separators=(",", ":")))
        f.write("\n")
    logger.info(f"Wrote model file {file_path}")


def read_model_file(file_path: str, magic: str) -> Dict[str, Any]:
    """
    Read a versioned model file written by write_model_file

    Raises:
        FileFormatError: when the header does not match
    """
    ensure_file_exists(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            header = f.readline().rstrip("\n")
            if header != magic:
                raise FileFormatError(f"{file_path}: expected header '{magic}', found '{header}'")
            return json.loads(f.read())
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{file_path}: corrupt model payload: {e}")
    except UnicodeDecodeError as e:
        raise FileFormatError(f"{file_path}: not UTF-8 text: {e}")


def read_csv_checked(file_path: str, required_columns: Sequence[str], sep: str = ",",
                     dtype: Optional[Dict[str, Any]] = None, names: Optional[Sequence[str]] = None,
                     skiprows: int = 0, quoting: int = csv.QUOTE_MINIMAL,
                     comment: Optional[str] = None) -> pd.DataFrame:
    """
    Read a CSV and verify its header

    Args:
        file_path: CSV path
        required_columns: Columns that must be present
        sep: Field separator
        dtype: Column types passed to pandas (text columns as str)
        names: Column names for headerless files (dtype keys are then positions)
        skiprows: Leading lines to skip (e.g. a comment header)
        quoting: csv quoting mode; QUOTE_NONE for word lists where quotes are text
        comment: Character starting a comment line

    Returns:
        DataFrame with the file contents
    """
    ensure_file_exists(file_path)
    try:
        # Only empty fields are missing; words such as "NA" or "null" stay text
        df = pd.read_csv(file_path, sep=sep, keep_default_na=False, na_values=[""], dtype=dtype,
                         header=None if names is not None else "infer", skiprows=skiprows, quoting=quoting,
                         comment=comment)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise FileFormatError(f"{file_path}: {e}")
    if names is not None:
        if df.shape[1] != len(names):
            raise FileFormatError(f"{file_path}: expected {len(names)} fields per line, found {df.shape[1]}")
        df.columns = list(names)
    missing = [c for c in required_columns if c not in df.columns]
    if missing:
        raise FileFormatError(f"{file_path}: missing columns {missing}")
    return df


def read_first_line(file_path: str) -> str:
    """First line of a UTF-8 text file without its newline"""
    ensure_file_exists(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return f.readline().rstrip("\n")
    except UnicodeDecodeError as e:
        raise FileFormatError(f"{file_path}: not UTF-8 text: {e}")


def write_csv(df: pd.DataFrame, file_path: str) -> None:
    """Write a DataFrame as CSV with stable float formatting"""
    ensure_parent_dir(file_path)
    df.to_csv(file_path, index=False, float_format="%.10g", lineterminator="\n")
    logger.info(f"Wrote {len(df)} rows to {file_path}")


def write_jsonl(records: Iterable[Dict[str, Any]], file_path: str) -> int:
    """Write JSON-lines, one record per line; returns the record count"""
    ensure_parent_dir(file_path)
    count = 0
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    logger.info(f"Wrote {count} records to {file_path}")
    return count


def read_jsonl(file_path: str) -> List[Dict[str, Any]]:
    """Read JSON-lines written by write_jsonl"""
    ensure_file_exists(file_path)
    records = []
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise FileFormatError(f"{file_path}:{line_number}: {e}")
    except UnicodeDecodeError as e:
        raise FileFormatError(f"{file_path}: not UTF-8 text: {e}")
    return records


def read_text_lines(file_path: str) -> List[str]:
    """Non-empty stripped lines of a UTF-8 text file"""
    ensure_file_exists(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return [line.strip() for line in f if line.strip()]
    except UnicodeDecodeError as e:
        raise FileFormatError(f"{file_path}: not UTF-8 text: {e}")

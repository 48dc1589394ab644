"""Frame stream files: long-format CSV `t,s1,s2,y` or NDJSON with the same fields."""
import json
import os
from dataclasses import dataclass
from typing import Iterable, List, Union

import numpy as np
import pandas as pd

from core.errors import SchemaError
from core.lattice import CountGrid, FrameStream, validate_grid

COLUMNS = ['t', 's1', 's2', 'y']


@dataclass(frozen=True)
class FrameRecord:
    t: int
    s1: int
    s2: int
    y: Union[int, float]


def _is_ndjson(path: str) -> bool:
    return os.path.splitext(path)[1].lower() in ('.ndjson', '.jsonl')


def _load_table(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise SchemaError(f"Frame file not found: {path}")
    try:
        if _is_ndjson(path):
            if os.path.getsize(path) == 0:
                return pd.DataFrame(columns=COLUMNS)
            return pd.read_json(path, lines=True, dtype=False, precise_float=True)
        return pd.read_csv(path, float_precision='round_trip')
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=COLUMNS)
    except ValueError as e:
        raise SchemaError(f"Cannot parse frame file {path}: {e}") from e


def frames_from_table(table: pd.DataFrame) -> FrameStream:
    """Validate a long-format table and assemble one frame per t"""
    missing = [c for c in COLUMNS if c not in table.columns]
    if missing:
        raise SchemaError(f"Frame table lacks column(s) {missing}")
    if table.empty:
        raise SchemaError("Frame input holds no records")
    if table[COLUMNS].isna().any().any():
        raise SchemaError("Frame input has empty fields")

    index = table[['t', 's1', 's2']]
    if not all(pd.api.types.is_integer_dtype(index[c]) for c in index.columns):
        raise SchemaError("Columns t, s1, s2 must hold integers")
    if (table['t'] < 1).any() or (table['s1'] < 0).any() or (table['s2'] < 0).any():
        raise SchemaError("t must be positive and s1, s2 nonnegative")

    # whole numbers with a negative entry are a real-valued stream
    integer = pd.api.types.is_integer_dtype(table['y']) and bool((table['y'] >= 0).all())
    stream = FrameStream()
    expected_t = 1
    for t, block in table.groupby('t', sort=True):
        if t != expected_t:
            raise SchemaError(f"Frame t={expected_t} is missing (next frame is t={t})")
        expected_t += 1
        rows = int(block['s1'].max()) + 1
        cols = int(block['s2'].max()) + 1
        if len(block) != rows * cols or block.duplicated(['s1', 's2']).any():
            raise SchemaError(f"Frame t={t} does not cover its {rows}x{cols} cells exactly once")
        values = np.empty((rows, cols), dtype=np.int64 if integer else np.float64)
        values[block['s1'].to_numpy(), block['s2'].to_numpy()] = block['y'].to_numpy()
        stream.append(CountGrid(values) if integer else validate_grid(values))
    return stream


def read_frames(path: str) -> FrameStream:
    return frames_from_table(_load_table(path))


def frame_records(frames: Iterable) -> List[FrameRecord]:
    """Flatten frames to records ordered by (t, s1, s2)"""
    records = []
    for t, frame in enumerate(frames, start=1):
        values = np.asarray(getattr(frame, 'values', frame))
        integer = values.dtype.kind in 'iu'
        for (s1, s2), y in np.ndenumerate(values):
            records.append(FrameRecord(t, s1, s2, int(y) if integer else float(y)))
    return records


def write_frames(path: str, frames: Iterable) -> int:
    """Write frames as CSV (or NDJSON for .ndjson/.jsonl); returns the record count"""
    records = frame_records(frames)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    if _is_ndjson(path):
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for r in records:
                f.write(json.dumps({'t': r.t, 's1': r.s1, 's2': r.s2, 'y': r.y}) + '\n')
    else:
        table = pd.DataFrame([(r.t, r.s1, r.s2, r.y) for r in records], columns=COLUMNS)
        table.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
    return len(records)


def read_pool_values(path: str) -> List[float]:
    """Phase-I statistics from a file with a `value` column or one number per line"""
    if not os.path.exists(path):
        raise SchemaError(f"Pool file not found: {path}")
    try:
        table = pd.read_csv(path, float_precision='round_trip')
        if 'value' in table.columns:
            column = table['value']
        else:
            column = pd.read_csv(path, header=None, float_precision='round_trip').iloc[:, 0]
        values = pd.to_numeric(column, errors='raise')
    except pd.errors.EmptyDataError:
        raise SchemaError(f"Pool file {path} holds no values")
    except ValueError as e:
        raise SchemaError(f"Cannot parse pool file {path}: {e}") from e
    if values.isna().any():
        raise SchemaError(f"Pool file {path} has empty entries")
    return values.astype(float).tolist()

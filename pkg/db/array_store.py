"""
array_store.py

Binary array files shared by the band cache and the reference cache.

Layout:
- bytes 0..7   : little-endian uint64, length H of the JSON header
- next H bytes : UTF-8 JSON header (sorted keys)
- remaining    : arrays in header order, little-endian float64 ("<f8")
                 or interleaved re/im complex128 ("<c16")

Writes go through a temporary file and os.replace so readers never
see a partially written file.
"""

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from lattice.errors import CacheFormatError


FORMAT_VERSION = 1
_LENGTH = struct.Struct("<Q")


def _dtype_for(array: np.ndarray) -> str:
    return "<c16" if np.iscomplexobj(array) else "<f8"


def write_arrays(path, header: dict, arrays: dict[str, np.ndarray]) -> Path:
    """
    Persist named arrays under a JSON header.

    Parameters
    ----------
    path : str or Path
        Destination file; parent directories are created.
    header : dict
        JSON-serializable metadata (keys "arrays" and "format_version"
        are reserved).
    arrays : dict
        Name -> array; stored in insertion order.

    Returns
    -------
    Path
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    layout = []
    payload = []
    for name, array in arrays.items():
        dtype = _dtype_for(array)
        data = np.ascontiguousarray(array, dtype=dtype)
        layout.append({"name": name, "dtype": dtype, "shape": list(data.shape)})
        payload.append(data.tobytes())

    full_header = dict(header)
    full_header["format_version"] = FORMAT_VERSION
    full_header["arrays"] = layout
    header_bytes = json.dumps(full_header, sort_keys=True).encode("utf-8")

    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(_LENGTH.pack(len(header_bytes)))
            f.write(header_bytes)
            for chunk in payload:
                f.write(chunk)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise

    return path


def read_arrays(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of write_arrays; returns (header, arrays)."""
    raw = Path(path).read_bytes()

    if len(raw) < _LENGTH.size:
        raise CacheFormatError(f"{path}: file too short for a header")

    (header_len,) = _LENGTH.unpack_from(raw, 0)
    start = _LENGTH.size + header_len
    if start > len(raw):
        raise CacheFormatError(f"{path}: header length {header_len} exceeds file size")

    try:
        header = json.loads(raw[_LENGTH.size:start].decode("utf-8"))
        layout = header.pop("arrays")
    except (ValueError, KeyError) as exc:
        raise CacheFormatError(f"{path}: malformed header ({exc})") from exc

    if header.get("format_version") != FORMAT_VERSION:
        raise CacheFormatError(
            f"{path}: format version {header.get('format_version')!r} is not supported"
        )

    arrays = {}
    offset = start
    for entry in layout:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"], dtype=np.int64))
        end = offset + count * dtype.itemsize
        if end > len(raw):
            raise CacheFormatError(f"{path}: payload for {entry['name']!r} is truncated")
        arrays[entry["name"]] = (
            np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
            .reshape(entry["shape"])
            .astype(dtype.newbyteorder("="))
        )
        offset = end

    return header, arrays

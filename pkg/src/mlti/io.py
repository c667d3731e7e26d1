"""Reading and writing tensors, systems and factored systems.

Text tensor format (one tensor per file)::

    tensor v1
    paired N J1 I1 ... JN IN        (optional; marks an even-order paired tensor)
    E1 E2 ... Ed                    (extents)
    x1 x2 ...                       (entries in ivec order, any whitespace)

Binary format: magic ``MLTIT1``, little-endian ``u32`` order, ``u64``
extents, then ``f64`` entries in ivec order.  Readers detect the format from
the leading bytes.

A system manifest is a JSON object naming the files of ``A``, ``B`` and ``C``
(paths relative to the manifest) plus shape metadata.  An entry whose file
ends in ``.json`` is a factored-tensor manifest listing a rank vector and one
tensor file per core (TT) or per component stack (CP).
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .decomp import GenCpFactors, GenTtCores
from .einstein import EvenPairedTensor
from .systems import FactoredMltiSystem, MltiSystem

__all__ = [
    "FormatError",
    "write_tensor",
    "read_tensor",
    "write_system",
    "read_system",
    "write_factored",
    "read_factored",
]

MAGIC = b"MLTIT1"


class FormatError(ValueError):
    """Malformed input file; the message names the file and line or field."""


# ---------------------------------------------------------------------------
# tensors
# ---------------------------------------------------------------------------


def write_tensor(path, x, binary: bool = False) -> None:
    """Write a dense array or :class:`EvenPairedTensor` (paired header kept in text form)."""
    path = Path(path)
    paired = isinstance(x, EvenPairedTensor)
    data = np.asarray(x.data if paired else x, dtype=float)
    flat = data.ravel(order="F")
    if binary:
        with path.open("wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}Q", *data.shape))
            fh.write(flat.astype("<f8").tobytes())
        return
    lines = ["tensor v1"]
    if paired:
        lines.append("paired " + " ".join(str(v) for v in [x.order, *data.shape]))
    lines.append(" ".join(str(d) for d in data.shape))
    lines.extend(f"{v:.17g}" for v in flat)
    path.write_text("\n".join(lines) + "\n")


def _read_binary(path: Path, raw: bytes) -> np.ndarray:
    try:
        (order,) = struct.unpack_from("<I", raw, 6)
        shape = struct.unpack_from(f"<{order}Q", raw, 10)
    except struct.error as exc:
        raise FormatError(f"{path}: truncated binary header") from exc
    start = 10 + 8 * order
    count = int(np.prod(shape)) if order else 1
    payload = raw[start:]
    if len(payload) != 8 * count:
        raise FormatError(f"{path}: expected {count} entries, found {len(payload) // 8}")
    return np.frombuffer(payload, dtype="<f8").astype(float).reshape(shape, order="F")


def read_tensor(path, paired: bool | None = None):
    """Read a tensor file.

    Returns an :class:`EvenPairedTensor` when the file carries a ``paired``
    header (or ``paired=True`` is requested), otherwise an ndarray.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    header_paired = False
    if raw.startswith(MAGIC):
        data = _read_binary(path, raw)
    else:
        try:
            text = raw.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: not a text or binary tensor file") from exc
        lines = text.splitlines()
        if not lines or lines[0].strip() != "tensor v1":
            raise FormatError(f"{path}:1: expected header 'tensor v1'")
        k = 1
        pair_shape = None
        if len(lines) > 1 and lines[1].split()[:1] == ["paired"]:
            fields = lines[1].split()
            try:
                n = int(fields[1])
                pair_shape = tuple(int(v) for v in fields[2:])
            except (IndexError, ValueError) as exc:
                raise FormatError(f"{path}:2: malformed paired header") from exc
            if len(pair_shape) != 2 * n:
                raise FormatError(f"{path}:2: paired header needs {2 * n} extents")
            header_paired = True
            k = 2
        if len(lines) <= k:
            raise FormatError(f"{path}:{k + 1}: missing extents line")
        try:
            shape = tuple(int(v) for v in lines[k].split())
        except ValueError as exc:
            raise FormatError(f"{path}:{k + 1}: extents must be integers") from exc
        if any(s < 1 for s in shape):
            raise FormatError(f"{path}:{k + 1}: extents must be positive")
        if pair_shape is not None and pair_shape != shape:
            raise FormatError(f"{path}:{k + 1}: extents disagree with paired header")
        entries = []
        for lineno, line in enumerate(lines[k + 1 :], start=k + 2):
            for tok in line.split():
                try:
                    entries.append(float(tok))
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: bad entry {tok!r}") from exc
        count = int(np.prod(shape)) if shape else 1
        if len(entries) != count:
            raise FormatError(f"{path}: expected {count} entries, found {len(entries)}")
        data = np.array(entries, dtype=float).reshape(shape, order="F")
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: entries must be finite")
    if paired or (paired is None and header_paired):
        if data.ndim % 2:
            raise FormatError(f"{path}: a paired tensor needs even order, got {data.ndim}")
        return EvenPairedTensor(data)
    return data


# ---------------------------------------------------------------------------
# factored tensors
# ---------------------------------------------------------------------------


def write_factored(path, f, binary: bool = False) -> None:
    """Write a generalized CP/TT tensor: a JSON manifest plus one file per core."""
    path = Path(path)
    stem = path.stem
    ext = ".bin" if binary else ".tns"
    if isinstance(f, GenTtCores):
        kind, parts, ranks = "ttd", f.cores, list(f.ranks)
    elif isinstance(f, GenCpFactors):
        kind, parts, ranks = "cpd", f.components, [f.kronecker_rank]
    else:
        raise TypeError("expected GenTtCores or GenCpFactors")
    files = []
    for n, part in enumerate(parts, start=1):
        name = f"{stem}_{n}{ext}"
        write_tensor(path.parent / name, part, binary=binary)
        files.append(name)
    manifest = {
        "format": "mlti-factored v1",
        "kind": kind,
        "pairs": [list(p) for p in f.pairs],
        "ranks": ranks,
        "files": files,
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def read_factored(path):
    path = Path(path)
    m = _load_json(path)
    if m.get("format") != "mlti-factored v1":
        raise FormatError(f"{path}: field 'format' must be 'mlti-factored v1'")
    try:
        parts = [np.asarray(read_tensor(path.parent / name, paired=False)) for name in m["files"]]
        kind = m["kind"]
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc.args[0]!r}") from exc
    try:
        if kind == "ttd":
            f = GenTtCores(parts)
            if list(f.ranks) != list(m.get("ranks", f.ranks)):
                raise FormatError(f"{path}: field 'ranks' disagrees with the core shapes")
        elif kind == "cpd":
            f = GenCpFactors(parts)
        else:
            raise FormatError(f"{path}: field 'kind' must be 'ttd' or 'cpd'")
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: inconsistent cores ({exc})") from exc
    return f


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


def write_system(path, s, binary: bool = False) -> None:
    """Write an :class:`MltiSystem` or :class:`FactoredMltiSystem` with its manifest."""
    path = Path(path)
    stem = path.stem
    entries = {}
    if isinstance(s, FactoredMltiSystem):
        for key, part in zip("ABC", (s.a, s.b, s.c)):
            name = f"{stem}_{key}.json"
            write_factored(path.parent / name, part, binary=binary)
            entries[key] = name
        full = None
    elif isinstance(s, MltiSystem):
        ext = ".bin" if binary else ".tns"
        for key, part in zip("ABC", (s.a, s.b, s.c)):
            name = f"{stem}_{key}{ext}"
            write_tensor(path.parent / name, part, binary=binary)
            entries[key] = name
        full = s
    else:
        raise TypeError("expected MltiSystem or FactoredMltiSystem")
    pa = s.a.pairs
    pb = s.b.pairs
    pc = s.c.pairs
    manifest = {
        "format": "mlti-system v1",
        **entries,
        "state_shape": [j for j, _ in pa],
        "input_shape": [k for _, k in pb],
        "output_shape": [i for i, _ in pc],
    }
    if full is None and s.hinf_error is not None:
        manifest["hinf_error"] = s.hinf_error
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def read_system(path):
    """Load a system manifest; returns :class:`MltiSystem` or :class:`FactoredMltiSystem`."""
    path = Path(path)
    m = _load_json(path)
    if m.get("format") != "mlti-system v1":
        raise FormatError(f"{path}: field 'format' must be 'mlti-system v1'")
    parts = []
    for key in "ABC":
        if key not in m:
            raise FormatError(f"{path}: missing field {key!r}")
        name = m[key]
        target = path.parent / name
        if str(name).endswith(".json"):
            parts.append(read_factored(target))
        else:
            parts.append(read_tensor(target, paired=True))
    try:
        if all(isinstance(p, EvenPairedTensor) for p in parts):
            s = MltiSystem(*parts)
        elif any(isinstance(p, EvenPairedTensor) for p in parts):
            raise FormatError(f"{path}: mixing dense and factored tensors is not supported")
        else:
            s = FactoredMltiSystem(*parts, hinf_error=m.get("hinf_error"))
            s.to_system()  # conformability check
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from exc
    shapes = {
        "state_shape": [j for j, _ in s.a.pairs],
        "input_shape": [k for _, k in s.b.pairs],
        "output_shape": [i for i, _ in s.c.pairs],
    }
    for key, val in shapes.items():
        if key in m and list(m[key]) != val:
            raise FormatError(f"{path}: field {key!r} is {m[key]} but the tensors give {val}")
    return s

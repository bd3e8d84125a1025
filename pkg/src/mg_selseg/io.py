"""PGM images, marker files, overlays and run reports.

Images are stored as in the file: ``values[row, column]`` with intensities
scaled to ``[0, 1]``. Marker files list ``x y`` pixel pairs with ``x``
pointing right and ``y`` down, so a marker becomes the array index
``(y, x)``.
"""
import json
import math
import re

import numpy as np

from .errors import FormatError, ParameterError
from .grid import Field2D
from .model import MarkerSet

REPORT_FIELDS = (
    "cycles", "energy_per_cycle", "rel_change_per_cycle", "wall_time_seconds",
    "mu_max", "mu_avg", "mu_max_D", "mu_avg_D", "worst_pixels",
)

_WS = b" \t\r\n\v\f"


def _header(data):
    """Parse magic, width, height and maxval; returns them with the payload offset."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        if pos >= len(data):
            raise FormatError(f"header ends at byte {pos} after {len(tokens)} of 4 fields")
        start = pos
        while pos < len(data) and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tokens.append((data[start:pos], start))
    magic, off = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported magic {magic[:8]!r} at byte {off}; expected P2 or P5")
    vals = []
    for tok, off in tokens[1:]:
        if not tok.isdigit():
            raise FormatError(f"expected an unsigned integer at byte {off}, found {tok[:16]!r}")
        vals.append(int(tok))
    width, height, maxval = vals
    if width < 1 or height < 1:
        raise FormatError(f"image dimensions {width}x{height} must be positive (byte {tokens[1][1]})")
    if not 1 <= maxval <= 65535:
        raise FormatError(f"maxval {maxval} at byte {tokens[3][1]} outside 1..65535")
    # exactly one whitespace byte separates the header from a binary payload
    if pos >= len(data) or data[pos] not in _WS:
        if magic == b"P5":
            raise FormatError(f"missing whitespace after maxval at byte {pos}")
    return magic, width, height, maxval, pos + 1


def load_image(path):
    """Read a P2 or P5 greymap (8 or 16 bit) as a `Field2D` in ``[0, 1]``.

    Raises `FormatError` naming the byte offset of the first problem.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic, width, height, maxval, start = _header(data)
    count = width * height
    if magic == b"P5":
        size = 1 if maxval < 256 else 2
        need = count * size
        if len(data) - start < need:
            raise FormatError(
                f"truncated payload: {need} bytes expected from byte {start}, file ends at byte {len(data)}"
            )
        raw = np.frombuffer(data, dtype=np.uint8 if size == 1 else ">u2", count=count, offset=start)
    else:
        raw = np.empty(count, dtype=np.int64)
        k = 0
        for m in re.finditer(rb"#[^\r\n]*|[^\s#]+", data[start - 1:]):
            tok = m.group()
            if tok.startswith(b"#"):
                continue
            off = start - 1 + m.start()
            if k == count:
                raise FormatError(f"extra sample at byte {off}")
            if not tok.isdigit():
                raise FormatError(f"invalid sample {tok[:16]!r} at byte {off}")
            raw[k] = int(tok)
            k += 1
        if k < count:
            raise FormatError(f"truncated payload: {k} of {count} samples before byte {len(data)}")
    if raw.max(initial=0) > maxval:
        bad = int(np.argmax(raw > maxval))
        raise FormatError(f"sample {bad} exceeds maxval {maxval}")
    return Field2D(raw.reshape(height, width).astype(float) / maxval)


def write_pgm(path, values, maxval=255):
    """Write ``values`` in ``[0, 1]`` as a binary P5 file; 16-bit when ``maxval > 255``."""
    v = np.asarray(values.values if isinstance(values, Field2D) else values, dtype=float)
    if v.ndim != 2:
        raise ParameterError(f"need a 2D array, got shape {v.shape}")
    if not 1 <= maxval <= 65535:
        raise ParameterError(f"maxval {maxval} outside 1..65535")
    q = np.rint(np.clip(v, 0.0, 1.0) * maxval).astype(">u2" if maxval > 255 else np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (v.shape[1], v.shape[0], maxval))
        fh.write(q.tobytes())


def load_markers(path, shape=None):
    """Read ``x y`` integer pairs (one per line, ``#`` comments) as a `MarkerSet`.

    With ``shape`` every marker must lie inside the image. Errors carry the
    offending line number.
    """
    pts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            try:
                if len(parts) != 2:
                    raise ValueError
                x, y = (int(p) for p in parts)
            except ValueError:
                raise ParameterError(f"{path}:{lineno}: expected two integers 'x y', got {text!r}") from None
            if shape is not None and not (0 <= y < shape[0] and 0 <= x < shape[1]):
                raise ParameterError(
                    f"{path}:{lineno}: marker ({x}, {y}) outside the {shape[1]}x{shape[0]} image"
                )
            pts.append((y, x))
    if len(pts) < 3:
        raise ParameterError(f"{path}: k >= 3 required, found {len(pts)} marker(s)")
    return MarkerSet(tuple(pts), None if shape is None else tuple(shape))


def write_markers(path, markers):
    """Inverse of `load_markers`."""
    with open(path, "w") as fh:
        for i, j in markers.points:
            fh.write(f"{int(j)} {int(i)}\n")


def zero_crossings(phi):
    """Pixels whose sign (``phi > 0``) differs from at least one 4-neighbour."""
    phi = np.asarray(phi.values if isinstance(phi, Field2D) else phi)
    pos = phi > 0
    out = np.zeros(pos.shape, dtype=bool)
    dv = pos[1:, :] != pos[:-1, :]
    dh = pos[:, 1:] != pos[:, :-1]
    out[1:, :] |= dv
    out[:-1, :] |= dv
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    return out


def write_mask(path, mask):
    write_pgm(path, (np.asarray(mask.values if isinstance(mask, Field2D) else mask) > 0).astype(float))


def write_overlay(path, image, phi):
    """Greyscale image with the zero level set drawn in white."""
    z = np.array(image.values if isinstance(image, Field2D) else image, dtype=float)
    z[zero_crossings(phi)] = 1.0
    write_pgm(path, z)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.generic):
        return _clean(v.item())
    return v


def report_dict(stats=None, lfa=None):
    """Report fields from `SolveStats` and/or `LfaReport`; absent ones are ``None``."""
    rep = dict.fromkeys(REPORT_FIELDS)
    if stats is not None:
        rep["cycles"] = int(stats.cycles_run)
        rep["energy_per_cycle"] = [float(e) for e in stats.energy_per_cycle]
        rep["rel_change_per_cycle"] = [float(r) for r in stats.rel_change_per_cycle]
        rep["wall_time_seconds"] = float(stats.wall_time_total)
    if lfa is not None:
        for k in ("mu_max", "mu_avg", "mu_max_D", "mu_avg_D"):
            rep[k] = float(getattr(lfa, k))
        rep["worst_pixels"] = [list(row) for row in lfa.worst_pixels]
    return {k: _clean(v) for k, v in rep.items()}


def write_report(path, stats=None, lfa=None):
    """One ``key = json`` line per field, in the fixed field order."""
    rep = report_dict(stats, lfa)
    with open(path, "w") as fh:
        for k in REPORT_FIELDS:
            fh.write(f"{k} = {json.dumps(rep[k])}\n")
    return rep


def read_report(path):
    """Parse a report written by `write_report` back into a dict."""
    rep = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            if not sep or key not in REPORT_FIELDS:
                raise FormatError(f"{path}:{lineno}: unknown or malformed entry {line.strip()[:40]!r}")
            try:
                rep[key] = json.loads(val)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: bad value for {key}: {exc.msg}") from None
    missing = [k for k in REPORT_FIELDS if k not in rep]
    if missing:
        raise FormatError(f"{path}: missing fields {', '.join(missing)}")
    return rep

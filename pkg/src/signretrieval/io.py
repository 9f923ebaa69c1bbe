"""Plain-text formats for vectors, layouts and results.

* complex vectors: CSV with header ``index,re,im`` or a JSON list of
  ``[re, im]`` pairs;
* real vectors: single-column CSV (an optional non-numeric header line is
  skipped);
* support curves: CSV ``tau_s,e_out``.

Floats are written with ``repr`` so that a round trip is exact and repeated
runs produce byte-identical files.
"""

import csv
import io
import json

import numpy as np

from .simulation import Layout


class FormatError(ValueError):
    """Raised for files that cannot be parsed into the expected structure."""


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc


def _float(token, where):
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"{where}: not a number: {token!r}") from None


def _rows(text):
    return [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]


def format_real_csv(values, header="value"):
    lines = [header] + [repr(float(v)) for v in np.asarray(values, dtype=float)]
    return "\n".join(lines) + "\n"


def parse_real_csv(text, where="<string>"):
    rows = _rows(text)
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{where}: no data rows")
    if any(len(r) != 1 for r in rows):
        raise FormatError(f"{where}: expected a single column")
    values = np.array([_float(r[0], where) for r in rows])
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{where}: non-finite values")
    return values


def format_complex_csv(values):
    values = np.asarray(values, dtype=complex)
    lines = ["index,re,im"]
    lines += [f"{k},{float(v.real)!r},{float(v.imag)!r}" for k, v in enumerate(values)]
    return "\n".join(lines) + "\n"


def parse_complex_csv(text, where="<string>"):
    rows = _rows(text)
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{where}: no data rows")
    if any(len(r) != 3 for r in rows):
        raise FormatError(f"{where}: expected columns index,re,im")
    index = [int(_float(r[0], where)) for r in rows]
    if index != list(range(len(rows))):
        raise FormatError(f"{where}: indices must run 0..N-1 in order")
    return np.array([complex(_float(r[1], where), _float(r[2], where)) for r in rows])


def complex_to_json(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex)]


def complex_from_json(pairs, where="<json>"):
    if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
        raise FormatError(f"{where}: expected a list of [re, im] pairs")
    try:
        return np.array([complex(float(a), float(b)) for a, b in pairs])
    except (TypeError, ValueError):
        raise FormatError(f"{where}: non-numeric entry") from None


def read_real_vector(path):
    """Read a real vector from a single-column CSV (or the ``re`` column of a complex CSV)."""
    text = _read_text(path)
    rows = _rows(text)
    if rows and len(rows[0]) == 3:
        values = parse_complex_csv(text, path)
        if np.any(values.imag != 0):
            raise FormatError(f"{path}: expected real values, found nonzero imaginary parts")
        return values.real
    return parse_real_csv(text, path)


def read_complex_vector(path):
    text = _read_text(path)
    if path.endswith(".json"):
        try:
            return complex_from_json(json.loads(text), path)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from None
    return parse_complex_csv(text, path)


def read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_layout(path):
    """Layout JSON ``{"len1": a, "gap": g, "len2": b, "offset": o}``; ``offset`` defaults to 0."""
    d = read_json(path)
    if not isinstance(d, dict):
        raise FormatError(f"{path}: layout must be a JSON object")
    missing = {"len1", "gap", "len2"} - set(d)
    extra = set(d) - {"len1", "gap", "len2", "offset"}
    if missing or extra:
        raise FormatError(f"{path}: layout keys must be len1, gap, len2[, offset]")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in d.values()):
        raise FormatError(f"{path}: layout values must be integers")
    return Layout(d["len1"], d["gap"], d["len2"], d.get("offset", 0))


def format_curve_csv(curve):
    lines = ["tau_s,e_out"] + [f"{int(t)},{float(e)!r}" for t, e in curve]
    return "\n".join(lines) + "\n"


def dumps(obj):
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True

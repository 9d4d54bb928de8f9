"""Deterministic text output: JSON and CSV with 17-significant-digit floats.

Floats are rendered with '%.17g' so any IEEE double round-trips exactly and
two runs that produce the same numbers produce the same bytes. The standard
json module cannot override float formatting, hence the small writer here.
"""

import numpy as np


def format_float(value) -> str:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError("cannot serialize non-finite value %r" % value)
    return "%.17g" % value


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def dumps_json(obj, indent: int = 2) -> str:
    """Serialize dicts, sequences, strings, numbers, bools and None."""
    pieces = []
    _write(obj, pieces, indent, 0)
    return "".join(pieces) + "\n"


def _write(obj, pieces, indent, depth):
    pad = " " * (indent * depth)
    inner = " " * (indent * (depth + 1))
    if obj is None:
        pieces.append("null")
    elif isinstance(obj, bool):
        pieces.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        pieces.append(format_float(obj))
    elif isinstance(obj, str):
        pieces.append('"%s"' % _escape(obj))
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for pos, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be strings")
            pieces.append('%s"%s": ' % (inner, _escape(key)))
            _write(value, pieces, indent, depth + 1)
            pieces.append(",\n" if pos < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for pos, value in enumerate(items):
            pieces.append(inner)
            _write(value, pieces, indent, depth + 1)
            pieces.append(",\n" if pos < len(items) - 1 else "\n")
        pieces.append(pad + "]")
    else:
        raise TypeError("cannot serialize %r" % type(obj))


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        if any(ch in value for ch in ',"\n\r'):
            return '"%s"' % value.replace('"', '""')
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    raise TypeError("cannot serialize %r in CSV" % type(value))


def format_csv(header, rows) -> str:
    """Render a header list plus row lists as CSV text with \\n endings."""
    lines = [",".join(_csv_cell(cell) for cell in header)]
    for row in rows:
        lines.append(",".join(_csv_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"

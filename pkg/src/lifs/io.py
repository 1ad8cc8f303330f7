"""CSV/JSON writers with round-trip float formatting."""

import json

import numpy as np


def fmt(v):
    """17 significant digits; round-trips every finite double."""
    return "%.17g" % v


def csv_text(header, columns):
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, columns):
    with open(path, "w", newline="\n") as fh:
        fh.write(csv_text(header, columns))


def read_csv(path):
    """Return ``(header, rows)`` with every cell kept as a string."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")

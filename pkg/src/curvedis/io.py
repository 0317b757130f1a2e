"""Curve, trace and table files. All writes go through a temp file and rename."""

import csv
import io
import json
import os
import tempfile

import numpy as np

from .curves import DiscreteCurve
from .manifolds import from_tag


def atomic_write(path, text):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, np.generic):
        return v.item()
    return v


def curve_to_json(curve, metadata=None):
    doc = {
        "manifold": curve.manifold.tag,
        "N": curve.N,
        "point_shape": list(curve.manifold.point_shape),
        # repr round-trips floats exactly through json
        "coords": [float(v) for v in np.asarray(curve.points).ravel()],
        "metadata": _plain(metadata or {}),
    }
    return json.dumps(doc, indent=1)


def curve_from_json(text):
    doc = json.loads(text)
    m = from_tag(doc["manifold"])
    pts = np.array(doc["coords"], dtype=float).reshape((int(doc["N"]),) + m.point_shape)
    return DiscreteCurve(m, pts), doc.get("metadata", {})


def save_curve(path, curve, metadata=None):
    atomic_write(path, curve_to_json(curve, metadata))


def load_curve(path):
    with open(path) as fh:
        return curve_from_json(fh.read())


def rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def save_csv(path, header, rows):
    atomic_write(path, rows_to_csv(header, rows))


def save_measure(path, measure):
    atomic_write(path, measure.to_json())


def load_measure(path):
    from .measures import SpectralMeasure

    with open(path) as fh:
        return SpectralMeasure.from_json(fh.read())

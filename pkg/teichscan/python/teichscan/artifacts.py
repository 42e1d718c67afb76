"""
Reading and writing schema-versioned artifacts: JSON documents, the scan CSV and the SVG
plot of a scan. Every write goes to a temporary file in the target directory first and is
moved into place with os.replace.

"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402

from .curves import CURVE_SCHEMA, curve_from_dict  # noqa: E402
from .errors import SchemaError  # noqa: E402
from .surface import SURFACE_SCHEMA, FlatSurface  # noqa: E402

logger = logging.getLogger(__name__)

SCHEMAS = (
    SURFACE_SCHEMA,
    CURVE_SCHEMA,
    "teichscan-thickthin/1",
    "teichscan-estimate/1",
    "teichscan-scan/1",
    "teichscan-quasiconvexity/1",
    "teichscan-suite/1",
)

SCAN_SCHEMA = "teichscan-scan/1"


def write_atomic(path, text):
    """
    Writes text to path through a temporary sibling file.

    """
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)

    handle, temporary = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise

    logger.info("Wrote %s", path)


def _plain(value):
    """
    Makes a payload JSON friendly: non-finite floats become strings.

    """
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _plain(value.item())

    return value


def dumps(payload):
    """
    Serialises a payload; floats keep 17 significant digits.

    """
    if payload.get("schema") not in SCHEMAS:
        raise SchemaError(f"Refusing to write unknown schema {payload.get('schema')!r}")

    return json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def store_json(payload, path):
    write_atomic(path, dumps(payload))


def load_json(path, expected=None):
    """
    Reads a JSON artifact and checks its schema version.

    """
    with open(path, encoding="utf-8") as stream:
        try:
            payload = json.load(stream)
        except json.JSONDecodeError as error:
            raise SchemaError(f"{path} is not valid JSON: {error}") from error

    schema = payload.get("schema") if isinstance(payload, dict) else None
    if schema not in SCHEMAS:
        raise SchemaError(f"{path} has unknown schema {schema!r}")
    if expected is not None and schema != expected:
        raise SchemaError(f"{path} has schema {schema!r}, expected {expected!r}")

    return payload


def store_surface(surface, path):
    store_json(surface.to_dict(), path)


def load_surface(path):
    return FlatSurface.from_dict(load_json(path, SURFACE_SCHEMA))


def load_curve(path, cylinders=None):
    return curve_from_dict(load_json(path, CURVE_SCHEMA), cylinders)


def scan_csv(result):
    """
    Returns the scan as CSV text, preceded by a schema comment line.

    """
    from .experiments import CSV_HEADER

    buffer = io.StringIO()
    buffer.write(f"# schema: {SCAN_SCHEMA}\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow(row.csv_row())

    return buffer.getvalue()


def store_scan_csv(result, path):
    write_atomic(path, scan_csv(result))


def load_scan_csv(path):
    """
    Reads a scan CSV back as a list of dicts keyed by the header.

    """
    from .experiments import CSV_HEADER

    with open(path, encoding="utf-8", newline="") as stream:
        first = stream.readline().strip()
        if first != f"# schema: {SCAN_SCHEMA}":
            raise SchemaError(f"{path} does not start with the {SCAN_SCHEMA} schema line")

        reader = csv.DictReader(stream)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise SchemaError(f"{path} has header {reader.fieldnames}, expected {list(CSV_HEADER)}")

        return list(reader)


def scan_svg(result, title=None):
    """
    Returns an SVG line plot of the ext and hyp series against t.

    """
    # A fixed hash salt and no date keep the output reproducible
    with plt.rc_context({"svg.hashsalt": SCAN_SCHEMA}):
        fig, ax = plt.subplots(figsize=(6, 4))
        try:
            for kind, style in (("ext", "-"), ("hyp", "--")):
                times, values = result.series(kind)
                ax.plot(times, values, style, label=kind)

            ax.set_xlabel("t")
            ax.set_yscale("log")
            ax.set_title(title or f"{result.curve} on {result.surface}"[:80])
            ax.legend()

            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    return buffer.getvalue()


def store_scan_svg(result, path, title=None):
    write_atomic(path, scan_svg(result, title))

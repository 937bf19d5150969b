"""Line-oriented input helpers shared by the loaders."""

import os
from contextlib import contextmanager


@contextmanager
def open_lines(source):
    """Yield an iterator of ``(line_no, fields)`` for a text/byte source.

    ``source`` may be a filesystem path, an open file (text or binary) or any
    iterable of ``str``/``bytes`` lines.  Blank lines and lines starting with
    ``#`` are skipped; line numbers are 1-based and count every physical line.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            yield _fields(fh)
    else:
        yield _fields(source)


def _fields(lines):
    for line_no, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_no, line.split()


def source_name(source):
    if isinstance(source, (str, os.PathLike)):
        return os.fspath(source)
    return getattr(source, "name", None)

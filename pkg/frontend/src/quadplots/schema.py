"""Loader for the tracking-run CSV log.

The simulator CLI writes one CSV per run: a single header row followed
by one row per sample, 33 numeric columns in a fixed order.  That header
is the whole interface between the two tools, so the loader checks it
strictly and names the first discrepancy it finds instead of guessing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

# Column names, in file order, as the simulator writes them.  Kept as a
# literal tuple here on purpose: this package must notice when the file
# format drifts, not silently follow it.
LOG_HEADER = (
    "t", "x", "y", "z", "theta", "psi",
    "x_ref", "y_ref", "z_ref", "ex", "ey", "ez",
    "u0", "u1", "u2", "beta",
    "eta1", "eta2", "eta3", "eta4", "eta5", "eta6",
    "ehat11", "ehat12", "ehat13", "ehat14", "sigma1",
    "ehat21", "ehat22", "ehat23", "ehat24", "sigma2",
    "env_ok",
)

_INDEX = {name: i for i, name in enumerate(LOG_HEADER)}


class SchemaError(ValueError):
    """The file is not a tracking-run log (header or body malformed)."""


@dataclass
class LogTable:
    """Parsed log: column access by name, rows in file order."""

    path: str
    data: np.ndarray                      # (n, 33) float64
    sha256: str = field(repr=False, default="")

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] != len(LOG_HEADER):
            raise SchemaError(
                "log body must be n x %d, got shape %r"
                % (len(LOG_HEADER), self.data.shape)
            )

    def __len__(self):
        return self.data.shape[0]

    def col(self, name: str) -> np.ndarray:
        try:
            return self.data[:, _INDEX[name]]
        except KeyError:
            raise SchemaError("no such log column: %r" % (name,)) from None

    @property
    def t(self) -> np.ndarray:
        return self.col("t")


def _header_permutation(names: list[str], path: str) -> list[int]:
    """Map the file's header onto canonical order.

    Column lookup is by name, so a reordered file is fine; the returned
    list gives, for each canonical column, its position in the file.
    Anything else (missing, unexpected, duplicated names) raises with
    the first offending column named, because a generic "header
    mismatch" sends people diffing files by hand.
    """
    got = [n.strip() for n in names]
    got_set = set(got)
    for name in LOG_HEADER:
        if name not in got_set:
            raise SchemaError(
                "%s: missing log column %r (header has %d names, expected %d)"
                % (path, name, len(got), len(LOG_HEADER))
            )
    for name in got:
        if name not in _INDEX:
            raise SchemaError(
                "%s: unexpected log column %r (header has %d names, expected %d)"
                % (path, name, len(got), len(LOG_HEADER))
            )
    if len(got) != len(LOG_HEADER):
        seen: set[str] = set()
        for name in got:
            if name in seen:
                raise SchemaError("%s: duplicated log column %r" % (path, name))
            seen.add(name)
    return [got.index(name) for name in LOG_HEADER]


def load_log(path: str) -> LogTable:
    """Read a tracking-run CSV and return it as a LogTable.

    The file is opened read-only and its bytes are hashed before
    parsing, so callers can assert afterwards that rendering did not
    touch the input.  Raises SchemaError for anything that is not a
    well-formed log; lets OSError through untouched.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError("%s: not a text file: %s" % (path, exc)) from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("%s: empty file" % (path,))
    perm = _header_permutation(lines[0].split(","), path)

    body = lines[1:]
    if not body:
        raise SchemaError("%s: header only, no samples" % (path,))
    rows = np.empty((len(body), len(LOG_HEADER)), dtype=float)
    for i, ln in enumerate(body):
        parts = ln.split(",")
        if len(parts) != len(LOG_HEADER):
            raise SchemaError(
                "%s: row %d has %d fields, expected %d"
                % (path, i + 2, len(parts), len(LOG_HEADER))
            )
        try:
            rows[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise SchemaError("%s: row %d: %s" % (path, i + 2, exc)) from None
    # Store columns in canonical order regardless of file order.
    return LogTable(path=path, data=rows[:, perm], sha256=digest)

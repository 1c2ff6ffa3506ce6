"""Binary field snapshots.

Layout: a 64-byte ASCII header padded with spaces, then ``nfields`` row-major
little-endian float64 arrays of shape (nx, ny) holding real-space values.

    DOISPEC1 DA <nx> <ny> <nfields> <time>
    DOISPEC1 DOI <nx> <ny> <nfields> <time> <J>
    DOISPEC1 MOM <n> <nx> <ny> <nfields> <time>

Model snapshots carry the state fields and, when the multistep integrator has one,
the previous explicit tendency in the same layout (so ``nfields`` doubles). Restarting
from such a file continues the run bit for bit.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from core.errors import SnapshotFormatError
from core.models.grid import Grid
from core.models.moment_data import MomentTensor
from core.models.states import DAState, DoiState

logger = logging.getLogger(__name__)

MAGIC = "DOISPEC1"
HEADER_SIZE = 64
DTYPE = np.dtype("<f8")

State = Union[DAState, DoiState]


@dataclass(frozen=True)
class SnapshotHeader:
    """Decoded header.

    Attributes:
        kind: ``DA``, ``DOI`` or ``MOM n``.
        nx, ny: Grid size.
        nfields: Number of stored arrays.
        t: Simulated time, written with full precision.
        J: Angular cutoff of a Doi snapshot.
        order: Moment order of a ``MOM`` snapshot.
    """
    kind: str
    nx: int
    ny: int
    nfields: int
    t: float
    J: Optional[int] = None
    order: Optional[int] = None

    def encode(self) -> bytes:
        tokens = [MAGIC, self.kind, str(self.nx), str(self.ny), str(self.nfields), repr(float(self.t))]
        if self.J is not None:
            tokens.append(str(self.J))
        text = " ".join(tokens)
        if len(text) > HEADER_SIZE:
            raise SnapshotFormatError(f"header {text!r} exceeds {HEADER_SIZE} bytes")
        return text.ljust(HEADER_SIZE).encode("ascii")

    @classmethod
    def decode(cls, raw: bytes) -> "SnapshotHeader":
        if len(raw) < HEADER_SIZE:
            raise SnapshotFormatError(f"file shorter than the {HEADER_SIZE}-byte header")
        try:
            tokens = raw[:HEADER_SIZE].decode("ascii").split()
        except UnicodeDecodeError as e:
            raise SnapshotFormatError("header is not ASCII") from e
        if not tokens or tokens[0] != MAGIC:
            raise SnapshotFormatError(f"missing {MAGIC} magic")
        try:
            if len(tokens) >= 2 and tokens[1] == "MOM":
                order = int(tokens[2])
                nx, ny, nfields, t = int(tokens[3]), int(tokens[4]), int(tokens[5]), float(tokens[6])
                return cls(f"MOM {order}", nx, ny, nfields, t, order=order)
            kind = tokens[1]
            nx, ny, nfields, t = int(tokens[2]), int(tokens[3]), int(tokens[4]), float(tokens[5])
            if kind == "DA":
                return cls(kind, nx, ny, nfields, t)
            if kind == "DOI":
                return cls(kind, nx, ny, nfields, t, J=int(tokens[6]))
        except (IndexError, ValueError) as e:
            raise SnapshotFormatError(f"malformed header {' '.join(tokens)!r}") from e
        raise SnapshotFormatError(f"unknown snapshot kind {tokens[1]!r}")


@dataclass(frozen=True)
class Snapshot:
    header: SnapshotHeader
    fields: np.ndarray


def _write(path: Path, header: SnapshotHeader, fields: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(fields, dtype=DTYPE)
    with open(path, "wb") as handle:
        handle.write(header.encode())
        handle.write(payload.tobytes(order="C"))
    return path


def write_snapshot(path: Union[str, Path], state: State) -> Path:
    """Write a model state (and its stored tendency, if any)."""
    fields = state.pack()
    if state.tendency is not None:
        fields = np.concatenate([fields, state.tendency])
    nx, ny = state.grid.shape
    if isinstance(state, DAState):
        header = SnapshotHeader("DA", nx, ny, fields.shape[0], state.t)
    else:
        header = SnapshotHeader("DOI", nx, ny, fields.shape[0], state.t, J=state.J)
    written = _write(Path(path), header, fields)
    logger.info(f"Snapshot {written} written at t={state.t:.6g}")
    return written


def write_moment_snapshot(path: Union[str, Path], moments: MomentTensor, t: float) -> Path:
    """Dump the independent components of M_n, ordered by decreasing power of m₁."""
    grid = next(iter(moments.components.values())).grid
    fields = np.stack([moments.by_exponents(p, moments.n - p).values for p in range(moments.n, -1, -1)])
    header = SnapshotHeader(f"MOM {moments.n}", grid.nx, grid.ny, fields.shape[0], t, order=moments.n)
    return _write(Path(path), header, fields)


def read_snapshot(path: Union[str, Path]) -> Snapshot:
    """
    Raises:
        SnapshotFormatError: on a bad header, a payload of the wrong size or non-finite values.
    """
    raw = Path(path).read_bytes()
    header = SnapshotHeader.decode(raw)
    expected = header.nfields * header.nx * header.ny * DTYPE.itemsize
    payload = raw[HEADER_SIZE:]
    if len(payload) != expected:
        raise SnapshotFormatError(f"payload holds {len(payload)} bytes, header implies {expected}")
    fields = np.frombuffer(payload, dtype=DTYPE).reshape(header.nfields, header.nx, header.ny)
    if not np.all(np.isfinite(fields)):
        raise SnapshotFormatError("snapshot contains non-finite values")
    return Snapshot(header, fields.astype(np.float64))


def _base_count(header: SnapshotHeader) -> int:
    if header.kind == "DA":
        return DAState.FIELD_COUNT
    if header.kind == "DOI":
        return DoiState.field_count(header.J or 0)
    return header.order + 1 if header.order is not None else header.nfields


def state_from_snapshot(snapshot: Snapshot, dealias_fraction: float = 2.0 / 3.0) -> State:
    header = snapshot.header
    if header.kind not in ("DA", "DOI"):
        raise SnapshotFormatError(f"{header.kind} snapshot does not hold a model state")
    base = _base_count(header)
    if header.nfields not in (base, 2 * base):
        raise SnapshotFormatError(f"{header.kind} snapshot has {header.nfields} fields, expected {base} or {2 * base}")
    grid = Grid(nx=header.nx, ny=header.ny, dealias_fraction=dealias_fraction)
    data = snapshot.fields[:base]
    tendency = np.array(snapshot.fields[base:]) if header.nfields == 2 * base else None
    cls = DAState if header.kind == "DA" else DoiState
    return cls.unpack(grid, np.array(data), header.t, 0, tendency)


def load_state(path: Union[str, Path], dealias_fraction: float = 2.0 / 3.0) -> State:
    return state_from_snapshot(read_snapshot(path), dealias_fraction)


def validate_snapshot(path: Union[str, Path]) -> SnapshotHeader:
    """Read a snapshot and check its field count for its kind; returns the header."""
    snapshot = read_snapshot(path)
    header = snapshot.header
    base = _base_count(header)
    if header.nfields not in (base, 2 * base):
        raise SnapshotFormatError(f"{header.kind} snapshot has {header.nfields} fields, expected {base}")
    return header

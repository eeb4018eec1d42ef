"""Little-endian binary read/write helpers for the model and dataset files."""

import struct

import numpy as np

from .errors import FormatError


class ByteReader:
    """Sequential reader that raises FormatError with the failing offset."""

    def __init__(self, fh):
        self._fh = fh
        self.offset = 0

    def read(self, nbytes):
        data = self._fh.read(nbytes)
        if len(data) != nbytes:
            raise FormatError(
                f"unexpected end of file, wanted {nbytes} bytes got {len(data)}",
                offset=self.offset,
            )
        self.offset += nbytes
        return data

    def magic(self, expected):
        got = self.read(len(expected))
        if got != expected:
            raise FormatError(
                f"bad magic {got!r}, expected {expected!r}", offset=0
            )

    def u8(self):
        return struct.unpack("<B", self.read(1))[0]

    def u32(self, count=1):
        vals = struct.unpack(f"<{count}I", self.read(4 * count))
        return vals[0] if count == 1 else vals

    def u64(self, count=1):
        vals = struct.unpack(f"<{count}Q", self.read(8 * count))
        return vals[0] if count == 1 else vals

    def f64(self, count=1):
        vals = struct.unpack(f"<{count}d", self.read(8 * count))
        return vals[0] if count == 1 else vals

    def array(self, shape):
        """Read a float64 buffer linearized with the first index fastest."""
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        buf = self.read(8 * n)
        flat = np.frombuffer(buf, dtype="<f8").astype(np.float64)
        return flat.reshape(shape, order="F")


def write_u8(fh, value):
    fh.write(struct.pack("<B", value))


def write_u32(fh, *values):
    fh.write(struct.pack(f"<{len(values)}I", *values))


def write_u64(fh, *values):
    fh.write(struct.pack(f"<{len(values)}Q", *values))


def write_f64(fh, *values):
    fh.write(struct.pack(f"<{len(values)}d", *values))


def write_array(fh, arr):
    fh.write(np.asarray(arr, dtype="<f8").tobytes(order="F"))

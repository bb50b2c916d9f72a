"""PGM image I/O with a sidecar scale for float round trips.

Images are written as P5 (or P2) at a given maxval, quantized from their
[0, max] range; the true float maximum goes to a ``.scale`` sidecar so a
read multiplies back to physical units.  Files without a sidecar read as the
stored integer levels.
"""

import numpy as np


def write_pgm(path, image, maxval=65535, binary=True):
    """Quantize a nonnegative image to PGM levels and write it with its scale.

    Returns the sidecar path.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("expected a 2-D image")
    if not np.all(np.isfinite(image)) or np.any(image < 0):
        raise ValueError("image must be finite and nonnegative")
    if not 0 < maxval <= 65535:
        raise ValueError("maxval must lie in [1, 65535]")
    scale = float(image.max())
    if scale > 0:
        levels = np.rint(image / scale * maxval).astype(np.uint32)
    else:
        levels = np.zeros(image.shape, dtype=np.uint32)
    rows, cols = image.shape
    magic = "P5" if binary else "P2"
    header = "%s\n%d %d\n%d\n" % (magic, cols, rows, maxval)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            dtype = ">u2" if maxval > 255 else "u1"
            fh.write(levels.astype(dtype).tobytes())
        else:
            lines = "\n".join(" ".join(str(v) for v in row) for row in levels)
            fh.write((lines + "\n").encode("ascii"))
    sidecar = str(path) + ".scale"
    with open(sidecar, "w") as fh:
        fh.write(repr(scale) + "\n")
    return sidecar


def _tokens(data):
    # header tokens with '#' comments stripped to end of line
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        yield data[start:pos], pos


def read_pgm(path):
    """Read a P2 or P5 file; apply the sidecar scale when present."""
    with open(path, "rb") as fh:
        data = fh.read()
    toks = _tokens(data)
    magic, _ = next(toks)
    if magic not in (b"P2", b"P5"):
        raise ValueError("not a P2/P5 PGM file")
    (cols_b, _), (rows_b, _), (maxval_b, end) = next(toks), next(toks), next(toks)
    cols, rows, maxval = int(cols_b), int(rows_b), int(maxval_b)
    if maxval <= 0 or maxval > 65535:
        raise ValueError("maxval out of range")
    if magic == b"P5":
        body = data[end + 1:]  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        levels = np.frombuffer(body, dtype=dtype, count=rows * cols)
        levels = levels.astype(np.float64).reshape(rows, cols)
    else:
        flat = data[end:].split()
        if len(flat) < rows * cols:
            raise ValueError("truncated P2 body")
        levels = np.array([float(int(v)) for v in flat[:rows * cols]])
        levels = levels.reshape(rows, cols)
    if levels.max() > maxval:
        raise ValueError("pixel value exceeds the stated maxval")
    sidecar = str(path) + ".scale"
    try:
        with open(sidecar) as fh:
            scale = float(fh.read().strip())
    except FileNotFoundError:
        return levels
    return levels * (scale / maxval)

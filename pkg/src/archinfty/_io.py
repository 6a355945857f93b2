"""Small I/O helper shared by the CSV writers."""

import contextlib


@contextlib.contextmanager
def open_text_out(target):
    """Yield a writable text handle for a path or pass through an open file object."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh

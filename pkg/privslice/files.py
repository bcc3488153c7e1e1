"""Input and result files, with I/O failures raised as privslice errors."""

from pathlib import Path

from privslice.errors import InputNotFoundError, InputReadError, OutputError


def read_input(path: Path, what: str) -> str:
    """UTF-8 text of an input file; `what` names the file in error messages."""
    if not path.is_file():
        msg = f"{what} not found: {path}"
        raise InputNotFoundError(msg)
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        msg = f"{what} is not UTF-8 text: {path} (byte {err.start})"
        raise InputReadError(msg) from err
    except OSError as err:
        msg = f"cannot read {what} {path}: {err.strerror}"
        raise InputReadError(msg) from err


def write_output(path: Path, text: str) -> None:
    """Write a result file, creating missing directories."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        msg = f"cannot write {path}: {err.strerror}"
        raise OutputError(msg) from err

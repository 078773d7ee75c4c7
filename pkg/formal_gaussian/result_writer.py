"""Output sink for CLI result documents."""

import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from .exceptions import ResultWriteError

logger = logging.getLogger(__name__)


class ResultWriter:
    """Writes result documents to stdout or atomically to a file."""

    def __init__(self, out_path: Optional[str] = None, stream: Optional[TextIO] = None):
        """
        Initialize result writer.

        Args:
            out_path: Target file; None writes to ``stream``.
            stream: Text stream used when no file is given (defaults to stdout).
        """
        self.out_path = Path(out_path) if out_path else None
        self.stream = stream

    def write(self, text: str) -> None:
        """Write a document, terminated by a single newline."""
        if not text.endswith("\n"):
            text += "\n"
        if self.out_path is None:
            (self.stream or sys.stdout).write(text)
            return
        self._write_atomic(self.out_path, text)
        logger.info("Wrote result to %s", self.out_path)

    def _write_atomic(self, file_path: Path, text: str) -> None:
        """
        Write through a temporary sibling file and an atomic rename.

        Raises:
            ResultWriteError: If the file operation fails.
        """
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            temp_path = file_path.parent / f".{file_path.name}.tmp"
            temp_path.write_text(text, encoding="utf-8")
            temp_path.replace(file_path)
        except OSError as e:
            raise ResultWriteError(f"Failed to write to file {file_path}: {e}")

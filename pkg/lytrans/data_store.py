from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Optional

from filelock import FileLock, Timeout

from .exceptions import DataLockError, ParseError
from .scanner import ScanResult

logger = logging.getLogger(__name__)


@dataclass
class SaveResult:
    saved_at: datetime
    path: Path
    fingerprint: str


class ScanStore:
    """Coordinate on-disk reads and writes of one ScanResult file."""

    def __init__(self, path: Path, lock_timeout: float = 5.0) -> None:
        self.path = Path(path)
        lock_name = f"{self.path.name}.lock"
        self.lock = FileLock(str(self.path.parent / lock_name))
        self.lock_timeout = lock_timeout
        self.current: Optional[ScanResult] = None

    def save(self, result: ScanResult) -> SaveResult:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with self.lock.acquire(timeout=self.lock_timeout):
                self._write_atomic(result.to_text())
        except Timeout as exc:  # pragma: no cover - depends on runtime contention
            raise DataLockError(f"Unable to acquire lock for {self.path}") from exc
        self.current = result
        logger.info("scan saved to %s", self.path)
        return SaveResult(saved_at=datetime.utcnow(), path=self.path, fingerprint=result.fingerprint)

    def load(self) -> ScanResult:
        try:
            with self.lock.acquire(timeout=self.lock_timeout):
                raw_text = self.path.read_text(encoding="utf-8")
        except Timeout as exc:  # pragma: no cover - depends on runtime contention
            raise DataLockError(f"Unable to acquire lock for {self.path}") from exc
        except OSError as exc:
            raise ParseError(f"cannot read scan file {self.path}: {exc.strerror}") from exc
        self.current = ScanResult.from_text(raw_text)
        return self.current

    def _write_atomic(self, text: str) -> None:
        tmp_path = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp_path.write_text(text, encoding="utf-8")
        os.replace(tmp_path, self.path)

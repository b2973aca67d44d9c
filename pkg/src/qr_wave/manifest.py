"""Run manifests: a JSON record of what ran, with what, and how long it took"""

import typing as t
import json
import logging
import os
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from dotmap import DotMap  # type: ignore
from . import __version__

if t.TYPE_CHECKING:
    from .config import ValidatedConfig

logger = logging.getLogger(__name__)


def utcnow() -> str:
    """Current UTC time in ISO 8601"""
    return datetime.now(timezone.utc).isoformat()


class RunManifest:
    """
    A manifest file written atomically when a run starts and again when it
    finishes.

    :param path: Manifest file path
    :param command: The subcommand being recorded
    :param config: The validated configuration, if one exists yet
    """

    def __init__(
        self,
        path: t.Union[str, Path],
        command: str,
        config: t.Optional['ValidatedConfig'] = None,
    ) -> None:
        #: Where the manifest lives
        self.path = Path(path)
        #: Manifest contents
        self.data = DotMap()
        self.data.command = command
        self.data.version = __version__
        self.data.status = 'created'
        self.data.outputs = []
        if config is not None:
            self.data.config = asdict(config.config)
            self.data.units = asdict(config.units)

    def write(self) -> Path:
        """Write the manifest through a temporary file and an atomic rename"""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_name(f'.{self.path.name}.tmp')
        with tmp.open('w', encoding='utf-8') as fh:
            json.dump(self.data.toDict(), fh, indent=2, sort_keys=True, default=str)
            fh.write('\n')
        os.replace(tmp, self.path)
        return self.path

    def start(self, **fields: t.Any) -> None:
        """Record the start time and any extra fields, then write"""
        self.data.started_at = utcnow()
        self.data.status = 'running'
        self.record(**fields)
        self.write()

    def record(self, **fields: t.Any) -> None:
        """Update fields without writing"""
        for key, value in fields.items():
            self.data[key] = value

    def add_output(self, path: t.Union[str, Path]) -> None:
        """Remember an output file"""
        self.data.outputs.append(str(path))

    def finish(self, status: str = 'ok', error: t.Optional[str] = None) -> Path:
        """Record the end time and final status, then write"""
        self.data.finished_at = utcnow()
        self.data.status = status
        if error is not None:
            self.data.error = error
        logger.debug('Manifest %s finished with status %s', self.path, status)
        return self.write()

    @classmethod
    def load(cls, path: t.Union[str, Path]) -> DotMap:
        """Read a manifest back as a :py:class:`DotMap`"""
        with Path(path).open(encoding='utf-8') as fh:
            return DotMap(json.load(fh))

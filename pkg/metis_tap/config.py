from dataclasses import dataclass, field
from pathlib import Path

from metis_fn import singleton

from . import error


class TapConfig(singleton.Singleton):
    """
    Tunables shared by the screening, similarity and reporting modules.  Defaults are class attributes, so
    TapConfig() is usable without configuration; configure() overrides any subset of them.
    + zero_tolerance.  The reported structure error at or below which a pair is reported as zero.
    + float_precision.  Decimal places written for real values in report CSVs.
    + oracle_max_paths.  The largest path enumeration the brute force oracle will attempt.
    + chunk_size.  The number of vertex pairs handed to a worker in one partition.
    """
    zero_tolerance: float = 1e-12
    float_precision: int = 6
    oracle_max_paths: int = 10_000
    chunk_size: int = 512

    def configure(self,
                  zero_tolerance: float = None,
                  float_precision: int = None,
                  oracle_max_paths: int = None,
                  chunk_size: int = None):
        if zero_tolerance is not None:
            self.zero_tolerance = zero_tolerance
        if float_precision is not None:
            self.float_precision = float_precision
        if oracle_max_paths is not None:
            self.oracle_max_paths = oracle_max_paths
        if chunk_size is not None:
            self.chunk_size = chunk_size
        return self

    def clear(self):
        for attr in ('zero_tolerance', 'float_precision', 'oracle_max_paths', 'chunk_size'):
            self.__dict__.pop(attr, None)
        return self

    def fmt(self, value: float) -> str:
        return f"{value:.{self.float_precision}f}"


@dataclass
class RunConfig:
    command: str
    records_path: Path | None = None
    manifest_path: Path | None = None
    out_dir: Path = Path(".")
    now: int | None = None
    theta: float | None = None
    name_filter: str = "off"
    strict: bool = False
    workers: int = 1
    pairs: tuple[tuple[str, str], ...] = field(default_factory=tuple)
    export_format: str = "graph-json"
    nearest: int = 0
    merge_policy: str = "smallest-id"

    def resolved(self) -> "RunConfig":
        self.records_path = self.records_path.resolve() if self.records_path else None
        self.manifest_path = self.manifest_path.resolve() if self.manifest_path else None
        self.out_dir = self.out_dir.resolve()
        return self

    def validate(self) -> "RunConfig":
        if self.command == "dedupe" and self.theta is None:
            raise error.ConfigError(message="dedupe requires --theta", ctx={'command': self.command})
        if self.theta is not None and not (0.0 < self.theta <= 1.0):
            raise error.InvalidThreshold(message=f"theta must be in (0, 1], got {self.theta}",
                                         ctx={'theta': self.theta})
        if self.workers < 1:
            raise error.ConfigError(message="--workers must be at least 1", ctx={'workers': self.workers})
        if self.now is not None and self.now < 0:
            raise error.ConfigError(message="--now must be non-negative", ctx={'now': self.now})
        if self.records_path is None:
            raise error.ConfigError(message="--records is required", ctx={'command': self.command})
        return self

    def replay_args(self) -> dict:
        """
        The subset of the configuration that determines output content.  The worker count is excluded;
        outputs must not depend on it.
        """
        return {'command': self.command,
                'records_path': str(self.records_path) if self.records_path else None,
                'manifest_path': str(self.manifest_path) if self.manifest_path else None,
                'now': self.now,
                'theta': self.theta,
                'name_filter': self.name_filter,
                'strict': self.strict,
                'merge_policy': self.merge_policy,
                'pairs': [f"{x},{y}" for x, y in self.pairs],
                'nearest': self.nearest,
                'export_format': self.export_format}

    @classmethod
    def from_replay_args(cls, replay: dict, out_dir: Path, workers: int = 1) -> "RunConfig":
        """
        Rebuilds the configuration recorded in a run manifest.  The output directory and the worker count are
        supplied by the caller, neither affects the content of the outputs.
        """
        return cls(command=replay['command'],
                   records_path=Path(replay['records_path']) if replay.get('records_path') else None,
                   manifest_path=Path(replay['manifest_path']) if replay.get('manifest_path') else None,
                   out_dir=out_dir,
                   now=replay.get('now'),
                   theta=replay.get('theta'),
                   name_filter=replay.get('name_filter', "off"),
                   strict=replay.get('strict', False),
                   workers=workers,
                   pairs=tuple(tuple(pair.split(",", 1)) for pair in replay.get('pairs', [])),
                   export_format=replay.get('export_format', "graph-json"),
                   nearest=replay.get('nearest', 0),
                   merge_policy=replay.get('merge_policy', "smallest-id"))

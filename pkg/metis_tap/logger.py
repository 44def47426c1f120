import functools
import json
import logging
import os
import sys
import time
from typing import Any, Protocol

from metis_fn import singleton
from pino import pino

from .tracer import RunTracer
from . import json_util

LOG_LEVEL_ENV = "METIS_TAP_LOG_LEVEL"

LEVELS = ('debug', 'info', 'warn', 'error')

PERF_LOG_MSG = "PerfLog"

PINO_LEVELS = {logging.DEBUG: "debug",
               logging.INFO: "info",
               logging.WARNING: "warn",
               logging.ERROR: "error",
               logging.CRITICAL: "critical"}


class ConfiguredLoggerProtocol(Protocol):

    def info(self, meta: dict, msg: str, **kwargs):
        ...

    def warn(self, meta: dict, msg: str, **kwargs):
        ...

    def error(self, meta: dict, msg: str, **kwargs):
        ...

    def debug(self, meta: dict, msg: str, **kwargs):
        ...


class LogConfig(singleton.Singleton):
    """
    Holds the logger used by the module level log functions (info, debug, warn, error).  Without a custom logger
    a pino logger writing JSON lines to stderr is built; stdout is left alone as tap runs only write data to files.

    Level resolution: an explicitly configured level (e.g. from --log-level), then the METIS_TAP_LOG_LEVEL env var,
    then INFO.  A custom logger must honour ConfiguredLoggerProtocol and does its own level filtering.
    """
    default_level: int = logging.INFO
    configured_logger: Any = None
    logging_level: int | None = None

    def clear(self):
        self.configured_logger = None
        self.logging_level = None
        return self

    def configure(self, level: str | int | None = None, custom_logger: Any = None):
        if level:
            self.logging_level = level if isinstance(level, int) else level_from_name(level)
        self.configured_logger = custom_logger or self._tap_logger()
        return self

    @property
    def logger(self):
        if not self.configured_logger:
            self.configured_logger = self._tap_logger()
        return self.configured_logger

    @property
    def level(self) -> int:
        if self.logging_level:
            return self.logging_level
        return level_from_name(os.environ.get(LOG_LEVEL_ENV, "")) or self.default_level

    def _tap_logger(self):
        return pino(bindings={"apptype": "metis-tap", "context": "pipeline"},
                    dump_function=custom_pino_dump_fn,
                    stream=sys.stderr,
                    level=pino_level(self.level))


def level_from_name(name: str) -> int | None:
    lvl = logging.getLevelName(name.upper()) if name else None
    return lvl if isinstance(lvl, int) else None


def info(msg: str, ctx: dict | None = None, tracer: RunTracer | None = None, **kwargs) -> None:
    _log('info', msg, tracer, ctx, **kwargs)


def debug(msg: str, ctx: dict | None = None, tracer: RunTracer | None = None, **kwargs) -> None:
    _log('debug', msg, tracer, ctx, **kwargs)


def warn(msg: str, ctx: dict | None = None, tracer: RunTracer | None = None, **kwargs) -> None:
    _log('warn', msg, tracer, ctx, **kwargs)


def error(msg: str, ctx: dict | None = None, tracer: RunTracer | None = None, **kwargs) -> None:
    _log('error', msg, tracer, ctx, **kwargs)


def _log(level: str, msg: str, tracer: RunTracer | None, ctx: dict | None, **kwargs) -> None:
    if level not in LEVELS:
        return
    getattr(LogConfig().logger, level)(meta(tracer, ctx, **kwargs), msg)


def meta(tracer: RunTracer | None, ctx: dict | None, **kwargs) -> dict:
    # ctx wins over kwargs, kwargs over the tracer's run fields
    return {**(tracer.serialise() if tracer else {}), **kwargs, **(ctx or {})}


def with_perf_log(name: str | None = None):
    """
    Times the wrapped fn and writes a debug PerfLog line with `fn` and `delta_t` (ms).
    """

    def inner(fn):
        @functools.wraps(fn)
        def invoke(*args, **kwargs):
            started = time.perf_counter()
            try:
                return fn(*args, **kwargs)
            finally:
                debug(PERF_LOG_MSG, fn=name or fn.__name__, delta_t=(time.perf_counter() - started) * 1000.0)

        return invoke

    return inner


def custom_pino_dump_fn(json_log):
    return json.dumps(json_log, cls=json_util.CustomLogEncoder)


def pino_level(level: int) -> str:
    # pino has no "warning"; unnamed levels round down to the nearest named one
    named = [lvl for lvl in PINO_LEVELS if lvl <= level]
    return PINO_LEVELS[max(named)] if named else PINO_LEVELS[logging.DEBUG]

import functools
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from metis_fn import monad, singleton
from pymonad.tools import curry

from . import __version__, error, ingest, logger, merge, serialisers, structure, tap
from .config import RunConfig
from .graph import NetworkBundle
from .tracer import RunTracer, init_tracing

"""
The command pipeline.  Each CLI command is a chain of steps over a RunRequest:

    monad.Right(request) >> load_bundle >> screen >> ... >> write_outputs

A step takes the request and returns it wrapped in an Either.  Steps raise the typed errors of the library modules;
the @step decorator turns them into monad.Left(request) with the error set on request.error, so the first failing
step short-circuits the rest.  Every output is collected on request.outputs as a serialiser and only written by the
final write_outputs step, so a run that fails earlier writes no files.

The responder maps the outcome to the process exit code: 0 on success, otherwise the error's code (1 validation,
2 storage).
"""

SUCCESS = 0


@dataclass
class RunRequest:
    config: RunConfig
    tracer: RunTracer
    load: ingest.LoadResult | None = None
    now: int | None = None
    candidates: structure.CandidateSet | None = None
    similarities: list[tap.SimilarityResult] | None = None
    groups: tap.RedundantGroupSet | None = None
    plan: merge.MergePlan | None = None
    merged: merge.MergedNetwork | None = None
    verification: merge.VerificationReport | None = None
    outputs: dict[str, serialisers.SerialiserProtocol] = field(default_factory=dict)
    written: list[Path] = field(default_factory=list)
    error: Any = None

    def replace(self, key, value):
        setattr(self, key, value)
        return self

    def output(self, name: str, serialiser: serialisers.SerialiserProtocol):
        self.outputs[name] = serialiser
        return self

    @property
    def bundle(self) -> NetworkBundle:
        return self.load.bundle


class CommandMap(singleton.Singleton):
    commands = {}

    def add_command(self, name: str, f: Callable):
        self.commands[name] = f

    def get_command(self, name: str) -> Callable:
        return self.commands.get(name, no_command)

    def names(self) -> list[str]:
        return sorted(self.commands.keys())


def command(name: str):
    """
    Command Mapper
    """
    def inner(fn):
        CommandMap().add_command(name=name, f=fn)
        return fn
    return inner


def step(fn):
    @functools.wraps(fn)
    def invoke(request: RunRequest) -> monad.EitherMonad[RunRequest]:
        try:
            return fn(request)
        except error.BaseError as e:
            return monad.Left(request.replace('error', e.at_step(fn.__name__)))
        except OSError as e:
            return monad.Left(request.replace('error', error.StorageError(message=str(e), name=fn.__name__)))
    return invoke


def run(config: RunConfig) -> int:
    return responder(run_pipeline(build_request(config)))


def build_request(config: RunConfig) -> monad.EitherMonad[RunRequest]:
    return monad.Right(RunRequest(config=config, tracer=init_tracing(command=config.command)))


def run_pipeline(request: monad.EitherMonad[RunRequest]) -> monad.EitherMonad[RunRequest]:
    return request >> log_start >> validate_config >> command_invoker


def command_invoker(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return CommandMap().get_command(request.config.command)(request)


def no_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return monad.Left(request.replace('error', error.ConfigError(message=f"no such command {request.config.command}",
                                                                 ctx={'commands': CommandMap().names()})))


def log_start(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    logger.info(msg="Start Run", tracer=request.tracer, ctx=request.config.replay_args())
    return monad.Right(request)


@step
def validate_config(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    request.config.resolved().validate()
    return monad.Right(request)


def responder(result: monad.EitherMonad[RunRequest]) -> int:
    if result.is_right():
        logger.info(msg="End Run", tracer=result.value.tracer, status='ok',
                    outputs=[str(p) for p in result.value.written])
        return SUCCESS
    request = result.error()
    failure = request.error if isinstance(request, RunRequest) else request
    logger.error(msg="End Run", tracer=getattr(request, 'tracer', None), ctx=_error_meta(failure), status='fail')
    return failure.code if isinstance(failure, error.BaseError) and failure.code else error.VALIDATION_FAILURE


def _error_meta(failure) -> dict:
    if isinstance(failure, error.BaseError):
        return failure.error()
    return {'error': str(failure)}


#
# Commands
#
@command("ingest")
def ingest_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return monad.Right(request) >> load_bundle >> ingest_outputs >> run_manifest >> write_outputs


@command("screen")
def screen_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return monad.Right(request) >> load_bundle >> screen >> screen_outputs >> run_manifest >> write_outputs


@command("simtap")
def simtap_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return (monad.Right(request)
            >> load_bundle
            >> resolve_now
            >> similarity_pairs
            >> simtap_outputs
            >> run_manifest
            >> write_outputs)


@command("dedupe")
def dedupe_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return (monad.Right(request)
            >> load_bundle
            >> resolve_now
            >> screen
            >> group_redundant
            >> merge_groups
            >> dedupe_outputs
            >> run_manifest
            >> write_outputs
            >> check_verification)


@command("export")
def export_command(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return monad.Right(request) >> load_bundle >> export_outputs >> run_manifest >> write_outputs


#
# Steps
#
@step
def load_bundle(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    result = ingest.load(request.config.records_path, request.config.manifest_path, request.config.strict)
    if result.is_left():
        raise result.error()
    for warning in result.value.report.warnings:
        logger.warn(msg="Load warning", tracer=request.tracer, warning=warning)
    return monad.Right(request.replace('load', result.value))


@step
def resolve_now(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    now = request.config.now if request.config.now is not None else tap.default_now(request.bundle)
    logger.info(msg="Now anchor", tracer=request.tracer, now=now, explicit=request.config.now is not None)
    return monad.Right(request.replace('now', now))


@step
def screen(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    candidates = structure.screen_candidates(request.bundle,
                                             structure.NameFilter(request.config.name_filter),
                                             request.config.workers)
    return monad.Right(request.replace('candidates', candidates))


@step
def similarity_pairs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    """
    Scores the --pair arguments, or every screened candidate when none are given.
    """
    if request.config.pairs:
        pairs = list(request.config.pairs)
    else:
        request.replace('candidates', structure.screen_candidates(request.bundle,
                                                                  structure.NameFilter(request.config.name_filter),
                                                                  request.config.workers))
        pairs = request.candidates.pair_ids()
    for x, y in pairs:
        if x == y:
            raise error.ConfigError(message=f"pair {x},{y} names the same character twice", ctx={'pair': [x, y]})
    results = tap.score_pairs(request.bundle, pairs, request.now, request.config.workers)
    return monad.Right(request.replace('similarities', results))


@step
def group_redundant(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    groups = tap.threshold_groups(request.candidates,
                                  request.bundle,
                                  request.config.theta,
                                  request.now,
                                  request.config.workers)
    return monad.Right(request.replace('groups', groups).replace('similarities', list(groups.similarities)))


@step
def merge_groups(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    plan = merge.plan_merge(request.bundle, request.groups, merge.MergePolicy(request.config.merge_policy))
    merged = merge.apply_merge(request.bundle, plan)
    verification = merge.verify_merge(request.bundle, merged.bundle, plan, request.candidates)
    return monad.Right(request.replace('plan', plan).replace('merged', merged).replace('verification', verification))


@step
def ingest_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    return monad.Right(request
                       .output("load_report.json", serialisers.DictToJsonSerialiser(request.load.report.as_dict()))
                       .output("graph.json", ingest.serialiser_for(request.bundle, ingest.GRAPH_JSON))
                       .output("manifest.json", _manifest_serialiser(request.bundle)))


@step
def screen_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    request.output("candidates.csv", _candidates_serialiser(request))
    if request.config.nearest > 0:
        nearest = structure.nearest_pairs(request.bundle,
                                          request.config.nearest,
                                          structure.NameFilter(request.config.name_filter),
                                          request.config.workers)
        request.output("structure_errors.csv",
                       serialisers.RowsToCsvSerialiser(structure.candidate_rows(request.bundle, nearest),
                                                       columns=structure.CANDIDATE_COLUMNS))
    return monad.Right(request)


@step
def simtap_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    request.output("similarity.csv", _similarity_serialiser(request))
    if request.config.theta is not None:
        request.output("divergent.csv", _divergent_serialiser(request))
    return monad.Right(request)


@step
def dedupe_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    merged = request.merged
    return monad.Right(request
                       .output("candidates.csv", _candidates_serialiser(request))
                       .output("similarity.csv", _similarity_serialiser(request))
                       .output("divergent.csv", _divergent_serialiser(request))
                       .output("groups.json", serialisers.DictToJsonSerialiser(request.groups.as_dict()))
                       .output("merged_records.csv", ingest.serialiser_for(merged.bundle, ingest.RECORDS_CSV))
                       .output("merged_manifest.json", _manifest_serialiser(merged.bundle))
                       .output("merged_graph.json", ingest.serialiser_for(merged.bundle, ingest.GRAPH_JSON))
                       .output("merge_audit.json", serialisers.DictToJsonSerialiser({**merged.audit,
                                                                                     "aliases": merged.aliases}))
                       .output("verification.json", serialisers.DictToJsonSerialiser(request.verification.as_dict())))


@step
def export_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    export_format = request.config.export_format
    if export_format not in ingest.EXPORT_FORMATS:
        raise error.ConfigError(message=f"unknown export format {export_format}",
                                ctx={'formats': list(ingest.EXPORT_FORMATS)})
    return monad.Right(request
                       .output(f"network.{ingest.EXPORT_EXTENSIONS[export_format]}",
                               ingest.serialiser_for(request.bundle, export_format))
                       .output("manifest.json", _manifest_serialiser(request.bundle)))


@step
def run_manifest(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    """
    Everything needed to replay the run.  Neither the worker count nor any timestamp is recorded, so repeated runs
    produce an identical manifest.
    """
    config = request.config
    doc = {"version": __version__,
           "config": config.replay_args(),
           "inputs": {"records": _input_digest(config.records_path),
                      "manifest": _input_digest(config.manifest_path) if config.manifest_path else None},
           "now": request.now,
           "theta": config.theta,
           "bundle_fingerprint": request.bundle.fingerprint(),
           "outputs": sorted(request.outputs.keys())}
    if request.merged:
        doc["merged_fingerprint"] = request.merged.bundle.fingerprint()
    return monad.Right(request.output("run_manifest.json", serialisers.DictToJsonSerialiser(doc)))


@step
def write_outputs(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    results = list(map(write_output(request.config.out_dir), sorted(request.outputs.items())))
    failure = next((r for r in results if r.is_left()), None)
    if failure:
        raise failure.error()
    request.replace('written', [r.value for r in results])
    logger.info(msg="Outputs written", tracer=request.tracer, out_dir=request.config.out_dir, count=len(results))
    return monad.Right(request)


@step
def check_verification(request: RunRequest) -> monad.EitherMonad[RunRequest]:
    if not request.verification.ok:
        raise error.MergeError(message="merge verification failed", ctx={'violations': request.verification.names()})
    return monad.Right(request)


@curry(2)
def write_output(out_dir: Path, named_output: tuple) -> monad.EitherMonad[Path]:
    name, serialiser = named_output
    return ingest.write_serialised(Path(out_dir) / name, serialiser)


#
# Helpers
#
def _candidates_serialiser(request: RunRequest) -> serialisers.RowsToCsvSerialiser:
    return serialisers.RowsToCsvSerialiser(structure.candidate_rows(request.bundle, request.candidates),
                                           columns=structure.CANDIDATE_COLUMNS)


def _similarity_serialiser(request: RunRequest) -> serialisers.RowsToCsvSerialiser:
    return serialisers.RowsToCsvSerialiser(tap.similarity_rows(request.bundle, request.similarities),
                                           columns=tap.similarity_columns(request.bundle))


def _divergent_serialiser(request: RunRequest) -> serialisers.RowsToCsvSerialiser:
    divergent = tap.divergent_pairs(request.similarities, request.config.theta)
    return serialisers.RowsToCsvSerialiser(tap.divergent_rows(request.bundle, divergent),
                                           columns=tap.DIVERGENT_COLUMNS)


def _manifest_serialiser(bundle: NetworkBundle) -> serialisers.DictToJsonSerialiser:
    return serialisers.DictToJsonSerialiser(ingest.DatasetManifest.of_bundle(bundle).as_dict())


def _input_digest(path: Path | None) -> dict:
    return {"path": str(path), "sha256": hashlib.sha256(Path(path).read_bytes()).hexdigest()}

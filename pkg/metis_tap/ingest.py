import io
from dataclasses import dataclass, field, asdict
from pathlib import Path

import pandas as pd
from metis_fn import monad

from . import error, graph, logger, serialisers
from .graph import NetworkBundle
from .graph_value import VertexKind, TimeInterval, DEFAULT_CHARACTER_TYPE

RECORD_COLUMNS = ["character_id", "character_name", "entity_name", "entity_type", "relation_type", "start", "end"]
ONE_MODE_COLUMNS = ["x_id", "y_id", "entity_id", "relation_type", "x_relation", "y_relation"]

RECORDS_CSV = "records-csv"
GRAPH_JSON = "graph-json"
DOT = "dot"
ONE_MODE_CSV = "one-mode-csv"
EXPORT_FORMATS = (RECORDS_CSV, GRAPH_JSON, DOT, ONE_MODE_CSV)
EXPORT_EXTENSIONS = {RECORDS_CSV: "csv", GRAPH_JSON: "json", DOT: "dot", ONE_MODE_CSV: "csv"}


class RecordRejected(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class TransactionRecord:
    character_name: str
    entity_name: str
    entity_type: str
    relation_type: str
    start: int
    end: int
    character_id: str | None = None

    @classmethod
    def from_row(cls, row: dict) -> "TransactionRecord":
        values = {column: str(row.get(column, "")).strip() for column in RECORD_COLUMNS}
        for column in ("character_name", "entity_name", "entity_type", "relation_type", "start", "end"):
            if not values[column]:
                raise RecordRejected(f"missing {column}")
        start, end = _time_point(values["start"]), _time_point(values["end"])
        if start < 0 or end < 0:
            raise RecordRejected("negative time point")
        if end < start:
            raise RecordRejected("inverted interval")
        return cls(character_name=values["character_name"],
                   entity_name=values["entity_name"],
                   entity_type=values["entity_type"],
                   relation_type=values["relation_type"],
                   start=start,
                   end=end,
                   character_id=values["character_id"] or None)

    @property
    def character_key(self) -> tuple[str, str]:
        if self.character_id:
            return "id", self.character_id
        return "name", self.character_name

    @property
    def entity_key(self) -> tuple[str, str]:
        return self.entity_name, self.entity_type


def _time_point(value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise RecordRejected(f"non-integer time point {value!r}")


@dataclass(frozen=True)
class DatasetManifest:
    relation_types: tuple[str, ...]
    entity_types: tuple[str, ...] = ()
    time_unit: str = "year"
    now: int | None = None
    character_type: str = DEFAULT_CHARACTER_TYPE

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetManifest":
        if not isinstance(doc, dict):
            raise error.ManifestError(message="manifest must be a JSON object")
        relation_types = tuple(doc.get("relation_types") or ())
        entity_types = tuple(doc.get("entity_types") or ())
        if not relation_types:
            raise error.ManifestError(message="manifest declares no relation types")
        for labels, name in ((relation_types, "relation_types"), (entity_types, "entity_types")):
            if len(set(labels)) != len(labels):
                raise error.ManifestError(message=f"duplicate labels in {name}", ctx={name: list(labels)})
            if not all(isinstance(label, str) and label for label in labels):
                raise error.ManifestError(message=f"{name} must be nonempty strings", ctx={name: list(labels)})
        now = doc.get("now")
        if now is not None and (not isinstance(now, int) or isinstance(now, bool) or now < 0):
            raise error.ManifestError(message="now must be a non-negative integer or null", ctx={'now': now})
        return cls(relation_types=relation_types,
                   entity_types=entity_types,
                   time_unit=doc.get("time_unit") or "year",
                   now=now,
                   character_type=doc.get("character_type") or DEFAULT_CHARACTER_TYPE)

    @classmethod
    def of_bundle(cls, bundle: NetworkBundle) -> "DatasetManifest":
        return cls(relation_types=bundle.relation_types,
                   entity_types=bundle.entity_types,
                   time_unit=bundle.time_unit,
                   now=bundle.now,
                   character_type=bundle.character_type)

    def as_dict(self) -> dict:
        return {"relation_types": list(self.relation_types),
                "entity_types": list(self.entity_types),
                "time_unit": self.time_unit,
                "now": self.now,
                "character_type": self.character_type}


@dataclass(frozen=True)
class RejectedRow:
    row: int | None
    reason: str


@dataclass
class LoadReport:
    records: int = 0
    loaded: int = 0
    rejected: list[RejectedRow] = field(default_factory=list)
    discovered_relation_types: list[str] = field(default_factory=list)
    discovered_entity_types: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class LoadResult:
    bundle: NetworkBundle
    report: LoadReport


@dataclass
class RawRecords:
    columns: list[str]
    rows: list[dict]
    bad_lines: list[list[str]]


#
# Load
#
def load(records_path: Path,
         manifest_path: Path | None = None,
         strict: bool = False) -> monad.EitherMonad[LoadResult]:
    """
    Loads a transaction records CSV (and optional JSON manifest) into a sealed NetworkBundle.

    Characters are keyed by character_id when given, otherwise by the exact display name; entities are keyed by
    (entity_name, entity_type).  Every accepted record becomes one edge, so identical rows load as parallel edges.
    Malformed rows are reported and skipped, or fail the load when strict.
    """
    manifest = read_manifest(manifest_path) if manifest_path else monad.Right(None)
    if manifest.is_left():
        return manifest
    raw = read_text(records_path, error.MalformedRecords) >> parse_records
    if raw.is_left():
        return raw
    return build_bundle(raw.value, manifest.value, strict)


def read_manifest(manifest_path: Path) -> monad.EitherMonad[DatasetManifest]:
    content = read_text(manifest_path, error.ManifestError)
    if content.is_left():
        return content
    doc = serialisers.json_parser(content.value)
    if doc.is_left():
        return monad.Left(error.ManifestError(message=f"manifest is not valid JSON: {manifest_path}",
                                              ctx={'path': str(manifest_path)}))
    try:
        return monad.Right(DatasetManifest.from_dict(doc.value))
    except error.ManifestError as e:
        return monad.Left(e.at_step("read_manifest"))


@monad.monadic_try(name="read_bytes", error_cls=error.StorageError, status=error.STORAGE_FAILURE)
def read_bytes(path: Path) -> bytes:
    return Path(path).read_bytes()


def read_text(path: Path, decode_error_cls: type[error.IngestError]) -> monad.EitherMonad[str]:
    """
    An unreadable file is a storage failure; a readable one that is not UTF-8 is bad input.
    """
    content = read_bytes(path)
    if content.is_left():
        return content
    try:
        return monad.Right(content.value.decode("utf-8-sig"))
    except UnicodeDecodeError as e:
        return monad.Left(decode_error_cls(message=f"{path} is not valid UTF-8",
                                           name="read_text",
                                           ctx={'path': str(path), 'offset': e.start}))


def parse_records(content: str) -> monad.EitherMonad[RawRecords]:
    bad_lines = []

    def collect_bad_line(line):
        bad_lines.append(line)
        return None

    try:
        frame = pd.read_csv(io.StringIO(content),
                            dtype=str,
                            keep_default_na=False,
                            engine="python",
                            on_bad_lines=collect_bad_line)
    except pd.errors.EmptyDataError:
        return monad.Right(RawRecords(columns=[], rows=[], bad_lines=[]))
    except pd.errors.ParserError as e:
        return monad.Left(error.MalformedRecords(message=f"records are not parseable CSV: {e}", name="parse_records"))
    return monad.Right(RawRecords(columns=list(frame.columns),
                                  rows=frame.fillna("").to_dict("records"),
                                  bad_lines=bad_lines))


def build_bundle(raw: RawRecords,
                 manifest: DatasetManifest | None,
                 strict: bool) -> monad.EitherMonad[LoadResult]:
    if raw.columns and raw.columns != RECORD_COLUMNS:
        return monad.Left(error.MalformedRecords(message="records header does not match the expected schema",
                                                 name="build_bundle",
                                                 ctx={'expected': RECORD_COLUMNS, 'found': raw.columns}))
    manifest = manifest if manifest else DatasetManifest(relation_types=())
    report = LoadReport(records=len(raw.rows) + len(raw.bad_lines))
    bundle = NetworkBundle(relation_types=manifest.relation_types,
                           entity_types=manifest.entity_types,
                           character_type=manifest.character_type,
                           time_unit=manifest.time_unit,
                           now=manifest.now)

    records = []
    for index, row in enumerate(raw.rows):
        try:
            record = TransactionRecord.from_row(row)
            _check_relation_type(record, manifest, strict)
            records.append(record)
        except RecordRejected as rejection:
            report.rejected.append(RejectedRow(row=index + 2, reason=rejection.reason))
    report.rejected.extend(RejectedRow(row=None, reason="wrong field count") for _ in raw.bad_lines)

    if strict and report.rejected:
        return monad.Left(error.MalformedRecords(message=f"{len(report.rejected)} malformed records",
                                                 name="build_bundle",
                                                 ctx={'rejected': [asdict(r) for r in report.rejected[:20]]}))

    _register_explicit_characters(bundle, records, report)
    characters = {}
    entities = {}
    for record in records:
        if bundle.declare_relation_type(record.relation_type):
            report.discovered_relation_types.append(record.relation_type)
        if record.entity_type not in bundle.entity_types:
            report.discovered_entity_types.append(record.entity_type)
        character = _character_vertex(bundle, record, characters)
        entity = _entity_vertex(bundle, record, entities)
        bundle.add_edge(character, entity, record.relation_type, TimeInterval(record.start, record.end))
        report.loaded += 1

    heterogeneity = graph.validate(bundle)
    if heterogeneity.is_left():
        if strict:
            return monad.Left(heterogeneity.error().at_step("build_bundle"))
        report.warnings.append(heterogeneity.error().message)

    logger.info("Records loaded", ctx={'records': report.records,
                                       'loaded': report.loaded,
                                       'rejected': len(report.rejected),
                                       'characters': len(bundle.characters()),
                                       'entities': len(bundle.entities()),
                                       'relation_types': list(bundle.relation_types)})
    return monad.Right(LoadResult(bundle=bundle.seal(), report=report))


def _check_relation_type(record: TransactionRecord, manifest: DatasetManifest, strict: bool):
    """
    Against a manifest, an undeclared relation type is rejected when strict and discovered otherwise.  Without a
    manifest every relation type is discovered.
    """
    if strict and manifest.relation_types and record.relation_type not in manifest.relation_types:
        raise RecordRejected(f"undeclared relation type {record.relation_type!r}")


def _register_explicit_characters(bundle: NetworkBundle, records: list[TransactionRecord], report: LoadReport):
    names = {}
    for record in records:
        if not record.character_id:
            continue
        if record.character_id not in names:
            names[record.character_id] = record.character_name
            bundle.add_vertex(VertexKind.CHARACTER, bundle.character_type, record.character_name,
                              id=record.character_id)
        elif names[record.character_id] != record.character_name:
            report.warnings.append(f"character {record.character_id} has more than one name; "
                                   f"kept {names[record.character_id]!r}")


def _character_vertex(bundle: NetworkBundle, record: TransactionRecord, characters: dict) -> str:
    if record.character_id:
        return record.character_id
    if record.character_key not in characters:
        characters[record.character_key] = bundle.add_vertex(VertexKind.CHARACTER,
                                                             bundle.character_type,
                                                             record.character_name)
    return characters[record.character_key]


def _entity_vertex(bundle: NetworkBundle, record: TransactionRecord, entities: dict) -> str:
    if record.entity_key not in entities:
        entities[record.entity_key] = bundle.add_vertex(VertexKind.ENTITY, record.entity_type, record.entity_name)
    return entities[record.entity_key]


#
# Export
#
def export(bundle: NetworkBundle, format: str, path: Path) -> monad.EitherMonad[Path]:
    if format not in EXPORT_FORMATS:
        return monad.Left(error.ConfigError(message=f"unknown export format {format}",
                                            ctx={'formats': list(EXPORT_FORMATS)}))
    return write_serialised(path, serialiser_for(bundle, format))


def export_manifest(bundle: NetworkBundle, path: Path) -> monad.EitherMonad[Path]:
    return write_serialised(path, serialisers.DictToJsonSerialiser(DatasetManifest.of_bundle(bundle).as_dict()))


def serialiser_for(bundle: NetworkBundle, format: str) -> serialisers.SerialiserProtocol:
    match format:
        case "records-csv":
            return serialisers.RowsToCsvSerialiser(record_rows(bundle), columns=RECORD_COLUMNS)
        case "graph-json":
            return serialisers.DictToJsonSerialiser(graph_document(bundle))
        case "dot":
            return serialisers.DotSerialiser(dot_document(bundle))
        case "one-mode-csv":
            return serialisers.RowsToCsvSerialiser(one_mode_rows(bundle), columns=ONE_MODE_COLUMNS)
    raise error.ConfigError(message=f"unknown export format {format}")


@monad.monadic_try(name="write_serialised", error_cls=error.StorageError, status=error.STORAGE_FAILURE)
def write_serialised(path: Path, serialiser: serialisers.SerialiserProtocol) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialiser.serialise(), encoding="utf-8", newline="")
    return path


def record_rows(bundle: NetworkBundle) -> list[dict]:
    rows = []
    for edge in bundle.edges():
        entity = bundle.vertices[edge.entity]
        rows.append({"character_id": edge.character,
                     "character_name": bundle.vertices[edge.character].display_name,
                     "entity_name": entity.display_name,
                     "entity_type": entity.type_label,
                     "relation_type": edge.relation_type,
                     "start": edge.start,
                     "end": edge.end})
    return rows


def graph_document(bundle: NetworkBundle) -> dict:
    return {"vertices": [{"id": v.id, "kind": v.kind.value, "type": v.type_label, "name": v.display_name}
                         for v in sorted(bundle.vertices.values(), key=lambda v: v.id)],
            "edges": [{"id": e.relation_id,
                       "character": e.character,
                       "entity": e.entity,
                       "relation_type": e.relation_type,
                       "start": e.start,
                       "end": e.end}
                      for e in sorted(bundle.edges(), key=lambda e: e.relation_id)]}


def dot_document(bundle: NetworkBundle) -> dict:
    shapes = {VertexKind.CHARACTER: "ellipse", VertexKind.ENTITY: "box"}
    return {"name": "tan",
            "vertices": [(v.id, {"label": v.display_name, "shape": shapes[v.kind]})
                         for v in sorted(bundle.vertices.values(), key=lambda v: v.id)],
            "edges": [(e.character, e.entity, {"id": e.relation_id,
                                               "label": f"{e.relation_type} [{e.start},{e.end}]"})
                      for e in sorted(bundle.edges(), key=lambda e: e.relation_id)]}


def one_mode_rows(bundle: NetworkBundle) -> list[dict]:
    return [{"x_id": r.x,
             "y_id": r.y,
             "entity_id": r.entity,
             "relation_type": r.relation_type,
             "x_relation": r.x_relation,
             "y_relation": r.y_relation}
            for r in graph.project_one_mode(bundle).relations()]

import json

import pytest

from metis_tap import error, ingest
from metis_tap.graph_value import VertexKind

from .shared import *


def it_loads_the_wu_zhu_activity_tables():
    result = ingest.load(WU_ZHU_RECORDS, WU_ZHU_MANIFEST)

    assert result.is_right()
    bundle, report = result.value.bundle, result.value.report
    assert bundle.sealed
    assert [c.display_name for c in bundle.characters()] == ["Faye Wu", "Fei Wu", "ShaoJia Zhu", "ShaoNan Zhu"]
    assert len(bundle.entities()) == 12
    assert bundle.edge_count() == 26
    assert bundle.relation_types == ("study", "work", "research", "coauthor")
    assert bundle.now == 2014
    assert report.records == report.loaded == 26
    assert report.rejected == []
    assert report.discovered_relation_types == []


def it_loads_the_education_table_alone(tmp_path):
    records = tmp_path / "study.csv"
    rows = WU_ZHU_RECORDS.read_text(encoding="utf-8").splitlines()[:7]
    records.write_text("\n".join(rows) + "\n", encoding="utf-8")

    bundle = ingest.load(records).value.bundle

    assert len(bundle.characters()) == 2
    assert len(bundle.entities()) == 3
    assert len(bundle.subnetwork("study")) == 6


def it_keys_entities_by_name_and_type(wu_zhu_bundle):
    central_south = [e for e in wu_zhu_bundle.entities() if e.display_name == "Central South Univ."]
    assert len(central_south) == 1
    assert wu_zhu_bundle.subnetwork("work").has_vertex(central_south[0].id)
    assert wu_zhu_bundle.subnetwork("study").has_vertex(central_south[0].id)


def it_discovers_relation_types_without_a_manifest():
    result = ingest.load(WU_ZHU_RECORDS)

    assert result.value.bundle.relation_types == ("study", "work", "research", "coauthor")
    assert result.value.report.discovered_relation_types == ["study", "work", "research", "coauthor"]
    assert result.value.report.discovered_entity_types == ["university", "project", "publication"]


def it_loads_an_empty_file_as_an_empty_bundle():
    result = ingest.load(EMPTY_RECORDS)

    assert result.is_right()
    assert result.value.bundle.is_empty()
    assert result.value.report.records == 0
    assert result.value.report.warnings == ["bundle is not heterogeneous"]


def it_loads_a_header_only_file():
    result = ingest.load(HEADER_ONLY_RECORDS)
    assert result.value.report.records == 0


def it_reports_and_skips_malformed_rows():
    report = ingest.load(MALFORMED_RECORDS, WU_ZHU_MANIFEST).value.report

    assert report.records == 5
    assert report.loaded == 2
    assert [(r.row, r.reason) for r in report.rejected] == [(3, "inverted interval"),
                                                            (4, "missing character_name"),
                                                            (5, "non-integer time point 'two thousand'")]
    assert report.loaded + len(report.rejected) == report.records
    assert report.discovered_relation_types == ["dance"]


def it_fails_on_malformed_rows_when_strict():
    result = ingest.load(MALFORMED_RECORDS, WU_ZHU_MANIFEST, strict=True)

    assert result.is_left()
    assert isinstance(result.error(), error.MalformedRecords)
    assert "undeclared relation type 'dance'" in [r['reason'] for r in result.error().ctx['rejected']]


def it_fails_on_a_heterogeneity_violation_when_strict():
    result = ingest.load(EMPTY_RECORDS, strict=True)
    assert isinstance(result.error(), error.HeterogeneityError)


def it_rejects_a_header_that_does_not_match(tmp_path):
    records = tmp_path / "bad_header.csv"
    records.write_text("name,entity\nFaye Wu,Jinan Univ.\n", encoding="utf-8")

    result = ingest.load(records)

    assert isinstance(result.error(), error.MalformedRecords)


def it_returns_a_storage_error_for_a_missing_file(tmp_path):
    result = ingest.load(tmp_path / "missing.csv")

    assert result.is_left()
    assert result.error().code == error.STORAGE_FAILURE


def it_rejects_records_that_are_not_utf8(tmp_path):
    records = tmp_path / "latin1.csv"
    header = ",".join(ingest.RECORD_COLUMNS)
    records.write_bytes(f"{header}\n,Fei Wu,Jinan Univ.,university,study,2000,2005\n".encode("utf-8")
                        + ",Zoë Wu,Jinan Univ.,university,study,2001,2006\n".encode("latin-1"))

    result = ingest.load(records)

    assert isinstance(result.error(), error.MalformedRecords)
    assert result.error().code == error.VALIDATION_FAILURE
    assert result.error().error()['step'] == "read_text"


def it_rejects_a_manifest_that_is_not_utf8(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_bytes('{"relation_types": ["étude"]}'.encode("latin-1"))

    result = ingest.load(WU_ZHU_RECORDS, manifest)

    assert isinstance(result.error(), error.ManifestError)
    assert result.error().code == error.VALIDATION_FAILURE


def it_reads_records_with_a_byte_order_mark(tmp_path):
    records = tmp_path / "bom.csv"
    records.write_text(WU_ZHU_RECORDS.read_text(encoding="utf-8"), encoding="utf-8-sig")

    assert ingest.load(records, WU_ZHU_MANIFEST).value.bundle.edge_count() == 26


def it_rejects_a_manifest_without_relation_types(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"relation_types": []}), encoding="utf-8")

    result = ingest.load(WU_ZHU_RECORDS, manifest)

    assert isinstance(result.error(), error.ManifestError)


def it_rejects_duplicate_manifest_labels():
    with pytest.raises(error.ManifestError):
        ingest.DatasetManifest.from_dict({"relation_types": ["study", "study"]})


def it_rejects_a_manifest_that_is_not_json(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text("relation_types: study", encoding="utf-8")

    assert isinstance(ingest.load(WU_ZHU_RECORDS, manifest).error(), error.ManifestError)


def it_registers_explicit_character_ids(tmp_path):
    records = tmp_path / "explicit.csv"
    records.write_text("character_id,character_name,entity_name,entity_type,relation_type,start,end\n"
                       ",Fei Wu,Jinan Univ.,university,study,2000,2000\n"
                       "c000001,Faye Wu,Jinan Univ.,university,study,2000,2005\n",
                       encoding="utf-8")

    bundle = ingest.load(records).value.bundle

    assert bundle.vertex("c000001").display_name == "Faye Wu"
    assert bundle.vertex("c000002").display_name == "Fei Wu"


def it_round_trips_through_a_records_csv_export(wu_zhu_bundle, tmp_path):
    records, manifest = tmp_path / "network.csv", tmp_path / "manifest.json"
    assert ingest.export(wu_zhu_bundle, ingest.RECORDS_CSV, records).is_right()
    assert ingest.export_manifest(wu_zhu_bundle, manifest).is_right()

    reloaded = ingest.load(records, manifest).value.bundle

    assert canonical_facts(reloaded) == canonical_facts(wu_zhu_bundle)
    assert reloaded.relation_types == wu_zhu_bundle.relation_types


def it_exports_a_graph_json_document_of_an_empty_bundle(tmp_path):
    path = tmp_path / "graph.json"
    ingest.export(ingest.load(EMPTY_RECORDS).value.bundle, ingest.GRAPH_JSON, path)

    assert json.loads(path.read_text(encoding="utf-8")) == {"vertices": [], "edges": []}


def it_exports_dot(instance_one_bundle, tmp_path):
    path = tmp_path / "network.dot"
    ingest.export(instance_one_bundle, ingest.DOT, path)

    dot = path.read_text(encoding="utf-8")

    assert dot.startswith('graph "tan" {')
    assert dot.count("shape=") == 4
    assert dot.count(" -- ") == 5


def it_exports_the_one_mode_projection(instance_one_bundle, tmp_path):
    path = tmp_path / "one_mode.csv"
    ingest.export(instance_one_bundle, ingest.ONE_MODE_CSV, path)

    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0] == "x_id,y_id,entity_id,relation_type,x_relation,y_relation"
    assert lines[1:] == ["v1,v2,h1,club,r1,r4", "v1,v2,h1,club,r2,r4", "v1,v2,h2,club,r3,r5"]


def it_rejects_an_unknown_export_format(wu_zhu_bundle, tmp_path):
    result = ingest.export(wu_zhu_bundle, "xml", tmp_path / "network.xml")
    assert isinstance(result.error(), error.ConfigError)


#
# Helpers
#
def canonical_facts(bundle):
    return sorted((bundle.vertices[e.character].display_name,
                   bundle.vertices[e.entity].display_name,
                   bundle.vertices[e.entity].type_label,
                   e.relation_type,
                   e.start,
                   e.end)
                  for e in bundle.edges())

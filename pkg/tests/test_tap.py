import pytest

from metis_tap import error, structure, tap
from metis_tap.graph import NetworkBundle
from metis_tap.graph_value import VertexKind, TimeInterval

from .shared import *

FAYE_FEI_STUDY = 34982 / 40607
ZHU_STUDY = 30688 / 35812
ZHU_WORK = 2178 / 14722


def it_weights_an_edge_by_recency_and_duration(wu_zhu_bundle):
    faye_jinan = [e for e in wu_zhu_bundle.edges_of(FAYE_WU) if e.entity == JINAN_UNIV][0]

    assert tap.edge_weight(faye_jinan, 2014).weight == (2014 + 1 - 2000) * (2005 + 1 - 2000)


def it_rejects_a_future_dated_edge(wu_zhu_bundle):
    with pytest.raises(error.FutureDatedEdge):
        tap.simtap(wu_zhu_bundle, FAYE_WU, FEI_WU, 1999)


def it_enumerates_the_instance_one_paths(instance_one_bundle):
    paths = tap.enumerate_paths(instance_one_bundle.subnetwork("club"), "v1", "v2", 2014)

    assert [(p.entity, p.first_relation, p.second_relation) for p in paths] == [("h1", "r1", "r4"),
                                                                               ("h1", "r2", "r4"),
                                                                               ("h2", "r3", "r5")]


def it_has_as_many_paths_through_an_entity_as_the_product_of_edge_counts(instance_one_bundle):
    network = instance_one_bundle.subnetwork("club")
    paths = tap.enumerate_paths(network, "v1", "v1", 2014)

    assert len([p for p in paths if p.entity == "h1"]) == 2 * 2
    assert len([p for p in paths if p.entity == "h2"]) == 1


def it_weighs_a_path_as_the_product_of_its_edges(instance_one_bundle):
    path = tap.enumerate_paths(instance_one_bundle.subnetwork("club"), "v1", "v2", 2014)[0]

    assert path.weight == (2015 - 2001) * 3 * (2015 - 2002) * 3


def it_matches_path_enumeration_with_weight_vectors(instance_one_bundle):
    network = instance_one_bundle.subnetwork("club")

    def total(x, y):
        return sum(p.weight for p in tap.enumerate_paths(network, x, y, 2014))

    expected = 2 * total("v1", "v2") / (total("v1", "v1") + total("v2", "v2"))
    assert tap.simtap_beta(network, "v1", "v2", 2014) == pytest.approx(expected, rel=1e-12)


def it_computes_the_faye_fei_similarity(wu_zhu_bundle):
    result = tap.simtap(wu_zhu_bundle, FAYE_WU, FEI_WU, 2014)

    assert result.per_beta == {"study": pytest.approx(FAYE_FEI_STUDY),
                               "work": 1.0,
                               "research": 1.0,
                               "coauthor": 1.0}
    assert result.value == pytest.approx((FAYE_FEI_STUDY + 3) / 4)
    assert result.verdict(0.80) == tap.REDUNDANT


def it_computes_the_zhu_similarity(wu_zhu_bundle):
    result = tap.simtap(wu_zhu_bundle, SHAOJIA_ZHU, SHAONAN_ZHU, 2014)

    assert result.per_beta["study"] == pytest.approx(ZHU_STUDY)
    assert result.per_beta["work"] == pytest.approx(ZHU_WORK)
    assert result.value == pytest.approx((ZHU_STUDY + ZHU_WORK + 2) / 4)
    assert result.verdict(0.80) == tap.UNIQUE


def it_is_one_for_a_character_and_itself(wu_zhu_bundle):
    assert tap.simtap(wu_zhu_bundle, SHAOJIA_ZHU, SHAOJIA_ZHU, 2014).value == 1.0


def it_is_symmetric(wu_zhu_bundle):
    assert (tap.simtap(wu_zhu_bundle, FAYE_WU, SHAOJIA_ZHU, 2014).value ==
            tap.simtap(wu_zhu_bundle, SHAOJIA_ZHU, FAYE_WU, 2014).value)


def it_scores_zero_in_a_subnetwork_neither_character_is_in():
    bundle = NetworkBundle(relation_types=["study", "work"], entity_types=["university"], now=2014)
    x = bundle.add_vertex(VertexKind.CHARACTER, "person", "X")
    y = bundle.add_vertex(VertexKind.CHARACTER, "person", "Y")
    z = bundle.add_vertex(VertexKind.ENTITY, "university", "Z")
    bundle.add_edge(x, z, "study", TimeInterval(2000, 2001))
    bundle.add_edge(y, z, "study", TimeInterval(2000, 2001))

    result = tap.simtap(bundle, x, y, 2014)

    assert result.per_beta == {"study": 1.0, "work": 0.0}
    assert result.value == 0.5


def it_averages_per_subnetwork_values():
    assert tap.aggregate([0.0, 0.4235, 1.0, 1.0]) == pytest.approx(0.6059, abs=5e-5)
    assert tap.aggregate([0.8661, 1.0, 1.0, 0.0]) == pytest.approx(0.7165, abs=5e-5)
    assert tap.aggregate([], 0) == 0.0


def it_defaults_now_to_the_manifest_then_the_latest_end(wu_zhu_bundle):
    assert tap.default_now(wu_zhu_bundle) == 2014

    bundle = NetworkBundle(relation_types=["study"], entity_types=["university"])
    x = bundle.add_vertex(VertexKind.CHARACTER, "person", "X")
    z = bundle.add_vertex(VertexKind.ENTITY, "university", "Z")
    bundle.add_edge(x, z, "study", TimeInterval(2000, 2012))
    assert tap.default_now(bundle) == 2012

    assert tap.default_now(NetworkBundle(relation_types=["study"])) == 0


def it_groups_pairs_above_the_threshold(wu_zhu_bundle):
    candidates = structure.screen_candidates(wu_zhu_bundle)

    assert tap.threshold_groups(candidates, wu_zhu_bundle, 0.80, 2014).groups == ((FAYE_WU, FEI_WU),)
    assert tap.threshold_groups(candidates, wu_zhu_bundle, 0.75, 2014).groups == ((FAYE_WU, FEI_WU),
                                                                                  (SHAOJIA_ZHU, SHAONAN_ZHU))


def it_groups_transitively(clone_group_bundle):
    candidates = structure.screen_candidates(clone_group_bundle)

    groups = tap.threshold_groups(candidates, clone_group_bundle, 0.95, 2014)

    assert groups.groups == (("c000001", "c000002", "c000003"),)
    assert groups.as_dict() == {"theta": 0.95, "now": 2014, "groups": [["c000001", "c000002", "c000003"]]}


@pytest.mark.parametrize("theta", [0.0, -0.1, 1.5])
def it_rejects_a_threshold_outside_the_unit_interval(wu_zhu_bundle, theta):
    with pytest.raises(error.InvalidThreshold):
        tap.threshold_groups(structure.screen_candidates(wu_zhu_bundle), wu_zhu_bundle, theta, 2014)


def it_finds_divergent_pairs():
    long_chen = tap.SimilarityResult("c1", "c2", {"S": 0.0, "W": 0.4235, "R": 1.0, "C": 1.0}, 0.6059, 2014, 4)
    xinhua = tap.SimilarityResult("c3", "c4", {"S": 1.0, "W": 1.0, "R": 1.0, "C": 1.0}, 1.0, 2014, 4)

    assert tap.divergent_pairs([long_chen, xinhua], 0.60) == [long_chen]
    assert tap.divergent_pairs([long_chen, xinhua], 0.70) == []


def it_writes_similarity_rows_in_relation_type_order(wu_zhu_bundle):
    results = tap.score_pairs(wu_zhu_bundle, [(FEI_WU, FAYE_WU)], 2014)

    assert tap.similarity_columns(wu_zhu_bundle) == ["x_id", "x_name", "y_id", "y_name",
                                                     "study", "work", "research", "coauthor", "simtap"]
    assert tap.similarity_rows(wu_zhu_bundle, results) == [{"x_id": FAYE_WU,
                                                           "x_name": "Faye Wu",
                                                           "y_id": FEI_WU,
                                                           "y_name": "Fei Wu",
                                                           "study": f"{FAYE_FEI_STUDY:.6f}",
                                                           "work": "1.000000",
                                                           "research": "1.000000",
                                                           "coauthor": "1.000000",
                                                           "simtap": f"{(FAYE_FEI_STUDY + 3) / 4:.6f}"}]


def it_names_an_unknown_character():
    bundle = load_wu_zhu()
    with pytest.raises(error.UnknownVertex) as unknown:
        tap.score_pairs(bundle, [(FAYE_WU, "c999999")], 2014)
    assert "c999999" in unknown.value.message

import threading

import pytest

from goalarbiter.definitions import Season
from goalarbiter.dsl import rule_from_source
from goalarbiter.errors import (
    DanglingReferenceError,
    DuplicateIdError,
    NoModelError,
    UnknownPolicyError,
    UnknownSensorError,
)
from goalarbiter.knowledge_base import KnowledgeBase
from goalarbiter.model import Goal


@pytest.fixture
def knowledge_base(small_document):
    knowledge_base = KnowledgeBase()
    knowledge_base.replace_model(small_document)
    return knowledge_base


def test_empty():
    knowledge_base = KnowledgeBase()

    assert knowledge_base.revision == 0
    assert not knowledge_base.has_model
    with pytest.raises(NoModelError) as e:
        knowledge_base.capture()
    assert e.value.code == "no-model"
    with pytest.raises(NoModelError):
        knowledge_base.set_goal(Goal("ann", "office", "desk", 1))


def test_revisions_increase(knowledge_base):
    revisions = [
        knowledge_base.revision,
        knowledge_base.set_goal(Goal("ann", "office", "desk", 60)),
        knowledge_base.update_sensor("lux", 70),
        knowledge_base.set_context("winter", weather="rain"),
        knowledge_base.remove_goal("ann", "office", "desk"),
        knowledge_base.bind_validation("office", "accept_all"),
        knowledge_base.set_defaults(actuation="split_equal_min_unbounded"),
        knowledge_base.register_policy(rule_from_source("mediation lowest\nmin(requests)")),
    ]
    assert revisions == list(range(1, 9))


def test_revision_logged(knowledge_base, caplog):
    with caplog.at_level("INFO", logger="goalarbiter.knowledge_base"):
        knowledge_base.update_sensor("lux", 70)
    assert "Revision 2: sensor lux reading 70" in caplog.text


def test_failed_mutation_changes_nothing(knowledge_base, small_document):
    snapshot, _ = knowledge_base.capture()

    with pytest.raises(UnknownSensorError):
        knowledge_base.update_sensor("ghost", 1)
    with pytest.raises(UnknownPolicyError):
        knowledge_base.set_defaults(mediation="average", actuation="ghost")

    small_document["zones"].append({"zoneId": "office"})
    with pytest.raises(DuplicateIdError):
        knowledge_base.replace_model(small_document)

    after, registry = knowledge_base.capture()
    assert after == snapshot
    assert registry.default_mediation == "average"


def test_snapshot_is_isolated(knowledge_base):
    snapshot, registry = knowledge_base.capture()

    knowledge_base.set_goal(Goal("ann", "office", "desk", 60))
    knowledge_base.set_context("winter")
    knowledge_base.set_defaults(mediation="east")

    assert len(snapshot.goals) == 0
    assert snapshot.model.context.season is Season.SUMMER
    assert registry.default_mediation == "average"


def test_replace_model_loads_goals(knowledge_base, small_document):
    small_document["goals"] = [{"userId": "ann", "zoneId": "office", "instanceId": "desk", "value": 30}]
    revision = knowledge_base.replace_model(small_document)

    snapshot, _ = knowledge_base.capture()
    assert snapshot.revision == revision
    assert [x.value for x in snapshot.goals] == [30]


def test_zone_policy_must_be_registered(small_document):
    small_document["zones"][0]["mediationPolicy"] = "north"
    with pytest.raises(DanglingReferenceError):
        KnowledgeBase().replace_model(small_document)


def test_dump(knowledge_base):
    knowledge_base.set_goal(Goal("ann", "office", "desk", 60))
    document, revision = knowledge_base.dump()

    assert revision == 2
    assert document["goals"] == [{"userId": "ann", "zoneId": "office", "instanceId": "desk", "value": 60}]


def test_concurrent_mutations(knowledge_base):
    def worker(n):
        for i in range(50):
            knowledge_base.set_goal(Goal(f"user{n}", "office", "desk", i))

    threads = [threading.Thread(target=worker, args=(n,)) for n in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    snapshot, _ = knowledge_base.capture()
    assert snapshot.revision == 1 + 4 * 50
    assert sorted(x.value for x in snapshot.goals) == [49] * 4

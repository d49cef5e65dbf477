import json
from importlib import resources

from xaskey.verify import REGISTRY


def _manifest():
    return json.loads(resources.files("xaskey").joinpath("data/identity_manifest.json").read_text())


def test_every_registry_id_is_in_manifest():
    m = _manifest()
    covered = {e["id"] for e in m["entries"] if e["status"] == "in_scope"} | set(m["auxiliary_ids"])
    assert covered == set(REGISTRY)


def test_manifest_entries_well_formed():
    m = _manifest()
    labels = [e["label"] for e in m["entries"]]
    assert len(labels) == len(set(labels))
    for e in m["entries"]:
        assert e["status"] in ("in_scope", "definition", "out_of_scope")
        assert ("id" in e) == (e["status"] == "in_scope")
    assert [e["label"] for e in m["entries"] if e["status"] == "out_of_scope"] == ["anncreori"]

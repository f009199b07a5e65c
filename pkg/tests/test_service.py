import json
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

from segtree.service import SessionStore, create_app

from conftest import FIXTURES


@pytest.fixture
def client():
    return TestClient(create_app(store=SessionStore()), raise_server_exceptions=False)


@pytest.fixture
def session(client):
    return client.post("/sessions").json()["session_id"]


def upload_demo(client, sid, name="demo"):
    with open(os.path.join(FIXTURES, "demo.csv"), "rb") as f:
        r = client.post(f"/sessions/{sid}/series?name={name}", content=f.read())
    assert r.status_code == 200, r.text
    return r.json()


def bins_query(width):
    return json.dumps({"levels": [{"selector": "all", "node": {"technique": {
        "type": "bins", "params": {"mode": "count", "width": width}}}}]})


class TestSessions:
    def test_create_distinct_ids(self, client):
        a = client.post("/sessions").json()["session_id"]
        b = client.post("/sessions").json()["session_id"]
        assert a != b

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/missing").status_code == 404

    def test_isolation(self, client):
        a = client.post("/sessions").json()["session_id"]
        b = client.post("/sessions").json()["session_id"]
        upload_demo(client, a)
        assert client.get(f"/sessions/{a}/series").json() != []
        assert client.get(f"/sessions/{b}/series").json() == []


class TestUpload:
    def test_summary(self, client, session):
        s = upload_demo(client, session)
        assert s["n"] == 240
        kinds = {d["name"]: d["kind"] for d in s["dimensions"]}
        assert kinds["location-lat"] == "latitude"
        assert kinds["alt"] == "numeric"

    def test_bad_csv_located_error(self, client, session):
        r = client.post(f"/sessions/{session}/series?name=x", content=b"timestamp,a\n5,1\n5,2\n")
        assert r.status_code == 400
        body = r.json()
        assert body["code"] == "non_monotonic_after_sort"

    def test_two_uploads_listed(self, client, session):
        upload_demo(client, session, "one")
        upload_demo(client, session, "two")
        names = [s["name"] for s in client.get(f"/sessions/{session}/series").json()]
        assert names == ["one", "two"]


class TestQuery:
    def test_run_and_fetch_tree(self, client, session):
        upload_demo(client, session)
        r = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60))
        assert r.status_code == 200
        tree = r.json()
        assert len(tree["root"]["children"]) == 4
        again = client.get(f"/sessions/{session}/series/demo/tree")
        assert again.content == r.content

    def test_identical_inputs_byte_identical(self, client, session):
        upload_demo(client, session)
        one = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60)).content
        two = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60)).content
        assert one == two

    def test_malformed_spec_4xx(self, client, session):
        upload_demo(client, session)
        r = client.post(f"/sessions/{session}/series/demo/query", content=b"{bad json")
        assert r.status_code == 400
        r = client.post(f"/sessions/{session}/series/demo/query",
                        content=json.dumps({"levels": []}))
        assert r.status_code == 400

    def test_unknown_dimension_rejected_pre_evaluation(self, client, session):
        upload_demo(client, session)
        q = json.dumps({"levels": [{"selector": "all", "node": {"technique": {
            "type": "change_points", "params": {"dimension": "nope", "mode": "fixed_k", "k": 1}}}}]})
        r = client.post(f"/sessions/{session}/series/demo/query", content=q)
        assert r.status_code == 400

    def test_progress_reported(self, client, session):
        upload_demo(client, session)
        client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60))
        p = client.get(f"/sessions/{session}/series/demo/progress").json()
        assert p["status"] == "done" and p["levels_done"] == 1

    def test_json_fuzz_never_crashes(self, client, session):
        upload_demo(client, session)
        rng = np.random.default_rng(0)
        blobs = [
            b"null", b"[]", b'{"levels": 3}', b'{"levels":[{}]}',
            b'{"levels":[{"selector":"all","node":{}}]}',
            b'{"levels":[{"selector":"x","node":{"technique":{"type":"bins","params":{}}}}]}',
            b'{"levels":[{"selector":"all","node":{"operator":{"op":"XX","operands":[]}}}]}',
            b'{"levels":[{"selector":"all","node":{"technique":{"type":"bins","params":{"mode":"count","width":-1}}}}]}',
        ]
        for _ in range(30):
            blobs.append(bytes(rng.integers(32, 127, size=rng.integers(1, 60)).astype("uint8")))
        for blob in blobs:
            r = client.post(f"/sessions/{session}/series/demo/query", content=blob)
            assert r.status_code in (400, 422), blob
            assert "code" in r.json()


class TestNodes:
    def _tree(self, client, session):
        upload_demo(client, session)
        return client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60)).json()

    def test_siblings_symmetric_for_pair(self, client, session):
        upload_demo(client, session)
        tree = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(120)).json()
        child = tree["root"]["children"][0]
        sims = client.get(
            f"/sessions/{session}/series/demo/nodes/{child['id']}/siblings?dimensions=alt"
        ).json()
        assert len(sims) == 2
        assert sims[0]["d_bar"] == sims[1]["d_bar"]

    def test_leaf_without_siblings_empty_and_root_empty(self, client, session):
        tree = self._tree(client, session)
        root = tree["root"]
        sims = client.get(f"/sessions/{session}/series/demo/nodes/{root['id']}/siblings").json()
        assert sims == []

    def test_unknown_node_404(self, client, session):
        self._tree(client, session)
        r = client.get(f"/sessions/{session}/series/demo/nodes/beefbeef/siblings")
        assert r.status_code == 404
        r = client.post(f"/sessions/{session}/series/demo/nodes/beefbeef/forward")
        assert r.status_code == 404

    def test_forward_dedup_most_recent_first(self, client, session):
        tree = self._tree(client, session)
        a, b = tree["root"]["children"][0]["id"], tree["root"]["children"][1]["id"]
        base = f"/sessions/{session}/series/demo/nodes"
        client.post(f"{base}/{a}/forward?target=temporal")
        client.post(f"{base}/{b}/forward?target=temporal")
        r = client.post(f"{base}/{a}/forward?target=temporal").json()
        assert [e["node_id"] for e in r["forwarded"]] == [a, b]
        listed = client.get(f"/sessions/{session}/forwarded?target=temporal").json()
        assert [e["node_id"] for e in listed] == [a, b]
        assert client.get(f"/sessions/{session}/forwarded?target=geographic").json() == []

    def test_detail_constant_segment_no_anomalies(self, client, session):
        upload_demo(client, session)
        csv = "timestamp,v\n" + "\n".join(f"{i},5" for i in range(30))
        client.post(f"/sessions/{session}/series?name=const", content=csv.encode())
        tree = client.post(f"/sessions/{session}/series/const/query", content=bins_query(30)).json()
        root = tree["root"]
        d = client.get(
            f"/sessions/{session}/series/const/nodes/{root['id']}/detail?detectors=mad"
        ).json()
        assert d["anomalies"] == []
        assert d["overlay"] == [0] * 7

    def test_detail_spike_histogram(self, client, session):
        tree = self._tree(client, session)
        root = tree["root"]
        d = client.get(
            f"/sessions/{session}/series/demo/nodes/{root['id']}/detail"
            f"?detectors=mad&dimensions=alt&bins=8&normalization=per_type_percent"
        ).json()
        assert [a["index"] for a in d["anomalies"]] == [201]
        mad_col = [row[1] for row in d["histogram"]["counts"]]
        assert sum(mad_col) == 100.0
        assert d["overlay"][5] == 1  # record 201 of 240 sits in the 6th seventh

    def test_detail_bad_detector_4xx(self, client, session):
        tree = self._tree(client, session)
        root = tree["root"]
        r = client.get(f"/sessions/{session}/series/demo/nodes/{root['id']}/detail?detectors=bogus")
        assert r.status_code in (400, 422)

    def test_bookmark_label_roundtrip(self, client, session):
        tree = self._tree(client, session)
        node = tree["root"]["children"][0]["id"]
        base = f"/sessions/{session}/series/demo/nodes/{node}"
        assert client.post(f"{base}/bookmark", content=json.dumps({"bookmarked": True})).json()["bookmarked"]
        labels = client.post(f"{base}/label", content=json.dumps({"label": "roost"})).json()["labels"]
        assert "roost" in labels
        fresh = client.get(f"/sessions/{session}/series/demo/tree").json()
        child = fresh["root"]["children"][0]
        assert child["bookmarked"] and "roost" in child["labels"]

    def test_bookmarks_survive_requery(self, client, session):
        tree = self._tree(client, session)
        node = tree["root"]["children"][0]["id"]
        client.post(f"/sessions/{session}/series/demo/nodes/{node}/bookmark",
                    content=json.dumps({"bookmarked": True}))
        again = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60)).json()
        child = again["root"]["children"][0]
        assert child["id"] == node and child["bookmarked"]


class TestExport:
    def test_tree_csv_row_count(self, client, session):
        upload_demo(client, session)
        tree = client.post(f"/sessions/{session}/series/demo/query", content=bins_query(60)).json()
        r = client.get(f"/sessions/{session}/series/demo/export?kind=tree_csv")
        assert len(r.text.splitlines()) == tree["node_count"] + 1

    def test_query_json_reparses_equal(self, client, session):
        upload_demo(client, session)
        with open(os.path.join(FIXTURES, "query_cat.json")) as f:
            raw = f.read()
        client.post(f"/sessions/{session}/series/demo/query", content=raw)
        r = client.get(f"/sessions/{session}/series/demo/export?kind=query_json")
        assert r.text == raw

    def test_export_before_query_409(self, client, session):
        upload_demo(client, session)
        assert client.get(f"/sessions/{session}/series/demo/export?kind=tree_csv").status_code == 409
        assert client.get(f"/sessions/{session}/series/demo/export?kind=query_json").status_code == 409


class TestValues:
    def test_values_payload(self, client, session):
        upload_demo(client, session)
        r = client.get(f"/sessions/{session}/series/demo/values?dimensions=alt,location-lat")
        body = r.json()
        assert body["from"] == 1 and body["to"] == 240
        assert len(body["values"]["alt"]) == 240
        assert body["indices"][0] == 1

    def test_downsampling_stride(self, client, session):
        upload_demo(client, session)
        r = client.get(f"/sessions/{session}/series/demo/values?max_points=100").json()
        assert r["stride"] == 3
        assert len(r["indices"]) == 80


class TestPersistence:
    def test_log_replay_restores_state(self, tmp_path, client):
        log = tmp_path / "sessions.log"
        store = SessionStore(str(log))
        app = TestClient(create_app(store=store))
        sid = app.post("/sessions").json()["session_id"]
        with open(os.path.join(FIXTURES, "demo.csv"), "rb") as f:
            app.post(f"/sessions/{sid}/series?name=demo", content=f.read())
        tree = app.post(f"/sessions/{sid}/series/demo/query", content=bins_query(60)).json()
        node = tree["root"]["children"][0]["id"]
        app.post(f"/sessions/{sid}/series/demo/nodes/{node}/bookmark",
                 content=json.dumps({"bookmarked": True}))

        revived = TestClient(create_app(store=SessionStore(str(log))))
        again = revived.get(f"/sessions/{sid}/series/demo/tree").json()
        child = again["root"]["children"][0]
        assert child["id"] == node and child["bookmarked"]

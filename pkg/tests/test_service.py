import numpy as np
import pytest
from fastapi.testclient import TestClient

from iclseg.dataio import load_labels, load_manifest, resolve_field
from iclseg.metrics import center_point
from iclseg.prompting import prompt_mask
from iclseg.rle import decode_mask
from iclseg.scenes import generate_dataset
from iclseg.service import create_app


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    manifest = generate_dataset(root / "ds", 2, seed=4)
    return manifest


@pytest.fixture(scope="module")
def client(dataset):
    app = create_app(dataset, threads=2)
    with TestClient(app) as tc:
        yield tc


def first_entry(dataset):
    entry = load_manifest(dataset)[0]
    labels, _ = load_labels(entry.labels_path)
    return entry, labels


def test_health(client):
    r = client.get("/api/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_image_listing_and_bytes(client):
    images = client.get("/api/images").json()
    assert [im["id"] for im in images] == ["scene_0000", "scene_0001"]
    assert all(im["width"] == 64 and im["height"] == 64 for im in images)
    r = client.get("/api/images/scene_0000")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    assert r.content[:8] == b"\x89PNG\r\n\x1a\n"
    assert client.get("/api/images/scene_0000/field").status_code == 200


def test_unknown_image_is_404(client):
    assert client.get("/api/images/nope").status_code == 404
    assert client.get("/api/images/nope/field").status_code == 404
    r = client.post("/api/prompt", json={"image_id": "nope", "points": [{"x": 0, "y": 0}]})
    assert r.status_code == 404


def test_prompt_matches_library_bit_for_bit(client, dataset):
    entry, labels = first_entry(dataset)
    field = resolve_field(entry, None, labels)
    for i in range(1, labels.max() + 1):
        x, y = center_point(labels == i)
        r = client.post(
            "/api/prompt",
            json={"image_id": entry.id, "points": [{"x": x, "y": y}], "gt_instance_id": i},
        )
        assert r.status_code == 200
        body = r.json()
        served = decode_mask(body["mask"], 64, 64)
        local = prompt_mask(field, [(x, y)])
        assert np.array_equal(served, local)
        assert body["iou_vs_gt"] == 1.0
        assert body["timing_ms"] >= 0.0


def test_prompt_threshold_and_multiple_points(client, dataset):
    entry, labels = first_entry(dataset)
    field = resolve_field(entry, None, labels)
    pts = [center_point(labels == 1), center_point(labels == 2)]
    payload = {
        "image_id": entry.id,
        "points": [{"x": int(x), "y": int(y)} for x, y in pts],
        "threshold": 0.25,
    }
    r = client.post("/api/prompt", json=payload)
    served = decode_mask(r.json()["mask"], 64, 64)
    assert np.array_equal(served, prompt_mask(field, pts, threshold=0.25))


def test_prompt_repeat_requests_identical(client, dataset):
    entry, labels = first_entry(dataset)
    x, y = center_point(labels == 1)
    payload = {"image_id": entry.id, "points": [{"x": x, "y": y}]}
    masks = [client.post("/api/prompt", json=payload).json()["mask"] for _ in range(3)]
    assert masks[0] == masks[1] == masks[2]


def test_prompt_validation_errors(client, dataset):
    entry, labels = first_entry(dataset)
    assert (
        client.post("/api/prompt", json={"image_id": entry.id, "points": []}).status_code == 422
    )
    r = client.post(
        "/api/prompt", json={"image_id": entry.id, "points": [{"x": 64, "y": 0}]}
    )
    assert r.status_code == 422
    r = client.post(
        "/api/prompt",
        json={"image_id": entry.id, "points": [{"x": 1, "y": 1}], "gt_instance_id": 99},
    )
    assert r.status_code == 422
    assert client.post("/api/prompt", json={"points": [{"x": 0, "y": 0}]}).status_code == 422


def test_iou_omitted_without_gt_request(client, dataset):
    entry, labels = first_entry(dataset)
    x, y = center_point(labels == 1)
    body = client.post(
        "/api/prompt", json={"image_id": entry.id, "points": [{"x": x, "y": y}]}
    ).json()
    assert "iou_vs_gt" not in body


def test_fields_dir_used_when_present(tmp_path):
    from iclseg.dataio import save_field

    manifest = generate_dataset(tmp_path / "ds", 1, seed=6)
    entry = load_manifest(manifest)[0]
    labels, _ = load_labels(entry.labels_path)
    custom = np.zeros((64, 64, 3))
    custom[labels == 1] = (250.0, 0.0, 0.0)
    fields = tmp_path / "fields"
    save_field(custom, fields / f"{entry.id}.icf")
    app = create_app(manifest, fields_dir=fields)
    with TestClient(app) as tc:
        x, y = center_point(labels == 1)
        body = tc.post(
            "/api/prompt", json={"image_id": entry.id, "points": [{"x": x, "y": y}]}
        ).json()
        served = decode_mask(body["mask"], 64, 64)
        assert np.array_equal(served, prompt_mask(custom, [(x, y)]))

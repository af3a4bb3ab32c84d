"""Protocol conformance of the bridge, driven with raw sockets only."""

import socket

import numpy as np
import pytest

from modelbridge import load_model, serve, spec_for

TINY = "tiny:8x8"


@pytest.fixture(scope="module")
def server():
    model = load_model(TINY, weights="none", seed=0)
    srv = serve(model, port=0, background=True)
    yield srv
    srv.shutdown()
    srv.server_close()


def connect(server):
    sock = socket.create_connection(("127.0.0.1", server.port), timeout=5.0)
    return sock, sock.makefile("rb")


def send_query(sock, rfile, req, n, payload):
    sock.sendall(f"QUERY {req} {n}\n".encode() + payload)
    return rfile.readline().decode().strip()


def random_payload(rng, n):
    return rng.uniform(0.0, 1.0, n).astype("<f4").tobytes()


class TestSpecs:
    def test_imagenet_shape_advertised(self):
        spec = spec_for("resnet50")
        assert (spec.n, spec.class_count) == (150528, 1000)

    def test_all_six_imagenet_models_known(self):
        for model_id in ("vgg19", "resnet50", "inception-v3", "vit-b32",
                         "densenet161", "efficientnet-b0"):
            spec = spec_for(model_id)
            assert (spec.n, spec.class_count) == (150528, 1000)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            spec_for("alexnet9000")


class TestHandshake:
    def test_model_frame(self, server):
        sock, rfile = connect(server)
        sock.sendall(b"HELLO 1\n")
        assert rfile.readline() == b"MODEL 192 10\n"
        sock.close()

    def test_unsupported_version(self, server):
        sock, rfile = connect(server)
        sock.sendall(b"HELLO 9\n")
        assert rfile.readline().startswith(b"ERR")
        sock.close()


class TestQueries:
    def test_identical_payloads_identical_labels(self, server):
        rng = np.random.default_rng(3)
        payload = random_payload(rng, 192)
        sock, rfile = connect(server)
        first = send_query(sock, rfile, 1, 192, payload)
        second = send_query(sock, rfile, 2, 192, payload)
        sock.close()
        assert first.split()[0] == "LABEL" and second.split()[0] == "LABEL"
        assert first.split()[2] == second.split()[2]
        assert first.split()[1] == "1" and second.split()[1] == "2"

    def test_label_in_range(self, server):
        rng = np.random.default_rng(5)
        sock, rfile = connect(server)
        for req in range(5):
            reply = send_query(sock, rfile, req, 192, random_payload(rng, 192))
            kind, rid, cls = reply.split()
            assert kind == "LABEL" and int(rid) == req and 0 <= int(cls) < 10
        sock.close()

    def test_undersized_dimension_gets_err(self, server):
        sock, rfile = connect(server)
        reply = send_query(sock, rfile, 7, 10, b"\x00" * 40)
        assert reply.startswith("ERR 7")
        # connection stays usable after the ERR frame
        rng = np.random.default_rng(6)
        assert send_query(sock, rfile, 8, 192, random_payload(rng, 192)).startswith("LABEL 8")
        sock.close()

    def test_oversized_dimension_closes_connection(self, server):
        sock, rfile = connect(server)
        sock.sendall(b"QUERY 9 100000\n")
        assert rfile.readline() == b""  # server hung up
        sock.close()

    def test_malformed_frame_gets_err(self, server):
        sock, rfile = connect(server)
        sock.sendall(b"NONSENSE\n")
        assert rfile.readline().startswith(b"ERR 0")
        sock.close()

    def test_concurrent_connections(self, server):
        rng = np.random.default_rng(8)
        payload = random_payload(rng, 192)
        socks = [connect(server) for _ in range(3)]
        replies = [send_query(s, r, i, 192, payload) for i, (s, r) in enumerate(socks)]
        for s, _ in socks:
            s.close()
        labels = {reply.split()[2] for reply in replies}
        assert len(labels) == 1  # shared model, same bytes, same answer


class TestDeterminism:
    def test_seeded_random_init_is_reproducible(self):
        rng = np.random.default_rng(11)
        payloads = [random_payload(rng, 192) for _ in range(4)]
        a = load_model(TINY, weights="none", seed=42)
        b = load_model(TINY, weights="none", seed=42)
        assert [a.classify(p) for p in payloads] == [b.classify(p) for p in payloads]

    def test_channel_innermost_layout(self):
        # A payload that is pure red in the (, , channel) layout must differ
        # from pure blue after decoding; equal channels would be a transpose bug.
        model = load_model(TINY, weights="none", seed=1)
        spec = model.spec
        red = np.zeros((spec.width, spec.height, 3), dtype="<f4")
        red[:, :, 0] = 1.0
        blue = np.zeros((spec.width, spec.height, 3), dtype="<f4")
        blue[:, :, 2] = 1.0
        import torch

        def logits(grid):
            chw = np.ascontiguousarray(np.transpose(grid, (2, 1, 0)))
            batch = torch.from_numpy(chw.copy()).unsqueeze(0)
            with torch.no_grad():
                return model.module(batch)

        assert not torch.equal(logits(red), logits(blue))

"""Line-framed hard-label server.

Frames, over a plain byte stream:

    client: HELLO <version>\\n
    server: MODEL <N> <K>\\n
    client: QUERY <request-id> <N>\\n  + 4N bytes of little-endian float32
    server: LABEL <request-id> <class-id>\\n
    server: ERR <request-id> <text>\\n   (malformed or failed queries)

A query whose declared dimension exceeds the served model's gets the
connection closed instead of an ERR reply, so a confused client cannot make
the server buffer unbounded payloads. Inference is serialized behind a lock;
identical payloads always produce identical labels.
"""

import socketserver
import threading

PROTOCOL_VERSION = 1
MAX_LINE = 256


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        model = self.server.model
        lock = self.server.inference_lock
        while True:
            line = self.rfile.readline(MAX_LINE)
            if not line:
                return
            parts = line.decode("ascii", errors="replace").split()
            if not parts:
                continue
            if parts[0] == "HELLO":
                if len(parts) == 2 and parts[1] == str(PROTOCOL_VERSION):
                    self.wfile.write(
                        f"MODEL {model.spec.n} {model.spec.class_count}\n".encode())
                else:
                    self.wfile.write(b"ERR 0 unsupported protocol version\n")
                continue
            if parts[0] == "QUERY" and len(parts) == 3:
                req = parts[1]
                try:
                    n = int(parts[2])
                except ValueError:
                    self.wfile.write(f"ERR {req} bad dimension\n".encode())
                    continue
                if n > model.spec.n:
                    return  # oversized payload: close rather than buffer it
                payload = self.rfile.read(4 * n)
                if len(payload) != 4 * n:
                    return
                if n != model.spec.n:
                    self.wfile.write(f"ERR {req} dimension mismatch\n".encode())
                    continue
                with lock:
                    cls = model.classify(payload)
                self.wfile.write(f"LABEL {req} {cls}\n".encode())
                continue
            self.wfile.write(b"ERR 0 malformed frame\n")


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, model, host="127.0.0.1", port=0):
        self.model = model
        self.inference_lock = threading.Lock()
        super().__init__((host, port), _Handler)

    @property
    def port(self):
        return self.server_address[1]


def serve(model, host="127.0.0.1", port=0, background=False):
    """Run a server for a loaded model; returns it when backgrounded."""
    server = BridgeServer(model, host=host, port=port)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return server

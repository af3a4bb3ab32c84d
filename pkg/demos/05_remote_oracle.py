"""Attacking a model behind the wire protocol instead of an in-process oracle.

Starts a throwaway protocol server around a toy model on a local socket, then
runs the identical attack through the remote client. The same client speaks
to the model bridge (see bridge/) when a real classifier is being served.
"""

import socket
import threading

import numpy as np

from adba import AttackConfig, ToyMeanThresholdOracle, attack, make_remote_oracle

backing = ToyMeanThresholdOracle(n=8, threshold=0.5, budget=10 ** 9)


def serve(listener):
    conn, _ = listener.accept()
    rfile = conn.makefile("rb")
    while True:
        line = rfile.readline()
        if not line:
            return
        parts = line.decode().split()
        if parts[0] == "HELLO":
            conn.sendall(f"MODEL {backing.n} {backing.class_count}\n".encode())
        elif parts[0] == "QUERY":
            payload = rfile.read(4 * int(parts[2]))
            image = np.frombuffer(payload, dtype="<f4").astype(float)
            conn.sendall(f"LABEL {parts[1]} {backing._predict(image)}\n".encode())


listener = socket.socket()
listener.bind(("127.0.0.1", 0))
listener.listen(1)
port = listener.getsockname()[1]
threading.Thread(target=serve, args=(listener,), daemon=True).start()
print(f"toy model served on 127.0.0.1:{port}")

oracle = make_remote_oracle(("127.0.0.1", port), class_count=2, budget=5000, expected_n=8)
print(f"handshake ok: N={oracle.n}, K={oracle.class_count}")

x = np.full(8, 0.45)
report = attack(oracle, x, 0, AttackConfig(epsilon=0.2, budget=5000))
print(f"attack over the wire: {report.status}, strength {report.r_final:.6f}, "
      f"{report.queries} queries")
oracle.close()

direct = attack(ToyMeanThresholdOracle(n=8, threshold=0.5, budget=5000), x, 0,
                AttackConfig(epsilon=0.2, budget=5000))
print(f"same attack in-process: {direct.status}, strength {direct.r_final:.6f}, "
      f"{direct.queries} queries")
print("identical bills and traces: the ledger counts model evaluations, not bytes")

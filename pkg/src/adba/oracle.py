"""Hard-label oracles behind a query-counted interface.

All an attack ever observes is ``label(image) -> class id``. Every counted
call is charged to a :class:`QueryLedger`; exceeding the budget raises.
Toy oracles provide analytic ground truth for tests; :class:`RemoteOracle`
speaks the wire protocol described in the package README.
"""

import math
import socket
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    BudgetExhaustedError,
    DimensionMismatchError,
    HandshakeMismatchError,
    RemoteProtocolError,
)

PROTOCOL_VERSION = 1


@dataclass
class QueryLedger:
    """Counts model evaluations against a hard budget."""

    budget: int
    used: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")

    @property
    def remaining(self):
        return self.budget - self.used

    def check(self):
        if self.used >= self.budget:
            raise BudgetExhaustedError(f"query budget of {self.budget} exhausted")

    def charge(self):
        self.check()
        self.used += 1


def validate_image(x, n=None):
    """Return x as a float vector after checking the [0, 1] box and length."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DimensionMismatchError("image must be a flat vector of length >= 1")
    if n is not None and x.size != n:
        raise DimensionMismatchError(f"image has {x.size} entries, oracle expects {n}")
    if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
        raise ValueError("image entries must lie in [0, 1]")
    return x


def perturbed_image(x, d, r):
    """Clamped perturbation x' = clip(x + r * d, 0, 1)."""
    return np.clip(x + r * d, 0.0, 1.0)


class Oracle:
    """Deterministic hard-label classifier with a query ledger."""

    def __init__(self, n, class_count, budget):
        if n < 1 or class_count < 2:
            raise ValueError("need n >= 1 and class_count >= 2")
        self.n = int(n)
        self.class_count = int(class_count)
        self.ledger = QueryLedger(budget=budget)

    def _predict(self, image):
        raise NotImplementedError

    def label(self, image, charge=True):
        """Classify an image; charges one ledger unit unless charge=False.

        The budget precondition is enforced before the model is touched; the
        ledger is incremented only once a label actually came back, so a
        failed remote round trip costs nothing.
        """
        image = validate_image(image, self.n)
        if charge:
            self.ledger.check()
        cls = int(self._predict(image))
        if not 0 <= cls < self.class_count:
            raise RemoteProtocolError(f"class id {cls} outside [0, {self.class_count})")
        if charge:
            self.ledger.used += 1
        return cls


class ToyLinearOracle(Oracle):
    """argmax(weights @ x + bias); ties go to the lowest class index."""

    def __init__(self, weights, bias, budget):
        weights = np.asarray(weights, dtype=float)
        bias = np.asarray(bias, dtype=float)
        if weights.ndim != 2 or bias.shape != (weights.shape[0],):
            raise ValueError("weights must be (K, N) with bias of length K")
        super().__init__(n=weights.shape[1], class_count=weights.shape[0], budget=budget)
        self.weights = weights
        self.bias = bias

    def _predict(self, image):
        return np.argmax(self.weights @ image + self.bias)


class ToyMeanThresholdOracle(Oracle):
    """Binary toy model: class 0 iff the pixel mean is <= threshold."""

    def __init__(self, n, threshold=0.5, budget=10 ** 9):
        super().__init__(n=n, class_count=2, budget=budget)
        self.threshold = float(threshold)

    def _predict(self, image):
        return 0 if image.mean() <= self.threshold else 1


def query(oracle, image):
    """One counted hard-label query."""
    return oracle.label(image)


def query_perturbed(oracle, x, y, d, r, charge=True):
    """True iff the model mislabels clip(x + r * d, 0, 1). One query."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("perturbation strength must lie in [0, 1]")
    return oracle.label(perturbed_image(x, d, r), charge=charge) != y


def true_boundary(oracle, x, y, d, tol=1e-9):
    """Ground-truth boundary strength along d, by uncounted fine bisection.

    Only meaningful on toy oracles whose adversarial predicate is monotone
    along the ray (true for the instances constructed in tests). Returns
    math.inf when the direction is not adversarial anywhere in [0, 1].
    """
    if isinstance(oracle, RemoteOracle):
        raise TypeError("true_boundary is a test oracle for toy models only")
    if oracle.label(x, charge=False) != y:
        return 0.0
    if not query_perturbed(oracle, x, y, d, 1.0, charge=False):
        return math.inf
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if query_perturbed(oracle, x, y, d, mid, charge=False):
            hi = mid
        else:
            lo = mid
    return hi


class RemoteOracle(Oracle):
    """Client for the line-framed hard-label wire protocol.

    Frames: "HELLO <version>", "MODEL <N> <K>", "QUERY <id> <N>" followed by
    4N bytes of little-endian float32 pixels, "LABEL <id> <class>", and
    "ERR <id> <text>". One connection per handle. The ledger is charged only
    for queries that produced a LABEL reply.
    """

    def __init__(self, address, class_count, budget, expected_n=None, timeout=30.0):
        host, port = address
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as exc:
            raise RemoteProtocolError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._rfile = self._sock.makefile("rb")
        self._next_id = 0
        n, k = self._handshake()
        if expected_n is not None and n != expected_n:
            self.close()
            raise HandshakeMismatchError(f"server serves N={n}, configured N={expected_n}")
        if k != class_count:
            self.close()
            raise HandshakeMismatchError(f"server serves K={k}, configured K={class_count}")
        super().__init__(n=n, class_count=k, budget=budget)

    def _send(self, data):
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise RemoteProtocolError(f"send failed: {exc}") from exc

    def _read_line(self):
        try:
            line = self._rfile.readline()
        except OSError as exc:
            raise RemoteProtocolError(f"receive failed: {exc}") from exc
        if not line:
            raise RemoteProtocolError("connection closed by server")
        return line.decode("ascii", errors="replace").strip()

    def _handshake(self):
        self._send(f"HELLO {PROTOCOL_VERSION}\n".encode("ascii"))
        reply = self._read_line()
        parts = reply.split()
        if len(parts) != 3 or parts[0] != "MODEL":
            raise RemoteProtocolError(f"bad handshake reply: {reply!r}")
        try:
            return int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise RemoteProtocolError(f"bad handshake reply: {reply!r}") from exc

    def _predict(self, image):
        req = self._next_id
        self._next_id += 1
        self._send(f"QUERY {req} {self.n}\n".encode("ascii") + encode_image_payload(image))
        reply = self._read_line()
        parts = reply.split(maxsplit=2)
        if len(parts) >= 2 and parts[0] == "ERR":
            raise RemoteProtocolError(f"server error: {parts[2] if len(parts) > 2 else ''}")
        if len(parts) != 3 or parts[0] != "LABEL" or parts[1] != str(req):
            raise RemoteProtocolError(f"bad reply frame: {reply!r}")
        return int(parts[2])

    def close(self):
        try:
            self._rfile.close()
        finally:
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def make_remote_oracle(address, class_count, budget, expected_n=None, timeout=30.0):
    """Connect and handshake with a remote hard-label server."""
    return RemoteOracle(address, class_count, budget, expected_n=expected_n, timeout=timeout)


def encode_image_payload(x):
    """Canonical byte encoding of an image: N little-endian float32 values."""
    return np.asarray(x, dtype="<f4").tobytes()


def decode_image_payload(buf, n):
    """Inverse of :func:`encode_image_payload`."""
    if len(buf) != 4 * n:
        raise RemoteProtocolError(f"payload has {len(buf)} bytes, expected {4 * n}")
    return np.frombuffer(buf, dtype="<f4", count=n).astype(float)

"""Shared test machinery: instrumented oracles, analytic boundaries, servers."""

import math
import socket
import threading

import numpy as np

from adba.oracle import Oracle, ToyLinearOracle

BIG_BUDGET = 10 ** 9

D1 = np.array([1, -1], dtype=np.int8)
D2 = np.array([-1, 1], dtype=np.int8)
DBEST = np.array([1, 1], dtype=np.int8)
X2 = np.zeros(2)


class PairBoundaryOracle(Oracle):
    """Two-pixel oracle with prescribed boundaries per probe pattern.

    The anchor image is all zeros, so a probe clip(x + r*d) keeps r as its
    maximum entry and the positive-entry pattern identifies the direction.
    A probe along a pattern is adversarial iff r >= its prescribed boundary.
    """

    def __init__(self, g1, g2, g_best=0.0, budget=BIG_BUDGET):
        super().__init__(n=2, class_count=2, budget=budget)
        self.boundaries = {(True, False): g1, (False, True): g2, (True, True): g_best}
        self.probes = []  # (r, pattern) per model evaluation

    def _predict(self, image):
        r = float(image.max())
        if r <= 0.0:
            return 0
        pattern = (image[0] > 0.0, image[1] > 0.0)
        self.probes.append((r, pattern))
        return 1 if r >= self.boundaries[pattern] else 0


class CountingOracle(Oracle):
    """Wraps another oracle and counts raw model evaluations."""

    def __init__(self, inner):
        super().__init__(n=inner.n, class_count=inner.class_count, budget=inner.ledger.budget)
        self.inner = inner
        self.evaluations = 0
        self.images = []

    def _predict(self, image):
        self.evaluations += 1
        self.images.append(image.copy())
        return self.inner._predict(image)


def linear_margin_oracle(w, x, margin, budget=BIG_BUDGET):
    """Binary toy model, adversarial iff w . (x' - x) > margin.

    Class 0 score is 0, class 1 score is w . x' - (w . x + margin); ties go
    to class 0, so x itself is labeled 0 whenever margin >= 0.
    """
    k_weights = np.vstack([np.zeros_like(w), w])
    bias = np.array([0.0, -(w @ x) - margin])
    return ToyLinearOracle(weights=k_weights, bias=bias, budget=budget)


def analytic_ray_boundary(w, x, margin, d):
    """Exact boundary of the linear margin model along clip(x + r*d).

    Walks the piecewise-linear score w . (clip(x + r*d) - x) over the clamp
    breakpoints. Returns (boundary, monotone): boundary is math.inf when the
    score never exceeds the margin on [0, 1], and monotone reports whether it
    stays above the margin once crossed (bisection is only trustworthy then).
    """
    d = np.asarray(d, dtype=float)
    saturation = np.where(d > 0, 1.0 - x, x)
    breaks = sorted(set(float(t) for t in saturation if 0.0 < t < 1.0)) + [1.0]

    boundary = None if margin >= 0.0 else 0.0
    monotone = True
    value, r0 = 0.0, 0.0
    for r1 in breaks:
        active = saturation > r0 + 1e-15
        slope = float(np.sum(w[active] * d[active]))
        v1 = value + slope * (r1 - r0)
        if boundary is None:
            if slope > 0.0 and v1 > margin:
                boundary = r0 + (margin - value) / slope
        elif v1 <= margin:
            # Linear segments take their minima at endpoints, so checking
            # endpoints after the crossing is exhaustive.
            monotone = False
        value, r0 = v1, r1
    if boundary is None:
        return math.inf, True
    return boundary, monotone


def make_attack_instance(rng, n=64, margin_lo=0.01, margin_hi=0.03):
    """Random linear toy instance that is correctly classified and attackable.

    The margin is a fraction of the best achievable score swing, so the
    fully-aligned direction has boundary margin_lo..margin_hi of full
    strength. Fractions just under epsilon give long searches dominated by
    small per-flip improvements; smaller fractions finish in a handful of
    iterations.
    """
    while True:
        x = rng.uniform(0.2, 0.8, size=n)
        w = rng.normal(0.0, 1.0, size=n)
        margin = rng.uniform(margin_lo, margin_hi) * np.abs(w).sum()
        oracle = linear_margin_oracle(w, x, margin)
        ones = np.ones(n, dtype=np.int8)
        start_ok = any(
            oracle.label(np.clip(x + 1.0 * d, 0.0, 1.0), charge=False) != 0
            for d in (ones, -ones))
        if start_ok:
            return w, x, margin


def make_comparison_instance(rng, n=64, r_best=0.25, tau=0.002):
    """Instance plus candidate pair with known, well-separated boundaries.

    Anchors stay in [0.3, 0.7] and every boundary of interest is below 0.25,
    so no probe of the comparison ever clamps and the linear analysis is
    exact. Returns (oracle factory args, d_best, d1, d2, g1, g2).
    """
    while True:
        x = rng.uniform(0.3, 0.7, size=n)
        w = rng.normal(0.0, 1.0, size=n)
        d_best = (rng.integers(0, 2, size=n) * 2 - 1).astype(np.int8)
        s = float(w @ d_best)
        if s <= 0:
            w = -w
            s = -s
        margin = rng.uniform(0.08, 0.22) * s

        def flip(block):
            d = d_best.copy()
            d[block[0]:block[1]] *= -1
            return d

        half = n // 2
        cut1 = rng.integers(1, half)
        cut2 = rng.integers(half + 1, n)
        d1, d2 = flip((0, cut1)), flip((half, cut2))

        ok = True
        bounds = []
        for d in (d_best, d1, d2):
            g, monotone = analytic_ray_boundary(w, x, margin, d)
            if not monotone or not math.isfinite(g):
                ok = False
                break
            bounds.append(g)
        if not ok:
            continue
        g_best, g1, g2 = bounds
        if g_best <= r_best and g1 <= r_best and g2 <= r_best and abs(g1 - g2) > 2 * tau:
            return w, x, margin, d_best, d1, d2, g1, g2


class ToyProtocolServer:
    """Minimal wire-protocol server around a toy oracle, for client tests.

    Fault injection: advertise_n overrides the handshake dimension,
    error_after makes the nth query return an ERR frame, drop_after closes
    the connection before replying to the nth query.
    """

    def __init__(self, oracle, advertise_n=None, error_after=None, drop_after=None):
        self.oracle = oracle
        self.advertise_n = advertise_n if advertise_n is not None else oracle.n
        self.error_after = error_after
        self.drop_after = drop_after
        self.queries_served = 0
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind(("127.0.0.1", 0))
        self._sock.listen(4)
        self.port = self._sock.getsockname()[1]
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def _serve(self):
        while not self._stop.is_set():
            try:
                self._sock.settimeout(0.2)
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            threading.Thread(target=self._handle, args=(conn,), daemon=True).start()

    def _handle(self, conn):
        rfile = conn.makefile("rb")
        try:
            while True:
                line = rfile.readline()
                if not line:
                    return
                parts = line.decode("ascii", errors="replace").split()
                if parts and parts[0] == "HELLO":
                    conn.sendall(
                        f"MODEL {self.advertise_n} {self.oracle.class_count}\n".encode())
                    continue
                if len(parts) == 3 and parts[0] == "QUERY":
                    req, n = parts[1], int(parts[2])
                    payload = rfile.read(4 * n)
                    self.queries_served += 1
                    if self.drop_after is not None and self.queries_served >= self.drop_after:
                        return
                    if self.error_after is not None and self.queries_served >= self.error_after:
                        conn.sendall(f"ERR {req} injected failure\n".encode())
                        continue
                    image = np.frombuffer(payload, dtype="<f4", count=n).astype(float)
                    cls = self.oracle._predict(image)
                    conn.sendall(f"LABEL {req} {cls}\n".encode())
                    continue
                conn.sendall(b"ERR 0 malformed frame\n")
        except OSError:
            pass
        finally:
            try:
                rfile.close()
                conn.close()
            except OSError:
                pass

    def close(self):
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        self._thread.join(timeout=2.0)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

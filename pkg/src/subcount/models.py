"""Black-box regressors targeted by the attacks.

Built-in targets cover the test matrix: an exact-count oracle (unattackable
by construction), a noisy oracle with hash-keyed deterministic noise, and a
deliberately weak linear regressor on fixed graph statistics. External
models run in a separate process and are reached through a newline-delimited
JSON protocol over stdio or TCP.
"""
from __future__ import annotations

import json
import os
import random
import select
import shlex
import socket
import subprocess
from typing import Iterable, Sequence

import numpy as np

from .counting import count_induced
from .graph import Graph
from .patterns import Pattern

PROTOCOL_NAME = "subcount-attack/1"
TIMEOUT_ENV_VAR = "SUBCOUNT_MODEL_TIMEOUT_SECS"
DEFAULT_TIMEOUT_SECS = 60.0


class ModelProtocolError(RuntimeError):
    """Malformed or inconsistent traffic from an external model adapter."""


class Predictor:
    """Batched regressor interface: graphs + pattern in, one float per graph."""

    name: str = "predictor"
    deterministic: bool = True

    def predict_batch(self, graphs: Sequence[Graph], pattern: Pattern) -> list[float]:
        raise NotImplementedError

    def predict(self, g: Graph, pattern: Pattern) -> float:
        return self.predict_batch([g], pattern)[0]


class OracleModel(Predictor):
    """Returns the exact induced count; no attack can satisfy the verdict."""

    def __init__(self, pattern: Pattern) -> None:
        self.pattern = pattern
        self.name = f"oracle:{pattern.key}"

    def predict_batch(self, graphs: Sequence[Graph], pattern: Pattern) -> list[float]:
        return [float(count_induced(g, pattern)) for g in graphs]


class NoisyOracleModel(Predictor):
    """Exact count plus Gaussian noise keyed by (seed, pattern, graph).

    The draw depends only on the canonical graph text, so repeated queries of
    the same graph return the identical prediction.
    """

    def __init__(self, pattern: Pattern, sigma: float, seed: int = 0) -> None:
        if sigma < 0:
            raise ValueError(f"noise scale must be >= 0, got {sigma}")
        self.pattern = pattern
        self.sigma = float(sigma)
        self.seed = int(seed)
        self.name = f"noisy:{pattern.key}:{sigma:g}:{seed}"

    def _noise(self, g: Graph, pattern: Pattern) -> float:
        if self.sigma == 0.0:
            return 0.0
        key = f"{self.seed}|{pattern.key}|{g.to_json()}"
        return random.Random(key).gauss(0.0, self.sigma)

    def predict_batch(self, graphs: Sequence[Graph], pattern: Pattern) -> list[float]:
        return [float(count_induced(g, pattern)) + self._noise(g, pattern)
                for g in graphs]


# --- linear feature regressor ---------------------------------------------

FEATURE_NAMES = ("intercept", "nodes", "edges", "deg_mean", "deg_mean2",
                 "deg_mean3", "deg_mean4", "wedges")


def graph_features(g: Graph) -> list[float]:
    """Fixed statistics: size, edge count, degree moments 1-4, wedge count."""
    s1 = s2 = s3 = s4 = wedges = 0
    for d in g.degrees():
        d2 = d * d
        s1 += d
        s2 += d2
        s3 += d2 * d
        s4 += d2 * d2
        wedges += d * (d - 1) // 2
    n = max(g.n, 1)
    return [1.0, float(g.n), float(g.num_edges),
            s1 / n, s2 / n, s3 / n, s4 / n, float(wedges)]


class FeatureRegressor(Predictor):
    """Least-squares linear model on ``graph_features``.

    The feature map cannot separate graphs with equal statistics but
    different counts, so the model is structurally unable to count exactly;
    it exists to give the attacks something they can beat.
    """

    def __init__(self, pattern: Pattern, weights: Sequence[float],
                 name: str = "regressor") -> None:
        if len(weights) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} weights, got {len(weights)}")
        self.pattern = pattern
        self.weights = tuple(float(w) for w in weights)
        self.name = name

    def predict_batch(self, graphs: Sequence[Graph], pattern: Pattern) -> list[float]:
        if pattern is not self.pattern:
            raise ValueError(
                f"regressor fitted for {self.pattern.key}, queried for {pattern.key}")
        w = self.weights
        return [float(sum(f * wk for f, wk in zip(graph_features(g), w)))
                for g in graphs]

    def to_json_obj(self) -> dict:
        return {"pattern": self.pattern.key, "weights": list(self.weights),
                "features": list(FEATURE_NAMES), "name": self.name}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FeatureRegressor":
        return cls(Pattern.from_key(obj["pattern"]), obj["weights"],
                   obj.get("name", "regressor"))


def train_feature_regressor(train: Iterable[tuple[Graph, float]],
                            pattern: Pattern,
                            ridge: float = 1e-6) -> FeatureRegressor:
    """Fit the linear model by solving the normal equations.

    Falls back to a ridge-regularized solve (lambda = ``ridge``) when the
    normal equations are singular.
    """
    pairs = list(train)
    if not pairs:
        raise ValueError("training split is empty")
    x = np.array([graph_features(g) for g, _ in pairs], dtype=float)
    y = np.array([float(label) for _, label in pairs], dtype=float)
    gram = x.T @ x
    rhs = x.T @ y
    try:
        weights = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        weights = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), rhs)
    return FeatureRegressor(pattern, weights.tolist())


def oracle_model(pattern: Pattern) -> Predictor:
    return OracleModel(pattern)


def noisy_oracle(pattern: Pattern, sigma: float, seed: int = 0) -> Predictor:
    return NoisyOracleModel(pattern, sigma, seed)


# --- external model client -------------------------------------------------

def _default_timeout() -> float:
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw is None:
        return DEFAULT_TIMEOUT_SECS
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{TIMEOUT_ENV_VAR} must be a number, got {raw!r}") from None


class ExternalModel(Predictor):
    """Client for an adapter process speaking the wire protocol.

    Endpoints: ``tcp:HOST:PORT`` connects to a listening adapter; any other
    string is treated as a command line and spawned as a child process
    speaking the protocol on stdio. The first line from the adapter must be
    the handshake ``{"protocol": "subcount-attack/1", "model": ...}``.
    """

    def __init__(self, endpoint: str, timeout: float | None = None) -> None:
        self.endpoint = endpoint
        self.timeout = _default_timeout() if timeout is None else float(timeout)
        self._next_id = 0
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._reader = None
        self._writer = None
        self._connect()
        handshake = self._read_line()
        try:
            hello = json.loads(handshake)
        except json.JSONDecodeError as exc:
            raise ModelProtocolError(f"bad handshake line: {handshake!r}") from exc
        if hello.get("protocol") != PROTOCOL_NAME:
            raise ModelProtocolError(
                f"unsupported protocol {hello.get('protocol')!r}, "
                f"expected {PROTOCOL_NAME!r}")
        self.name = f"external:{hello.get('model', 'unknown')}"

    def _connect(self) -> None:
        if self.endpoint.startswith("tcp:"):
            try:
                _, host, port = self.endpoint.split(":", 2)
                sock = socket.create_connection((host, int(port)), timeout=self.timeout)
            except (OSError, ValueError) as exc:
                raise ConnectionError(
                    f"cannot connect to adapter at {self.endpoint!r}: {exc}") from exc
            sock.settimeout(self.timeout)
            self._sock = sock
            self._reader = sock.makefile("r", encoding="utf-8", newline="\n")
            self._writer = sock.makefile("w", encoding="utf-8", newline="\n")
        else:
            try:
                proc = subprocess.Popen(
                    shlex.split(self.endpoint),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise ConnectionError(
                    f"cannot start adapter {self.endpoint!r}: {exc}") from exc
            self._proc = proc
            self._reader = proc.stdout
            self._writer = proc.stdin

    def _read_line(self) -> str:
        if self._sock is not None:
            try:
                line = self._reader.readline()
            except socket.timeout:
                raise TimeoutError(
                    f"adapter did not answer within {self.timeout:g}s") from None
        else:
            ready, _, _ = select.select([self._reader], [], [], self.timeout)
            if not ready:
                raise TimeoutError(f"adapter did not answer within {self.timeout:g}s")
            line = self._reader.readline()
        if not line:
            raise ConnectionError("adapter closed the connection")
        return line

    def _write_line(self, text: str) -> None:
        try:
            self._writer.write(text + "\n")
            self._writer.flush()
        except (OSError, BrokenPipeError) as exc:
            raise ConnectionError(f"adapter connection lost: {exc}") from exc

    def predict_batch(self, graphs: Sequence[Graph], pattern: Pattern) -> list[float]:
        self._next_id += 1
        request_id = self._next_id
        request = {
            "id": request_id,
            "pattern": pattern.key,
            "graphs": [g.to_json_obj() for g in graphs],
        }
        self._write_line(json.dumps(request, sort_keys=True, separators=(",", ":")))
        line = self._read_line()
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ModelProtocolError(f"unparsable response line: {line!r}") from exc
        if response.get("id") != request_id:
            raise ModelProtocolError(
                f"response id {response.get('id')!r} does not match request {request_id}")
        if "error" in response:
            raise ModelProtocolError(f"adapter error: {response['error']}")
        preds = response.get("preds")
        if not isinstance(preds, list) or len(preds) != len(graphs):
            got = len(preds) if isinstance(preds, list) else type(preds).__name__
            raise ModelProtocolError(
                f"expected {len(graphs)} predictions, got {got}")
        return [float(v) for v in preds]

    def close(self) -> None:
        for stream in (self._writer, self._reader):
            try:
                if stream is not None:
                    stream.close()
            except OSError:
                pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalModel":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def external_model_client(endpoint: str, timeout: float | None = None) -> ExternalModel:
    return ExternalModel(endpoint, timeout=timeout)

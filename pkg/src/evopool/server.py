"""Single-experiment chromosome pool server.

Islands PUT their best individual into a shared pool and GET a random one
back. The server runs exactly one experiment at a time: when an arriving
chromosome meets the target fitness, the experiment counter increments and
the pool empties in one atomic transition; every ack carries the
post-operation experiment id so clients can notice they outlived their
experiment.

All state mutations pass through one lock (a single logical writer, many
concurrent HTTP connections), and every API event appends one JSON record
to the experiment log, which doubles as the audit trail for
linearizability checks.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import random
import socket
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .problems import Problem, problem_from_config

__all__ = [
    "PoolEntry",
    "PutAck",
    "PoolStats",
    "PoolServerConfig",
    "PoolService",
    "PoolServer",
]

logger = logging.getLogger(__name__)

DEFAULT_POOL_CAPACITY = 2048


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class PoolEntry:
    uuid: str
    genome: object  # wire encoding: '0'/'1' string or list of floats
    fitness: float
    generation: int
    received_at: str

    def to_wire(self) -> dict:
        return {
            "uuid": self.uuid,
            "genome": self.genome,
            "fitness": self.fitness,
            "generation": self.generation,
            "receivedAt": self.received_at,
        }


@dataclass(frozen=True)
class PutAck:
    accepted: bool
    solved: bool
    experiment_id: int

    def to_wire(self) -> dict:
        return {
            "accepted": self.accepted,
            "solved": self.solved,
            "experimentId": self.experiment_id,
        }


@dataclass(frozen=True)
class PoolStats:
    experiment_id: int
    pool_size: int
    best_fitness: float | None
    puts: int
    gets: int
    solutions: int
    started_at: str
    uptime_seconds: float

    def to_wire(self) -> dict:
        return {
            "experimentId": self.experiment_id,
            "poolSize": self.pool_size,
            "bestFitness": self.best_fitness,
            "puts": self.puts,
            "gets": self.gets,
            "solutions": self.solutions,
            "startedAt": self.started_at,
            "uptime": self.uptime_seconds,
        }


@dataclass(frozen=True)
class PoolServerConfig:
    problem: Problem
    host: str = "127.0.0.1"
    port: int = 0
    capacity: int = DEFAULT_POOL_CAPACITY
    log_path: str | None = None
    verify_fitness: bool = False
    seed: int | None = None
    web_root: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "PoolServerConfig":
        return cls(
            problem=problem_from_config(d["problem"]),
            host=d.get("host", "127.0.0.1"),
            port=int(d.get("port", 0)),
            capacity=int(d.get("capacity", DEFAULT_POOL_CAPACITY)),
            log_path=d.get("log_path"),
            verify_fitness=bool(d.get("verify_fitness", False)),
            seed=d.get("seed"),
            web_root=d.get("web_root"),
        )


class PoolService:
    """Pool, counters and experiment lifecycle behind one lock."""

    def __init__(self, config: PoolServerConfig):
        self.config = config
        self.problem = config.problem
        self._lock = threading.RLock()
        self._rng = random.Random(config.seed)
        self._pool: list[PoolEntry] = []
        self._experiment_id = 1
        self._started_at = utc_now_iso()
        self._boot_monotonic = time.monotonic()
        self._puts = 0
        self._gets = 0
        self._solutions = 0
        self.log_records: list[dict] = []
        self._log_file = None
        if config.log_path:
            Path(config.log_path).parent.mkdir(parents=True, exist_ok=True)
            self._log_file = open(config.log_path, "a", encoding="utf-8")
        self._log("start", problem=self.problem.to_config(), capacity=config.capacity)

    # -- logging ----------------------------------------------------------

    def _log(self, event: str, **payload) -> None:
        record = {
            "ts": utc_now_iso(),
            "event": event,
            "experimentId": self._experiment_id,
            **payload,
        }
        self.log_records.append(record)
        if self._log_file is not None:
            self._log_file.write(json.dumps(record) + "\n")
            self._log_file.flush()

    def close(self) -> None:
        with self._lock:
            if self._log_file is not None:
                self._log_file.close()
                self._log_file = None

    # -- solved test ------------------------------------------------------

    def _meets_target(self, fitness: float) -> bool:
        target = self.problem.target_fitness
        if target is None:
            return False
        if self.problem.direction == "maximize":
            return fitness >= target
        return fitness <= target

    # -- API operations ---------------------------------------------------

    def put(self, uuid: str, genome, fitness: float, generation: int) -> PutAck:
        """Store a migrant; a target-meeting fitness ends the experiment."""
        with self._lock:
            try:
                decoded = self.problem.decode_genome(genome)
                if not np.isfinite(fitness):
                    raise ValueError("fitness must be finite")
                if self.config.verify_fitness:
                    actual = self.problem.evaluate(decoded)
                    if abs(actual - fitness) > 1e-6:
                        raise ValueError(
                            f"claimed fitness {fitness} but evaluates to {actual}"
                        )
            except ValueError as exc:
                self._log("client-error", uuid=uuid, reason=str(exc))
                return PutAck(False, False, self._experiment_id)

            entry = PoolEntry(
                uuid=uuid,
                genome=genome,
                fitness=float(fitness),
                generation=int(generation),
                received_at=utc_now_iso(),
            )
            if len(self._pool) >= self.config.capacity:
                self._pool.pop(0)
            self._pool.append(entry)
            self._puts += 1
            self._log("put", uuid=uuid, fitness=entry.fitness, generation=entry.generation)

            solved = self._meets_target(entry.fitness)
            if solved:
                self._log("solved", uuid=uuid, fitness=entry.fitness, genome=genome)
                self._solutions += 1
                self._advance_experiment()
            return PutAck(True, solved, self._experiment_id)

    def get_random(self) -> PoolEntry | None:
        """One uniform sample from the pool, not removed; None when empty."""
        with self._lock:
            self._gets += 1
            if not self._pool:
                self._log("get", hit=False)
                return None
            entry = self._rng.choice(self._pool)
            self._log("get", hit=True, uuid=entry.uuid, fitness=entry.fitness)
            return entry

    def stats(self) -> PoolStats:
        with self._lock:
            best = None
            if self._pool:
                fits = [e.fitness for e in self._pool]
                best = max(fits) if self.problem.direction == "maximize" else min(fits)
            return PoolStats(
                experiment_id=self._experiment_id,
                pool_size=len(self._pool),
                best_fitness=best,
                puts=self._puts,
                gets=self._gets,
                solutions=self._solutions,
                started_at=self._started_at,
                uptime_seconds=time.monotonic() - self._boot_monotonic,
            )

    def reset(self) -> int:
        """Administrative experiment reset; same transition as a solution."""
        with self._lock:
            self._log("reset", administrative=True)
            self._advance_experiment()
            return self._experiment_id

    def _advance_experiment(self) -> None:
        self._experiment_id += 1
        self._pool.clear()
        self._started_at = utc_now_iso()


CORS_HEADERS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, PUT, POST, OPTIONS",
    "Access-Control-Allow-Headers": "Content-Type",
}


class _Handler(BaseHTTPRequestHandler):
    service: PoolService  # assigned by the server factory
    web_root: Path | None = None
    protocol_version = "HTTP/1.1"

    # route table ---------------------------------------------------------

    def do_OPTIONS(self):  # noqa: N802 (stdlib naming)
        self._respond(204, None)

    def do_PUT(self):  # noqa: N802
        if self.path != "/v1/pool":
            return self._respond(404, {"error": "not found"})
        body = self._read_json()
        if body is None:
            return
        uuid = body.get("uuid")
        genome = body.get("genome")
        fitness = body.get("fitness")
        generation = body.get("generation", 0)
        if (
            not isinstance(uuid, str)
            or genome is None
            or not isinstance(fitness, (int, float))
            or isinstance(fitness, bool)
            or not isinstance(generation, int)
        ):
            return self._respond(400, {"error": "malformed body"})
        ack = self.service.put(uuid, genome, float(fitness), generation)
        self._respond(200, ack.to_wire())

    def do_GET(self):  # noqa: N802
        if self.path == "/v1/pool/random":
            entry = self.service.get_random()
            if entry is None:
                return self._respond(404, {"error": "empty pool"})
            return self._respond(200, {"genome": entry.genome, "fitness": entry.fitness})
        if self.path == "/v1/stats":
            return self._respond(200, self.service.stats().to_wire())
        if self.path == "/v1/problem":
            return self._respond(200, self.service.problem.describe())
        return self._serve_static()

    def do_POST(self):  # noqa: N802
        if self.path != "/v1/experiment/reset":
            return self._respond(404, {"error": "not found"})
        experiment_id = self.service.reset()
        self._respond(200, {"experimentId": experiment_id})

    # helpers --------------------------------------------------------------

    def _read_json(self) -> dict | None:
        try:
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            body = json.loads(raw)
            if not isinstance(body, dict):
                raise ValueError("body must be a JSON object")
            return body
        except (ValueError, json.JSONDecodeError):
            self._respond(400, {"error": "malformed body"})
            return None

    def _respond(self, status: int, payload: dict | None) -> None:
        data = b"" if payload is None else json.dumps(payload).encode("utf-8")
        self.send_response(status)
        for k, v in CORS_HEADERS.items():
            self.send_header(k, v)
        if payload is not None:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if data:
            self.wfile.write(data)

    def _serve_static(self) -> None:
        if self.web_root is None:
            return self._respond(404, {"error": "not found"})
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.web_root / rel).resolve()
        if not str(target).startswith(str(self.web_root.resolve())) or not target.is_file():
            return self._respond(404, {"error": "not found"})
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        for k, v in CORS_HEADERS.items():
            self.send_header(k, v)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):
        logger.debug("http: " + fmt, *args)


class _TrackingHTTPServer(ThreadingHTTPServer):
    """Threading server that can hard-close its open connections.

    Keep-alive connections outlive ``shutdown()``; a stopped pool server
    must look dead to clients holding pooled connections, so ``stop``
    severs them explicitly.
    """

    daemon_threads = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._connections: set = set()
        self._connections_lock = threading.Lock()

    def get_request(self):
        request, addr = super().get_request()
        with self._connections_lock:
            self._connections.add(request)
        return request, addr

    def shutdown_request(self, request):
        with self._connections_lock:
            self._connections.discard(request)
        super().shutdown_request(request)

    def close_all_connections(self):
        with self._connections_lock:
            pending = list(self._connections)
        for request in pending:
            try:
                request.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass


class PoolServer:
    """HTTP front end around a :class:`PoolService`; embeddable in-process.

    Use as a context manager or call :meth:`start`/:meth:`stop`. With
    ``port=0`` an ephemeral port is chosen; read it back from ``.port``.
    """

    def __init__(self, config: PoolServerConfig):
        self.config = config
        self.service = PoolService(config)
        handler = type(
            "BoundHandler",
            (_Handler,),
            {
                "service": self.service,
                "web_root": Path(config.web_root) if config.web_root else None,
            },
        )
        self._httpd = _TrackingHTTPServer((config.host, config.port), handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.config.host}:{self.port}"

    def start(self) -> "PoolServer":
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="pool-server", daemon=True
        )
        self._thread.start()
        logger.info("pool server listening on %s", self.url)
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.close_all_connections()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
        self.service.close()

    def __enter__(self) -> "PoolServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def replay_log(records: list[dict]) -> dict:
    """Rebuild final counters from an event log.

    Returns {"experimentId", "puts", "gets", "solutions", "poolSize"};
    used by audits that check the log alone explains the server state.
    """
    experiment_id = 1
    puts = gets = solutions = 0
    pool_size = 0
    capacity = None
    for rec in records:
        event = rec["event"]
        if event == "start":
            capacity = rec.get("capacity")
        elif event == "put":
            puts += 1
            pool_size += 1
            if capacity is not None and pool_size > capacity:
                pool_size = capacity
        elif event == "get":
            gets += 1
        elif event == "solved":
            solutions += 1
            experiment_id += 1
            pool_size = 0
        elif event == "reset":
            experiment_id += 1
            pool_size = 0
    return {
        "experimentId": experiment_id,
        "puts": puts,
        "gets": gets,
        "solutions": solutions,
        "poolSize": pool_size,
    }

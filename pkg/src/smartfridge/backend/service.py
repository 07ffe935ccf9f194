"""Storage/API backend: broker subscriber, collections, and the HTTP surface.

Subscribes to the device topics, validates and persists telemetry, and serves
the dashboard-facing REST API, including setpoint updates that are published
back to the owning device. All collection writes funnel through the single
Store appender; HTTP reads see its in-memory index.
"""

from __future__ import annotations

import asyncio
import json
import logging
import socket
from dataclasses import dataclass, field
from pathlib import Path
from typing import Awaitable, Callable, Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..client import PubSubClient
from ..device import HUMIDITY_TARGET_RANGE, TEMP_TARGET_RANGE, settings_topic
from .auth import DEFAULT_TOKEN_TTL_SECONDS, DuplicateUser, TokenTable, UserStore
from .recipes import load_catalog, suggest_recipes
from .store import SchemaViolation, Store

logger = logging.getLogger(__name__)

DETECTIONS_FILTER = "fridge/+/detections"
ENV_FILTER = "fridge/+/env"


@dataclass
class BackendConfig:
    data_dir: str
    recipes_path: str
    reports_dir: Optional[str] = None
    broker_host: Optional[str] = None
    broker_port: Optional[int] = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    token_ttl_seconds: float = DEFAULT_TOKEN_TTL_SECONDS
    static_dir: Optional[str] = None


@dataclass
class IngestStats:
    stored: int = 0
    deduplicated: int = 0
    schema_violations: int = 0
    unknown_topics: int = 0

    def as_dict(self) -> dict:
        return {
            "stored": self.stored,
            "deduplicated": self.deduplicated,
            "schemaViolations": self.schema_violations,
            "unknownTopics": self.unknown_topics,
        }


class RegisterBody(BaseModel):
    username: str
    password: str


class SettingsBody(BaseModel):
    device: str
    temperatureTarget: float
    humidityTarget: float


class BackendService:
    def __init__(self, config: BackendConfig):
        self.config = config
        self.store = Store(config.data_dir)
        self.users = UserStore(Path(config.data_dir) / "users.jsonl")
        self.tokens = TokenTable(ttl_seconds=config.token_ttl_seconds)
        self.catalog = load_catalog(config.recipes_path)
        self.stats = IngestStats()
        self._settings_path = Path(config.data_dir) / "settings.jsonl"
        self.desired_settings: dict[str, dict] = {}
        self._load_settings()
        self._publish: Optional[Callable[[str, bytes], Awaitable[None]]] = None
        self.app = self._build_app()

    # ---------------- settings persistence ----------------

    def _load_settings(self) -> None:
        if not self._settings_path.exists():
            return
        for line in self._settings_path.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            try:
                record = json.loads(line)
                self.desired_settings[record["device"]] = {
                    "temperatureTarget": record["temperatureTarget"],
                    "humidityTarget": record["humidityTarget"],
                }
            except (json.JSONDecodeError, KeyError):
                logger.warning("skipping unparseable settings line")

    def _persist_settings(self, device: str, settings: dict) -> None:
        with open(self._settings_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"device": device, **settings}, sort_keys=True) + "\n")
        self.desired_settings[device] = settings

    # ---------------- ingestion ----------------

    def ingest(self, topic: str, body: bytes) -> list[str]:
        """Route one broker message into the store; returns stored record ids."""
        parts = topic.split("/")
        if len(parts) != 3 or parts[0] != "fridge" or parts[2] not in ("detections", "env"):
            self.stats.unknown_topics += 1
            logger.warning("unknown topic %r", topic)
            return []
        try:
            msg = json.loads(body)
            if not isinstance(msg, dict):
                raise SchemaViolation("message body must be a JSON object")
            if msg.get("deviceId") != parts[1]:
                raise SchemaViolation("deviceId does not match the topic")
            if parts[2] == "detections":
                stored = self.store.ingest_detection(msg)
                ids = list(stored) if stored else []
            else:
                stored = self.store.ingest_env(msg)
                ids = [stored] if stored else []
        except (json.JSONDecodeError, SchemaViolation) as exc:
            self.stats.schema_violations += 1
            logger.warning("dropped message on %s: %s", topic, exc)
            return []
        if ids:
            self.stats.stored += len(ids)
        else:
            self.stats.deduplicated += 1
        return ids

    async def connect_ingest(self, client_id: str = "backend-ingest") -> PubSubClient:
        """Connect to the broker and register the telemetry subscriptions."""
        assert self.config.broker_host and self.config.broker_port
        client = await PubSubClient.connect(
            self.config.broker_host, self.config.broker_port, client_id
        )
        await client.subscribe(DETECTIONS_FILTER)
        await client.subscribe(ENV_FILTER)
        self._publish = client.publish
        logger.info(
            "ingest connected to broker %s:%d", self.config.broker_host, self.config.broker_port
        )
        return client

    async def pump_ingest(self, client: PubSubClient) -> None:
        try:
            while True:
                topic, body = await client.get_message()
                self.ingest(topic, body)
        finally:
            self._publish = None
            await client.close()

    async def run_ingest(self, client_id: str = "backend-ingest") -> None:
        """Subscribe to the device topics and pump messages into the store."""
        client = await self.connect_ingest(client_id)
        await self.pump_ingest(client)

    # ---------------- HTTP app ----------------

    def _auth_username(self, request: Request) -> str:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip() if header.startswith("Bearer ") else None
        username = self.tokens.validate(token)
        if username is None:
            raise HTTPException(status_code=401, detail="invalid or expired token")
        return username

    def _build_app(self) -> FastAPI:
        app = FastAPI(title="smartfridge backend", docs_url=None, redoc_url=None)
        service = self

        @app.post("/api/auth/register", status_code=201)
        def register(body: RegisterBody):
            try:
                service.users.register(body.username, body.password)
            except DuplicateUser:
                raise HTTPException(status_code=409, detail="username already registered")
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return {"username": body.username}

        @app.post("/api/auth/login")
        def login(body: RegisterBody):
            if not service.users.verify(body.username, body.password):
                raise HTTPException(status_code=401, detail="invalid credentials")
            token, expires = service.tokens.issue(body.username)
            return {"token": token, "expiresAt": expires}

        @app.post("/api/auth/logout")
        def logout(request: Request):
            service._auth_username(request)
            header = request.headers.get("authorization", "")
            service.tokens.revoke(header.removeprefix("Bearer ").strip())
            return {"ok": True}

        @app.get("/api/latest/image")
        def latest_image(device: str = Query(...)):
            record = service.store.latest("images", device)
            if record is None:
                raise HTTPException(status_code=404, detail="no image records for device")
            return record

        @app.get("/api/latest/counts")
        def latest_counts(device: str = Query(...)):
            record = service.store.latest("counts", device)
            if record is None:
                raise HTTPException(status_code=404, detail="no count records for device")
            return record

        @app.get("/api/fridgestats")
        def fridgestats(
            device: str = Query(...),
            from_: str = Query("1970-01-01T00:00:00+00:00", alias="from"),
            to: str = Query("9999-12-31T23:59:59+00:00"),
            limit: int = Query(1000, ge=1),
        ):
            try:
                records, truncated = service.store.query_range(
                    "fridgestats", device, from_, to, limit
                )
            except (ValueError, SchemaViolation) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return {"records": records, "truncated": truncated}

        @app.post("/api/settings")
        async def update_settings(body: SettingsBody, request: Request):
            service._auth_username(request)
            lo, hi = TEMP_TARGET_RANGE
            if not lo <= body.temperatureTarget <= hi:
                raise HTTPException(status_code=422, detail=f"temperatureTarget outside [{lo}, {hi}]")
            lo, hi = HUMIDITY_TARGET_RANGE
            if not lo <= body.humidityTarget <= hi:
                raise HTTPException(status_code=422, detail=f"humidityTarget outside [{lo}, {hi}]")
            settings = {
                "temperatureTarget": body.temperatureTarget,
                "humidityTarget": body.humidityTarget,
            }
            service._persist_settings(body.device, settings)
            published = False
            if service._publish is not None:
                await service._publish(
                    settings_topic(body.device), json.dumps(settings, sort_keys=True).encode()
                )
                published = True
            logger.info("settings for %s -> %s (published=%s)", body.device, settings, published)
            return {"device": body.device, **settings, "published": published}

        @app.get("/api/settings")
        def get_settings(device: str = Query(...)):
            settings = service.desired_settings.get(device)
            if settings is None:
                raise HTTPException(status_code=404, detail="no settings stored for device")
            return {"device": device, **settings}

        @app.get("/api/recipes")
        def recipes(device: str = Query(...)):
            record = service.store.latest("counts", device)
            counts = record["counts"] if record else {}
            return {
                "device": device,
                "counts": counts,
                "recipes": suggest_recipes(counts, service.catalog),
            }

        @app.get("/api/calibration/report")
        def calibration_report(model: Optional[str] = Query(None)):
            if service.config.reports_dir is None:
                raise HTTPException(status_code=404, detail="no experiment reports configured")
            summary_path = Path(service.config.reports_dir) / "summary.json"
            if not summary_path.exists():
                raise HTTPException(status_code=404, detail="summary.json not found")
            summary = json.loads(summary_path.read_text(encoding="utf-8"))
            if model is None:
                return summary
            if model not in summary.get("models", {}):
                raise HTTPException(status_code=404, detail=f"unknown model {model!r}")
            return summary["models"][model]

        @app.get("/api/devices")
        def devices():
            return {"devices": service.store.devices()}

        @app.get("/api/health")
        def health():
            return {
                "status": "ok",
                "collections": {
                    name: service.store.counts_for(name)
                    for name in ("images", "counts", "fridgestats")
                },
                "ingest": service.stats.as_dict(),
            }

        if self.config.static_dir and Path(self.config.static_dir).is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/", StaticFiles(directory=self.config.static_dir, html=True), name="dashboard")

        return app

    # ---------------- serving ----------------

    def bind_socket(self) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self.config.listen_host, self.config.listen_port))
        return sock

    async def serve_http(self, sock: socket.socket) -> None:
        import uvicorn

        config = uvicorn.Config(self.app, log_level="warning", access_log=False)
        server = uvicorn.Server(config)
        await server.serve(sockets=[sock])

    async def run(self) -> None:
        """Standalone backend: ingest (when a broker is configured) plus HTTP."""
        sock = self.bind_socket()
        logger.info("backend listening on %s:%d", *sock.getsockname())
        tasks = [asyncio.create_task(self.serve_http(sock))]
        if self.config.broker_host and self.config.broker_port:
            tasks.append(asyncio.create_task(self.run_ingest()))
        try:
            await asyncio.gather(*tasks)
        finally:
            for task in tasks:
                task.cancel()
            self.close()

    def close(self) -> None:
        self.store.close()
        self.users.close()

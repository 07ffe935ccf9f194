"""Simulated fridge device: inventory, thermal state, and per-minute telemetry.

Replaces the camera + sensor hardware. Each device keeps a ground-truth shelf
layout and first-order thermal/humidity state, and once per simulated minute
emits a detection event (classes re-predicted by the trained model, so
miscounts can happen just like a real detector) plus a sensor reading.
Everything is driven by one seeded generator: same config, same stream.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional

import numpy as np

from .calibration import Temperature, apply_temperature
from .client import PubSubClient
from .training.dataset import DatasetSpec
from .training.trainer import LinearLossClassifier

logger = logging.getLogger(__name__)

TEMP_TARGET_RANGE = (-10.0, 20.0)
HUMIDITY_TARGET_RANGE = (0.0, 100.0)

SIM_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def detections_topic(device_id: str) -> str:
    return f"fridge/{device_id}/detections"


def env_topic(device_id: str) -> str:
    return f"fridge/{device_id}/env"


def settings_topic(device_id: str) -> str:
    return f"fridge/{device_id}/settings"


def device_seed(base_seed: int, index: int) -> int:
    """Per-device seed derivation shared by the CLI and offline replays."""
    return base_seed * 1000 + index


@dataclass(frozen=True)
class ShelfItem:
    class_name: str
    bbox: tuple[float, float, float, float]  # x, y, w, h in the unit square


@dataclass(frozen=True)
class SensorReading:
    device_id: str
    timestamp: datetime
    temperature: float
    humidity: float
    temp_target: float
    humidity_target: float

    def to_wire(self) -> dict:
        return {
            "deviceId": self.device_id,
            "timestamp": self.timestamp.isoformat(),
            "temperature": self.temperature,
            "humidity": self.humidity,
            "setpoints": {
                "temperatureTarget": self.temp_target,
                "humidityTarget": self.humidity_target,
            },
        }


@dataclass(frozen=True)
class DetectionEvent:
    device_id: str
    timestamp: datetime
    items: tuple[dict, ...]  # className, confidence, bbox (predicted)
    counts: dict
    scene: tuple[dict, ...]  # ground-truth shelf layout

    def to_wire(self) -> dict:
        return {
            "deviceId": self.device_id,
            "timestamp": self.timestamp.isoformat(),
            "items": [dict(i) for i in self.items],
            "counts": dict(self.counts),
            "scene": [dict(s) for s in self.scene],
        }


@dataclass
class DeviceConfig:
    device_id: str
    seed: int = 0
    relax_per_min: float = 0.1
    temp_noise: float = 0.05
    humidity_noise: float = 0.2
    add_prob: float = 0.05
    remove_prob: float = 0.05
    temp_target: float = 4.0
    humidity_target: float = 85.0
    initial_temp: Optional[float] = None
    initial_humidity: Optional[float] = None
    max_initial_per_class: int = 3
    start_time: datetime = SIM_EPOCH


@dataclass
class _BoxPlacer:
    rng: np.random.Generator

    def place(self, existing: list[ShelfItem]) -> tuple[float, float, float, float]:
        # best effort: a few attempts to avoid overlap, then give up and stack
        for _ in range(8):
            w = float(self.rng.uniform(0.08, 0.18))
            h = float(self.rng.uniform(0.08, 0.18))
            x = float(self.rng.uniform(0.0, 1.0 - w))
            y = float(self.rng.uniform(0.0, 1.0 - h))
            box = (x, y, w, h)
            if not any(_overlaps(box, item.bbox) for item in existing):
                return box
        return box

    def size_only(self) -> tuple[float, float]:
        return float(self.rng.uniform(0.08, 0.18)), float(self.rng.uniform(0.08, 0.18))


def _overlaps(a, b) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


class DeviceSimulator:
    """Pure state machine for one device; tick() advances one simulated minute."""

    def __init__(
        self,
        config: DeviceConfig,
        model: LinearLossClassifier,
        spec: DatasetSpec,
        temperature: Optional[Temperature] = None,
    ):
        self.config = config
        self.model = model
        self.spec = spec
        self.temperature = temperature
        self.rng = np.random.default_rng(config.seed)
        self._placer = _BoxPlacer(self.rng)
        self.temp_c = config.initial_temp if config.initial_temp is not None else config.temp_target + 2.0
        self.humidity_pct = (
            config.initial_humidity if config.initial_humidity is not None else config.humidity_target - 5.0
        )
        self.temp_target = config.temp_target
        self.humidity_target = config.humidity_target
        self.sim_clock = config.start_time
        self.shelf: list[ShelfItem] = []
        for name in spec.class_names:
            for _ in range(int(self.rng.integers(0, config.max_initial_per_class + 1))):
                self.shelf.append(ShelfItem(name, self._placer.place(self.shelf)))

    @property
    def inventory(self) -> dict:
        counts: dict[str, int] = {}
        for item in self.shelf:
            counts[item.class_name] = counts.get(item.class_name, 0) + 1
        return counts

    def step_env(self, dt_minutes: float = 1.0) -> SensorReading:
        """First-order relaxation toward the setpoints plus Gaussian noise."""
        if not dt_minutes > 0:
            raise ValueError("dt must be > 0")
        k = self.config.relax_per_min
        self.temp_c += k * (self.temp_target - self.temp_c) * dt_minutes
        if self.config.temp_noise > 0:
            self.temp_c += self.config.temp_noise * float(self.rng.standard_normal())
        self.humidity_pct += k * (self.humidity_target - self.humidity_pct) * dt_minutes
        if self.config.humidity_noise > 0:
            self.humidity_pct += self.config.humidity_noise * float(self.rng.standard_normal())
        self.humidity_pct = min(max(self.humidity_pct, 0.0), 100.0)
        return SensorReading(
            device_id=self.config.device_id,
            timestamp=self.sim_clock,
            temperature=self.temp_c,
            humidity=self.humidity_pct,
            temp_target=self.temp_target,
            humidity_target=self.humidity_target,
        )

    def step_inventory(self) -> None:
        if self.rng.random() < self.config.add_prob:
            name = self.spec.class_names[int(self.rng.integers(0, len(self.spec.class_names)))]
            self.shelf.append(ShelfItem(name, self._placer.place(self.shelf)))
        if self.rng.random() < self.config.remove_prob and self.shelf:
            self.shelf.pop(int(self.rng.integers(0, len(self.shelf))))

    def emit_detection(self) -> DetectionEvent:
        """Run the model over noisy per-item features; counts follow the predictions."""
        name_to_index = {n: i for i, n in enumerate(self.spec.class_names)}
        for item in self.shelf:
            if item.class_name not in name_to_index:
                raise ValueError(f"shelf item class {item.class_name!r} unknown to the model")
        items: list[dict] = []
        counts: dict[str, int] = {}
        if self.shelf:
            means = self.spec.means_array
            noise = self.rng.standard_normal((len(self.shelf), self.spec.feature_dim))
            X = np.array([means[name_to_index[i.class_name]] for i in self.shelf])
            X = X + self.spec.noise_sigma * noise
            logits = self.model.decision_function(X)
            if self.temperature is not None:
                probs = apply_temperature(logits, self.temperature)
            else:
                probs = self.model._probs_from_logits(logits)
            predicted = probs.argmax(axis=1)
            confidence = probs.max(axis=1)
            for item, cls, conf in zip(self.shelf, predicted, confidence):
                name = self.spec.class_names[int(cls)]
                items.append(
                    {"className": name, "confidence": float(conf), "bbox": list(item.bbox)}
                )
                counts[name] = counts.get(name, 0) + 1
        scene = tuple(
            {"className": item.class_name, "bbox": list(item.bbox)} for item in self.shelf
        )
        return DetectionEvent(
            device_id=self.config.device_id,
            timestamp=self.sim_clock,
            items=tuple(items),
            counts=counts,
            scene=scene,
        )

    def apply_settings(self, settings: dict) -> bool:
        """Replace the setpoints; out-of-range or malformed payloads leave state unchanged."""
        try:
            temp = float(settings["temperatureTarget"])
            hum = float(settings["humidityTarget"])
        except (KeyError, TypeError, ValueError):
            return False
        if not TEMP_TARGET_RANGE[0] <= temp <= TEMP_TARGET_RANGE[1]:
            return False
        if not HUMIDITY_TARGET_RANGE[0] <= hum <= HUMIDITY_TARGET_RANGE[1]:
            return False
        self.temp_target = temp
        self.humidity_target = hum
        return True

    def tick(self) -> tuple[SensorReading, DetectionEvent]:
        """Advance one simulated minute: environment, inventory churn, detection."""
        self.sim_clock += timedelta(minutes=1)
        reading = self.step_env(1.0)
        self.step_inventory()
        event = self.emit_detection()
        return reading, event


class DeviceRuntime:
    """Connects one simulator to the broker and drives it at the configured pace."""

    def __init__(
        self,
        sim: DeviceSimulator,
        broker_host: str,
        broker_port: int,
        minutes: Optional[int] = None,
        accel: float = 1.0,
    ):
        self.sim = sim
        self.broker_host = broker_host
        self.broker_port = broker_port
        self.minutes = minutes
        self.accel = accel

    async def run(self) -> None:
        device_id = self.sim.config.device_id
        client = await PubSubClient.connect(self.broker_host, self.broker_port, device_id)
        await client.subscribe(settings_topic(device_id))
        logger.info("device %s online", device_id)
        minute = 0
        try:
            while self.minutes is None or minute < self.minutes:
                self._drain_settings(client)
                reading, event = self.sim.tick()
                await client.publish(
                    env_topic(device_id), json.dumps(reading.to_wire()).encode()
                )
                await client.publish(
                    detections_topic(device_id), json.dumps(event.to_wire()).encode()
                )
                minute += 1
                if self.accel > 0:
                    await asyncio.sleep(60.0 / self.accel)
        finally:
            await client.close()
            logger.info("device %s offline after %d minutes", device_id, minute)

    def _drain_settings(self, client: PubSubClient) -> None:
        while not client.messages.empty():
            topic, body = client.messages.get_nowait()
            try:
                settings = json.loads(body)
            except json.JSONDecodeError:
                logger.warning("device %s: unparseable settings message", self.sim.config.device_id)
                continue
            if self.sim.apply_settings(settings):
                logger.info("device %s: setpoints now %s", self.sim.config.device_id, settings)
            else:
                logger.warning("device %s: rejected settings %s", self.sim.config.device_id, settings)

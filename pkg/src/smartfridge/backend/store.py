"""Append-only JSONL persistence for the four telemetry/user collections.

One line-delimited JSON file per collection with an in-memory index rebuilt on
startup. A record is durable once its line is fully flushed; a torn trailing
line (no newline, or unparseable) is discarded on reload. Detection ingestion
writes the image line before its linked count line, and reload drops both
halves of an incomplete pair, so a count's image link always resolves.

This module intentionally avoids heavyweight imports: crash-recovery tests
respawn it often.
"""

from __future__ import annotations

import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

COLLECTIONS = ("images", "counts", "fridgestats")


class SchemaViolation(ValueError):
    pass


def parse_timestamp(value) -> datetime:
    if not isinstance(value, str):
        raise SchemaViolation(f"timestamp must be an ISO-8601 string, got {value!r}")
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise SchemaViolation(f"bad timestamp {value!r}") from exc


def _require(msg: dict, key: str, kind) -> object:
    if key not in msg:
        raise SchemaViolation(f"missing field {key!r}")
    value = msg[key]
    if not isinstance(value, kind):
        raise SchemaViolation(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _check_number(value, what: str, lo=None, hi=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"{what} must be a number")
    v = float(value)
    if not math.isfinite(v):
        raise SchemaViolation(f"{what} must be finite")
    if lo is not None and v < lo:
        raise SchemaViolation(f"{what} below {lo}")
    if hi is not None and v > hi:
        raise SchemaViolation(f"{what} above {hi}")
    return v


def _check_bbox(bbox, what: str) -> list[float]:
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise SchemaViolation(f"{what} must be [x, y, w, h]")
    x, y, w, h = (_check_number(v, what, lo=0.0, hi=1.0) for v in bbox)
    if x + w > 1.0 + 1e-9 or y + h > 1.0 + 1e-9:
        raise SchemaViolation(f"{what} leaves the unit square")
    return [x, y, w, h]


def validate_detection(msg: dict) -> dict:
    """Check a detections-topic body; returns the normalized message."""
    device_id = _require(msg, "deviceId", str)
    timestamp = _require(msg, "timestamp", str)
    parse_timestamp(timestamp)
    items = _require(msg, "items", list)
    norm_items = []
    grouped: dict[str, int] = {}
    for item in items:
        if not isinstance(item, dict):
            raise SchemaViolation("items entries must be objects")
        name = _require(item, "className", str)
        conf = _check_number(item.get("confidence"), "confidence")
        if not 0.0 < conf < 1.0:
            raise SchemaViolation(f"confidence {conf} outside (0, 1)")
        bbox = _check_bbox(item.get("bbox"), "item bbox")
        norm_items.append({"className": name, "confidence": conf, "bbox": bbox})
        grouped[name] = grouped.get(name, 0) + 1
    counts = _require(msg, "counts", dict)
    norm_counts = {}
    for name, qty in counts.items():
        if isinstance(qty, bool) or not isinstance(qty, int) or qty < 0:
            raise SchemaViolation(f"count for {name!r} must be a nonnegative integer")
        norm_counts[str(name)] = qty
    if norm_counts != grouped:
        raise SchemaViolation("counts do not match the grouped items")
    scene = _require(msg, "scene", list)
    norm_scene = []
    for entry in scene:
        if not isinstance(entry, dict):
            raise SchemaViolation("scene entries must be objects")
        norm_scene.append(
            {
                "className": _require(entry, "className", str),
                "bbox": _check_bbox(entry.get("bbox"), "scene bbox"),
            }
        )
    return {
        "deviceId": device_id,
        "timestamp": timestamp,
        "items": norm_items,
        "counts": norm_counts,
        "scene": norm_scene,
    }


def validate_env(msg: dict) -> dict:
    device_id = _require(msg, "deviceId", str)
    timestamp = _require(msg, "timestamp", str)
    parse_timestamp(timestamp)
    temperature = _check_number(msg.get("temperature"), "temperature")
    humidity = _check_number(msg.get("humidity"), "humidity", lo=0.0, hi=100.0)
    setpoints = _require(msg, "setpoints", dict)
    return {
        "deviceId": device_id,
        "timestamp": timestamp,
        "temperature": temperature,
        "humidity": humidity,
        "setpoints": {
            "temperatureTarget": _check_number(
                setpoints.get("temperatureTarget"), "temperatureTarget"
            ),
            "humidityTarget": _check_number(setpoints.get("humidityTarget"), "humidityTarget"),
        },
    }


class AppendLog:
    """One collection file: load-tolerant reader plus flushing line appender."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.records: list[dict] = []
        self._load()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self) -> None:
        if not self.path.exists():
            return
        raw = self.path.read_bytes()
        if not raw:
            return
        lines = raw.split(b"\n")
        torn_tail = lines.pop()  # empty when the file ends with a newline
        if torn_tail:
            # repair the log so the next append starts on a fresh line
            logger.warning("%s: truncating torn trailing line (%d bytes)", self.path, len(torn_tail))
            with open(self.path, "r+b") as fh:
                fh.truncate(len(raw) - len(torn_tail))
        for line in lines:
            if not line:
                continue
            try:
                self.records.append(json.loads(line.decode("utf-8")))
            except (json.JSONDecodeError, UnicodeDecodeError):
                logger.warning("%s: skipping unparseable line", self.path)

    def append(self, record: dict) -> None:
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


class Store:
    """In-memory index over the telemetry collections, backed by append logs."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._logs = {name: AppendLog(self.data_dir / f"{name}.jsonl") for name in COLLECTIONS}
        self._by_device: dict[str, dict[str, list[dict]]] = {name: {} for name in COLLECTIONS}
        self._seen: dict[str, set] = {name: set() for name in COLLECTIONS}
        self._recover()

    def _recover(self) -> None:
        images = {}
        for record in self._logs["images"].records:
            images.setdefault(record["id"], record)
        counts = []
        linked_images = set()
        dropped = 0
        for record in self._logs["counts"].records:
            if record.get("imageId") in images:
                counts.append(record)
                linked_images.add(record["imageId"])
            else:
                dropped += 1
        if dropped:
            logger.warning("dropped %d count records with unresolved image links", dropped)
        orphan_images = len(images) - len(linked_images)
        if orphan_images:
            logger.warning("dropped %d image records with no linked count", orphan_images)
        # replay in file order so per-device monotonicity is preserved
        for record in self._logs["images"].records:
            if images.get(record["id"]) is record and record["id"] in linked_images:
                self._index_tolerant("images", record)
        for record in counts:
            self._index_tolerant("counts", record)
        for record in self._logs["fridgestats"].records:
            self._index_tolerant("fridgestats", record)

    def _index_tolerant(self, collection: str, record: dict) -> None:
        try:
            self._index(collection, record)
        except (SchemaViolation, KeyError) as exc:
            logger.warning("%s: skipping unusable record during recovery: %s", collection, exc)

    def _index(self, collection: str, record: dict) -> bool:
        key = (record["deviceId"], record["timestamp"])
        if key in self._seen[collection]:
            return False
        per_device = self._by_device[collection].setdefault(record["deviceId"], [])
        if per_device and parse_timestamp(record["timestamp"]) < parse_timestamp(
            per_device[-1]["timestamp"]
        ):
            raise SchemaViolation(
                f"non-monotone timestamp for {record['deviceId']} in {collection}"
            )
        per_device.append(record)
        self._seen[collection].add(key)
        return True

    def ingest_detection(self, msg: dict) -> Optional[tuple[str, str]]:
        """Store one validated detection as a linked (image, count) pair.

        Returns None when the (device, timestamp) pair was already ingested.
        The image line hits the log first; recovery discards half-written pairs.
        """
        msg = validate_detection(msg)
        key = (msg["deviceId"], msg["timestamp"])
        if key in self._seen["images"] or key in self._seen["counts"]:
            return None
        image = {
            "id": f"img-{msg['deviceId']}-{msg['timestamp']}",
            "deviceId": msg["deviceId"],
            "timestamp": msg["timestamp"],
            "scene": msg["scene"],
            "items": msg["items"],
        }
        count = {
            "id": f"cnt-{msg['deviceId']}-{msg['timestamp']}",
            "deviceId": msg["deviceId"],
            "timestamp": msg["timestamp"],
            "counts": msg["counts"],
            "imageId": image["id"],
        }
        # validate monotonicity against both collections before touching disk
        self._peek_monotone("images", image)
        self._peek_monotone("counts", count)
        self._logs["images"].append(image)
        self._logs["counts"].append(count)
        self._index("images", image)
        self._index("counts", count)
        return image["id"], count["id"]

    def ingest_env(self, msg: dict) -> Optional[str]:
        msg = validate_env(msg)
        key = (msg["deviceId"], msg["timestamp"])
        if key in self._seen["fridgestats"]:
            return None
        record = {"id": f"stat-{msg['deviceId']}-{msg['timestamp']}", **msg}
        self._peek_monotone("fridgestats", record)
        self._logs["fridgestats"].append(record)
        self._index("fridgestats", record)
        return record["id"]

    def _peek_monotone(self, collection: str, record: dict) -> None:
        per_device = self._by_device[collection].get(record["deviceId"])
        if per_device and parse_timestamp(record["timestamp"]) < parse_timestamp(
            per_device[-1]["timestamp"]
        ):
            raise SchemaViolation(
                f"non-monotone timestamp for {record['deviceId']} in {collection}"
            )

    def latest(self, collection: str, device_id: str) -> Optional[dict]:
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection {collection!r}")
        per_device = self._by_device[collection].get(device_id)
        return per_device[-1] if per_device else None

    def query_range(
        self,
        collection: str,
        device_id: str,
        t_from: str,
        t_to: str,
        limit: int,
    ) -> tuple[list[dict], bool]:
        """Records with timestamp in [t_from, t_to], ascending, truncated at limit."""
        if collection not in COLLECTIONS:
            raise ValueError(f"unknown collection {collection!r}")
        start = parse_timestamp(t_from)
        end = parse_timestamp(t_to)
        if start > end:
            raise ValueError("range start is after its end")
        if limit < 1:
            raise ValueError("limit must be >= 1")
        matched = [
            r
            for r in self._by_device[collection].get(device_id, [])
            if start <= parse_timestamp(r["timestamp"]) <= end
        ]
        return matched[:limit], len(matched) > limit

    def counts_for(self, collection: str) -> int:
        return sum(len(v) for v in self._by_device[collection].values())

    def devices(self) -> list[str]:
        seen = set()
        for per_collection in self._by_device.values():
            seen.update(per_collection.keys())
        return sorted(seen)

    def close(self) -> None:
        for log in self._logs.values():
            log.close()

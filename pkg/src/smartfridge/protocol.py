"""Self-contained pub-sub wire protocol: framing, codec, topic matching.

Every frame is `u32 total_length (big-endian, excluding itself) + u8 kind +
kind-specific payload`. Strings carry a u16 big-endian length prefix. The
protocol is deliberately not MQTT-compatible on the wire; see protocol.md for
the normative layouts with worked hex examples.

QoS 0 only: no acknowledgments, no retained messages, no wildcards in publish
topics. Topic filters use '/' separated levels where '+' matches exactly one
level and a trailing '#' matches any remaining levels, including none.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterator, Union

KIND_CONNECT = 1
KIND_CONNACK = 2
KIND_SUBSCRIBE = 3
KIND_SUBACK = 4
KIND_PUBLISH = 5
KIND_PINGREQ = 6
KIND_PINGRESP = 7
KIND_DISCONNECT = 8

CONNACK_ACCEPTED = 0
CONNACK_DUPLICATE_CLIENT_ID = 1

MAX_STRING_BYTES = 65535
MAX_BODY_BYTES = 1 << 24
# kind byte + topic length prefix + max topic + max body
MAX_FRAME_BYTES = 1 + 2 + MAX_STRING_BYTES + MAX_BODY_BYTES

TRUNCATED = "TRUNCATED"
BAD_KIND = "BAD_KIND"
BAD_UTF8 = "BAD_UTF8"
LENGTH_MISMATCH = "LENGTH_MISMATCH"
BAD_TOPIC = "BAD_TOPIC"


class FrameError(ValueError):
    """Malformed frame; `code` is one of the structured decode error codes."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Connect:
    client_id: str
    kind = KIND_CONNECT


@dataclass(frozen=True)
class Connack:
    code: int
    kind = KIND_CONNACK


@dataclass(frozen=True)
class Subscribe:
    topic_filter: str
    kind = KIND_SUBSCRIBE


@dataclass(frozen=True)
class Suback:
    kind = KIND_SUBACK


@dataclass(frozen=True)
class Publish:
    topic: str
    body: bytes
    kind = KIND_PUBLISH


@dataclass(frozen=True)
class Pingreq:
    kind = KIND_PINGREQ


@dataclass(frozen=True)
class Pingresp:
    kind = KIND_PINGRESP


@dataclass(frozen=True)
class Disconnect:
    kind = KIND_DISCONNECT


Frame = Union[Connect, Connack, Subscribe, Suback, Publish, Pingreq, Pingresp, Disconnect]


def is_valid_topic(topic: str) -> bool:
    """Publish topics are plain UTF-8 level paths with no wildcard characters."""
    return len(topic) > 0 and "+" not in topic and "#" not in topic


def is_valid_filter(topic_filter: str) -> bool:
    """'+' and '#' only as whole levels; '#' only at the end."""
    if not topic_filter:
        return False
    levels = topic_filter.split("/")
    for i, level in enumerate(levels):
        if level == "#":
            if i != len(levels) - 1:
                return False
        elif level == "+":
            continue
        elif "+" in level or "#" in level:
            return False
    return True


@dataclass(frozen=True)
class TopicFilter:
    """A parsed subscription pattern."""

    levels: tuple[str, ...]
    raw: str = field(compare=False, default="")

    @classmethod
    def parse(cls, topic_filter: str) -> "TopicFilter":
        if not is_valid_filter(topic_filter):
            raise ValueError(f"invalid topic filter {topic_filter!r}")
        return cls(levels=tuple(topic_filter.split("/")), raw=topic_filter)

    def matches(self, topic: str) -> bool:
        parts = topic.split("/")
        for i, level in enumerate(self.levels):
            if level == "#":
                return True
            if i >= len(parts):
                return False
            if level == "+":
                continue
            if level != parts[i]:
                return False
        return len(parts) == len(self.levels)


def topic_matches(topic_filter: str, topic: str) -> bool:
    return TopicFilter.parse(topic_filter).matches(topic)


def _encode_string(s: str, what: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > MAX_STRING_BYTES:
        raise ValueError(f"{what} exceeds {MAX_STRING_BYTES} bytes")
    return struct.pack(">H", len(raw)) + raw


def encode_frame(frame: Frame) -> bytes:
    if isinstance(frame, Connect):
        payload = _encode_string(frame.client_id, "client id")
    elif isinstance(frame, Connack):
        if not 0 <= frame.code <= 255:
            raise ValueError(f"connack code {frame.code} out of range")
        payload = bytes([frame.code])
    elif isinstance(frame, Subscribe):
        if not is_valid_filter(frame.topic_filter):
            raise ValueError(f"invalid topic filter {frame.topic_filter!r}")
        payload = _encode_string(frame.topic_filter, "topic filter")
    elif isinstance(frame, Publish):
        if not is_valid_topic(frame.topic):
            raise ValueError(f"invalid publish topic {frame.topic!r}")
        if len(frame.body) > MAX_BODY_BYTES:
            raise ValueError(f"body exceeds {MAX_BODY_BYTES} bytes")
        payload = _encode_string(frame.topic, "topic") + bytes(frame.body)
    elif isinstance(frame, (Suback, Pingreq, Pingresp, Disconnect)):
        payload = b""
    else:
        raise TypeError(f"not a frame: {frame!r}")
    return struct.pack(">I", 1 + len(payload)) + bytes([frame.kind]) + payload


def _read_string(payload: bytes, offset: int, what: str) -> tuple[str, int]:
    if len(payload) < offset + 2:
        raise FrameError(LENGTH_MISMATCH, f"{what} length prefix missing")
    (length,) = struct.unpack_from(">H", payload, offset)
    end = offset + 2 + length
    if len(payload) < end:
        raise FrameError(LENGTH_MISMATCH, f"{what} overruns the frame")
    try:
        text = payload[offset + 2 : end].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FrameError(BAD_UTF8, f"{what} is not valid UTF-8") from exc
    return text, end


def _parse_payload(kind: int, payload: bytes) -> Frame:
    if kind == KIND_CONNECT:
        client_id, end = _read_string(payload, 0, "client id")
        if end != len(payload):
            raise FrameError(LENGTH_MISMATCH, "trailing bytes after client id")
        return Connect(client_id)
    if kind == KIND_CONNACK:
        if len(payload) != 1:
            raise FrameError(LENGTH_MISMATCH, "connack payload must be one code byte")
        return Connack(payload[0])
    if kind == KIND_SUBSCRIBE:
        topic_filter, end = _read_string(payload, 0, "topic filter")
        if end != len(payload):
            raise FrameError(LENGTH_MISMATCH, "trailing bytes after topic filter")
        if not is_valid_filter(topic_filter):
            raise FrameError(BAD_TOPIC, f"invalid topic filter {topic_filter!r}")
        return Subscribe(topic_filter)
    if kind == KIND_PUBLISH:
        topic, end = _read_string(payload, 0, "topic")
        if not is_valid_topic(topic):
            raise FrameError(BAD_TOPIC, f"invalid publish topic {topic!r}")
        return Publish(topic, payload[end:])
    if kind in (KIND_SUBACK, KIND_PINGREQ, KIND_PINGRESP, KIND_DISCONNECT):
        if payload:
            raise FrameError(LENGTH_MISMATCH, "frame kind carries no payload")
        return {
            KIND_SUBACK: Suback,
            KIND_PINGREQ: Pingreq,
            KIND_PINGRESP: Pingresp,
            KIND_DISCONNECT: Disconnect,
        }[kind]()
    raise FrameError(BAD_KIND, f"unknown frame kind {kind}")


def _read_header(data: bytes) -> int:
    """Validate the declared length; the caller guarantees len(data) >= 4."""
    (declared,) = struct.unpack_from(">I", data, 0)
    if declared < 1:
        raise FrameError(LENGTH_MISMATCH, "declared length smaller than the kind byte")
    if declared > MAX_FRAME_BYTES:
        raise FrameError(LENGTH_MISMATCH, f"declared length {declared} exceeds the frame limit")
    return declared


def decode_frame(data: bytes) -> Frame:
    """Decode exactly one frame; any prefix of a valid encoding is TRUNCATED."""
    if len(data) < 4:
        raise FrameError(TRUNCATED, "incomplete length prefix")
    declared = _read_header(data)
    if len(data) < 4 + declared:
        raise FrameError(TRUNCATED, f"need {4 + declared} bytes, have {len(data)}")
    if len(data) > 4 + declared:
        raise FrameError(LENGTH_MISMATCH, "trailing bytes after the declared frame")
    return _parse_payload(data[4], data[5 : 4 + declared])


class FrameDecoder:
    """Incremental decoder for a byte stream; buffers partial frames."""

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, data: bytes) -> None:
        self._buffer.extend(data)

    def pending(self) -> int:
        return len(self._buffer)

    def frames(self) -> Iterator[Frame]:
        """Yield every complete frame currently buffered; raises FrameError on garbage."""
        while True:
            if len(self._buffer) < 4:
                return
            declared = _read_header(bytes(self._buffer[:4]))
            total = 4 + declared
            if len(self._buffer) < total:
                return
            frame = _parse_payload(self._buffer[4], bytes(self._buffer[5:total]))
            del self._buffer[:total]
            yield frame

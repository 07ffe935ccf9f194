"""Asyncio pub-sub client used by devices and the backend ingester."""

from __future__ import annotations

import asyncio
import logging
from typing import Optional

from .protocol import (
    CONNACK_ACCEPTED,
    Connack,
    Connect,
    Disconnect,
    FrameDecoder,
    Pingreq,
    Pingresp,
    Publish,
    Suback,
    Subscribe,
    encode_frame,
)

logger = logging.getLogger(__name__)


class ConnectionRefused(ConnectionError):
    pass


class PubSubClient:
    """One broker connection: publish, subscribe, and an inbound message queue."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter, client_id: str):
        self._reader = reader
        self._writer = writer
        self.client_id = client_id
        self.messages: asyncio.Queue[tuple[str, bytes]] = asyncio.Queue()
        self._subacks: asyncio.Queue[Suback] = asyncio.Queue()
        self._reader_task: Optional[asyncio.Task] = None
        self._pinger_task: Optional[asyncio.Task] = None
        self._closed = asyncio.Event()

    @classmethod
    async def connect(
        cls, host: str, port: int, client_id: str, ping_interval: float = 20.0
    ) -> "PubSubClient":
        reader, writer = await asyncio.open_connection(host, port)
        writer.write(encode_frame(Connect(client_id)))
        await writer.drain()
        decoder = FrameDecoder()
        while True:
            data = await reader.read(4096)
            if not data:
                raise ConnectionRefused(f"broker closed the connection to {client_id!r}")
            decoder.feed(data)
            frames = list(decoder.frames())
            if frames:
                ack = frames[0]
                break
        if not isinstance(ack, Connack) or ack.code != CONNACK_ACCEPTED:
            writer.close()
            raise ConnectionRefused(f"broker refused client id {client_id!r} ({ack!r})")
        client = cls(reader, writer, client_id)
        client._reader_task = asyncio.create_task(client._read_loop(decoder, frames[1:]))
        if ping_interval > 0:
            client._pinger_task = asyncio.create_task(client._ping_loop(ping_interval))
        return client

    async def _read_loop(self, decoder: FrameDecoder, backlog) -> None:
        try:
            pending = list(backlog)
            while True:
                for frame in pending:
                    if isinstance(frame, Publish):
                        self.messages.put_nowait((frame.topic, frame.body))
                    elif isinstance(frame, Suback):
                        self._subacks.put_nowait(frame)
                    elif isinstance(frame, Pingresp):
                        pass
                    else:
                        logger.warning("unexpected frame from broker: %r", frame)
                pending = []
                data = await self._reader.read(65536)
                if not data:
                    break
                decoder.feed(data)
                pending = list(decoder.frames())
        except (ConnectionError, asyncio.CancelledError):
            pass
        finally:
            self._closed.set()

    async def _ping_loop(self, interval: float) -> None:
        try:
            while True:
                await asyncio.sleep(interval)
                self._writer.write(encode_frame(Pingreq()))
                await self._writer.drain()
        except (ConnectionError, asyncio.CancelledError):
            pass

    async def subscribe(self, topic_filter: str, timeout: float = 5.0) -> None:
        self._writer.write(encode_frame(Subscribe(topic_filter)))
        await self._writer.drain()
        await asyncio.wait_for(self._subacks.get(), timeout=timeout)

    async def publish(self, topic: str, body: bytes) -> None:
        self._writer.write(encode_frame(Publish(topic, body)))
        await self._writer.drain()

    async def get_message(self, timeout: Optional[float] = None) -> tuple[str, bytes]:
        if timeout is None:
            return await self.messages.get()
        return await asyncio.wait_for(self.messages.get(), timeout=timeout)

    @property
    def is_closed(self) -> bool:
        return self._closed.is_set()

    async def close(self) -> None:
        for task in (self._pinger_task, self._reader_task):
            if task is not None:
                task.cancel()
        try:
            self._writer.write(encode_frame(Disconnect()))
            await self._writer.drain()
        except ConnectionError:
            pass
        self._writer.close()
        try:
            await self._writer.wait_closed()
        except ConnectionError:
            pass

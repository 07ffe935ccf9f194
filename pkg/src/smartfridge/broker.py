"""Central pub-sub hub.

`BrokerCore` owns the session registry and the routing decisions and is a
plain synchronous object, so every delivery rule is unit-testable without
sockets. `BrokerServer` wraps it in an asyncio TCP server: one reader task per
connection, one writer task per session draining a bounded drop-oldest queue,
so a slow subscriber can never stall routing. All registry mutations happen
synchronously on the event loop thread, which makes them linearizable.
"""

from __future__ import annotations

import asyncio
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .protocol import (
    CONNACK_ACCEPTED,
    CONNACK_DUPLICATE_CLIENT_ID,
    Connack,
    Connect,
    Disconnect,
    Frame,
    FrameDecoder,
    FrameError,
    Pingreq,
    Pingresp,
    Publish,
    Suback,
    Subscribe,
    TopicFilter,
    encode_frame,
)

logger = logging.getLogger(__name__)

DEFAULT_QUEUE_CAPACITY = 1024
DEFAULT_KEEPALIVE_SECONDS = 60.0


class _DropOldestQueue:
    """Bounded FIFO; a full queue drops its oldest entry instead of blocking."""

    def __init__(self, capacity: int):
        self._capacity = capacity
        self._items: deque = deque()
        self._ready = asyncio.Event()
        self.dropped = 0

    def put(self, item) -> bool:
        dropped = False
        if len(self._items) >= self._capacity:
            self._items.popleft()
            self.dropped += 1
            dropped = True
        self._items.append(item)
        self._ready.set()
        return dropped

    async def get(self):
        while not self._items:
            self._ready.clear()
            await self._ready.wait()
        return self._items.popleft()

    def __len__(self) -> int:
        return len(self._items)


@dataclass
class Session:
    client_id: str
    queue: _DropOldestQueue
    filters: list[TopicFilter] = field(default_factory=list)

    @property
    def drop_count(self) -> int:
        return self.queue.dropped


class ProtocolViolation(Exception):
    pass


class BrokerCore:
    """Session registry and routing rules, independent of any transport."""

    def __init__(self, queue_capacity: int = DEFAULT_QUEUE_CAPACITY):
        self._queue_capacity = queue_capacity
        self._sessions: dict[str, Session] = {}

    @property
    def sessions(self) -> dict[str, Session]:
        return self._sessions

    def connect(self, client_id: str) -> Optional[Session]:
        """Register a session; None means the client id is already live."""
        if client_id in self._sessions:
            return None
        session = Session(client_id=client_id, queue=_DropOldestQueue(self._queue_capacity))
        self._sessions[client_id] = session
        return session

    def disconnect(self, session: Session) -> None:
        existing = self._sessions.get(session.client_id)
        if existing is session:
            del self._sessions[session.client_id]

    def subscribe(self, session: Session, topic_filter: str) -> None:
        parsed = TopicFilter.parse(topic_filter)
        if parsed not in session.filters:
            session.filters.append(parsed)

    def route_publish(self, topic: str, body: bytes) -> list[Session]:
        """Sessions holding at least one matching filter, each listed once."""
        return [
            s for s in self._sessions.values() if any(f.matches(topic) for f in s.filters)
        ]

    def handle_frame(self, session: Optional[Session], frame: Frame):
        """Apply one inbound frame; returns (session, [(target_session, reply_frame)]).

        Raises ProtocolViolation when the connection must be closed. A CONNECT
        on a fresh connection creates the session; a duplicate client id yields
        a refusal CONNACK with no session.
        """
        if session is None:
            if not isinstance(frame, Connect):
                raise ProtocolViolation("first frame must be CONNECT")
            new_session = self.connect(frame.client_id)
            if new_session is None:
                logger.info("connect refused client_id=%s reason=duplicate", frame.client_id)
                return None, [(None, Connack(CONNACK_DUPLICATE_CLIENT_ID))]
            logger.info("connect client_id=%s", frame.client_id)
            return new_session, [(new_session, Connack(CONNACK_ACCEPTED))]

        if isinstance(frame, Connect):
            raise ProtocolViolation("duplicate CONNECT on a live session")
        if isinstance(frame, Subscribe):
            try:
                self.subscribe(session, frame.topic_filter)
            except ValueError as exc:
                raise ProtocolViolation(str(exc)) from exc
            return session, [(session, Suback())]
        if isinstance(frame, Publish):
            targets = self.route_publish(frame.topic, frame.body)
            return session, [(t, frame) for t in targets]
        if isinstance(frame, Pingreq):
            return session, [(session, Pingresp())]
        if isinstance(frame, Disconnect):
            raise _CleanDisconnect()
        # CONNACK/SUBACK/PINGRESP are server-to-client only
        raise ProtocolViolation(f"client may not send {type(frame).__name__}")


class _CleanDisconnect(Exception):
    pass


class BrokerServer:
    def __init__(
        self,
        host: str = "0.0.0.0",
        port: int = 1884,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
        keepalive: float = DEFAULT_KEEPALIVE_SECONDS,
    ):
        self.core = BrokerCore(queue_capacity)
        self._host = host
        self._port = port
        self._keepalive = keepalive
        self._server: Optional[asyncio.AbstractServer] = None

    @property
    def port(self) -> int:
        assert self._server is not None, "broker not started"
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle_connection, self._host, self._port)
        logger.info("broker listening on %s:%d", self._host, self.port)

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _handle_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        session: Optional[Session] = None
        writer_task: Optional[asyncio.Task] = None
        decoder = FrameDecoder()
        try:
            while True:
                try:
                    data = await asyncio.wait_for(reader.read(65536), timeout=self._keepalive)
                except asyncio.TimeoutError:
                    logger.info(
                        "keepalive expired client_id=%s",
                        session.client_id if session else "<unconnected>",
                    )
                    return
                if not data:
                    return
                decoder.feed(data)
                for frame in decoder.frames():
                    session, replies = self.core.handle_frame(session, frame)
                    for target, reply in replies:
                        if target is None:
                            # pre-session refusal: write directly, then close
                            writer.write(encode_frame(reply))
                            await writer.drain()
                            return
                        if target.queue.put(encode_frame(reply)):
                            logger.warning(
                                "queue full, dropped oldest client_id=%s drop_count=%d",
                                target.client_id,
                                target.drop_count,
                            )
                    if session is not None and writer_task is None:
                        writer_task = asyncio.create_task(self._drain(session, writer))
        except (FrameError, ProtocolViolation) as exc:
            logger.info(
                "closing client_id=%s reason=%s",
                session.client_id if session else "<unconnected>",
                exc,
            )
        except _CleanDisconnect:
            pass
        except ConnectionError:
            pass
        finally:
            if session is not None:
                self.core.disconnect(session)
                logger.info("disconnect client_id=%s", session.client_id)
            if writer_task is not None:
                writer_task.cancel()
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, asyncio.CancelledError):
                pass

    async def _drain(self, session: Session, writer: asyncio.StreamWriter) -> None:
        try:
            while True:
                payload = await session.queue.get()
                writer.write(payload)
                await writer.drain()
        except (ConnectionError, asyncio.CancelledError):
            pass

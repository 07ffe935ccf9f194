"""User accounts and login tokens.

Passwords are stored as salted PBKDF2-SHA256 hashes, never in plaintext.
Tokens are opaque random 128-bit values held in a server-side table with an
expiry; restarting the backend invalidates all sessions.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import secrets
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

PBKDF2_ITERATIONS = 100_000
MIN_PASSWORD_LENGTH = 8
DEFAULT_TOKEN_TTL_SECONDS = 24 * 3600

# burned whenever a login names an unknown user, so the hash check always runs
_DUMMY_SALT = "00" * 16
_DUMMY_HASH = "00" * 32


class DuplicateUser(ValueError):
    pass


class InvalidCredentials(ValueError):
    pass


def _hash_password(password: str, salt_hex: str) -> str:
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), PBKDF2_ITERATIONS
    )
    return digest.hex()


class UserStore:
    def __init__(self, path):
        self.path = Path(path)
        self._users: dict[str, dict] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    self._users.setdefault(record["username"], record)
                except (json.JSONDecodeError, KeyError):
                    logger.warning("%s: skipping unparseable user line", self.path)
        self._fh = open(self.path, "a", encoding="utf-8")

    def register(self, username: str, password: str) -> None:
        if not username:
            raise ValueError("username must be nonempty")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise ValueError(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        if username in self._users:
            raise DuplicateUser(username)
        salt = secrets.token_hex(16)
        record = {
            "username": username,
            "salt": salt,
            "hash": _hash_password(password, salt),
            "createdAt": datetime.now(timezone.utc).isoformat(),
        }
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()
        self._users[username] = record

    def verify(self, username: str, password: str) -> bool:
        record = self._users.get(username)
        salt = record["salt"] if record else _DUMMY_SALT
        expected = record["hash"] if record else _DUMMY_HASH
        computed = _hash_password(password, salt)
        return hmac.compare_digest(computed, expected) and record is not None

    def __contains__(self, username: str) -> bool:
        return username in self._users

    def close(self) -> None:
        self._fh.close()


class TokenTable:
    def __init__(self, ttl_seconds: float = DEFAULT_TOKEN_TTL_SECONDS):
        self.ttl_seconds = ttl_seconds
        self._tokens: dict[str, tuple[str, float]] = {}

    def issue(self, username: str) -> tuple[str, float]:
        token = secrets.token_hex(16)
        expires = time.time() + self.ttl_seconds
        self._tokens[token] = (username, expires)
        return token, expires

    def validate(self, token: Optional[str]) -> Optional[str]:
        if not token:
            return None
        entry = self._tokens.get(token)
        if entry is None:
            return None
        username, expires = entry
        if time.time() >= expires:
            del self._tokens[token]
            return None
        return username

    def revoke(self, token: str) -> None:
        self._tokens.pop(token, None)

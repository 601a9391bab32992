"""Chat-completion clients used by constraint extraction.

Every client answers ``send(prompt) -> completion``. The live client talks to
an OpenAI-compatible endpoint; the replay client serves recorded exchanges
so the whole pipeline runs offline and deterministically.
"""

import hashlib
import os
import threading
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Union

import httpx
from dotenv import load_dotenv

from .configs import ExtractionConfig
from .errors import ClientError, ConfigError
from .logger import logger
from .models import ReplayRecord

API_KEY_VARIABLE = "CDI_LLM_API_KEY"


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class LlmClient(ABC):
    max_tokens: int = 8192

    @abstractmethod
    def send(self, prompt: str) -> str:
        """Return the completion for ``prompt``"""


class MockClient(LlmClient):
    """Answers every prompt with the same text"""

    def __init__(self, response: str = "", max_tokens: int = 8192):
        self.response = response
        self.max_tokens = max_tokens
        self.prompts: List[str] = []

    def send(self, prompt: str) -> str:
        self.prompts.append(prompt)
        return self.response


def read_replay_file(path: Union[str, Path]) -> List[ReplayRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(ReplayRecord.model_validate_json(line))
            except ValueError as e:
                raise ClientError(f"Malformed replay record on line {number} of {path}: {e}")
    return records


class ReplayClient(LlmClient):
    """
    Serves completions recorded in a JSONL file.

    Records are matched by the SHA-256 of the prompt. A record with an empty
    hash matches any prompt containing its ``prompt`` text; such records are
    tried in file order after exact hashes.
    """

    def __init__(self, path: Union[str, Path], max_tokens: int = 8192):
        self.path = Path(path)
        self.max_tokens = max_tokens
        self.records = read_replay_file(self.path)
        self.by_hash = {r.prompt_hash: r for r in self.records if r.prompt_hash}

    def send(self, prompt: str) -> str:
        record = self.by_hash.get(prompt_hash(prompt))
        if record is None:
            record = next(
                (r for r in self.records if not r.prompt_hash and r.prompt and r.prompt in prompt),
                None,
            )
        if record is None:
            raise ClientError(f"No recorded completion for prompt {prompt_hash(prompt)[:12]} in {self.path}", status=404)
        return record.completion


class RecordingClient(LlmClient):
    """Forwards to another client and appends every exchange to a replay file"""

    def __init__(self, inner: LlmClient, path: Union[str, Path]):
        self.inner = inner
        self.path = Path(path)
        self.max_tokens = inner.max_tokens
        self._lock = threading.Lock()

    def send(self, prompt: str) -> str:
        completion = self.inner.send(prompt)
        record = ReplayRecord(prompt_hash=prompt_hash(prompt), prompt=prompt, completion=completion)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(record.model_dump_json() + "\n")
        return completion


class HttpChatClient(LlmClient):
    """OpenAI-compatible chat-completions client.

    Sends are serialized per instance and spaced at least ``min_interval``
    seconds apart.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str,
        max_tokens: int = 8192,
        timeout: float = 60.0,
        min_interval: float = 0.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.max_tokens = max_tokens
        self.min_interval = min_interval
        self._client = httpx.Client(
            timeout=timeout,
            headers={"Authorization": f"Bearer {api_key}"},
            transport=transport,
        )
        self._lock = threading.Lock()
        self._last_sent = 0.0

    def send(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        with self._lock:
            wait = self.min_interval - (time.monotonic() - self._last_sent)
            if wait > 0:
                time.sleep(wait)
            try:
                response = self._client.post(f"{self.endpoint}/chat/completions", json=body)
            except httpx.TimeoutException as e:
                raise ClientError(f"Request to {self.endpoint} timed out: {e}")
            except httpx.HTTPError as e:
                raise ClientError(f"Request to {self.endpoint} failed: {e}")
            finally:
                self._last_sent = time.monotonic()

        if response.status_code != 200:
            retry_after = response.headers.get("Retry-After")
            raise ClientError(
                f"Completion request failed with status {response.status_code}",
                status=response.status_code,
                retry_after=float(retry_after) if retry_after and retry_after.isdigit() else None,
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError) as e:
            raise ClientError(f"Unexpected completion payload: {e}", status=response.status_code)


def build_client(cfg: ExtractionConfig) -> LlmClient:
    """
    Build the client named by ``cfg.client``, wrapped for recording when
    ``cfg.record_path`` is set.

    Raises:
        ConfigError: If the replay file or the API key is missing
    """
    if cfg.client == "mock":
        client: LlmClient = MockClient(cfg.mock_response, cfg.max_tokens)
    elif cfg.client == "replay":
        if not cfg.replay_path:
            raise ConfigError("extraction.replay_path is required for the replay client")
        if not Path(cfg.replay_path).exists():
            raise ConfigError(f"Replay file not found: {cfg.replay_path}")
        client = ReplayClient(cfg.replay_path, cfg.max_tokens)
    else:
        load_dotenv()
        api_key = os.environ.get(API_KEY_VARIABLE)
        if not api_key:
            raise ConfigError(f"{API_KEY_VARIABLE} is not set")
        client = HttpChatClient(
            cfg.endpoint,
            cfg.model,
            api_key,
            max_tokens=cfg.max_tokens,
            timeout=cfg.timeout,
            min_interval=cfg.min_interval,
        )
        logger.info(f"Using live completions from {cfg.endpoint} ({cfg.model})")

    if cfg.record_path:
        client = RecordingClient(client, cfg.record_path)
    return client

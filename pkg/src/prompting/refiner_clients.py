from abc import ABC, abstractmethod
from typing import Dict, Mapping, Optional
import logging
import os
import requests

from ..models.prompt import RefinementSource
from ..utils.error_handler import RefinerClientError

ENDPOINT_ENV = 'VIDEOMERGE_LLM_ENDPOINT'
KEY_ENV = 'VIDEOMERGE_LLM_KEY'

# Appended by the stub when a request has no fixture
STUB_ATTRIBUTES = (
    "hair color: dark brown",
    "age: around thirty",
    "clothing: a navy blue jacket",
    "appearance: calm expression, soft daylight",
)


class RefinerClient(ABC):
    """Text-in/text-out completion service"""

    source = RefinementSource.REMOTE

    def __init__(self, timeout: float = 30.0, endpoint: str = ''):
        self.timeout = timeout
        self.endpoint = endpoint

    @abstractmethod
    def complete(self, request: str, prompt: str = '') -> str:
        """Return the response text; raise RefinerClientError on any failure"""
        ...


class RemoteRefinerClient(RefinerClient):
    """JSON-over-HTTP completion endpoint"""

    def __init__(self,
                 endpoint: str,
                 api_key: Optional[str] = None,
                 model: str = 'gpt-4o-mini',
                 max_output_tokens: int = 256,
                 timeout: float = 30.0):
        super().__init__(timeout=timeout, endpoint=endpoint)
        self.logger = logging.getLogger('RemoteRefinerClient')
        self.api_key = api_key
        self.model = model
        self.max_output_tokens = max_output_tokens

    @classmethod
    def from_env(cls, **kwargs) -> Optional['RemoteRefinerClient']:
        """Client for VIDEOMERGE_LLM_ENDPOINT, or None when it is unset"""
        endpoint = os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            return None
        return cls(endpoint, api_key=os.environ.get(KEY_ENV), **kwargs)

    def payload(self, request: str) -> Dict[str, object]:
        return {'model': self.model, 'input': request, 'max_output_tokens': self.max_output_tokens}

    def complete(self, request, prompt=''):
        headers = {'Content-Type': 'application/json'}
        if self.api_key:
            headers['Authorization'] = f"Bearer {self.api_key}"
        try:
            response = requests.post(self.endpoint, json=self.payload(request),
                                     headers=headers, timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
        except requests.RequestException as e:
            raise RefinerClientError(f"Request to {self.endpoint} failed: {str(e)}") from e
        except ValueError as e:
            raise RefinerClientError(f"Response from {self.endpoint} is not JSON") from e

        text = (body.get('output_text') or body.get('output')) if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            raise RefinerClientError(f"Response from {self.endpoint} has no output text")
        return text.strip()


class StubRefinerClient(RefinerClient):
    """Offline client answering from a fixture table"""

    source = RefinementSource.STUB

    def __init__(self, fixtures: Optional[Mapping[str, str]] = None):
        super().__init__(timeout=0.0, endpoint='stub')
        self.fixtures = dict(fixtures or {})

    def complete(self, request, prompt=''):
        if prompt in self.fixtures:
            return self.fixtures[prompt]
        return f"{prompt.rstrip('.').strip()}, {', '.join(STUB_ATTRIBUTES)}"


def stub_client(fixtures: Optional[Mapping[str, str]] = None) -> StubRefinerClient:
    """Deterministic offline client: fixture hits verbatim, misses templated"""
    return StubRefinerClient(fixtures)

"""Run configuration for the bridge commands.

Credentials are referenced by the name of an environment variable and read
from the process environment at request time. The secret value itself is
never stored on the config, so nothing derived from a config (logs, run
metadata, output artifacts) can contain it.
"""

from dataclasses import asdict, dataclass

DEFAULT_KEY_ENV = "BRIDGE_API_KEY"


@dataclass(frozen=True)
class BridgeConfig:
    """Everything a bridge run needs besides the input and output paths."""

    encoder_model: str = ""
    endpoint: str = ""
    api_key_env: str = DEFAULT_KEY_ENV
    generation_model: str = "gpt-3.5-turbo"
    temperature: float = 0.7
    fixture_path: str = ""
    description_count: int = 2
    batch_size: int = 8
    max_retries: int = 3
    backoff: float = 0.5
    requests_per_second: float = 0.0
    timeout: float = 30.0

    def __post_init__(self):
        if self.description_count not in (1, 2, 3):
            raise ValueError(
                "description count must be 1, 2 or 3, got {!r}".format(
                    self.description_count
                )
            )
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.max_retries < 0:
            raise ValueError("max retries must be non-negative")
        if self.backoff < 0:
            raise ValueError("backoff must be non-negative")
        if self.requests_per_second < 0:
            raise ValueError("requests per second must be non-negative")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if not self.api_key_env:
            raise ValueError("the credential variable name must be non-empty")

    def to_dict(self):
        """Plain dict of the config. Contains the credential variable name,
        never its value."""
        return asdict(self)

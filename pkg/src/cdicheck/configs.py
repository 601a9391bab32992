from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

from omegaconf import OmegaConf, errors
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .logger import logger


class FclConfig(BaseModel):
    """Weights and thresholds of the fuzzy constraint logic.

    ``beta`` weighs operator similarity; the parameter-name and value
    components share the rest equally, so ``2 * alpha + beta == 1``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    beta: float = Field(default=1 / 3, ge=0.0, le=1.0)
    tau: float = 0.5
    anchor_threshold: float = Field(default=0.5, ge=0.0, le=1.0)

    @field_validator("tau")
    def tau_in_open_interval(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("tau must lie strictly between 0 and 1")
        return v

    @property
    def alpha(self) -> float:
        return (1.0 - self.beta) / 2


class CheckerSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fuzzy_enabled: bool = True
    relevance_filter: bool = True
    max_paths: int = Field(default=256, ge=1)
    workers: int = Field(default=1, ge=1)


class CheckConfig(CheckerSection):
    fcl: FclConfig = FclConfig()


class ExtractionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    client: Literal["live", "replay", "mock"] = "replay"
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    replay_path: Optional[str] = None
    record_path: Optional[str] = None
    mock_response: str = ""
    max_tokens: int = Field(default=8192, ge=1)
    max_words: int = Field(default=1500, ge=1)
    min_interval: float = Field(default=0.0, ge=0.0)
    timeout: float = Field(default=60.0, gt=0.0)
    chain_of_thought: bool = True
    few_shot: bool = True


class ReportConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    format: Literal["json", "markdown"] = "json"


class ToolConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fcl: FclConfig = FclConfig()
    checker: CheckerSection = CheckerSection()
    extraction: ExtractionConfig = ExtractionConfig()
    report: ReportConfig = ReportConfig()

    def check_config(self) -> CheckConfig:
        return CheckConfig(fcl=self.fcl, **self.checker.model_dump())


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Sequence[str] = (),
) -> ToolConfig:
    """
    Build the tool configuration from defaults, a YAML file and overrides.

    Precedence is defaults < file < overrides. Overrides use OmegaConf
    dotlist syntax, e.g. ``fcl.tau=0.6``.

    Args:
        config_path: Optional path to a YAML configuration file
        overrides: Dotlist overrides, usually collected from CLI flags

    Returns:
        The validated ToolConfig

    Raises:
        ConfigError: If the file is missing, empty, unparseable or invalid
    """
    try:
        layers = [OmegaConf.create(ToolConfig().model_dump(mode="json"))]

        if config_path is not None:
            config_path = Path(config_path)
            logger.info(f"Reading config file: {config_path}")
            if not config_path.exists():
                raise ConfigError(f"Configuration file not found: {config_path}")
            file_config = OmegaConf.load(config_path)
            if file_config is None or len(file_config) == 0:
                raise ConfigError("Configuration file is empty")
            layers.append(file_config)

        if overrides:
            layers.append(OmegaConf.from_dotlist(list(overrides)))

        merged: Dict[str, Any] = OmegaConf.to_container(
            OmegaConf.merge(*layers), resolve=True
        )
        return ToolConfig.model_validate(merged)

    except errors.OmegaConfBaseException as e:
        raise ConfigError(f"Error parsing configuration file: {str(e)}")
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {str(e)}")


def flag_overrides(**flags: Any) -> List[str]:
    """Translate CLI flag values into dotlist overrides, skipping unset flags.

    Keys are dotted config paths with ``__`` standing in for the dot, e.g.
    ``fcl__tau=0.6`` becomes ``fcl.tau=0.6``.
    """
    overrides = []
    for key, value in flags.items():
        if value is None:
            continue
        if isinstance(value, bool):
            value = str(value).lower()
        overrides.append(f"{key.replace('__', '.')}={value}")
    return overrides

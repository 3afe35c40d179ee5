"""
Configuration Loader

Loads pipeline configurations from YAML files and applies CLI overrides with
priority: dedicated flags > --override > YAML > built-in defaults.
Also parses the key-value policy and count formats used on the command line.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import ValidationError

from config.pipeline_schema import PipelineConfig
from core.errors import ConfigLoadError, ConfigOverrideError, PolicyError, ToolkitIOError
from models.manifest import LanguageTag


def _format_validation_error(prefix: str, e: ValidationError) -> str:
    error_messages = []
    for error in e.errors():
        loc = ".".join(str(x) for x in error['loc'])
        msg = error['msg']
        error_messages.append(f"  {loc}: {msg}")
    return prefix + "\n" + "\n".join(error_messages)


def load_yaml_config(yaml_path: Union[str, Path]) -> PipelineConfig:
    """
    Load and parse YAML configuration file to PipelineConfig model

    Relative paths in the `paths` section are resolved against the
    directory holding the file.

    Args:
        yaml_path: Path to YAML configuration file

    Returns:
        PipelineConfig object

    Raises:
        ConfigLoadError: If YAML file cannot be loaded, parsed or validated
    """
    yaml_path = Path(yaml_path)
    if not yaml_path.exists():
        raise ConfigLoadError(f"Configuration file not found: {yaml_path}")

    try:
        with open(yaml_path, 'r', encoding='utf-8') as f:
            yaml_data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigLoadError(f"Invalid YAML format in {yaml_path}: {e}")
    except OSError as e:
        raise ConfigLoadError(f"Failed to read configuration {yaml_path}: {e}")

    if yaml_data is None:
        yaml_data = {}
    if not isinstance(yaml_data, dict):
        raise ConfigLoadError(f"Configuration root must be a mapping: {yaml_path}")

    try:
        config = PipelineConfig(**yaml_data)
    except ValidationError as e:
        raise ConfigLoadError(
            _format_validation_error(f"Configuration validation failed in {yaml_path}:", e)
        )
    config.resolve_paths(yaml_path.parent)
    return config


def merge_configs(
    base: PipelineConfig,
    overrides: Optional[Dict[str, Any]] = None
) -> PipelineConfig:
    """
    Merge an override dictionary into a configuration

    Args:
        base: Configuration to start from
        overrides: Nested override values

    Returns:
        Merged PipelineConfig

    Raises:
        ConfigLoadError: If the merged configuration is invalid
    """
    if not overrides:
        return base
    config_dict = _deep_merge(base.model_dump(), overrides)
    try:
        return PipelineConfig(**config_dict)
    except ValidationError as e:
        raise ConfigLoadError(_format_validation_error("Configuration merge validation failed:", e))


def apply_cli_overrides(config: PipelineConfig, overrides: Optional[List[str]]) -> PipelineConfig:
    """
    Apply CLI override arguments to configuration

    Args:
        config: Base configuration
        overrides: List of override strings in format "key.subkey=value"
                  Example: ["decoder.beam_size=50", "filter.thresholds.pd=0.9"]

    Returns:
        Updated PipelineConfig

    Raises:
        ConfigOverrideError: If override format is invalid
    """
    if not overrides:
        return config

    override_dict: Dict[str, Any] = {}

    for override_str in overrides:
        if '=' not in override_str:
            raise ConfigOverrideError(override_str, "expected key=value")

        key_path, value_str = override_str.split('=', 1)
        keys = [k for k in key_path.strip().split('.')]
        if not key_path.strip() or any(not k for k in keys):
            raise ConfigOverrideError(override_str, "empty key")

        _set_nested_dict(override_dict, keys, _parse_value(value_str))

    return merge_configs(config, override_dict)


def apply_flag_values(config: PipelineConfig, values: Dict[str, Any]) -> PipelineConfig:
    """
    Apply already-typed values keyed by dotted config path

    Used for dedicated CLI flags, which take precedence over --override.
    None values are skipped.
    """
    flag_dict: Dict[str, Any] = {}
    for key_path, value in values.items():
        if value is not None:
            _set_nested_dict(flag_dict, key_path.split('.'), value)
    return merge_configs(config, flag_dict)


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[List[str]] = None,
) -> PipelineConfig:
    """Defaults, then the YAML file (if any), then overrides"""
    config = load_yaml_config(config_path) if config_path else PipelineConfig()
    return apply_cli_overrides(config, overrides)


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deep merge two dictionaries

    Args:
        base: Base dictionary
        update: Dictionary with updates

    Returns:
        Merged dictionary
    """
    result = base.copy()

    for key, value in update.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value

    return result


def _set_nested_dict(d: Dict[str, Any], keys: List[str], value: Any) -> None:
    """
    Set a value in a nested dictionary using a key path

    Example:
        _set_nested_dict({}, ['decoder', 'beam_size'], 50)
        -> {'decoder': {'beam_size': 50}}
    """
    current = d

    for key in keys[:-1]:
        if key not in current or not isinstance(current[key], dict):
            current[key] = {}
        current = current[key]

    current[keys[-1]] = value


def _parse_value(value_str: str) -> Any:
    """
    Parse string value to appropriate Python type

    Args:
        value_str: String value to parse

    Returns:
        Parsed value (int, float, bool, None, list, str)
    """
    value_str = value_str.strip()

    if value_str.lower() in ('true', 'yes', 'on'):
        return True
    if value_str.lower() in ('false', 'no', 'off'):
        return False

    if value_str.lower() in ('none', 'null'):
        return None

    # Lists use YAML flow syntax: [0.9,1.0]
    if value_str.startswith('[') and value_str.endswith(']'):
        try:
            return yaml.safe_load(value_str)
        except yaml.YAMLError:
            pass

    try:
        if '.' not in value_str and 'e' not in value_str.lower():
            return int(value_str)
        return float(value_str)
    except ValueError:
        pass

    if (value_str.startswith('"') and value_str.endswith('"')) or \
       (value_str.startswith("'") and value_str.endswith("'")):
        return value_str[1:-1]

    return value_str


def parse_key_values(text: str) -> Dict[str, float]:
    """
    Parse "a=900,b=100" into {"a": 900.0, "b": 100.0}

    Raises:
        PolicyError: Malformed pair or non-numeric value
    """
    result: Dict[str, float] = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        if '=' not in item:
            raise PolicyError(f"expected key=value, got {item!r}")
        key, value = item.split('=', 1)
        try:
            result[key.strip()] = float(value)
        except ValueError:
            raise PolicyError(f"value for {key.strip()!r} is not a number: {value!r}")
    return result


def parse_policy_lines(lines: List[str], source: str = "<policy>") -> Dict[LanguageTag, float]:
    """
    Parse `lang=threshold` lines; `#` comments and blank lines are ignored

    Raises:
        PolicyError: Malformed line or threshold outside [0, 1]
    """
    thresholds: Dict[LanguageTag, float] = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise PolicyError(f"{source}:{line_no}: expected lang=threshold, got {line!r}")
        code, value = (part.strip() for part in line.split('=', 1))
        try:
            threshold = float(value)
        except ValueError:
            raise PolicyError(f"{source}:{line_no}: threshold {value!r} is not a number")
        if not 0.0 <= threshold <= 1.0:
            raise PolicyError(f"{source}:{line_no}: threshold {threshold} outside [0, 1]")
        thresholds[LanguageTag.from_code(code)] = threshold
    return thresholds


def load_policy_file(path: Union[str, Path]) -> Dict[LanguageTag, float]:
    """Read a `lang=threshold` policy file"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return parse_policy_lines(f.read().splitlines(), str(path))
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def validate_config_file(yaml_path: Union[str, Path]) -> Tuple[bool, Optional[str]]:
    """
    Validate a configuration file

    Args:
        yaml_path: Path to YAML file

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        load_yaml_config(yaml_path)
        return True, None
    except ConfigLoadError as e:
        return False, e.message
    except Exception as e:
        return False, f"Unexpected error: {e}"

"""Run configuration: flat ``key = value`` text with a documented default for every key."""
import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError

WORLD_KINDS = ("soup", "atoms")
PAYLOAD_TYPES = "abcd"
MIN_GRID = 8
MAX_STATE_LIMIT = 9

# Keys left out of the checkpoint so that run(a+b) and resume-after-a embed the same config.
RUN_ONLY_KEYS = ("steps", "output_dir", "checkpoint_interval", "metrics_interval")

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class RunConfig:
    world_kind: str = "soup"
    seed: int = 0
    steps: int = 1000

    # soup
    soup_size: int = 60000
    slice_base: int = 16
    slice_pow: float = 0.0
    fill_threshold: float = 0.8
    fill_hysteresis: float = 0.02
    p_copy_flip: float = 1 / 2000
    p_cosmic: float = 1e-6
    max_org_size: int = 1024
    search_limit: int = 1024
    error_promotion: bool = True
    ancestor_path: str = ""
    parasite_window: int = 1000
    record_errors: bool = True

    # chem
    grid_width: int = 64
    grid_height: int = 64
    max_state: int = 9
    rules_path: str = ""
    p_bond_break: float = 1e-4
    p_state_reset: float = 1e-5
    motion_enabled: bool = True
    barrier_spec: tuple = ()
    payload: str = "ab"
    seed_x: int = -1
    seed_y: int = -1
    food_count: int = 400
    food_types: str = "ab"
    cap_food_count: int = 80

    # observatory
    metrics_interval: int = 100
    stasis_window: int = 10000
    stasis_persistence: int = 1000
    stasis_min_abundance: int = 10
    parasite_fraction: float = 0.5

    # engine / output
    strict_audit: bool = True
    checkpoint_interval: int = 0
    output_dir: str = "runs/latest"

    def __post_init__(self):
        _validate(self)

    def replace(self, **overrides) -> "RunConfig":
        values = dataclasses.asdict(self)
        values.update(overrides)
        return config_from_mapping(values)

    @property
    def effective_checkpoint_interval(self) -> int:
        if self.checkpoint_interval > 0:
            return self.checkpoint_interval
        if self.world_kind == "soup":
            # roughly every 10^5 executed instructions
            return max(1, 100000 // self.slice_base)
        return 1000

    def to_world_dict(self) -> dict:
        """The parameterization that defines a world trajectory (what a checkpoint embeds)."""
        values = dataclasses.asdict(self)
        for key in RUN_ONLY_KEYS:
            values.pop(key)
        values["barrier_spec"] = [list(rect) for rect in self.barrier_spec]
        return values


FIELD_DEFAULTS = {f.name: f.default for f in dataclasses.fields(RunConfig)}


def _validate(cfg: RunConfig) -> None:
    if cfg.world_kind not in WORLD_KINDS:
        raise ConfigError(f"world_kind must be one of {', '.join(WORLD_KINDS)}")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if cfg.steps < 0:
        raise ConfigError("steps must be ≥ 0")
    for name in ("p_copy_flip", "p_cosmic", "p_bond_break", "p_state_reset", "parasite_fraction"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name} out of range")
    if not 0.0 < cfg.fill_threshold <= 1.0:
        raise ConfigError("fill_threshold out of range")
    if not 0.0 < cfg.fill_hysteresis < cfg.fill_threshold:
        raise ConfigError("fill_hysteresis out of range")
    if cfg.max_org_size < 1:
        raise ConfigError("max_org_size must be ≥ 1")
    if cfg.soup_size < 2 * cfg.max_org_size:
        raise ConfigError("soup_size must be ≥ 2·max_org_size")
    if cfg.search_limit < 1:
        raise ConfigError("search_limit must be ≥ 1")
    if cfg.slice_base < 1:
        raise ConfigError("slice_base must be ≥ 1")
    if cfg.slice_pow < 0:
        raise ConfigError("slice_pow must be ≥ 0")
    if cfg.parasite_window < 1:
        raise ConfigError("parasite_window must be ≥ 1")
    if cfg.grid_width < MIN_GRID or cfg.grid_height < MIN_GRID:
        raise ConfigError("grid dimensions ≥ 8")
    if not 1 <= cfg.max_state <= MAX_STATE_LIMIT:
        raise ConfigError("max_state must be in 1..9")
    if not cfg.payload or any(ch not in PAYLOAD_TYPES for ch in cfg.payload):
        raise ConfigError(f"payload must be a non-empty sequence over {PAYLOAD_TYPES}")
    if not cfg.food_types or any(ch not in PAYLOAD_TYPES for ch in cfg.food_types):
        raise ConfigError(f"food_types must be a non-empty subset of {PAYLOAD_TYPES}")
    if cfg.food_count < 0 or cfg.cap_food_count < 0:
        raise ConfigError("food counts must be ≥ 0")
    for rect in cfg.barrier_spec:
        x0, y0, x1, y1 = rect
        if not (0 <= x0 <= x1 < cfg.grid_width and 0 <= y0 <= y1 < cfg.grid_height):
            raise ConfigError(f"barrier rect {x0} {y0} {x1} {y1} outside the grid")
    if cfg.metrics_interval < 1:
        raise ConfigError("metrics_interval must be ≥ 1")
    if cfg.stasis_window < 1 or cfg.stasis_persistence < 0 or cfg.stasis_min_abundance < 1:
        raise ConfigError("stasis parameters out of range")
    if cfg.checkpoint_interval < 0:
        raise ConfigError("checkpoint_interval must be ≥ 0")


def _parse_rect(value) -> tuple:
    if isinstance(value, (list, tuple)):
        parts = list(value)
        if parts and parts[0] == "rect":
            parts = parts[1:]
    else:
        parts = str(value).split()
        if not parts or parts[0] != "rect":
            raise ConfigError(f"barrier_spec entry must read 'rect x0 y0 x1 y1', got {value!r}")
        parts = parts[1:]
    if len(parts) != 4:
        raise ConfigError(f"barrier_spec entry needs four coordinates, got {value!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"barrier_spec coordinates must be integers, got {value!r}") from None


def _coerce(key: str, value):
    default = FIELD_DEFAULTS[key]
    try:
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, str):
                value = value.strip()
                return int(value, 16) if value.lower().startswith("0x") else int(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            return float(Fraction(value.strip())) if isinstance(value, str) else float(value)
        if isinstance(default, tuple):
            return tuple(_parse_rect(v) for v in value)
        return str(value).strip()
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError(f"{key}: cannot read value {value!r}") from None


def config_from_mapping(values: dict) -> RunConfig:
    """Validate a key/value mapping into a RunConfig; omitted keys take their defaults."""
    kwargs = {}
    for key, value in values.items():
        if key == "barrier":
            key = "barrier_spec"
        if key not in FIELD_DEFAULTS:
            raise ConfigError(f"unknown key: {key}")
        if key == "barrier_spec" and isinstance(value, (str, bytes)):
            value = [value]
        kwargs[key] = _coerce(key, value)
    return RunConfig(**kwargs)


def parse_pairs(text: str) -> dict:
    """Split config text into a dict; repeated barrier keys accumulate, other repeats override."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split(sep, 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in ("barrier", "barrier_spec"):
            values.setdefault("barrier_spec", []).append(value)
        else:
            values[key] = value
    return values


def config_parse(text: str) -> RunConfig:
    return config_from_mapping(parse_pairs(text))


def parse_override(item: str) -> tuple:
    """Read one ``key=value`` command-line override."""
    if "=" not in item:
        raise ConfigError(f"override must read key=value, got {item!r}")
    key, value = item.split("=", 1)
    return key.strip(), value.strip()


def apply_overrides(cfg: RunConfig, items) -> RunConfig:
    if not items:
        return cfg
    values = dataclasses.asdict(cfg)
    for item in items:
        key, value = parse_override(item)
        if key in ("barrier", "barrier_spec"):
            values["barrier_spec"] = list(values["barrier_spec"]) + [value]
        else:
            values[key] = value
    return config_from_mapping(values)


def config_from_world_dict(values: dict, **run_keys) -> RunConfig:
    """Inverse of RunConfig.to_world_dict, used when loading checkpoints."""
    merged = dict(values)
    merged["barrier_spec"] = [tuple(rect) for rect in values.get("barrier_spec", [])]
    merged.update(run_keys)
    return config_from_mapping(merged)


def config_text(cfg: RunConfig) -> str:
    """Render a config in the grammar config_parse reads back."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "barrier_spec":
            lines.extend(f"barrier = rect {x0} {y0} {x1} {y1}" for x0, y0, x1, y1 in value)
        elif isinstance(value, bool):
            lines.append(f"{f.name} = {'true' if value else 'false'}")
        else:
            lines.append(f"{f.name} = {value!r}" if isinstance(value, float) else f"{f.name} = {value}")
    return "\n".join(lines) + "\n"

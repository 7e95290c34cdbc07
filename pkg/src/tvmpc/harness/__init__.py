from .config import ConfigError, ScenarioConfig, load_config, parse_config_text
from .runner import COLUMNS, Metrics, Trace, emit_csv, run_scenario, trace_to_csv
from .scenarios import builtin_scenarios

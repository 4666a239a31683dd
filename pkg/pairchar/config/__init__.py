from pairchar.config.config_loader import Settings, load_settings, parse_settings
from pairchar.config.check_config import validate_settings

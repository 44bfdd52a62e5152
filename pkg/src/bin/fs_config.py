"""fs_config.py.

Project settings for the System Fs command line.

Defaults live in `src/config.json`. Command-line flags override them.

To use as a module, call

```python
from fs_config import load_settings

settings = load_settings()
settings.configure(max_steps=100)
```
"""

import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field

DEFAULT_CONFIG = Path(__file__).parent.parent / "config.json"


class FsSettings(BaseModel):
    relation: Literal["F", "EQ"] = Field(
        "F", description="Subtyping relation used to decide constraints"
    )
    output_format: Literal["canonical", "raw"] = Field(
        "canonical", description="Print types and constraints in canonical form or as computed"
    )
    max_steps: int = Field(50, ge=0, description="Upper bound on reduction steps")
    tvar_prefix: str = Field(
        "a", min_length=1, description="Prefix for type variables of initial skeletons"
    )
    evar_prefix: str = Field(
        "s", min_length=1, description="Prefix for E-variables of initial skeletons"
    )
    config_path: Path | None = Field(
        None, exclude=True, description="File the settings were read from"
    )

    def configure(self, config_dict: dict = None, **kwargs) -> "FsSettings":
        """Update settings and write them back to the configuration file."""
        updates = dict(config_dict or {})
        updates.update(kwargs)
        updated = self.model_validate({**self.model_dump(), **updates})
        updated.config_path = self.config_path
        config_path = self.config_path or DEFAULT_CONFIG
        if config_path.exists():
            with config_path.open("r", encoding="utf-8") as f:
                current_config = json.load(f)
        else:
            current_config = {}
        current_config.update(updated.model_dump())
        with config_path.open("w", encoding="utf-8") as f:
            json.dump(current_config, f, indent=2)
        return updated


def load_settings(path: Path | str | None = None) -> FsSettings:
    """Read settings from `path`, or from the project config file.

    Args:
        path (Path | str | None): Configuration file to read

    Returns:
        FsSettings: The validated settings; defaults when the default file is missing
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG
    if not config_path.exists():
        if path is not None:
            raise FileNotFoundError(f"Configuration file {config_path} not found.")
        return FsSettings()
    with config_path.open("r", encoding="utf-8") as f:
        data = json.load(f)
    known = {name: data[name] for name in FsSettings.model_fields if name in data}
    settings = FsSettings(**known)
    settings.config_path = config_path
    return settings

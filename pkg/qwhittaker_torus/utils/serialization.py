"""Reading and writing the JSON artifacts of the command line."""

import json
import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, TextIO, Union

from .. import SCHEMA_VERSION, __version__
from ..errors import StructuralError
from ..lattice import Configuration

logger = logging.getLogger(__name__)


def report(kind: str, payload: Dict) -> Dict:
    """Wraps a payload with the schema and package version."""
    wrapped = {'schema': SCHEMA_VERSION, 'version': __version__, 'kind': kind}
    wrapped.update(payload)
    return wrapped


def dumps(data: Dict) -> str:
    """Deterministic JSON: sorted keys, no trailing spaces."""
    return json.dumps(data, sort_keys=True, separators=(',', ': '), indent=2)


def write_json_lines(records: Iterable[Dict], stream: TextIO) -> int:
    count = 0
    for record in records:
        stream.write(json.dumps(record, sort_keys=True) + '\n')
        count += 1
    return count


def write_configurations(configs: Iterable[Configuration], path: Union[str, Path], m2: Optional[int] = None) -> int:
    """One configuration per line; returns the number of lines written."""
    def records():
        for config in configs:
            record = config.to_dict()
            record['occupation'] = config.occupation_hex
            if m2 is not None:
                record['m2'] = m2
            yield record

    with open(path, 'w', encoding='utf-8') as f:
        count = write_json_lines(records(), f)
    logger.info(f"Wrote {count} configurations to {path}")
    return count


def read_configuration(path: Union[str, Path]) -> Configuration:
    """Loads a configuration object (``rows`` or ``occupation`` form) from a JSON file."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise StructuralError(f"Cannot read configuration from {path}: {e}")
    if not isinstance(data, dict):
        raise StructuralError(f"{path} does not hold a JSON object.")
    return Configuration.from_dict(data)

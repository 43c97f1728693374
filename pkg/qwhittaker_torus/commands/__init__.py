from . import (
    enumerate,
    verify,
    simulate,
    connect,
    info,
    config
)

__all__ = [
    'enumerate',
    'verify',
    'simulate',
    'connect',
    'info',
    'config'
]

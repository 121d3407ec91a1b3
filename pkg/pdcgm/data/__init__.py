from pathlib import Path

from pdcgm.apps.tssp import StochasticInstance
from pdcgm.data.formats import (
    format_mcnf,
    format_tssp,
    load_mcnf,
    load_tssp,
    parse_mcnf,
    parse_tssp,
)
from pdcgm.data.generators import random_network, random_stochastic, small_network, small_stochastic

INSTANCE_DIR = Path(__file__).parent / "instances"

# Published optimum of the bundled capacity expansion instance
LANDS_OPTIMUM = 381.853


def lands() -> StochasticInstance:
    """Three-scenario power generation capacity expansion instance"""
    return load_tssp(INSTANCE_DIR / "lands.tssp")


__all__ = [
    'INSTANCE_DIR',
    'LANDS_OPTIMUM',
    'lands',
    'format_mcnf',
    'format_tssp',
    'load_mcnf',
    'load_tssp',
    'parse_mcnf',
    'parse_tssp',
    'random_network',
    'random_stochastic',
    'small_network',
    'small_stochastic',
]

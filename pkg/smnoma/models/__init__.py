"""
Módulo de inicialización de modelos del simulador SM-NOMA.

Centraliza la importación de los tipos de dominio para que los servicios y
los tests accedan a ellos desde un único punto.

Modelos incluidos:
    - SystemConfig       : Descripción del experimento y sus modos
    - Constellation      : Alfabeto QAM Gray de energía unitaria
    - ChannelRealization : Matrices de canal por usuario
    - UserPair / AntennaPartition / Cluster : Agrupamiento de usuarios y antenas
    - SweepResult        : Resultados agregados de un barrido
"""

from .system_config import (
    AllocationMode,
    InterferenceModel,
    PairingMode,
    RateSplit,
    SnrReference,
    SystemConfig,
    config_digest,
    default_paper_config,
    dump_config,
    load_config,
    serialize,
)
from .signal import BitSplit, Constellation, DetectionResult, MrcStatistic, SmSymbol
from .channel import ChannelRealization, LinkBudget
from .grouping import AntennaPartition, Cluster, UserPair
from .results import MiEstimate, NomaRates, Scheme, SweepResult, SweepRow

__all__ = [
    'AllocationMode',
    'InterferenceModel',
    'PairingMode',
    'RateSplit',
    'SnrReference',
    'SystemConfig',
    'config_digest',
    'default_paper_config',
    'dump_config',
    'load_config',
    'serialize',
    'BitSplit',
    'Constellation',
    'DetectionResult',
    'MrcStatistic',
    'SmSymbol',
    'ChannelRealization',
    'LinkBudget',
    'AntennaPartition',
    'Cluster',
    'UserPair',
    'MiEstimate',
    'NomaRates',
    'Scheme',
    'SweepResult',
    'SweepRow',
]

"""
Conversiones de unidades logarítmicas para el presupuesto de enlace.

Funcionalidades principales:
    - dB <-> escala lineal
    - dBm <-> mW
"""

import math


def db_to_linear(value_db: float) -> float:
    """
    Convierte una razón en dB a escala lineal.

    Example:
        >>> db_to_linear(30.0)
        1000.0
    """
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convierte una razón lineal positiva a dB."""
    return 10.0 * math.log10(value)


def dbm_to_mw(value_dbm: float) -> float:
    """Potencia en dBm a mW."""
    return db_to_linear(value_dbm)


def mw_to_dbm(value_mw: float) -> float:
    """Potencia en mW a dBm."""
    return linear_to_db(value_mw)

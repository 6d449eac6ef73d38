"""
Generadores aleatorios reproducibles para el simulador.

Cada flujo aleatorio se identifica por una clave de enteros
``(seed, stream, trial, ...)``. La clave alimenta un ``SeedSequence`` y un
generador Philox (basado en contador), de modo que el resultado depende sólo
de la clave y nunca del orden de llamada ni del proceso que la evalúa.

Funcionalidades principales:
    - RngKey            : Clave inmutable con derivación de subclaves
    - Constantes de flujo para canal, ruido, bits y oráculos
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

# Identificadores de flujo: separan los usos de una misma semilla
CHANNEL_STREAM = 1   # Desvanecimiento Rayleigh por (trial, usuario)
NOISE_STREAM   = 2   # Muestras de ruido de los estimadores de MI
BITS_STREAM    = 3   # Bits aleatorios de la simulación de BER
ORACLE_STREAM  = 4   # Instancias aleatorias de las suites de validación

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngKey:
    """
    Clave de un flujo aleatorio contador.

    Attributes:
        words (tuple) : Enteros no negativos que identifican el flujo

    Example:
        >>> key = RngKey.root(2017).child(CHANNEL_STREAM, 5, 0)
        >>> rng = key.generator()
    """
    words: Tuple[int, ...]

    @classmethod
    def root(cls, seed: int) -> "RngKey":
        return cls((int(seed) & _MASK64,))

    def child(self, *words: int) -> "RngKey":
        """Deriva una subclave agregando enteros a la clave actual."""
        return RngKey(self.words + tuple(int(w) & _MASK64 for w in words))

    def generator(self) -> np.random.Generator:
        """Construye un Generator Philox determinado únicamente por la clave."""
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(self.words))))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """
    Muestras gaussianas complejas circularmente simétricas CN(0, variance).

    Usa dos normales reales independientes escaladas por sqrt(variance/2), así
    E|z|^2 = variance exactamente.
    """
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

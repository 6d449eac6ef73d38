"""
Módulo de modelos de señal para el simulador SM-NOMA.

Tipos de dominio del transmisor y del receptor SM: constelación, división de
bits, símbolo SM y resultados de detección.

El módulo incluye:
    - Clase Constellation   : Alfabeto QAM de energía unitaria con etiquetas Gray
    - Clase BitSplit        : Bits de índice y bits de símbolo de un uso de canal
    - Clase SmSymbol        : (grupo, antena local, punto de constelación)
    - Clase MrcStatistic    : Puntajes |h_i^H y| por antena candidata
    - Clase DetectionResult : Decisión del detector con su métrica
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class Constellation:
    """
    Constelación de energía media unitaria con etiquetado Gray.

    Attributes:
        order (int)    : Tamaño M del alfabeto
        points (array) : M puntos complejos (solo lectura)
        labels (tuple) : M etiquetas de log2(M) bits, biyectivas sobre {0,1}^log2(M)
    """
    order : int
    points: np.ndarray
    labels: Tuple[str, ...]

    def __repr__(self):
        return f'<Constellation M={self.order}>'

    @property
    def bits(self) -> int:
        """Bits por símbolo log2(M)."""
        return len(self.labels[0]) if self.order > 1 else 0

    def label_of(self, index: int) -> str:
        """Etiqueta Gray del punto ``index``."""
        return self.labels[index]

    def index_of(self, label: str) -> int:
        """Posición del punto cuya etiqueta es ``label``."""
        return self._label_index[label]

    @property
    def _label_index(self):
        cache = self.__dict__.get('_cache_label_index')
        if cache is None:
            cache = {label: i for i, label in enumerate(self.labels)}
            object.__setattr__(self, '_cache_label_index', cache)
        return cache

    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


@dataclass(frozen=True)
class BitSplit:
    """
    División de los bits de un uso de canal.

    Attributes:
        index_bits (str)  : log2(L) bits que eligen la antena activa (MSB primero)
        symbol_bits (str) : log2(M) bits que eligen el punto QAM
    """
    index_bits : str
    symbol_bits: str


@dataclass(frozen=True)
class SmSymbol:
    """
    Un uso de canal SM.

    Attributes:
        group (int)         : Grupo de antenas / par servido, en [0, K)
        antenna_local (int) : Antena activa dentro del grupo, en [0, L)
        point_index (int)   : Punto de constelación, en [0, M)
    """
    group        : int
    antenna_local: int
    point_index  : int


@dataclass(frozen=True, eq=False)
class MrcStatistic:
    """Puntajes MRC no negativos, uno por antena candidata del grupo."""
    scores: np.ndarray


@dataclass(frozen=True)
class DetectionResult:
    """
    Decisión de un detector.

    Attributes:
        antenna_local (int)         : Antena decidida
        point_index (Optional[int]) : Punto decidido (None en detección solo de índice)
        metric (float)              : Puntaje ganador o distancia cuadrática mínima
    """
    antenna_local: int
    point_index  : Optional[int]
    metric       : float

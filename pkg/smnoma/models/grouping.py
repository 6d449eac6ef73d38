"""
Módulo de modelos de agrupamiento: pares SM, particiones de antenas y clusters NOMA.

El módulo incluye:
    - Clase UserPair         : Par SM con roles (índice / símbolo)
    - Clase AntennaPartition : Asignación disjunta de antenas a grupos
    - Clase Cluster          : Cluster del NOMA convencional con su haz
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class UserPair:
    """
    Par de usuarios SM.

    Attributes:
        index_user (int)   : Usuario que detecta el índice de antena
        symbol_user (int)  : Usuario que detecta el símbolo QAM (canal más fuerte)
        similarity (float) : Correlación normalizada de canales en [0, 1]
    """
    index_user : int
    symbol_user: int
    similarity : float

    @property
    def users(self) -> Tuple[int, int]:
        return (self.index_user, self.symbol_user)


@dataclass(frozen=True)
class AntennaPartition:
    """
    Partición de las Nt antenas en K grupos de Nt/K antenas.

    Attributes:
        groups (tuple): K tuplas ordenadas de índices globales de antena
    """
    groups: Tuple[Tuple[int, ...], ...]

    def __repr__(self):
        return f'<AntennaPartition {list(map(list, self.groups))}>'

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def global_antenna(self, group: int, antenna_local: int) -> int:
        """Índice global de la antena ``antenna_local`` del grupo ``group``."""
        return self.groups[group][antenna_local]

    def is_valid(self, n_tx: int) -> bool:
        """Disjunta, cubre {0..Nt-1} y con grupos de igual tamaño Nt/K."""
        flat = [a for g in self.groups for a in g]
        size = n_tx // max(len(self.groups), 1)
        return (sorted(flat) == list(range(n_tx))
                and all(len(g) == size for g in self.groups))

    def encoding(self) -> Tuple[int, ...]:
        """Codificación lexicográfica: grupo asignado a cada antena."""
        owner = {a: k for k, g in enumerate(self.groups) for a in g}
        return tuple(owner[a] for a in sorted(owner))


@dataclass(frozen=True, eq=False)
class Cluster:
    """
    Cluster de dos usuarios del NOMA convencional.

    Attributes:
        strong_user (int)    : Usuario con mayor ganancia tras el haz (aplica SIC)
        weak_user (int)      : Usuario débil (decodifica tratando al fuerte como ruido)
        beam (array)         : Haz ZF de norma unitaria, largo Nt
        power_split (float)  : Fracción de potencia al usuario débil
    """
    strong_user: int
    weak_user  : int
    beam       : np.ndarray
    power_split: float

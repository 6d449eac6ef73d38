"""
Módulo de modelos de canal para el simulador SM-NOMA.

El módulo incluye:
    - Clase LinkBudget         : Potencia de ruido, pérdidas por usuario y potencia transmitida
    - Clase ChannelRealization : Matrices Nr x Nt por usuario, con pérdidas incluidas
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class LinkBudget:
    """
    Presupuesto de enlace de un punto de SNR.

    Attributes:
        noise_power_dbm (float) : N0 + 10 log10(B), en dBm
        pathloss_db (tuple)     : Pérdida de trayecto por usuario, en dB
        tx_power_dbm (float)    : Potencia total transmitida por la BS, en dBm
    """
    noise_power_dbm: float
    pathloss_db    : Tuple[float, ...]
    tx_power_dbm   : float


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    Una realización de canal para los 2K usuarios.

    Attributes:
        per_user (tuple)  : 2K matrices complejas Nr x Nt en amplitud lineal,
                            con el factor sqrt(ganancia de trayecto) incluido
        trial_index (int) : Índice de la realización
    """
    per_user   : Tuple[np.ndarray, ...]
    trial_index: int

    def __repr__(self):
        n_rx, n_tx = self.per_user[0].shape
        return f'<ChannelRealization trial={self.trial_index} users={len(self.per_user)} {n_rx}x{n_tx}>'

    @property
    def n_users(self) -> int:
        return len(self.per_user)

    def columns(self, user: int, antennas: Sequence[int]) -> np.ndarray:
        """Columnas (Nr x len(antennas)) del usuario para un conjunto de antenas."""
        return self.per_user[user][:, list(antennas)]

    def with_users(self, per_user) -> "ChannelRealization":
        """Copia con otras matrices (usado para escenarios construidos en tests)."""
        return ChannelRealization(per_user=tuple(np.asarray(h) for h in per_user),
                                  trial_index=self.trial_index)

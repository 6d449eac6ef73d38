"""
Servicio de emparejamiento de usuarios y asignación de antenas.

Funcionalidades principales:
    - Emparejamiento voraz por similitud de dirección |<h_u, h_v>| / (||h_u|| ||h_v||)
    - Asignación de roles: el usuario de mayor norma de Frobenius detecta el símbolo
    - Asignación de antenas fija (round-robin), voraz o exhaustiva
    - Oráculos de enumeración (emparejamiento perfecto óptimo)

Note:
    - Las matrices Nr x Nt se aplanan a vectores para medir la similitud
    - El objetivo de asignación es un sustituto barato de la tasa del par:
      sum_k log det(I + G_k / tau), con G_k el Gram L x L de las columnas del
      grupo k para ambos usuarios del par y tau la energía media por columna
"""

import logging
import math
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from smnoma.exceptions import AllocationSizeError
from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import AntennaPartition, UserPair
from smnoma.models.system_config import AllocationMode, PairingMode, SystemConfig

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_LIMIT = 1_000_000


# ============================================================================
# EMPAREJAMIENTO DE USUARIOS
# ============================================================================

def similarity_matrix(channels: ChannelRealization) -> np.ndarray:
    """Correlación normalizada entre los canales aplanados de cada par de usuarios."""
    flat = np.array([h.reshape(-1) for h in channels.per_user])
    norms = np.linalg.norm(flat, axis=1)
    gram = np.abs(flat.conj() @ flat.T)
    return gram / np.outer(norms, norms)


def _make_pair(channels: ChannelRealization, u: int, v: int, similarity: float) -> UserPair:
    norm_u = np.linalg.norm(channels.per_user[u])
    norm_v = np.linalg.norm(channels.per_user[v])
    # El canal más fuerte detecta el símbolo
    if norm_v > norm_u:
        return UserPair(index_user=u, symbol_user=v, similarity=similarity)
    return UserPair(index_user=v, symbol_user=u, similarity=similarity)


def pair_users(channels: ChannelRealization,
               mode: PairingMode = PairingMode.SIMILARITY) -> List[UserPair]:
    """
    Forma K pares de usuarios con roles asignados.

    Args:
        channels (ChannelRealization): Realización con 2K usuarios
        mode (PairingMode)           : SIMILARITY (voraz) o FIXED (2k, 2k+1)

    Returns:
        List[UserPair]: Emparejamiento perfecto, ordenado por el menor usuario de cada par

    Note:
        - El voraz toma repetidamente el par libre de mayor similitud;
          empates al par (u, v) lexicográficamente menor
    """
    n_users = channels.n_users
    sim = similarity_matrix(channels)

    if mode == PairingMode.FIXED:
        return [_make_pair(channels, 2 * k, 2 * k + 1, float(min(sim[2 * k, 2 * k + 1], 1.0)))
                for k in range(n_users // 2)]

    candidates = sorted(
        ((u, v) for u in range(n_users) for v in range(u + 1, n_users)),
        key=lambda uv: (-sim[uv], uv),
    )
    matched = set()
    pairs = []
    for u, v in candidates:
        if u in matched or v in matched:
            continue
        matched.update((u, v))
        pairs.append(_make_pair(channels, u, v, float(min(sim[u, v], 1.0))))

    pairs.sort(key=lambda p: min(p.users))
    return pairs


def _matchings(users: Tuple[int, ...]) -> Iterator[List[Tuple[int, int]]]:
    if not users:
        yield []
        return
    first, rest = users[0], users[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _matchings(remaining):
            yield [(first, partner)] + tail


def exhaustive_pairing(channels: ChannelRealization) -> Tuple[float, List[Tuple[int, int]]]:
    """Oráculo: emparejamiento perfecto de máxima similitud total por enumeración."""
    sim = similarity_matrix(channels)
    best_total, best = -math.inf, []
    for matching in _matchings(tuple(range(channels.n_users))):
        total = sum(sim[u, v] for u, v in matching)
        if total > best_total:
            best_total, best = total, matching
    return float(best_total), best


def total_similarity(pairs: Sequence[UserPair]) -> float:
    return float(sum(p.similarity for p in pairs))


# ============================================================================
# ASIGNACIÓN DE ANTENAS
# ============================================================================

def fixed_partition(n_tx: int, n_groups: int) -> AntennaPartition:
    """Partición round-robin: la antena a pertenece al grupo a mod K."""
    return AntennaPartition(groups=tuple(tuple(range(k, n_tx, n_groups)) for k in range(n_groups)))


def partition_count(n_tx: int, n_groups: int) -> int:
    """Número de particiones balanceadas ordenadas: Nt! / ((Nt/K)!)^K."""
    size = n_tx // n_groups
    return math.factorial(n_tx) // (math.factorial(size) ** n_groups)


def _column_energy(channels: ChannelRealization) -> float:
    n_tx = channels.per_user[0].shape[1]
    return float(np.mean([np.linalg.norm(h) ** 2 / n_tx for h in channels.per_user]))


class _PairObjective:
    """Evalúa log det(I + G/tau) por (par, conjunto de antenas) con memoria."""

    def __init__(self, channels: ChannelRealization, pairs: Sequence[UserPair]):
        self.channels = channels
        self.pairs    = pairs
        self.tau      = _column_energy(channels)
        self._memo: Dict[Tuple[int, FrozenSet[int]], float] = {}

    def __call__(self, pair_index: int, antennas) -> float:
        key = (pair_index, frozenset(antennas))
        if key not in self._memo:
            if not antennas:
                self._memo[key] = 0.0
            else:
                pair = self.pairs[pair_index]
                cols = sorted(antennas)
                stacked = np.vstack([self.channels.per_user[pair.index_user][:, cols],
                                     self.channels.per_user[pair.symbol_user][:, cols]])
                gram = stacked.conj().T @ stacked / self.tau
                _, logdet = np.linalg.slogdet(np.eye(len(cols)) + gram)
                self._memo[key] = float(logdet)
        return self._memo[key]


def allocation_objective(channels: ChannelRealization,
                         pairs: Sequence[UserPair],
                         partition: AntennaPartition) -> float:
    """Objetivo sustituto de la asignación: sum_k log det(I + G_k / tau)."""
    objective = _PairObjective(channels, pairs)
    return sum(objective(k, g) for k, g in enumerate(partition.groups))


def _balanced_encodings(n_tx: int, n_groups: int) -> Iterator[Tuple[int, ...]]:
    """Codificaciones antena -> grupo balanceadas, en orden lexicográfico."""
    size = n_tx // n_groups
    remaining = [size] * n_groups
    current: List[int] = []

    def _recurse(antenna: int):
        if antenna == n_tx:
            yield tuple(current)
            return
        for g in range(n_groups):
            if remaining[g]:
                remaining[g] -= 1
                current.append(g)
                yield from _recurse(antenna + 1)
                current.pop()
                remaining[g] += 1

    yield from _recurse(0)


def _partition_from_encoding(encoding: Sequence[int], n_groups: int) -> AntennaPartition:
    return AntennaPartition(groups=tuple(
        tuple(a for a, g in enumerate(encoding) if g == k) for k in range(n_groups)))


def allocate_antennas(channels: ChannelRealization,
                      pairs: Sequence[UserPair],
                      cfg: SystemConfig,
                      mode: Optional[AllocationMode] = None,
                      exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> AntennaPartition:
    """
    Asigna las Nt antenas a los K pares.

    Args:
        channels (ChannelRealization): Realización de canal
        pairs (Sequence[UserPair])   : Pares, el par k usa el grupo k
        cfg (SystemConfig)           : Configuración (Nt, K)
        mode (AllocationMode)        : FIXED, GREEDY o EXHAUSTIVE (por defecto el de cfg)
        exhaustive_limit (int)       : Máximo de particiones a enumerar

    Returns:
        AntennaPartition: Siempre disjunta, completa y balanceada

    Raises:
        AllocationSizeError: Si EXHAUSTIVE excede ``exhaustive_limit``
    """
    mode = mode or cfg.allocation_mode
    n_tx, n_groups, size = cfg.n_tx, cfg.n_pairs, cfg.group_size

    if mode == AllocationMode.FIXED or n_groups == 1:
        return fixed_partition(n_tx, n_groups)

    objective = _PairObjective(channels, pairs)

    if mode == AllocationMode.EXHAUSTIVE:
        count = partition_count(n_tx, n_groups)
        if count > exhaustive_limit:
            raise AllocationSizeError(count, exhaustive_limit)

        best_value, best_encoding = -math.inf, None
        for encoding in _balanced_encodings(n_tx, n_groups):
            groups = [[] for _ in range(n_groups)]
            for a, g in enumerate(encoding):
                groups[g].append(a)
            value = sum(objective(k, groups[k]) for k in range(n_groups))
            # Solo una mejora estricta reemplaza: gana la codificación menor
            if value > best_value:
                best_value, best_encoding = value, encoding
        logger.debug(f"Asignación exhaustiva sobre {count} particiones: objetivo {best_value:.4f}")
        return _partition_from_encoding(best_encoding, n_groups)

    groups: List[List[int]] = [[] for _ in range(n_groups)]
    free = set(range(n_tx))
    while free:
        for k in range(n_groups):
            if len(groups[k]) >= size or not free:
                continue
            base = objective(k, groups[k])
            best = max(sorted(free), key=lambda a: (objective(k, groups[k] + [a]) - base, -a))
            groups[k].append(best)
            free.remove(best)
    return AntennaPartition(groups=tuple(tuple(sorted(g)) for g in groups))

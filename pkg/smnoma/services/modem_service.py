"""
Servicio de modem SM para el simulador SM-NOMA (transmisor).

Construye constelaciones QAM con etiquetado Gray por eje y realiza el mapeo
bits -> símbolo SM -> vector transmitido de una única antena activa.

Funcionalidades principales:
    - Constelaciones BPSK y QAM cuadrada (4, 16, 64, 256) de energía unitaria
    - División de bits: primero log2(L) bits de índice (MSB primero), luego log2(M)
    - Mapeo e inverso exacto (sm_map / sm_unmap)
    - Vector de transmisión con exactamente una entrada no nula

Note:
    - El orden de bits (índice antes que símbolo, MSB primero) es parte del
      formato de resultados: cambiarlo altera los números de BER
    - La carga de índice por grupo es log2(Nt/K), no log2(Nt)
"""

import logging
import math
from functools import lru_cache

import numpy as np

from smnoma.exceptions import BitLengthError, UnsupportedConstellationError
from smnoma.models.grouping import AntennaPartition
from smnoma.models.signal import BitSplit, Constellation, SmSymbol

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (2, 4, 16, 64, 256)


def _gray(value: int) -> int:
    return value ^ (value >> 1)


def _to_bits(value: int, width: int) -> str:
    return format(value, f'0{width}b') if width > 0 else ''


@lru_cache(maxsize=16)
def make_constellation(order: int) -> Constellation:
    """
    Construye la constelación de orden ``order`` normalizada a energía media 1.

    Para QAM cuadrada cada eje usa niveles {-(S-1), ..., -1, 1, ..., S-1} con
    S = sqrt(M) y etiqueta Gray por eje; la etiqueta completa es la del eje
    en fase seguida de la del eje en cuadratura.

    Args:
        order (int): 2 (BPSK) o 4, 16, 64, 256 (QAM cuadrada)

    Returns:
        Constellation: Puntos y etiquetas; la instancia se cachea

    Raises:
        UnsupportedConstellationError: Para cualquier otro orden

    Example:
        >>> make_constellation(4).points
        array([-0.707-0.707j, -0.707+0.707j, 0.707-0.707j, 0.707+0.707j])
    """
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedConstellationError(order)

    if order == 2:
        points = np.array([1.0 + 0j, -1.0 + 0j])
        labels = ('0', '1')
    else:
        side = int(math.isqrt(order))
        axis_bits = int(math.log2(side))
        levels = 2 * np.arange(side) - (side - 1)

        raw, labels = [], []
        for i_pos in range(side):
            for q_pos in range(side):
                raw.append(levels[i_pos] + 1j * levels[q_pos])
                labels.append(_to_bits(_gray(i_pos), axis_bits) + _to_bits(_gray(q_pos), axis_bits))
        raw = np.array(raw, dtype=complex)
        points = raw / np.sqrt(np.mean(np.abs(raw) ** 2))
        labels = tuple(labels)

    points.setflags(write=False)
    logger.debug(f"Constelación de orden {order} construida")
    return Constellation(order=order, points=points, labels=labels)


def bits_per_use(group_size: int, order: int) -> int:
    """Bits por uso de canal de un par: log2(L) + log2(M)."""
    return int(math.log2(group_size)) + int(math.log2(order))


def split_bits(bits: str, group_size: int, order: int) -> BitSplit:
    """
    Divide los bits de un uso de canal en bits de índice y de símbolo.

    Args:
        bits (str)      : Cadena de '0'/'1' de largo log2(L) + log2(M)
        group_size (int): L, antenas por grupo
        order (int)     : M, tamaño de la constelación

    Returns:
        BitSplit: Primeros log2(L) bits al índice, el resto al símbolo

    Raises:
        BitLengthError: Si el largo no coincide

    Example:
        >>> split_bits('100111', 4, 16)
        BitSplit(index_bits='10', symbol_bits='0111')
    """
    n_index = int(math.log2(group_size))
    expected = n_index + int(math.log2(order))
    if len(bits) != expected or any(b not in '01' for b in bits):
        raise BitLengthError(expected, len(bits))
    return BitSplit(index_bits=bits[:n_index], symbol_bits=bits[n_index:])


def sm_map(split: BitSplit, group: int, constellation: Constellation) -> SmSymbol:
    """
    Mapea una división de bits a un símbolo SM del grupo indicado.

    Returns:
        SmSymbol: Antena local = valor binario de index_bits; punto = posición
                  de la etiqueta Gray igual a symbol_bits
    """
    antenna_local = int(split.index_bits, 2) if split.index_bits else 0
    return SmSymbol(
        group         = group,
        antenna_local = antenna_local,
        point_index   = constellation.index_of(split.symbol_bits),
    )


def sm_unmap(symbol: SmSymbol, constellation: Constellation, group_size: int) -> str:
    """Inverso de split_bits + sm_map: devuelve la cadena de bits original."""
    n_index = int(math.log2(group_size))
    return _to_bits(symbol.antenna_local, n_index) + constellation.label_of(symbol.point_index)


def tx_vector(symbol: SmSymbol,
              partition: AntennaPartition,
              n_tx: int,
              tx_amplitude: float,
              constellation: Constellation) -> np.ndarray:
    """
    Vector transmitido por la BS para un símbolo SM (una sola cadena RF activa).

    Args:
        symbol (SmSymbol)           : Símbolo a transmitir
        partition (AntennaPartition): Partición que ubica el grupo del símbolo
        n_tx (int)                  : Antenas totales
        tx_amplitude (float)        : Amplitud (raíz de la potencia del grupo)
        constellation (Constellation): Alfabeto del punto

    Returns:
        np.ndarray: Vector complejo de largo n_tx con una única entrada no nula
                    (ninguna si tx_amplitude es 0)
    """
    vector = np.zeros(n_tx, dtype=complex)
    antenna = partition.global_antenna(symbol.group, symbol.antenna_local)
    vector[antenna] = tx_amplitude * constellation.points[symbol.point_index]
    return vector

"""
Servicio de detección SM para el simulador SM-NOMA (receptor).

Implementa los detectores de los dos usuarios de cada par y el blanqueo de la
interferencia entre grupos de antenas.

Funcionalidades principales:
    - Detector MRC de índice (usuario de índice): argmax |h_i^H y|
    - Detector ML conjunto (usuario de símbolo): argmin ||y - h_i x_n||^2
    - Detector en dos etapas (MRC y luego ML del símbolo) para comparación
    - Blanqueo con (sigma^2 I + R)^(-1/2) sobre y y sobre las columnas candidatas

Note:
    - Los empates se rompen por el menor índice (MRC) o el menor (i, n)
      lexicográfico (ML), así los resultados son exactos entre implementaciones
    - El estadístico MRC literal no compensa la norma de la columna; la
      variante normalizada |h_i^H y| / ||h_i|| queda detrás de mrc_normalized
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from smnoma.exceptions import WhiteningError
from smnoma.models.grouping import AntennaPartition
from smnoma.models.signal import Constellation, DetectionResult, MrcStatistic

logger = logging.getLogger(__name__)

ColumnSet = Union[np.ndarray, Sequence[np.ndarray]]


def as_columns(columns: ColumnSet) -> np.ndarray:
    """Normaliza un conjunto de columnas a una matriz Nr x L."""
    if isinstance(columns, np.ndarray) and columns.ndim == 2:
        return columns
    return np.column_stack([np.asarray(c, dtype=complex).reshape(-1) for c in columns])


# ============================================================================
# DETECTORES
# ============================================================================

def mrc_statistic(y: np.ndarray, columns: ColumnSet, normalized: bool = False) -> MrcStatistic:
    """Puntajes |h_i^H y| (o |h_i^H y| / ||h_i|| si ``normalized``)."""
    cols = as_columns(columns)
    scores = np.abs(cols.conj().T @ y)
    if normalized:
        norms = np.linalg.norm(cols, axis=0)
        scores = np.divide(scores, norms, out=np.zeros_like(scores), where=norms > 0)
    return MrcStatistic(scores=scores)


def mrc_detect_index(y: np.ndarray, columns: ColumnSet, normalized: bool = False) -> DetectionResult:
    """
    Detector MRC del índice de antena activa.

    Args:
        y (np.ndarray)       : Señal recibida (Nr)
        columns (ColumnSet)  : Columnas de canal del usuario para su grupo (L)
        normalized (bool)    : Compensar la norma de cada columna

    Returns:
        DetectionResult: Menor índice que alcanza el puntaje máximo; sin punto

    Example:
        >>> mrc_detect_index(h[:, 2] * x, h).antenna_local   # columnas ortogonales
        2
    """
    stat = mrc_statistic(y, columns, normalized)
    best = int(np.argmax(stat.scores))
    return DetectionResult(antenna_local=best, point_index=None, metric=float(stat.scores[best]))


def ml_distances(y: np.ndarray, columns: ColumnSet, constellation: Constellation) -> np.ndarray:
    """Matriz L x M de distancias ||y - h_i x_n||^2."""
    cols = as_columns(columns)
    hypotheses = cols.T[:, None, :] * constellation.points[None, :, None]
    return np.sum(np.abs(y[None, None, :] - hypotheses) ** 2, axis=-1)


def ml_detect(y: np.ndarray, columns: ColumnSet, constellation: Constellation) -> DetectionResult:
    """
    Detector ML conjunto de (antena, símbolo).

    Returns:
        DetectionResult: (i, n) de distancia mínima; empates al menor (i, n)
    """
    distances = ml_distances(y, columns, constellation)
    flat = int(np.argmin(distances))
    antenna, point = divmod(flat, constellation.order)
    return DetectionResult(antenna_local=antenna, point_index=point, metric=float(distances[antenna, point]))


def two_stage_detect(y: np.ndarray,
                     columns: ColumnSet,
                     constellation: Constellation,
                     normalized: bool = False) -> DetectionResult:
    """Detección en dos etapas: índice por MRC y luego símbolo ML sobre esa columna."""
    cols = as_columns(columns)
    index = mrc_detect_index(y, cols, normalized).antenna_local
    distances = np.abs(y[None, :] - cols[:, index][None, :] * constellation.points[:, None]) ** 2
    per_point = np.sum(distances, axis=-1)
    point = int(np.argmin(per_point))
    return DetectionResult(antenna_local=index, point_index=point, metric=float(per_point[point]))


# ============================================================================
# BLANQUEO DE INTERFERENCIA
# ============================================================================

def build_interference_covariance(h_user: np.ndarray,
                                  partition: AntennaPartition,
                                  own_group: int,
                                  group_power: float) -> np.ndarray:
    """
    Covarianza de la interferencia de los demás grupos vista por un usuario.

    Cada grupo g activa una antena de sus L con probabilidad 1/L y un símbolo de
    energía unitaria con potencia ``group_power``: R = sum_g (P/L) H_g H_g^H.
    """
    n_rx = h_user.shape[0]
    covariance = np.zeros((n_rx, n_rx), dtype=complex)
    for g, antennas in enumerate(partition.groups):
        if g == own_group:
            continue
        h_g = h_user[:, list(antennas)]
        covariance += (group_power / len(antennas)) * (h_g @ h_g.conj().T)
    return covariance


def whitening_matrix(interference_covariance: Optional[np.ndarray], noise_power: float) -> np.ndarray:
    """
    Raíz cuadrada inversa de (sigma^2 I + R).

    Raises:
        WhiteningError: Si la matriz no es definida positiva
    """
    if interference_covariance is None:
        if not noise_power > 0:
            raise WhiteningError(float(noise_power))
        return np.eye(1) / np.sqrt(noise_power)

    n_rx = interference_covariance.shape[0]
    total = noise_power * np.eye(n_rx) + interference_covariance
    total = 0.5 * (total + total.conj().T)
    eigenvalues, eigenvectors = linalg.eigh(total)
    if eigenvalues[0] <= 0:
        raise WhiteningError(float(eigenvalues[0]))
    return (eigenvectors * (1.0 / np.sqrt(eigenvalues))) @ eigenvectors.conj().T


def whiten(y: np.ndarray,
           columns: ColumnSet,
           interference_covariance: Optional[np.ndarray],
           noise_power: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Blanquea la señal recibida y las columnas candidatas.

    Tras la transformación la perturbación residual (ruido + interferencia
    gaussiana) es blanca de varianza unitaria; MRC y ML se aplican luego sobre
    las cantidades transformadas.

    Args:
        y (np.ndarray)                         : Señal recibida (Nr)
        columns (ColumnSet)                    : Columnas candidatas (Nr x L)
        interference_covariance (np.ndarray)   : R (Nr x Nr) o None si no hay interferencia
        noise_power (float)                    : sigma^2

    Returns:
        tuple: (W y, W columnas)

    Note:
        - Sin interferencia la transformación es (1/sigma) I
    """
    cols = as_columns(columns)
    if interference_covariance is None:
        scale = whitening_matrix(None, noise_power)[0, 0]
        return scale * y, scale * cols
    w = whitening_matrix(interference_covariance, noise_power)
    return w @ y, w @ cols

"""
Servicio de barridos Monte Carlo del simulador SM-NOMA.

Recorre la grilla de SNR promediando las tasas de los esquemas SMN y CMN sobre
las realizaciones de canal, simula la BER del sistema SM y persiste los
resultados como CSV con un JSON de metadatos al lado.

El módulo incluye:
    - run_sweep()       : Tasas ergódicas y BER por (esquema, punto de SNR)
    - run_ber()         : BER de índice y de símbolo a un punto de SNR
    - write_csv()       : CSV con formato fijo y escritura atómica
    - read_csv()        : Lectura inversa de write_csv
    - write_metadata()  : Documento JSON de procedencia junto al CSV
    - run_study()       : Familia de barridos por variante (K, M, Nt)
    - find_crossover()  : Puntos donde SMN - CMN cambia de signo

Funcionalidades principales:
    - Reparto de realizaciones en bloques con ProcessPoolExecutor
    - Agregación en orden de realización con math.fsum: el resultado no depende
      del número de procesos
    - Nunca se emiten resultados parciales: el CSV se escribe en un temporal y
      se renombra al final
"""

import csv
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from smnoma.exceptions import BitLengthError, OutputError
from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import AntennaPartition, UserPair
from smnoma.models.results import Scheme, SweepResult, SweepRow
from smnoma.models.signal import SmSymbol
from smnoma.models.system_config import InterferenceModel, SystemConfig, config_digest
from smnoma.services.channel_service import gen_channel, noise_power_mw, tx_power_mw
from smnoma.services.detection_service import (
    build_interference_covariance,
    mrc_detect_index,
    ml_detect,
    whiten,
)
from smnoma.services.modem_service import make_constellation, sm_map, sm_unmap, split_bits, tx_vector
from smnoma.services.noma_service import conventional_sum_rate
from smnoma.services.pairing_service import DEFAULT_EXHAUSTIVE_LIMIT, allocate_antennas, pair_users
from smnoma.services.rate_service import resolve_interference_model, sm_trial_rates, summarize_trials
from smnoma.utils.rng_utils import BITS_STREAM, RngKey, complex_normal

logger = logging.getLogger(__name__)

CSV_HEADER = ('scheme', 'snr_db', 'sum_rate', 'worst_rate', 'index_ber', 'symbol_ber',
              'n_trials', 'seed', 'config_digest')
METADATA_SCHEMA = "smnoma_sweep.v1"
ALL_SCHEMES = (Scheme.SMN, Scheme.CMN)

# Realizaciones por tarea enviada a un proceso
DEFAULT_CHUNK_SIZE = 250


# ============================================================================
# SIMULACIÓN DE UN USO DE CANAL
# ============================================================================

def _bit_errors(sent: str, received: str) -> int:
    return sum(a != b for a, b in zip(sent, received))


def simulate_channel_use(cfg: SystemConfig,
                         channels: ChannelRealization,
                         pairs: Sequence[UserPair],
                         partition: AntennaPartition,
                         snr_db: float,
                         rng: np.random.Generator,
                         noiseless: bool = False) -> Tuple[int, int]:
    """
    Transmite un uso de canal para los K pares y cuenta errores de bit.

    Cada par envía log2(L) + log2(M) bits aleatorios; el usuario de índice
    detecta la antena por MRC y el de símbolo el punto por ML conjunto, ambos
    sobre la señal blanqueada (o con la interferencia cancelada idealmente).

    Note:
        - Con ``noiseless`` cada usuario recibe solo la señal de su grupo y el
          usuario de índice decide por ML conjunto: la hipótesis enviada es la
          única a distancia cero y la BER es exactamente 0 para cualquier
          configuración válida (MRC literal o Nr = 1 incluidos)

    Returns:
        tuple: (errores en bits de índice, errores en bits de símbolo)
    """
    constellation = make_constellation(cfg.qam_order)
    group_power = tx_power_mw(cfg, snr_db) / cfg.n_pairs
    amplitude = math.sqrt(group_power)
    noise = noise_power_mw(cfg)
    n_index = cfg.index_bits
    cancelled = resolve_interference_model(cfg) == InterferenceModel.CANCELLED

    sent, per_group_tx = [], []
    for group, _ in enumerate(pairs):
        bits = ''.join(map(str, rng.integers(0, 2, size=n_index + cfg.symbol_bits)))
        symbol = sm_map(split_bits(bits, cfg.group_size, cfg.qam_order), group, constellation)
        sent.append(bits)
        per_group_tx.append(tx_vector(symbol, partition, cfg.n_tx, amplitude, constellation))
    x = np.sum(per_group_tx, axis=0)

    index_errors = symbol_errors = 0
    for group, pair in enumerate(pairs):
        detected = {}
        for user in pair.users:
            h = channels.per_user[user]
            columns = h[:, list(partition.groups[group])] * amplitude

            if noiseless:
                y, covariance = h @ per_group_tx[group], None
            else:
                y = h @ x + complex_normal(rng, cfg.n_rx, variance=noise)
                if cfg.n_pairs == 1 or cancelled:
                    y = y - h @ (x - per_group_tx[group])
                    covariance = None
                else:
                    covariance = build_interference_covariance(h, partition, group, group_power)
            detected[user] = whiten(y, columns, covariance, noise)

        y_idx, cols_idx = detected[pair.index_user]
        if noiseless:
            antenna = ml_detect(y_idx, cols_idx, constellation).antenna_local
        else:
            antenna = mrc_detect_index(y_idx, cols_idx, cfg.mrc_normalized).antenna_local
        index_errors += _bit_errors(sent[group][:n_index], format(antenna, f'0{n_index}b') if n_index else '')

        y_sym, cols_sym = detected[pair.symbol_user]
        decision = ml_detect(y_sym, cols_sym, constellation)
        received = sm_unmap(SmSymbol(group, decision.antenna_local, decision.point_index),
                            constellation, cfg.group_size)
        symbol_errors += _bit_errors(sent[group][n_index:], received[n_index:])

    return index_errors, symbol_errors


def run_ber(cfg: SystemConfig,
            snr_db: float,
            n_bits: int,
            noiseless: bool = False,
            exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> Tuple[Optional[float], float]:
    """
    BER de los bits de índice (usuario de índice) y de símbolo (usuario de símbolo).

    Cada uso de canal usa una realización nueva; la realización u y sus bits
    dependen solo de (seed, u), así dos puntos de SNR comparten canales y bits.

    Args:
        cfg (SystemConfig): Configuración del experimento
        snr_db (float)    : Punto de SNR (no necesita estar en la grilla)
        n_bits (int)      : Bits totales, múltiplo de K (log2 L + log2 M)
        noiseless (bool)  : Omitir el ruido térmico

    Returns:
        tuple: (index_ber o None si L = 1, symbol_ber)

    Raises:
        BitLengthError: Si n_bits no es múltiplo de la carga por uso
    """
    load = cfg.n_pairs * (cfg.index_bits + cfg.symbol_bits)
    if n_bits < load or n_bits % load != 0:
        raise BitLengthError(load, n_bits)

    n_uses = n_bits // load
    root = RngKey.root(cfg.seed)
    index_errors = symbol_errors = 0
    for use in range(n_uses):
        channels = gen_channel(cfg, use)
        pairs = pair_users(channels, cfg.pairing_mode)
        partition = allocate_antennas(channels, pairs, cfg, exhaustive_limit=exhaustive_limit)
        rng = root.child(BITS_STREAM, use).generator()
        errors = simulate_channel_use(cfg, channels, pairs, partition, snr_db, rng, noiseless)
        index_errors += errors[0]
        symbol_errors += errors[1]

    index_total = n_uses * cfg.n_pairs * cfg.index_bits
    symbol_total = n_uses * cfg.n_pairs * cfg.symbol_bits
    index_ber = index_errors / index_total if index_total else None
    logger.info(f"BER @ {snr_db:g} dB sobre {n_bits} bits: índice {index_ber}, símbolo {symbol_errors / symbol_total:.3e}")
    return index_ber, symbol_errors / symbol_total


# ============================================================================
# BARRIDO
# ============================================================================

def _simulate_chunk(cfg: SystemConfig,
                    schemes: Tuple[str, ...],
                    start: int,
                    stop: int,
                    exhaustive_limit: int) -> Dict[str, np.ndarray]:
    """
    Tarea de un proceso: realizaciones [start, stop) para toda la grilla.

    Returns:
        dict: 'smn' y 'cmn' (T x S x 2K), 'errors' (T x S x 2)
    """
    n_snr, n_users = len(cfg.snr_grid_db), cfg.n_users
    size = stop - start
    smn = np.zeros((size, n_snr, n_users))
    cmn = np.zeros((size, n_snr, n_users))
    errors = np.zeros((size, n_snr, 2), dtype=np.int64)
    root = RngKey.root(cfg.seed)

    for offset, trial in enumerate(range(start, stop)):
        channels = gen_channel(cfg, trial)
        pairs = pair_users(channels, cfg.pairing_mode)
        partition = allocate_antennas(channels, pairs, cfg, exhaustive_limit=exhaustive_limit)
        for s, snr_db in enumerate(cfg.snr_grid_db):
            if Scheme.SMN.value in schemes:
                smn[offset, s] = sm_trial_rates(cfg, trial, s, channels, pairs, partition)
                rng = root.child(BITS_STREAM, trial, s).generator()
                errors[offset, s] = simulate_channel_use(cfg, channels, pairs, partition, snr_db, rng)
            if Scheme.CMN.value in schemes:
                cmn[offset, s] = conventional_sum_rate(channels, cfg, snr_db).per_user_rate
        logger.debug(f"Realización {trial} completada")

    return {'smn': smn, 'cmn': cmn, 'errors': errors}


def _chunks(n_trials: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n_trials)) for start in range(0, n_trials, chunk_size)]


def run_sweep(cfg: SystemConfig,
              schemes: Iterable[Scheme] = ALL_SCHEMES,
              workers: int = 1,
              chunk_size: int = DEFAULT_CHUNK_SIZE,
              exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
              profile: Optional[str] = None) -> SweepResult:
    """
    Barrido completo de la grilla de SNR para los esquemas pedidos.

    Args:
        cfg (SystemConfig)      : Configuración del experimento
        schemes (Iterable)      : Subconjunto de {SMN, CMN}
        workers (int)           : Procesos; 1 evalúa en el proceso actual
        chunk_size (int)        : Realizaciones por tarea
        exhaustive_limit (int)  : Límite de particiones en asignación exhaustiva
        profile (str)           : Perfil registrado en los metadatos

    Returns:
        SweepResult: |schemes| x |snr_grid| filas, idénticas para cualquier ``workers``

    Note:
        - Una falla en cualquier realización se propaga y no se devuelve nada
    """
    selected = tuple(s for s in ALL_SCHEMES if s in set(schemes))
    tags = tuple(s.value for s in selected)
    resolve_interference_model(cfg, warn=True)
    chunks = _chunks(cfg.n_trials, chunk_size)

    logger.info(f"Barrido {'/'.join(tags)}: {cfg.n_trials} realizaciones x "
                f"{len(cfg.snr_grid_db)} puntos de SNR, {workers} proceso(s)")

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, cfg, tags, a, b, exhaustive_limit) for a, b in chunks]
            parts = [f.result() for f in futures]
    else:
        parts = [_simulate_chunk(cfg, tags, a, b, exhaustive_limit) for a, b in chunks]

    merged = {key: np.concatenate([p[key] for p in parts], axis=0) for key in ('smn', 'cmn', 'errors')}
    digest = config_digest(cfg)
    index_total = cfg.n_trials * cfg.n_pairs * cfg.index_bits
    symbol_total = cfg.n_trials * cfg.n_pairs * cfg.symbol_bits

    rows = []
    for scheme in selected:
        for s, snr_db in enumerate(cfg.snr_grid_db):
            per_user, mean_sum, mean_worst, sum_se = summarize_trials(merged[scheme.value.lower()][:, s, :])
            index_ber = symbol_ber = None
            if scheme == Scheme.SMN:
                errors = merged['errors'][:, s, :]
                index_ber = int(errors[:, 0].sum()) / index_total if index_total else None
                symbol_ber = int(errors[:, 1].sum()) / symbol_total
            rows.append(SweepRow(
                scheme         = scheme,
                snr_db         = snr_db,
                sum_rate       = mean_sum,
                worst_rate     = mean_worst,
                index_ber      = index_ber,
                symbol_ber     = symbol_ber,
                n_trials       = cfg.n_trials,
                seed           = cfg.seed,
                config_digest  = digest,
                per_user_rates = per_user,
                sum_rate_se    = sum_se,
            ))
            logger.info(f"{scheme.value} @ {snr_db:g} dB: suma {mean_sum:.4f} (±{sum_se:.4f}), "
                        f"peor usuario {mean_worst:.4f}")

    return SweepResult(rows=tuple(rows), metadata=sweep_metadata(cfg, selected, profile))


def sweep_metadata(cfg: SystemConfig, schemes: Sequence[Scheme], profile: Optional[str]) -> Dict[str, Any]:
    """Procedencia de un barrido: todo lo que no va en las columnas del CSV."""
    return {
        "profile"           : profile,
        "schemes"           : [s.value for s in schemes],
        "snr_reference"     : cfg.snr_reference.value,
        "reference_distance_km": cfg.reference_distance_km,
        "noma_power_split"  : cfg.noma_power_split,
        "cluster_power"     : "equal",
        "rate_split"        : cfg.rate_split.value,
        "interference_model": resolve_interference_model(cfg).value,
        "pairing_mode"      : cfg.pairing_mode.value,
        "allocation_mode"   : cfg.allocation_mode.value,
        "mrc_normalized"    : cfg.mrc_normalized,
        "n_noise_samples"   : cfg.n_noise_samples,
        "seed"              : cfg.seed,
        "config_digest"     : config_digest(cfg),
        "config"            : cfg.to_dict(),
    }


# ============================================================================
# PERSISTENCIA
# ============================================================================

def _fmt(value: Optional[float]) -> str:
    return '' if value is None else format(value, '.9g')


def write_csv(result: SweepResult, path) -> None:
    """
    Escribe el resultado como CSV con encabezado fijo.

    Formato: separador ',', decimal '.', 9 cifras significativas, fin de línea
    '\\n'; BER vacía para CMN. Se escribe a un temporal y se renombra.

    Raises:
        OutputError: Ante cualquier falla de E/S (incluye la ruta)
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    tmp_path = None
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(prefix='.sweep-', suffix='.csv.tmp', dir=directory)
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CSV_HEADER)
            for row in result.rows:
                writer.writerow([
                    row.scheme.value,
                    _fmt(row.snr_db),
                    _fmt(row.sum_rate),
                    _fmt(row.worst_rate),
                    _fmt(row.index_ber),
                    _fmt(row.symbol_ber),
                    row.n_trials,
                    row.seed,
                    row.config_digest,
                ])
        os.replace(tmp_path, path)
    except OSError as e:
        if tmp_path and os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise OutputError(path, str(e))
    logger.info(f"CSV escrito en {path} ({len(result)} filas)")


def read_csv(path) -> SweepResult:
    """Lee un CSV escrito por write_csv; los metadatos del JSON no se cargan."""
    path = os.fspath(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise OutputError(path, f"unexpected header {reader.fieldnames}")
            rows = tuple(
                SweepRow(
                    scheme        = Scheme(r['scheme']),
                    snr_db        = float(r['snr_db']),
                    sum_rate      = float(r['sum_rate']),
                    worst_rate    = float(r['worst_rate']),
                    index_ber     = float(r['index_ber']) if r['index_ber'] else None,
                    symbol_ber    = float(r['symbol_ber']) if r['symbol_ber'] else None,
                    n_trials      = int(r['n_trials']),
                    seed          = int(r['seed']),
                    config_digest = r['config_digest'],
                )
                for r in reader
            )
    except OSError as e:
        raise OutputError(path, str(e))
    return SweepResult(rows=rows)


def metadata_path(csv_path) -> str:
    return f"{os.fspath(csv_path)}.meta.json"


def write_metadata(result: SweepResult, csv_path) -> str:
    """
    Guarda el documento JSON de procedencia junto al CSV.

    Returns:
        str: Ruta del JSON escrito

    Raises:
        OutputError: Si no se puede escribir
    """
    path = metadata_path(csv_path)
    document = {
        "schema"    : METADATA_SCHEMA,
        "csv"       : os.path.basename(os.fspath(csv_path)),
        "rows"      : len(result),
        "sum_rate_se": {f"{r.scheme.value}@{r.snr_db:g}": r.sum_rate_se for r in result.rows},
        "per_user_rates": {f"{r.scheme.value}@{r.snr_db:g}": list(r.per_user_rates) for r in result.rows},
        **result.metadata,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, ensure_ascii=False, indent=2, default=str)
    except OSError as e:
        raise OutputError(path, str(e))
    return path


def load_metadata(csv_path) -> Optional[Dict[str, Any]]:
    """Lee el JSON de procedencia de un CSV (o None si no existe)."""
    path = metadata_path(csv_path)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# ============================================================================
# ESTUDIOS Y CRUCES
# ============================================================================

def variant_config(base: SystemConfig, variant: Mapping[str, int]) -> SystemConfig:
    """Aplica una variante (n_pairs, qam_order, n_tx) repitiendo el patrón de distancias."""
    n_pairs = variant.get('n_pairs', base.n_pairs)
    distances = tuple(base.distances_km[u % len(base.distances_km)] for u in range(2 * n_pairs))
    return base.with_overrides(distances_km=distances, **dict(variant))


def variant_name(cfg: SystemConfig) -> str:
    return f"K{cfg.n_pairs}_M{cfg.qam_order}_Nt{cfg.n_tx}"


def run_study(base_cfg: SystemConfig,
              variants: Sequence[Mapping[str, int]],
              schemes: Iterable[Scheme] = ALL_SCHEMES,
              out_dir: Optional[str] = None,
              workers: int = 1,
              exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
              profile: Optional[str] = None) -> Dict[str, SweepResult]:
    """
    Ejecuta un barrido por variante y, si hay ``out_dir``, escribe un CSV por variante.

    Example:
        >>> run_study(cfg, [{'n_pairs': 4}, {'n_pairs': 2}], out_dir='results')
        {'K4_M64_Nt8': <SweepResult>, 'K2_M64_Nt8': <SweepResult>}
    """
    schemes = tuple(schemes)
    results = {}
    for variant in variants:
        cfg = variant_config(base_cfg, variant)
        name = variant_name(cfg)
        logger.info(f"Estudio: variante {name}")
        result = run_sweep(cfg, schemes, workers=workers, exhaustive_limit=exhaustive_limit, profile=profile)
        if out_dir:
            csv_path = os.path.join(out_dir, f"study_{name}.csv")
            write_csv(result, csv_path)
            write_metadata(result, csv_path)
        results[name] = result
    return results


def find_crossover(result: SweepResult) -> List[float]:
    """
    Puntos de SNR donde la diferencia de tasa suma SMN - CMN cambia de signo.

    Returns:
        List[float]: Cruces por interpolación lineal entre puntos de la grilla;
                     un punto con diferencia exactamente 0 cuenta como cruce
    """
    smn = {r.snr_db: r.sum_rate for r in result.for_scheme(Scheme.SMN)}
    cmn = {r.snr_db: r.sum_rate for r in result.for_scheme(Scheme.CMN)}
    grid = sorted(set(smn) & set(cmn))
    diffs = [smn[s] - cmn[s] for s in grid]

    crossings = [s for s, d in zip(grid, diffs) if d == 0.0]
    for (s0, d0), (s1, d1) in zip(zip(grid, diffs), zip(grid[1:], diffs[1:])):
        if d0 * d1 < 0:
            crossings.append(s0 + (s1 - s0) * d0 / (d0 - d1))
    return sorted(crossings)

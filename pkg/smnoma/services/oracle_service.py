"""
Oráculos independientes y suites de validación del simulador.

Cada oráculo es una reimplementación directa y lenta (bucles explícitos,
enumeración, cuadratura) de una operación del simulador. Las suites comparan
ambas versiones sobre instancias aleatorias reproducibles y se ejecutan desde
``simulate.py validate`` y desde los tests.

El módulo incluye:
    - naive_ml_detect / naive_mrc_detect : Detectores por doble bucle
    - pinv_beams                         : Haces ZF por pseudo-inversa
    - quadrature_mi                      : MI por integración en grilla (Nr = 1)
    - brute_force_allocation             : Enumeración ingenua de particiones
    - naive_sic_rates                    : Fórmulas de SIC escritas de nuevo
    - naive_ber                          : BER extremo a extremo de un par BPSK (K = 1)
    - run_validation()                   : Todas las suites con PASS/FAIL
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import Cluster, UserPair
from smnoma.models.signal import Constellation
from smnoma.models.system_config import AllocationMode, SnrReference, SystemConfig
from smnoma.services.detection_service import ml_detect, mrc_detect_index
from smnoma.services.modem_service import SUPPORTED_ORDERS, make_constellation, sm_map, sm_unmap, split_bits
from smnoma.services.noma_service import sic_rates, zf_beams
from smnoma.services.pairing_service import (
    allocate_antennas,
    exhaustive_pairing,
    pair_users,
    total_similarity,
)
from smnoma.services.rate_service import mi_index_user, mi_symbol_user
from smnoma.services.sweep_service import run_ber
from smnoma.utils.rng_utils import ORACLE_STREAM, RngKey, complex_normal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuiteResult:
    """Resultado de una suite de validación."""
    name  : str
    passed: bool
    detail: str

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


# ============================================================================
# ORÁCULOS
# ============================================================================

def naive_ml_detect(y: np.ndarray, columns: np.ndarray, constellation: Constellation) -> Tuple[int, int]:
    """Doble bucle (i, n) con desigualdad estricta: conserva el primer mínimo."""
    best, best_distance = (0, 0), math.inf
    for i in range(columns.shape[1]):
        for n in range(constellation.order):
            distance = 0.0
            for r in range(columns.shape[0]):
                diff = y[r] - columns[r, i] * constellation.points[n]
                distance += diff.real ** 2 + diff.imag ** 2
            if distance < best_distance:
                best, best_distance = (i, n), distance
    return best


def naive_mrc_detect(y: np.ndarray, columns: np.ndarray, normalized: bool = False) -> int:
    best, best_score = 0, -math.inf
    for i in range(columns.shape[1]):
        score = abs(np.vdot(columns[:, i], y))
        if normalized:
            score /= np.linalg.norm(columns[:, i])
        if score > best_score:
            best, best_score = i, score
    return best


def pinv_beams(effective_channels: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Columnas de la pseudo-inversa de Moore-Penrose, normalizadas."""
    pinv = np.linalg.pinv(np.vstack([np.reshape(h, (1, -1)) for h in effective_channels]))
    return [pinv[:, k] / np.linalg.norm(pinv[:, k]) for k in range(pinv.shape[1])]


def quadrature_mi(channel: Sequence[complex],
                  constellation: Constellation,
                  noise_power: float,
                  target: str = 'index',
                  grid_points: int = 401) -> float:
    """
    Información mutua por integración en una grilla del plano complejo (Nr = 1).

    Args:
        channel (Sequence[complex]): Coeficiente escalar h_a de cada antena
        constellation              : Alfabeto del símbolo
        noise_power (float)        : Varianza del ruido
        target (str)               : 'index' para I(A;Y) o 'symbol' para I(X;Y)
        grid_points (int)          : Puntos por eje

    Returns:
        float: MI en bits
    """
    h = np.asarray(channel, dtype=complex)
    means = h[:, None] * constellation.points[None, :]             # L x M
    radius = np.max(np.abs(means)) + 8.0 * math.sqrt(noise_power)
    axis = np.linspace(-radius, radius, grid_points)
    step = axis[1] - axis[0]
    y = axis[:, None] + 1j * axis[None, :]

    densities = np.exp(-np.abs(y[None, None] - means[:, :, None, None]) ** 2 / noise_power) / (math.pi * noise_power)
    p_y = densities.mean(axis=(0, 1))
    conditional = densities.mean(axis=1) if target == 'index' else densities.mean(axis=0)

    total = 0.0
    for p_cond in conditional:
        ratio = np.where(p_cond > 0, p_cond / np.where(p_y > 0, p_y, 1.0), 1.0)
        total += np.sum(p_cond * np.log2(ratio)) * step * step
    return float(total / conditional.shape[0])


def _balanced_partitions(n_tx: int, n_groups: int):
    size = n_tx // n_groups
    for encoding in itertools.product(range(n_groups), repeat=n_tx):
        if all(encoding.count(g) == size for g in range(n_groups)):
            yield encoding


def brute_force_allocation(channels: ChannelRealization,
                           pairs: Sequence[UserPair],
                           n_tx: int) -> Tuple[Tuple[int, ...], float]:
    """Mejor codificación antena -> grupo por enumeración de todas las asignaciones."""
    n_groups = len(pairs)
    energy = np.mean([np.sum(np.abs(h) ** 2) / n_tx for h in channels.per_user])
    best, best_value = None, -math.inf
    for encoding in _balanced_partitions(n_tx, n_groups):
        value = 0.0
        for k, pair in enumerate(pairs):
            antennas = [a for a in range(n_tx) if encoding[a] == k]
            stacked = np.vstack([channels.per_user[pair.index_user][:, antennas],
                                 channels.per_user[pair.symbol_user][:, antennas]])
            gram = np.eye(len(antennas)) + stacked.conj().T @ stacked / energy
            value += math.log(abs(np.linalg.det(gram)))
        if value > best_value:
            best, best_value = encoding, value
    return best, best_value


def naive_sic_rates(power_split: float, g_strong: float, g_weak: float,
                    power: float, noise: float) -> Tuple[float, float]:
    signal_weak = power_split * power * g_weak
    interference = (1 - power_split) * power * g_weak + noise
    strong = math.log(1 + (1 - power_split) * power * g_strong / noise) / math.log(2)
    return strong, math.log(1 + signal_weak / interference) / math.log(2)


def _rayleigh(rng: np.random.Generator, shape) -> np.ndarray:
    return complex_normal(rng, shape)


def _naive_pathloss_db(distance_km: float) -> float:
    return 128.1 + 37.6 * math.log10(distance_km)


def naive_ber(cfg: SystemConfig, snr_db: float, n_uses: int, rng: np.random.Generator) -> Tuple[float, float]:
    """
    BER de índice y de símbolo de un único par BPSK escrita con bucles explícitos.

    Trabaja en unidades de ruido unitario: la SNR recibida del usuario u es
    10^(snr/10) veces su ganancia relativa a la referencia. Genera sus propios
    canales, bits y ruido, así que solo coincide en distribución con run_ber.

    Returns:
        tuple: (BER de índice, BER de símbolo)

    Raises:
        ValueError: Si la configuración no es K = 1 con BPSK y Nt >= 2
    """
    if cfg.n_pairs != 1 or cfg.qam_order != 2 or cfg.n_tx < 2:
        raise ValueError("naive_ber only covers a single BPSK pair with Nt >= 2")

    reference = _naive_pathloss_db(cfg.reference_distance_km) if cfg.snr_reference == SnrReference.RECEIVE else 0.0
    gains = [10.0 ** ((reference - _naive_pathloss_db(d)) / 10.0) for d in cfg.distances_km]
    amplitude = math.sqrt(10.0 ** (snr_db / 10.0))
    n_tx, n_rx = cfg.n_tx, cfg.n_rx
    index_bits = int(math.log2(n_tx))

    index_errors = symbol_errors = 0
    for _ in range(n_uses):
        h = [math.sqrt(g) * _rayleigh(rng, (n_rx, n_tx)) for g in gains]
        norms = [math.sqrt(sum(abs(v) ** 2 for v in m.flat)) for m in h]
        index_user, symbol_user = (0, 1) if norms[0] < norms[1] else (1, 0)

        antenna = int(rng.integers(n_tx))
        bit = int(rng.integers(2))
        x = 1.0 if bit == 0 else -1.0

        y = [amplitude * h[index_user][r, antenna] * x + _rayleigh(rng, 1)[0] for r in range(n_rx)]
        best_i, best_score = 0, -1.0
        for i in range(n_tx):
            score = abs(sum(h[index_user][r, i].conjugate() * y[r] for r in range(n_rx)))
            if cfg.mrc_normalized:
                score /= math.sqrt(sum(abs(h[index_user][r, i]) ** 2 for r in range(n_rx)))
            if score > best_score:
                best_i, best_score = i, score
        index_errors += bin(best_i ^ antenna).count("1")

        y = [amplitude * h[symbol_user][r, antenna] * x + _rayleigh(rng, 1)[0] for r in range(n_rx)]
        best_x, best_distance = None, math.inf
        for i in range(n_tx):
            for candidate in (1.0, -1.0):
                distance = sum(abs(y[r] - amplitude * h[symbol_user][r, i] * candidate) ** 2 for r in range(n_rx))
                if distance < best_distance:
                    best_x, best_distance = candidate, distance
        symbol_errors += best_x != x

    return index_errors / (n_uses * index_bits), symbol_errors / n_uses


# ============================================================================
# SUITES
# ============================================================================

def suite_ml_detector(key: RngKey, n_instances: int = 10_000) -> SuiteResult:
    rng = key.generator()
    mismatches = 0
    for _ in range(n_instances):
        constellation = make_constellation(int(rng.choice([2, 4, 16])))
        columns = _rayleigh(rng, (2, int(rng.choice([1, 2, 4]))))
        y = columns[:, rng.integers(columns.shape[1])] * constellation.points[rng.integers(constellation.order)]
        y = y + _rayleigh(rng, 2) * 0.5
        result = ml_detect(y, columns, constellation)
        if (result.antenna_local, result.point_index) != naive_ml_detect(y, columns, constellation):
            mismatches += 1
    return SuiteResult("ml_detect vs enumeración", mismatches == 0, f"{mismatches}/{n_instances} discrepancias")


def suite_mrc_detector(key: RngKey, n_instances: int = 10_000) -> SuiteResult:
    rng = key.generator()
    constellation = make_constellation(4)
    mismatches = 0
    for i in range(n_instances):
        columns = _rayleigh(rng, (2, 2))
        noise_std = 10.0 ** (-(i % 5) * 5.0 / 20.0)
        y = columns[:, rng.integers(2)] * constellation.points[rng.integers(4)] + noise_std * _rayleigh(rng, 2)
        for normalized in (False, True):
            if mrc_detect_index(y, columns, normalized).antenna_local != naive_mrc_detect(y, columns, normalized):
                mismatches += 1
    return SuiteResult("mrc_detect_index vs detector ingenuo", mismatches == 0,
                       f"{mismatches}/{2 * n_instances} discrepancias")


def suite_zf_beams(key: RngKey, n_instances: int = 1_000, n_tx: int = 8) -> SuiteResult:
    rng = key.generator()
    worst_residual, worst_oracle = 0.0, 0.0
    for i in range(n_instances):
        n_clusters = (2, 4)[i % 2]
        channels = [_rayleigh(rng, n_tx) for _ in range(n_clusters)]
        beams = zf_beams(channels)
        for j, h in enumerate(channels):
            for k, w in enumerate(beams):
                if j != k:
                    worst_residual = max(worst_residual, abs(h @ w))
        for w, v in zip(beams, pinv_beams(channels)):
            worst_oracle = max(worst_oracle, 1.0 - abs(np.vdot(v, w)))
    passed = worst_residual <= 1e-10 and worst_oracle <= 1e-9
    return SuiteResult("zf_beams vs pseudo-inversa", passed,
                       f"residuo máx {worst_residual:.2e}, desvío máx {worst_oracle:.2e}")


def suite_mi_quadrature(key: RngKey, n_samples: int = 50_000, tolerance: float = 0.02) -> SuiteResult:
    rng = key.generator()
    worst = 0.0
    for order in (2, 4):
        constellation = make_constellation(order)
        for n_ant in (1, 2):
            for c in range(5):
                h = _rayleigh(rng, n_ant)
                for s, snr_db in enumerate((0.0, 5.0, 10.0)):
                    noise = 10.0 ** (-snr_db / 10.0)
                    sub = key.child(order, n_ant, c, s)
                    cols = h.reshape(1, -1)
                    if n_ant > 1:
                        mc = mi_index_user(cols, constellation, noise, n_samples, sub.child(0)).value
                        worst = max(worst, abs(mc - quadrature_mi(h, constellation, noise, 'index')))
                    mc = mi_symbol_user(cols, constellation, noise, n_samples, sub.child(1)).value
                    worst = max(worst, abs(mc - quadrature_mi(h, constellation, noise, 'symbol')))
    return SuiteResult("MI Monte Carlo vs cuadratura", worst <= tolerance, f"desvío máx {worst:.4f} bits")


def suite_sic_rates(key: RngKey, n_draws: int = 100_000) -> SuiteResult:
    rng = key.generator()
    cluster = Cluster(strong_user=0, weak_user=1, beam=np.ones(1), power_split=0.8)
    strong, weak = sic_rates(cluster, (4.0, 1.0), 1.0, 1.0)
    spot = (math.isclose(weak, math.log2(1 + 0.8 / 1.2), rel_tol=1e-12)
            and math.isclose(strong, math.log2(1.8), rel_tol=1e-12))

    ceiling_violations = 0
    for _ in range(n_draws // 1000):
        betas = rng.uniform(0.01, 0.99, size=1000)
        gains = rng.exponential(size=(1000, 2)) * 10.0 ** rng.uniform(-3, 6, size=(1000, 1))
        for beta, (gs, gw) in zip(betas, gains):
            c = Cluster(strong_user=0, weak_user=1, beam=np.ones(1), power_split=float(beta))
            _, w = sic_rates(c, (float(gs), float(gw)), 1.0, 1.0)
            if w > math.log2(1 + beta / (1 - beta)) + 1e-12:
                ceiling_violations += 1
            if not np.allclose(naive_sic_rates(float(beta), gs, gw, 1.0, 1.0),
                               sic_rates(c, (float(gs), float(gw)), 1.0, 1.0), rtol=1e-12):
                ceiling_violations += 1
    return SuiteResult("sic_rates fórmulas y techo", spot and ceiling_violations == 0,
                       f"puntos de control {'ok' if spot else 'fallidos'}, {ceiling_violations} violaciones")


def suite_modem_round_trip(max_load: int = 4096) -> SuiteResult:
    failures = checked = 0
    group_size = 1
    while group_size * 2 <= max_load:
        for order in SUPPORTED_ORDERS:
            if group_size * order > max_load:
                continue
            constellation = make_constellation(order)
            width = int(math.log2(group_size)) + int(math.log2(order))
            for value in range(group_size * order):
                bits = format(value, f'0{width}b')
                symbol = sm_map(split_bits(bits, group_size, order), 0, constellation)
                checked += 1
                if sm_unmap(symbol, constellation, group_size) != bits:
                    failures += 1
        group_size *= 2
    return SuiteResult("modem ida y vuelta", failures == 0, f"{failures}/{checked} fallas")


def _random_realization(rng: np.random.Generator, n_users: int, n_rx: int, n_tx: int) -> ChannelRealization:
    return ChannelRealization(per_user=tuple(_rayleigh(rng, (n_rx, n_tx)) for _ in range(n_users)), trial_index=0)


def suite_allocation(key: RngKey, n_instances: int = 50) -> SuiteResult:
    rng = key.generator()
    cfg = SystemConfig(n_tx=4, n_rx=2, n_pairs=2, qam_order=4, bandwidth_hz=1.0, noise_density_dbm_hz=0.0,
                       distances_km=(0.1,) * 4, snr_grid_db=(0.0,), n_trials=1, seed=0)
    mismatches = 0
    for _ in range(n_instances):
        channels = _random_realization(rng, 4, 2, 4)
        pairs = pair_users(channels)
        partition = allocate_antennas(channels, pairs, cfg, AllocationMode.EXHAUSTIVE)
        encoding, _ = brute_force_allocation(channels, pairs, 4)
        if partition.encoding() != encoding:
            mismatches += 1
    return SuiteResult("asignación exhaustiva vs fuerza bruta", mismatches == 0,
                       f"{mismatches}/{n_instances} discrepancias")


def suite_pairing(key: RngKey, n_instances: int = 1_000) -> SuiteResult:
    rng = key.generator()
    ratios = []
    for _ in range(n_instances):
        channels = _random_realization(rng, 6, 2, 4)
        optimum, _ = exhaustive_pairing(channels)
        ratios.append(total_similarity(pair_users(channels)) / optimum)
    mean_ratio = math.fsum(ratios) / n_instances
    return SuiteResult("emparejamiento voraz vs óptimo", mean_ratio >= 0.9,
                       f"cociente medio {mean_ratio:.3f}, mínimo {min(ratios):.3f}")


def suite_ber(key: RngKey, n_uses: int = 4_000) -> SuiteResult:
    """run_ber contra naive_ber (L = 2, BPSK, K = 1) dentro de una banda binomial de 4 sigmas."""
    rng = key.generator()
    failures = checks = 0
    for n_rx in (1, 2):
        cfg = SystemConfig(n_tx=2, n_rx=n_rx, n_pairs=1, qam_order=2, bandwidth_hz=4.32e6,
                           noise_density_dbm_hz=-169.0, distances_km=(0.15, 0.1), snr_grid_db=(0.0,),
                           n_trials=1, seed=int(rng.integers(2 ** 31)))
        for snr_db in (-5.0, 0.0, 5.0):
            simulated = run_ber(cfg, snr_db, 2 * n_uses)
            naive = naive_ber(cfg, snr_db, n_uses, rng)
            for p, q in zip(simulated, naive):
                pooled = (p + q) / 2
                checks += 1
                if abs(p - q) > 4.0 * math.sqrt(max(pooled * (1 - pooled), 1e-4) * 2 / n_uses):
                    failures += 1
    return SuiteResult("BER extremo a extremo vs bucle ingenuo", failures == 0,
                       f"{failures}/{checks} puntos fuera de la banda binomial")


SUITES: Dict[str, Callable[[RngKey], SuiteResult]] = {
    'ml_detect'   : suite_ml_detector,
    'mrc_detect'  : suite_mrc_detector,
    'zf_beams'    : suite_zf_beams,
    'mi'          : suite_mi_quadrature,
    'sic_rates'   : suite_sic_rates,
    'modem'       : lambda key: suite_modem_round_trip(),
    'allocation'  : suite_allocation,
    'pairing'     : suite_pairing,
    'ber'         : suite_ber,
}


def run_validation(seed: int = 0, only: Optional[Sequence[str]] = None) -> List[SuiteResult]:
    """
    Ejecuta las suites de oráculos.

    Args:
        seed (int)             : Semilla de las instancias aleatorias
        only (Sequence[str])   : Subconjunto de nombres de SUITES

    Returns:
        List[SuiteResult]: Una entrada por suite, en orden de registro
    """
    root = RngKey.root(seed).child(ORACLE_STREAM)
    results = []
    for i, (name, suite) in enumerate(SUITES.items()):
        if only and name not in only:
            continue
        result = suite(root.child(i))
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, str(result))
        results.append(result)
    return results

"""
Punto de entrada de línea de comandos del simulador SM-NOMA.

Subcomandos:
    - sweep    : Barrido de tasas (y BER del sistema SM) sobre la grilla de SNR
    - ber      : BER de índice y de símbolo a un punto de SNR
    - study    : Un barrido por variante (n_pairs, qam_order, n_tx), un CSV por variante
    - validate : Suites de oráculos con PASS/FAIL por suite

Funcionalidades principales:
    - Perfil de entorno con --profile o SMNOMA_PROFILE (desk, paper, testing)
    - Configuración desde archivo ``clave = valor`` (--config) o escenario de referencia
    - Reemplazo de cualquier campo con --<campo> valor (p. ej. --qam-order 16)
    - Códigos de salida: 0 éxito, 2 error del simulador, 1 error inesperado o suite fallida

Usage:
    python simulate.py sweep --config experiments/paper.cfg --schemes smn,cmn --out results/paper.csv
    python simulate.py ber --snr-db 20 --bits 96000
    python simulate.py validate
"""

import argparse
import dataclasses
import logging
import os
import sys
from typing import Dict, List

from decouple import config

from smnoma import create_simulator
from smnoma.exceptions import InvalidConfigError, SimulationError
from smnoma.models.results import Scheme
from smnoma.models.system_config import SystemConfig, load_config, serialize

logger = logging.getLogger('smnoma.cli')

DEFAULT_VARIANTS = "n_pairs=4;n_pairs=2"


def _field_flag(name: str) -> str:
    return '--' + name.replace('_', '-')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='simulate.py',
                                     description='Simulador Monte Carlo SM-NOMA vs NOMA convencional')
    parser.add_argument('--profile', default=config('SMNOMA_PROFILE', default='default'),
                        choices=['desk', 'paper', 'testing', 'default'],
                        help='Perfil de entorno (procesos, realizaciones, logging)')
    sub = parser.add_subparsers(dest='command', required=True)

    def _experiment_args(p):
        p.add_argument('--config', metavar='PATH', help='Archivo clave = valor del experimento')
        p.add_argument('--trials', type=int, help='Realizaciones por punto de SNR')
        p.add_argument('--seed', type=int, help='Semilla de 64 bits')
        for f in dataclasses.fields(SystemConfig):
            if f.name not in ('n_trials', 'seed'):
                p.add_argument(_field_flag(f.name), dest=f'field_{f.name}', metavar='VALUE',
                               help=f'Reemplaza {f.name}')

    p_sweep = sub.add_parser('sweep', help='Barrido de tasas ergódicas')
    _experiment_args(p_sweep)
    p_sweep.add_argument('--schemes', default='smn,cmn', help='Esquemas separados por coma')
    p_sweep.add_argument('--out', metavar='CSV', help='Ruta del CSV de salida')
    p_sweep.add_argument('--workers', type=int, help='Procesos (por defecto SMNOMA_WORKERS)')

    p_ber = sub.add_parser('ber', help='BER de índice y de símbolo')
    _experiment_args(p_ber)
    p_ber.add_argument('--snr-db', type=float, required=True)
    p_ber.add_argument('--bits', type=int, required=True)

    p_study = sub.add_parser('study', help='Familia de barridos por variante')
    _experiment_args(p_study)
    p_study.add_argument('--schemes', default='smn,cmn')
    p_study.add_argument('--variants', default=DEFAULT_VARIANTS,
                         help='Variantes separadas por ";", campos por "," (p. ej. "n_pairs=4,qam_order=16")')
    p_study.add_argument('--out-dir', metavar='DIR')

    p_validate = sub.add_parser('validate', help='Suites de oráculos')
    p_validate.add_argument('--seed', type=int, default=0)
    p_validate.add_argument('--only', help='Suites separadas por coma')
    return parser


def parse_schemes(text: str) -> List[Scheme]:
    try:
        return [Scheme(s.strip().upper()) for s in text.split(',') if s.strip()]
    except ValueError:
        raise InvalidConfigError(f"schemes must be a subset of smn,cmn (got {text!r})")


def parse_variants(text: str) -> List[Dict[str, int]]:
    variants = []
    for chunk in text.split(';'):
        if not chunk.strip():
            continue
        variants.append({k.strip(): int(v) for k, v in (item.split('=') for item in chunk.split(','))})
    return variants


def experiment_config(simulator, args) -> SystemConfig:
    """Configuración base (archivo o referencia) con los reemplazos de la línea de comandos."""
    cfg = simulator.load(args.config) if args.config else simulator.load()
    overrides = {name[len('field_'):]: value for name, value in vars(args).items()
                 if name.startswith('field_') and value is not None}
    if args.trials is not None:
        overrides['n_trials'] = str(args.trials)
    if args.seed is not None:
        overrides['seed'] = str(args.seed)
    if not overrides:
        return cfg
    document = serialize(cfg)
    document.update(overrides)
    return load_config(document)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    simulator = create_simulator(args.profile)

    if args.command == 'validate':
        only = [s.strip() for s in args.only.split(',')] if args.only else None
        results = simulator.validate(args.seed, only)
        for result in results:
            print(result)
        return 0 if all(r.passed for r in results) else 1

    cfg = experiment_config(simulator, args)

    if args.command == 'sweep':
        out = args.out or os.path.join(simulator.settings.OUTPUT_DIR, 'sweep.csv')
        result = simulator.sweep(cfg, parse_schemes(args.schemes), out=out, workers=args.workers)
        crossings = simulator.crossovers(result)
        print(f"{len(result)} filas escritas en {out}")
        if crossings:
            print("Cruces SMN/CMN (dB): " + ", ".join(f"{c:.2f}" for c in crossings))
    elif args.command == 'ber':
        index_ber, symbol_ber = simulator.ber(cfg, args.snr_db, args.bits)
        print(f"index_ber={'' if index_ber is None else format(index_ber, '.9g')} "
              f"symbol_ber={symbol_ber:.9g}")
    elif args.command == 'study':
        results = simulator.study(cfg, parse_variants(args.variants), parse_schemes(args.schemes), args.out_dir)
        for name, result in results.items():
            crossings = simulator.crossovers(result)
            print(f"{name}: {len(result)} filas, cruces {[round(c, 2) for c in crossings]}")
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except SimulationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("Error inesperado")
        print(f"error inesperado: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())

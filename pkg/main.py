import argparse
import atexit
import signal
import sys
import warnings

from core.config_manager import config_manager
from core.errors import CapWarning, SopMonitorError

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INTERRUPTED = 130

# flag dest -> config key
FLAG_KEYS = {
    'seed': 'run.seed',
    'workers': 'run.workers',
    'output': 'run.output',
    'kind': 'chart.kind',
    'lam': 'chart.lambda',
    'limit': 'chart.limit',
    'center': 'chart.center',
    'm': 'grid.m',
    'n': 'grid.n',
    'replications': 'run.replications',
    'cap': 'run.cap',
    'target_arl': 'run.target_arl',
    'rel_tol': 'run.rel_tol',
    'max_evals': 'run.max_evals',
    'jitter_scale': 'run.jitter_scale',
    'noise_runs': 'run.noise_runs',
    'frames': 'run.frames',
    'input': 'run.input',
    'pool': 'pool.frames',
    'pool_values': 'pool.values',
    'plot': 'run.plot',
}


def signal_handler(signum, frame):
    """Handle system signals gracefully"""
    raise KeyboardInterrupt


def cleanup_on_exit():
    """Final cleanup on exit"""
    import gc
    gc.collect()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='TOML or JSON run configuration')
    common.add_argument('--set', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help='override any configuration value (repeatable)')
    common.add_argument('--seed', type=int, help='master seed for all random streams')
    common.add_argument('--workers', type=int, help='worker processes for replications')
    common.add_argument('--output', help='output file (stdout if omitted)')
    common.add_argument('--log-level', help='console log level')

    chart = argparse.ArgumentParser(add_help=False)
    chart.add_argument('--kind', help='chart kind, e.g. tau_tilde, acf, tau_tilde_delayed:2,2, acf_bp:1')
    chart.add_argument('--lambda', dest='lam', type=float, help='EWMA smoothing parameter in (0, 1]')
    chart.add_argument('--limit', type=float, help='control limit')
    chart.add_argument('--center', type=float, help='chart center')
    chart.add_argument('--m', type=int, help='grid rows minus one')
    chart.add_argument('--n', type=int, help='grid columns minus one')
    chart.add_argument('--jitter-scale', type=float, help='jitter count frames with scale * U(0,1)')

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument('--replications', type=int, help='Monte-Carlo replications R')
    sim.add_argument('--cap', type=int, help='run-length cap')

    parser = argparse.ArgumentParser(prog='sop-monitor',
                                     description='Nonparametric monitoring of lattice data with spatial ordinal patterns')
    sub = parser.add_subparsers(dest='command', required=True)

    monitor = sub.add_parser('monitor', parents=[common, chart], help='run a chart over a frame stream')
    monitor.add_argument('--input', help='frame file (CSV t,s1,s2,y or NDJSON)')
    monitor.add_argument('--noise-runs', type=int, help='jitter repetitions for count frames')
    monitor.add_argument('--frames', type=int, help='frames to simulate when monitoring a dgp')
    monitor.add_argument('--plot', help='also render the chart to this PNG')

    calibrate = sub.add_parser('calibrate', parents=[common, chart, sim], help='find the control limit for a target ARL')
    calibrate.add_argument('--target-arl', type=float, help='in-control ARL target')
    calibrate.add_argument('--rel-tol', type=float, help='relative ARL tolerance')
    calibrate.add_argument('--max-evals', type=int, help='limit evaluations before giving up')
    calibrate.add_argument('--pool', help='Phase-I frame file for bootstrap calibration')
    calibrate.add_argument('--pool-values', help='file of Phase-I statistics, one per line')

    sub.add_parser('arl', parents=[common, chart, sim], help='estimate the ARL at a given limit')

    simulate = sub.add_parser('simulate', parents=[common, chart], help='write simulated frames')
    simulate.add_argument('--frames', type=int, help='number of frames T')

    history = sub.add_parser('history', parents=[common], help='show stored experiment results')
    history.add_argument('--last', type=int, default=10, help='rows per table')
    return parser


def configure(args: argparse.Namespace):
    """Layer config file, --set overrides and named flags, in that order"""
    config_manager.config_file = None
    config_manager.reset()
    if args.config:
        config_manager.load_file(args.config)
    for assignment in args.set:
        config_manager.apply_override(assignment)
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            config_manager.set(key, value)

    from core.logger import sop_logger
    from core.results_store import results_store
    level = args.log_level or config_manager.get('logging.console_level')
    if level:
        sop_logger.set_console_level(level)
    results_store.use_path(config_manager.get('store.path', 'data/results.db'))


def run_command(args: argparse.Namespace):
    from cli import commands

    if args.command == 'history':
        return commands.cmd_history(args.last, config_manager.get('run.output'))

    run = commands.RunConfig.from_config()
    handler = {
        'monitor': commands.cmd_monitor,
        'calibrate': commands.cmd_calibrate,
        'arl': commands.cmd_arl,
        'simulate': commands.cmd_simulate,
    }[args.command]
    return handler(run)


def main(argv=None) -> int:
    # Register cleanup handlers
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)
    atexit.register(cleanup_on_exit)

    args = build_parser().parse_args(argv)
    from core.logger import sop_logger

    with warnings.catch_warnings():
        warnings.simplefilter('always', CapWarning)
        try:
            configure(args)
            run_command(args)
            return EXIT_OK
        except SopMonitorError as e:
            sop_logger.error(f"{type(e).__name__}: {e}")
            print(f"[ERROR] {e}", file=sys.stderr)
            return e.exit_code
        except KeyboardInterrupt:
            print("[INFO] Interrupted", file=sys.stderr)
            return EXIT_INTERRUPTED
        except Exception as e:
            sop_logger.error(f"Unexpected error: {e}")
            print(f"[ERROR] Unexpected error: {e}", file=sys.stderr)
            return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

"""
Command-line interface for semtree.

Subcommands: train, eval, export, equiv-check, gradcheck, bench. Machine outputs are JSON;
progress logging goes to standard error.

Exit codes: 0 success, 1 failure, 2 config/argument error, 3 corrupt checkpoint,
4 missing standardizer for ``export --destandardize``.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .bench import BenchSpec, any_failed, default_bench_spec, run_bench, write_report
from .codecs.codec import CheckpointCodec
from .core.tree import DecisionTree
from .exceptions import (
    CheckpointCorruption,
    ConfigError,
    InvalidArgument,
    MissingStandardizer,
    SemTreeError,
)
from .network.gradcheck import DEFAULT_TOLERANCE, run_gradcheck
from .network.semnet import boundary_points, check_equivalence
from .training.aggregate import run_seeds
from .training.trainer import evaluate_splits, prepare_dataset
from .types.descriptors import RunConfig
from .types.enums import TaskType

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_CORRUPT = 3
EXIT_NO_STANDARDIZER = 4

SAMPLE_BOX = 3.0


def _parse_seeds(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(',') if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list '{text}'") from None


def _emit(data: Dict[str, Any]) -> None:
    print(json.dumps(data, sort_keys=True, indent=2))


def load_config(path: str) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    return RunConfig.from_dict(data)


def _seed_override(args: argparse.Namespace) -> Optional[List[int]]:
    if args.seeds:
        return args.seeds
    if args.seed is not None:
        return [args.seed]
    return None


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    seeds = _seed_override(args)
    if seeds is not None:
        config = config.with_seeds(seeds)
    out_dir = Path(args.out_dir)
    aggregate = run_seeds(config, out_dir=out_dir, max_workers=args.threads)
    print(f"{config.dataset} (height {config.height}): {aggregate.metric_name} {aggregate.format()}"
          f" over {len(aggregate.metrics)} seed(s); artifacts in {out_dir}")
    if aggregate.partial:
        print(f"failed seeds: {list(aggregate.failed_seeds)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoint = CheckpointCodec().load_checkpoint(args.checkpoint)
    config = load_config(args.config)
    if checkpoint.config_hash is not None and checkpoint.config_hash != config.config_hash():
        raise ConfigError(
            f"Config hash {config.config_hash()} does not match checkpoint {checkpoint.config_hash}",
            key='config_hash',
        )
    seed = checkpoint.seed if checkpoint.seed is not None else config.seeds[0]
    dataset = prepare_dataset(config, seed)
    val_metric, test_metric = evaluate_splits(checkpoint.net.decode(), dataset)
    _emit({
        'config_hash': config.config_hash(),
        'seed': seed,
        'metric': 'accuracy' if config.task is TaskType.CLASSIFICATION else 'rmse',
        'val_metric': val_metric,
        'test_metric': test_metric,
    })
    return EXIT_OK


def destandardized_tree(tree: DecisionTree, standardizer) -> DecisionTree:
    params = tree.params.destandardize(standardizer.means, standardizer.stds)
    payloads = tree.payloads.destandardize(standardizer.means, standardizer.stds,
                                           standardizer.target_means, standardizer.target_stds)
    return DecisionTree(tree.structure, params, payloads)


def cmd_export(args: argparse.Namespace) -> int:
    codec = CheckpointCodec(indent=2)
    checkpoint = codec.load_checkpoint(args.checkpoint)
    tree = checkpoint.net.decode()
    if args.destandardize:
        if checkpoint.standardizer is None:
            raise MissingStandardizer(f"{args.checkpoint} carries no standardizer dump")
        tree = destandardized_tree(tree, checkpoint.standardizer)
    meta = {'config_hash': checkpoint.config_hash, 'seed': checkpoint.seed,
            'destandardized': args.destandardize}
    if args.output:
        codec.save_tree(args.output, tree, **meta)
        print(f"wrote {args.output}")
    else:
        _emit(codec.encode_tree(tree, **meta))
    return EXIT_OK


def cmd_equiv_check(args: argparse.Namespace) -> int:
    codec = CheckpointCodec()
    checkpoint = codec.load_checkpoint(args.checkpoint)
    net = checkpoint.net
    tree = codec.load_tree(args.tree).tree if args.tree else net.decode()
    if tree.num_features != net.num_features:
        raise InvalidArgument(f"Tree expects {tree.num_features} features, network {net.num_features}")
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    uniform = rng.uniform(-SAMPLE_BOX, SAMPLE_BOX, size=(args.samples, net.num_features))
    boundary = boundary_points(net.decode().params, rng, box=SAMPLE_BOX)
    inputs = np.vstack([uniform, boundary])
    mismatches = check_equivalence(net, tree, inputs)
    _emit({'samples': int(uniform.shape[0]), 'boundary_points': int(boundary.shape[0]),
           'mismatches': mismatches})
    return EXIT_OK if mismatches == 0 else EXIT_FAILURE


def cmd_gradcheck(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ConfigError(f"--trials must be >= 1, got {args.trials}", key='trials')
    summary = run_gradcheck(TaskType.parse(args.task), args.trials,
                            args.seed if args.seed is not None else 0)
    result = summary.to_dict()
    result['tolerance'] = DEFAULT_TOLERANCE
    result['passed'] = summary.passed()
    if summary.by_definition:
        result['ste_paths'] = {name: 'by-definition' for name in summary.by_definition}
    _emit(result)
    return EXIT_OK if summary.passed() else EXIT_FAILURE


def cmd_bench(args: argparse.Namespace) -> int:
    spec = BenchSpec.load(args.spec) if args.spec else default_bench_spec()
    out_dir = Path(args.out_dir)
    outcomes = run_bench(spec, out_dir, threads=args.threads, reuse=args.reuse)
    paths = write_report(outcomes, out_dir)
    print(paths['markdown'].read_text(encoding='utf-8'), end='')
    return EXIT_FAILURE if any_failed(outcomes) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Single seed')
    common.add_argument('--seeds', type=_parse_seeds, default=None,
                        help='Comma-separated seeds; overrides the config')
    common.add_argument('--out-dir', default='runs', help='Directory for artifacts')
    common.add_argument('--threads', type=int, default=1, help='Parallel seeds / bench rows')
    common.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')

    parser = argparse.ArgumentParser(prog='semtree',
                                     description='Train oblique decision trees by gradient descent')
    sub = parser.add_subparsers(dest='command', required=True)

    train = sub.add_parser('train', parents=[common], help='Train over seeds and write artifacts')
    train.add_argument('config', help='Run config JSON')
    train.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser('eval', parents=[common], help='Evaluate a checkpoint')
    evaluate.add_argument('checkpoint')
    evaluate.add_argument('--config', required=True, help='Run config JSON used for training')
    evaluate.set_defaults(handler=cmd_eval)

    export = sub.add_parser('export', parents=[common], help='Decode a checkpoint to tree JSON')
    export.add_argument('checkpoint')
    export.add_argument('--destandardize', action='store_true',
                        help='Rewrite hyperplanes and regressors for raw feature units')
    export.add_argument('--output', default=None, help='Output file (default: stdout)')
    export.set_defaults(handler=cmd_export)

    equiv = sub.add_parser('equiv-check', parents=[common],
                           help='Compare network and tree leaf-for-leaf')
    equiv.add_argument('checkpoint')
    equiv.add_argument('--tree', default=None, help='Tree JSON to compare against')
    equiv.add_argument('--samples', type=int, default=100000)
    equiv.set_defaults(handler=cmd_equiv_check)

    grad = sub.add_parser('gradcheck', parents=[common], help='Finite-difference gradient check')
    grad.add_argument('--task', default='classification', choices=['classification', 'regression'])
    grad.add_argument('--trials', type=int, default=50)
    grad.set_defaults(handler=cmd_gradcheck)

    bench = sub.add_parser('bench', parents=[common], help='Run a benchmark spec')
    bench.add_argument('spec', nargs='?', default=None, help='Bench spec JSON (default: built-in)')
    bench.add_argument('--reuse', action='store_true',
                       help='Reuse row aggregates whose config hash matches')
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckpointCorruption as exc:
        print(f"error: corrupt checkpoint: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except MissingStandardizer as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_STANDARDIZER
    except SemTreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())

'''
Command line entry point: `deep-rnmt <subcommand> [options]`.

Exit codes: 0 on success, 1 on divergence, a failed gradient check or an
input/output problem, 2 on an invalid configuration or invalid arguments.
'''
from collections.abc import Sequence
from contextlib import nullcontext
from dataclasses import replace
import argparse
import logging
import sys

import numpy as np

from .autodiff import check_gradients
from .data import FIRST_CONTENT_ID, Vocabulary, make_batches, with_eos
from .errors import ConfigError, DataFormatError, DeepRnmtError, VocabularyError
from .evaluation import contrastive_eval, decode_corpus, read_contrastive_tsv
from .evaluation._parallel import map_items
from .log import configure_logging
from .models import ModelConfig, count_params, init_params, load_checkpoint, score_sequence
from .runconfig import architecture_matrix, load_run_config
from .train import loss, train


logger = logging.getLogger('deeprnmt.cli')

GRADCHECK_HIDDEN = 5
GRADCHECK_EMBEDDING = 4
GRADCHECK_VOCAB = 7
GRADCHECK_MAX_LEN = 4


def _open_output(path):
    return nullcontext(sys.stdout) if path in (None, '-') else open(path, 'w', encoding='utf-8')


def _read_lines(path) -> list[str]:
    with open(path, encoding='utf-8') as input_file:
        return [line.rstrip('\n') for line in input_file]


def cmd_train(args) -> int:
    run = load_run_config(args.config, args.set, args.seed)
    logger.info('Effective config:\n' + run.to_text().rstrip('\n'))
    result = train(run.model, run.task, run.train,
                   checkpoint_path=run.paths.checkpoint,
                   log_path=run.paths.log,
                   verbose=args.progress,
                   workers=args.workers)
    print(f'best step {result.best_step}\tbest valid_ce {result.best_valid_ce!r}\t'
          f'steps {result.state.step}\tcheckpoint {run.paths.checkpoint}')
    return 0


def cmd_translate(args) -> int:
    if args.beam < 1 or args.max_len < 1:
        raise ConfigError(f'--beam and --max-len must be positive, got {args.beam} and {args.max_len}')
    (params, config) = load_checkpoint(args.checkpoint)
    src_vocab, tgt_vocab = Vocabulary(config.src_vocab), Vocabulary(config.tgt_vocab)
    sources = []
    for (number, line) in enumerate(_read_lines(args.input), start=1):
        try:
            sources.append(src_vocab.encode(line, args.unk))
        except VocabularyError as error:
            raise VocabularyError(f'{args.input}:{number}: {error}') from None

    nonempty = [s for s in sources if s]
    hypotheses = iter(decode_corpus(params, config, nonempty, args.beam, args.max_len, args.workers))
    with _open_output(args.output) as output:
        for source in sources:
            tokens = next(hypotheses).tokens if source else ()
            output.write((' '.join(map(str, tokens)) if args.ids else tgt_vocab.decode(tokens)) + '\n')
    return 0


def _score_pair(params, config, pair):
    return score_sequence(params, config, *pair)


def cmd_score(args) -> int:
    (params, config) = load_checkpoint(args.checkpoint)
    src_vocab, tgt_vocab = Vocabulary(config.src_vocab), Vocabulary(config.tgt_vocab)
    pairs = []
    for (number, line) in enumerate(_read_lines(args.input), start=1):
        fields = line.split('\t')
        if len(fields) != 2:
            raise DataFormatError(f'{args.input}:{number}: expected "source<TAB>target", got {len(fields)} columns')
        try:
            source = src_vocab.encode(fields[0], args.unk)
            target = tgt_vocab.encode(fields[1], args.unk)
        except VocabularyError as error:
            raise VocabularyError(f'{args.input}:{number}: {error}') from None
        if not source or not target:
            raise DataFormatError(f'{args.input}:{number}: empty source or target')
        pairs.append((source, target if args.no_eos else with_eos(target)))

    scores = map_items(_score_pair, params, config, pairs, args.workers)
    with _open_output(args.output) as output:
        for (total, per_token) in scores:
            output.write(f'{total!r}\t' + ' '.join(repr(v) for v in per_token) + '\n')
    return 0


def cmd_contrast_eval(args) -> int:
    (params, config) = load_checkpoint(args.checkpoint)
    items = read_contrastive_tsv(args.input, Vocabulary(min(config.src_vocab, config.tgt_vocab)), args.unk)
    if not items:
        raise DataFormatError(f'{args.input}: no contrastive items')
    report = contrastive_eval(params, config, items, workers=args.workers)
    print(report.format_table())
    report.write_plot_data(args.plot_data)
    logger.info(f'Plot data written to {args.plot_data}')
    return 0


def cmd_params(args) -> int:
    run = load_run_config(args.config, args.set, args.seed)
    if args.matrix:
        for (label, config) in architecture_matrix(run.model):
            print(f'{label}\t{count_params(config).total}')
        return 0
    counts = count_params(run.model)
    print(counts.format())
    return 0


def gradcheck_config(model: ModelConfig) -> ModelConfig:
    '''
    The architecture of `model` at the tiny dimensions used for gradient checks.
    '''
    encoder = replace(model.encoder, hidden=GRADCHECK_HIDDEN, embedding=GRADCHECK_EMBEDDING)
    decoder = replace(model.decoder, hidden=GRADCHECK_HIDDEN, embedding=GRADCHECK_EMBEDDING)
    return replace(model, encoder=encoder, decoder=decoder,
                   src_vocab=GRADCHECK_VOCAB, tgt_vocab=GRADCHECK_VOCAB).validate()


def gradcheck_batch(seed: int, size: int = 2):
    '''
    A padded batch of random sentences of at most `GRADCHECK_MAX_LEN` tokens.
    '''
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(size):
        (source_len, target_len) = rng.integers(1, GRADCHECK_MAX_LEN + 1, size=2)
        source = [int(t) for t in rng.integers(FIRST_CONTENT_ID, GRADCHECK_VOCAB, size=source_len)]
        target = [int(t) for t in rng.integers(FIRST_CONTENT_ID, GRADCHECK_VOCAB, size=target_len - 1)]
        pairs.append((source, with_eos(target)))
    return make_batches(pairs, size)[0]


def cmd_gradcheck(args) -> int:
    run = load_run_config(args.config, args.set, args.seed)
    config = gradcheck_config(run.model)
    params = init_params(config)
    batch = gradcheck_batch(config.seed)
    report = check_gradients(lambda: loss(params, config, batch), params,
                             tolerance=args.tolerance,
                             max_entries=args.max_entries,
                             seed=config.seed)
    print(report.format())
    print(f'checked {len(report.checks)} tensors')
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser('deep-rnmt',
                                     description='Deep recurrent encoder-decoder models on synthetic tasks.')
    subparsers = parser.add_subparsers(dest='command', required=True)

    config_options = argparse.ArgumentParser(add_help=False)
    config_options.add_argument('--config', default=None, help='Config file of "key = value" lines.')
    config_options.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                                help='Override a config key; repeatable, applied left to right.')
    config_options.add_argument('--seed', type=int, default=None, help='Shorthand for --set seed=N.')

    worker_options = argparse.ArgumentParser(add_help=False)
    worker_options.add_argument('--workers', type=int, default=1,
                                help='Worker processes; 1 keeps results bit-reproducible.')

    checkpoint_options = argparse.ArgumentParser(add_help=False)
    checkpoint_options.add_argument('--checkpoint', required=True, help='Checkpoint file written by "train".')
    checkpoint_options.add_argument('--unk', choices=('error', 'replace'), default='error',
                                    help='Unknown input tokens raise an error or become <unk>.')

    p = subparsers.add_parser('train', parents=[config_options, worker_options], help='Train a model.')
    p.add_argument('--progress', action='store_true', help='Show a progress bar.')
    p.set_defaults(handler=cmd_train)

    p = subparsers.add_parser('translate', parents=[checkpoint_options, worker_options],
                              help='Decode one sentence per input line.')
    p.add_argument('input', help='Input file, one sentence of space-separated tokens per line.')
    p.add_argument('--output', default=None, help='Output file (defaults to stdout).')
    p.add_argument('--beam', type=int, default=5, help='Beam size.')
    p.add_argument('--max-len', type=int, default=50, help='Maximum number of output tokens.')
    p.add_argument('--ids', action='store_true', help='Print token ids instead of words.')
    p.set_defaults(handler=cmd_translate)

    p = subparsers.add_parser('score', parents=[checkpoint_options, worker_options],
                              help='Teacher-forced log-probabilities of "source<TAB>target" lines.')
    p.add_argument('input', help='Input file of tab-separated source and target.')
    p.add_argument('--output', default=None, help='Output file (defaults to stdout).')
    p.add_argument('--no-eos', action='store_true', help='Score the targets without appending </s>.')
    p.set_defaults(handler=cmd_score)

    p = subparsers.add_parser('contrast-eval', parents=[checkpoint_options, worker_options],
                              help='Contrastive evaluation bucketed by distance.')
    p.add_argument('input', help='TSV file: source, reference, contrastive, distance, category.')
    p.add_argument('--plot-data', default='contrastive.tsv', help='Output file of distance/accuracy pairs.')
    p.set_defaults(handler=cmd_contrast_eval)

    p = subparsers.add_parser('params', parents=[config_options], help='Count parameters.')
    p.add_argument('--matrix', action='store_true', help='Count the predefined architecture grid instead.')
    p.set_defaults(handler=cmd_params)

    p = subparsers.add_parser('gradcheck', parents=[config_options],
                              help='Finite-difference check of a tiny instance of the configured architecture.')
    p.add_argument('--tolerance', type=float, default=1e-4, help='Largest accepted relative error.')
    p.add_argument('--max-entries', type=int, default=None, help='Check at most this many entries per tensor.')
    p.set_defaults(handler=cmd_gradcheck)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging()
        if getattr(args, 'workers', 1) < 1:
            raise ConfigError(f'--workers must be positive, got {args.workers}')
        return args.handler(args)
    except ConfigError as error:
        print(f'deep-rnmt: config error: {error}', file=sys.stderr)
        return 2
    except (DeepRnmtError, OSError) as error:
        print(f'deep-rnmt: error: {error}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())

"""cwk command line: generate data, run schedules, sweep thresholds, profile stages, compare schedules, manage weights.

Exit codes: 0 success, 1 failure while running, 2 usage or config error.
"""

import os
import sys
import logging
import argparse


EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _intList(text):
    try:
        return [int(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('Expected comma separated integers, got %s' % repr(text))


def _floatList(text):
    try:
        return [float(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('Expected comma separated numbers, got %s' % repr(text))


def _parseCommandLine(argv):
    parser = argparse.ArgumentParser(prog='cwk', description='Staged network execution under clock schedules')
    parser.add_argument('-d', '--debug', action='store_true', dest='debug', help='Enable debug output')
    parser.add_argument('-v', '--verbose', action='store_true', dest='verbose', help='Report progress')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    generate = commands.add_parser('generate', help='Write synthetic sequences')
    generate.add_argument('--kind', choices=('translated', 'procedural'), required=True)
    generate.add_argument('--displacement', type=int, nargs='+', default=[2],
                          help='Pixels per frame. Several values write one sequence each to OUT/d<N>')
    generate.add_argument('--frames', type=int, help='Frame count. Default 6 translated, 40 procedural')
    generate.add_argument('--seed', type=int, default=0)
    generate.add_argument('--shapes', type=int, default=3)
    generate.add_argument('--classes', type=int, default=4)
    generate.add_argument('--dim', type=int, default=32, help='Frame side')
    generate.add_argument('--noise', type=float, default=None)
    generate.add_argument('--velocity', type=_intList, default=[-2, 2], help='Velocity range low,high')
    generate.add_argument('--orientation', choices=('horizontal', 'vertical', 'auto'), default='auto')
    generate.add_argument('--out', required=True, help='Output directory')

    run = commands.add_parser('run', help='Run a schedule and write reports')
    run.add_argument('config', help='Experiment JSON file')
    run.add_argument('--paper-costs', '--default-costs', action='store_true', dest='defaultCosts',
                     help='Use the 0.59/0.18/0.21 + 0.02 cost model')
    run.add_argument('--schedule', help='Override the schedule name')
    run.add_argument('--threads', type=int, help='Worker threads, 0 = all cores. Default: CWK_THREADS')

    sweep = commands.add_parser('sweep', help='Sweep the adaptive threshold')
    sweep.add_argument('config', help='Experiment JSON file')
    sweep.add_argument('--paper-costs', '--default-costs', action='store_true', dest='defaultCosts')
    sweep.add_argument('--thetas', type=_floatList, help='Comma separated thresholds')
    sweep.add_argument('--target', type=float, help='Bisect theta to reach this full-frame fraction')
    sweep.add_argument('--threads', type=int)

    profile = commands.add_parser('profile', help='Per-stage temporal difference')
    profile.add_argument('config', help='Experiment JSON file')
    profile.add_argument('--threads', type=int)

    compare = commands.add_parser('compare', help='Mean IU of every schedule and the orderings between them')
    compare.add_argument('config', help='Experiment JSON file')
    compare.add_argument('--threads', type=int)

    weights = commands.add_parser('weights', help='Toy FCN weight bundles')
    weightCommands = weights.add_subparsers(dest='weightsCommand', metavar='ACTION')
    weightCommands.required = True
    init = weightCommands.add_parser('init', help='Write seeded random weights')
    init.add_argument('--seed', type=int, required=True)
    init.add_argument('--out', required=True)
    init.add_argument('--classes', type=int, default=4)
    init.add_argument('--channels', type=_intList, default=[8, 16, 32])
    inspect = weightCommands.add_parser('inspect', help='Print a bundle')
    inspect.add_argument('path')
    save = weightCommands.add_parser('save', help='Rewrite a bundle')
    save.add_argument('--from', dest='source', required=True)
    save.add_argument('--out', required=True)

    return parser.parse_args(argv)


def _generate(ns):
    from clockwork.data import DEFAULT_FRAMES, DEFAULT_NOISE, SequenceSpec
    from clockwork.data.loader import writeSequence
    from clockwork.data.scenes import SceneParams, generateProceduralScene, generateSourceImage
    from clockwork.data.translated import generateTranslatedSequence

    noise = DEFAULT_NOISE if ns.noise is None else ns.noise
    if ns.kind == 'procedural':
        if len(ns.velocity) != 2:
            raise ValueError('--velocity takes low,high')
        params = SceneParams(ns.classes, ns.dim, ns.shapes, tuple(ns.velocity), ns.frames or 40, noise)
        outputs = [(generateProceduralScene(ns.seed, params), ns.out)]
    else:
        image, labels = generateSourceImage(ns.seed, ns.classes, noise=noise)
        outputs = []
        for displacement in ns.displacement:
            spec = SequenceSpec(displacement, ns.frames or DEFAULT_FRAMES, ns.orientation, ns.dim)
            seq = generateTranslatedSequence(image, labels, spec, ns.classes, provenance={'seed': ns.seed})
            path = ns.out if len(ns.displacement) == 1 else os.path.join(ns.out, 'd%d' % displacement)
            outputs.append((seq, path))

    for seq, path in outputs:
        writeSequence(seq, path)
        print('%s -> %s' % (seq, path))


def _costModel(ns, config):
    if not getattr(ns, 'defaultCosts', False):
        return None
    from clockwork import experiment
    from clockwork.schedules import defaultCostModel
    stageCount = config.stageCount()
    if stageCount is None:
        stageCount = experiment.buildNetwork(config).stageCount
    return defaultCostModel(stageCount)


def _run(ns):
    from clockwork import experiment
    config = experiment.loadExperimentConfig(ns.config)
    results = experiment.run(config, ns.schedule, _costModel(ns, config), ns.threads)
    summary = experiment.pooledSummary(results)
    print('%d sequences, mean IU %s, compute %.4f, latency %.4f (quoted %.4f), full frames %.4f' %
          (len(results), summary['mean_iu'], summary['compute_fraction'], summary['latency'],
           summary['quoted_latency'], summary['full_frame_fraction']))


def _sweep(ns):
    from clockwork import experiment
    config = experiment.loadExperimentConfig(ns.config)
    for theta in ns.thetas or []:
        if not 0.0 <= theta <= 1.0:
            raise experiment.ConfigError('Thetas must be in [0, 1], got %s' % theta)
    rows = experiment.sweep(config, ns.thetas, ns.target, _costModel(ns, config), ns.threads)
    for row in rows:
        print(' '.join('%s=%s' % (key, value) for key, value in row.toDict().items() if value != ''))


def _profile(ns):
    from clockwork import experiment
    config = experiment.loadExperimentConfig(ns.config)
    rows, profiles = experiment.profile(config, ns.threads)
    for name, mean, stdev, series in rows:
        print('%-8s %.4f +- %.4f' % (name, mean, stdev))
    holds = sum(1 for seqProfile in profiles if seqProfile.isNonincreasing())
    print('stage means nonincreasing with depth on %d of %d sequences' % (holds, len(profiles)))


def _compare(ns):
    from clockwork import experiment
    config = experiment.loadExperimentConfig(ns.config)
    rows = experiment.compare(config, ns.threads)
    counts = experiment.orderingCounts(rows)
    for ordering, chain in experiment.ORDERINGS:
        print('%s: %s holds on %d of %d sequences' % (ordering, ' >= '.join(chain), counts[ordering], len(rows)))


def _weights(ns):
    from clockwork.stagenet.loader import loadWeights, saveWeights
    from clockwork.stagenet.toyfcn import makeArchitecture, initWeights

    if ns.weightsCommand == 'init':
        net = initWeights(makeArchitecture(nCl=ns.classes, channels=ns.channels), ns.seed)
        saveWeights(net, ns.out)
        print('%d-stage toy FCN, seed %d -> %s' % (net.stageCount, ns.seed, ns.out))
    elif ns.weightsCommand == 'inspect':
        print(loadWeights(ns.path), end='')
    else:
        saveWeights(loadWeights(ns.source), ns.out)
        print('%s -> %s' % (ns.source, ns.out))


_COMMANDS = {'generate': _generate,
             'run': _run,
             'sweep': _sweep,
             'profile': _profile,
             'compare': _compare,
             'weights': _weights}


def main(argv=None):
    try:
        ns = _parseCommandLine(argv)
    except SystemExit as ex:
        return ex.code

    if ns.debug:
        logging.getLogger('clockwork').setLevel(logging.DEBUG)
    elif ns.verbose:
        logging.getLogger('clockwork').setLevel(logging.INFO)

    from clockwork.experiment import ConfigError, RunError

    try:
        _COMMANDS[ns.command](ns)
    except (ConfigError, KeyError) as ex:
        print('cwk: error: %s' % (ex.args[0] if ex.args else ex), file=sys.stderr)
        return EXIT_USAGE
    except (RunError, OSError) as ex:
        print('cwk: failed: %s' % ex, file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as ex:
        print('cwk: error: %s' % ex, file=sys.stderr)
        return EXIT_USAGE

    return EXIT_OK

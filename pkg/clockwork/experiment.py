"""Experiments: a JSON config naming a network, data, a schedule and outputs.

Paths in the config are relative to the config file. Sequences run in
parallel on a thread pool, results are always ordered by sequence name.
"""

import os
import csv
import json
import copy
import logging
import datetime
import concurrent.futures

import numpy as np

import clockwork
from clockwork import metrics
from clockwork.data import DEFAULT_FRAMES, DEFAULT_NOISE, SequenceSpec, ORIENTATIONS
from clockwork.data.loader import readSequence
from clockwork.data.scenes import SceneParams, generateProceduralScene, generateSourceImage
from clockwork.data.translated import generateTranslatedSequence
from clockwork.schedules import CostModel, Schedule, defaultCostModel, parseSchedule, runSchedule
from clockwork.stagenet.loader import loadWeights
from clockwork.stagenet.procedural import DEFAULT_FACTORS, makeObjectnessSegmenter, makeProceduralSegmenter
from clockwork.stagenet.toyfcn import makeArchitecture, initWeights


_logger = logging.getLogger('clockwork')


NETWORK_KINDS = ('procedural', 'objectness', 'toyfcn', 'bundle')
DATA_KINDS = ('procedural', 'translated', 'directory')

_DEFAULTS = {
    'name': 'experiment',
    'seed': 0,
    'network': {'kind': 'procedural', 'n_cl': 4, 'factors': list(DEFAULT_FACTORS),
                'channels': [8, 16, 32], 'in_channels': 3, 'path': None, 'stages': 3},
    'data': {'kind': 'procedural', 'count': 5, 'frames': None, 'shapes': 3, 'n_cl': 4,
             'image_dim': 32, 'displacement': 2, 'noise': DEFAULT_NOISE, 'velocity': [-2, 2],
             'orientation': 'auto', 'paths': []},
    'schedule': {'name': 'oracle'},
    'cost_model': None,
    'metrics': {'band_radius': metrics.DEFAULT_BAND_RADIUS, 'label_stride': 1},
    'sweep': {'thetas': [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
              'target_fraction': None, 'tolerance': 0.05, 'max_iterations': 20},
    'output': {'report': 'out/report.json', 'csv': 'out/frames.csv',
               'curve': 'out/curve.csv', 'profile': 'out/profile.csv',
               'comparison': 'out/comparison.csv'},
}

DEFAULT_SCENE_FRAMES = 40

_SCHEDULE_KEYS = ('name', 'k', 'rates', 'theta', 'source_stage', 'signal', 'reference')

FRAME_COLUMNS = ('sequence', 'frame', 'executed', 'cost', 'signal', 'pixel_signal', 'mean_iu', 'fw_iu')
CURVE_COLUMNS = ('theta', 'full_frame_fraction', 'mean_iu', 'fw_iu', 'compute_fraction', 'tag')


class ConfigError(ValueError):
    """Experiment config does not follow the schema
    """
    pass


class RunError(RuntimeError):
    """Failure while running a sequence
    """
    pass


def _merge(defaults, given, section):
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError("'%s' must be an object" % section)
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError("Unknown keys in '%s': %s" % (section, ', '.join(sorted(unknown))))
    merged = copy.deepcopy(defaults)
    merged.update(given)
    return merged


class ExperimentConfig:
    """Validated experiment config

    Public attributes:
        name, seed
        network, data, schedule, metrics, sweep     section dicts with defaults filled in
        costModel       CostModel, or None for the default of the network
        output          dict of absolute output paths
        baseDir         directory relative paths are resolved against
    """
    def __init__(self, raw, baseDir='.'):
        if not isinstance(raw, dict):
            raise ConfigError('Experiment config must be a JSON object')
        unknown = set(raw) - set(_DEFAULTS)
        if unknown:
            raise ConfigError('Unknown config keys: %s' % ', '.join(sorted(unknown)))

        self.baseDir = os.path.abspath(baseDir)
        self.name = raw.get('name', _DEFAULTS['name'])
        self.seed = raw.get('seed', _DEFAULTS['seed'])
        if not isinstance(self.seed, int):
            raise ConfigError('seed must be an integer, got %s' % repr(self.seed))

        self.network = _merge(_DEFAULTS['network'], raw.get('network'), 'network')
        self.data = _merge(_DEFAULTS['data'], raw.get('data'), 'data')
        self.schedule = raw.get('schedule', _DEFAULTS['schedule'])
        self.metrics = _merge(_DEFAULTS['metrics'], raw.get('metrics'), 'metrics')
        self.sweep = _merge(_DEFAULTS['sweep'], raw.get('sweep'), 'sweep')
        output = _merge(_DEFAULTS['output'], raw.get('output'), 'output')
        self.output = {key: self.resolve(path) for key, path in output.items()}

        self._validateNetwork()
        self._validateData()
        self._validateFrameDim()
        self._validateSchedule()
        self._validateMetrics()
        self._validateSweep()

        self.costModel = None
        if raw.get('cost_model') is not None:
            self.costModel = self._parseCostModel(raw['cost_model'])

    def resolve(self, path):
        return os.path.normpath(os.path.join(self.baseDir, path))

    def _validateNetwork(self):
        network = self.network
        if network['kind'] not in NETWORK_KINDS:
            raise ConfigError('network.kind must be one of %s, got %s' %
                              (', '.join(NETWORK_KINDS), repr(network['kind'])))
        if network['stages'] not in (2, 3):
            raise ConfigError('network.stages must be 2 or 3, got %s' % repr(network['stages']))
        if network['kind'] == 'bundle':
            if not network['path']:
                raise ConfigError('network.path is required for a weight bundle')
            network['path'] = self.resolve(network['path'])
            if not os.path.isdir(network['path']):
                raise ConfigError('Weight bundle %s does not exist' % network['path'])
        if network['kind'] in ('procedural', 'objectness'):
            factors = network['factors']
            if len(factors) < network['stages']:
                raise ConfigError('network.factors needs %d entries, got %s' % (network['stages'], factors))
            if any(deep <= shallow for shallow, deep in zip(factors, factors[1:])):
                raise ConfigError('network.factors must strictly increase, got %s' % (factors,))
        if network['kind'] == 'toyfcn' and len(network['channels']) < network['stages']:
            raise ConfigError('network.channels needs %d entries, got %s' % (network['stages'], network['channels']))

    def _validateData(self):
        data = self.data
        if data['kind'] not in DATA_KINDS:
            raise ConfigError('data.kind must be one of %s, got %s' % (', '.join(DATA_KINDS), repr(data['kind'])))
        if data['kind'] == 'directory':
            if not data['paths']:
                raise ConfigError('data.paths is required for directory data')
            data['paths'] = [self.resolve(path) for path in data['paths']]
            for path in data['paths']:
                if not os.path.isdir(path):
                    raise ConfigError('Sequence directory %s does not exist' % path)
        else:
            if data['frames'] is None:
                data['frames'] = DEFAULT_FRAMES if data['kind'] == 'translated' else DEFAULT_SCENE_FRAMES
            for key in ('count', 'frames', 'image_dim', 'n_cl'):
                if not isinstance(data[key], int) or data[key] < 1:
                    raise ConfigError('data.%s must be a positive integer, got %s' % (key, repr(data[key])))
            if data['orientation'] not in ORIENTATIONS:
                raise ConfigError('data.orientation must be one of %s' % ', '.join(ORIENTATIONS))

    def deepestFactor(self):
        """Downsample factor of the deepest stage, None for weight bundles
        """
        network = self.network
        if network['kind'] in ('procedural', 'objectness'):
            return network['factors'][:network['stages']][-1]
        elif network['kind'] == 'toyfcn':
            return 2 ** len(network['channels'][:network['stages']])
        return None

    def _validateFrameDim(self):
        factor = self.deepestFactor()
        if self.data['kind'] == 'directory' or factor is None:
            return
        if self.data['image_dim'] % factor:
            raise ConfigError('data.image_dim %d is not a multiple of the deepest stage factor %d' %
                              (self.data['image_dim'], factor))

    def _validateSchedule(self):
        if not isinstance(self.schedule, dict):
            raise ConfigError("'schedule' must be an object")
        unknown = set(self.schedule) - set(_SCHEDULE_KEYS)
        if unknown:
            raise ConfigError("Unknown keys in 'schedule': %s" % ', '.join(sorted(unknown)))
        self.makeSchedule()

    def _validateMetrics(self):
        if not isinstance(self.metrics['band_radius'], int) or self.metrics['band_radius'] < 1:
            raise ConfigError('metrics.band_radius must be an integer >= 1')
        if not isinstance(self.metrics['label_stride'], int) or self.metrics['label_stride'] < 1:
            raise ConfigError('metrics.label_stride must be an integer >= 1')

    def _validateSweep(self):
        for theta in self.sweep['thetas']:
            if not 0.0 <= theta <= 1.0:
                raise ConfigError('Sweep thetas must be in [0, 1], got %s' % theta)
        target = self.sweep['target_fraction']
        if target is not None and not 0.0 <= target <= 1.0:
            raise ConfigError('sweep.target_fraction must be in [0, 1], got %s' % target)
        if self.sweep['max_iterations'] < 1:
            raise ConfigError('sweep.max_iterations must be >= 1')

    def _parseCostModel(self, description):
        try:
            return CostModel(description['stage_costs'], description.get('fusion_cost', 0.0))
        except (KeyError, TypeError) as ex:
            raise ConfigError('Invalid cost_model %s: %s' % (description, ex))
        except ValueError as ex:
            raise ConfigError('Invalid cost_model: %s' % ex)

    def stageCount(self):
        if self.network['kind'] == 'bundle':
            return None
        return self.network['stages']

    def makeSchedule(self, name=None):
        description = dict(self.schedule)
        if name is not None:
            description['name'] = name
        try:
            schedule = parseSchedule(description, self.stageCount() or 3)
        except KeyError as ex:
            raise ConfigError(ex.args[0])
        except (ValueError, TypeError) as ex:
            raise ConfigError('Invalid schedule: %s' % ex)
        if schedule.kind == 'adaptive':
            if not 0.0 <= schedule.theta <= 1.0:
                raise ConfigError('schedule.theta must be in [0, 1], got %s' % schedule.theta)
            if schedule.signal not in ('labels', 'pixels'):
                raise ConfigError("schedule.signal must be 'labels' or 'pixels'")
            if schedule.reference not in ('previous', 'last_update'):
                raise ConfigError("schedule.reference must be 'previous' or 'last_update'")
        return schedule


def loadExperimentConfig(path):
    """Parse and validate an experiment JSON file. Raises ConfigError
    """
    if not os.path.isfile(path):
        raise ConfigError('Config file %s does not exist' % path)
    try:
        with open(path, encoding='utf-8') as configFile:
            raw = json.load(configFile)
    except ValueError as ex:
        raise ConfigError('Config file %s is not valid JSON: %s' % (path, ex))
    return ExperimentConfig(raw, os.path.dirname(os.path.abspath(path)))


def buildNetwork(config):
    network = config.network
    stages = network['stages']
    if network['kind'] == 'procedural':
        return makeProceduralSegmenter(network['n_cl'], tuple(network['factors'][:stages]))
    elif network['kind'] == 'objectness':
        return makeObjectnessSegmenter(network['n_cl'], tuple(network['factors'][:stages]))
    elif network['kind'] == 'toyfcn':
        arch = makeArchitecture(network['in_channels'], network['n_cl'], tuple(network['channels'][:stages]))
        return initWeights(arch, config.seed)
    else:
        return loadWeights(network['path'])


def buildSequences(config):
    """LabeledSequence list ordered by name
    """
    data = config.data
    sequences = []
    if data['kind'] == 'procedural':
        params = SceneParams(data['n_cl'], data['image_dim'], data['shapes'], tuple(data['velocity']),
                             data['frames'], data['noise'])
        for index in range(data['count']):
            sequences.append(generateProceduralScene(config.seed + index, params, 'procedural_%03d' % index))
    elif data['kind'] == 'translated':
        spec = SequenceSpec(data['displacement'], data['frames'], data['orientation'], data['image_dim'])
        for index in range(data['count']):
            seed = config.seed + index
            image, labels = generateSourceImage(seed, data['n_cl'], noise=data['noise'])
            sequences.append(generateTranslatedSequence(image, labels, spec, data['n_cl'],
                                                        'translated_%03d' % index, {'seed': seed}))
    else:
        sequences = [readSequence(path) for path in data['paths']]

    return sorted(sequences, key=lambda seq: seq.name)


class SequenceResult:
    """Report and accuracy of one sequence
    """
    def __init__(self, sequence, report, evaluation):
        self.sequence = sequence
        self.report = report
        self.evaluation = evaluation


def _runSequence(net, sequence, schedule, costModel, config):
    try:
        report = runSchedule(net, sequence.frames, schedule, costModel, sequence.name)
        evaluation = metrics.evaluateSequence(report.predictions, sequence.labels, sequence.nCl,
                                              config.metrics['band_radius'], config.metrics['label_stride'])
    except (ValueError, KeyError) as ex:
        raise RunError('Sequence %s failed: %s' % (sequence.name, ex))
    return SequenceResult(sequence, report, evaluation)


def _parallelMap(function, items, threads):
    workers = min(clockwork.threadCount(threads), max(1, len(items)))
    if workers == 1:
        return [function(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))


def runExperiment(config, schedule=None, costModel=None, threads=None, net=None, sequences=None):
    """Run one schedule over every sequence. Returns SequenceResult list ordered by name
    """
    if schedule is None:
        schedule = config.makeSchedule()
    if net is None:
        net = buildNetwork(config)
    if sequences is None:
        sequences = buildSequences(config)
    if costModel is None:
        costModel = config.costModel

    def runOne(sequence):
        return _runSequence(net, sequence, schedule, costModel, config)

    return _parallelMap(runOne, sequences, threads)


def pooledSummary(results):
    """Metrics over all sequences, from merged confusion matrices and all frames
    """
    confusion = metrics.mergeConfusion([result.evaluation.confusion for result in results])
    band = metrics.mergeConfusion([result.evaluation.bandConfusion for result in results])
    summary = metrics.SequenceEvaluation(confusion, band, [], []).summary()

    costs = [cost for result in results for cost in result.report.frameCosts]
    fullFrames = [mask[-1] for result in results for mask in result.report.executed]
    summary['compute_fraction'] = float(np.mean(costs))
    summary['full_frame_fraction'] = sum(fullFrames) / len(fullFrames)
    summary['latency'] = max(result.report.latency for result in results)
    summary['quoted_latency'] = max(result.report.quotedLatency for result in results)
    summary['frames'] = len(costs)
    for key in ('mean_iu', 'fw_iu'):
        if summary[key] is None:
            _logger.warning('Pooled %s is undefined', key)
    return summary


def _sequenceEntry(result):
    report = result.report
    entry = result.evaluation.summary()
    entry.update(name=result.sequence.name,
                 frames=report.frameCount,
                 executions=list(report.executionCounts()),
                 compute_fraction=report.computeFraction,
                 latency=report.latency,
                 quoted_latency=report.quotedLatency,
                 warmup_latency=report.warmupLatency,
                 full_frame_fraction=report.fullFrameFraction)
    return entry


def _formatFloat(value):
    if value is None:
        return ''
    return '%.6f' % value


def _ensureDir(path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def writeFrameCsv(path, results):
    _ensureDir(path)
    with open(path, 'w', newline='', encoding='utf-8') as csvFile:
        writer = csv.DictWriter(csvFile, fieldnames=FRAME_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for result in results:
            report = result.report
            for index in range(report.frameCount):
                writer.writerow({'sequence': result.sequence.name,
                                 'frame': index,
                                 'executed': report.executedString(index),
                                 'cost': _formatFloat(report.frameCosts[index]),
                                 'signal': _formatFloat(report.signals[index]),
                                 'pixel_signal': _formatFloat(report.pixelSignals[index]),
                                 'mean_iu': _formatFloat(result.evaluation.frameMeanIu[index]),
                                 'fw_iu': _formatFloat(result.evaluation.frameFwIu[index])})
    _logger.info('Wrote %s', path)


def writeReport(path, config, schedule, results, costModel):
    _ensureDir(path)
    report = {'name': config.name,
              'generated': datetime.datetime.now().isoformat(timespec='seconds'),
              'seed': config.seed,
              'schedule': schedule.toDict(),
              'cost_model': costModel.toDict() if costModel is not None else None,
              'sequences': [_sequenceEntry(result) for result in results],
              'pooled': pooledSummary(results)}
    with open(path, 'w', encoding='utf-8') as reportFile:
        json.dump(report, reportFile, indent=2, sort_keys=True)
    _logger.info('Wrote %s', path)


def run(config, scheduleName=None, costModel=None, threads=None):
    """The run command: execute the schedule and write the JSON report and frame CSV
    """
    schedule = config.makeSchedule(scheduleName)
    results = runExperiment(config, schedule, costModel, threads)
    effectiveCosts = costModel or config.costModel or defaultCostModel(results[0].report.stageCount)
    writeReport(config.output['report'], config, schedule, results, effectiveCosts)
    writeFrameCsv(config.output['csv'], results)
    return results


COMPARED_SCHEDULES = (('oracle', Schedule.oracle()),
                      ('truncated1', Schedule.truncated(1)),
                      ('truncated2', Schedule.truncated(2)),
                      ('pipeline3', Schedule.pipeline(3)),
                      ('pipeline2', Schedule.pipeline(2)),
                      ('alternating', Schedule.alternating()),
                      ('exponential', Schedule.exponential()),
                      ('skip_frame', Schedule.skipFrame()))

# Each ordering holds on a sequence when mean IU does not increase along the chain
ORDERINGS = (('pipeline3', ('oracle', 'pipeline3', 'truncated1')),
             ('pipeline2', ('oracle', 'pipeline2', 'truncated2')),
             ('fixed_rates', ('alternating', 'exponential')),
             ('skip_frame', ('alternating', 'skip_frame')))


class ComparisonRow:
    """Mean IU of every compared schedule on one sequence

    Public attributes:
        name        sequence name
        meanIu      dict schedule label -> mean IU, None where undefined
        holds       dict ordering name -> bool
    """
    def __init__(self, name, meanIu):
        self.name = name
        self.meanIu = meanIu
        self.holds = {}
        for ordering, chain in ORDERINGS:
            values = [meanIu[label] for label in chain]
            self.holds[ordering] = None not in values and \
                                   all(better >= worse for better, worse in zip(values, values[1:]))

    def toDict(self):
        result = {'sequence': self.name}
        for label, schedule in COMPARED_SCHEDULES:
            result[label] = _formatFloat(self.meanIu[label])
        for ordering, chain in ORDERINGS:
            result[ordering] = int(self.holds[ordering])
        return result


def compareSchedules(net, sequences, costModel=None, threads=None,
                     bandRadius=metrics.DEFAULT_BAND_RADIUS, labelStride=1):
    """Run every compared schedule on every sequence of a 3-stage network.
    Returns ComparisonRow list in sequence order
    """
    if net.stageCount != 3:
        raise ValueError('Schedule comparison needs a 3-stage network, got %d stages' % net.stageCount)

    def compareOne(sequence):
        meanIu = {}
        for label, schedule in COMPARED_SCHEDULES:
            report = runSchedule(net, sequence.frames, schedule, costModel, sequence.name)
            evaluation = metrics.evaluateSequence(report.predictions, sequence.labels, sequence.nCl,
                                                  bandRadius, labelStride)
            meanIu[label] = evaluation.summary()['mean_iu']
        return ComparisonRow(sequence.name, meanIu)

    return _parallelMap(compareOne, sequences, threads)


def orderingCounts(rows):
    """dict ordering name -> number of rows it holds on
    """
    return {ordering: sum(1 for row in rows if row.holds[ordering]) for ordering, chain in ORDERINGS}


def compare(config, threads=None):
    """The compare command: per-sequence mean IU of every compared schedule and the orderings between them
    """
    net = buildNetwork(config)
    sequences = buildSequences(config)
    try:
        rows = compareSchedules(net, sequences, config.costModel, threads,
                                config.metrics['band_radius'], config.metrics['label_stride'])
    except ValueError as ex:
        raise RunError('Schedule comparison failed: %s' % ex)

    path = config.output['comparison']
    _ensureDir(path)
    columns = ['sequence'] + [label for label, schedule in COMPARED_SCHEDULES] + \
              [ordering for ordering, chain in ORDERINGS]
    with open(path, 'w', newline='', encoding='utf-8') as csvFile:
        writer = csv.DictWriter(csvFile, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row.toDict())

    for ordering, count in orderingCounts(rows).items():
        _logger.info('%s ordering holds on %d of %d sequences', ordering, count, len(rows))
    _logger.info('Wrote %s', path)
    return rows


class CurveRow:
    def __init__(self, theta, results, tag=''):
        summary = pooledSummary(results)
        self.theta = theta
        self.fullFrameFraction = summary['full_frame_fraction']
        self.meanIu = summary['mean_iu']
        self.fwIu = summary['fw_iu']
        self.computeFraction = summary['compute_fraction']
        self.tag = tag

    def toDict(self):
        return {'theta': _formatFloat(self.theta),
                'full_frame_fraction': _formatFloat(self.fullFrameFraction),
                'mean_iu': _formatFloat(self.meanIu),
                'fw_iu': _formatFloat(self.fwIu),
                'compute_fraction': _formatFloat(self.computeFraction),
                'tag': self.tag}


def _adaptiveSchedule(config):
    schedule = config.makeSchedule()
    if schedule.kind != 'adaptive':
        schedule = config.makeSchedule('adaptive')
    return schedule


def bisectTheta(evaluate, target, tolerance=0.05, maxIterations=20):
    """Find theta whose full-frame fraction is within tolerance of target.
    evaluate(theta) returns (full-frame fraction, payload); the fraction must not grow with theta.
    Returns (theta, payload, iterations, converged)
    """
    low, high = 0.0, 1.0
    theta = 0.5
    payload = None
    for iteration in range(1, maxIterations + 1):
        theta = (low + high) / 2
        fraction, payload = evaluate(theta)
        if abs(fraction - target) <= tolerance:
            return theta, payload, iteration, True
        if fraction > target:
            low = theta
        else:
            high = theta
    return theta, payload, maxIterations, False


def sweep(config, thetas=None, target=None, costModel=None, threads=None):
    """The sweep command: one curve row per theta, plus a bisection row when a target is set
    """
    base = _adaptiveSchedule(config)
    net = buildNetwork(config)
    sequences = buildSequences(config)
    if thetas is None:
        thetas = config.sweep['thetas']
    if target is None:
        target = config.sweep['target_fraction']

    def runTheta(theta):
        return runExperiment(config, base.withTheta(theta), costModel, threads, net, sequences)

    rows = [CurveRow(theta, runTheta(theta)) for theta in thetas]

    if target is not None:
        def evaluate(theta):
            row = CurveRow(theta, runTheta(theta))
            return row.fullFrameFraction, row

        theta, row, iterations, converged = bisectTheta(evaluate, target, config.sweep['tolerance'],
                                                        config.sweep['max_iterations'])
        if converged:
            row.tag = 'target'
            _logger.info('theta %.6f reaches full-frame fraction %.4f in %d iterations',
                         theta, row.fullFrameFraction, iterations)
        else:
            row.tag = 'infeasible'
            _logger.warning('No theta reaches full-frame fraction %s +- %s in %d iterations',
                            target, config.sweep['tolerance'], iterations)
        rows.append(row)

    path = config.output['curve']
    _ensureDir(path)
    with open(path, 'w', newline='', encoding='utf-8') as csvFile:
        writer = csv.DictWriter(csvFile, fieldnames=CURVE_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row.toDict())
    _logger.info('Wrote %s', path)
    return rows


def _profileOne(net, sequence):
    try:
        return metrics.temporalDifferenceProfile(net, sequence.frames)
    except ValueError as ex:
        raise RunError('Sequence %s failed: %s' % (sequence.name, ex))


def profile(config, threads=None):
    """The profile command: per-stage temporal difference over every sequence.

    Writes the aggregate table, one series CSV per sequence and a per-sequence
    ordering table. Returns (aggregate rows, per-sequence profiles)
    """
    net = buildNetwork(config)
    sequences = buildSequences(config)
    profiles = _parallelMap(lambda sequence: _profileOne(net, sequence), sequences, threads)

    path = config.output['profile']
    stem = os.path.splitext(path)[0]
    seriesDir = stem + '_series'
    os.makedirs(seriesDir, exist_ok=True)

    names = ['pixels'] + ['stage%d' % index for index in range(net.stageCount)]
    pooled = {name: [] for name in names}
    for sequence, seqProfile in zip(sequences, profiles):
        for name, mean, stdev, series in seqProfile.rows():
            pooled[name].extend(series)
        seriesPath = os.path.join(seriesDir, sequence.name + '.csv')
        with open(seriesPath, 'w', newline='', encoding='utf-8') as csvFile:
            writer = csv.writer(csvFile, lineterminator='\n')
            writer.writerow(['pair'] + names)
            for index in range(len(seqProfile.pixelSeries)):
                writer.writerow([index, _formatFloat(seqProfile.pixelSeries[index])] +
                                [_formatFloat(series[index]) for series in seqProfile.stageSeries])

    rows = []
    seriesName = os.path.basename(seriesDir)
    for name in names:
        values = np.asarray(pooled[name], dtype=np.float64)
        rows.append((name, float(values.mean()), float(values.std()), seriesName))

    with open(path, 'w', newline='', encoding='utf-8') as csvFile:
        writer = csv.writer(csvFile, lineterminator='\n')
        writer.writerow(['stage', 'mean', 'stdev', 'series'])
        for name, mean, stdev, series in rows:
            writer.writerow([name, _formatFloat(mean), _formatFloat(stdev), series])

    with open(stem + '_ordering.csv', 'w', newline='', encoding='utf-8') as csvFile:
        writer = csv.writer(csvFile, lineterminator='\n')
        writer.writerow(['sequence'] + names[1:] + ['nonincreasing'])
        for sequence, seqProfile in zip(sequences, profiles):
            writer.writerow([sequence.name] + [_formatFloat(mean) for mean in seqProfile.stageMeans()] +
                            [int(seqProfile.isNonincreasing())])

    holds = sum(1 for seqProfile in profiles if seqProfile.isNonincreasing())
    _logger.info('Stage means nonincreasing with depth on %d of %d sequences', holds, len(profiles))
    _logger.info('Wrote %s', path)
    return rows, profiles

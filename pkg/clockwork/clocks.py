"""Clocks gate module execution at each timestep.

A clock is a boolean function of time and, for adaptive clocks, of a
difference signal in [0, 1].
"""


class Clock:
    """Base class for clocks
    """
    needsSignal = False

    def fires(self, t, signal=None):
        raise NotImplementedError(str(self.__class__))

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, str(self)))

    def __repr__(self):
        return str(self)


class Always(Clock):
    """Fires on every timestep
    """
    def fires(self, t, signal=None):
        return True

    def __str__(self):
        return 'Always'


class Modulo(Clock):
    """Fires iff (t - phase) mod rate == 0

    Public attributes:
        rate
        phase
    """
    def __init__(self, rate, phase=0):
        if rate < 1:
            raise ValueError('Modulo clock rate must be >= 1, got %d' % rate)
        if phase < 0:
            raise ValueError('Modulo clock phase must be >= 0, got %d' % phase)
        self.rate = rate
        self.phase = phase

    def fires(self, t, signal=None):
        return (t - self.phase) % self.rate == 0

    def __str__(self):
        return 'Modulo(%d, %d)' % (self.rate, self.phase)


class Threshold(Clock):
    """Fires iff the difference signal strictly exceeds theta.
    theta = 1.0 never fires, because signals never exceed 1.

    Public attributes:
        theta
        sourceStage     stage whose score labels produce the signal
        reference       'previous' compares against the previous frame,
                        'last_update' against the frame of the last update of the gated stage
    """
    needsSignal = True

    REFERENCES = ('previous', 'last_update')

    def __init__(self, theta, sourceStage=0, reference='previous'):
        if not 0.0 <= theta <= 1.0:
            raise ValueError('Threshold clock theta must be in [0, 1], got %s' % theta)
        if reference not in self.REFERENCES:
            raise ValueError('Threshold clock reference must be one of %s, got %s' %
                             (', '.join(self.REFERENCES), repr(reference)))
        self.theta = theta
        self.sourceStage = sourceStage
        self.reference = reference

    def fires(self, t, signal=None):
        if signal is None:
            raise ValueError('Threshold clock queried at t=%d without a signal' % t)
        if not 0.0 <= signal <= 1.0:
            raise ValueError('Threshold clock signal must be in [0, 1], got %s' % signal)
        return signal > self.theta

    def __str__(self):
        return 'Threshold(%s, %s, %s)' % (self.theta, self.sourceStage, self.reference)


class External(Clock):
    """Fires according to a precomputed per-timestep bitmask

    Public attributes:
        bitmask     tuple of bool
    """
    def __init__(self, bitmask):
        self.bitmask = tuple(bool(bit) for bit in bitmask)

    def fires(self, t, signal=None):
        if not 0 <= t < len(self.bitmask):
            raise ValueError('External clock has %d timesteps, queried at t=%d' % (len(self.bitmask), t))
        return self.bitmask[t]

    def __str__(self):
        return 'External(%s)' % ''.join('1' if bit else '0' for bit in self.bitmask)


class Counter(Clock):
    """Counter-clock. Fires exactly when the wrapped clock does not

    Public attributes:
        clock
    """
    def __init__(self, clock):
        self.clock = clock
        self.needsSignal = clock.needsSignal

    def fires(self, t, signal=None):
        return not self.clock.fires(t, signal)

    def __str__(self):
        return 'Counter(%s)' % self.clock


def clockFires(clock, t, signal=None):
    """Evaluate clock at timestep t
    """
    return clock.fires(t, signal)

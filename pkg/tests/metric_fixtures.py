"""Confusion-count fixtures with hand-computed POD and FAR (None = undefined)."""

# (tp, fp, tn, fn, pod, far)
METRIC_FIXTURES = [
    (84, 6, 80, 16, 0.84, 0.06666666666666667),
    (94, 6, 0, 6, 0.94, 0.06),
    (0, 0, 10, 5, 0.0, None),
    (0, 0, 0, 0, None, None),
    (10, 0, 5, 0, 1.0, 0.0),
    (0, 3, 7, 0, None, 1.0),
    (1, 1, 1, 1, 0.5, 0.5),
    (3, 1, 0, 1, 0.75, 0.25),
    (1, 2, 0, 2, 0.3333333333333333, 0.6666666666666666),
    (2, 1, 4, 1, 0.6666666666666666, 0.3333333333333333),
    (1, 4, 0, 4, 0.2, 0.8),
    (5, 0, 0, 0, 1.0, 0.0),
    (0, 5, 0, 0, None, 1.0),
    (0, 0, 0, 5, 0.0, None),
    (7, 3, 90, 0, 1.0, 0.3),
    (9, 1, 2, 1, 0.9, 0.1),
    (250, 0, 250, 0, 1.0, 0.0),
    (245, 5, 245, 5, 0.98, 0.02),
    (1, 9, 0, 9, 0.1, 0.9),
    (7, 0, 1, 1, 0.875, 0.0),
]

"""Distinguishability statistics: Welch's t, 1-D Wasserstein distance, bootstrap thresholds."""

import math
from collections.abc import Sequence

import numpy as np
from scipy import stats as sps

from pdnsense.core.config import settings
from pdnsense.core.exceptions import DegenerateCellError, GridMismatchError, ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.schemas.enums import Decision, Metric, PoolingRule, SummaryMode, TriggeringMetric
from pdnsense.schemas.protocol import SignatureSummary
from pdnsense.schemas.sensing import TraceSet
from pdnsense.schemas.stats import (
    BootstrapConfig,
    FrequencyCell,
    FrequencyStatistic,
    MetricConfig,
    SensorStatistic,
    Verdict,
)
from pdnsense.services.pdn import map_frequencies

logger = get_logger(__name__)


def default_metric_config() -> MetricConfig:
    """Metric configuration from settings."""
    return MetricConfig(
        metric=Metric(settings.DEFAULT_METRIC),
        t_threshold=settings.T_THRESHOLD,
        order=settings.WASSERSTEIN_ORDER,
        bootstrap=BootstrapConfig(resamples=settings.BOOTSTRAP_RESAMPLES, significance=settings.SIGNIFICANCE),
        pooling=PoolingRule(settings.POOLING),
    )


# --- Welch's t ---


def welch_t_from_moments(
    golden: tuple[float, float, int],
    test: tuple[float, float, int],
) -> float:
    """Welch's t from (mean, sample variance, count) of each side."""
    (mean_g, var_g, n_g), (mean_t, var_t, n_t) = golden, test
    if n_g < 2 or n_t < 2:
        raise ValidationError("Welch's t needs at least two samples on each side")
    if var_g == 0 and var_t == 0:
        raise DegenerateCellError()
    result = sps.ttest_ind_from_stats(
        mean_g, math.sqrt(var_g), n_g, mean_t, math.sqrt(var_t), n_t, equal_var=False
    )
    return float(result.statistic)


def welch_t(cell: FrequencyCell) -> float:
    """Unequal-variance two-sample t of golden minus test.

    Raises:
        ValidationError: If either side has fewer than two samples.
        DegenerateCellError: If both sides have zero variance.
    """
    golden, test = cell.golden_samples, cell.test_samples
    if golden.size < 2 or test.size < 2:
        raise ValidationError("Welch's t needs at least two samples on each side")
    if np.var(golden) == 0 and np.var(test) == 0:
        raise DegenerateCellError()
    return float(sps.ttest_ind(golden, test, equal_var=False).statistic)


def ttest_decide(t_values: Sequence[float], threshold: float = 4.5) -> Decision:
    """Tampered iff any |t| strictly exceeds ``threshold``."""
    if len(t_values) == 0:
        raise ValidationError("At least one t value is required")
    return Decision.TAMPERED if any(abs(t) > threshold for t in t_values) else Decision.CLEAN


# --- Wasserstein ---


def _wasserstein_batch(support: np.ndarray, w_a: np.ndarray, w_b: np.ndarray, p: int) -> np.ndarray:
    """W_p between rows of two weight matrices over a shared sorted support.

    Integrates |Q_a(u) - Q_b(u)|^p over the merged CDF breakpoints, where both
    quantile functions are constant.
    """
    cdf_a = np.cumsum(w_a, axis=1)
    cdf_b = np.cumsum(w_b, axis=1)
    cdf_a /= cdf_a[:, -1:]
    cdf_b /= cdf_b[:, -1:]

    breaks = np.sort(np.concatenate([cdf_a, cdf_b], axis=1), axis=1)
    edges = np.concatenate([np.zeros((breaks.shape[0], 1)), breaks], axis=1)
    width = np.diff(edges, axis=1)
    mid = edges[:, :-1] + width / 2

    last = support.size - 1
    q_a = support[np.minimum((cdf_a[:, None, :] < mid[:, :, None]).sum(axis=2), last)]
    q_b = support[np.minimum((cdf_b[:, None, :] < mid[:, :, None]).sum(axis=2), last)]
    total = (width * np.abs(q_a - q_b) ** p).sum(axis=1)
    result: np.ndarray = total ** (1.0 / p)
    return result


def wasserstein_from_weights(support: np.ndarray, w_a: np.ndarray, w_b: np.ndarray, p: int = 1) -> float:
    """W_p between two weightings of the same sorted support."""
    if p < 1:
        raise ValidationError(f"Wasserstein order must be >= 1, got {p}")
    support = np.asarray(support, dtype=float)
    return float(_wasserstein_batch(support, np.atleast_2d(w_a).astype(float), np.atleast_2d(w_b).astype(float), p)[0])


def wasserstein(cell: FrequencyCell, p: int = 1) -> float:
    """Empirical p-Wasserstein distance between golden and test samples."""
    values = np.concatenate([cell.golden_samples, cell.test_samples])
    support, inverse = np.unique(values, return_inverse=True)
    n_g = cell.golden_samples.size
    w_a = np.bincount(inverse[:n_g], minlength=support.size) / n_g
    w_b = np.bincount(inverse[n_g:], minlength=support.size) / cell.test_samples.size
    return wasserstein_from_weights(support, w_a, w_b, p)


# --- Bootstrap ---


def bootstrap_null(
    reference: np.ndarray,
    sample_size: int,
    cfg: BootstrapConfig,
    p: int = 1,
    spawn_key: tuple[int, ...] = (),
) -> np.ndarray:
    """Null W_p distances between pairs of with-replacement resamples of ``reference``.

    A resample of size n is drawn as multinomial counts over the distinct
    reference values.
    """
    reference = np.asarray(reference, dtype=float).ravel()
    if reference.size < 2:
        raise ValidationError("Bootstrap reference needs at least two samples")
    if sample_size < 1:
        raise ValidationError(f"sample_size must be at least 1, got {sample_size}")
    support, counts = np.unique(reference, return_counts=True)
    if support.size == 1:
        return np.zeros(cfg.resamples)
    probabilities = counts / reference.size
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=spawn_key))
    draws_a = rng.multinomial(sample_size, probabilities, size=cfg.resamples)
    draws_b = rng.multinomial(sample_size, probabilities, size=cfg.resamples)
    return _wasserstein_batch(support, draws_a.astype(float), draws_b.astype(float), p)


def threshold_index(cfg: BootstrapConfig) -> int:
    """1-based order statistic used as the threshold: ceil((1 - alpha) * B)."""
    return max(1, math.ceil(round((1 - cfg.significance) * cfg.resamples, 9)))


def bootstrap_threshold(
    reference: np.ndarray,
    sample_size: int,
    cfg: BootstrapConfig,
    p: int = 1,
    spawn_key: tuple[int, ...] = (),
) -> float:
    """(1 - significance) order statistic of the bootstrap null distances."""
    null = np.sort(bootstrap_null(reference, sample_size, cfg, p, spawn_key))
    return float(null[threshold_index(cfg) - 1])


# --- Summaries ---


def summarize(trace: TraceSet, mode: SummaryMode = SummaryMode.FULL, resolution: int = 101) -> SignatureSummary:
    """Golden summary of a trace set."""
    codes = trace.samples
    if mode is SummaryMode.FULL:
        return SignatureSummary(
            mode=mode,
            frequencies=trace.frequencies,
            sensor_ids=trace.sensor_ids,
            traces=trace.traces,
            acquisition=trace.acquisition,
            samples=codes.tolist(),
        )
    if resolution < 2:
        raise ValidationError(f"Quantile resolution must be at least 2, got {resolution}")
    levels = np.linspace(0.0, 1.0, resolution)
    quantiles = np.moveaxis(np.quantile(codes.astype(float), levels, axis=2), 0, -1)
    variance = codes.var(axis=2, ddof=1) if trace.traces > 1 else np.zeros(codes.shape[:2])
    return SignatureSummary(
        mode=mode,
        frequencies=trace.frequencies,
        sensor_ids=trace.sensor_ids,
        traces=trace.traces,
        acquisition=trace.acquisition,
        mean=codes.mean(axis=2).tolist(),
        variance=variance.tolist(),
        quantiles=quantiles.tolist(),
    )


def _pooled_moments(moments: list[tuple[float, float, int]]) -> tuple[float, float, int]:
    total = sum(n for _, _, n in moments)
    mean = sum(m * n for m, _, n in moments) / total
    spread = sum((n - 1) * v + n * (m - mean) ** 2 for m, v, n in moments)
    return mean, spread / (total - 1), total


def _moments(values: np.ndarray) -> tuple[float, float, int]:
    return float(values.mean()), float(values.var(ddof=1)) if values.size > 1 else 0.0, int(values.size)


# --- Decision ---


def _cell_statistic(
    frequency: float,
    sensor_id: int,
    golden: np.ndarray,
    golden_moments: tuple[float, float, int],
    test: np.ndarray,
    cfg: MetricConfig,
    spawn_key: tuple[int, ...],
) -> SensorStatistic:
    test_moments = _moments(test)
    degenerate = False
    try:
        t: float | None = welch_t_from_moments(golden_moments, test_moments)
        t_exceeded = abs(t) > cfg.t_threshold
    except DegenerateCellError:
        degenerate = True
        t = None
        t_exceeded = golden_moments[0] != test_moments[0]

    cell = FrequencyCell(frequency=frequency, golden_samples=golden, test_samples=test)
    distance = wasserstein(cell, cfg.order)
    threshold = bootstrap_threshold(golden, test.size, cfg.bootstrap, cfg.order, spawn_key)
    return SensorStatistic(
        frequency=frequency,
        sensor_id=sensor_id,
        t_statistic=t,
        wasserstein=distance,
        threshold=threshold,
        t_exceeded=t_exceeded,
        w_exceeded=distance > threshold,
        degenerate=degenerate,
    )


def _exceeded(cfg: MetricConfig, t_exceeded: bool, w_exceeded: bool) -> bool:
    if cfg.metric is Metric.TTEST:
        return t_exceeded
    if cfg.metric is Metric.WASSERSTEIN:
        return w_exceeded
    return t_exceeded and w_exceeded


def _pool_max(frequency: float, cells: list[SensorStatistic], cfg: MetricConfig) -> FrequencyStatistic:
    def abs_t(c: SensorStatistic) -> float:
        if c.t_statistic is None:
            return math.inf if c.t_exceeded else 0.0
        return abs(c.t_statistic)

    strongest_t = max(cells, key=abs_t)
    strongest_w = max(cells, key=lambda c: c.wasserstein - c.threshold)
    t_exceeded = any(c.t_exceeded for c in cells)
    w_exceeded = any(c.w_exceeded for c in cells)
    return FrequencyStatistic(
        frequency=frequency,
        t_statistic=strongest_t.t_statistic,
        wasserstein=strongest_w.wasserstein,
        threshold=strongest_w.threshold,
        t_exceeded=t_exceeded,
        w_exceeded=w_exceeded,
        exceeded=_exceeded(cfg, t_exceeded, w_exceeded),
        degenerate=strongest_t.degenerate,
    )


def _check_grids(golden: SignatureSummary, test: TraceSet) -> None:
    if tuple(golden.frequencies) != tuple(test.frequencies):
        raise GridMismatchError("Golden and test frequencies differ")
    if tuple(golden.sensor_ids) != tuple(test.sensor_ids):
        raise GridMismatchError(
            f"Golden sensors {list(golden.sensor_ids)} differ from test sensors {list(test.sensor_ids)}"
        )


def decide(
    golden: SignatureSummary | TraceSet,
    test: TraceSet,
    metric_config: MetricConfig | None = None,
) -> Verdict:
    """Compare a test acquisition with a golden summary, frequency by frequency.

    Args:
        golden: Enrolled summary, or a raw golden trace set.
        test: Fresh acquisition over the same (frequency, sensor) grid.
        metric_config: Metric, thresholds, bootstrap and pooling rule.

    Returns:
        Verdict with pooled per-frequency statistics and per-sensor detail.

    Raises:
        GridMismatchError: If the two grids differ.
    """
    cfg = metric_config or default_metric_config()
    summary = summarize(golden) if isinstance(golden, TraceSet) else golden
    _check_grids(summary, test)
    sensors = list(summary.sensor_ids)

    def frequency_statistics(i: int) -> tuple[FrequencyStatistic, list[SensorStatistic]]:
        frequency = float(summary.frequencies[i])
        if cfg.pooling is PoolingRule.MAX:
            cells = [
                _cell_statistic(
                    frequency,
                    sensor_id,
                    summary.cell_values(i, s),
                    summary.cell_moments(i, s),
                    test.samples[i, s].astype(float),
                    cfg,
                    (i, s),
                )
                for s, sensor_id in enumerate(sensors)
            ]
            return _pool_max(frequency, cells, cfg), cells

        golden_values = np.concatenate([summary.cell_values(i, s) for s in range(len(sensors))])
        golden_moments = _pooled_moments([summary.cell_moments(i, s) for s in range(len(sensors))])
        test_values = test.samples[i].astype(float).ravel()
        pooled = _cell_statistic(frequency, -1, golden_values, golden_moments, test_values, cfg, (i,))
        statistic = FrequencyStatistic(
            frequency=frequency,
            t_statistic=pooled.t_statistic,
            wasserstein=pooled.wasserstein,
            threshold=pooled.threshold,
            t_exceeded=pooled.t_exceeded,
            w_exceeded=pooled.w_exceeded,
            exceeded=_exceeded(cfg, pooled.t_exceeded, pooled.w_exceeded),
            degenerate=pooled.degenerate,
        )
        return statistic, []

    results = map_frequencies(frequency_statistics, len(summary.frequencies))
    per_frequency = [r[0] for r in results]
    per_sensor = [cell for r in results for cell in r[1]]

    tampered = any(f.exceeded for f in per_frequency)
    if not tampered:
        triggering = TriggeringMetric.NONE
    elif cfg.metric is Metric.BOTH:
        triggering = TriggeringMetric.BOTH
    else:
        triggering = TriggeringMetric(cfg.metric.value)

    verdict = Verdict(
        per_frequency=per_frequency,
        per_sensor=per_sensor,
        decision=Decision.TAMPERED if tampered else Decision.CLEAN,
        triggering_metric=triggering,
        metric=cfg.metric,
        pooling=cfg.pooling,
        order=cfg.order,
        significance=cfg.bootstrap.significance,
        golden_traces=summary.traces,
        test_traces=test.traces,
    )
    logger.info(
        "Verdict computed",
        decision=verdict.decision.value,
        triggering_metric=verdict.triggering_metric.value,
        exceeded=sum(f.exceeded for f in per_frequency),
        frequencies=len(per_frequency),
        max_abs_t=round(verdict.max_abs_t, 3),
    )
    return verdict


def average_distance_profile(reference: SignatureSummary | TraceSet, test: TraceSet) -> np.ndarray:
    """Per frequency, mean over sensors of |mean(test) - mean(reference)| in codes."""
    summary = summarize(reference) if isinstance(reference, TraceSet) else reference
    _check_grids(summary, test)
    golden_means = np.array(
        [[summary.cell_moments(i, s)[0] for s in range(len(summary.sensor_ids))] for i in range(len(summary.frequencies))]
    )
    profile: np.ndarray = np.abs(test.samples.mean(axis=2) - golden_means).mean(axis=1)
    return profile

from typing import NamedTuple

from hgat_forecast.exceptions import LayoutError


class TimestepLayout(NamedTuple):
    t_obs: int
    t_fut: int
    rate_hz: float

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    @property
    def total(self) -> int:
        return self.t_obs + self.t_fut


def make_layout(
    rate_hz: float, observed_seconds: float = 5.0, future_seconds: float = 6.0
) -> TimestepLayout:
    if rate_hz <= 0:
        raise LayoutError(f"scenario rate must be positive, got {rate_hz} Hz")
    if observed_seconds <= 0 or future_seconds <= 0:
        raise LayoutError("observed and future windows must be positive")
    t_obs = int(round(observed_seconds * rate_hz))
    t_fut = int(round(future_seconds * rate_hz))
    if t_obs < 1 or t_fut < 1:
        raise LayoutError(
            f"{rate_hz} Hz leaves an empty window ({t_obs} observed, {t_fut} future steps)"
        )
    return TimestepLayout(t_obs, t_fut, float(rate_hz))


def timestep_layout(config) -> TimestepLayout:
    """(T_obs, T_fut, rate) from a config: 10 Hz gives 50/60 steps."""
    return make_layout(
        config.SCENARIO_RATE_HZ, config.OBSERVED_SECONDS, config.FUTURE_SECONDS
    )

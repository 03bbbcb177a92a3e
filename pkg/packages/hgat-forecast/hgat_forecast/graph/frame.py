from dataclasses import dataclass

import numpy as np
from hgat_forecast.scenario.types import AgentTrack, wrap_angle


@dataclass(frozen=True)
class Frame:
    """Normalization frame: origin and heading of a pose in world
    coordinates. Local x points along the heading."""

    origin: np.ndarray
    heading: float

    @classmethod
    def from_track(cls, track: AgentTrack, step: int) -> "Frame":
        return cls(np.array(track.positions[step], dtype=float), float(track.headings[step]))

    @property
    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.heading), np.sin(self.heading)
        return np.array([[c, -s], [s, c]])

    def to_local(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.origin) @ self.rotation

    def to_world(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.origin

    def vectors_to_local(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=float) @ self.rotation

    def heading_to_local(self, headings) -> np.ndarray:
        return wrap_angle(np.asarray(headings, dtype=float) - self.heading)

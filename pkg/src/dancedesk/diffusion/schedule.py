"""Linear-beta noise schedule and the forward diffusion process."""
import numpy as np

from ..errors import RangeError

T_STEPS = 100
BETA_START = 1e-4
BETA_END = 0.02


class NoiseSchedule:
    """beta_t linear over t = 1..T; index 0 is the identity (alpha_bar_0 = 1)."""

    def __init__(self, t_steps: int = T_STEPS, beta_start: float = BETA_START, beta_end: float = BETA_END):
        self.t_steps = t_steps
        betas = np.zeros(t_steps + 1)
        betas[1:] = np.linspace(beta_start, beta_end, t_steps)
        self.betas = betas
        self.alphas = 1.0 - betas
        self.alpha_bars = np.cumprod(self.alphas)

    def forward_diffuse(self, x0: np.ndarray, t: int, noise: np.ndarray) -> np.ndarray:
        """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise."""
        if not 0 <= t <= self.t_steps:
            raise RangeError(f"t must be in [0, {self.t_steps}], got {t}")
        ab = self.alpha_bars[t]
        return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


def forward_diffuse(x0, t, noise, schedule: NoiseSchedule | None = None):
    return (schedule or NoiseSchedule()).forward_diffuse(x0, t, noise)

from dataclasses import dataclass, fields
from typing import Tuple

SCENARIOS = ("box1", "box2", "box3", "box4", "doa_sweep", "random_order_check")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Every parameter a scenario run needs.

    Attributes:
        scenario (str): One of SCENARIOS.
        N (int): Observation length for single-point Box scenarios.
        N_sweep (Tuple[int, ...]): Observation lengths swept by box1/box2.
        sigma2 (float): Noise variance (box1/box2 assumed and true, DOA true diagonal).
        epsilon (float): Variance of the first true-model entry in box1/box2.
        sigma1_sq (float): True noise variance in box3.
        sigma2_sq (float): Assumed noise variance in box3.
        theta0 (float): True scalar parameter for the Box scenarios.
        M (int): Number of array sensors.
        rho (Tuple[float, ...]): Noise correlation coefficients swept by doa_sweep.
        s (complex): Source amplitude.
        phi (float): Direction of arrival in radians.
        g_functions (Tuple[str, ...]): g-functions exercised by box4.
        theta0_sweep (Tuple[float, ...]): True parameters of the box1 efficiency sweep.
        jacobian_rho (float): Correlation at which doa_sweep checks the
            pseudo-true Jacobian on the sample-average path.
        jacobian_mc_samples (int): Draws behind that check.
        n_trials (int): Monte Carlo trials per sweep point.
        mc_samples (int): Samples for Monte Carlo expectations and normalizers.
        n_probe (int): Probe observations for proportional-score fits.
        n_random_problems (int): Problems drawn by random_order_check.
        seed (int): Experiment seed.
        z_threshold (float): Standard-error multiple for statistical checks.
        workers (int): Thread pool size.
        batch_size (int): Samples per Monte Carlo batch.
        output_dir (str): Directory receiving CSV files.
        gnuplot (bool): Also write a gnuplot script per CSV.
    """
    scenario: str
    N: int = 10
    N_sweep: Tuple[int, ...] = tuple(range(2, 61))
    sigma2: float = 1.0
    epsilon: float = 0.05
    sigma1_sq: float = 2.0
    sigma2_sq: float = 1.0
    theta0: float = 0.0
    M: int = 8
    rho: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    s: complex = complex(0.7071067811865476, 0.7071067811865476)
    phi: float = 0.39269908169872414
    g_functions: Tuple[str, ...] = ("identity", "vuong")
    theta0_sweep: Tuple[float, ...] = (-1.0, 0.0, 1.0)
    jacobian_rho: float = 0.5
    jacobian_mc_samples: int = 1000000
    n_trials: int = 100000
    mc_samples: int = 100000
    n_probe: int = 50
    n_random_problems: int = 100
    seed: int = 20240611
    z_threshold: float = 5.0
    workers: int = 4
    batch_size: int = 2000
    output_dir: str = "results"
    gnuplot: bool = False

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Environment
    ENVIRONMENT: str = Field(default="development", description="Environment name")
    DEBUG: bool = Field(default=False, description="Debug mode")
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")

    # Project
    PROJECT_NAME: str = Field(default="pdnsense", description="Project name")
    VERSION: str = Field(default="0.1.0", description="Package version")

    # Paths
    CONFIG_DIR: Path = Field(default=Path("config"), description="Default directory for network configs")
    SIGNATURE_STORE_DIR: Path = Field(
        default=Path("signatures"), description="Directory holding golden signature documents"
    )
    OUTPUT_DIR: Path = Field(default=Path("out"), description="Default directory for command outputs")
    METRICS_TEXTFILE: Path | None = Field(
        default=None, description="Prometheus textfile written after each command (disabled when unset)"
    )

    # Sensing
    TDC_TAPS: int = Field(default=64, ge=2, description="TDC delay-line length")
    TDC_GAIN: float = Field(default=1000.0, gt=0, description="TDC gain in codes per volt")
    SUPPLY_VOLTAGE: float = Field(default=0.85, gt=0, description="Quiescent on-die supply voltage (V)")
    NOISE_SIGMA: float = Field(default=0.5e-3, ge=0, description="Sensor voltage noise sigma (V)")
    ACTUATOR_CURRENT: float = Field(default=0.05, gt=0, description="Actuator current amplitude (A)")
    ACTUATOR_HARMONICS: int = Field(default=1, ge=1, le=5, description="Odd square-wave harmonics modeled")
    GRID_SIZE: int = Field(default=32, ge=1, description="Monitor blocks on the verifier chiplet")
    GRID_COLUMNS: int = Field(default=8, ge=1, description="Monitor blocks per grid row")
    PHASE_MODEL: str = Field(default="crest", description="Sampling phase model: crest or uniform")
    SAMPLING_RATE_HZ: float = Field(default=300e6, gt=0, description="TDC sampling rate (recorded only)")
    SENSING_INTERVAL_S: float = Field(default=1e-3, gt=0, description="Sensing interval (recorded only)")
    MAX_FREQUENCY_HZ: float = Field(default=50e9, gt=0, description="Upper validity bound of the solver")

    # PDN model
    ILL_CONDITION_LIMIT: float = Field(default=1e12, gt=1, description="Admittance condition number limit")
    MAX_RESONANCE_HZ: float = Field(default=100e9, gt=0, description="Cap for usable cavity resonances")
    BAND_WINDOW: float = Field(default=0.10, gt=0, lt=1, description="Relative window around a resonance")
    BAND_RESONANCES: int = Field(default=2, ge=1, description="Lowest distinct resonances used by the band")
    BAND_SIZE: int = Field(default=24, ge=1, description="Default sweep band size")

    # Tamper
    TROJAN_CAP_LIMIT: float = Field(default=100e-12, gt=0, description="Largest Trojan capacitance (F)")
    DETECTABILITY_FLOOR: float = Field(default=1e-6, gt=0, description="Minimum relative |Z| change of presets")

    # Statistics
    T_THRESHOLD: float = Field(default=4.5, gt=0, description="Welch |t| rejection threshold")
    BOOTSTRAP_RESAMPLES: int = Field(default=1000, ge=1, description="Bootstrap resamples per cell")
    SIGNIFICANCE: float = Field(default=0.01, gt=0, lt=1, description="Bootstrap significance level")
    WASSERSTEIN_ORDER: int = Field(default=1, ge=1, description="Order p of the Wasserstein distance")
    DEFAULT_METRIC: str = Field(default="both", description="Decision metric: ttest, wasserstein or both")
    POOLING: str = Field(default="max", description="Sensor pooling rule: max or concat")

    # Protocol
    KEY_ACTUATORS: int = Field(default=2, ge=1, description="Actuators per verification key")
    KEY_SENSORS: int = Field(default=4, ge=1, description="Sensors per verification key")
    SUMMARY_MODE: str = Field(default="full", description="Golden summary mode: full or quantiles")
    QUANTILE_RESOLUTION: int = Field(default=101, ge=2, description="Quantile points in quantile summaries")
    DEVICE_ID: str = Field(default="reference-device", description="Device identifier used for enrollment")
    STORE_WRITE_ATTEMPTS: int = Field(default=3, ge=1, description="Attempts for a signature store write")

    # Execution
    WORKERS: int = Field(default=1, ge=1, description="Threads used for per-frequency work")

    @field_validator("PHASE_MODEL", "DEFAULT_METRIC", "POOLING", "SUMMARY_MODE", mode="before")
    @classmethod
    def lowercase_choice(cls, v: str) -> str:
        return v.lower() if isinstance(v, str) else v

    @property
    def is_production(self) -> bool:
        return self.ENVIRONMENT.lower() in ("production", "prod")

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="PDNSENSE_", case_sensitive=True, env_parse_none_str="None"
    )


settings = Settings()

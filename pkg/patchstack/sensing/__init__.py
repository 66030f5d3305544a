from .sensor_sim import ProbeObservation, SensorModel, SensorParams, n_channels, sensor_model, simulate_probe

__all__ = ["ProbeObservation", "SensorModel", "SensorParams", "n_channels", "sensor_model", "simulate_probe"]

from hypothesis import HealthCheck, settings

# Deterministic property-test runs: the suite doubles as a verification
# harness, so a green run must mean the same thing every time.
settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")
